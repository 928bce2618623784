"""Reference values for Afric Industries SA (AFI), Casablanca.

Only the February 2016 closes (and the 29 January 2016 close preceding them)
are real observations. ``afi_reconstructed()`` loads a bundled daily history
for March 2015 - March 2016 in which every other month is synthetic, built so
that its sample standard deviation of closes equals the listed monthly
figure to three decimals; March 2016 is a synthetic random walk. Use it for
exercising the pipeline, not for drawing market conclusions.
"""

from __future__ import annotations

from datetime import date
from importlib import resources

from .market_data import PriceSeries, load_price_series

AFI_CLOSES_JAN29_FEB2016 = (
    (date(2016, 1, 29), 328.0),
    (date(2016, 2, 1), 329.5),
    (date(2016, 2, 2), 330.0),
    (date(2016, 2, 3), 330.0),
    (date(2016, 2, 4), 329.5),
    (date(2016, 2, 5), 329.5),
    (date(2016, 2, 8), 326.5),
    (date(2016, 2, 9), 328.5),
    (date(2016, 2, 10), 330.0),
    (date(2016, 2, 11), 330.0),
    (date(2016, 2, 12), 333.0),
    (date(2016, 2, 15), 334.5),
    (date(2016, 2, 16), 331.5),
    (date(2016, 2, 17), 332.5),
    (date(2016, 2, 18), 333.5),
    (date(2016, 2, 19), 335.5),
    (date(2016, 2, 22), 336.5),
    (date(2016, 2, 23), 337.5),
    (date(2016, 2, 24), 336.0),
    (date(2016, 2, 25), 337.5),
    (date(2016, 2, 26), 338.5),
    (date(2016, 2, 29), 339.5),
)

AFI_MONTHLY_SIGMAS = (
    ((2015, 3), 6.464),
    ((2015, 4), 7.429),
    ((2015, 5), 8.472),
    ((2015, 6), 5.543),
    ((2015, 7), 1.586),
    ((2015, 8), 2.502),
    ((2015, 9), 1.451),
    ((2015, 10), 3.499),
    ((2015, 11), 4.566),
    ((2015, 12), 3.738),
    ((2016, 1), 7.871),
    ((2016, 2), 3.743),
)

AFI_SIGMA_SUM = 56.864
AFI_MEAN_DRIFT_FEB2016 = 0.001640969

# worksheet for the 1 March 2016 forecast
AFI_MARCH1_INPUTS = {"S": 329.5, "mean": 0.001640969, "T": 0.164, "r": 0.0248, "q": 0.0589, "sigma": 56.864}
AFI_MARCH1_OUTPUTS = {
    "K": 330.0411432,
    "d1": 11.51376833,
    "d2": -11.51439655,
    "call": 326.3324849,
    "put": 328.7015259,
    "predicted_close": 327.5170054,
}


def afi_feb2016_series() -> PriceSeries:
    dates, closes = zip(*AFI_CLOSES_JAN29_FEB2016)
    return PriceSeries.from_closes("AFI", dates, closes)


def afi_reconstructed_path():
    return resources.files("frontier_bsm").joinpath("data/afi_reconstructed.csv")


def afi_reconstructed() -> PriceSeries:
    with resources.as_file(afi_reconstructed_path()) as path:
        return load_price_series(path, instrument="AFI")
