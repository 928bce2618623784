"""Black-Scholes-Merton European call/put with continuous dividend yield.

The forecast close is the plain average of the call and put values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_SQRT2 = math.sqrt(2.0)


class PricingDomainError(ValueError):
    pass


@dataclass(frozen=True)
class PricingInputs:
    S: float
    K: float
    r: float
    q: float
    sigma: float
    T: float

    def __post_init__(self):
        for name in ("S", "K", "r", "q", "sigma", "T"):
            if not math.isfinite(getattr(self, name)):
                raise PricingDomainError(f"{name} must be finite")
        for name in ("S", "K", "T", "sigma"):
            if not getattr(self, name) > 0:
                raise PricingDomainError(f"{name} must be > 0, got {getattr(self, name)!r}")


@dataclass(frozen=True)
class OptionQuote:
    call: float
    put: float
    d1: float
    d2: float
    predicted_close: float


def std_normal_cdf(x: float) -> float:
    """Standard normal CDF via the complementary error function.

    ``erfc`` keeps full relative precision in the lower tail, so the result
    only reaches 0 or 1 through floating-point underflow/rounding.
    """
    if not math.isfinite(x):
        raise ValueError(f"std_normal_cdf needs a finite argument, got {x!r}")
    return 0.5 * math.erfc(-x / _SQRT2)


def d_terms(inputs: PricingInputs) -> tuple[float, float]:
    S, K, r, q, sigma, T = inputs.S, inputs.K, inputs.r, inputs.q, inputs.sigma, inputs.T
    vol_sqrt_t = sigma * math.sqrt(T)
    log_moneyness = math.log(S / K)
    d1 = (log_moneyness + (r - q + 0.5 * sigma * sigma) * T) / vol_sqrt_t
    d2 = (log_moneyness + (r - q - 0.5 * sigma * sigma) * T) / vol_sqrt_t
    return d1, d2


def price_options(inputs: PricingInputs) -> OptionQuote:
    d1, d2 = d_terms(inputs)
    disc_spot = inputs.S * math.exp(-inputs.q * inputs.T)
    disc_strike = inputs.K * math.exp(-inputs.r * inputs.T)
    call = disc_spot * std_normal_cdf(d1) - disc_strike * std_normal_cdf(d2)
    put = disc_strike * std_normal_cdf(-d2) - disc_spot * std_normal_cdf(-d1)
    return OptionQuote(call, put, d1, d2, (call + put) / 2)
