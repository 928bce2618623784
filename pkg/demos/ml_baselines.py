"""Fit the tree, MLP and ensemble baselines on a seeded random walk.

Also runs sliding-window validation, which reports how often each learner
calls the direction of the next move correctly.

    python demos/ml_baselines.py
"""

from datetime import date, timedelta

import numpy as np

from frontier_bsm import PriceBar, PriceSeries
from frontier_bsm.evaluation import regression_metrics
from frontier_bsm.ml import MlpParams, fit_ensemble, fit_mlp, fit_tree, sliding_window_validate, split_linear, windowize

rng = np.random.default_rng(7)
n = 400
days = [d for d in (date(2015, 1, 1) + timedelta(days=k) for k in range(2 * n)) if d.weekday() < 5][:n]
close = 100.0 * np.exp(np.cumsum(rng.normal(0, 0.01, n)))
# opens gap away from the previous close so no feature is an exact copy of another
opens = np.concatenate([[100.0], close[:-1]]) * np.exp(rng.normal(0, 0.003, n))
bars = tuple(
    PriceBar(d, o, max(o, c) * 1.002, min(o, c) * 0.998, c, 10_000.0)
    for d, o, c in zip(days, opens.tolist(), close.tolist())
)
series = PriceSeries("WALK", bars)

data = windowize(series, window_size=1, horizon=1, attributes=("open", "high", "low"))
train, test = split_linear(data, 0.8)
naive = test.column("close-0")
print(f"{len(train)} training rows, {len(test)} test rows")
print(f"previous close   rmse {regression_metrics(naive, test.y).rmse:.4f}")

models = {
    "tree": fit_tree(train, max_depth=20, minimal_gain=0.01),
    "mlp": fit_mlp(train, MlpParams(cycles=500, seed=0)),
    "ensemble": fit_ensemble(train, minimal_gain=0.01),
}
for name, model in models.items():
    m = regression_metrics(model.predict(test), test.y)
    print(f"{name:16} rmse {m.rmse:.4f}  relative error {m.relative_error_pct.mean:.3f}%")

print()
for learner in ("tree", "mlp"):
    result = sliding_window_validate(series, learner, train_width=60, step=20, test_width=20, seed=0)
    print(f"{learner:5} over {len(result.folds)} folds  {result.format()}")
