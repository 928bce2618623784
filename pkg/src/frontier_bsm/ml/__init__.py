"""From-scratch learners used as machine-learning baselines for the close-price forecast."""

from .dataset import SupervisedDataset, split_linear, windowize
from .ensemble import EnsembleModel, ensemble_predict, fit_ensemble
from .linear import RankDeficientError, RelativeRegressionModel, fit_relative_regression
from .mlp import MlpModel, MlpParams, TrainingDiverged, fit_mlp, loss_and_gradient
from .persistence import dumps_model, loads_model
from .tree import TreeModel, fit_tree
from .validation import ValidationResult, make_learner, sliding_window_validate
