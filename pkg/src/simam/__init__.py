"""Monotone single-index multivariate autoregression (SIMAM) for sparse network estimation."""
from .core_math import (hard_threshold, induced_ordering, iso_wrt, orth_project, pava,
                        sparse_normalize)
from .estimator import fit_network, fit_node, predict_one_step, rollout_predict
from .model import (DirectionVector, EarlyStop, FittedModel, MonotoneStepFunction, NodeConfig,
                    TimeSeriesMatrix, validate_series)
from .simulation import Design, gen_ground_truth, simulate_series
from .stats import network_rmse, paired_t_test, per_node_rmse

__version__ = "0.1.0"
