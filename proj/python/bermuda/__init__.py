"""Regression Monte Carlo pricing of Bermudan options.

Thin wrapper over the compiled extension; see the package README for the
command line tool and the experiment harness.
"""

from ._core import (
    ContinuationEstimator,
    DpConfig,
    EstimatorChain,
    ExerciseGrid,
    GbmParams,
    PathEnsemble,
    PayoffSpec,
    RunPlan,
    __version__,
    backward_induct,
    bandwidth_rule,
    boundary_alpha_fit,
    evaluate_payoff,
    lattice_max_call_2d,
    lower_bound_price,
    power_put_c0,
    replicate,
    set_max_threads,
    simulate_gbm,
    tilde_price,
)

__all__ = [
    "ContinuationEstimator",
    "DpConfig",
    "EstimatorChain",
    "ExerciseGrid",
    "GbmParams",
    "PathEnsemble",
    "PayoffSpec",
    "RunPlan",
    "__version__",
    "backward_induct",
    "bandwidth_rule",
    "boundary_alpha_fit",
    "evaluate_payoff",
    "lattice_max_call_2d",
    "lower_bound_price",
    "power_put_c0",
    "replicate",
    "set_max_threads",
    "simulate_gbm",
    "tilde_price",
]
