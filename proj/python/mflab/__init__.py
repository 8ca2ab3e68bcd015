"""Mean-field stationary-regime laboratory.

Simulates families of N-object stochastic models, integrates their
deterministic limits, estimates invariant probabilities and measures how
close those estimates are to limit-flow invariance (Wasserstein-1).
"""

import json as _json

from ._mflab import (
    ConvergenceFailure,
    Domain,
    ExprParseError,
    IntegrationFailure,
    Model,
    ModelValidationError,
    PointCloudMeasure,
    RateExpr,
    __version__,
    detect_limit_set,
    dirac,
    find_fixed_point,
    flow,
    invariance_residual,
    marginal_moments,
    pushforward,
    recurrent_set_estimate,
    round_to_grid,
    semiflow_defect,
    simulate,
    stationary_sample,
    support_distance,
    test_function_gap,
    w1,
    w1_bruteforce,
    zoo_catalog,
)
from ._mflab import verify as _verify_raw


def verify(experiment, model, **kwargs):
    """Run one verification experiment and return the report as a dict.

    experiment: "hypothesis1" | "theorem" | "corollary" | "support"
    model: zoo name or path to a model JSON file
    Keyword arguments mirror the CLI flags (N_list, t_list, seed, replicas,
    burn_in, n_samples, spacing, dt, tolerance, resample_n, y0, threads,
    out_dir).
    """
    return _json.loads(_verify_raw(experiment, model, **kwargs))


__all__ = [
    "ConvergenceFailure",
    "Domain",
    "ExprParseError",
    "IntegrationFailure",
    "Model",
    "ModelValidationError",
    "PointCloudMeasure",
    "RateExpr",
    "__version__",
    "detect_limit_set",
    "dirac",
    "find_fixed_point",
    "flow",
    "invariance_residual",
    "marginal_moments",
    "pushforward",
    "recurrent_set_estimate",
    "round_to_grid",
    "semiflow_defect",
    "simulate",
    "stationary_sample",
    "support_distance",
    "test_function_gap",
    "verify",
    "w1",
    "w1_bruteforce",
    "zoo_catalog",
]
