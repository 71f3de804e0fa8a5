"""Generalized Kennedy receiver with optimally displaced threshold detection."""

from .error_model import (
    ErrorProbability,
    error_probability,
    error_probability_kennedy,
    gain_db,
    homodyne_one_port,
    homodyne_two_port,
    kennedy_lower_bound,
)
from .optimizer import (
    GreedyConfig,
    OptimizationResult,
    brute_force_search,
    coordinate_descent,
    greedy_search,
    optimal_gamma_given_threshold,
    optimal_threshold_given_gamma,
)
from .params import Hypothesis, Policy, ReceiverParams, SignalConfig
from .photon_stats import (
    likelihood_ratio,
    map_decide,
    map_equivalent_threshold,
    mean_photons,
    photon_pmf,
    threshold_decide,
)

__all__ = [
    "ErrorProbability",
    "GreedyConfig",
    "Hypothesis",
    "OptimizationResult",
    "Policy",
    "ReceiverParams",
    "SignalConfig",
    "brute_force_search",
    "coordinate_descent",
    "error_probability",
    "error_probability_kennedy",
    "gain_db",
    "greedy_search",
    "homodyne_one_port",
    "homodyne_two_port",
    "kennedy_lower_bound",
    "likelihood_ratio",
    "map_decide",
    "map_equivalent_threshold",
    "mean_photons",
    "optimal_gamma_given_threshold",
    "optimal_threshold_given_gamma",
    "photon_pmf",
    "threshold_decide",
]
