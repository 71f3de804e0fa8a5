"""Error probabilities of threshold detection and of the homodyne baselines."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import Hypothesis, Policy, ReceiverParams, SignalConfig
from .photon_stats import default_k_max, log_pmf_from_mean, log_pmf_many, mean_photons


@dataclass(frozen=True)
class ErrorProbability:
    """Total error split into false alarm (MINUS sent, K > k_th) and miss
    (PLUS sent, K <= k_th), both already weighted by their priors."""

    component_minus: float
    component_plus: float

    @property
    def value(self) -> float:
        return self.component_minus + self.component_plus

    def __float__(self) -> float:
        return self.value


def _head(params: ReceiverParams, n_mean: float, k_th: int) -> float:
    """Pr(K <= k_th)."""
    return math.fsum(np.exp(log_pmf_from_mean(params, n_mean, k_th)))


def _tail(params: ReceiverParams, n_mean: float, k_th: int) -> float:
    """Pr(K > k_th), summed directly so small values keep relative precision."""
    k_max = max(default_k_max(params, n_mean), k_th + 30)
    return math.fsum(np.exp(log_pmf_from_mean(params, n_mean, k_max)[k_th + 1 :]))


def error_probability(params: ReceiverParams, beta: float, policy: Policy) -> ErrorProbability:
    """P_e(K_th, gamma) = p0 Pr(K > K_th | -beta) + p1 Pr(K <= K_th | +beta)."""
    sig = SignalConfig(beta, policy.gamma)
    fa = _tail(params, mean_photons(params, sig, Hypothesis.MINUS), policy.k_th)
    miss = _head(params, mean_photons(params, sig, Hypothesis.PLUS), policy.k_th)
    return ErrorProbability(params.p0 * fa, params.p1 * miss)


def error_probability_many(params: ReceiverParams, beta: float, k_th: int, gammas) -> np.ndarray:
    """P_e(k_th, gamma) over an array of displacements (values only)."""
    gammas = np.asarray(gammas, dtype=float)
    if np.any(gammas < 0) or beta < 0:
        raise ValueError("beta and gamma must be non-negative")
    quad = beta * beta + gammas * gammas
    cross = 2.0 * params.xi * beta * gammas
    n_minus = params.tau * np.maximum(quad - cross, 0.0) + params.nu
    n_plus = params.tau * (quad + cross) + params.nu
    miss = np.exp(log_pmf_many(params, n_plus, k_th)).sum(axis=1)
    k_max = max(default_k_max(params, float(n_minus.max())), k_th + 30)
    fa = np.exp(log_pmf_many(params, n_minus, k_max)[:, k_th + 1 :]).sum(axis=1)
    return params.p0 * fa + params.p1 * miss


def error_probability_kennedy(params: ReceiverParams, n_signal: float, k_th: int) -> ErrorProbability:
    """Kennedy receiver with threshold detection: gamma = beta = sqrt(N_s)."""
    beta = math.sqrt(n_signal)
    return error_probability(params, beta, Policy(k_th, beta))


def kennedy_lower_bound(params: ReceiverParams, k_th: int) -> float:
    """p0 (eta N_t / (eta N_t + 1))^(k_th + 1), the large-N_s floor at xi = 1, nu = 0."""
    c = params.eta * params.n_thermal
    return params.p0 * (c / (c + 1.0)) ** (k_th + 1)


def q_function(x: float) -> float:
    """Standard normal tail Pr(X > x)."""
    # math.erfc keeps full relative precision deep into the tail
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def _gaussian_map_error(p0: float, snr: float) -> float:
    p1 = 1.0 - p0
    if snr <= 0.0:
        return min(p0, p1)
    root = math.sqrt(snr)
    shift = math.log(p1 / p0) / (2.0 * root)
    return p0 * q_function(root - shift) + p1 * q_function(root + shift)


def homodyne_snr_one_port(params: ReceiverParams, n_signal: float) -> float:
    return 4.0 * params.tau * params.xi**2 * n_signal / (2.0 * params.n_thermal + 1.0 / params.eta)


def homodyne_snr_two_port(params: ReceiverParams, n_signal: float) -> float:
    return 4.0 * n_signal / (2.0 * params.n_thermal + 1.0 / params.eta)


def homodyne_one_port(params: ReceiverParams, n_signal: float) -> float:
    """Large-displacement limit of threshold detection (one-port homodyne)."""
    if n_signal < 0:
        raise ValueError(f"n_signal must be non-negative, got {n_signal}")
    return _gaussian_map_error(params.p0, homodyne_snr_one_port(params, n_signal))


def homodyne_two_port(params: ReceiverParams, n_signal: float) -> float:
    """Two-port (balanced) homodyne; reduces to Q(sqrt(4 N_s / (2 N_t + 1/eta))) at equal priors."""
    if n_signal < 0:
        raise ValueError(f"n_signal must be non-negative, got {n_signal}")
    return _gaussian_map_error(params.p0, homodyne_snr_two_port(params, n_signal))


def one_port_gaussian_moments(params: ReceiverParams, beta: float, gamma: float):
    """Gaussian approximation of the detected count at large gamma.

    Returns (mean_minus, mean_plus, variance).
    """
    eta, tau, xi, nt = params.eta, params.tau, params.xi, params.n_thermal
    mean_minus = eta * (tau * (gamma**2 - 2 * xi * beta * gamma) + nt)
    mean_plus = eta * (tau * (gamma**2 + 2 * xi * beta * gamma) + nt)
    var = eta**2 * tau * gamma**2 * (2 * nt + 1.0 / eta)
    return mean_minus, mean_plus, var


def one_port_threshold(params: ReceiverParams, beta: float, gamma: float) -> float:
    """MAP count threshold n_th for the Gaussian one-port model."""
    eta, nt = params.eta, params.n_thermal
    return (
        eta * params.tau * gamma**2
        + eta * nt
        - eta * gamma * (2 * nt + 1.0 / eta) / (4 * params.xi * beta) * math.log(params.p1 / params.p0)
    )


def one_port_gaussian_error(params: ReceiverParams, beta: float, gamma: float, threshold: float) -> float:
    """Error of deciding MINUS below ``threshold`` under the Gaussian one-port model."""
    m_minus, m_plus, var = one_port_gaussian_moments(params, beta, gamma)
    sd = math.sqrt(var)
    return params.p0 * q_function((threshold - m_minus) / sd) + params.p1 * q_function((m_plus - threshold) / sd)


@dataclass(frozen=True)
class Gain:
    db: float
    clamped: bool = False


_TINY = 1e-300


def gain_db(params: ReceiverParams, n_signal: float, policy_optimum: ErrorProbability | float) -> Gain:
    """10 log10(P_e two-port homodyne / P_e ODTD).

    Either probability at or below 1e-300 is clamped to it and the result
    flagged ``clamped``.
    """
    p_odtd = float(policy_optimum)
    p_hom = homodyne_two_port(params, n_signal)
    clamped = p_odtd <= _TINY or p_hom <= _TINY
    return Gain(10.0 * math.log10(max(p_hom, _TINY) / max(p_odtd, _TINY)), clamped)
