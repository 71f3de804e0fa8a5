"""Photon-count statistics of the displaced, thermally contaminated signal.

The detected count K for hypothesis +/- follows

    P(K) = (eta N_t)^K / (eta N_t + 1)^(K+1)
           * exp(-<n'> / (N_t + 1/eta)) * L_K(-<n'> / (N_t (eta N_t + 1)))

with <n'>_+/- = tau (beta^2 + gamma^2 +/- 2 xi beta gamma) + nu. Below
``POISSON_NT`` thermal photons the Poisson limit with mean eta <n'> is
used instead, since the expression above is singular at N_t = 0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, xlogy

from .laguerre import K_MAX, _check_order, weighted_laguerre_log_terms_many, weighted_laguerre_terms
from .params import Hypothesis, ReceiverParams, SignalConfig

POISSON_NT = 1e-12

# map_equivalent_threshold sentinels; threshold_decide understands both
ALWAYS_MINUS = None
ALWAYS_PLUS = -1


@dataclass(frozen=True)
class PhotonPMF:
    probs: np.ndarray
    tail_mass: float

    @property
    def k_max(self) -> int:
        return len(self.probs) - 1

    def mean(self) -> float:
        return float(np.dot(np.arange(len(self.probs)), self.probs))

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.probs)


def mean_photons(params: ReceiverParams, sig: SignalConfig, hyp: Hypothesis) -> float:
    """<n'> = tau (beta^2 + gamma^2 +/- 2 xi beta gamma) + nu."""
    b, g = sig.beta, sig.gamma
    cross = 2.0 * params.xi * b * g * hyp.sign
    # clamp the rounding residue when xi = 1 and gamma = beta
    return params.tau * max(b * b + g * g + cross, 0.0) + params.nu


def default_k_max(params: ReceiverParams, n_mean: float) -> int:
    """Truncation that leaves a negligible tail at desk-scale parameters."""
    m = params.eta * (n_mean + params.n_thermal)
    return math.ceil(m + 20.0 * math.sqrt(m * (params.n_thermal + 1.0)) + 30.0)


def log_pmf_from_mean(params: ReceiverParams, n_mean: float, k_max: int) -> np.ndarray:
    """log P(K) for K = 0..k_max given the mean photon number <n'>."""
    k_max = _check_order(k_max, K_MAX)
    eta, nt = params.eta, params.n_thermal
    if nt < POISSON_NT:
        mu = eta * n_mean
        k = np.arange(k_max + 1)
        return xlogy(k, mu) - mu - gammaln(k + 1)
    c = eta * nt
    z = n_mean / (nt * (c + 1.0))
    return weighted_laguerre_terms(c, z, k_max).log_terms - c * z


def log_pmf_many(params: ReceiverParams, n_means, k_max: int) -> np.ndarray:
    """Vectorized :func:`log_pmf_from_mean`; one row per mean."""
    k_max = _check_order(k_max, K_MAX)
    n_means = np.atleast_1d(np.asarray(n_means, dtype=float))
    eta, nt = params.eta, params.n_thermal
    if nt < POISSON_NT:
        mu = eta * n_means[:, None]
        k = np.arange(k_max + 1)[None, :]
        return xlogy(k, mu) - mu - gammaln(k + 1)
    c = eta * nt
    z = n_means / (nt * (c + 1.0))
    return weighted_laguerre_log_terms_many(c, z, k_max) - (c * z)[:, None]


def pmf_from_mean(params: ReceiverParams, n_mean: float, k_max: int | None = None) -> PhotonPMF:
    if k_max is None:
        k_max = default_k_max(params, n_mean)
    probs = np.exp(log_pmf_from_mean(params, n_mean, k_max))
    return PhotonPMF(probs, 1.0 - math.fsum(probs))


def photon_pmf(
    params: ReceiverParams,
    sig: SignalConfig,
    hyp: Hypothesis,
    k_max: int | None = None,
) -> PhotonPMF:
    """Truncated count distribution P(K | +/-beta, gamma), K = 0..k_max.

    ``k_max`` defaults to :func:`default_k_max`; the mass beyond it is
    reported as ``tail_mass``.
    """
    return pmf_from_mean(params, mean_photons(params, sig, hyp), k_max)


def _log_pmf_pair(params: ReceiverParams, sig: SignalConfig, k_max: int):
    lp_minus = log_pmf_from_mean(params, mean_photons(params, sig, Hypothesis.MINUS), k_max)
    lp_plus = log_pmf_from_mean(params, mean_photons(params, sig, Hypothesis.PLUS), k_max)
    return lp_minus, lp_plus


def log_likelihood_ratio(params: ReceiverParams, sig: SignalConfig, K: int) -> float:
    lp_minus, lp_plus = _log_pmf_pair(params, sig, K)
    return float(lp_plus[K] - lp_minus[K])


def likelihood_ratio(params: ReceiverParams, sig: SignalConfig, K: int) -> float:
    """g(K) = P(K | +beta, gamma) / P(K | -beta, gamma).

    Increasing in K; may overflow to ``inf`` for very large counts.
    """
    with np.errstate(over="ignore"):
        return float(np.exp(log_likelihood_ratio(params, sig, K)))


def _decide_plus(params: ReceiverParams, lp_minus, lp_plus):
    # tie -> MINUS
    return math.log(params.p1) + lp_plus > math.log(params.p0) + lp_minus


def map_decide(params: ReceiverParams, sig: SignalConfig, K: int) -> Hypothesis:
    """MAP decision for an observed count K; ties resolve to MINUS."""
    lp_minus, lp_plus = _log_pmf_pair(params, sig, K)
    if _decide_plus(params, lp_minus[K], lp_plus[K]):
        return Hypothesis.PLUS
    return Hypothesis.MINUS


def threshold_decide(K: int, k_th: int | None) -> Hypothesis:
    """MINUS iff K <= k_th. ``k_th=None`` never decides PLUS."""
    if k_th is ALWAYS_MINUS or K <= k_th:
        return Hypothesis.MINUS
    return Hypothesis.PLUS


def map_equivalent_threshold(params: ReceiverParams, sig: SignalConfig, *, k_cap: int = K_MAX) -> int | None:
    """Threshold K_th at which the MAP rule switches from MINUS to PLUS.

    Returns ``ALWAYS_PLUS`` (-1) if even K=0 is decided PLUS, and
    ``ALWAYS_MINUS`` (None) if the likelihood ratio never exceeds p0/p1.
    Exhausting ``k_cap`` while the ratio is still rising emits a
    ``RuntimeWarning`` before returning ``ALWAYS_MINUS``.
    """
    n_minus = mean_photons(params, sig, Hypothesis.MINUS)
    n_plus = mean_photons(params, sig, Hypothesis.PLUS)
    if n_plus == n_minus:
        # identical hypotheses, g(K) = 1 for every K
        return ALWAYS_PLUS if params.p1 > params.p0 else ALWAYS_MINUS

    n = 64
    while True:
        n = min(n, k_cap)
        lp_minus = log_pmf_from_mean(params, n_minus, n)
        lp_plus = log_pmf_from_mean(params, n_plus, n)
        hits = np.flatnonzero(_decide_plus(params, lp_minus, lp_plus))
        if hits.size:
            return int(hits[0]) - 1
        if n >= k_cap:
            warnings.warn(
                f"likelihood ratio did not exceed p0/p1 up to K={k_cap}; treating as always-MINUS",
                RuntimeWarning,
                stacklevel=2,
            )
            return ALWAYS_MINUS
        n *= 4
