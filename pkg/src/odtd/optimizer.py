"""Joint optimization of the decision threshold and the displacement.

The error probability is minimized over an integer threshold K_th and a
real displacement gamma. For fixed gamma the best threshold follows from a
monotone Laguerre-ratio condition; for fixed K_th the best gamma comes
from a bracketed golden-section line search. ``greedy_search`` walks
K_th one step at a time, re-optimizing gamma at each step, and relies on
P_e(K_th, gamma*(K_th)) being unimodal in K_th.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .error_model import ErrorProbability, error_probability, error_probability_many
from .laguerre import log_laguerre_neg
from .params import Hypothesis, Policy, ReceiverParams, SignalConfig
from .photon_stats import POISSON_NT, mean_photons

K_CAP = 500
GAMMA_TOL = 1e-6
COARSE_POINTS = 64
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

# verify the ratio monotonicity the threshold scan relies on; tests switch it on
check_scan_monotone = False


class ThresholdNotFoundError(RuntimeError):
    pass


class BracketWarning(RuntimeWarning):
    """Line-search minimum sits on the upper end of the displacement bracket."""


@dataclass(frozen=True)
class GreedyConfig:
    epsilon: float = 1e-12
    max_iters: int = 100
    k_cap: int = K_CAP

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass(frozen=True)
class TraceEntry:
    iteration: int
    k_th: int
    gamma: float
    p_e: float


@dataclass
class OptimizationResult:
    k_th_star: int
    gamma_star: float
    p_e: ErrorProbability
    trace: list[TraceEntry] = field(default_factory=list)
    converged: bool = True

    @property
    def policy(self) -> Policy:
        return Policy(self.k_th_star, self.gamma_star)


def _pe(params: ReceiverParams, beta: float, k_th: int, gamma: float) -> float:
    return error_probability(params, beta, Policy(k_th, gamma)).value


# -- threshold given displacement ------------------------------------------


def _threshold_lhs(params: ReceiverParams, n_plus: float, n_minus: float, k_hi: int) -> np.ndarray:
    """log of the ratio L_{K+1}(-z+)/L_{K+1}(-z-) for K = 0..k_hi."""
    nt, eta = params.n_thermal, params.eta
    if nt < POISSON_NT:
        # Poisson limit: ratio -> (n+/n-)^(K+1)
        if n_minus == 0.0:
            return np.full(k_hi + 1, math.inf)
        return (np.arange(k_hi + 1) + 1.0) * (math.log(n_plus) - math.log(n_minus))
    scale = nt * (eta * nt + 1.0)
    lp = log_laguerre_neg(k_hi + 1, n_plus / scale)
    lm = log_laguerre_neg(k_hi + 1, n_minus / scale)
    return (lp - lm)[1:]


def optimal_threshold_given_gamma(
    params: ReceiverParams, beta: float, gamma: float, *, k_cap: int = K_CAP
) -> int:
    """Smallest K_th >= 0 with

        L_{K_th+1}(-z+) / L_{K_th+1}(-z-) >= (p0/p1) exp(4 tau xi beta gamma / (N_t + 1/eta)),

    z+/- = <n'>_+/- / (N_t (eta N_t + 1)). Stepping K_th past this point
    would add more miss probability than it removes false alarms.
    """
    sig = SignalConfig(beta, gamma)
    n_plus = mean_photons(params, sig, Hypothesis.PLUS)
    n_minus = mean_photons(params, sig, Hypothesis.MINUS)
    if params.n_thermal < POISSON_NT:
        rhs = math.log(params.p0 / params.p1) + params.eta * (n_plus - n_minus)
    else:
        rhs = math.log(params.p0 / params.p1) + 4.0 * params.tau * params.xi * beta * gamma / (
            params.n_thermal + 1.0 / params.eta
        )
    k_hi = min(32, k_cap)
    while True:
        lhs = _threshold_lhs(params, n_plus, n_minus, k_hi)
        if check_scan_monotone and np.any(np.diff(lhs) < -1e-12 * np.abs(lhs[1:])):
            raise AssertionError("Laguerre ratio not increasing in K_th")
        hits = np.flatnonzero(lhs >= rhs)
        if hits.size:
            return int(hits[0])
        if k_hi >= k_cap:
            raise ThresholdNotFoundError(f"no threshold below k_cap={k_cap} (beta={beta}, gamma={gamma})")
        k_hi = min(4 * k_hi, k_cap)


# -- displacement given threshold ------------------------------------------


def gamma_bracket(params: ReceiverParams, beta: float) -> float:
    return max(3.0 * beta, beta + 10.0 * math.sqrt(params.n_thermal + 1.0))


def golden_section(f, a: float, b: float, tol: float = GAMMA_TOL) -> tuple[float, float]:
    """Minimize a unimodal ``f`` on [a, b]; returns (x, f(x))."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def _line_search(params: ReceiverParams, beta: float, k_th: int, lo: float, hi: float, points: int = COARSE_POINTS):
    """Coarse scan to pick a bracket, then golden section inside it.

    Returns (gamma, p_e, on_upper_edge).
    """
    grid = np.linspace(lo, hi, points)
    vals = error_probability_many(params, beta, k_th, grid)
    i = int(np.argmin(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, points - 1)]
    g, v = golden_section(lambda x: _pe(params, beta, k_th, x), a, b)
    # the scan point itself may beat the refined one on a flat landscape
    if vals[i] < v:
        g, v = float(grid[i]), float(vals[i])
    return float(g), float(v), i == points - 1


def optimal_gamma_given_threshold(params: ReceiverParams, beta: float, k_th: int) -> float:
    """Displacement minimizing P_e(k_th, gamma) on [0, max(3 beta, beta + 10 sqrt(N_t + 1))].

    Emits :class:`BracketWarning` if the minimum lands on the upper edge.
    """
    hi = gamma_bracket(params, beta)
    g, _, edge = _line_search(params, beta, k_th, 0.0, hi)
    if edge:
        warnings.warn(f"optimal gamma at bracket edge {hi:.6g} for k_th={k_th}", BracketWarning, stacklevel=2)
    return g


def _log_head_derivative(params: ReceiverParams, n_mean: float, k_th: int) -> float:
    """log of -(1/a) e^{a n} d/dn Pr(K <= k_th | n), a = 1/(N_t + 1/eta).

    The sum over K <= k_th of the weighted h-terms telescopes to
    c^k_th/(c+1)^(k_th+1) L^1_k_th(-z) with c = eta N_t.
    """
    c = params.eta * params.n_thermal
    z = n_mean / (params.n_thermal * (c + 1.0))
    log_l1 = log_laguerre_neg(k_th, z, alpha=1.0)[k_th]
    return k_th * math.log(c) - (k_th + 1) * math.log1p(c) + log_l1


def displacement_gradient(params: ReceiverParams, beta: float, k_th: int, gamma: float) -> float:
    """Analytic dP_e/dgamma at fixed threshold (N_t > 0)."""
    if params.n_thermal < POISSON_NT:
        raise ValueError("analytic gradient needs N_t > 0")
    sig = SignalConfig(beta, gamma)
    a = 1.0 / (params.n_thermal + 1.0 / params.eta)
    n_plus = mean_photons(params, sig, Hypothesis.PLUS)
    n_minus = mean_photons(params, sig, Hypothesis.MINUS)
    xb = params.xi * beta
    miss = params.p1 * (gamma + xb) * math.exp(_log_head_derivative(params, n_plus, k_th) - a * n_plus)
    fa = params.p0 * (gamma - xb) * math.exp(_log_head_derivative(params, n_minus, k_th) - a * n_minus)
    return -2.0 * params.tau * a * (miss - fa)


def displacement_offset(params: ReceiverParams, beta: float, k_th: int) -> float:
    """gamma*(k_th) - xi beta, resolved to full relative precision.

    Solves the stationarity condition in the form

        gamma - xi beta = e^{-4 tau xi beta gamma a} (p1/p0) (gamma + xi beta) H+(gamma) / H-(gamma)

    for the offset itself, so offsets far below the resolution of gamma
    (large beta) are still meaningful. The root is bracketed in log(offset).
    """
    if params.n_thermal < POISSON_NT:
        raise ValueError("offset solver needs N_t > 0")
    if beta == 0.0 or params.xi == 0.0:
        raise ValueError("offset undefined without interference (beta = 0 or xi = 0)")
    xb = params.xi * beta
    a = 1.0 / (params.n_thermal + 1.0 / params.eta)

    def log_rhs(gamma: float) -> float:
        sig = SignalConfig(beta, gamma)
        n_plus = mean_photons(params, sig, Hypothesis.PLUS)
        n_minus = mean_photons(params, sig, Hypothesis.MINUS)
        return (
            -4.0 * params.tau * xb * gamma * a
            + math.log(params.p1 / params.p0)
            + math.log(gamma + xb)
            + _log_head_derivative(params, n_plus, k_th)
            - _log_head_derivative(params, n_minus, k_th)
        )

    def resid(u: float) -> float:
        return u - log_rhs(xb + math.exp(u))

    base = log_rhs(xb)
    lo, hi = base - 60.0, math.log(gamma_bracket(params, beta))
    if resid(lo) >= 0:
        lo = base - 700.0
    u = brentq(resid, lo, hi, xtol=1e-14, rtol=1e-14, maxiter=500)
    return math.exp(u)


# -- joint searches --------------------------------------------------------


def greedy_search(params: ReceiverParams, beta: float, config: GreedyConfig | None = None) -> OptimizationResult:
    """Greedy walk over K_th with gamma re-optimized at every step.

    Starts at K_th = K_th*(xi beta), gamma = gamma*(K_th). The walk moves
    up unless P_e at the start already beats P_e at K_th + 1 (ties move up),
    and stops at the first step whose relative improvement is <= epsilon,
    after ``max_iters`` evaluations, or when K_th would go negative. The
    last improving iterate is returned; ``converged`` is false if the
    iteration cap was hit or its displacement sits on the bracket edge.
    """
    config = config or GreedyConfig()
    hi = gamma_bracket(params, beta)
    gammas: dict[int, float] = {}
    on_edge: set[int] = set()

    def gamma_of(k: int) -> float:
        if k not in gammas:
            g, _, edge = _line_search(params, beta, k, 0.0, hi)
            gammas[k] = g
            if edge:
                on_edge.add(k)
        return gammas[k]

    try:
        k = optimal_threshold_given_gamma(params, beta, params.xi * beta, k_cap=config.k_cap)
    except ThresholdNotFoundError:
        k = 0
    d = 1
    if _pe(params, beta, k, gamma_of(k)) < _pe(params, beta, k + 1, gamma_of(k + 1)):
        d = -1

    trace: list[TraceEntry] = []
    best = 1.0
    last: TraceEntry | None = None
    converged = True
    i = 1
    while k >= 0:
        if i > config.max_iters or k > config.k_cap:
            converged = False
            break
        entry = TraceEntry(i, k, gamma_of(k), _pe(params, beta, k, gamma_of(k)))
        trace.append(entry)
        if not (best - entry.p_e) / best > config.epsilon:
            break
        best, last = entry.p_e, entry
        k += d
        i += 1
    last = last or trace[0]
    # a displacement pinned to the bracket is not a stationary optimum
    converged = converged and last.k_th not in on_edge
    return OptimizationResult(
        last.k_th,
        last.gamma,
        error_probability(params, beta, Policy(last.k_th, last.gamma)),
        trace,
        converged,
    )


def brute_force_search(
    params: ReceiverParams,
    beta: float,
    k_th_max: int,
    gamma_grid=(0.0, None, 1e-3),
) -> OptimizationResult:
    """Exhaustive minimum over K_th in [0, k_th_max] and a gamma grid.

    ``gamma_grid`` is either an explicit array or (lo, hi, step); ``hi=None``
    uses the default bracket. Each threshold's best grid cell is refined
    by golden section between its neighbours.
    """
    if isinstance(gamma_grid, tuple):
        lo, hi, step = gamma_grid
        hi = gamma_bracket(params, beta) if hi is None else hi
        grid = np.arange(lo, hi + 0.5 * step, step)
        if grid[-1] < hi:
            grid = np.append(grid, hi)
    else:
        grid = np.asarray(gamma_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty gamma grid")

    trace: list[TraceEntry] = []
    best: tuple[float, int, float] | None = None
    for k in range(k_th_max + 1):
        vals = error_probability_many(params, beta, k, grid)
        j = int(np.argmin(vals))
        g, v = float(grid[j]), float(vals[j])
        if grid.size > 2:
            a, b = grid[max(j - 1, 0)], grid[min(j + 1, grid.size - 1)]
            gr, vr = golden_section(lambda x: _pe(params, beta, k, x), a, b, tol=1e-9)
            if vr < v:
                g, v = gr, vr
        trace.append(TraceEntry(k + 1, k, g, v))
        if best is None or v < best[0]:
            best = (v, k, g)
    _, k, g = best
    return OptimizationResult(k, g, error_probability(params, beta, Policy(k, g)), trace, True)


def coordinate_descent(
    params: ReceiverParams, beta: float, start: Policy, *, max_iters: int = 100
) -> OptimizationResult:
    """Alternate threshold and displacement updates until neither moves.

    Can stall at a point that is not the joint optimum: when successive
    gamma updates are too small to shift K_th*(gamma).
    """
    k, g = start.k_th, start.gamma
    trace: list[TraceEntry] = []
    converged = False
    for it in range(1, max_iters + 1):
        k_new = optimal_threshold_given_gamma(params, beta, g)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BracketWarning)
            g_new = optimal_gamma_given_threshold(params, beta, k_new)
        trace.append(TraceEntry(it, k_new, g_new, _pe(params, beta, k_new, g_new)))
        done = k_new == k and abs(g_new - g) <= 10 * GAMMA_TOL
        k, g = k_new, g_new
        if done:
            converged = True
            break
    return OptimizationResult(k, g, error_probability(params, beta, Policy(k, g)), trace, converged)
