import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from odtd.error_model import error_probability
from odtd.laguerre import laguerre, laguerre_gen
from odtd.optimizer import (
    BracketWarning,
    GreedyConfig,
    ThresholdNotFoundError,
    _line_search,
    brute_force_search,
    coordinate_descent,
    displacement_gradient,
    displacement_offset,
    gamma_bracket,
    golden_section,
    greedy_search,
    optimal_gamma_given_threshold,
    optimal_threshold_given_gamma,
)
from odtd.params import Policy, ReceiverParams

BETA = 2.0


@pytest.fixture(scope="module")
def ref_greedy():
    return greedy_search(ReceiverParams(), BETA)


def pe(params, beta, k, g):
    return error_probability(params, beta, Policy(k, g)).value


# -- threshold given displacement ------------------------------------------


def test_threshold_at_reference_point(defaults):
    assert optimal_threshold_given_gamma(defaults, BETA, 2.25) == 2


@given(gamma=st.floats(0.05, 6.0))
def test_threshold_is_direct_argmin(gamma):
    p = ReceiverParams()
    vals = [pe(p, BETA, k, gamma) for k in range(40)]
    k = optimal_threshold_given_gamma(p, BETA, gamma)
    assert vals[k] == pytest.approx(min(vals), rel=1e-12)


@pytest.mark.parametrize("ns", [0.5, 2.0, 6.0, 12.0])
def test_kennedy_specialization(ns):
    # at gamma = beta the condition only involves the Kennedy means 2 tau N_s (1 +/- xi) + nu
    p = ReceiverParams()
    beta = math.sqrt(ns)
    scale = p.n_thermal * (p.eta * p.n_thermal + 1)
    zp = (2 * p.tau * ns * (1 + p.xi) + p.nu) / scale
    zm = (2 * p.tau * ns * (1 - p.xi) + p.nu) / scale
    rhs = math.exp(4 * p.tau * p.xi * ns / (p.n_thermal + 1 / p.eta))
    expected = next(k for k in range(200) if laguerre(k + 1, -zp) / laguerre(k + 1, -zm) >= rhs)
    assert optimal_threshold_given_gamma(p, beta, beta) == expected


def test_threshold_cap_reported(defaults):
    with pytest.raises(ThresholdNotFoundError):
        optimal_threshold_given_gamma(defaults.with_(p0=1 - 1e-15), 0.05, 0.05, k_cap=3)


# -- displacement given threshold ------------------------------------------


def test_golden_section_on_parabola():
    x, fx = golden_section(lambda t: (t - 0.3) ** 2, -2.0, 5.0, tol=1e-10)
    assert x == pytest.approx(0.3, abs=1e-9)
    assert fx < 1e-18


def test_k1_displacement(defaults):
    assert optimal_gamma_given_threshold(defaults, BETA, 1) == pytest.approx(2.02, abs=0.01)


@pytest.mark.parametrize("beta", [0.3, 0.7, 1.0, 1.5])
def test_noise_free_on_off_condition(beta):
    # K_th = 0 without noise: (gamma + beta)/(gamma - beta) = exp(4 eta beta gamma)
    p = ReceiverParams(tau=1.0, xi=1.0, p0=0.5, n_thermal=0.0, nu=0.0, eta=0.72)
    g = optimal_gamma_given_threshold(p, beta, 0)
    root = brentq(lambda x: math.log((x + beta) / (x - beta)) - 4 * p.eta * beta * x, beta * (1 + 1e-12), 10 * beta + 5)
    assert g == pytest.approx(root, abs=1e-5)


@pytest.mark.parametrize("k_th", range(6))
def test_large_signal_displacement_tends_to_xi_beta(defaults, k_th):
    assert optimal_gamma_given_threshold(defaults, 10.0, k_th) == pytest.approx(defaults.xi * 10.0, rel=0.01)


# poor visibility and a skewed prior: P_e keeps falling with ever larger displacement
EDGE_CASE = ReceiverParams(n_thermal=0.0625, p0=0.25, xi=0.953125)


def test_bracket_edge_warns():
    with pytest.warns(BracketWarning):
        g = optimal_gamma_given_threshold(EDGE_CASE, 1.0, 100)
    assert g == pytest.approx(gamma_bracket(EDGE_CASE, 1.0), rel=1e-6)


def test_greedy_flags_edge_optimum():
    p = EDGE_CASE
    res = greedy_search(p, 1.0)
    assert not res.converged
    assert res.gamma_star == pytest.approx(gamma_bracket(p, 1.0), rel=1e-6)


def _h_sum(params, n_mean, k_th):
    """Weighted h-term sum of the stationarity condition, evaluated term by term."""
    mpmath.mp.dps = 50
    c = mpmath.mpf(params.eta) * params.n_thermal
    z = mpmath.mpf(n_mean) / (params.n_thermal * (c + 1))
    total = 1 / (c + 1)
    for k in range(1, k_th + 1):
        h = mpmath.laguerre(k, 0, -z) - mpmath.laguerre(k - 1, 1, -z) / c
        total += c**k / (c + 1) ** (k + 1) * h
    return total


@pytest.mark.parametrize("k_th", [0, 1, 2, 5, 9])
@pytest.mark.parametrize("n_mean", [0.02, 3.0, 17.0])
def test_h_sum_telescopes(k_th, n_mean):
    p = ReceiverParams(n_thermal=0.05)
    c = p.eta * p.n_thermal
    z = n_mean / (p.n_thermal * (c + 1))
    closed = c**k_th / (c + 1) ** (k_th + 1) * laguerre_gen(k_th, 1.0, -z)
    assert closed == pytest.approx(float(_h_sum(p, n_mean, k_th)), rel=1e-9)


@given(
    k_th=st.integers(0, 8),
    gamma=st.floats(0.2, 5.0),
    beta=st.floats(0.3, 3.0),
    nt=st.floats(1e-3, 0.5),
)
def test_gradient_matches_finite_difference(k_th, gamma, beta, nt):
    p = ReceiverParams(n_thermal=nt)
    h = 1e-5
    fd = (pe(p, beta, k_th, gamma + h) - pe(p, beta, k_th, gamma - h)) / (2 * h)
    an = displacement_gradient(p, beta, k_th, gamma)
    assert an == pytest.approx(fd, rel=1e-5, abs=1e-9)


def test_line_search_satisfies_stationarity(defaults):
    for k in range(4):
        g = optimal_gamma_given_threshold(defaults, BETA, k)
        assert abs(displacement_gradient(defaults, BETA, k, g)) < 1e-6


@pytest.mark.parametrize("k_th", [0, 1, 2, 3])
def test_offset_solver_matches_line_search(defaults, k_th):
    g = optimal_gamma_given_threshold(defaults, BETA, k_th)
    off = displacement_offset(defaults, BETA, k_th)
    assert defaults.xi * BETA + off == pytest.approx(g, abs=1e-5)
    assert abs(displacement_gradient(defaults, BETA, k_th, defaults.xi * BETA + off)) < 1e-9


def test_offset_shrinks_with_signal(defaults):
    offs = [displacement_offset(defaults, b, 2) / b for b in (2.0, 4.0, 8.0, 16.0)]
    assert all(b < a for a, b in zip(offs, offs[1:]))
    assert all(o > 0 for o in offs)


def test_offset_rejects_degenerate_input(defaults):
    with pytest.raises(ValueError):
        displacement_offset(defaults.with_(n_thermal=0.0), 2.0, 1)
    with pytest.raises(ValueError):
        displacement_offset(defaults, 0.0, 1)


# -- joint searches --------------------------------------------------------


def test_greedy_reference_point(ref_greedy):
    assert ref_greedy.k_th_star == 2
    assert ref_greedy.gamma_star == pytest.approx(2.25, abs=0.05)
    assert ref_greedy.converged


def test_greedy_matches_brute_force(defaults, ref_greedy):
    bf = brute_force_search(defaults, BETA, 10, (0.0, None, 1e-3))
    assert bf.k_th_star == ref_greedy.k_th_star
    assert bf.p_e.value == pytest.approx(ref_greedy.p_e.value, rel=1e-10)
    assert bf.p_e.value <= ref_greedy.p_e.value + 1e-12


def test_greedy_trace_invariants(ref_greedy):
    assert 1 <= len(ref_greedy.trace) <= GreedyConfig().max_iters
    assert all(ref_greedy.p_e.value <= t.p_e for t in ref_greedy.trace)
    assert [t.iteration for t in ref_greedy.trace] == list(range(1, len(ref_greedy.trace) + 1))


def test_greedy_near_noiseless_weak_signal():
    p = ReceiverParams(n_thermal=1e-12)
    res = greedy_search(p, 0.3)
    bf = brute_force_search(p, 0.3, 5, (0.0, 3.0, 1e-3))
    assert res.k_th_star == bf.k_th_star == 0
    assert res.gamma_star > 0.3
    assert res.p_e.value == pytest.approx(bf.p_e.value, rel=1e-9)


def test_greedy_iteration_cap():
    res = greedy_search(ReceiverParams(n_thermal=1.0), 1.0, GreedyConfig(max_iters=3))
    assert not res.converged
    assert len(res.trace) == 3
    assert res.p_e.value == min(t.p_e for t in res.trace)


def test_greedy_config_validation():
    with pytest.raises(ValueError):
        GreedyConfig(epsilon=0.0)
    with pytest.raises(ValueError):
        GreedyConfig(max_iters=0)


@settings(max_examples=15)
@given(
    ns=st.floats(0.5, 8.0),
    nt=st.floats(1e-3, 0.05),
    p0=st.floats(0.35, 0.8),
    xi=st.floats(0.98, 1.0),
)
def test_brute_force_never_beaten(ns, nt, p0, xi):
    p = ReceiverParams(n_thermal=nt, p0=p0, xi=xi)
    beta = math.sqrt(ns)
    g = greedy_search(p, beta)
    bf = brute_force_search(p, beta, g.k_th_star + 4, (0.0, None, 5e-3))
    assert bf.p_e.value <= g.p_e.value * (1 + 1e-9)
    if g.converged:
        # equality under unimodality in K_th
        assert g.p_e.value == pytest.approx(bf.p_e.value, rel=1e-8)


def test_brute_force_kennedy_grid_reduces_to_threshold_choice():
    p = ReceiverParams(xi=1.0)
    beta = math.sqrt(3.0)
    bf = brute_force_search(p, beta, 10, np.array([beta]))
    assert bf.gamma_star == beta
    assert bf.k_th_star == optimal_threshold_given_gamma(p, beta, beta)


DEFAULT_NS = np.linspace(0.1, 10.0, 25)


@pytest.mark.parametrize("ns", DEFAULT_NS[::3])
def test_unimodal_in_threshold(defaults, ns):
    beta = math.sqrt(ns)
    k_star = greedy_search(defaults, beta).k_th_star
    hi = gamma_bracket(defaults, beta)
    vals = [_line_search(defaults, beta, k, 0.0, hi)[1] for k in range(k_star + 6)]
    signs = np.sign(np.diff(vals))
    assert np.all(np.diff(signs) >= 0), vals


@pytest.mark.slow
def test_optimum_threshold_and_displacement_grid():
    ks_by_nt = []
    for nt in (0.001, 0.01, 0.1):
        p = ReceiverParams(n_thermal=nt)
        res = [greedy_search(p, math.sqrt(ns)) for ns in DEFAULT_NS]
        ks = [r.k_th_star for r in res]
        assert ks == sorted(ks)
        assert all(r.gamma_star > math.sqrt(ns) for r, ns in zip(res, DEFAULT_NS))
        ks_by_nt.append(ks)
    for lo, hi in zip(ks_by_nt, ks_by_nt[1:]):
        assert all(a <= b for a, b in zip(lo, hi))


# -- coordinate descent ----------------------------------------------------


def test_coordinate_descent_stalls_from_two(defaults, ref_greedy):
    res = coordinate_descent(defaults, BETA, Policy(0, 2.0))
    assert res.converged
    assert (res.k_th_star, round(res.gamma_star, 2)) == (1, 2.02)
    assert res.p_e.value > ref_greedy.p_e.value * (1 + 1e-4)


@pytest.mark.parametrize("g0", [1.2, 1.6])
def test_coordinate_descent_from_weak_displacement_escapes(defaults, ref_greedy, g0):
    # below gamma ~ 1.74 the best threshold is already 2, so no stall occurs
    assert optimal_threshold_given_gamma(defaults, BETA, g0) == 2
    res = coordinate_descent(defaults, BETA, Policy(0, g0))
    assert res.k_th_star == 2
    assert res.p_e.value == pytest.approx(ref_greedy.p_e.value, rel=1e-9)


def test_coordinate_descent_from_strong_displacement_stalls_high(defaults, ref_greedy):
    res = coordinate_descent(defaults, BETA, Policy(0, 3.5))
    assert res.converged
    assert res.k_th_star > 2
    assert res.p_e.value > ref_greedy.p_e.value


def test_coordinate_descent_fixpoint_at_optimum(defaults, ref_greedy):
    res = coordinate_descent(defaults, BETA, ref_greedy.policy)
    assert len(res.trace) == 1
    assert res.k_th_star == ref_greedy.k_th_star
    assert res.gamma_star == pytest.approx(ref_greedy.gamma_star, abs=1e-5)
