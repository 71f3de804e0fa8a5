"""Monte Carlo sampler for detected photon counts.

Each sample draws a complex amplitude from the Gaussian P-function of the
thermally contaminated displaced state, a photon number from a Poisson law
with that intensity, and a detected count by binomial thinning with the
quantum efficiency. Dark counts enter as a shift of the Gaussian mean so
that |mean|^2 = <n> + nu.

Samples are generated in fixed-size chunks, each with its own stream
spawned from the seed by chunk index. Histograms are summed, so the result
does not depend on how many workers process the chunks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .params import Hypothesis, Policy, ReceiverParams, SignalConfig
from .photon_stats import mean_photons

CHUNK = 1 << 18
Z95 = 1.959963984540054


@dataclass(frozen=True)
class SamplerConfig:
    seed: int
    n_samples: int
    workers: int = 1

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


def wilson_interval(successes, n: int, z: float = Z95):
    """Wilson score interval; works elementwise on arrays."""
    p = np.asarray(successes, dtype=float) / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return centre - half, centre + half


@dataclass(frozen=True)
class EmpiricalPMF:
    counts: np.ndarray
    n_samples: int

    @property
    def probs(self) -> np.ndarray:
        return self.counts / self.n_samples

    def wilson_halfwidth(self, z: float = Z95) -> np.ndarray:
        lo, hi = wilson_interval(self.counts, self.n_samples, z)
        return (hi - lo) / 2

    def mean(self) -> float:
        return float(np.dot(np.arange(len(self.counts)), self.counts) / self.n_samples)

    def var(self) -> float:
        k = np.arange(len(self.counts))
        m = self.mean()
        return float(np.dot((k - m) ** 2, self.counts) / self.n_samples)


def _chunk_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def _chunks(n: int):
    for i, start in enumerate(range(0, n, CHUNK)):
        yield i, min(CHUNK, n - start)


def _draw_counts(rng: np.random.Generator, size: int, mean_amp, params: ReceiverParams) -> np.ndarray:
    sd = math.sqrt(params.n_thermal / 2.0)
    re = rng.normal(mean_amp, sd, size)
    im = rng.normal(0.0, sd, size)
    m = rng.poisson(re * re + im * im)
    return rng.binomial(m, params.eta)


def _run_chunks(fn, cfg: SamplerConfig) -> list:
    jobs = list(_chunks(cfg.n_samples))
    if cfg.workers == 1:
        return [fn(i, size) for i, size in jobs]
    with ThreadPoolExecutor(cfg.workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def _merge(hists: list[np.ndarray]) -> np.ndarray:
    out = np.zeros(max(len(h) for h in hists), dtype=np.int64)
    for h in hists:
        out[: len(h)] += h
    return out


def sample_counts(params: ReceiverParams, sig: SignalConfig, hyp: Hypothesis, cfg: SamplerConfig) -> EmpiricalPMF:
    """Histogram of ``cfg.n_samples`` simulated detector counts."""
    mu = math.sqrt(mean_photons(params, sig, hyp))

    def one(i: int, size: int) -> np.ndarray:
        return np.bincount(_draw_counts(_chunk_rng(cfg.seed, i), size, mu, params))

    return EmpiricalPMF(_merge(_run_chunks(one, cfg)), cfg.n_samples)


@dataclass(frozen=True)
class ErrorEstimate:
    value: float
    stderr: float
    ci_low: float
    ci_high: float
    n_samples: int
    errors: int

    def contains(self, x: float, n_sigma: float = 3.0) -> bool:
        return abs(x - self.value) <= n_sigma * max(self.stderr, 1.0 / self.n_samples)


def estimate_error_probability(
    params: ReceiverParams, beta: float, policy: Policy, cfg: SamplerConfig
) -> ErrorEstimate:
    """Empirical threshold-detection error with a 95% Wilson interval.

    Each sample picks its hypothesis from the priors, simulates a count and
    applies the threshold rule.
    """
    sig = SignalConfig(beta, policy.gamma)
    mu_minus = math.sqrt(mean_photons(params, sig, Hypothesis.MINUS))
    mu_plus = math.sqrt(mean_photons(params, sig, Hypothesis.PLUS))

    def one(i: int, size: int) -> np.ndarray:
        rng = _chunk_rng(cfg.seed, i)
        plus = rng.random(size) >= params.p0
        k = _draw_counts(rng, size, np.where(plus, mu_plus, mu_minus), params)
        decided_plus = k > policy.k_th
        return np.array([np.count_nonzero(decided_plus != plus)])

    errors = int(sum(int(h[0]) for h in _run_chunks(one, cfg)))
    n = cfg.n_samples
    p = errors / n
    lo, hi = wilson_interval(errors, n)
    return ErrorEstimate(p, math.sqrt(p * (1 - p) / n), float(lo), float(hi), n, errors)


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    """TV distance between two mass vectors; the shorter one is zero-padded."""
    n = max(len(p), len(q))
    a = np.zeros(n)
    b = np.zeros(n)
    a[: len(p)] = p
    b[: len(q)] = q
    return 0.5 * float(np.abs(a - b).sum())
