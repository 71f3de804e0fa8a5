"""Laguerre polynomials and the weighted sequences used by the count statistics.

Plain evaluation uses the three-term recurrences. The weighted form

    T_K = c^K / (c + 1)^(K + 1) * L_K(-z)

is carried in log space with periodic rescaling, so neither ``L_K(-z)``
nor ``T_K`` has to be representable as a double for the sequence to be
usable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

K_MAX = 10_000

# rescale the running recurrence pair once it leaves this window
_RESCALE_HI = 1e200
_RESCALE_LO = 1e-200


class OrderOverflowError(ValueError):
    """Requested polynomial order exceeds the configured cap."""


def _check_order(k: int, k_max: int) -> int:
    k = int(k)
    if k < 0:
        raise ValueError(f"polynomial order must be non-negative, got {k}")
    if k > k_max:
        raise OrderOverflowError(f"order {k} exceeds K_max={k_max}")
    return k


def _check_finite(x: float, name: str = "x") -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"{name} must be finite, got {x}")
    return x


def laguerre(k: int, x: float, *, k_max: int = K_MAX) -> float:
    """Laguerre polynomial L_k(x) by forward recurrence."""
    return laguerre_gen(k, 0.0, x, k_max=k_max)


def laguerre_gen(k: int, alpha: float, x: float, *, k_max: int = K_MAX) -> float:
    """Generalized Laguerre polynomial L_k^alpha(x).

    Uses (n+1) L_{n+1} = (2n + 1 + alpha - x) L_n - (n + alpha) L_{n-1}.
    The result overflows to ``inf`` for very negative ``x`` at high order;
    use :func:`log_laguerre_neg` in that regime.
    """
    k = _check_order(k, k_max)
    x = _check_finite(x)
    alpha = _check_finite(alpha, "alpha")
    prev, cur = 1.0, 1.0 + alpha - x
    if k == 0:
        return prev
    for n in range(1, k):
        prev, cur = cur, ((2 * n + 1 + alpha - x) * cur - (n + alpha) * prev) / (n + 1)
    return cur


def log_laguerre_neg(k_max: int, z: float, alpha: float = 0.0, *, cap: int = K_MAX) -> np.ndarray:
    """log L_K^alpha(-z) for K = 0..k_max, with z >= 0 and alpha >= 0.

    Every L_K^alpha(-z) is positive there, so the log is always defined.
    """
    k_max = _check_order(k_max, cap)
    z = _check_finite(z, "z")
    alpha = _check_finite(alpha, "alpha")
    if z < 0 or alpha < 0:
        raise ValueError(f"need z >= 0 and alpha >= 0, got z={z}, alpha={alpha}")
    out = np.empty(k_max + 1)
    out[0] = 0.0
    if k_max == 0:
        return out
    log_scale = 0.0
    prev, cur = 1.0, 1.0 + alpha + z
    out[1] = math.log(cur)
    for n in range(1, k_max):
        prev, cur = cur, ((2 * n + 1 + alpha + z) * cur - (n + alpha) * prev) / (n + 1)
        if cur > _RESCALE_HI:
            log_scale += math.log(cur)
            prev, cur = prev / cur, 1.0
        out[n + 1] = log_scale + math.log(cur)
    return out


@dataclass(frozen=True)
class WeightedLaguerreSeq:
    """T_K = c^K/(c+1)^(K+1) L_K(-z), stored as logs.

    ``normalized`` multiplies by exp(-c z); that product is a probability
    mass function in K and is the form the count statistics consume.
    """

    c: float
    z: float
    log_terms: np.ndarray

    @property
    def terms(self) -> np.ndarray:
        return np.exp(self.log_terms)

    @property
    def normalized(self) -> np.ndarray:
        return np.exp(self.log_terms - self.c * self.z)

    def __len__(self) -> int:
        return len(self.log_terms)


def weighted_laguerre_terms(c: float, z: float, k_max: int, *, cap: int = K_MAX) -> WeightedLaguerreSeq:
    """Weighted Laguerre sequence for K = 0..k_max.

    The recurrence runs directly on the weighted terms,

        T_{K+1} = [(2K + 1 + z) r T_K - K r^2 T_{K-1}] / (K + 1),  r = c/(c+1),

    with T_0 = 1/(c+1), so L_K(-z) is never formed on its own. A running
    log scale keeps the pair (T_{K-1}, T_K) inside double range.
    """
    k_max = _check_order(k_max, cap)
    c = _check_finite(c, "c")
    z = _check_finite(z, "z")
    if c <= 0:
        raise ValueError(f"c must be positive, got {c}")
    if z < 0:
        raise ValueError(f"z must be non-negative, got {z}")

    r = c / (c + 1.0)
    out = np.empty(k_max + 1)
    out[0] = -math.log1p(c)
    if k_max == 0:
        return WeightedLaguerreSeq(c, z, out)

    log_scale = out[0]
    prev, cur = 1.0, (1.0 + z) * r
    out[1] = log_scale + math.log(cur)
    for n in range(1, k_max):
        prev, cur = cur, ((2 * n + 1 + z) * r * cur - n * r * r * prev) / (n + 1)
        if cur > _RESCALE_HI or cur < _RESCALE_LO:
            log_scale += math.log(cur)
            prev, cur = prev / cur, 1.0
        out[n + 1] = log_scale + math.log(cur)
    return WeightedLaguerreSeq(c, z, out)


def weighted_laguerre_log_terms_many(c: float, z, k_max: int, *, cap: int = K_MAX) -> np.ndarray:
    """log T_K for an array of ``z`` at once; shape (len(z), k_max + 1).

    Same recurrence and rescaling as :func:`weighted_laguerre_terms`,
    vectorized over ``z`` for grid scans.
    """
    k_max = _check_order(k_max, cap)
    c = _check_finite(c, "c")
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if c <= 0:
        raise ValueError(f"c must be positive, got {c}")
    if np.any(z < 0) or not np.all(np.isfinite(z)):
        raise ValueError("z must be finite and non-negative")

    r = c / (c + 1.0)
    out = np.empty((z.size, k_max + 1))
    out[:, 0] = -math.log1p(c)
    if k_max == 0:
        return out
    log_scale = np.full(z.size, out[0, 0])
    prev = np.ones(z.size)
    cur = (1.0 + z) * r
    out[:, 1] = log_scale + np.log(cur)
    for n in range(1, k_max):
        prev, cur = cur, ((2 * n + 1 + z) * r * cur - n * r * r * prev) / (n + 1)
        bad = (cur > _RESCALE_HI) | (cur < _RESCALE_LO)
        if bad.any():
            log_scale = np.where(bad, log_scale + np.log(cur), log_scale)
            prev = np.where(bad, prev / cur, prev)
            cur = np.where(bad, 1.0, cur)
        out[:, n + 1] = log_scale + np.log(cur)
    return out
