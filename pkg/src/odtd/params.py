"""Parameter records shared across the package."""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, replace


class Hypothesis(enum.Enum):
    MINUS = -1  # |-beta>, nulled by a displacement gamma ~ beta
    PLUS = 1  # |+beta>

    @property
    def sign(self) -> int:
        return self.value


def _in_range(name: str, value: float, lo: float, hi: float, *, lo_open=False, hi_open=False) -> None:
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value}")
    below = value <= lo if lo_open else value < lo
    above = value >= hi if hi_open else value > hi
    if below or above:
        lb = "(" if lo_open else "["
        rb = ")" if hi_open else "]"
        raise ValueError(f"{name}={value} outside {lb}{lo}, {hi}{rb}")


@dataclass(frozen=True)
class ReceiverParams:
    """Priors, device imperfections and noise levels of the receiver.

    Defaults are the operating point used throughout the numerical study:
    equal priors, tau=0.99, xi=0.998, N_t=0.01, nu=0.001, eta=0.72.
    """

    p0: float = 0.5
    tau: float = 0.99
    xi: float = 0.998
    n_thermal: float = 0.01
    nu: float = 0.001
    eta: float = 0.72

    def __post_init__(self):
        _in_range("p0", self.p0, 0.0, 1.0, lo_open=True, hi_open=True)
        _in_range("tau", self.tau, 0.0, 1.0, lo_open=True)
        _in_range("xi", self.xi, 0.0, 1.0)
        _in_range("n_thermal", self.n_thermal, 0.0, math.inf, hi_open=True)
        _in_range("nu", self.nu, 0.0, math.inf, hi_open=True)
        _in_range("eta", self.eta, 0.0, 1.0, lo_open=True)

    @property
    def p1(self) -> float:
        return 1.0 - self.p0

    def with_(self, **changes) -> "ReceiverParams":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SignalConfig:
    """Real signal amplitude beta (N_s = beta^2) and displacement gamma."""

    beta: float
    gamma: float

    def __post_init__(self):
        _in_range("beta", self.beta, 0.0, math.inf, hi_open=True)
        _in_range("gamma", self.gamma, 0.0, math.inf, hi_open=True)

    @property
    def n_signal(self) -> float:
        return self.beta**2


@dataclass(frozen=True)
class Policy:
    """Decision threshold k_th and displacement gamma.

    Counts K <= k_th are decided as MINUS, larger counts as PLUS.
    """

    k_th: int
    gamma: float

    def __post_init__(self):
        if int(self.k_th) != self.k_th or self.k_th < 0:
            raise ValueError(f"k_th must be a non-negative integer, got {self.k_th}")
        object.__setattr__(self, "k_th", int(self.k_th))
        _in_range("gamma", self.gamma, 0.0, math.inf, hi_open=True)
