"""Parameter sweeps producing plot-ready rows."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from . import error_model as em
from .optimizer import greedy_search
from .params import Policy, ReceiverParams

VARIABLES = ("n_signal", "n_thermal", "nu", "xi", "eta", "p0", "gamma")
MODES = ("odtd", "kennedy_threshold", "fixed_policy", "homodyne1", "homodyne2", "gain_db", "optimum_trace")
COLUMNS = (
    "swept_name",
    "swept_value",
    "k_th_star",
    "gamma_star",
    "p_e",
    "p_e_fa",
    "p_e_miss",
    "p_e_homodyne2",
    "gain_db",
    "converged",
)


@dataclass(frozen=True)
class Grid:
    min: float
    max: float
    points: int
    spacing: str = "linear"

    def __post_init__(self):
        if not self.min < self.max:
            raise ValueError(f"grid needs min < max, got {self.min}, {self.max}")
        if self.points < 2:
            raise ValueError("grid needs at least 2 points")
        if self.spacing not in ("linear", "log"):
            raise ValueError(f"unknown spacing {self.spacing!r}")
        if self.spacing == "log" and self.min <= 0:
            raise ValueError("log spacing needs min > 0")

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.min, self.max, self.points)
        return np.linspace(self.min, self.max, self.points)


@dataclass(frozen=True)
class SweepSpec:
    """One swept variable over a grid, evaluated in one mode.

    ``n_signal`` fixes the signal when it is not the swept variable.
    ``k_th`` (an int or a list) and ``gamma`` feed the fixed-threshold
    modes; ``gamma=None`` there means gamma = beta.
    """

    variable: str
    grid: Grid
    mode: str = "odtd"
    params: ReceiverParams = field(default_factory=ReceiverParams)
    n_signal: float = 1.0
    k_th: int | list[int] = 0
    gamma: float | None = None

    def __post_init__(self):
        if self.variable not in VARIABLES:
            raise ValueError(f"unknown sweep variable {self.variable!r}; expected one of {VARIABLES}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.variable == "gamma" and self.mode not in ("fixed_policy", "kennedy_threshold"):
            raise ValueError("sweeping gamma needs a fixed-threshold mode")

    @property
    def thresholds(self) -> list[int]:
        return list(self.k_th) if isinstance(self.k_th, (list, tuple)) else [self.k_th]

    @classmethod
    def from_dict(cls, d: dict, params: ReceiverParams | None = None) -> "SweepSpec":
        d = dict(d)
        grid = d.pop("grid")
        if params is None:
            params = ReceiverParams(**d.pop("params", {}))
        else:
            d.pop("params", None)
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown sweep keys: {sorted(extra)}")
        return cls(grid=Grid(**grid), params=params, **d)

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "sweep": {k: v for k, v in asdict(self).items() if k != "params"},
        }


@dataclass(frozen=True)
class SweepRow:
    swept_name: str
    swept_value: float
    k_th_star: int | None = None
    gamma_star: float | None = None
    p_e: float | None = None
    p_e_fa: float | None = None
    p_e_miss: float | None = None
    p_e_homodyne2: float | None = None
    gain_db: float | None = None
    converged: bool | None = None


def _point(spec: SweepSpec, x: float, k_th: int) -> SweepRow:
    name = spec.variable
    n_signal, gamma = spec.n_signal, spec.gamma
    params = spec.params
    if name == "n_signal":
        n_signal = x
    elif name == "gamma":
        gamma = x
    else:
        params = replace(params, **{name: x})
    beta = math.sqrt(n_signal)
    x = float(x)

    if spec.mode in ("odtd", "gain_db", "optimum_trace"):
        res = greedy_search(params, beta)
        row = dict(
            k_th_star=res.k_th_star,
            gamma_star=res.gamma_star,
            p_e=res.p_e.value,
            p_e_fa=res.p_e.component_minus,
            p_e_miss=res.p_e.component_plus,
            converged=res.converged,
        )
        if spec.mode != "optimum_trace":
            row["p_e_homodyne2"] = em.homodyne_two_port(params, n_signal)
            row["gain_db"] = em.gain_db(params, n_signal, res.p_e).db
        return SweepRow(name, x, **row)

    if spec.mode in ("kennedy_threshold", "fixed_policy"):
        g = beta if (spec.mode == "kennedy_threshold" or gamma is None) else gamma
        pe = em.error_probability(params, beta, Policy(k_th, g))
        return SweepRow(name, x, k_th, g, pe.value, pe.component_minus, pe.component_plus)

    if spec.mode == "homodyne1":
        return SweepRow(name, x, p_e=em.homodyne_one_port(params, n_signal))
    h2 = em.homodyne_two_port(params, n_signal)
    return SweepRow(name, x, p_e=h2, p_e_homodyne2=h2)


def _point_args(args):
    return _point(*args)


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list[SweepRow]:
    """Rows ordered by threshold (fixed-threshold modes), then grid value."""
    ks = spec.thresholds if spec.mode in ("kennedy_threshold", "fixed_policy") else [None]
    tasks = [(spec, x, k) for k in ks for x in spec.grid.values()]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(_point_args, tasks, chunksize=4))
    return [_point(*t) for t in tasks]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def rows_to_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in COLUMNS])
    return buf.getvalue()


def rows_to_json(rows: list[SweepRow]) -> str:
    return json.dumps([asdict(r) for r in rows], indent=1) + "\n"
