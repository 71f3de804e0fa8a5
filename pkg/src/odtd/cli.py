"""Command-line entry point: ``odtd {pmf,point,sweep,validate,homodyne}``.

Receiver parameters come from a JSON config (``--config`` or the
``ODTD_CONFIG`` environment variable) holding ``params`` and optionally
``sweep``; command-line flags override file values.

Exit codes: 0 success, 1 validation failure, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from dataclasses import asdict

import numpy as np

from . import error_model as em
from .montecarlo import SamplerConfig, sample_counts, total_variation
from .optimizer import greedy_search
from .params import Hypothesis, Policy, ReceiverParams, SignalConfig
from . import photon_stats
from .sweep import SweepSpec, rows_to_csv, rows_to_json, run_sweep

CONFIG_ENV = "ODTD_CONFIG"
EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

PARAM_FLAGS = {
    "p0": "p0",
    "tau": "tau",
    "xi": "xi",
    "n_thermal": "n-thermal",
    "nu": "nu",
    "eta": "eta",
}


class InputError(ValueError):
    pass


def _fmt(x) -> str:
    return repr(float(x))


# -- reports ----------------------------------------------------------------


def run_point(params: ReceiverParams, beta: float, policy: Policy | None = None) -> dict:
    """P_e decomposition for ``policy``, or the greedy optimum if none is given."""
    report: dict = {"params": params.to_dict(), "beta": beta, "n_signal": beta * beta, "warnings": []}
    if policy is not None:
        pe = em.error_probability(params, beta, policy)
        if policy.gamma == 0.0 or beta == 0.0 or params.xi == 0.0:
            report["warnings"].append("hypotheses indistinguishable")
        report.update(
            k_th=policy.k_th,
            gamma=policy.gamma,
            p_e=pe.value,
            p_e_fa=pe.component_minus,
            p_e_miss=pe.component_plus,
        )
        return report
    res = greedy_search(params, beta)
    report.update(
        k_th=res.k_th_star,
        gamma=res.gamma_star,
        p_e=res.p_e.value,
        p_e_fa=res.p_e.component_minus,
        p_e_miss=res.p_e.component_plus,
        converged=res.converged,
        trace=[asdict(t) for t in res.trace],
    )
    return report


def run_validate(params: ReceiverParams, sig: SignalConfig, cfg: SamplerConfig) -> dict:
    """Analytic vs sampled count distributions for both hypotheses.

    Passes when every total-variation distance is below 5/sqrt(n).
    """
    tol = 5.0 / math.sqrt(cfg.n_samples)
    out = {"n_samples": cfg.n_samples, "seed": cfg.seed, "tolerance": tol, "hypotheses": {}, "warnings": []}
    if cfg.n_samples < 1000:
        out["warnings"].append(f"only {cfg.n_samples} samples; intervals are very wide")
    ok = True
    for hyp in Hypothesis:
        analytic = photon_stats.photon_pmf(params, sig, hyp)
        emp = sample_counts(params, sig, hyp, cfg)
        tv = total_variation(analytic.probs, emp.probs)
        n = max(len(analytic.probs), len(emp.counts))
        pa = np.zeros(n)
        pa[: len(analytic.probs)] = analytic.probs
        pe = np.zeros(n)
        pe[: len(emp.counts)] = emp.probs
        hw = np.zeros(n)
        hw[: len(emp.counts)] = emp.wilson_halfwidth()
        out["hypotheses"][hyp.name] = {"tv": tv, "pass": tv < tol, "analytic": pa, "empirical": pe, "halfwidth": hw}
        ok &= tv < tol
    out["pass"] = ok
    return out


# -- argument handling ------------------------------------------------------


def _load_config(path: str | None) -> dict:
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc


def _params_from(args, cfg: dict) -> ReceiverParams:
    values = dict(cfg.get("params", {}))
    for field in PARAM_FLAGS:
        v = getattr(args, field, None)
        if v is not None:
            values[field] = v
    try:
        return ReceiverParams(**values)
    except TypeError as exc:
        raise InputError(f"bad params: {exc}") from exc


def _beta_from(args) -> float:
    if args.beta is not None and args.n_signal is not None:
        raise InputError("give either --beta or --n-signal, not both")
    if args.beta is not None:
        return args.beta
    if args.n_signal is not None:
        if args.n_signal < 0:
            raise InputError("--n-signal must be non-negative")
        return math.sqrt(args.n_signal)
    raise InputError("--beta or --n-signal is required")


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("receiver parameters (override config)")
    for field, flag in PARAM_FLAGS.items():
        g.add_argument(f"--{flag}", dest=field, type=float)
    p.add_argument("--config", help=f"JSON config file (default: ${CONFIG_ENV})")


def _add_signal_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--beta", type=float)
    p.add_argument("--n-signal", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="odtd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pmf", help="photon-count distribution under both hypotheses")
    _add_param_flags(p)
    _add_signal_flags(p)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--k-max", type=int)

    p = sub.add_parser("point", help="error probability at one operating point")
    _add_param_flags(p)
    _add_signal_flags(p)
    p.add_argument("--k-th", type=int, help="fixed threshold (needs --gamma)")
    p.add_argument("--gamma", type=float, help="fixed displacement (needs --k-th)")

    p = sub.add_parser("sweep", help="parameter sweep, CSV or JSON rows")
    _add_param_flags(p)
    p.add_argument("--variable")
    p.add_argument("--mode")
    p.add_argument("--min", type=float)
    p.add_argument("--max", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--spacing", choices=("linear", "log"))
    p.add_argument("--n-signal", type=float, help="signal photons when not swept")
    p.add_argument("--k-th", type=int, nargs="+")
    p.add_argument("--gamma", type=float)
    p.add_argument("--json", action="store_true", help="emit JSON instead of CSV")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output")

    p = sub.add_parser("validate", help="Monte Carlo check of the analytic count distribution")
    _add_param_flags(p)
    _add_signal_flags(p)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-o", "--output")

    p = sub.add_parser("homodyne", help="one- and two-port homodyne baselines")
    _add_param_flags(p)
    p.add_argument("--n-signal", type=float, nargs="+", required=True)
    return parser


def _sweep_spec(args, cfg: dict, params: ReceiverParams) -> SweepSpec:
    d = dict(cfg.get("sweep", {}))
    grid = dict(d.get("grid", {}))
    for key in ("min", "max", "points", "spacing"):
        v = getattr(args, key)
        if v is not None:
            grid[key] = v
    d["grid"] = grid
    for key in ("variable", "mode", "n_signal", "gamma"):
        v = getattr(args, key)
        if v is not None:
            d[key] = v
    if args.k_th is not None:
        d["k_th"] = args.k_th if len(args.k_th) > 1 else args.k_th[0]
    if "variable" not in d or not {"min", "max", "points"} <= set(grid):
        raise InputError("sweep needs --variable and --min/--max/--points (or a config 'sweep' section)")
    try:
        return SweepSpec.from_dict(d, params)
    except TypeError as exc:
        raise InputError(f"bad sweep spec: {exc}") from exc


def _write(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _validate_text(rep: dict) -> str:
    lines = [f"# n_samples={rep['n_samples']} seed={rep['seed']} tolerance={_fmt(rep['tolerance'])}"]
    for w in rep["warnings"]:
        lines.append(f"# warning: {w}")
    lines.append("hypothesis,K,analytic,empirical,halfwidth")
    for name, h in rep["hypotheses"].items():
        for k, (a, e, hw) in enumerate(zip(h["analytic"], h["empirical"], h["halfwidth"])):
            if a < 1e-12 and e == 0:
                continue
            lines.append(f"{name},{k},{_fmt(a)},{_fmt(e)},{_fmt(hw)}")
    for name, h in rep["hypotheses"].items():
        lines.append(f"# {name} tv={_fmt(h['tv'])} {'PASS' if h['pass'] else 'FAIL'}")
    verdict = "PASS" if rep["pass"] else "FAIL"
    if rep["pass"] and rep["warnings"]:
        verdict = "PASS (with warnings)"
    lines.append(f"# {verdict}")
    return "\n".join(lines) + "\n"


def _dispatch(args) -> int:
    cfg = _load_config(args.config)
    params = _params_from(args, cfg)

    if args.command == "pmf":
        beta = _beta_from(args)
        sig = SignalConfig(beta, args.gamma)
        minus = photon_stats.photon_pmf(params, sig, Hypothesis.MINUS, args.k_max)
        plus = photon_stats.photon_pmf(params, sig, Hypothesis.PLUS, args.k_max)
        n = max(len(minus.probs), len(plus.probs))
        lines = ["K,p_minus,p_plus"]
        for k in range(n):
            pm = minus.probs[k] if k < len(minus.probs) else 0.0
            pp = plus.probs[k] if k < len(plus.probs) else 0.0
            lines.append(f"{k},{_fmt(pm)},{_fmt(pp)}")
        _write("\n".join(lines) + "\n", None)
        return EXIT_OK

    if args.command == "point":
        beta = _beta_from(args)
        if (args.k_th is None) != (args.gamma is None):
            raise InputError("--k-th and --gamma go together")
        policy = Policy(args.k_th, args.gamma) if args.k_th is not None else None
        report = run_point(params, beta, policy)
        for w in report["warnings"]:
            print(f"warning: {w}", file=sys.stderr)
        _write(json.dumps(report, indent=1) + "\n", None)
        return EXIT_OK

    if args.command == "sweep":
        spec = _sweep_spec(args, cfg, params)
        rows = run_sweep(spec, jobs=max(1, args.jobs))
        _write(rows_to_json(rows) if args.json else rows_to_csv(rows), args.output)
        return EXIT_OK

    if args.command == "validate":
        beta = _beta_from(args)
        rep = run_validate(params, SignalConfig(beta, args.gamma), SamplerConfig(args.seed, args.samples, args.workers))
        _write(_validate_text(rep), args.output)
        return EXIT_OK if rep["pass"] else EXIT_FAIL

    if args.command == "homodyne":
        lines = ["n_signal,p_e_homodyne1,p_e_homodyne2"]
        for ns in args.n_signal:
            lines.append(f"{_fmt(ns)},{_fmt(em.homodyne_one_port(params, ns))},{_fmt(em.homodyne_two_port(params, ns))}")
        _write("\n".join(lines) + "\n", None)
        return EXIT_OK
    raise InputError(f"unknown command {args.command}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return _dispatch(args)
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
