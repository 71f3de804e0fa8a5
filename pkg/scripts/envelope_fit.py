"""Fit a exp(-b N_s) to the lower envelope of the Kennedy threshold-detection curves."""

import argparse

import numpy as np

from odtd.error_model import error_probability_kennedy
from odtd.params import ReceiverParams


def envelope(params: ReceiverParams, ns: np.ndarray, k_max: int) -> np.ndarray:
    return np.array([min(error_probability_kennedy(params, n, k).value for k in range(k_max + 1)) for n in ns])


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--xi", type=float, nargs="+", default=[0.998, 1.0])
    ap.add_argument("--min", type=float, default=1.0)
    ap.add_argument("--max", type=float, default=8.0)
    ap.add_argument("--points", type=int, default=71)
    ap.add_argument("--k-max", type=int, default=24)
    args = ap.parse_args()

    ns = np.linspace(args.min, args.max, args.points)
    for xi in args.xi:
        env = envelope(ReceiverParams(xi=xi), ns, args.k_max)
        slope, intercept = np.polyfit(ns, np.log(env), 1)
        resid = np.log(env) - (intercept + slope * ns)
        print(f"xi={xi}: a={np.exp(intercept):.4f} b={-slope:.4f} max|log residual|={np.abs(resid).max():.3f}")


if __name__ == "__main__":
    main()
