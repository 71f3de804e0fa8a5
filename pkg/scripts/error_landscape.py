"""Error landscape P_e(K_th, gamma) at N_s = 4 and the three search strategies on it.

Prints the per-threshold minimum over gamma, the brute-force and greedy
optima, and where coordinate descent stops from a few starting points.
"""

import argparse
import math

import numpy as np

from odtd.error_model import error_probability_many
from odtd.optimizer import brute_force_search, coordinate_descent, greedy_search, optimal_threshold_given_gamma
from odtd.params import Policy, ReceiverParams


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-signal", type=float, default=4.0)
    ap.add_argument("--n-thermal", type=float, default=0.01)
    ap.add_argument("--k-max", type=int, default=6)
    ap.add_argument("--starts", type=float, nargs="+", default=[1.2, 1.6, 2.0, 3.5])
    args = ap.parse_args()

    params = ReceiverParams(n_thermal=args.n_thermal)
    beta = math.sqrt(args.n_signal)
    grid = np.arange(1.0, 4.0 + 5e-4, 1e-3)

    print("K_th  gamma_min  P_e_min")
    for k in range(args.k_max + 1):
        pe = error_probability_many(params, beta, k, grid)
        i = int(np.argmin(pe))
        print(f"{k:4d}  {grid[i]:9.4f}  {pe[i]:.6e}")

    bf = brute_force_search(params, beta, args.k_max, (1.0, 4.0, 1e-3))
    gr = greedy_search(params, beta)
    print(f"\nbrute force: K={bf.k_th_star} gamma={bf.gamma_star:.5f} P_e={bf.p_e.value:.10e}")
    print(f"greedy:      K={gr.k_th_star} gamma={gr.gamma_star:.5f} P_e={gr.p_e.value:.10e} converged={gr.converged}")
    for g0 in args.starts:
        k0 = optimal_threshold_given_gamma(params, beta, g0)
        cd = coordinate_descent(params, beta, Policy(k0, g0))
        rel = (cd.p_e.value - gr.p_e.value) / cd.p_e.value
        print(f"coordinate descent from gamma={g0}: K={cd.k_th_star} gamma={cd.gamma_star:.5f} "
              f"P_e={cd.p_e.value:.6e} (rel gap {rel:.2e})")


if __name__ == "__main__":
    main()
