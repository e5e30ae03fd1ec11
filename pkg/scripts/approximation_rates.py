#!/usr/bin/env python3
"""Empirical convergence rates of the two constructive approximations.

For a batch of random Lindblad generators, measures

  * Euler product error  ||((m/t) R(m/t))^m - T_t||  against m, and
  * Yosida error         ||e^{t L_lam} - T_t||       against lam,

and reports per-instance log-log slopes.  Both schemes are first order, so the
slopes should sit near -1.
"""

import argparse

import numpy as np

from posgen import (
    SemigroupHandle,
    build_superoperator,
    euler_product,
    evolve,
    random_lindblad,
    spectral_norm,
    yosida_semigroup,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--instances", type=int, default=10)
    ap.add_argument("--dim", type=int, default=3)
    ap.add_argument("--t", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    ms = np.array([8, 16, 32, 64, 128])
    lams = np.array([10.0, 30.0, 100.0, 300.0, 1000.0])

    print(f"{'inst':>4} {'euler slope':>12} {'yosida slope':>13} "
          f"{'euler err@128':>14} {'yosida err@1e3':>15}")
    euler_slopes, yosida_slopes = [], []
    for i in range(args.instances):
        h = SemigroupHandle(
            build_superoperator(random_lindblad(args.dim, 2, seed=args.seed + i))
        )
        target = evolve(h, args.t).rep

        e_errs = np.array([
            spectral_norm(euler_product(h, args.t, int(m)).rep - target) for m in ms
        ])
        y_errs = np.array([
            spectral_norm(yosida_semigroup(h, lam, args.t).rep - target)
            for lam in lams
        ])
        e_slope = np.polyfit(np.log(ms), np.log(e_errs), 1)[0]
        y_slope = np.polyfit(np.log(lams), np.log(y_errs), 1)[0]
        euler_slopes.append(e_slope)
        yosida_slopes.append(y_slope)
        print(f"{i:>4} {e_slope:>12.3f} {y_slope:>13.3f} "
              f"{e_errs[-1]:>14.3e} {y_errs[-1]:>15.3e}")

    print(f"mean {np.mean(euler_slopes):>12.3f} {np.mean(yosida_slopes):>13.3f}")


if __name__ == "__main__":
    main()
