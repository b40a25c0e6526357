#!/usr/bin/env python3
"""Achievable-region boundary and equalizing thresholds.

In the sparse regime (n samples, m >> n symbols) error probabilities of
good uniformity tests decay like exp(-r J) with r = n^2/m.  This demo
walks the closed forms: the worst-case chi-square value kappa_bar(eps),
the boundary curves J_F(tau) / J_M(tau), and the threshold at which the
two exponents balance.
"""

import numpy as np

import gee


def main() -> None:
    print("kappa_bar: worst-case chi-square functional over the TV-eps shell")
    for eps in (0.1, 0.35, 0.45, 0.5, 0.6, 0.8):
        print(f"  eps={eps:4}  kappa_bar={gee.kappa_bar(eps):.6f}")
    print()

    for eps in (0.35, 0.45):
        kb = gee.kappa_bar(eps)
        tau_star = gee.equalizing_tau(eps)
        print(f"eps={eps}: tau ranges over [0, {kb - 1:.2f}]")
        print(f"  equalizing tau* = {tau_star:.6f}")
        print(f"  J_F(tau*) = {gee.jf_star(tau_star):.6f}")
        print(f"  J_M(tau*) = {gee.jm_star(tau_star, eps):.6f}")
        print(f"  boundary samples (tau, J_F, J_M):")
        for point in gee.region_curve(eps, 6):
            print(f"    {point.tau:8.4f}  {point.jf:10.6f}  {point.jm:10.6f}")
        print()

    # the closed forms agree with direct numerical maximization over theta
    eps = 0.45
    taus = np.linspace(0.0, gee.kappa_bar(eps) - 1.0, 7)
    thetas = np.linspace(0.0, 5.0, 200_001)
    kb = gee.kappa_bar(eps)
    print("closed form vs dense-grid maximization (eps=0.45):")
    for tau in taus:
        grid = thetas * (kb - 1 - tau) - 0.5 * (np.exp(-2 * thetas) - 1 + 2 * thetas) * kb
        print(f"  tau={tau:.3f}  closed={gee.jm_star(float(tau), eps):.9f}  "
              f"grid={float(grid.max()):.9f}")


if __name__ == "__main__":
    main()
