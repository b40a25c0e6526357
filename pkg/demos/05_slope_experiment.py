#!/usr/bin/env python3
"""Empirical decay slopes along a sparse-regime schedule.

Along m = ceil(n^1.5) the normalization r = n^2/m grows like sqrt(n);
regressing -log(P_hat) on r estimates the generalized error exponent.
This demo runs a reduced schedule that finishes in about a minute; the
full-scale experiment (n up to 8000, 1e6 trials per point) lives in the
acceptance suite as a slow test.
"""

import math

import gee


def main() -> None:
    eps = 0.45
    tau = gee.equalizing_tau(eps)
    predicted = gee.jf_star(tau)
    print(f"eps={eps}: equalizing tau* = {tau:.6f}, predicted exponent {predicted:.6f}")

    rows = gee.sweep(
        eps=eps,
        statistic=gee.Coincidence(),
        tau=tau,
        n_list=(250, 500, 1000, 2000),
        m_rule=lambda n: math.ceil(n**1.5),
        trials=200_000,
        seed=101,
        streams=2,
    )
    print(f"{'n':>6} {'m':>8} {'r':>8} {'pf_hat':>10} {'pm_hat':>10}  flags")
    for row in rows:
        print(f"{row.n:6d} {row.m:8d} {row.r:8.3f} {row.pf.p_hat:10.6f} "
              f"{row.pm.p_hat:10.6f}  {';'.join(row.flags)}")

    pf_slope, pf_icept = gee.estimate_exponent([(r.r, r.pf.p_hat) for r in rows])
    pm_slope, pm_icept = gee.estimate_exponent([(r.r, r.pm.p_hat) for r in rows])
    print()
    print(f"slope of -log(pf) vs r: {pf_slope:.6f}  ({pf_slope / predicted:.2f}x predicted)")
    print(f"slope of -log(pm) vs r: {pm_slope:.6f}  ({pm_slope / predicted:.2f}x predicted)")
    print()
    print("the fitted slope sits above the first-order prediction at these")
    print("sizes because the subexponential prefactor (~ log(r)/2) has not")
    print("died off yet; it tightens as n grows.")


if __name__ == "__main__":
    main()
