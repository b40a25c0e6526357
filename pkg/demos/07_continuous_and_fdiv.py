#!/usr/bin/env python3
"""Continuous observations and alternative-set geometry.

Tests built for finite alphabets apply to continuous data after
partitioning the observation space into m cells of equal null
probability; under the null the induced symbol law is exactly uniform.
The alternative set can also be defined through an f-divergence ball;
grid certificates check the two conditions an f must satisfy for the
n^2/m analysis to carry over.
"""

import numpy as np

import gee


def main() -> None:
    # null law on [0,1] with cdf sqrt(y); its quantile is t^2
    m = 16
    pmap = gee.PartitionMap(lambda t: t * t, m)
    rng = np.random.default_rng(9)
    y_null = rng.random(100_000) ** 2
    symbols = pmap(y_null)
    counts = np.bincount(symbols, minlength=m + 1)[1:]
    print(f"partition into {m} equal-probability cells; null symbol counts:")
    print(f"  min {counts.min()}, max {counts.max()}, "
          f"expected {len(y_null) // m} per cell")

    # a shifted alternative skews the cell occupancies
    y_alt = np.clip(rng.random(100_000) ** 1.35, 0.0, 1.0)
    alt_counts = np.bincount(pmap(y_alt), minlength=m + 1)[1:]
    print(f"  alternative tilts them: min {alt_counts.min()}, max {alt_counts.max()}")
    print()

    # run the coincidence test on partitioned continuous samples
    n = 64
    stat = gee.Coincidence()
    rule = gee.make_threshold(stat, n, m, tau=0.3)
    rejects_null = rejects_alt = 0
    runs = 2000
    for _ in range(runs):
        z0 = pmap(rng.random(n) ** 2) - 1
        z1 = pmap(np.clip(rng.random(n) ** 1.35, 0.0, 1.0)) - 1
        rejects_null += bool(rule.rejects(stat.from_counts(np.bincount(z0, minlength=m))))
        rejects_alt += bool(rule.rejects(stat.from_counts(np.bincount(z1, minlength=m))))
    print(f"coincidence test on partitioned data ({runs} runs, n={n}, m={m}):")
    print(f"  reject rate under null        {rejects_null / runs:.3f}")
    print(f"  reject rate under alternative {rejects_alt / runs:.3f}")
    print()

    print("f-divergence conditions (grid certificates):")
    for name, f in (("kl", gee.f_kl), ("chi2", gee.f_chi2), ("tv-like", gee.f_tv)):
        report = gee.check_fdiv_conditions(f)
        print(f"  {name:8} gap: {report.gap_holds} (witness {report.gap_witness}), "
              f"quadratic bound alpha = {report.quad_alpha:.4g}")
    print()
    print("the tv-like alpha is a grid artifact: it diverges under refinement")
    print("near x = 1, which is exactly why a plain TV ball over a continuum")
    print("admits no consistent test without partitioning first.")


if __name__ == "__main__":
    main()
