"""Occupancy fingerprints and the separable test statistics built on them.

A separable statistic is sum_j f_j(count of symbol j).  Every statistic
here is symmetric under symbol permutation when its reference
distribution is uniform, so it is a function of the occupancy
fingerprint alone: the vector (Phi_0, Phi_1, ...) counting how many
symbols appear exactly l times.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exponents import kappa_bar
from .pmf import Pmf

__all__ = [
    "OccupancyFingerprint",
    "occupancy",
    "SeparableStatistic",
    "Coincidence",
    "Pearson",
    "PearsonTruncated",
    "ExtendedCoincidence",
    "WeightedCoincidence",
    "NeedsCountsError",
    "ThresholdRule",
    "make_threshold",
    "absolute_threshold",
    "binomial_pmf",
]


class NeedsCountsError(ValueError):
    """The statistic needs per-symbol counts, not just a fingerprint."""


@dataclass(frozen=True, eq=False)
class OccupancyFingerprint:
    """Counts of symbols by occurrence level.

    phi[l] is the number of symbols that appear exactly l times, so
    sum_l phi[l] = m and sum_l l*phi[l] = n.
    """

    n: int
    m: int
    phi: np.ndarray

    def __post_init__(self) -> None:
        phi = np.array(self.phi, dtype=np.int64)
        if phi.ndim != 1 or np.any(phi < 0):
            raise ValueError("phi must be a vector of non-negative counts")
        if int(phi.sum()) != self.m:
            raise ValueError(f"sum of phi is {int(phi.sum())}, expected m={self.m}")
        weighted = int(np.dot(np.arange(phi.size), phi))
        if weighted != self.n:
            raise ValueError(f"sum of l*phi_l is {weighted}, expected n={self.n}")
        phi.flags.writeable = False
        object.__setattr__(self, "phi", phi)

    def level(self, l: int) -> int:
        """Phi_l, the number of symbols appearing exactly l times."""
        return int(self.phi[l]) if 0 <= l < self.phi.size else 0


def occupancy(counts) -> OccupancyFingerprint:
    """Fingerprint of a per-symbol occurrence vector."""
    arr = np.asarray(counts)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("counts must be a non-empty vector")
    as_int = arr.astype(np.int64)
    if not np.all(as_int == arr):
        raise ValueError("counts must be integers")
    if np.any(as_int < 0):
        raise ValueError("counts must be non-negative")
    return OccupancyFingerprint(
        n=int(as_int.sum()), m=int(as_int.size), phi=np.bincount(as_int)
    )


def _require_uniform(reference: Pmf | None, m: int, what: str) -> None:
    if reference is not None and not (reference.m == m and reference.is_uniform()):
        raise NeedsCountsError(
            f"{what} over a fingerprint assumes a uniform reference on {m} symbols; "
            "evaluate from the raw count vector instead"
        )


class SeparableStatistic:
    """Base class: a statistic of the form sum_j f_j(count of symbol j)."""

    name: str = "separable"

    def from_fingerprint(self, fp: OccupancyFingerprint) -> float:
        raise NotImplementedError

    def from_counts(self, counts) -> float:
        return self.from_fingerprint(occupancy(counts))


@dataclass(frozen=True)
class Coincidence(SeparableStatistic):
    """Negative count of singleton symbols: rejects when few symbols are unique."""

    name: str = "coincidence"

    def from_fingerprint(self, fp: OccupancyFingerprint) -> float:
        return -float(fp.level(1))


@dataclass(frozen=True)
class Pearson(SeparableStatistic):
    """Chi-square statistic, normalized so the uniform-reference form is
    sum_j count_j^2 - n^2/m.

    `reference` is the null distribution; None means uniform on whatever
    alphabet the data lives on.
    """

    reference: Pmf | None = None
    name: str = "pearson"

    def from_fingerprint(self, fp: OccupancyFingerprint) -> float:
        _require_uniform(self.reference, fp.m, "the Pearson statistic")
        levels = np.arange(fp.phi.size, dtype=np.float64)
        return float(np.dot(levels**2, fp.phi)) - fp.n**2 / fp.m

    def from_counts(self, counts) -> float:
        arr = np.asarray(counts, dtype=np.float64)
        n = float(arr.sum())
        m = arr.size
        if self.reference is None or self.reference.is_uniform():
            return float(np.dot(arr, arr)) - n * n / m
        p = self.reference.probs
        if self.reference.m != m:
            raise ValueError(f"reference has {self.reference.m} symbols, counts {m}")
        if np.any(p <= 0.0):
            raise ValueError("Pearson reference must have full support")
        return float((n / m) * np.sum((arr - n * p) ** 2 / (n * p)))


@dataclass(frozen=True)
class PearsonTruncated(SeparableStatistic):
    """Pearson statistic with every level >= 3 term removed:
    Phi_1 + 4 Phi_2 - n^2/m under a uniform reference."""

    name: str = "pearson-truncated"

    def from_fingerprint(self, fp: OccupancyFingerprint) -> float:
        return fp.level(1) + 4.0 * fp.level(2) - fp.n**2 / fp.m


@dataclass(frozen=True)
class ExtendedCoincidence(SeparableStatistic):
    """Coincidence statistic plus weighted counts of higher levels.

    `weights` lists (v_2, v_3, ..., v_lbar).  The exponent-optimality
    guarantee needs v_2 = 0 and v_l >= 0 for l >= 3; other weights are
    allowed for experiments and flagged by `weights_valid`.
    """

    weights: tuple[float, ...]
    name: str = "extended-coincidence"

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", tuple(float(v) for v in self.weights))
        if not all(math.isfinite(v) for v in self.weights):
            raise ValueError("weights must be finite")

    @property
    def weights_valid(self) -> bool:
        if not self.weights:
            return True
        return self.weights[0] == 0.0 and all(v >= 0.0 for v in self.weights[1:])

    def from_fingerprint(self, fp: OccupancyFingerprint) -> float:
        value = -float(fp.level(1))
        for l, v in enumerate(self.weights, start=2):
            value += v * fp.level(l)
        return value


@dataclass(frozen=True)
class WeightedCoincidence(SeparableStatistic):
    """Coincidence variant whose expectation tracks the squared L2 distance
    to the reference: f_j is n^2 p_j^2 / 2 at count 0, -n p_j at count 1,
    1 at count 2, and 0 above."""

    reference: Pmf
    name: str = "weighted-coincidence"

    def from_fingerprint(self, fp: OccupancyFingerprint) -> float:
        _require_uniform(self.reference, fp.m, "the weighted coincidence statistic")
        n, m = fp.n, fp.m
        return (
            fp.level(0) * n * n / (2.0 * m * m)
            - fp.level(1) * n / m
            + fp.level(2)
        )

    def from_counts(self, counts) -> float:
        arr = np.asarray(counts)
        if self.reference.m != arr.size:
            raise ValueError(
                f"reference has {self.reference.m} symbols, counts {arr.size}"
            )
        n = float(arr.sum())
        p = self.reference.probs
        return float(
            0.5 * n * n * np.sum(p[arr == 0] ** 2)
            - n * np.sum(p[arr == 1])
            + np.count_nonzero(arr == 2)
        )


def binomial_pmf(k: int, n: int, p: float) -> float:
    """P(Binomial(n, p) = k).

    Exact-combinatorial path for small n; log-gamma path above the range
    where math.comb stays within float range.
    """
    if not 0 <= k <= n:
        return 0.0
    if p <= 0.0:
        return 1.0 if k == 0 else 0.0
    if p >= 1.0:
        return 1.0 if k == n else 0.0
    if n <= 1000:
        return math.comb(n, k) * p**k * (1.0 - p) ** (n - k)
    logv = (
        math.lgamma(n + 1)
        - math.lgamma(k + 1)
        - math.lgamma(n - k + 1)
        + k * math.log(p)
        + (n - k) * math.log1p(-p)
    )
    return math.exp(logv)


def expected_level_count(l: int, n: int, m: int) -> float:
    """E[Phi_l] under the uniform null: m * P(Binomial(n, 1/m) = l)."""
    return m * binomial_pmf(l, n, 1.0 / m)


def coincidence_mean(n: int, m: int) -> float:
    """Exact E[S] of the coincidence statistic under the uniform null:
    -n (1 - 1/m)^(n-1)."""
    return -n * (1.0 - 1.0 / m) ** (n - 1)


@dataclass(frozen=True)
class ThresholdRule:
    """Decision rule `reject iff statistic >= cut` for a given (n, m).

    `tau` is the dimensionless normalized threshold and `tau_n` the part
    of the cut scaled by n^2/m, so tau == m*tau_n/n^2 whenever both are
    set.  Absolute rules carry tau = tau_n = None.
    """

    statistic: SeparableStatistic
    n: int
    m: int
    cut: float
    tau: float | None = None
    tau_n: float | None = None

    def rejects(self, values) -> np.ndarray | bool:
        """Vectorized decision: True where the test rejects the null."""
        out = np.asarray(values) >= self.cut
        return bool(out) if np.isscalar(values) else out


def absolute_threshold(
    statistic: SeparableStatistic, n: int, m: int, cut: float
) -> ThresholdRule:
    """Rule rejecting iff the statistic is >= an absolute cut value."""
    return ThresholdRule(statistic, n, m, float(cut))


def make_threshold(
    statistic: SeparableStatistic,
    n: int,
    m: int,
    tau: float | None = None,
    eps: float | None = None,
) -> ThresholdRule:
    """Build the canonical decision rule for a statistic at (n, m).

    Coincidence / extended coincidence: reject iff S >= E_null[S] + (n^2/m) tau,
    with the expectation computed exactly from binomial level counts.
    Weighted coincidence: reject iff S >= (n^2/m) tau (no centering term).
    Pearson / truncated Pearson: the consistency rule
    reject iff S >= n + (n^2/m)(kappa_bar(eps) - 1)/2, which needs eps and
    takes no tau.

    For the coincidence family, tau above kappa_bar(eps) - 1 is clamped
    (with a warning) when eps is supplied; negative tau is an error.
    """
    if n < 1 or m < 2:
        raise ValueError(f"need n >= 1 and m >= 2, got n={n}, m={m}")
    scale = n * n / m

    if isinstance(statistic, (Pearson, PearsonTruncated)):
        if tau is not None:
            raise ValueError(
                "the Pearson-family rule is set by eps alone; use "
                "absolute_threshold for a custom cut"
            )
        if eps is None:
            raise ValueError("the Pearson-family rule needs eps")
        tau_eff = 0.5 * (kappa_bar(eps) - 1.0)
        return ThresholdRule(
            statistic, n, m, cut=n + scale * tau_eff, tau=tau_eff, tau_n=scale * tau_eff
        )

    if tau is None:
        raise ValueError(f"{statistic.name} needs a normalized threshold tau")
    if tau < 0.0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    if eps is not None:
        hi = kappa_bar(eps) - 1.0
        if tau > hi:
            warnings.warn(
                f"tau={tau} exceeds kappa_bar(eps)-1={hi}; clamping", stacklevel=2
            )
            tau = hi
    tau_n = scale * tau

    if isinstance(statistic, Coincidence):
        base = coincidence_mean(n, m)
    elif isinstance(statistic, ExtendedCoincidence):
        base = coincidence_mean(n, m)
        for l, v in enumerate(statistic.weights, start=2):
            base += v * expected_level_count(l, n, m)
    elif isinstance(statistic, WeightedCoincidence):
        base = 0.0
    else:
        raise ValueError(f"no canonical threshold rule for {statistic.name}")
    return ThresholdRule(statistic, n, m, cut=base + tau_n, tau=tau, tau_n=tau_n)
