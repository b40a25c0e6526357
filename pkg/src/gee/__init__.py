"""Small-sample universal hypothesis testing on finite alphabets.

Tools for the regime where the sample size n is far below the alphabet
size m: separable test statistics (coincidence, Pearson, and their
variants), closed-form generalized error exponents normalized by
r = n^2/m, exact small-instance oracles, and reproducible Monte Carlo
sweeps.
"""

from .exponents import (
    ExponentPoint,
    equalizing_tau,
    estimate_exponent,
    jf_star,
    jm_star,
    kappa_bar,
    rate_function,
    region_curve,
)
from .montecarlo import (
    BLOCK_TRIALS,
    RNG_ALGORITHM,
    ErrorEstimate,
    PartitionMap,
    SimPlan,
    SweepRow,
    estimate_pf,
    estimate_pm,
    sample_occupancy,
    simulate_statistics,
    sweep,
)
from .oracle import (
    DEFAULT_CELL_BUDGET,
    ExactDistribution,
    OracleBudgetError,
    ScalingError,
    asymptotic_moments,
    exact_distribution,
    exact_error_probs,
    exact_expectation,
    worst_case_bruteforce,
)
from .pmf import (
    AlphabetSizeError,
    DegenerateAlternativeError,
    FDivConditionReport,
    Pmf,
    SupportError,
    biuniform_worst_case,
    check_fdiv_conditions,
    chi_square_functional,
    f_chi2,
    f_divergence,
    f_kl,
    f_tv,
    likelihood_ratio_bound,
    permuted_worst_case,
    tv_distance,
    uniform,
)
from .statistics import (
    Coincidence,
    ExtendedCoincidence,
    NeedsCountsError,
    OccupancyFingerprint,
    Pearson,
    PearsonTruncated,
    SeparableStatistic,
    ThresholdRule,
    WeightedCoincidence,
    absolute_threshold,
    binomial_pmf,
    make_threshold,
    occupancy,
)

__version__ = "0.1.0"
