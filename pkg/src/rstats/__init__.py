"""r-statistics: nonparametric signal-to-noise-ratio tests from record counts.

The r-statistic counts how often the cumulative sum of a sample sets a new
maximum minus how often it sets a new minimum, averaged over random
rearrangements of the sample and normalized by sigma_N.
"""

from .errors import (
    DegenerateInputError,
    FitConvergenceError,
    InvalidInputError,
    NullFormatError,
    NullMismatchError,
    RStatsError,
)
from .rng import RngSeed
from .records import RecordCounts, count_records, cumulative_sum, r0_of_sample
from .permutation import (
    EqualizeStrategy,
    PermutationEstimate,
    mean_r0,
    mean_record_counts,
    paired_difference,
    unpaired_mean_rz,
)
from .distributions import DistributionSpec, generate
from .null import (
    Alternative,
    ExactRecordPmf,
    NullDistribution,
    SigmaParams,
    Variant,
    asymptotic_record_law,
    build_null,
    exact_record_pmf,
    load_null,
    p_value,
    r_statistic,
    save_null,
    sigma_n,
)
from .sntest import TestConfig, TestResult, r_test_single, r_test_two

__version__ = "0.1.0"
