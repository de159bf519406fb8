"""Mean tests and ANOVA built from estimators, semi-distances and rejection regions."""

from .anova import SSRow, TestReport, TestSpec, f_statistic, run_test, sigma_bar_cdf
from .distributions import AlphaPoint, ChiSquared, FDist, Normal, StudentT, alpha_point, upper_tail
from .errors import (
    AnovaError,
    ConvergenceError,
    DegenerateDataError,
    DomainError,
    HypothesisMismatch,
    IngestError,
    LayoutError,
    PoleError,
)
from .measurement import (
    ConfidenceInterval,
    Layout,
    LayoutKind,
    State,
    TestKind,
    confidence_interval,
    estimator_apply,
    eta_threshold,
    rejection_region,
    semi_distance,
    summarize,
)

__version__ = "0.1.0"
