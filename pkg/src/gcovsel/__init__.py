"""Model-free covariate selection with exact Gaussian P-values.

Covariates are judged by whether they outperform fresh standard Gaussian
noise columns; the resulting P-values are exact finite-sample Beta
probabilities requiring no assumptions about the data.
"""

from .fpsim import FpHistogram, simulate_fp
from .fptable import FpLookupError, lookup_fp
from .pvalues import (
    kappa,
    pval_all_subset,
    pval_joint,
    pval_joint_f,
    pval_stepwise,
    stepwise_gain_threshold,
)
from .regions import ApproxInterval, ApproxRegion, interval, region
from .regression import (
    CollinearityError,
    Dataset,
    FitState,
    fit_ls,
    rss_of,
)
from .selection import (
    SelectionConfig,
    SelectionTrace,
    SubsetApproximation,
    f1st,
    f2st,
    f3st,
    fasb,
)

__version__ = "0.1.0"

__all__ = [
    "ApproxInterval",
    "ApproxRegion",
    "CollinearityError",
    "Dataset",
    "FitState",
    "FpHistogram",
    "FpLookupError",
    "SelectionConfig",
    "SelectionTrace",
    "SubsetApproximation",
    "f1st",
    "f2st",
    "f3st",
    "fasb",
    "fit_ls",
    "interval",
    "kappa",
    "lookup_fp",
    "pval_all_subset",
    "pval_joint",
    "pval_joint_f",
    "pval_stepwise",
    "region",
    "rss_of",
    "simulate_fp",
    "stepwise_gain_threshold",
]
