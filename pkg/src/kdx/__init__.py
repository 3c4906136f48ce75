"""kdx: weighted kernel density decomposition of social cost of carbon estimates.

Modules
-------
data_model
    Estimate records, standardisation, weights and censoring.
kernels
    Mode-centred Normal, knotted Normal, Gumbel, Weibull and Johnson S_U kernels.
density
    Composite densities, decompositions by factor, and curve summaries.
inference
    Equality-of-proportions and Kolmogorov-Smirnov tests, bootstrap bands.
regression
    Weighted least squares and weighted quantile regression.
special
    Gamma, incomplete gamma, chi-square and Kolmogorov tail functions.
"""

__version__ = "0.1.0"

from .data_model import (  # noqa: E402
    CensorPolicy,
    Dataset,
    DatasetError,
    EstimateRecord,
    StandardizationConfig,
    compute_weights,
    parse_dataset,
    standardize,
)
from .density import KernelMixture, decompose, estimate_density, quintile_table  # noqa: E402
from .inference import bootstrap_criticals, ks_subsample, pearson_eqprop  # noqa: E402
from .kernels import KernelSpec, kernel_pdf  # noqa: E402
from .regression import quantile_reg, wls  # noqa: E402

__all__ = [
    "CensorPolicy",
    "Dataset",
    "DatasetError",
    "EstimateRecord",
    "StandardizationConfig",
    "compute_weights",
    "parse_dataset",
    "standardize",
    "KernelMixture",
    "decompose",
    "estimate_density",
    "quintile_table",
    "bootstrap_criticals",
    "ks_subsample",
    "pearson_eqprop",
    "KernelSpec",
    "kernel_pdf",
    "quantile_reg",
    "wls",
]
