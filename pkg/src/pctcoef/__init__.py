"""Percentage-scale regression coefficients with bootstrap inference.

The pipeline: declare variables with conceptual scale anchors, load and
clean a CSV, percentize everything onto 0-1 scales, fit the model on raw
and percentage scales, bootstrap the coefficients and all pairwise
efficiency differences, and render report tables.
"""

from .backend import BACKEND, available_backends, get_backend
from .bootstrap import (
    BootstrapConfig,
    BootstrapDistribution,
    ComparisonMatrix,
    ReplicateFits,
    bootstrap_fits,
    coefficient_inference,
    comparison_matrices,
    directional_difference,
    pairwise_differences,
    scalar_difference,
    stars_for,
    two_sided_p,
)
from .dataset import (
    Dataset,
    MissingReport,
    VariableSpec,
    apply_missing_policy,
    load_csv,
)
from .errors import (
    AnchorError,
    CollinearityError,
    ConfigError,
    DataError,
    DegenerateVariableError,
    InsufficientDataError,
    NameLookupError,
    PathologicalDataError,
    PctcoefError,
    SchemaError,
)
from .percentize import (
    DesignMatrix,
    PercentizedColumn,
    build_design_matrix,
    expand_nominal,
    minmax_value,
    percent_value_100,
    percentize_value,
)
from .regression import FitResult, fit_ols, fit_three_ways, standardized_beta
from .report import (
    ReportBundle,
    build_report_bundle,
    nominal_pairwise,
    order_rows,
    ratio_notes,
    render,
)

__version__ = "0.1.0"

__all__ = [
    "AnchorError",
    "BACKEND",
    "BootstrapConfig",
    "BootstrapDistribution",
    "CollinearityError",
    "ComparisonMatrix",
    "ConfigError",
    "DataError",
    "Dataset",
    "DegenerateVariableError",
    "DesignMatrix",
    "FitResult",
    "InsufficientDataError",
    "MissingReport",
    "NameLookupError",
    "PathologicalDataError",
    "PctcoefError",
    "PercentizedColumn",
    "ReplicateFits",
    "ReportBundle",
    "SchemaError",
    "VariableSpec",
    "apply_missing_policy",
    "available_backends",
    "bootstrap_fits",
    "build_design_matrix",
    "build_report_bundle",
    "coefficient_inference",
    "comparison_matrices",
    "directional_difference",
    "expand_nominal",
    "fit_ols",
    "fit_three_ways",
    "get_backend",
    "load_csv",
    "minmax_value",
    "nominal_pairwise",
    "order_rows",
    "pairwise_differences",
    "percent_value_100",
    "percentize_value",
    "ratio_notes",
    "render",
    "scalar_difference",
    "standardized_beta",
    "stars_for",
    "two_sided_p",
]
