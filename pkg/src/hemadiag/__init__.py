"""Diagnostic decision support for sparse blood-test panels.

Trains random-forest classifiers over a 181-parameter blood-test catalog
(or its 61-parameter basic subset), evaluates them with stratified
cross-validation, ROC analysis, and the Wilcoxon signed-rank test, and
serves ranked predictions with an information-score polar chart.
"""

from .catalog import (
    CatalogError,
    ParameterCatalog,
    ParameterDef,
    default_catalog,
    load_catalog,
)
from .chart import chart_geometry, information_score, kl_divergence, render_svg
from .cohort import (
    CaseRecord,
    Cohort,
    CohortError,
    DiseaseCode,
    PrevalenceTable,
    compute_prevalence,
    coverage_stats,
    read_cohort,
    shannon_entropy,
    write_cohort,
)
from .evaluate import (
    EvalReport,
    confusion_matrix_topk,
    cross_validate,
    stratified_folds,
    top_k_accuracy,
)
from .forest import ForestConfig, RandomForest, gini_impurity, top_k
from .model import RandomForestModel, train_model
from .model_io import ModelFormatError, load_model, save_model
from .preprocess import FeatureVector, ImputerStats, MedianImputer, canonize, fit_imputer, impute
from .stats import RocCurve, average_roc, roc_ovr, wilcoxon_signed_rank
from .synth import SynthSpec, default_spec, read_spec, synth_cohort, write_spec

__version__ = "0.1.0"

__all__ = [
    "CatalogError",
    "ParameterCatalog",
    "ParameterDef",
    "default_catalog",
    "load_catalog",
    "CaseRecord",
    "Cohort",
    "CohortError",
    "DiseaseCode",
    "PrevalenceTable",
    "compute_prevalence",
    "coverage_stats",
    "read_cohort",
    "shannon_entropy",
    "write_cohort",
    "SynthSpec",
    "default_spec",
    "read_spec",
    "synth_cohort",
    "write_spec",
    "FeatureVector",
    "ImputerStats",
    "MedianImputer",
    "canonize",
    "fit_imputer",
    "impute",
    "ForestConfig",
    "RandomForest",
    "gini_impurity",
    "top_k",
    "RandomForestModel",
    "train_model",
    "ModelFormatError",
    "load_model",
    "save_model",
    "EvalReport",
    "confusion_matrix_topk",
    "cross_validate",
    "stratified_folds",
    "top_k_accuracy",
    "RocCurve",
    "average_roc",
    "roc_ovr",
    "wilcoxon_signed_rank",
    "chart_geometry",
    "information_score",
    "kl_divergence",
    "render_svg",
    "__version__",
]
