"""Individual perturbation explanations for household income models.

Given a trained income predictor and a survey dataset, this package computes
per-feature and per-group monetary importances for a single household by
replacing feature values with empirically observed alternatives, optionally
respecting declared conditionality rules and contrasting against the
below-poverty-line population.
"""

from .dataset import Dataset, Household, build_dataset, filter_contrastive, load_dataset
from .engine import (
    ImportanceVector,
    bivariate_importances,
    conditional_univariate_importances,
    contrastive_importances,
    univariate_importances,
)
from .groups import (
    ContrastiveDistribution,
    FeatureGroup,
    GroupImportanceVector,
    build_contrastive_distribution,
    group_importances,
    groups_from_schema,
    load_distribution,
    percentile_contrast,
    save_distribution,
)
from .models import (
    ExternalModel,
    LinearModel,
    PredictorModel,
    PreprocessPipeline,
    TreeEnsemble,
    external_model,
    fit_linear,
    fit_pipeline,
    fit_tree_ensemble,
    load_model,
    predict,
    save_model,
)
from .report import ExplanationReport, build_report, dumps_report, write_report
from .schema import PovertyConfig, SurveySchema, load_schema, parse_schema
from .synth import synthesize
from .values import ValueSet, all_value_sets, value_set

__version__ = "0.1.0"

__all__ = [
    "ContrastiveDistribution",
    "Dataset",
    "ExplanationReport",
    "ExternalModel",
    "FeatureGroup",
    "GroupImportanceVector",
    "Household",
    "ImportanceVector",
    "LinearModel",
    "PovertyConfig",
    "PredictorModel",
    "PreprocessPipeline",
    "SurveySchema",
    "TreeEnsemble",
    "ValueSet",
    "all_value_sets",
    "bivariate_importances",
    "build_contrastive_distribution",
    "build_dataset",
    "build_report",
    "conditional_univariate_importances",
    "contrastive_importances",
    "dumps_report",
    "external_model",
    "filter_contrastive",
    "fit_linear",
    "fit_pipeline",
    "fit_tree_ensemble",
    "group_importances",
    "groups_from_schema",
    "load_dataset",
    "load_distribution",
    "load_model",
    "load_schema",
    "parse_schema",
    "percentile_contrast",
    "predict",
    "save_distribution",
    "save_model",
    "univariate_importances",
    "value_set",
    "write_report",
]
