from .base import AffineWrapper, PredictorModel, load_model, predict, predict_batch, save_model
from .external import ExternalModel, external_model
from .gbt import TreeEnsemble, fit_tree_ensemble
from .linear import LinearModel, fit_linear
from .pipeline import PreprocessPipeline, encoded_to_interpretable_effects, fit_pipeline

__all__ = [
    "AffineWrapper",
    "ExternalModel",
    "LinearModel",
    "PredictorModel",
    "PreprocessPipeline",
    "TreeEnsemble",
    "encoded_to_interpretable_effects",
    "external_model",
    "fit_linear",
    "fit_pipeline",
    "fit_tree_ensemble",
    "load_model",
    "predict",
    "predict_batch",
    "save_model",
]
