"""Predictor abstraction and model artifact persistence.

A PredictorModel is a pure batch function from encoded instances to incomes.
The JSON artifact bundles the model parameters with the pipeline that
produced its design matrix, so a reloaded model keeps encoding instances
exactly the way it was trained.
"""

from __future__ import annotations

import abc
import hashlib
import json
from pathlib import Path
from typing import Sequence

import numpy as np

from ..dataset import Dataset, Household
from ..errors import EncodingError, ParseError
from .pipeline import PreprocessPipeline

ARTIFACT_VERSION = 1


class PredictorModel(abc.ABC):
    """Pure instance -> income-per-capita function, batch form."""

    model_id: str

    @abc.abstractmethod
    def predict_encoded(self, X: np.ndarray) -> np.ndarray:
        """Predictions for an encoded batch (B, width) -> (B,)."""


def fingerprint_params(kind: str, payload: dict) -> str:
    blob = json.dumps({"kind": kind, **payload}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def predict(model: PredictorModel, pipeline: PreprocessPipeline, raw: Household) -> float:
    """Income prediction for one household."""
    y = model.predict_encoded(pipeline.encode(raw.codes[None, :]))
    out = float(y[0])
    if not np.isfinite(out):
        raise EncodingError(f"model {model.model_id} produced a non-finite prediction")
    return out


def predict_batch(
    model: PredictorModel, pipeline: PreprocessPipeline, raws: Sequence[Household]
) -> np.ndarray:
    """Order-preserving batch prediction, elementwise equal to predict()."""
    if not raws:
        return np.zeros(0)
    X = pipeline.encode(np.stack([h.codes for h in raws]))
    y = model.predict_encoded(X)
    bad = np.flatnonzero(~np.isfinite(y))
    if bad.size:
        raise EncodingError(
            f"model {model.model_id} produced a non-finite prediction at index {int(bad[0])}"
        )
    return y


class AffineWrapper(PredictorModel):
    """a * M + b around any base model; predictions are exactly a*y + b."""

    def __init__(self, base: PredictorModel, a: float, b: float):
        self.base = base
        self.a = float(a)
        self.b = float(b)
        self.model_id = fingerprint_params(
            "affine", {"a": self.a, "b": self.b, "base": base.model_id}
        )

    def predict_encoded(self, X: np.ndarray) -> np.ndarray:
        return self.a * self.base.predict_encoded(X) + self.b


def save_model(model: PredictorModel, pipeline: PreprocessPipeline, path: str | Path) -> None:
    """Versioned JSON dump of a reference model plus its pipeline."""
    doc = {
        "artifact_version": ARTIFACT_VERSION,
        "model_id": model.model_id,
        "pipeline": pipeline.to_doc(),
        **model.to_doc(),  # type: ignore[attr-defined]
    }
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def load_model(path: str | Path, dataset: Dataset) -> tuple[PredictorModel, PreprocessPipeline]:
    """Load an artifact and rebind its pipeline against the given dataset."""
    from .gbt import TreeEnsemble
    from .linear import LinearModel

    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: not valid JSON ({e})") from None
    version = doc.get("artifact_version")
    if version != ARTIFACT_VERSION:
        raise ParseError(f"{path}: unsupported artifact_version {version!r}")
    pipeline = PreprocessPipeline.from_doc(doc["pipeline"], dataset)
    kind = doc.get("kind")
    if kind == "linear":
        model: PredictorModel = LinearModel.from_doc(doc)
    elif kind == "gbt":
        model = TreeEnsemble.from_doc(doc)
    else:
        raise ParseError(f"{path}: unknown model kind {kind!r}")
    return model, pipeline
