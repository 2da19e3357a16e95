"""Least-squares linear model over the encoded design.

Serves as the analytic reference: coefficients are exposed so closed-form
importance values can be computed independently of the perturbation loop.
One-hot designs are frequently collinear (each block sums to the constant
column), so rank deficiency falls back to a tiny ridge penalty unless the
caller pinned ridge=0.
"""

from __future__ import annotations

import numpy as np

from ..dataset import Dataset
from ..errors import DegenerateDesign
from .base import PredictorModel, fingerprint_params
from .pipeline import PreprocessPipeline

RIDGE_FALLBACK = 1e-8


class LinearModel(PredictorModel):
    def __init__(self, coef: np.ndarray, intercept: float, used_ridge: float = 0.0):
        self.coef = np.asarray(coef, dtype=float)
        self.intercept = float(intercept)
        self.used_ridge = float(used_ridge)
        self.model_id = fingerprint_params(
            "linear",
            {"coef": self.coef.tolist(), "intercept": self.intercept},
        )

    def predict_encoded(self, X: np.ndarray) -> np.ndarray:
        return X @ self.coef + self.intercept

    def to_doc(self) -> dict:
        return {
            "kind": "linear",
            "coef": self.coef.tolist(),
            "intercept": self.intercept,
            "used_ridge": self.used_ridge,
        }

    @staticmethod
    def from_doc(doc: dict) -> "LinearModel":
        return LinearModel(
            coef=np.asarray(doc["coef"], dtype=float),
            intercept=float(doc["intercept"]),
            used_ridge=float(doc.get("used_ridge", 0.0)),
        )


def fit_linear(
    dataset: Dataset, pipeline: PreprocessPipeline, ridge: float | None = None
) -> LinearModel:
    """Fit by least squares; ridge=None auto-falls back on rank deficiency.

    ridge=0 demands an exact solve and raises DegenerateDesign when the
    augmented design is rank-deficient.
    """
    X = pipeline.encode(dataset.matrix)
    y = dataset.income
    A = np.column_stack([X, np.ones(len(y))])
    p = A.shape[1]

    if ridge is None or ridge == 0.0:
        beta, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
        if rank == p:
            return LinearModel(coef=beta[:-1], intercept=beta[-1])
        if ridge == 0.0:
            raise DegenerateDesign(
                f"design matrix rank {rank} < {p} columns and ridge is pinned to 0"
            )
        ridge = RIDGE_FALLBACK

    # penalize everything but the intercept
    penalty = ridge * np.eye(p)
    penalty[-1, -1] = 0.0
    beta = np.linalg.solve(A.T @ A + penalty, A.T @ y)
    return LinearModel(coef=beta[:-1], intercept=beta[-1], used_ridge=ridge)
