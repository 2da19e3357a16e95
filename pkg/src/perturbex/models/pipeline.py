"""Raw-to-encoded preprocessing.

Perturbation always happens in raw feature space; every artificial instance
is pushed through this pipeline before the model sees it. Numeric features
become a median-imputed value plus, when missing was observed in training, a
0/1 missing flag. Categorical and boolean features become a full one-hot
block over their observed codes, the missing code included. Every encoded
column records the interpretable feature it came from so per-column effects
can be folded back.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dataset import Dataset
from ..errors import LengthMismatch, SchemaMismatch

SYNTHETIC = -1  # source marker for columns with no interpretable feature


@dataclass(frozen=True)
class NumericStep:
    feature: int
    offset: int
    median: float
    missing_flag: bool


@dataclass(frozen=True)
class OneHotStep:
    feature: int
    offset: int
    n_codes: int


@dataclass(frozen=True)
class PreprocessPipeline:
    feature_names: tuple[str, ...]
    steps: tuple[NumericStep | OneHotStep, ...]
    columns: tuple[str, ...]  # encoded column names, for debugging and dumps
    source: np.ndarray  # int64 per encoded column; SYNTHETIC where no feature
    categories: tuple[tuple[str, ...] | None, ...]  # per feature, guards recoding

    @property
    def width(self) -> int:
        return len(self.columns)

    @property
    def d(self) -> int:
        return len(self.feature_names)

    def encode(self, codes: np.ndarray) -> np.ndarray:
        """Coded rows (B, d) to the encoded design matrix (B, width)."""
        codes = np.atleast_2d(np.asarray(codes, dtype=float))
        if codes.shape[1] != self.d:
            raise LengthMismatch(f"expected {self.d} features, got {codes.shape[1]}")
        n = codes.shape[0]
        out = np.zeros((n, self.width))
        for step in self.steps:
            col = codes[:, step.feature]
            if isinstance(step, NumericStep):
                nan = np.isnan(col)
                out[:, step.offset] = np.where(nan, step.median, col)
                if step.missing_flag:
                    out[:, step.offset + 1] = nan
            else:
                idx = col.astype(np.int64)
                if (idx < 0).any() or (idx >= step.n_codes).any():
                    bad = int(idx[(idx < 0) | (idx >= step.n_codes)][0])
                    raise LengthMismatch(
                        f"feature {self.feature_names[step.feature]!r}: "
                        f"code {bad} outside one-hot width {step.n_codes}"
                    )
                out[np.arange(n), step.offset + idx] = 1.0
        return out

    def encode_one(self, codes: np.ndarray) -> np.ndarray:
        return self.encode(codes[None, :])[0]

    def to_doc(self) -> dict:
        steps = []
        for s in self.steps:
            if isinstance(s, NumericStep):
                steps.append(
                    {
                        "kind": "numeric",
                        "feature": self.feature_names[s.feature],
                        "median": s.median,
                        "missing_flag": s.missing_flag,
                    }
                )
            else:
                steps.append(
                    {
                        "kind": "onehot",
                        "feature": self.feature_names[s.feature],
                        "n_codes": s.n_codes,
                        "categories": list(self.categories[s.feature] or ()),
                    }
                )
        return {"features": list(self.feature_names), "steps": steps}

    @staticmethod
    def from_doc(doc: dict, dataset: Dataset) -> "PreprocessPipeline":
        """Rebuild against a dataset, verifying category coding still matches."""
        names = tuple(doc["features"])
        if names != dataset.feature_names:
            raise SchemaMismatch("pipeline was built against a different feature list")
        steps: list[NumericStep | OneHotStep] = []
        columns: list[str] = []
        source: list[int] = []
        cats: list[tuple[str, ...] | None] = []
        offset = 0
        for j, raw in enumerate(doc["steps"]):
            col = dataset.columns[j]
            if raw["feature"] != names[j]:
                raise SchemaMismatch("pipeline step order does not match the feature list")
            if raw["kind"] == "numeric":
                if col.kind != "numeric":
                    raise SchemaMismatch(f"feature {names[j]!r} is no longer numeric")
                step = NumericStep(
                    feature=j,
                    offset=offset,
                    median=float(raw["median"]),
                    missing_flag=bool(raw["missing_flag"]),
                )
                columns.append(names[j])
                source.append(j)
                if step.missing_flag:
                    columns.append(f"{names[j]}__missing")
                    source.append(j)
                cats.append(None)
                offset += 1 + step.missing_flag
            else:
                stored = tuple(raw["categories"])
                observed = col.categories + (("<missing>",) if col.has_missing_category else ())
                if stored != observed:
                    raise SchemaMismatch(
                        f"feature {names[j]!r}: dataset categories differ from the "
                        "coding the model was trained on"
                    )
                step = OneHotStep(feature=j, offset=offset, n_codes=int(raw["n_codes"]))
                for cat in stored:
                    columns.append(f"{names[j]}={cat}")
                    source.append(j)
                cats.append(stored)
                offset += step.n_codes
            steps.append(step)
        return PreprocessPipeline(
            feature_names=names,
            steps=tuple(steps),
            columns=tuple(columns),
            source=np.asarray(source, dtype=np.int64),
            categories=tuple(cats),
        )


def fit_pipeline(dataset: Dataset) -> PreprocessPipeline:
    """Build the encoding from a dataset's observed columns."""
    steps: list[NumericStep | OneHotStep] = []
    columns: list[str] = []
    source: list[int] = []
    cats: list[tuple[str, ...] | None] = []
    offset = 0
    for j, col in enumerate(dataset.columns):
        if col.kind == "numeric":
            observed = col.values[~np.isnan(col.values)]
            median = float(np.median(observed)) if observed.size else 0.0
            flag = bool(col.missing.any())
            steps.append(NumericStep(feature=j, offset=offset, median=median, missing_flag=flag))
            columns.append(col.name)
            source.append(j)
            if flag:
                columns.append(f"{col.name}__missing")
                source.append(j)
            cats.append(None)
            offset += 1 + flag
        else:
            labels = col.categories + (("<missing>",) if col.has_missing_category else ())
            steps.append(OneHotStep(feature=j, offset=offset, n_codes=len(labels)))
            for cat in labels:
                columns.append(f"{col.name}={cat}")
                source.append(j)
            cats.append(labels)
            offset += len(labels)
    return PreprocessPipeline(
        feature_names=dataset.feature_names,
        steps=tuple(steps),
        columns=tuple(columns),
        source=np.asarray(source, dtype=np.int64),
        categories=tuple(cats),
    )


def encoded_to_interpretable_effects(
    effects: np.ndarray, pipeline: PreprocessPipeline
) -> tuple[np.ndarray, float]:
    """Fold per-encoded-column effects back onto their source features.

    Returns (per-feature sums, total effect dropped from synthetic columns).
    """
    effects = np.asarray(effects, dtype=float)
    if effects.shape != (pipeline.width,):
        raise LengthMismatch(
            f"expected {pipeline.width} encoded effects, got {effects.shape}"
        )
    out = np.zeros(pipeline.d)
    synthetic = pipeline.source == SYNTHETIC
    real = ~synthetic
    np.add.at(out, pipeline.source[real], effects[real])
    return out, float(effects[synthetic].sum())
