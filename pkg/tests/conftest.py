"""Shared builders: toy datasets with known structure, synthetic survey fixtures."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

from perturbex.dataset import Dataset, build_dataset, load_dataset
from perturbex.models.base import PredictorModel
from perturbex.models.pipeline import PreprocessPipeline, fit_pipeline
from perturbex.schema import (
    ConditionalityRule,
    FeatureSchema,
    GroupDecl,
    IntervalCondition,
    MembershipCondition,
    PartitionCell,
    PovertyConfig,
    SurveySchema,
)
from perturbex.synth import synthesize

NUMERIC_POOL = (0.5, 1.25, 2.0, 3.75)
CATEGORY_POOL = ("a", "b", "c")


def _toy_rule(kinds: tuple[str, ...]) -> ConditionalityRule:
    """Feature 0 drives the last feature, with a total two-cell partition."""
    driver = "f0"
    kind = kinds[0]
    if kind == "numeric":
        cells = (
            PartitionCell("low", {driver: IntervalCondition(None, 1.5)}),
            PartitionCell("high", {driver: IntervalCondition(1.5, None)}),
        )
    elif kind == "categorical":
        cells = (
            PartitionCell("first", {driver: MembershipCondition(frozenset({"a"}))}),
            PartitionCell("rest", {driver: MembershipCondition(frozenset({"b", "c"}))}),
        )
    else:
        cells = (
            PartitionCell("off", {driver: MembershipCondition(frozenset({"0"}))}),
            PartitionCell("on", {driver: MembershipCondition(frozenset({"1"}))}),
        )
    return ConditionalityRule(
        driver_features=(driver,),
        partition=cells,
        dependent_features=(f"f{len(kinds) - 1}",),
    )


def toy_schema(
    kinds: tuple[str, ...],
    with_rule: bool = False,
    poverty_line: float = 10.0,
    min_contrastive_rows: int = 1,
) -> SurveySchema:
    features = tuple(
        FeatureSchema(name=f"f{j}", kind=k, group_id="g0" if j % 2 == 0 else "g1")
        for j, k in enumerate(kinds)
    )
    groups = (GroupDecl("g0", "Even"),) + (
        (GroupDecl("g1", "Odd"),) if len(kinds) > 1 else ()
    )
    rules = (_toy_rule(kinds),) if with_rule else ()
    return SurveySchema(
        features=features,
        groups=groups,
        rules=rules,
        poverty=PovertyConfig(poverty_line, min_contrastive_rows),
    )


def toy_dataset(
    rng: np.random.Generator,
    kinds: tuple[str, ...],
    n: int = 32,
    missing_rate: float = 0.1,
    with_rule: bool = False,
    poverty_line: float = 10.0,
) -> Dataset:
    """Random dataset where every numeric feature has at most 4 distinct values."""
    schema = toy_schema(kinds, with_rule=with_rule, poverty_line=poverty_line)
    raw: dict[str, list] = {}
    for j, kind in enumerate(kinds):
        if kind == "numeric":
            col = [float(rng.choice(NUMERIC_POOL)) for _ in range(n)]
        elif kind == "categorical":
            col = [str(rng.choice(CATEGORY_POOL)) for _ in range(n)]
        else:
            col = [str(int(rng.integers(2))) for _ in range(n)]
        for i in range(n):
            if rng.random() < missing_rate:
                col[i] = None
        if all(v is None for v in col):
            col[0] = {"numeric": 1.25, "categorical": "a", "boolean": "0"}[kind]
        raw[f"f{j}"] = col
    income = [float(np.round(rng.normal(10.0, 4.0), 3)) for _ in range(n)]
    return build_dataset(schema, raw, income, ids=[f"T{i:03d}" for i in range(n)])


def complete_row_index(dataset: Dataset) -> int:
    """First row with no missing values; falls back to row 0."""
    for i in range(dataset.n):
        if not any(c.missing[i] for c in dataset.columns):
            return i
    return 0


class WeightModel(PredictorModel):
    """Deterministic nonlinear toy: weighted sum plus a squared interaction."""

    def __init__(self, width: int, seed: int = 7):
        rng = np.random.default_rng(seed)
        self.w = rng.normal(0.0, 1.0, size=width)
        self.w2 = rng.normal(0.0, 0.3, size=width)
        self.model_id = f"toy-weight-{width}-{seed}"

    def predict_encoded(self, X: np.ndarray) -> np.ndarray:
        base = X @ self.w
        return base + (X @ self.w2) ** 2


class CountingModel(PredictorModel):
    """Wraps another model and counts rows pushed through it."""

    def __init__(self, inner: PredictorModel):
        self.inner = inner
        self.model_id = inner.model_id
        self.rows_seen = 0
        self.calls = 0

    def predict_encoded(self, X: np.ndarray) -> np.ndarray:
        self.calls += 1
        self.rows_seen += X.shape[0]
        return self.inner.predict_encoded(X)


@dataclass(frozen=True)
class SurveyEnv:
    root: Path
    dataset: Dataset
    pipeline: PreprocessPipeline
    csv_path: Path
    schema_path: Path
    focal_ids: tuple[str, ...]
    poverty_line: float


def _load_env(root: Path, result) -> SurveyEnv:
    import json

    dataset = load_dataset(result.csv_path, result.schema_path)
    focals = tuple(json.loads(Path(result.focals_path).read_text())["household_ids"])
    return SurveyEnv(
        root=root,
        dataset=dataset,
        pipeline=fit_pipeline(dataset),
        csv_path=Path(result.csv_path),
        schema_path=Path(result.schema_path),
        focal_ids=focals,
        poverty_line=result.poverty_line,
    )


@pytest.fixture(scope="session")
def small_env(tmp_path_factory) -> SurveyEnv:
    root = tmp_path_factory.mktemp("survey-small")
    return _load_env(root, synthesize(root, profile="small", seed=0))


@pytest.fixture(scope="session")
def full_env(tmp_path_factory) -> SurveyEnv:
    root = tmp_path_factory.mktemp("survey-full")
    return _load_env(root, synthesize(root, profile="full", seed=0))
