"""Feature-group importances and the contrastive percentile distribution.

A group's importance is the mean of its members' importances. Computing
group importances for every household below the poverty line gives a
distribution against which any focal household can be ranked; the rank uses
mid-rank percentiles (ties count half), which behave symmetrically on the
small contrast sets typical here. The distribution is expensive (one full
contrastive explanation per poor household) and therefore cached to disk,
keyed by the config fingerprint.
"""

from __future__ import annotations

import datetime as _dt
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import Dataset, filter_contrastive
from .engine import (
    ALG_CONTRASTIVE,
    DEFAULT_BUDGET,
    ImportanceVector,
    _run,
    build_structure,
    planned_evaluations,
)
from .errors import BudgetExceeded, FingerprintMismatch, ParseError, PartitionError
from .fingerprint import config_fingerprint
from .models.base import PredictorModel
from .models.pipeline import PreprocessPipeline
from .resample import build_context
from .schema import ConditionalityRule, PovertyConfig, SurveySchema
from .values import DEFAULT_MAX_BINS

CACHE_VERSION = 1


@dataclass(frozen=True)
class FeatureGroup:
    """A labeled set of feature indices."""

    id: str
    label: str
    members: tuple[int, ...]

    @property
    def q(self) -> int:
        return len(self.members)


def groups_from_schema(schema: SurveySchema) -> tuple[FeatureGroup, ...]:
    """Feature groups in schema declaration order."""
    members: dict[str, list[int]] = {g.id: [] for g in schema.groups}
    for j, f in enumerate(schema.features):
        members[f.group_id].append(j)
    return tuple(
        FeatureGroup(id=g.id, label=g.label, members=tuple(members[g.id]))
        for g in schema.groups
        if members[g.id]
    )


@dataclass(frozen=True)
class GroupImportanceVector:
    values: np.ndarray  # (p,)
    household_id: str | None
    fingerprint: str

    @property
    def p(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class ContrastiveDistribution:
    """Group importances of every household in the contrast set."""

    group_ids: tuple[str, ...]
    rows: np.ndarray  # (m, p)
    sorted_columns: np.ndarray  # (m, p), each column sorted ascending
    fingerprint: str

    @property
    def m(self) -> int:
        return len(self.rows)


def _check_partition(groups: tuple[FeatureGroup, ...], d: int) -> None:
    seen: set[int] = set()
    for g in groups:
        if g.q < 1:
            raise PartitionError(f"group {g.id!r} has no members")
        overlap = seen.intersection(g.members)
        if overlap:
            raise PartitionError(f"feature index {min(overlap)} appears in more than one group")
        seen.update(g.members)
    if seen != set(range(d)):
        missing = sorted(set(range(d)) - seen)
        raise PartitionError(f"groups do not cover features {missing}")


def group_importances(
    importances: ImportanceVector,
    groups: tuple[FeatureGroup, ...],
    fingerprint: str | None = None,
) -> GroupImportanceVector:
    """Mean member importance per group.

    fingerprint defaults to the importance vector's own; callers ranking
    against a cached distribution pass the run config's fingerprint instead.
    """
    _check_partition(groups, importances.d)
    values = np.array(
        [importances.values[list(g.members)].sum() / g.q for g in groups]
    )
    return GroupImportanceVector(
        values=values,
        household_id=importances.focal_id,
        fingerprint=importances.fingerprint if fingerprint is None else fingerprint,
    )


def build_contrastive_distribution(
    dataset: Dataset,
    model: PredictorModel,
    pipeline: PreprocessPipeline,
    rules: tuple[ConditionalityRule, ...] | None = None,
    config: PovertyConfig | None = None,
    groups: tuple[FeatureGroup, ...] | None = None,
    max_bins: int = DEFAULT_MAX_BINS,
    seed: int = 0,
    resamples: int = 1,
    *,
    workers: int = 1,
    budget: int = DEFAULT_BUDGET,
) -> ContrastiveDistribution:
    """One contrastive explanation per household below the line.

    The total planned model-call count across all m explanations is checked
    against the budget before any model call. Work fans out across
    households; results are assembled in household order, so the matrix is
    bit-identical for any worker count.
    """
    if rules is None:
        rules = dataset.schema.rules
    if config is None:
        config = dataset.schema.poverty
    if groups is None:
        groups = groups_from_schema(dataset.schema)
    _check_partition(groups, dataset.d)

    ref = filter_contrastive(dataset, config)
    ctx = build_context(ref, rules)
    structure = build_structure(ref, max_bins, diagonal_only=False)
    households = [ref.household(i) for i in range(ref.n)]
    planned = sum(planned_evaluations(structure, ctx, h, resamples) for h in households)
    if planned > budget:
        raise BudgetExceeded(planned=planned, budget=budget)

    def explain(i: int) -> ImportanceVector:
        # same computation as contrastive_importances, sharing the compiled
        # structure and resample context across the m households
        return _run(
            ref,
            model,
            pipeline,
            households[i],
            algorithm=ALG_CONTRASTIVE,
            diagonal_only=False,
            rules=rules,
            max_bins=max_bins,
            seed=seed,
            resamples=resamples,
            poverty_line=config.poverty_line,
            workers=1,
            budget=budget,
            spawn_prefix=(i,),
            record_sink=None,
            event_sink=None,
            structure=structure,
            ctx=ctx,
        )

    if workers <= 1:
        vectors = [explain(i) for i in range(ref.n)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            vectors = list(pool.map(explain, range(ref.n)))

    rows = np.stack([group_importances(v, groups).values for v in vectors])
    return ContrastiveDistribution(
        group_ids=tuple(g.id for g in groups),
        rows=rows,
        sorted_columns=np.sort(rows, axis=0),
        fingerprint=config_fingerprint(
            dataset.content_hash,
            model.model_id,
            max_bins,
            seed,
            resamples,
            config.poverty_line,
        ),
    )


def percentile_contrast(
    focal_groups: GroupImportanceVector, dist: ContrastiveDistribution
) -> np.ndarray:
    """Mid-rank percentile of each group value within the distribution.

    percentile = 100 * (count_below + 0.5 * count_equal) / m.
    """
    if focal_groups.fingerprint != dist.fingerprint:
        raise FingerprintMismatch(expected=dist.fingerprint, found=focal_groups.fingerprint)
    if focal_groups.p != len(dist.group_ids):
        raise PartitionError(
            f"focal has {focal_groups.p} groups, distribution has {len(dist.group_ids)}"
        )
    out = np.empty(focal_groups.p)
    m = dist.m
    for k, x in enumerate(focal_groups.values):
        col = dist.sorted_columns[:, k]
        below = int(np.searchsorted(col, x, side="left"))
        upto = int(np.searchsorted(col, x, side="right"))
        out[k] = 100.0 * (below + 0.5 * (upto - below)) / m
    return out


def save_distribution(dist: ContrastiveDistribution, path: str | Path) -> None:
    doc = {
        "cache_version": CACHE_VERSION,
        "fingerprint": dist.fingerprint,
        "groups": list(dist.group_ids),
        "rows": [[float(v) for v in row] for row in dist.rows],
        "built_at": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def load_distribution(path: str | Path) -> ContrastiveDistribution:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: not valid JSON ({e})") from None
    version = doc.get("cache_version")
    if version != CACHE_VERSION:
        raise ParseError(f"{path}: unsupported cache_version {version!r}")
    rows = np.asarray(doc["rows"], dtype=float)
    if rows.ndim != 2 or rows.shape[1] != len(doc["groups"]):
        raise ParseError(f"{path}: rows do not match the group list")
    return ContrastiveDistribution(
        group_ids=tuple(doc["groups"]),
        rows=rows,
        sorted_columns=np.sort(rows, axis=0),
        fingerprint=doc["fingerprint"],
    )
