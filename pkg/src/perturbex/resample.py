"""Conditional resampling of dependent features after a perturbation.

When a perturbation touches a driver feature of a conditionality rule, the
rule's dependent features are redrawn from the empirical distribution of the
matching partition cell: a uniformly chosen dataset row among the cell's rows
that carry an observed value for the dependent. Drawing actual rows keeps
every resampled value inside the cell's observed support. Explicitly
perturbed features are never redrawn; they are the event being conditioned
on.

Fallbacks (instance matches no cell, cell empty, cell has no observed value
for the dependent) draw from the unconditional column distribution instead
and are reported so callers can surface them as warnings.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dataset import Dataset
from .errors import PartitionError
from .schema import IntervalCondition, MembershipCondition, SurveySchema

# fallback reasons
UNMATCHED_CELL = "UNMATCHED_CELL"
EMPTY_SUBSET = "EMPTY_SUBSET"
NO_ADMISSIBLE_VALUE = "NO_ADMISSIBLE_VALUE"


@dataclass(frozen=True)
class ResampleEvent:
    """One dependent-feature redraw, for warnings and feasibility audits."""

    rule: int
    cell: str | None  # matched cell label, None on UNMATCHED_CELL
    feature: int
    code: float
    fallback: str | None  # None for a clean conditional draw


@dataclass(frozen=True)
class CompiledCell:
    label: str
    # per-driver scalar predicates over coded values
    predicates: tuple[tuple[int, Callable[[float], bool]], ...]
    rows: np.ndarray  # dataset rows matching this cell


@dataclass(frozen=True)
class CompiledRule:
    index: int
    drivers: tuple[int, ...]
    dependents: tuple[int, ...]
    cells: tuple[CompiledCell, ...]
    # admissible[cell_idx][dependent] -> row indices with an observed value
    admissible: tuple[dict[int, np.ndarray], ...]

    def cell_for_codes(self, codes: np.ndarray) -> int | None:
        for ci, cell in enumerate(self.cells):
            if all(pred(codes[j]) for j, pred in cell.predicates):
                return ci
        return None


@dataclass(frozen=True)
class ResampleContext:
    """Precompiled rules plus the matrix draws are taken from."""

    schema: SurveySchema
    matrix: np.ndarray
    rules: tuple[CompiledRule, ...]
    fallback_rows: dict[int, np.ndarray]  # feature -> rows with an observed value
    rules_by_driver: dict[int, tuple[int, ...]]

    def triggered(self, perturbed: Sequence[int]) -> tuple[int, ...]:
        """Indices of rules whose driver set intersects the perturbed features."""
        hit: set[int] = set()
        for j in perturbed:
            hit.update(self.rules_by_driver.get(j, ()))
        return tuple(sorted(hit))


def _scalar_predicate(cond, column) -> Callable[[float], bool]:
    if isinstance(cond, IntervalCondition):
        lo = -np.inf if cond.lo is None else cond.lo
        hi = np.inf if cond.hi is None else cond.hi
        return lambda x: (not np.isnan(x)) and lo <= x < hi
    if isinstance(cond, MembershipCondition):
        allowed = frozenset(
            float(column.categories.index(v)) for v in cond.values if v in column.categories
        )
        return lambda x: x in allowed
    raise PartitionError(f"unknown condition type {type(cond).__name__}")


def _vector_mask(cond, column) -> np.ndarray:
    x = column.values
    if isinstance(cond, IntervalCondition):
        lo = -np.inf if cond.lo is None else cond.lo
        hi = np.inf if cond.hi is None else cond.hi
        return ~np.isnan(x) & (x >= lo) & (x < hi)
    allowed = [column.categories.index(v) for v in cond.values if v in column.categories]
    return np.isin(x, np.asarray(allowed, dtype=float)) if allowed else np.zeros(len(x), bool)


def build_context(dataset: Dataset, rules=None) -> ResampleContext:
    """Compile conditionality rules against a dataset.

    rules defaults to the dataset schema's own rule list; callers may pass a
    different (already validated) set.
    """
    schema = dataset.schema
    if rules is None:
        rules = schema.rules
    fallback_rows: dict[int, np.ndarray] = {}

    def observed_rows(j: int) -> np.ndarray:
        if j not in fallback_rows:
            fallback_rows[j] = np.flatnonzero(~dataset.columns[j].missing)
        return fallback_rows[j]

    compiled = []
    for r_idx, rule in enumerate(rules):
        drivers = schema.feature_indices(rule.driver_features)
        dependents = schema.feature_indices(rule.dependent_features)
        cells = []
        admissible = []
        for cell in rule.partition:
            preds = []
            mask = np.ones(dataset.n, dtype=bool)
            for name, cond in cell.conditions.items():
                j = schema.index[name]
                col = dataset.columns[j]
                preds.append((j, _scalar_predicate(cond, col)))
                mask &= _vector_mask(cond, col)
            rows = np.flatnonzero(mask)
            cells.append(CompiledCell(label=cell.label, predicates=tuple(preds), rows=rows))
            adm: dict[int, np.ndarray] = {}
            for j in dependents:
                col = dataset.columns[j]
                adm[j] = rows[~col.missing[rows]] if col.kind == "numeric" else rows
            admissible.append(adm)
        # make sure every dependent has somewhere to fall back to
        for j in dependents:
            observed_rows(j)
        compiled.append(
            CompiledRule(
                index=r_idx,
                drivers=tuple(drivers),
                dependents=tuple(dependents),
                cells=tuple(cells),
                admissible=tuple(admissible),
            )
        )

    by_driver: dict[int, list[int]] = {}
    for rule in compiled:
        for j in rule.drivers:
            by_driver.setdefault(j, []).append(rule.index)
    return ResampleContext(
        schema=schema,
        matrix=dataset.matrix,
        rules=tuple(compiled),
        fallback_rows=fallback_rows,
        rules_by_driver={j: tuple(v) for j, v in by_driver.items()},
    )


def conditional_resample(
    ctx: ResampleContext,
    row: np.ndarray,
    perturbed: Sequence[int],
    rng: np.random.Generator,
    triggered: tuple[int, ...] | None = None,
) -> list[ResampleEvent]:
    """Redraw dependents of triggered rules in place; returns the draw events.

    ``row`` already carries the explicit perturbation. Cell membership is
    decided on that state, before any redraw. A feature claimed by several
    triggered rules is redrawn once, by the lowest-indexed rule.
    """
    if triggered is None:
        triggered = ctx.triggered(perturbed)
    if not triggered:
        return []
    events: list[ResampleEvent] = []
    skip = set(perturbed)
    for r_idx in triggered:
        rule = ctx.rules[r_idx]
        ci = rule.cell_for_codes(row)
        for j in rule.dependents:
            if j in skip:
                continue
            skip.add(j)
            fallback: str | None = None
            rows: np.ndarray
            if ci is None:
                fallback = UNMATCHED_CELL
                rows = ctx.fallback_rows[j]
            else:
                rows = rule.admissible[ci][j]
                if rows.size == 0:
                    fallback = (
                        EMPTY_SUBSET if rule.cells[ci].rows.size == 0 else NO_ADMISSIBLE_VALUE
                    )
                    rows = ctx.fallback_rows[j]
            pick = rows[int(rng.integers(rows.size))]
            code = float(ctx.matrix[pick, j])
            row[j] = code
            events.append(
                ResampleEvent(
                    rule=r_idx,
                    cell=None if ci is None else rule.cells[ci].label,
                    feature=j,
                    code=code,
                    fallback=fallback,
                )
            )
    return events


def derive_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Generator for one evaluation, stable under any execution order."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=key))
