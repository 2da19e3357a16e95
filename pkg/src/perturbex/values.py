"""Replacement value sets with empirical weights.

A value set is the finite list of replacement values tried for one feature,
each carrying its observed proportion. Categorical and boolean features use
their observed codes directly (the missing code included when missing was
observed). Numeric features use the distinct observed values when there are
few, and quantile bins otherwise; a bin is represented by the lower median of
the observations it contains, so every replacement is a value that actually
occurs in the data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Column, Dataset
from .errors import AllMissingColumn, InvalidParams

DEFAULT_MAX_BINS = 16


@dataclass(frozen=True)
class ValueSet:
    """Replacement values and weights for one feature."""

    feature: int
    kind: str
    codes: np.ndarray  # float64, replacement codes, ascending for numeric
    weights: np.ndarray  # float64, positive, sums to 1
    edges: np.ndarray | None = None  # interior bin edges when numeric was binned
    code_lookup: np.ndarray | None = None  # categorical: code -> value index, -1 absent

    @property
    def size(self) -> int:
        return len(self.codes)

    def map_codes(self, x: np.ndarray) -> np.ndarray:
        """Value-set index for each code in x; -1 where unmapped (NaN, absent code)."""
        x = np.asarray(x, dtype=float)
        if self.kind == "numeric":
            out = np.full(x.shape, -1, dtype=np.int64)
            ok = ~np.isnan(x)
            if self.edges is not None:
                out[ok] = np.searchsorted(self.edges, x[ok], side="right")
            else:
                pos = np.searchsorted(self.codes, x[ok])
                pos = np.clip(pos, 0, len(self.codes) - 1)
                hit = self.codes[pos] == x[ok]
                mapped = np.where(hit, pos, -1)
                out[ok] = mapped
            return out
        idx = x.astype(np.int64)
        ok = (idx >= 0) & (idx < len(self.code_lookup))
        out = np.full(x.shape, -1, dtype=np.int64)
        out[ok] = self.code_lookup[idx[ok]]
        return out


@dataclass(frozen=True)
class JointValueSet:
    """Observed value pairs for two features, with joint weights.

    Only pairs with positive observed mass appear, so perturbing a pair never
    manufactures a combination absent from the data.
    """

    left: ValueSet
    right: ValueSet
    left_idx: np.ndarray  # int64 indices into left.codes
    right_idx: np.ndarray  # int64 indices into right.codes
    weights: np.ndarray  # float64, positive, sums to 1

    @property
    def size(self) -> int:
        return len(self.weights)


def value_set(column: Column, feature: int, max_bins: int = DEFAULT_MAX_BINS) -> ValueSet:
    """Empirical value set for one column."""
    if max_bins < 2:
        raise InvalidParams(f"max_bins must be at least 2, got {max_bins}")

    if column.kind == "numeric":
        observed = column.values[~np.isnan(column.values)]
        if observed.size == 0:
            raise AllMissingColumn(f"feature {column.name!r} has no observed values")
        distinct, counts = np.unique(observed, return_counts=True)
        if len(distinct) <= max_bins:
            return ValueSet(
                feature=feature,
                kind=column.kind,
                codes=distinct,
                weights=counts / observed.size,
            )
        qs = np.arange(1, max_bins) / max_bins
        edges = np.unique(np.quantile(observed, qs))
        bins = np.searchsorted(edges, observed, side="right")
        n_bins = len(edges) + 1
        counts = np.bincount(bins, minlength=n_bins)
        keep = counts > 0
        reps = np.empty(n_bins)
        for b in np.flatnonzero(keep):
            members = np.sort(observed[bins == b])
            reps[b] = members[(len(members) - 1) // 2]  # lower median, an observed value
        if not keep.all():
            # an empty bin has no members, so dropping its right edge merges it
            # into the next bin without disturbing anyone's membership
            edges = edges[keep[:-1]]
            reps = reps[keep]
            counts = counts[keep]
            edges = edges[: len(reps) - 1]
        return ValueSet(
            feature=feature,
            kind=column.kind,
            codes=reps,
            weights=counts / observed.size,
            edges=edges,
        )

    n_codes = column.n_codes
    counts = np.bincount(column.values.astype(np.int64), minlength=n_codes)
    present = np.flatnonzero(counts > 0)
    lookup = np.full(n_codes, -1, dtype=np.int64)
    lookup[present] = np.arange(len(present))
    return ValueSet(
        feature=feature,
        kind=column.kind,
        codes=present.astype(float),
        weights=counts[present] / column.values.size,
        code_lookup=lookup,
    )


def joint_value_set(vs_j: ValueSet, vs_k: ValueSet, col_j: Column, col_k: Column) -> JointValueSet:
    """Joint empirical distribution over the two features' value sets.

    Rows where either side is unmapped (numeric NaN) are dropped pairwise;
    weights are renormalized over the remaining rows.
    """
    a = vs_j.map_codes(col_j.values)
    b = vs_k.map_codes(col_k.values)
    ok = (a >= 0) & (b >= 0)
    a, b = a[ok], b[ok]
    if a.size == 0:
        raise AllMissingColumn(
            f"features {col_j.name!r} and {col_k.name!r} are never jointly observed"
        )
    flat = a * vs_k.size + b
    counts = np.bincount(flat, minlength=vs_j.size * vs_k.size)
    present = np.flatnonzero(counts > 0)
    return JointValueSet(
        left=vs_j,
        right=vs_k,
        left_idx=(present // vs_k.size).astype(np.int64),
        right_idx=(present % vs_k.size).astype(np.int64),
        weights=counts[present] / a.size,
    )


def all_value_sets(dataset: Dataset, max_bins: int = DEFAULT_MAX_BINS) -> list[ValueSet]:
    return [value_set(dataset.columns[j], j, max_bins) for j in range(dataset.d)]
