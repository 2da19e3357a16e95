"""Gradient-boosted regression trees over histogram bins.

Squared-loss boosting from the mean prediction: each round fits a
depth-limited regression tree to the residuals of a row subsample and adds
it with a learning rate. Split search runs on per-column histograms (at most
64 bins, quantile edges), with thresholds stored as real values so training
and prediction partition rows identically. Everything is deterministic for a
fixed seed, including tie-breaks, and the fitted ensemble serializes to
plain JSON.
"""

from __future__ import annotations

import numpy as np

from ..dataset import Dataset
from ..errors import InvalidParams
from .base import PredictorModel, fingerprint_params
from .pipeline import PreprocessPipeline

MAX_HIST_BINS = 64
MIN_GAIN = 1e-12


class _Tree:
    """Flat array representation; feature == -1 marks a leaf."""

    def __init__(self):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []

    def add_leaf(self, value: float) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(value)
        return len(self.feature) - 1

    def add_split(self, feature: int, threshold: float) -> int:
        self.feature.append(feature)
        self.threshold.append(threshold)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        return len(self.feature) - 1

    def freeze(self) -> dict:
        return {
            "feature": np.asarray(self.feature, dtype=np.int64),
            "threshold": np.asarray(self.threshold),
            "left": np.asarray(self.left, dtype=np.int64),
            "right": np.asarray(self.right, dtype=np.int64),
            "value": np.asarray(self.value),
        }


def _predict_tree(tree: dict, X: np.ndarray) -> np.ndarray:
    n = len(X)
    idx = np.zeros(n, dtype=np.int64)
    feature = tree["feature"]
    if (feature >= 0).sum() == 0:
        return np.full(n, tree["value"][0])
    rows = np.arange(n)
    while True:
        f = feature[idx]
        split = f >= 0
        if not split.any():
            return tree["value"][idx]
        x = X[rows, np.where(split, f, 0)]
        go_left = x < tree["threshold"][idx]
        nxt = np.where(go_left, tree["left"][idx], tree["right"][idx])
        idx = np.where(split, nxt, idx)


class TreeEnsemble(PredictorModel):
    def __init__(self, base: float, learning_rate: float, trees: list[dict], model_id: str):
        self.base = float(base)
        self.learning_rate = float(learning_rate)
        self.trees = trees
        self.model_id = model_id

    def predict_encoded(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.full(len(X), self.base)
        for tree in self.trees:
            out += self.learning_rate * _predict_tree(tree, X)
        return out

    def to_doc(self) -> dict:
        return {
            "kind": "gbt",
            "base": self.base,
            "learning_rate": self.learning_rate,
            "trees": [
                {
                    "feature": t["feature"].tolist(),
                    "threshold": t["threshold"].tolist(),
                    "left": t["left"].tolist(),
                    "right": t["right"].tolist(),
                    "value": t["value"].tolist(),
                }
                for t in self.trees
            ],
        }

    @staticmethod
    def from_doc(doc: dict) -> "TreeEnsemble":
        trees = [
            {
                "feature": np.asarray(t["feature"], dtype=np.int64),
                "threshold": np.asarray(t["threshold"], dtype=float),
                "left": np.asarray(t["left"], dtype=np.int64),
                "right": np.asarray(t["right"], dtype=np.int64),
                "value": np.asarray(t["value"], dtype=float),
            }
            for t in doc["trees"]
        ]
        return TreeEnsemble(
            base=float(doc["base"]),
            learning_rate=float(doc["learning_rate"]),
            trees=trees,
            model_id=doc["model_id"],
        )


def _bin_columns(X: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    """Histogram bin index per cell plus the real-valued edges per column."""
    n, p = X.shape
    binned = np.zeros((n, p), dtype=np.int64)
    edges_per_col: list[np.ndarray] = []
    for c in range(p):
        col = X[:, c]
        distinct = np.unique(col)
        if len(distinct) > MAX_HIST_BINS:
            qs = np.arange(1, MAX_HIST_BINS) / MAX_HIST_BINS
            edges = np.unique(np.quantile(col, qs))
        else:
            edges = distinct[1:]
        edges_per_col.append(edges)
        binned[:, c] = np.searchsorted(edges, col, side="right")
    return binned, edges_per_col


def _grow_tree(
    tree: _Tree,
    binned: np.ndarray,
    resid: np.ndarray,
    rows: np.ndarray,
    depth: int,
    edges_per_col: list[np.ndarray],
    n_edges: np.ndarray,
    col_offsets: np.ndarray,
) -> int:
    node_sum = resid[rows].sum()
    node_n = rows.size
    if depth == 0 or node_n < 2:
        return tree.add_leaf(node_sum / node_n)

    p = binned.shape[1]
    flat = (binned[rows] + col_offsets[None, :]).ravel()
    counts = np.bincount(flat, minlength=p * MAX_HIST_BINS).reshape(p, MAX_HIST_BINS)
    sums = np.bincount(
        flat, weights=np.repeat(resid[rows], p), minlength=p * MAX_HIST_BINS
    ).reshape(p, MAX_HIST_BINS)

    cum_n = np.cumsum(counts, axis=1)
    cum_s = np.cumsum(sums, axis=1)
    n_l = cum_n
    s_l = cum_s
    n_r = node_n - n_l
    s_r = node_sum - s_l
    valid = (np.arange(MAX_HIST_BINS)[None, :] < n_edges[:, None]) & (n_l > 0) & (n_r > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        gain = np.where(
            valid,
            s_l**2 / n_l + s_r**2 / n_r - node_sum**2 / node_n,
            -np.inf,
        )
    best = int(np.argmax(gain))
    c, e = divmod(best, MAX_HIST_BINS)
    if not np.isfinite(gain[c, e]) or gain[c, e] <= MIN_GAIN:
        return tree.add_leaf(node_sum / node_n)

    threshold = float(edges_per_col[c][e])
    node = tree.add_split(c, threshold)
    go_left = binned[rows, c] <= e
    left_rows = rows[go_left]
    right_rows = rows[~go_left]
    tree.left[node] = _grow_tree(
        tree, binned, resid, left_rows, depth - 1, edges_per_col, n_edges, col_offsets
    )
    tree.right[node] = _grow_tree(
        tree, binned, resid, right_rows, depth - 1, edges_per_col, n_edges, col_offsets
    )
    return node


def fit_tree_ensemble(
    dataset: Dataset,
    pipeline: PreprocessPipeline,
    trees: int = 100,
    max_depth: int = 4,
    learning_rate: float = 0.1,
    bag_fraction: float = 1.0,
    seed: int = 0,
) -> TreeEnsemble:
    """Deterministic boosted-tree fit on the encoded design."""
    if not isinstance(trees, int) or trees < 1:
        raise InvalidParams(f"trees must be a positive integer, got {trees!r}")
    if not isinstance(max_depth, int) or max_depth < 0:
        raise InvalidParams(f"max_depth must be a non-negative integer, got {max_depth!r}")
    if not 0.0 < learning_rate <= 1.0:
        raise InvalidParams(f"learning_rate must be in (0, 1], got {learning_rate!r}")
    if not 0.0 < bag_fraction <= 1.0:
        raise InvalidParams(f"bag_fraction must be in (0, 1], got {bag_fraction!r}")
    if not isinstance(seed, int) or seed < 0:
        raise InvalidParams(f"seed must be a non-negative integer, got {seed!r}")

    X = pipeline.encode(dataset.matrix)
    y = dataset.income
    n, p = X.shape
    binned, edges_per_col = _bin_columns(X)
    n_edges = np.asarray([len(e) for e in edges_per_col], dtype=np.int64)
    col_offsets = np.arange(p, dtype=np.int64) * MAX_HIST_BINS

    base = float(y.mean())
    pred = np.full(n, base)
    bag_size = max(1, int(round(bag_fraction * n)))
    fitted: list[dict] = []
    for t in range(trees):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(t,)))
        rows = np.sort(rng.permutation(n)[:bag_size]) if bag_size < n else np.arange(n)
        resid = y - pred
        tree = _Tree()
        _grow_tree(tree, binned, resid, rows, max_depth, edges_per_col, n_edges, col_offsets)
        frozen = tree.freeze()
        fitted.append(frozen)
        pred += learning_rate * _predict_tree(frozen, X)

    model_id = fingerprint_params(
        "gbt",
        {
            "trees": trees,
            "max_depth": max_depth,
            "learning_rate": learning_rate,
            "bag_fraction": bag_fraction,
            "seed": seed,
            "trained_on": dataset.content_hash,
        },
    )
    return TreeEnsemble(base=base, learning_rate=learning_rate, trees=fitted, model_id=model_id)
