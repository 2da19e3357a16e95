"""Plot payload builders shared by the CLI and the HTTP service.

Both fronts serialize these dicts with the same canonical writer, so a
payload for the same fingerprint is byte-identical regardless of where it
was produced.
"""

from __future__ import annotations

import numpy as np

from .dataset import Dataset
from .errors import FingerprintMismatch, InvalidParams, PartitionError
from .groups import ContrastiveDistribution

PAYLOAD_VERSION = 1
DEFAULT_HIST_BINS = 20


def _bin_index(edges: np.ndarray, value: float) -> int:
    """Histogram bin holding value; clipped to the outermost bins."""
    idx = int(np.searchsorted(edges, value, side="right")) - 1
    return max(0, min(idx, len(edges) - 2))


def histogram_payload(
    dataset: Dataset,
    fingerprint: str,
    bins: int = DEFAULT_HIST_BINS,
    focal_id: str | None = None,
    predicted_income: float | None = None,
    observed_formal_income: float | None = None,
) -> dict:
    """Income histogram over the full dataset, with optional focal markers."""
    counts, edges = np.histogram(dataset.income, bins=bins)
    focal = None
    if focal_id is not None and predicted_income is not None:
        focal = {
            "household_id": focal_id,
            "predicted_income": float(predicted_income),
            "predicted_bin": _bin_index(edges, predicted_income),
            "observed_formal_income": None
            if observed_formal_income is None
            else float(observed_formal_income),
            "observed_bin": None
            if observed_formal_income is None
            else _bin_index(edges, observed_formal_income),
        }
    return {
        "payload_version": PAYLOAD_VERSION,
        "n": dataset.n,
        "bin_edges": [float(e) for e in edges],
        "counts": [int(c) for c in counts],
        "focal": focal,
        "fingerprint": fingerprint,
    }


def radar_payload(report_doc: dict, dist: ContrastiveDistribution) -> dict:
    """Per-group axes: focal group importance, its percentile, contrast median.

    Takes the serialized report document, so a report loaded from disk and one
    fresh out of the engine produce identical payloads.
    """
    if report_doc.get("percentiles") is None:
        raise InvalidParams(
            "report carries no percentiles; explain with the contrastive "
            "algorithm and a distribution cache first"
        )
    if report_doc["fingerprint"] != dist.fingerprint:
        raise FingerprintMismatch(expected=dist.fingerprint, found=report_doc["fingerprint"])
    pct = {e["group"]: float(e["value"]) for e in report_doc["percentiles"]}
    medians = {
        gid: float(m)
        for gid, m in zip(dist.group_ids, np.median(dist.sorted_columns, axis=0))
    }
    axes = []
    for entry in report_doc["group_importances"]:
        gid = entry["group"]
        if gid not in medians or gid not in pct:
            raise PartitionError(f"group {gid!r} is missing from the distribution cache")
        axes.append(
            {
                "group": gid,
                "label": entry["label"],
                "value": float(entry["value"]),
                "percentile": pct[gid],
                "contrast_median": medians[gid],
            }
        )
    return {
        "payload_version": PAYLOAD_VERSION,
        "household_id": report_doc["household_id"],
        "axes": axes,
        "fingerprint": report_doc["fingerprint"],
    }
