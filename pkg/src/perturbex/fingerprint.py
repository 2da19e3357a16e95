"""Config fingerprint shared by reports, caches and the service."""

from __future__ import annotations

import hashlib
import json


def config_fingerprint(
    dataset_hash: str,
    model_id: str,
    max_bins: int,
    seed: int | None,
    resamples: int | None,
    poverty_line: float | None,
) -> str:
    """Digest of everything that determines an explanation's numbers."""
    doc = {
        "dataset": dataset_hash,
        "model": model_id,
        "bins": max_bins,
        "seed": seed,
        "resamples": resamples,
        "poverty_line": poverty_line,
    }
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
