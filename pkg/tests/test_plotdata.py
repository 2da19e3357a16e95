"""Histogram and radar payloads."""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from perturbex.dataset import build_dataset
from perturbex.engine import contrastive_importances
from perturbex.errors import FingerprintMismatch, InvalidParams, PartitionError
from perturbex.groups import build_contrastive_distribution, groups_from_schema
from perturbex.models.linear import fit_linear
from perturbex.models.pipeline import fit_pipeline
from perturbex.plotdata import histogram_payload, radar_payload
from perturbex.report import build_report
from perturbex.schema import PovertyConfig

from conftest import toy_dataset, toy_schema

SCHEMA_DIR = Path(__file__).resolve().parents[1] / "src" / "perturbex" / "schemas"
FP = "0" * 64


def _uniform_dataset():
    schema = toy_schema(("numeric",))
    incomes = [float(i) + 0.5 for i in range(100)]  # 0.5 .. 99.5
    return build_dataset(schema, {"f0": [1.0] * 100}, income=incomes)


def test_uniform_incomes_fill_bins_evenly():
    ds = _uniform_dataset()
    payload = histogram_payload(ds, FP, bins=10)
    assert payload["n"] == 100
    assert payload["counts"] == [10] * 10
    assert len(payload["bin_edges"]) == 11
    assert payload["bin_edges"][0] == 0.5 and payload["bin_edges"][-1] == 99.5
    assert payload["focal"] is None
    jsonschema.validate(
        payload, json.loads((SCHEMA_DIR / "histogram.schema.json").read_text())
    )


def test_focal_markers_and_clipping():
    ds = _uniform_dataset()
    payload = histogram_payload(
        ds, FP, bins=10, focal_id="H9", predicted_income=42.0,
        observed_formal_income=-50.0,
    )
    focal = payload["focal"]
    assert focal["household_id"] == "H9"
    assert focal["predicted_bin"] == 4
    # markers outside the income range clip to the edge bins
    assert focal["observed_bin"] == 0
    above = histogram_payload(ds, FP, bins=10, focal_id="H9", predicted_income=1e9)
    assert above["focal"]["predicted_bin"] == 9
    no_ofi = histogram_payload(ds, FP, bins=10, focal_id="H9", predicted_income=42.0)
    assert no_ofi["focal"]["observed_formal_income"] is None
    assert no_ofi["focal"]["observed_bin"] is None


def test_counts_always_sum_to_n():
    rng = np.random.default_rng(3)
    ds = toy_dataset(rng, ("numeric", "boolean"), n=57)
    payload = histogram_payload(ds, FP, bins=13)
    assert sum(payload["counts"]) == ds.n == 57


def _contrastive_setup():
    rng = np.random.default_rng(23)
    ds = toy_dataset(rng, ("numeric", "categorical", "boolean"), n=40, with_rule=True)
    pipe = fit_pipeline(ds)
    model = fit_linear(ds, pipe)
    config = PovertyConfig(10.0, 1)
    groups = groups_from_schema(ds.schema)
    dist = build_contrastive_distribution(ds, model, pipe, ds.schema.rules, config, seed=1)
    poor = int(np.flatnonzero(ds.income < 10.0)[0])
    focal = ds.household(poor)
    vec = contrastive_importances(ds, model, pipe, focal, ds.schema.rules, config, seed=1)
    report = build_report(
        ds.schema, focal, vec, groups, fingerprint=vec.fingerprint, seed=1, dist=dist
    )
    return report.to_doc(), dist


def test_radar_axes_from_report_doc():
    doc, dist = _contrastive_setup()
    payload = radar_payload(doc, dist)
    assert payload["household_id"] == doc["household_id"]
    assert [a["group"] for a in payload["axes"]] == ["g0", "g1"]
    for k, axis in enumerate(payload["axes"]):
        assert 0.0 <= axis["percentile"] <= 100.0
        assert axis["value"] == doc["group_importances"][k]["value"]
        assert axis["contrast_median"] == float(np.median(dist.rows[:, k]))
    assert payload["fingerprint"] == dist.fingerprint
    jsonschema.validate(
        payload, json.loads((SCHEMA_DIR / "radar.schema.json").read_text())
    )


def test_radar_requires_percentiles():
    doc, dist = _contrastive_setup()
    doc["percentiles"] = None
    with pytest.raises(InvalidParams, match="percentile"):
        radar_payload(doc, dist)


def test_radar_fingerprint_guard():
    doc, dist = _contrastive_setup()
    doc["fingerprint"] = "different"
    with pytest.raises(FingerprintMismatch):
        radar_payload(doc, dist)


def test_radar_missing_group_guard():
    doc, dist = _contrastive_setup()
    doc["group_importances"].append({"group": "ghost", "label": "?", "value": 0.0})
    with pytest.raises(PartitionError, match="ghost"):
        radar_payload(doc, dist)
