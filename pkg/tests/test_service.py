"""HTTP service behaviour: routing, status codes, and CLI byte parity."""

from __future__ import annotations

import json
from dataclasses import replace
from types import SimpleNamespace

import pytest
from fastapi.testclient import TestClient

from perturbex.cli import main
from perturbex.errors import FingerprintMismatch
from perturbex.service import ServiceConfig, create_app


@pytest.fixture(scope="module")
def svc(tmp_path_factory):
    """One small survey, a linear model, CLI artifacts, and a running app."""
    root = tmp_path_factory.mktemp("svc")
    assert main(["synth", "--profile", "small", "--seed", "0", "--out", str(root)]) == 0
    assert main(
        [
            "train",
            "--data", str(root / "households.csv"),
            "--schema", str(root / "schema.json"),
            "--model", str(root / "model.json"),
            "--kind", "linear",
        ]
    ) == 0
    ids = json.loads((root / "focals.json").read_text())["household_ids"]
    out = root / "artifacts"
    assert main(
        [
            "explain",
            "--data", str(root / "households.csv"),
            "--schema", str(root / "schema.json"),
            "--model", str(root / "model.json"),
            "--household", ids[0],
            "--algorithm", "contrastive",
            "--build-dist",
            "--out", str(out),
        ]
    ) == 0
    assert main(
        [
            "plotdata",
            "--data", str(root / "households.csv"),
            "--schema", str(root / "schema.json"),
            "--household", ids[0],
            "--out", str(out),
        ]
    ) == 0
    cfg = ServiceConfig(
        data_path=str(root / "households.csv"),
        schema_path=str(root / "schema.json"),
        model_path=str(root / "model.json"),
        dist_path=str(out / "distribution.json"),
    )
    app = create_app(cfg)
    return SimpleNamespace(
        root=root, out=out, ids=ids, cfg=cfg, app=app, client=TestClient(app)
    )


@pytest.fixture(scope="module")
def nodist_client(svc):
    app = create_app(replace(svc.cfg, dist_path=None))
    return TestClient(app)


def test_households_listing_is_sorted_and_complete(svc):
    r = svc.client.get("/v1/households", params={"offset": 0, "limit": 200})
    assert r.status_code == 200
    body = r.json()
    assert body["total"] == 160
    rows = body["households"]
    assert len(rows) == 160
    assert [h["id"] for h in rows] == sorted(h["id"] for h in rows)
    keys = {
        "id", "predicted_income", "observed_formal_income",
        "collection_date", "missing_count",
    }
    assert set(rows[0]) == keys


def test_households_pagination(svc):
    full = svc.client.get("/v1/households", params={"limit": 200}).json()["households"]
    page = svc.client.get("/v1/households", params={"offset": 5, "limit": 3}).json()
    assert page["households"] == full[5:8]
    assert page["offset"] == 5 and page["limit"] == 3

    empty = svc.client.get("/v1/households", params={"limit": 0}).json()
    assert empty["households"] == [] and empty["total"] == 160

    beyond = svc.client.get("/v1/households", params={"offset": 9999, "limit": 10})
    assert beyond.json()["households"] == []


@pytest.mark.parametrize(
    "params",
    [{"frobnicate": "1"}, {"offset": "-1"}, {"limit": "abc"}],
    ids=["unknown-key", "negative", "non-integer"],
)
def test_households_bad_query(svc, params):
    r = svc.client.get("/v1/households", params=params)
    assert r.status_code == 400
    assert r.json()["code"] == "BAD_QUERY"


def test_explain_bytes_match_cli_report(svc):
    hid = svc.ids[0]
    r = svc.client.post(
        "/v1/explain", json={"household_id": hid, "algorithm": "contrastive"}
    )
    assert r.status_code == 200
    assert r.headers["content-type"] == "application/json"
    assert r.content == (svc.out / f"report_{hid}.json").read_bytes()
    doc = r.json()
    assert doc["percentiles"] is not None


def test_explain_is_idempotent(svc):
    hid = svc.ids[0]
    body = {"household_id": hid, "algorithm": "contrastive"}
    first = svc.client.post("/v1/explain", json=body).content
    second = svc.client.post("/v1/explain", json=body).content
    # an explicit seed equal to the service default resolves to the same work
    third = svc.client.post("/v1/explain", json={**body, "seed": 0}).content
    assert first == second == third


def test_explain_short_and_long_tokens_agree(svc):
    hid = svc.ids[1]
    a = svc.client.post("/v1/explain", json={"household_id": hid, "algorithm": "uni"})
    b = svc.client.post(
        "/v1/explain", json={"household_id": hid, "algorithm": "univariate"}
    )
    assert a.status_code == b.status_code == 200
    assert a.content == b.content


def test_explain_unknown_household(svc):
    r = svc.client.post(
        "/v1/explain", json={"household_id": "ZZ999", "algorithm": "uni"}
    )
    assert r.status_code == 404
    body = r.json()
    assert body["code"] == "UNKNOWN_HOUSEHOLD"
    assert "ZZ999" in body["message"]


def test_explain_unknown_algorithm(svc):
    r = svc.client.post(
        "/v1/explain", json={"household_id": svc.ids[0], "algorithm": "shapley"}
    )
    assert r.status_code == 422
    body = r.json()
    assert body["code"] == "BAD_ALGORITHM"
    assert "shapley" in body["message"]


@pytest.mark.parametrize(
    "payload",
    [
        {},
        {"household_id": "H", "bogus": 1},
        {"household_id": "H", "seed": -3},
        {"household_id": ["H"]},
    ],
    ids=["missing-id", "extra-field", "negative-seed", "wrong-type"],
)
def test_explain_request_validation(svc, payload):
    r = svc.client.post("/v1/explain", json=payload)
    assert r.status_code == 422
    body = r.json()
    assert body["code"] == "VALIDATION"
    assert isinstance(body["detail"], list) and body["detail"]


def test_explain_budget_exhausted(svc):
    app = create_app(replace(svc.cfg, dist_path=None, budget=5))
    client = TestClient(app)
    r = client.post(
        "/v1/explain", json={"household_id": svc.ids[0], "algorithm": "biv"}
    )
    assert r.status_code == 422
    body = r.json()
    assert body["code"] == "BUDGET"
    assert body["detail"]["planned"] > body["detail"]["budget"] == 5


def test_stale_seed_conflicts_only_for_contrastive(svc):
    hid = svc.ids[1]
    r = svc.client.post(
        "/v1/explain",
        json={"household_id": hid, "algorithm": "contrastive", "seed": 7},
    )
    assert r.status_code == 409
    body = r.json()
    assert body["code"] == "FINGERPRINT_MISMATCH"
    assert body["detail"]["expected"] != body["detail"]["found"]

    # the same seed is fine for algorithms that never touch the cache
    r = svc.client.post(
        "/v1/explain", json={"household_id": hid, "algorithm": "uni", "seed": 7}
    )
    assert r.status_code == 200


def test_contrastive_without_cache_has_no_percentiles(svc, nodist_client):
    r = nodist_client.post(
        "/v1/explain", json={"household_id": svc.ids[2], "algorithm": "contrastive"}
    )
    assert r.status_code == 200
    assert r.json()["percentiles"] is None


def test_saturated_workers_return_429(svc):
    state = svc.app.state.explainer
    held = 0
    try:
        while state._sem.acquire(blocking=False):
            held += 1
        assert held == svc.cfg.workers
        fresh = {"household_id": svc.ids[3], "algorithm": "uni", "seed": 11}
        r = svc.client.post("/v1/explain", json=fresh)
        assert r.status_code == 429
        assert r.json()["code"] == "SATURATED"
        # cached responses bypass the worker pool entirely
        cached = {"household_id": svc.ids[0], "algorithm": "contrastive"}
        assert svc.client.post("/v1/explain", json=cached).status_code == 200
    finally:
        for _ in range(held):
            state._sem.release()
    assert svc.client.post("/v1/explain", json=fresh).status_code == 200


def test_income_distribution_without_focal(svc):
    r = svc.client.get("/v1/income-distribution")
    assert r.status_code == 200
    body = r.json()
    assert sum(body["counts"]) == 160
    assert body["focal"] is None


def test_income_distribution_bytes_match_cli(svc):
    hid = svc.ids[0]
    r = svc.client.get("/v1/income-distribution", params={"household": hid})
    assert r.status_code == 200
    assert r.content == (svc.out / f"histogram_{hid}.json").read_bytes()


def test_income_distribution_unknown_household(svc):
    r = svc.client.get("/v1/income-distribution", params={"household": "ZZ999"})
    assert r.status_code == 404
    assert r.json()["code"] == "UNKNOWN_HOUSEHOLD"


def test_income_distribution_bad_query(svc):
    r = svc.client.get("/v1/income-distribution", params={"bins": 5})
    assert r.status_code == 400
    assert r.json()["code"] == "BAD_QUERY"


def test_radar_bytes_match_cli(svc):
    hid = svc.ids[0]
    r = svc.client.get(f"/v1/radar/{hid}")
    assert r.status_code == 200
    assert r.content == (svc.out / f"radar_{hid}.json").read_bytes()


def test_radar_unknown_household(svc):
    r = svc.client.get("/v1/radar/ZZ999")
    assert r.status_code == 404
    assert r.json()["code"] == "UNKNOWN_HOUSEHOLD"


def test_radar_without_distribution(svc, nodist_client):
    r = nodist_client.get(f"/v1/radar/{svc.ids[0]}")
    assert r.status_code == 409
    assert r.json()["code"] == "NO_DISTRIBUTION"


def test_startup_refuses_stale_distribution(svc):
    # a different service seed changes the fingerprint the cache must match
    with pytest.raises(FingerprintMismatch):
        create_app(replace(svc.cfg, seed=99))


def test_unknown_path_has_error_shape(svc):
    r = svc.client.get("/v1/nope")
    assert r.status_code == 404
    assert r.json()["code"] == "HTTP_404"
