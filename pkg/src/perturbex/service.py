"""HTTP facade over the engine for the caseworker UI.

Read-only by construction: endpoints serve the dataset, model predictions,
explanation reports and plot payloads, and never mutate the loaded
artifacts. Report bytes are produced by the same serializer as the CLI, so a
report for one (household, seed, fingerprint) is byte-identical across both
fronts and across repeated requests (idempotency cache).
"""

from __future__ import annotations

import json
import threading
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel, ConfigDict, Field
from starlette.exceptions import HTTPException as StarletteHTTPException

from .dataset import Dataset, load_dataset
from .engine import (
    ALG_BIVARIATE,
    ALG_CONDITIONAL,
    ALG_CONTRASTIVE,
    ALG_UNIVARIATE,
    DEFAULT_BUDGET,
    bivariate_importances,
    conditional_univariate_importances,
    contrastive_importances,
    univariate_importances,
)
from .errors import (
    BudgetExceeded,
    ContrastiveSetTooSmall,
    FingerprintMismatch,
    InvalidParams,
    PerturbexError,
)
from .fingerprint import config_fingerprint
from .groups import groups_from_schema, load_distribution
from .models import load_model
from .plotdata import DEFAULT_HIST_BINS, histogram_payload, radar_payload
from .report import build_report, dumps_payload, dumps_report
from .schema import PovertyConfig
from .values import DEFAULT_MAX_BINS

API_PREFIX = "/v1"
IDEMPOTENCY_CAPACITY = 1024
DEFAULT_PAGE_LIMIT = 50

ALGORITHM_TOKENS = {
    "uni": ALG_UNIVARIATE,
    "univariate": ALG_UNIVARIATE,
    "cond": ALG_CONDITIONAL,
    "conditional": ALG_CONDITIONAL,
    "biv": ALG_BIVARIATE,
    "bivariate": ALG_BIVARIATE,
    "contrastive": ALG_CONTRASTIVE,
}


@dataclass(frozen=True)
class ServiceConfig:
    data_path: str
    schema_path: str
    model_path: str
    dist_path: str | None = None
    budget: int = DEFAULT_BUDGET
    workers: int = 2
    seed: int = 0
    bins: int = DEFAULT_MAX_BINS
    resamples: int = 1
    hist_bins: int = DEFAULT_HIST_BINS
    poverty_line: float | None = None


class ExplainRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    household_id: str
    algorithm: str | None = None
    seed: int | None = Field(default=None, ge=0)


def _err(status: int, code: str, message: str, detail=None) -> JSONResponse:
    body = {"code": code, "message": message}
    if detail is not None:
        body["detail"] = detail
    return JSONResponse(body, status_code=status)


def _json_bytes(text: str) -> Response:
    return Response(content=text.encode("utf-8"), media_type="application/json")


class _Explainer:
    """Shared read-only state plus the bounded, cached explain path."""

    def __init__(self, cfg: ServiceConfig):
        self.cfg = cfg
        self.dataset: Dataset = load_dataset(cfg.data_path, cfg.schema_path)
        self.model, self.pipeline = load_model(cfg.model_path, self.dataset)
        self.groups = groups_from_schema(self.dataset.schema)
        base = self.dataset.schema.poverty
        self.poverty = (
            base
            if cfg.poverty_line is None
            else PovertyConfig(cfg.poverty_line, base.min_contrastive_rows)
        )
        self.fingerprint = config_fingerprint(
            self.dataset.content_hash, self.model.model_id, cfg.bins, cfg.seed,
            cfg.resamples, self.poverty.poverty_line,
        )
        self.dist = None
        if cfg.dist_path is not None and Path(cfg.dist_path).exists():
            dist = load_distribution(cfg.dist_path)
            # all served artifacts must agree on one configuration
            if dist.fingerprint != self.fingerprint:
                raise FingerprintMismatch(expected=self.fingerprint, found=dist.fingerprint)
            self.dist = dist

        self._sem = threading.Semaphore(cfg.workers)
        self._cache: OrderedDict[tuple, bytes] = OrderedDict()
        self._cache_lock = threading.Lock()
        self.households = self._household_index()

    def _household_index(self) -> list[dict]:
        ds = self.dataset
        pred = self.model.predict_encoded(self.pipeline.encode(ds.matrix))
        missing = np.zeros(ds.n, dtype=int)
        for col in ds.columns:
            missing += col.missing
        rows = []
        for i in range(ds.n):
            ofi = ds.observed_formal_income[i]
            rows.append(
                {
                    "id": ds.ids[i],
                    "predicted_income": float(pred[i]),
                    "observed_formal_income": None if np.isnan(ofi) else float(ofi),
                    "collection_date": ds.collection_dates[i],
                    "missing_count": int(missing[i]),
                }
            )
        rows.sort(key=lambda r: r["id"])
        return rows

    def focal_prediction(self, row: int) -> float:
        # single-row path, same as the engine's focal prediction, so the
        # histogram marker matches report bytes exactly
        codes = self.dataset.matrix[row][None, :]
        return float(self.model.predict_encoded(self.pipeline.encode(codes))[0])

    def _cache_get(self, key: tuple) -> bytes | None:
        with self._cache_lock:
            body = self._cache.get(key)
            if body is not None:
                self._cache.move_to_end(key)
            return body

    def _cache_put(self, key: tuple, body: bytes) -> None:
        with self._cache_lock:
            self._cache[key] = body
            self._cache.move_to_end(key)
            while len(self._cache) > IDEMPOTENCY_CAPACITY:
                self._cache.popitem(last=False)

    def explain(self, household_id: str, algorithm: str, seed: int) -> bytes | JSONResponse:
        cfg = self.cfg
        fingerprint = config_fingerprint(
            self.dataset.content_hash, self.model.model_id, cfg.bins, seed,
            cfg.resamples, self.poverty.poverty_line,
        )
        key = (household_id, algorithm, seed, fingerprint)
        cached = self._cache_get(key)
        if cached is not None:
            return cached

        row = self.dataset.row_index_of(household_id)
        if row is None:
            return _err(404, "UNKNOWN_HOUSEHOLD", f"no household with id {household_id!r}")
        if algorithm == ALG_CONTRASTIVE and self.dist is not None:
            if fingerprint != self.dist.fingerprint:
                return _err(
                    409,
                    "FINGERPRINT_MISMATCH",
                    "request configuration does not match the distribution cache",
                    detail={"expected": self.dist.fingerprint, "found": fingerprint},
                )

        if not self._sem.acquire(blocking=False):
            return _err(429, "SATURATED", "all explanation workers are busy; retry shortly")
        try:
            focal = self.dataset.household(row)
            vector = self._run(algorithm, focal, seed)
            dist = self.dist if algorithm == ALG_CONTRASTIVE else None
            report = build_report(
                self.dataset.schema, focal, vector, self.groups, fingerprint, seed, dist=dist
            )
            body = dumps_report(report).encode("utf-8")
        except BudgetExceeded as exc:
            return _err(
                422, "BUDGET", str(exc), detail={"planned": exc.planned, "budget": exc.budget}
            )
        except ContrastiveSetTooSmall as exc:
            return _err(
                422, "CONTRASTIVE_SET", str(exc),
                detail={"found": exc.found, "required": exc.required},
            )
        finally:
            self._sem.release()
        self._cache_put(key, body)
        return body

    def _run(self, algorithm: str, focal, seed: int):
        ds, model, pipe, cfg = self.dataset, self.model, self.pipeline, self.cfg
        if algorithm == ALG_UNIVARIATE:
            return univariate_importances(ds, model, pipe, focal, cfg.bins, budget=cfg.budget)
        if algorithm == ALG_CONDITIONAL:
            return conditional_univariate_importances(
                ds, model, pipe, focal,
                max_bins=cfg.bins, seed=seed, resamples=cfg.resamples, budget=cfg.budget,
            )
        if algorithm == ALG_BIVARIATE:
            return bivariate_importances(
                ds, model, pipe, focal,
                max_bins=cfg.bins, seed=seed, resamples=cfg.resamples, budget=cfg.budget,
            )
        return contrastive_importances(
            ds, model, pipe, focal, config=self.poverty,
            max_bins=cfg.bins, seed=seed, resamples=cfg.resamples, budget=cfg.budget,
        )


def _query_guard(request: Request, allowed: set[str]) -> JSONResponse | None:
    for key in request.query_params:
        if key not in allowed:
            return _err(400, "BAD_QUERY", f"unknown query key {key!r}")
    return None


def create_app(cfg: ServiceConfig) -> FastAPI:
    state = _Explainer(cfg)
    app = FastAPI(title="perturbex service", openapi_url=None)
    app.state.explainer = state

    @app.exception_handler(RequestValidationError)
    async def on_validation(request: Request, exc: RequestValidationError):
        return _err(422, "VALIDATION", "request body failed validation", detail=exc.errors())

    @app.exception_handler(StarletteHTTPException)
    async def on_http(request: Request, exc: StarletteHTTPException):
        return _err(exc.status_code, f"HTTP_{exc.status_code}", str(exc.detail))

    @app.exception_handler(PerturbexError)
    async def on_domain(request: Request, exc: PerturbexError):
        return _err(500, "INTERNAL", str(exc))

    @app.get(API_PREFIX + "/households")
    def households(request: Request):
        bad = _query_guard(request, {"offset", "limit"})
        if bad is not None:
            return bad
        try:
            offset = int(request.query_params.get("offset", 0))
            limit = int(request.query_params.get("limit", DEFAULT_PAGE_LIMIT))
        except ValueError:
            return _err(400, "BAD_QUERY", "offset and limit must be integers")
        if offset < 0 or limit < 0:
            return _err(400, "BAD_QUERY", "offset and limit must be non-negative")
        page = state.households[offset : offset + limit]
        return {"total": len(state.households), "offset": offset, "limit": limit,
                "households": page}

    @app.post(API_PREFIX + "/explain")
    def explain(req: ExplainRequest):
        token = req.algorithm if req.algorithm is not None else "contrastive"
        algorithm = ALGORITHM_TOKENS.get(token)
        if algorithm is None:
            return _err(
                422, "BAD_ALGORITHM",
                f"unknown algorithm {token!r}; choose from {sorted(set(ALGORITHM_TOKENS))}",
            )
        seed = req.seed if req.seed is not None else cfg.seed
        out = state.explain(req.household_id, algorithm, seed)
        if isinstance(out, JSONResponse):
            return out
        return _json_bytes(out.decode("utf-8"))

    @app.get(API_PREFIX + "/income-distribution")
    def income_distribution(request: Request):
        bad = _query_guard(request, {"household"})
        if bad is not None:
            return bad
        household_id = request.query_params.get("household")
        if household_id is None:
            payload = histogram_payload(state.dataset, state.fingerprint, bins=cfg.hist_bins)
        else:
            row = state.dataset.row_index_of(household_id)
            if row is None:
                return _err(404, "UNKNOWN_HOUSEHOLD", f"no household with id {household_id!r}")
            ofi = state.dataset.observed_formal_income[row]
            payload = histogram_payload(
                state.dataset,
                state.fingerprint,
                bins=cfg.hist_bins,
                focal_id=household_id,
                predicted_income=state.focal_prediction(row),
                observed_formal_income=None if np.isnan(ofi) else float(ofi),
            )
        return _json_bytes(dumps_payload(payload))

    @app.get(API_PREFIX + "/radar/{household_id}")
    def radar(household_id: str):
        if state.dist is None:
            return _err(
                409, "NO_DISTRIBUTION",
                "the service has no contrastive distribution cache; radar needs one",
            )
        out = state.explain(household_id, ALG_CONTRASTIVE, cfg.seed)
        if isinstance(out, JSONResponse):
            return out
        doc = json.loads(out.decode("utf-8"))
        try:
            payload = radar_payload(doc, state.dist)
        except (FingerprintMismatch, InvalidParams) as exc:
            return _err(409, "FINGERPRINT_MISMATCH", str(exc))
        return _json_bytes(dumps_payload(payload))

    return app
