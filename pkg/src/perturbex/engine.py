"""Perturbation feature importances: univariate, conditional, bivariate,
contrastive.

All four computations share one runner. The focal prediction is compared
with predictions for artificial instances built by substituting replacement
values for one feature (or an observed pair of values for two features),
then letting conditionality rules redraw dependent features. Sign
convention: delta = y_hat - y_perturbed, so a positive importance means the
focal's actual value raises its predicted income relative to the reference
distribution.

Determinism: every resample draw gets its own generator derived from the
master seed and the term's identity (j, k, value indices, repeat index), and
per-pair partial sums are combined in pair index order, so the result is
bit-identical for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, Household, filter_contrastive
from .errors import BudgetExceeded, EncodingError, InvalidParams
from .fingerprint import config_fingerprint
from .models.base import PredictorModel
from .models.pipeline import PreprocessPipeline
from .resample import ResampleContext, ResampleEvent, build_context, conditional_resample, derive_rng
from .schema import ConditionalityRule, PovertyConfig
from .values import DEFAULT_MAX_BINS, all_value_sets, joint_value_set

DEFAULT_BUDGET = 5_000_000
PREDICT_CHUNK = 4096

ALG_UNIVARIATE = "univariate"
ALG_CONDITIONAL = "conditional"
ALG_BIVARIATE = "bivariate"
ALG_CONTRASTIVE = "contrastive"
ALGORITHMS = (ALG_UNIVARIATE, ALG_CONDITIONAL, ALG_BIVARIATE, ALG_CONTRASTIVE)


@dataclass(frozen=True)
class PerturbationRecord:
    """One weighted term of the importance sum."""

    features: tuple[int, ...]
    values: tuple[float, ...]
    delta: float
    weight: float


@dataclass(frozen=True)
class WarningRecord:
    """Aggregated resample fallback: how often a draw left its rule's cell."""

    code: str
    feature: str
    rule: int
    cell: str | None
    count: int


@dataclass(frozen=True)
class ImportanceVector:
    values: np.ndarray  # (d,)
    focal_id: str | None
    algorithm: str
    fingerprint: str
    predicted_income: float
    warnings: tuple[WarningRecord, ...]
    evaluations: int
    resamples: int
    fallbacks: int

    @property
    def d(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class PairTerms:
    """Replacement terms for one unordered pair (j == k: the diagonal)."""

    j: int
    k: int
    vj_idx: np.ndarray  # value-set index per term
    vk_idx: np.ndarray
    vj: np.ndarray  # replacement codes per term
    vk: np.ndarray
    weights: np.ndarray

    @property
    def n_terms(self) -> int:
        return len(self.weights)


def build_structure(ref: Dataset, max_bins: int, diagonal_only: bool) -> list[PairTerms]:
    """Value sets and per-pair term lists; independent of the focal."""
    vsets = all_value_sets(ref, max_bins)
    out: list[PairTerms] = []
    for j in range(ref.d):
        for k in range(j, ref.d):
            if diagonal_only and k != j:
                continue
            if k == j:
                vs = vsets[j]
                idx = np.arange(vs.size, dtype=np.int64)
                out.append(
                    PairTerms(j=j, k=j, vj_idx=idx, vk_idx=idx, vj=vs.codes, vk=vs.codes, weights=vs.weights)
                )
            else:
                jvs = joint_value_set(vsets[j], vsets[k], ref.columns[j], ref.columns[k])
                out.append(
                    PairTerms(
                        j=j,
                        k=k,
                        vj_idx=jvs.left_idx,
                        vk_idx=jvs.right_idx,
                        vj=vsets[j].codes[jvs.left_idx],
                        vk=vsets[k].codes[jvs.right_idx],
                        weights=jvs.weights,
                    )
                )
    return out


def _changed_masks(pt: PairTerms, focal: Household) -> tuple[np.ndarray, np.ndarray]:
    # NaN focal values compare unequal to every replacement, which is right:
    # substituting a value for a missing cell is a real change
    changed_j = pt.vj != focal.codes[pt.j]
    changed_k = pt.vk != focal.codes[pt.k] if pt.k != pt.j else changed_j
    return changed_j, changed_k


def planned_evaluations(
    structure: list[PairTerms], ctx: ResampleContext, focal: Household, resamples: int
) -> int:
    """Exact model-call count the runner will make, before making any."""
    total = 0
    for pt in structure:
        j_driver = pt.j in ctx.rules_by_driver
        k_driver = pt.k in ctx.rules_by_driver
        if not j_driver and not k_driver:
            total += pt.n_terms
            continue
        changed_j, changed_k = _changed_masks(pt, focal)
        trig = np.zeros(pt.n_terms, dtype=bool)
        if j_driver:
            trig |= changed_j
        if pt.k != pt.j and k_driver:
            trig |= changed_k
        total += pt.n_terms + (resamples - 1) * int(trig.sum())
    return total


@dataclass
class _Task:
    pt: PairTerms
    rule_hits: list[tuple[int, ...]]  # triggered rule ids per term
    evals: int


def _plan_tasks(
    structure: list[PairTerms], ctx: ResampleContext, focal: Household, resamples: int
) -> list[_Task]:
    tasks: list[_Task] = []
    for pt in structure:
        j_driver = pt.j in ctx.rules_by_driver
        k_driver = pt.k in ctx.rules_by_driver
        if not j_driver and not k_driver:
            tasks.append(_Task(pt=pt, rule_hits=[()] * pt.n_terms, evals=pt.n_terms))
            continue
        changed_j, changed_k = _changed_masks(pt, focal)
        rule_hits: list[tuple[int, ...]] = []
        evals = 0
        for t in range(pt.n_terms):
            changed = []
            if changed_j[t]:
                changed.append(pt.j)
            if pt.k != pt.j and changed_k[t]:
                changed.append(pt.k)
            hits = ctx.triggered(changed) if changed else ()
            rule_hits.append(hits)
            evals += resamples if hits else 1
        tasks.append(_Task(pt=pt, rule_hits=rule_hits, evals=evals))
    return tasks


def _predict_rows(
    model: PredictorModel, pipeline: PreprocessPipeline, rows: np.ndarray
) -> np.ndarray:
    outs = []
    for lo in range(0, len(rows), PREDICT_CHUNK):
        outs.append(model.predict_encoded(pipeline.encode(rows[lo : lo + PREDICT_CHUNK])))
    y = np.concatenate(outs) if len(outs) > 1 else outs[0]
    if not np.isfinite(y).all():
        raise EncodingError(f"model {model.model_id} produced a non-finite prediction")
    return y


@dataclass
class _TaskResult:
    total: float
    events: list[ResampleEvent]
    records: list[PerturbationRecord]
    fallbacks: int


def _run_task(
    task: _Task,
    ctx: ResampleContext,
    model: PredictorModel,
    pipeline: PreprocessPipeline,
    focal: Household,
    y_hat: float,
    seed: int,
    resamples: int,
    spawn_prefix: tuple[int, ...],
    collect_records: bool,
) -> _TaskResult:
    pt = task.pt
    n_terms = pt.n_terms
    rows = np.tile(focal.codes, (task.evals, 1))
    perturbed = (pt.j,) if pt.k == pt.j else (pt.j, pt.k)
    events: list[ResampleEvent] = []
    fallbacks = 0
    spans = np.empty(n_terms + 1, dtype=np.int64)
    spans[0] = 0
    pos = 0
    for t in range(n_terms):
        hits = task.rule_hits[t]
        reps = resamples if hits else 1
        rows[pos : pos + reps, pt.j] = pt.vj[t]
        if pt.k != pt.j:
            rows[pos : pos + reps, pt.k] = pt.vk[t]
        if hits:
            for r in range(reps):
                rng = derive_rng(
                    seed,
                    *spawn_prefix,
                    pt.j,
                    pt.k,
                    int(pt.vj_idx[t]),
                    int(pt.vk_idx[t]),
                    r,
                )
                drawn = conditional_resample(ctx, rows[pos + r], perturbed, rng, triggered=hits)
                events.extend(drawn)
                fallbacks += sum(1 for e in drawn if e.fallback is not None)
        pos += reps
        spans[t + 1] = pos

    y = _predict_rows(model, pipeline, rows)
    total = 0.0
    records: list[PerturbationRecord] = []
    for t in range(n_terms):
        lo, hi = spans[t], spans[t + 1]
        y_pert = float(y[lo]) if hi - lo == 1 else float(y[lo:hi].mean())
        delta = y_hat - y_pert
        total += float(pt.weights[t]) * delta
        if collect_records:
            if pt.k == pt.j:
                records.append(
                    PerturbationRecord(
                        features=(pt.j,),
                        values=(float(pt.vj[t]),),
                        delta=delta,
                        weight=float(pt.weights[t]),
                    )
                )
            else:
                records.append(
                    PerturbationRecord(
                        features=(pt.j, pt.k),
                        values=(float(pt.vj[t]), float(pt.vk[t])),
                        delta=delta,
                        weight=float(pt.weights[t]),
                    )
                )
    return _TaskResult(total=total, events=events, records=records, fallbacks=fallbacks)


def _run(
    ref: Dataset,
    model: PredictorModel,
    pipeline: PreprocessPipeline,
    focal: Household,
    *,
    algorithm: str,
    diagonal_only: bool,
    rules: tuple[ConditionalityRule, ...],
    max_bins: int,
    seed: int,
    resamples: int,
    poverty_line: float | None,
    workers: int,
    budget: int,
    spawn_prefix: tuple[int, ...],
    record_sink: list | None,
    event_sink: list | None,
    structure: list[PairTerms] | None = None,
    ctx: ResampleContext | None = None,
) -> ImportanceVector:
    if resamples < 1:
        raise InvalidParams(f"resamples must be >= 1, got {resamples}")
    if seed < 0:
        raise InvalidParams(f"seed must be non-negative, got {seed}")
    if len(focal.codes) != ref.d:
        raise EncodingError(f"focal has {len(focal.codes)} features, dataset has {ref.d}")

    if ctx is None:
        ctx = build_context(ref, rules)
    if structure is None:
        structure = build_structure(ref, max_bins, diagonal_only)
    tasks = _plan_tasks(structure, ctx, focal, resamples)
    planned = sum(t.evals for t in tasks)
    if planned > budget:
        raise BudgetExceeded(planned=planned, budget=budget)

    y_hat = float(_predict_rows(model, pipeline, focal.codes[None, :])[0])

    collect_records = record_sink is not None
    if workers <= 1:
        results = [
            _run_task(
                t, ctx, model, pipeline, focal, y_hat, seed, resamples, spawn_prefix, collect_records
            )
            for t in tasks
        ]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(
                    _run_task,
                    t,
                    ctx,
                    model,
                    pipeline,
                    focal,
                    y_hat,
                    seed,
                    resamples,
                    spawn_prefix,
                    collect_records,
                )
                for t in tasks
            ]
            results = [f.result() for f in futures]

    # deterministic reduction in pair index order
    values = np.zeros(ref.d)
    warn_counts: dict[tuple[str, int, str | None, int], int] = {}
    n_resamples = 0
    n_fallbacks = 0
    for task, res in zip(tasks, results):
        values[task.pt.j] += res.total
        if task.pt.k != task.pt.j:
            values[task.pt.k] += res.total
        n_resamples += len(res.events)
        n_fallbacks += res.fallbacks
        for e in res.events:
            if e.fallback is not None:
                key = (e.fallback, e.rule, e.cell, e.feature)
                warn_counts[key] = warn_counts.get(key, 0) + 1
        if event_sink is not None:
            event_sink.extend(res.events)
        if record_sink is not None:
            record_sink.extend(res.records)
    if not diagonal_only:
        values /= ref.d

    warnings = tuple(
        WarningRecord(
            code=code,
            feature=ref.feature_names[feat],
            rule=rule,
            cell=cell,
            count=count,
        )
        for (code, rule, cell, feat), count in warn_counts.items()
    )
    return ImportanceVector(
        values=values,
        focal_id=focal.id,
        algorithm=algorithm,
        fingerprint=config_fingerprint(
            ref.content_hash,
            model.model_id,
            max_bins,
            seed,
            resamples,
            poverty_line,
        ),
        predicted_income=y_hat,
        warnings=warnings,
        evaluations=planned,
        resamples=n_resamples,
        fallbacks=n_fallbacks,
    )


def univariate_importances(
    dataset: Dataset,
    model: PredictorModel,
    pipeline: PreprocessPipeline,
    focal: Household,
    max_bins: int = DEFAULT_MAX_BINS,
    *,
    workers: int = 1,
    budget: int = DEFAULT_BUDGET,
    record_sink: list | None = None,
    event_sink: list | None = None,
) -> ImportanceVector:
    """Importance of each feature by replacing it with every observed value."""
    return _run(
        dataset,
        model,
        pipeline,
        focal,
        algorithm=ALG_UNIVARIATE,
        diagonal_only=True,
        rules=(),
        max_bins=max_bins,
        seed=0,
        resamples=1,
        poverty_line=None,
        workers=workers,
        budget=budget,
        spawn_prefix=(),
        record_sink=record_sink,
        event_sink=event_sink,
    )


def conditional_univariate_importances(
    dataset: Dataset,
    model: PredictorModel,
    pipeline: PreprocessPipeline,
    focal: Household,
    rules: tuple[ConditionalityRule, ...] | None = None,
    max_bins: int = DEFAULT_MAX_BINS,
    seed: int = 0,
    resamples: int = 1,
    *,
    workers: int = 1,
    budget: int = DEFAULT_BUDGET,
    spawn_prefix: tuple[int, ...] = (),
    record_sink: list | None = None,
    event_sink: list | None = None,
) -> ImportanceVector:
    """Univariate importances with rule-dependent features redrawn per term."""
    if rules is None:
        rules = dataset.schema.rules
    return _run(
        dataset,
        model,
        pipeline,
        focal,
        algorithm=ALG_CONDITIONAL,
        diagonal_only=True,
        rules=rules,
        max_bins=max_bins,
        seed=seed,
        resamples=resamples,
        poverty_line=None,
        workers=workers,
        budget=budget,
        spawn_prefix=spawn_prefix,
        record_sink=record_sink,
        event_sink=event_sink,
    )


def bivariate_importances(
    dataset: Dataset,
    model: PredictorModel,
    pipeline: PreprocessPipeline,
    focal: Household,
    rules: tuple[ConditionalityRule, ...] | None = None,
    max_bins: int = DEFAULT_MAX_BINS,
    seed: int = 0,
    resamples: int = 1,
    *,
    workers: int = 1,
    budget: int = DEFAULT_BUDGET,
    spawn_prefix: tuple[int, ...] = (),
    record_sink: list | None = None,
    event_sink: list | None = None,
) -> ImportanceVector:
    """Pairwise perturbation over observed value pairs, averaged over 1/d.

    Each unordered pair is computed once and credited to both features; the
    diagonal pair is the univariate loop.
    """
    if rules is None:
        rules = dataset.schema.rules
    return _run(
        dataset,
        model,
        pipeline,
        focal,
        algorithm=ALG_BIVARIATE,
        diagonal_only=False,
        rules=rules,
        max_bins=max_bins,
        seed=seed,
        resamples=resamples,
        poverty_line=None,
        workers=workers,
        budget=budget,
        spawn_prefix=spawn_prefix,
        record_sink=record_sink,
        event_sink=event_sink,
    )


def contrastive_importances(
    dataset: Dataset,
    model: PredictorModel,
    pipeline: PreprocessPipeline,
    focal: Household,
    rules: tuple[ConditionalityRule, ...] | None = None,
    config: PovertyConfig | None = None,
    max_bins: int = DEFAULT_MAX_BINS,
    seed: int = 0,
    resamples: int = 1,
    *,
    workers: int = 1,
    budget: int = DEFAULT_BUDGET,
    spawn_prefix: tuple[int, ...] = (),
    record_sink: list | None = None,
    event_sink: list | None = None,
) -> ImportanceVector:
    """Bivariate importances measured against the below-poverty-line rows.

    Every value set, joint weight and conditional distribution is drawn from
    the contrastive subset instead of the full dataset.
    """
    if rules is None:
        rules = dataset.schema.rules
    if config is None:
        config = dataset.schema.poverty
    ref = filter_contrastive(dataset, config)
    return _run(
        ref,
        model,
        pipeline,
        focal,
        algorithm=ALG_CONTRASTIVE,
        diagonal_only=False,
        rules=rules,
        max_bins=max_bins,
        seed=seed,
        resamples=resamples,
        poverty_line=config.poverty_line,
        workers=workers,
        budget=budget,
        spawn_prefix=spawn_prefix,
        record_sink=record_sink,
        event_sink=event_sink,
    )
