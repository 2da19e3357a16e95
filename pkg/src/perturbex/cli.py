"""Command-line front end.

Subcommands: synth (bundled survey generator), train, validate, explain,
plotdata, serve. Exit codes are a stable contract: 0 success, 1 I/O or
artifact problems, 2 usage, 3 contrastive set too small, 4 evaluation budget
exceeded. A fixed --seed makes every run byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

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
    InvalidParams,
    PerturbexError,
    SchemaError,
)
from .fingerprint import config_fingerprint
from .groups import (
    build_contrastive_distribution,
    groups_from_schema,
    load_distribution,
    save_distribution,
)
from .models import fit_linear, fit_pipeline, fit_tree_ensemble, load_model, save_model
from .plotdata import DEFAULT_HIST_BINS, histogram_payload, radar_payload
from .report import build_report, dumps_payload, load_report_doc, write_report
from .resample import build_context
from .schema import PovertyConfig, load_schema
from .synth import PROFILES, synthesize
from .values import DEFAULT_MAX_BINS

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2
EXIT_CONTRASTIVE = 3
EXIT_BUDGET = 4

ALGORITHM_FLAGS = {
    "uni": ALG_UNIVARIATE,
    "cond": ALG_CONDITIONAL,
    "biv": ALG_BIVARIATE,
    "contrastive": ALG_CONTRASTIVE,
}


class _Fail(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _load(args) -> Dataset:
    return load_dataset(args.data, args.schema)


def _poverty_config(dataset: Dataset, override: float | None) -> PovertyConfig:
    base = dataset.schema.poverty
    if override is None:
        return base
    return PovertyConfig(poverty_line=override, min_contrastive_rows=base.min_contrastive_rows)


def _household_ids(selector: str) -> list[str]:
    """`id` or `@file`; the file may be JSON ({"household_ids": [...]}, a bare
    list) or one id per line."""
    if not selector.startswith("@"):
        return [selector]
    path = Path(selector[1:])
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot read household list {path}: {exc}") from exc
    stripped = text.lstrip()
    if stripped.startswith("{"):
        ids = json.loads(text).get("household_ids")
        if not isinstance(ids, list):
            raise _Fail(EXIT_IO, f"{path} has no 'household_ids' list")
        return [str(x) for x in ids]
    if stripped.startswith("["):
        return [str(x) for x in json.loads(text)]
    return [line.strip() for line in text.splitlines() if line.strip()]


def _safe_name(household_id: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in household_id)


def cmd_synth(args) -> int:
    result = synthesize(args.out, profile=args.profile, n=args.rows, seed=args.seed)
    print(
        f"wrote {result.profile} profile: {result.n} households, {result.d} features, "
        f"poverty line {result.poverty_line}"
    )
    for path in (result.csv_path, result.schema_path, result.focals_path):
        print(f"  {path}")
    return EXIT_OK


def cmd_train(args) -> int:
    dataset = _load(args)
    pipeline = fit_pipeline(dataset)
    if args.kind == "linear":
        model = fit_linear(dataset, pipeline, ridge=args.ridge)
    else:
        model = fit_tree_ensemble(
            dataset,
            pipeline,
            trees=args.trees,
            max_depth=args.depth,
            learning_rate=args.learning_rate,
            bag_fraction=args.bag_fraction,
            seed=args.seed,
        )
    save_model(model, pipeline, args.model)

    pred = model.predict_encoded(pipeline.encode(dataset.matrix))
    ss_res = float(((dataset.income - pred) ** 2).sum())
    ss_tot = float(((dataset.income - dataset.income.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    print(f"trained {args.kind} model on {dataset.n} rows: R^2 {r2:.4f}")
    print(f"  artifact {args.model} (model id {model.model_id})")
    return EXIT_OK


def cmd_validate(args) -> int:
    violations: list[str] = []
    try:
        schema = load_schema(args.schema)
    except SchemaError as exc:
        print(f"violation: {exc}")
        print("1 violations")
        return EXIT_IO
    dataset = load_dataset(args.data, args.schema)
    ctx = build_context(dataset)

    for rule in ctx.rules:
        observed = np.ones(dataset.n, dtype=bool)
        for j in rule.drivers:
            observed &= ~dataset.columns[j].missing
        covered = np.zeros(dataset.n, dtype=bool)
        for ci, cell in enumerate(rule.cells):
            covered[cell.rows] = True
            if cell.rows.size == 0:
                violations.append(
                    f"rule {rule.index} cell {cell.label!r}: empty subset (0 rows)"
                )
            else:
                print(f"rule {rule.index} cell {cell.label!r}: {cell.rows.size} rows")
                for j in rule.dependents:
                    if rule.admissible[ci][j].size == 0:
                        name = dataset.feature_names[j]
                        violations.append(
                            f"rule {rule.index} cell {cell.label!r}: dependent {name!r} "
                            "has no observed value in this subset"
                        )
        uncovered = np.flatnonzero(observed & ~covered)
        if uncovered.size:
            i = int(uncovered[0])
            combo = ", ".join(
                f"{dataset.feature_names[j]}={dataset.columns[j].decode(dataset.matrix[i, j])!r}"
                for j in rule.drivers
            )
            violations.append(
                f"rule {rule.index}: {uncovered.size} rows with observed drivers match "
                f"no partition cell (first: row {i}, {combo})"
            )

    members: dict[str, int] = {g.id: 0 for g in schema.groups}
    for f in schema.features:
        members[f.group_id] += 1
    for gid, count in members.items():
        if count == 0:
            violations.append(f"group {gid!r} has no member features")

    for line in violations:
        print(f"violation: {line}")
    print(f"{len(violations)} violations")
    return EXIT_OK if not violations else EXIT_IO


def _explain_one(algorithm, dataset, model, pipeline, focal, config, args):
    common = dict(workers=args.workers, budget=args.budget)
    if algorithm == ALG_UNIVARIATE:
        return univariate_importances(dataset, model, pipeline, focal, args.bins, **common)
    if algorithm == ALG_CONDITIONAL:
        return conditional_univariate_importances(
            dataset, model, pipeline, focal,
            max_bins=args.bins, seed=args.seed, resamples=args.resamples, **common,
        )
    if algorithm == ALG_BIVARIATE:
        return bivariate_importances(
            dataset, model, pipeline, focal,
            max_bins=args.bins, seed=args.seed, resamples=args.resamples, **common,
        )
    return contrastive_importances(
        dataset, model, pipeline, focal, config=config,
        max_bins=args.bins, seed=args.seed, resamples=args.resamples, **common,
    )


def cmd_explain(args) -> int:
    dataset = _load(args)
    model, pipeline = load_model(args.model, dataset)
    groups = groups_from_schema(dataset.schema)
    config = _poverty_config(dataset, args.poverty_line)
    algorithm = ALGORITHM_FLAGS[args.algorithm]
    fingerprint = config_fingerprint(
        dataset.content_hash, model.model_id, args.bins, args.seed, args.resamples,
        config.poverty_line,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    dist = None
    if algorithm == ALG_CONTRASTIVE:
        dist_path = out / "distribution.json"
        if dist_path.exists():
            dist = load_distribution(dist_path)
            if dist.fingerprint != fingerprint:
                if not args.build_dist:
                    raise _Fail(
                        EXIT_IO,
                        f"distribution cache {dist_path} was built under a different "
                        "configuration; rerun with --build-dist to rebuild it",
                    )
                dist = None
        if dist is None:
            if not args.build_dist:
                raise _Fail(
                    EXIT_IO,
                    f"no distribution cache at {dist_path}; pass --build-dist to create it",
                )
            dist = build_contrastive_distribution(
                dataset, model, pipeline, config=config, groups=groups,
                max_bins=args.bins, seed=args.seed, resamples=args.resamples,
                workers=args.workers, budget=args.budget,
            )
            save_distribution(dist, dist_path)
            print(f"built contrastive distribution over {dist.m} households -> {dist_path}")

    for household_id in _household_ids(args.household):
        row = dataset.row_index_of(household_id)
        if row is None:
            raise _Fail(EXIT_IO, f"unknown household id {household_id!r}")
        focal = dataset.household(row)
        vector = _explain_one(algorithm, dataset, model, pipeline, focal, config, args)
        report = build_report(
            dataset.schema, focal, vector, groups, fingerprint, args.seed, dist=dist
        )
        path = out / f"report_{_safe_name(household_id)}.json"
        write_report(report, path)
        print(f"{household_id}: predicted income {vector.predicted_income:.2f} -> {path}")
    return EXIT_OK


def cmd_plotdata(args) -> int:
    dataset = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dist_path = out / "distribution.json"
    if not dist_path.exists():
        raise _Fail(
            EXIT_IO, f"no distribution cache at {dist_path}; the radar payload needs one"
        )
    dist = load_distribution(dist_path)

    for household_id in _household_ids(args.household):
        safe = _safe_name(household_id)
        report_path = out / f"report_{safe}.json"
        if not report_path.exists():
            raise _Fail(EXIT_IO, f"no report at {report_path}; run explain first")
        doc = load_report_doc(report_path)

        hist = histogram_payload(
            dataset,
            doc["fingerprint"],
            bins=args.bins,
            focal_id=household_id,
            predicted_income=doc["predicted_income"],
            observed_formal_income=doc["observed_formal_income"],
        )
        hist_path = out / f"histogram_{safe}.json"
        hist_path.write_text(dumps_payload(hist))

        try:
            radar = radar_payload(doc, dist)
        except InvalidParams as exc:
            raise _Fail(EXIT_IO, str(exc)) from exc
        radar_path = out / f"radar_{safe}.json"
        radar_path.write_text(dumps_payload(radar))
        print(f"{household_id}: {hist_path} {radar_path}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    cfg = ServiceConfig(
        data_path=args.data,
        schema_path=args.schema,
        model_path=args.model,
        dist_path=str(Path(args.out) / "distribution.json") if args.out else None,
        budget=args.budget,
        workers=args.workers,
        seed=args.seed,
        bins=args.bins,
        resamples=args.resamples,
        poverty_line=args.poverty_line,
    )
    app = create_app(cfg)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="perturbex",
        description="Perturbation explanations for household income models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def data_flags(p):
        p.add_argument("--data", required=True, help="households CSV")
        p.add_argument("--schema", required=True, help="schema JSON")

    p = sub.add_parser("synth", help="generate a synthetic survey")
    p.add_argument("--profile", choices=PROFILES, default="full")
    p.add_argument("--rows", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="fit and persist a reference model")
    data_flags(p)
    p.add_argument("--model", required=True, help="output artifact path")
    p.add_argument("--kind", choices=("linear", "gbt"), default="linear")
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--bag-fraction", type=float, default=1.0)
    p.add_argument("--ridge", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("validate", help="check rules and groups against the data")
    data_flags(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("explain", help="explain households into JSON reports")
    data_flags(p)
    p.add_argument("--model", required=True)
    p.add_argument("--household", required=True, metavar="ID|@FILE")
    p.add_argument("--algorithm", choices=sorted(ALGORITHM_FLAGS), default="contrastive")
    p.add_argument("--bins", type=int, default=DEFAULT_MAX_BINS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--resamples", type=int, default=1)
    p.add_argument("--poverty-line", type=float, default=None, help="overrides the schema")
    p.add_argument("--build-dist", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("plotdata", help="histogram and radar payloads from reports")
    data_flags(p)
    p.add_argument("--household", required=True, metavar="ID|@FILE")
    p.add_argument("--bins", type=int, default=DEFAULT_HIST_BINS, help="histogram bins")
    p.add_argument("--out", required=True, help="directory holding the explain outputs")
    p.set_defaults(func=cmd_plotdata)

    p = sub.add_parser("serve", help="run the HTTP service")
    data_flags(p)
    p.add_argument("--model", required=True)
    p.add_argument("--out", default=None, help="directory holding distribution.json")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--bins", type=int, default=DEFAULT_MAX_BINS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--resamples", type=int, default=1)
    p.add_argument("--poverty-line", type=float, default=None)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--workers", type=int, default=2)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _Fail as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ContrastiveSetTooSmall as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONTRASTIVE
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except InvalidParams as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError, PerturbexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
