"""Explanation reports: assembly and canonical JSON serialization.

The CLI and the HTTP service both emit reports through this module, so a
report for the same inputs is byte-identical wherever it was produced.
Serialization is canonical: sorted keys, fixed indentation, shortest
round-trip float repr, no timestamps.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import Household
from .engine import ImportanceVector
from .groups import (
    ContrastiveDistribution,
    FeatureGroup,
    GroupImportanceVector,
    group_importances,
    percentile_contrast,
)
from .schema import SurveySchema

REPORT_VERSION = 1

SIGN_CONVENTION = (
    "positive I_h(j) means the focal's actual value raises its predicted "
    "income relative to the reference distribution"
)


@dataclass(frozen=True)
class ExplanationReport:
    household_id: str | None
    algorithm: str
    seed: int
    predicted_income: float
    observed_formal_income: float | None
    collection_date: str | None
    feature_names: tuple[str, ...]
    importances: ImportanceVector
    group_ids: tuple[str, ...]
    group_labels: tuple[str, ...]
    groups: GroupImportanceVector
    percentiles: np.ndarray | None
    missing_variables: tuple[str, ...]
    fingerprint: str

    def to_doc(self) -> dict:
        # no algorithm field: by the reduction chain, configurations that
        # collapse to the same computation must emit identical bytes
        return {
            "report_version": REPORT_VERSION,
            "household_id": self.household_id,
            "seed": self.seed,
            "predicted_income": self.predicted_income,
            "observed_formal_income": self.observed_formal_income,
            "collection_date": self.collection_date,
            "importances": [
                {"feature": name, "value": float(v)}
                for name, v in zip(self.feature_names, self.importances.values)
            ],
            "group_importances": [
                {"group": gid, "label": label, "value": float(v)}
                for gid, label, v in zip(self.group_ids, self.group_labels, self.groups.values)
            ],
            "percentiles": None
            if self.percentiles is None
            else [
                {"group": gid, "value": float(v)}
                for gid, v in zip(self.group_ids, self.percentiles)
            ],
            "missing_variables": list(self.missing_variables),
            "warnings": [
                {
                    "code": w.code,
                    "feature": w.feature,
                    "rule": w.rule,
                    "cell": w.cell,
                    "count": w.count,
                }
                for w in self.importances.warnings
            ],
            "fingerprint": self.fingerprint,
            "sign_convention": SIGN_CONVENTION,
        }


def build_report(
    schema: SurveySchema,
    focal: Household,
    vector: ImportanceVector,
    groups: tuple[FeatureGroup, ...],
    fingerprint: str,
    seed: int,
    dist: ContrastiveDistribution | None = None,
) -> ExplanationReport:
    """Assemble the report for one explained household.

    fingerprint is the run-config fingerprint (it covers the poverty line and
    seed for every algorithm, so reports under one config rank against one
    distribution cache). Percentiles are present when a matching distribution
    is given.
    """
    gvec = group_importances(vector, groups, fingerprint=fingerprint)
    percentiles = percentile_contrast(gvec, dist) if dist is not None else None
    missing = tuple(schema.features[j].name for j, m in enumerate(focal.missing_mask) if m)
    return ExplanationReport(
        household_id=focal.id,
        algorithm=vector.algorithm,
        seed=seed,
        predicted_income=vector.predicted_income,
        observed_formal_income=focal.observed_formal_income,
        collection_date=focal.collection_date,
        feature_names=tuple(f.name for f in schema.features),
        importances=vector,
        group_ids=tuple(g.id for g in groups),
        group_labels=tuple(g.label for g in groups),
        groups=gvec,
        percentiles=percentiles,
        missing_variables=missing,
        fingerprint=fingerprint,
    )


def dumps_payload(doc: dict) -> str:
    """Canonical JSON used for reports, plot payloads and caches."""
    return json.dumps(doc, indent=1, sort_keys=True, allow_nan=False) + "\n"


def dumps_report(report: ExplanationReport) -> str:
    return dumps_payload(report.to_doc())


def write_report(report: ExplanationReport, path: str | Path) -> None:
    """Atomic write: temp file in the same directory, then rename."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(dumps_report(report))
    tmp.replace(path)


def load_report_doc(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())
