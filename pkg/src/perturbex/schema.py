"""Survey schema: feature declarations, groups, conditionality rules, poverty config.

The schema file is a versioned JSON document (``schema_version: 1``) with keys
``features``, ``groups``, ``conditionalities``, ``poverty_line`` and
``missing_sentinel``. Parsing is strict: unknown feature kinds, dangling group
references and overlapping driver/dependent sets are rejected up front.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import SchemaError

FEATURE_KINDS = ("numeric", "categorical", "boolean")
DEFAULT_MIN_CONTRASTIVE_ROWS = 30


@dataclass(frozen=True)
class FeatureSchema:
    """One declared survey feature."""

    name: str
    kind: str  # numeric | categorical | boolean
    group_id: str
    interpretable: bool = True
    unit: str | None = None


@dataclass(frozen=True)
class GroupDecl:
    """A declared feature group (e.g. assets, occupation)."""

    id: str
    label: str


@dataclass(frozen=True)
class IntervalCondition:
    """Half-open interval [lo, hi) on a numeric driver; either side may be open."""

    lo: float | None
    hi: float | None

    def matches(self, value: float) -> bool:
        if self.lo is not None and value < self.lo:
            return False
        if self.hi is not None and value >= self.hi:
            return False
        return True


@dataclass(frozen=True)
class MembershipCondition:
    """Value-set condition on a categorical or boolean driver."""

    values: frozenset[str]

    def matches(self, value: str) -> bool:
        return value in self.values


@dataclass(frozen=True)
class PartitionCell:
    """One subset of the population: a label plus per-driver conditions."""

    label: str
    conditions: dict[str, IntervalCondition | MembershipCondition]


@dataclass(frozen=True)
class ConditionalityRule:
    """Driver features whose perturbation forces dependents to be resampled.

    The partition must be total over the observed driver domain; driver and
    dependent index sets must be disjoint.
    """

    driver_features: tuple[str, ...]
    partition: tuple[PartitionCell, ...]
    dependent_features: tuple[str, ...]

    def cell_for(self, driver_values: dict[str, float | str | None]) -> PartitionCell | None:
        """First cell matching the given driver values, or None.

        A missing driver value (None) matches no cell.
        """
        for cell in self.partition:
            ok = True
            for name, cond in cell.conditions.items():
                value = driver_values.get(name)
                if value is None:
                    ok = False
                    break
                if isinstance(cond, IntervalCondition):
                    if not cond.matches(float(value)):
                        ok = False
                        break
                elif not cond.matches(str(value)):
                    ok = False
                    break
            if ok:
                return cell
        return None


@dataclass(frozen=True)
class PovertyConfig:
    """Poverty line and the minimum viable contrastive-set size."""

    poverty_line: float
    min_contrastive_rows: int = DEFAULT_MIN_CONTRASTIVE_ROWS

    def __post_init__(self):
        if not self.poverty_line > 0:
            raise SchemaError(f"poverty_line must be > 0, got {self.poverty_line}")
        if self.min_contrastive_rows < 1:
            raise SchemaError(
                f"min_contrastive_rows must be >= 1, got {self.min_contrastive_rows}"
            )


@dataclass(frozen=True)
class SurveySchema:
    """Parsed schema file: features, groups, rules and poverty config."""

    features: tuple[FeatureSchema, ...]
    groups: tuple[GroupDecl, ...]
    rules: tuple[ConditionalityRule, ...]
    poverty: PovertyConfig
    missing_sentinel: str = ""
    index: dict[str, int] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(
            self, "index", {f.name: j for j, f in enumerate(self.features)}
        )

    @property
    def d(self) -> int:
        return len(self.features)

    def feature(self, name: str) -> FeatureSchema:
        return self.features[self.index[name]]

    def feature_indices(self, names: tuple[str, ...]) -> tuple[int, ...]:
        return tuple(self.index[n] for n in names)


def _parse_condition(feature: FeatureSchema, raw: dict) -> IntervalCondition | MembershipCondition:
    if feature.kind == "numeric":
        if "in" in raw:
            raise SchemaError(
                f"numeric driver {feature.name!r} takes an interval condition, not a value set"
            )
        lo = raw.get("lo")
        hi = raw.get("hi")
        if lo is None and hi is None:
            raise SchemaError(f"interval condition on {feature.name!r} has neither lo nor hi")
        return IntervalCondition(
            lo=None if lo is None else float(lo),
            hi=None if hi is None else float(hi),
        )
    values = raw.get("in")
    if not isinstance(values, list) or not values:
        raise SchemaError(f"condition on {feature.name!r} needs a non-empty 'in' list")
    return MembershipCondition(values=frozenset(str(v) for v in values))


def parse_schema(doc: dict) -> SurveySchema:
    """Build a SurveySchema from a parsed JSON document."""
    if doc.get("schema_version") != 1:
        raise SchemaError(f"unsupported schema_version {doc.get('schema_version')!r}")

    groups = tuple(
        GroupDecl(id=str(g["id"]), label=str(g.get("label", g["id"])))
        for g in doc.get("groups", [])
    )
    group_ids = {g.id for g in groups}
    if len(group_ids) != len(groups):
        raise SchemaError("duplicate group ids")

    features = []
    seen = set()
    for f in doc.get("features", []):
        name = str(f["name"])
        if name in seen:
            raise SchemaError(f"duplicate feature name {name!r}")
        seen.add(name)
        kind = str(f["kind"])
        if kind not in FEATURE_KINDS:
            raise SchemaError(f"feature {name!r} has unknown kind {kind!r}")
        group = str(f["group"])
        if group not in group_ids:
            raise SchemaError(f"feature {name!r} references undeclared group {group!r}")
        features.append(
            FeatureSchema(
                name=name,
                kind=kind,
                group_id=group,
                interpretable=bool(f.get("interpretable", True)),
                unit=f.get("unit"),
            )
        )
    if not features:
        raise SchemaError("schema declares no features")
    features = tuple(features)
    by_name = {f.name: f for f in features}

    rules = []
    for raw_rule in doc.get("conditionalities", []):
        drivers = tuple(str(n) for n in raw_rule["drivers"])
        dependents = tuple(str(n) for n in raw_rule["dependents"])
        for n in drivers + dependents:
            if n not in by_name:
                raise SchemaError(f"conditionality references unknown feature {n!r}")
        overlap = set(drivers) & set(dependents)
        if overlap:
            raise SchemaError(
                f"conditionality drivers and dependents overlap: {sorted(overlap)}"
            )
        if not drivers or not dependents:
            raise SchemaError("conditionality needs at least one driver and one dependent")
        cells = []
        labels = set()
        for raw_cell in raw_rule["partition"]:
            label = str(raw_cell["label"])
            if label in labels:
                raise SchemaError(f"duplicate partition label {label!r}")
            labels.add(label)
            when = raw_cell.get("when", {})
            conditions = {}
            for name, cond in when.items():
                if name not in drivers:
                    raise SchemaError(
                        f"partition cell {label!r} conditions on non-driver {name!r}"
                    )
                conditions[name] = _parse_condition(by_name[name], cond)
            cells.append(PartitionCell(label=label, conditions=conditions))
        if not cells:
            raise SchemaError("conditionality has an empty partition")
        rules.append(
            ConditionalityRule(
                driver_features=drivers,
                partition=tuple(cells),
                dependent_features=dependents,
            )
        )

    poverty = PovertyConfig(
        poverty_line=float(doc["poverty_line"]),
        min_contrastive_rows=int(
            doc.get("min_contrastive_rows", DEFAULT_MIN_CONTRASTIVE_ROWS)
        ),
    )

    return SurveySchema(
        features=features,
        groups=groups,
        rules=tuple(rules),
        poverty=poverty,
        missing_sentinel=str(doc.get("missing_sentinel", "")),
    )


def load_schema(path: str | Path) -> SurveySchema:
    """Parse a schema JSON file."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"schema file {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"schema file {path} must hold a JSON object")
    return parse_schema(doc)
