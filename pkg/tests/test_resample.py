"""Rule compilation, cell matching, dependent redraws and their fallbacks."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perturbex.dataset import build_dataset
from perturbex.resample import (
    EMPTY_SUBSET,
    NO_ADMISSIBLE_VALUE,
    UNMATCHED_CELL,
    build_context,
    conditional_resample,
    derive_rng,
)
from perturbex.schema import (
    ConditionalityRule,
    FeatureSchema,
    GroupDecl,
    IntervalCondition,
    MembershipCondition,
    PartitionCell,
    PovertyConfig,
    SurveySchema,
)

from conftest import toy_dataset


def _schema(features, rules):
    return SurveySchema(
        features=tuple(features),
        groups=(GroupDecl("g0", "All"),),
        rules=tuple(rules),
        poverty=PovertyConfig(10.0, 1),
    )


def _two_driver_dataset():
    """num driver, bool driver, numeric dependent with some missing cells."""
    features = [
        FeatureSchema("score", "numeric", "g0"),
        FeatureSchema("active", "boolean", "g0"),
        FeatureSchema("load", "numeric", "g0"),
    ]
    rule = ConditionalityRule(
        driver_features=("score", "active"),
        partition=(
            PartitionCell(
                "low_on",
                {"score": IntervalCondition(None, 2.0), "active": MembershipCondition(frozenset({"1"}))},
            ),
            PartitionCell(
                "low_off",
                {"score": IntervalCondition(None, 2.0), "active": MembershipCondition(frozenset({"0"}))},
            ),
            PartitionCell("high", {"score": IntervalCondition(2.0, None)}),
        ),
        dependent_features=("load",),
    )
    schema = _schema(features, [rule])
    raw = {
        "score": [1.0, 1.5, 1.0, 3.0, 4.0, 1.2],
        "active": ["1", "1", "0", "0", "1", "1"],
        "load": [10.0, 20.0, 30.0, 40.0, None, 50.0],
    }
    return build_dataset(schema, raw, income=[1, 2, 3, 4, 5, 6])


def test_compiled_cells_list_matching_rows():
    ds = _two_driver_dataset()
    ctx = build_context(ds)
    rule = ctx.rules[0]
    rows = {c.label: c.rows.tolist() for c in rule.cells}
    assert rows == {"low_on": [0, 1, 5], "low_off": [2], "high": [3, 4]}
    # admissible excludes the missing load in row 4
    assert rule.admissible[2][2].tolist() == [3]
    assert rule.admissible[0][2].tolist() == [0, 1, 5]


def test_cell_for_codes_agrees_with_declarative_matching():
    ds = _two_driver_dataset()
    ctx = build_context(ds)
    rule = ds.schema.rules[0]
    compiled = ctx.rules[0]
    for i in range(ds.n):
        codes = ds.matrix[i].copy()
        ci = compiled.cell_for_codes(codes)
        driver_values = {
            name: ds.columns[ds.schema.index[name]].decode(codes[ds.schema.index[name]])
            for name in rule.driver_features
        }
        cell = rule.cell_for(driver_values)
        assert (ci is None) == (cell is None)
        if cell is not None:
            assert compiled.cells[ci].label == cell.label


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(min_value=0, max_value=99_999))
def test_compiled_matching_agrees_on_random_toys(seed):
    rng = np.random.default_rng(seed)
    kind = ("numeric", "categorical", "boolean")[seed % 3]
    ds = toy_dataset(rng, (kind, "numeric"), n=24, with_rule=True)
    ctx = build_context(ds)
    rule = ds.schema.rules[0]
    compiled = ctx.rules[0]
    for i in range(ds.n):
        codes = ds.matrix[i]
        ci = compiled.cell_for_codes(codes)
        value = ds.columns[0].decode(codes[0])
        cell = rule.cell_for({"f0": value})
        assert (ci is None) == (cell is None)
        if cell is not None:
            assert compiled.cells[ci].label == cell.label


def test_triggered_maps_drivers_to_rules():
    ds = _two_driver_dataset()
    ctx = build_context(ds)
    assert ctx.triggered([0]) == (0,)
    assert ctx.triggered([1]) == (0,)
    assert ctx.triggered([2]) == ()
    assert ctx.triggered([0, 1]) == (0,)
    assert ctx.triggered([]) == ()


def test_clean_draw_stays_in_cell_support():
    ds = _two_driver_dataset()
    ctx = build_context(ds)
    for trial in range(50):
        row = ds.matrix[0].copy()
        row[0] = 1.5  # stays in low_on
        events = conditional_resample(ctx, row, [0], derive_rng(trial, 0))
        assert len(events) == 1
        e = events[0]
        assert e.fallback is None and e.cell == "low_on"
        assert row[2] in {10.0, 20.0, 50.0}
        assert e.code == row[2]


def test_unmatched_cell_falls_back_to_marginal():
    ds = _two_driver_dataset()
    ctx = build_context(ds)
    row = ds.matrix[0].copy()
    row[0] = np.nan  # no cell admits a missing driver
    events = conditional_resample(ctx, row, [0], derive_rng(0, 1))
    assert events[0].fallback == UNMATCHED_CELL and events[0].cell is None
    assert row[2] in {10.0, 20.0, 30.0, 40.0, 50.0}


def test_empty_cell_falls_back():
    ds = _two_driver_dataset()
    ctx = build_context(ds)
    # no dataset row has score >= 2 with active missing... build one directly:
    # low range with an unobserved driver combo needs two drivers, so force
    # a row into low_off territory that the data never pairs: score<2, active=0
    # exists (row 2), so instead drive into a constructed empty cell by using
    # a row state matching "high" predicates while we empty that cell's data.
    sub = ds.subset(np.array([0, 1, 2, 5]), source_tag="no-high-rows")
    ctx2 = build_context(sub)
    row = sub.matrix[0].copy()
    row[0] = 3.0  # matches "high" predicates, but the slice has no such row
    events = conditional_resample(ctx2, row, [0], derive_rng(0, 2))
    assert events[0].fallback == EMPTY_SUBSET
    assert row[2] in {10.0, 20.0, 30.0, 50.0}


def test_cell_without_observed_dependent_falls_back():
    features = [
        FeatureSchema("score", "numeric", "g0"),
        FeatureSchema("load", "numeric", "g0"),
    ]
    rule = ConditionalityRule(
        driver_features=("score",),
        partition=(
            PartitionCell("low", {"score": IntervalCondition(None, 2.0)}),
            PartitionCell("high", {"score": IntervalCondition(2.0, None)}),
        ),
        dependent_features=("load",),
    )
    schema = _schema(features, [rule])
    ds = build_dataset(
        schema,
        {"score": [1.0, 1.0, 3.0, 4.0], "load": [7.0, 8.0, None, None]},
        income=[1, 2, 3, 4],
    )
    ctx = build_context(ds)
    row = ds.matrix[0].copy()
    row[0] = 3.0
    events = conditional_resample(ctx, row, [0], derive_rng(0, 3))
    assert events[0].fallback == NO_ADMISSIBLE_VALUE
    assert events[0].cell == "high"
    assert row[1] in {7.0, 8.0}  # marginal observed values


def test_shared_dependent_goes_to_lowest_rule():
    features = [
        FeatureSchema("a", "numeric", "g0"),
        FeatureSchema("b", "numeric", "g0"),
        FeatureSchema("shared", "numeric", "g0"),
    ]
    cells_total = (PartitionCell("all", {}),)
    rule0 = ConditionalityRule(("a",), cells_total, ("shared",))
    rule1 = ConditionalityRule(("b",), cells_total, ("shared",))
    schema = _schema(features, [rule0, rule1])
    ds = build_dataset(
        schema,
        {"a": [1.0, 2.0], "b": [1.0, 2.0], "shared": [5.0, 6.0]},
        income=[1, 2],
    )
    ctx = build_context(ds)
    row = ds.matrix[0].copy()
    events = conditional_resample(ctx, row, [0, 1], derive_rng(0, 4))
    assert len(events) == 1
    assert events[0].rule == 0


def test_perturbed_features_never_redrawn():
    features = [
        FeatureSchema("a", "numeric", "g0"),
        FeatureSchema("dep", "numeric", "g0"),
    ]
    rule = ConditionalityRule(("a",), (PartitionCell("all", {}),), ("dep",))
    schema = _schema(features, [rule])
    ds = build_dataset(schema, {"a": [1.0, 2.0], "dep": [5.0, 6.0]}, income=[1, 2])
    ctx = build_context(ds)
    row = ds.matrix[0].copy()
    row[1] = 6.0
    # dep is itself part of the perturbation, so the rule must leave it alone
    events = conditional_resample(ctx, row, [0, 1], derive_rng(0, 5))
    assert events == []
    assert row[1] == 6.0


def test_explicit_rules_override_schema_rules():
    ds = _two_driver_dataset()
    ctx = build_context(ds, rules=())
    assert ctx.rules == ()
    assert ctx.triggered([0]) == ()


def test_derive_rng_is_stable_and_keyed():
    a = derive_rng(7, 1, 2, 3).integers(1 << 30)
    b = derive_rng(7, 1, 2, 3).integers(1 << 30)
    c = derive_rng(7, 1, 2, 4).integers(1 << 30)
    d = derive_rng(8, 1, 2, 3).integers(1 << 30)
    assert a == b
    assert len({int(a), int(c), int(d)}) == 3
