"""Dataset construction, CSV loading, coding and contrastive filtering."""

from __future__ import annotations

import json

import numpy as np
import pytest

from perturbex.dataset import build_dataset, filter_contrastive, load_dataset
from perturbex.errors import (
    ContrastiveSetTooSmall,
    EmptyDataset,
    EncodingError,
    ParseError,
    SchemaMismatch,
)
from perturbex.schema import PovertyConfig

from conftest import toy_schema

SCHEMA_DOC = {
    "schema_version": 1,
    "poverty_line": 12.0,
    "groups": [{"id": "g0", "label": "All"}],
    "features": [
        {"name": "size", "kind": "numeric", "group": "g0"},
        {"name": "roof", "kind": "categorical", "group": "g0"},
        {"name": "electrified", "kind": "boolean", "group": "g0"},
    ],
}


def _schema3():
    return toy_schema(("numeric", "categorical", "boolean"))


def _raw3():
    return {
        "f0": [1.0, 2.0, None, 1.0],
        "f1": ["b", "a", "b", None],
        "f2": ["1", "0", "true", "No"],
    }


def test_build_dataset_codes_and_masks():
    ds = build_dataset(_schema3(), _raw3(), income=[5.0, 6.0, 7.0, 8.0])
    assert ds.n == 4 and ds.d == 3
    num = ds.columns[0]
    assert np.isnan(num.values[2]) and num.missing[2]
    cat = ds.columns[1]
    assert cat.categories == ("a", "b")
    assert cat.has_missing_category and cat.missing_code == 2
    assert cat.values[3] == 2.0
    boolean = ds.columns[2]
    # every spelling of truth normalizes to the same two codes
    assert boolean.categories == ("0", "1")
    assert boolean.values.tolist() == [1.0, 0.0, 1.0, 0.0]


def test_decode_encode_round_trip():
    ds = build_dataset(_schema3(), _raw3(), income=[5, 6, 7, 8])
    for i in range(ds.n):
        hh = ds.household(i)
        again = ds.household_from_values(hh.values, id=hh.id)
        assert np.array_equal(hh.codes, again.codes, equal_nan=True)
        assert hh.missing_mask == again.missing_mask


def test_unknown_category_is_an_encoding_error():
    ds = build_dataset(_schema3(), _raw3(), income=[5, 6, 7, 8])
    with pytest.raises(EncodingError):
        ds.household_from_values([1.0, "zebra", "1"])
    with pytest.raises(EncodingError):
        ds.household_from_values([1.0, "a"])


def test_missing_income_rejected():
    with pytest.raises(ParseError, match="income"):
        build_dataset(_schema3(), _raw3(), income=[5.0, None, 7.0, 8.0])


def test_non_numeric_cell_rejected():
    raw = _raw3()
    raw["f0"][0] = "abc"
    with pytest.raises(ParseError) as exc:
        build_dataset(_schema3(), raw, income=[5, 6, 7, 8])
    assert exc.value.row == 0 and exc.value.column == "f0"


def test_column_set_mismatch_rejected():
    raw = _raw3()
    del raw["f2"]
    with pytest.raises(SchemaMismatch):
        build_dataset(_schema3(), raw, income=[5, 6, 7, 8])


def _write_csv(tmp_path, text, doc=SCHEMA_DOC):
    csv_path = tmp_path / "data.csv"
    schema_path = tmp_path / "schema.json"
    csv_path.write_text(text)
    schema_path.write_text(json.dumps(doc))
    return csv_path, schema_path


CSV_OK = (
    "household_id,size,roof,electrified,income,observed_formal_income,collection_date\n"
    "H1,3,tin,1,20.5,18.0,2023-01-05\n"
    "H2,5,thatch,0,8.0,,2023-02-10\n"
    "H3,,tin,1,11.0,,\n"
)


def test_load_dataset_happy_path(tmp_path):
    ds = load_dataset(*_write_csv(tmp_path, CSV_OK))
    assert ds.n == 3
    assert ds.ids == ("H1", "H2", "H3")
    assert ds.income.tolist() == [20.5, 8.0, 11.0]
    assert ds.columns[0].missing[2]
    h1 = ds.household(0)
    assert h1.observed_formal_income == 18.0
    assert h1.collection_date == "2023-01-05"
    h3 = ds.household(2)
    assert h3.observed_formal_income is None and h3.collection_date is None
    assert len(ds.content_hash) == 64


def test_load_dataset_hash_tracks_both_files(tmp_path):
    a = load_dataset(*_write_csv(tmp_path, CSV_OK))
    b = load_dataset(*_write_csv(tmp_path, CSV_OK))
    assert a.content_hash == b.content_hash
    c = load_dataset(*_write_csv(tmp_path, CSV_OK.replace("20.5", "20.6")))
    assert c.content_hash != a.content_hash
    doc = dict(SCHEMA_DOC, poverty_line=13.0)
    d = load_dataset(*_write_csv(tmp_path, CSV_OK, doc))
    assert d.content_hash != a.content_hash


def test_load_dataset_header_checks(tmp_path):
    with pytest.raises(SchemaMismatch, match="duplicate"):
        load_dataset(*_write_csv(tmp_path, "size,size,roof,electrified,income\n1,1,a,0,5\n"))
    with pytest.raises(SchemaMismatch, match="unexpected"):
        load_dataset(
            *_write_csv(tmp_path, "size,roof,electrified,income,extra\n1,a,0,5,9\n")
        )
    with pytest.raises(SchemaMismatch, match="missing"):
        load_dataset(*_write_csv(tmp_path, "size,roof,income\n1,a,5\n"))
    with pytest.raises(EmptyDataset):
        load_dataset(*_write_csv(tmp_path, ""))
    with pytest.raises(EmptyDataset):
        load_dataset(*_write_csv(tmp_path, "size,roof,electrified,income\n"))


def test_load_dataset_missing_income_rejected(tmp_path):
    text = "size,roof,electrified,income\n1,a,0,\n"
    with pytest.raises(ParseError, match="income"):
        load_dataset(*_write_csv(tmp_path, text))


def test_load_dataset_ragged_row_rejected(tmp_path):
    text = "size,roof,electrified,income\n1,a,0,5\n1,a,0\n"
    with pytest.raises(ParseError, match="fields"):
        load_dataset(*_write_csv(tmp_path, text))


def test_custom_missing_sentinel(tmp_path):
    doc = dict(SCHEMA_DOC, missing_sentinel="NA")
    text = "size,roof,electrified,income\nNA,tin,1,5\n2,NA,0,6\n"
    ds = load_dataset(*_write_csv(tmp_path, text, doc))
    assert ds.columns[0].missing[0]
    assert ds.columns[1].missing[1]


def test_subset_preserves_coding_and_hash():
    ds = build_dataset(_schema3(), _raw3(), income=[5, 6, 7, 8])
    sub = ds.subset(np.array([3, 1]), source_tag="slice")
    assert sub.n == 2
    assert sub.ids == ("T003", "T001") if ds.ids[0].startswith("T") else True
    assert sub.content_hash == ds.content_hash
    assert sub.columns[1].categories == ds.columns[1].categories
    assert sub.columns[1].has_missing_category  # kept even though the slice has no missing
    assert np.array_equal(sub.matrix[0], ds.matrix[3], equal_nan=True)


def test_filter_contrastive_is_strict_and_floored():
    ds = build_dataset(_schema3(), _raw3(), income=[5.0, 10.0, 10.0, 20.0])
    sub = filter_contrastive(ds, PovertyConfig(10.0, min_contrastive_rows=1))
    assert sub.n == 1  # households exactly at the line stay out
    assert sub.income.tolist() == [5.0]
    with pytest.raises(ContrastiveSetTooSmall) as exc:
        filter_contrastive(ds, PovertyConfig(10.0, min_contrastive_rows=2))
    assert exc.value.found == 1 and exc.value.required == 2


def test_row_index_of():
    ds = build_dataset(_schema3(), _raw3(), income=[5, 6, 7, 8], ids=["a", "b", "c", "d"])
    assert ds.row_index_of("c") == 2
    assert ds.row_index_of("zz") is None


def test_matrix_is_read_only():
    ds = build_dataset(_schema3(), _raw3(), income=[5, 6, 7, 8])
    with pytest.raises(ValueError):
        ds.matrix[0, 0] = 99.0
