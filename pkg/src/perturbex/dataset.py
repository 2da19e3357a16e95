"""Columnar dataset model, CSV ingestion, household coding, contrastive filtering.

Columns are stored as float64 arrays: numeric features hold their values (NaN
for missing cells), categorical and boolean features hold category codes. A
categorical column that was observed with missing cells gets a dedicated
missing code (one past the last real category), so "missing" survives as a
first-class replacement value; numeric missing stays NaN and is excluded from
value sets.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import (
    ContrastiveSetTooSmall,
    EmptyDataset,
    EncodingError,
    ParseError,
    SchemaMismatch,
)
from .schema import PovertyConfig, SurveySchema, load_schema

# CSV columns that are not features.
INCOME_COLUMN = "income"
RESERVED_COLUMNS = ("household_id", "collection_date", "observed_formal_income", INCOME_COLUMN)

_BOOL_VALUES = {
    "0": "0",
    "false": "0",
    "no": "0",
    "1": "1",
    "true": "1",
    "yes": "1",
}


@dataclass(frozen=True)
class Column:
    """One feature column in coded form."""

    name: str
    kind: str
    values: np.ndarray  # float64; numeric values or category codes
    missing: np.ndarray  # bool mask
    categories: tuple[str, ...] = ()  # real categories, cat/bool only
    has_missing_category: bool = False

    @property
    def n_codes(self) -> int:
        """Number of category codes including the missing code, if any."""
        return len(self.categories) + (1 if self.has_missing_category else 0)

    @property
    def missing_code(self) -> int | None:
        return len(self.categories) if self.has_missing_category else None

    def decode(self, code: float) -> float | str | None:
        """Coded value back to its raw form (None for a missing cell)."""
        if self.kind == "numeric":
            return None if math.isnan(code) else float(code)
        idx = int(code)
        if self.has_missing_category and idx == len(self.categories):
            return None
        return self.categories[idx]

    def encode(self, value: float | str | bool | None) -> float:
        """Raw value to its code; EncodingError outside the declared domain."""
        if self.kind == "numeric":
            if value is None:
                return float("nan")
            try:
                out = float(value)
            except (TypeError, ValueError):
                raise EncodingError(f"feature {self.name!r}: {value!r} is not numeric") from None
            if math.isinf(out):
                raise EncodingError(f"feature {self.name!r}: non-finite value {value!r}")
            return out
        if value is None:
            if not self.has_missing_category:
                raise EncodingError(
                    f"feature {self.name!r} was never observed missing; "
                    "missing is outside its domain"
                )
            return float(len(self.categories))
        text = _normalize_category(self.kind, str(value))
        if text is None or text not in self.categories:
            raise EncodingError(f"feature {self.name!r}: unknown category {value!r}")
        return float(self.categories.index(text))


@dataclass(frozen=True)
class Household:
    """A single (possibly focal) instance aligned with the dataset schema."""

    values: tuple  # raw values, None = missing
    codes: np.ndarray  # float64, length d
    missing_mask: tuple[bool, ...]
    id: str | None = None
    observed_formal_income: float | None = None
    collection_date: str | None = None

    @property
    def d(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class Dataset:
    """Immutable columnar table with ground-truth income per capita."""

    schema: SurveySchema
    columns: tuple[Column, ...]
    income: np.ndarray
    ids: tuple[str, ...]
    observed_formal_income: np.ndarray  # float64, NaN when absent
    collection_dates: tuple[str | None, ...]
    source_tag: str
    content_hash: str

    @property
    def n(self) -> int:
        return len(self.income)

    @property
    def d(self) -> int:
        return len(self.columns)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    @cached_property
    def matrix(self) -> np.ndarray:
        """Coded feature matrix, shape (n, d). Read-only view."""
        out = np.column_stack([c.values for c in self.columns])
        out.setflags(write=False)
        return out

    def column(self, j: int) -> Column:
        return self.columns[j]

    def household(self, i: int) -> Household:
        """Materialize row i as a Household."""
        codes = self.matrix[i].copy()
        values = tuple(self.columns[j].decode(codes[j]) for j in range(self.d))
        ofi = self.observed_formal_income[i]
        return Household(
            values=values,
            codes=codes,
            missing_mask=tuple(bool(c.missing[i]) for c in self.columns),
            id=self.ids[i],
            observed_formal_income=None if math.isnan(ofi) else float(ofi),
            collection_date=self.collection_dates[i],
        )

    def household_from_values(
        self,
        values,
        id: str | None = None,
        observed_formal_income: float | None = None,
        collection_date: str | None = None,
    ) -> Household:
        """Code arbitrary raw values against this dataset's columns."""
        if len(values) != self.d:
            raise EncodingError(f"expected {self.d} values, got {len(values)}")
        codes = np.array([self.columns[j].encode(v) for j, v in enumerate(values)])
        clean = tuple(self.columns[j].decode(codes[j]) for j in range(self.d))
        return Household(
            values=clean,
            codes=codes,
            missing_mask=tuple(v is None for v in clean),
            id=id,
            observed_formal_income=observed_formal_income,
            collection_date=collection_date,
        )

    def decode_row(self, codes: np.ndarray) -> tuple:
        return tuple(self.columns[j].decode(codes[j]) for j in range(self.d))

    def row_index_of(self, household_id: str) -> int | None:
        try:
            return self.ids.index(household_id)
        except ValueError:
            return None

    def subset(self, rows: np.ndarray, source_tag: str) -> "Dataset":
        """Row-sliced view sharing schema, categories and content hash."""
        cols = tuple(
            Column(
                name=c.name,
                kind=c.kind,
                values=c.values[rows],
                missing=c.missing[rows],
                categories=c.categories,
                has_missing_category=c.has_missing_category,
            )
            for c in self.columns
        )
        return Dataset(
            schema=self.schema,
            columns=cols,
            income=self.income[rows],
            ids=tuple(self.ids[i] for i in rows),
            observed_formal_income=self.observed_formal_income[rows],
            collection_dates=tuple(self.collection_dates[i] for i in rows),
            source_tag=source_tag,
            content_hash=self.content_hash,
        )


def _normalize_category(kind: str, text: str) -> str | None:
    if kind == "boolean":
        return _BOOL_VALUES.get(text.strip().lower())
    return text


def build_dataset(
    schema: SurveySchema,
    raw_columns: dict[str, list],
    income: list[float],
    ids: list[str] | None = None,
    observed_formal_income: list[float | None] | None = None,
    collection_dates: list[str | None] | None = None,
    source_tag: str = "memory",
    content_hash: str | None = None,
) -> Dataset:
    """Assemble a Dataset from per-feature raw value lists.

    Raw values use None for missing. Numeric cells must be numbers; boolean
    cells must normalize to 0/1.
    """
    n = len(income)
    if n == 0:
        raise EmptyDataset("dataset has no rows")
    declared = {f.name for f in schema.features}
    if set(raw_columns) != declared:
        missing = declared - set(raw_columns)
        extra = set(raw_columns) - declared
        raise SchemaMismatch(f"column set mismatch: missing {sorted(missing)}, extra {sorted(extra)}")

    columns = []
    for f in schema.features:
        raw = raw_columns[f.name]
        if len(raw) != n:
            raise SchemaMismatch(
                f"column {f.name!r} has {len(raw)} entries, expected {n}"
            )
        miss = np.array([v is None for v in raw], dtype=bool)
        if f.kind == "numeric":
            vals = np.full(n, np.nan)
            for i, v in enumerate(raw):
                if v is None:
                    continue
                try:
                    vals[i] = float(v)
                except (TypeError, ValueError):
                    raise ParseError(
                        f"row {i}, column {f.name!r}: {v!r} is not numeric",
                        row=i,
                        column=f.name,
                    ) from None
                if math.isinf(vals[i]) or math.isnan(vals[i]):
                    raise ParseError(
                        f"row {i}, column {f.name!r}: non-finite value {v!r}",
                        row=i,
                        column=f.name,
                    )
            columns.append(Column(name=f.name, kind=f.kind, values=vals, missing=miss))
        else:
            texts: list[str | None] = []
            for i, v in enumerate(raw):
                if v is None:
                    texts.append(None)
                    continue
                norm = _normalize_category(f.kind, str(v))
                if norm is None:
                    raise ParseError(
                        f"row {i}, column {f.name!r}: {v!r} is not a boolean",
                        row=i,
                        column=f.name,
                    )
                texts.append(norm)
            categories = tuple(sorted({t for t in texts if t is not None}))
            has_missing = any(t is None for t in texts)
            lookup = {c: float(k) for k, c in enumerate(categories)}
            missing_code = float(len(categories))
            vals = np.array([missing_code if t is None else lookup[t] for t in texts])
            columns.append(
                Column(
                    name=f.name,
                    kind=f.kind,
                    values=vals,
                    missing=miss,
                    categories=categories,
                    has_missing_category=has_missing,
                )
            )

    income_arr = np.asarray(income, dtype=float)
    if np.isnan(income_arr).any():
        i = int(np.flatnonzero(np.isnan(income_arr))[0])
        raise ParseError(
            f"row {i}: ground-truth income is missing; rows without income are rejected",
            row=i,
            column=INCOME_COLUMN,
        )

    if ids is None:
        ids = [str(i) for i in range(n)]
    if observed_formal_income is None:
        ofi = np.full(n, np.nan)
    else:
        ofi = np.array([np.nan if v is None else float(v) for v in observed_formal_income])
    if collection_dates is None:
        collection_dates = [None] * n

    if content_hash is None:
        content_hash = _hash_content(schema, raw_columns, income)

    return Dataset(
        schema=schema,
        columns=tuple(columns),
        income=income_arr,
        ids=tuple(ids),
        observed_formal_income=ofi,
        collection_dates=tuple(collection_dates),
        source_tag=source_tag,
        content_hash=content_hash,
    )


def _hash_content(schema: SurveySchema, raw_columns: dict[str, list], income: list) -> str:
    h = hashlib.sha256()
    for f in schema.features:
        h.update(f.name.encode())
        h.update(repr(raw_columns[f.name]).encode())
    h.update(repr(list(income)).encode())
    return h.hexdigest()


def load_dataset(csv_path: str | Path, schema_path: str | Path) -> Dataset:
    """Load an RFC-4180 CSV against a schema file.

    The header must contain every schema feature plus ``income``; the reserved
    columns ``household_id``, ``collection_date`` and ``observed_formal_income``
    are optional. Any other column is a SchemaMismatch. The empty field is the
    missing sentinel (configurable via the schema); missing income is rejected.
    """
    schema = load_schema(schema_path)
    csv_bytes = Path(csv_path).read_bytes()
    schema_bytes = Path(schema_path).read_bytes()
    content_hash = hashlib.sha256(csv_bytes + b"\x00" + schema_bytes).hexdigest()

    reader = csv.reader(io.StringIO(csv_bytes.decode("utf-8-sig")))
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyDataset(f"{csv_path} is empty") from None

    declared = {f.name for f in schema.features}
    seen = set(header)
    if len(seen) != len(header):
        raise SchemaMismatch(f"{csv_path}: duplicate header columns")
    missing_cols = (declared | {INCOME_COLUMN}) - seen
    extra_cols = seen - declared - set(RESERVED_COLUMNS)
    if missing_cols or extra_cols:
        raise SchemaMismatch(
            f"{csv_path}: header does not match schema: "
            f"missing {sorted(missing_cols)}, unexpected {sorted(extra_cols)}"
        )

    pos = {name: k for k, name in enumerate(header)}
    sentinel = schema.missing_sentinel

    raw_columns: dict[str, list] = {f.name: [] for f in schema.features}
    income: list[float] = []
    ids: list[str] = []
    ofi: list[float | None] = []
    dates: list[str | None] = []

    for row_idx, row in enumerate(reader):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(
                f"row {row_idx}: {len(row)} fields, header has {len(header)}", row=row_idx
            )
        for f in schema.features:
            cell = row[pos[f.name]]
            raw_columns[f.name].append(None if cell == sentinel else cell)
        cell = row[pos[INCOME_COLUMN]]
        if cell == sentinel:
            raise ParseError(
                f"row {row_idx}: ground-truth income is missing", row=row_idx, column=INCOME_COLUMN
            )
        try:
            income.append(float(cell))
        except ValueError:
            raise ParseError(
                f"row {row_idx}, column 'income': {cell!r} is not numeric",
                row=row_idx,
                column=INCOME_COLUMN,
            ) from None
        ids.append(row[pos["household_id"]] if "household_id" in pos else str(row_idx))
        if "observed_formal_income" in pos:
            cell = row[pos["observed_formal_income"]]
            if cell == sentinel:
                ofi.append(None)
            else:
                try:
                    ofi.append(float(cell))
                except ValueError:
                    raise ParseError(
                        f"row {row_idx}, column 'observed_formal_income': {cell!r} is not numeric",
                        row=row_idx,
                        column="observed_formal_income",
                    ) from None
        else:
            ofi.append(None)
        if "collection_date" in pos:
            cell = row[pos["collection_date"]]
            dates.append(None if cell == sentinel else cell)
        else:
            dates.append(None)

    if not income:
        raise EmptyDataset(f"{csv_path} has a header but no rows")

    return build_dataset(
        schema,
        raw_columns,
        income,
        ids=ids,
        observed_formal_income=ofi,
        collection_dates=dates,
        source_tag=str(csv_path),
        content_hash=content_hash,
    )


def filter_contrastive(dataset: Dataset, config: PovertyConfig) -> Dataset:
    """Rows strictly below the poverty line, as a new immutable Dataset.

    Households exactly at the line are excluded. Raises ContrastiveSetTooSmall
    when fewer than the configured floor remain.
    """
    rows = np.flatnonzero(dataset.income < config.poverty_line)
    if len(rows) < config.min_contrastive_rows:
        raise ContrastiveSetTooSmall(found=len(rows), required=config.min_contrastive_rows)
    return dataset.subset(rows, source_tag=f"{dataset.source_tag}[Y<{config.poverty_line}]")
