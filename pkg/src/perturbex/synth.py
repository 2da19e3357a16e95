"""Synthetic household survey generator.

Two profiles: ``full`` (24 features, 5000 rows by default) for end-to-end
runs, and ``small`` (8 features, 160 rows) for quick experiments. Both write
a CSV, a matching schema file with groups, one conditionality rule and a
poverty line, plus a focal-id list of complete rows. Everything is a pure
function of the seed.

The income model is linear in the generated features with one
schooling-by-formal-work interaction, so a fitted regression recovers it
almost exactly and tree models have real structure to find.
"""

from __future__ import annotations

import csv
import datetime
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidParams

PROFILES = ("full", "small")
DEFAULT_ROWS = {"full": 5000, "small": 160}
FOCAL_COUNTS = {"full": 50, "small": 12}


@dataclass(frozen=True)
class SynthResult:
    csv_path: Path
    schema_path: Path
    focals_path: Path
    profile: str
    n: int
    d: int
    poverty_line: float


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def _pick(rng: np.random.Generator, cats: tuple[str, ...], probs: np.ndarray) -> np.ndarray:
    """Row-wise categorical draw; probs has shape (n, len(cats))."""
    u = rng.random(len(probs))
    cum = np.cumsum(probs, axis=1)
    idx = (u[:, None] >= cum).sum(axis=1)
    return np.array(cats, dtype=object)[np.minimum(idx, len(cats) - 1)]


def _generate_full(rng: np.random.Generator, n: int):
    age = np.minimum(np.round(rng.gamma(2.0, 16.0, n)), 95.0)
    child = age < 15
    young = (age >= 15) & (age < 30)
    adult = (age >= 30) & (age < 60)

    # children almost never work formally, but the cell must stay populated
    p_formal = np.select([child, young, adult], [0.03, 0.42, 0.52], default=0.18)
    formal = (rng.random(n) < p_formal).astype(float)

    schooling = np.select(
        [child, young | adult],
        [
            np.clip(age - 6.0, 0.0, 9.0) * rng.uniform(0.6, 1.0, n),
            rng.normal(7.5, 3.2, n) + 3.0 * formal,
        ],
        default=rng.normal(4.5, 3.0, n) + 2.0 * formal,
    )
    schooling = np.round(np.clip(schooling, 0.0, 18.0))

    years_employed = np.where(
        child,
        rng.exponential(0.3, n),
        np.clip(rng.normal((age - 16.0) * 0.45 + 4.0 * formal, 3.0, n), 0.0, age),
    )
    years_employed = np.round(np.clip(years_employed, 0.0, 60.0))

    hours = np.select(
        [child, formal == 1.0],
        [np.clip(rng.normal(3.0, 4.0, n), 0.0, 30.0), np.clip(rng.normal(43.0, 5.0, n), 10.0, 70.0)],
        default=np.clip(rng.normal(24.0, 13.0, n), 0.0, 70.0),
    )
    hours = np.round(np.where(age >= 60, hours * 0.6, hours))

    p_second = np.select([child, (formal == 1.0) & (hours > 40)], [0.01, 0.22], default=0.10)
    second_job = (rng.random(n) < p_second).astype(float)

    sectors = ("agriculture", "commerce", "construction", "domestic", "none", "services")
    probs_f = np.array([0.10, 0.18, 0.12, 0.08, 0.02, 0.50])
    probs_i = np.array([0.36, 0.20, 0.10, 0.12, 0.10, 0.12])
    probs_c = np.array([0.04, 0.02, 0.01, 0.02, 0.88, 0.03])
    sector_p = np.where(child[:, None], probs_c, np.where(formal[:, None] == 1.0, probs_f, probs_i))
    occupation_sector = _pick(rng, sectors, sector_p)

    marital = ("divorced", "married", "single", "widowed")
    m_child = np.array([0.0, 0.0, 1.0, 0.0])
    m_young = np.array([0.04, 0.45, 0.50, 0.01])
    m_adult = np.array([0.12, 0.62, 0.20, 0.06])
    m_senior = np.array([0.10, 0.50, 0.05, 0.35])
    marital_p = np.select(
        [child[:, None], young[:, None], adult[:, None]], [m_child, m_young, m_adult], default=m_senior
    )
    marital_status = _pick(rng, marital, marital_p)

    literate = (rng.random(n) < np.clip(0.25 + 0.12 * schooling, 0.0, 0.99)).astype(float)
    household_size = np.minimum(1.0 + rng.poisson(2.6, n), 12.0)
    n_children = rng.binomial((household_size - 1.0).astype(int), 0.45).astype(float)

    wealth = rng.normal(0.0, 0.8, n) + 0.06 * schooling + 0.55 * formal

    piped = rng.random(n) < _sigmoid(1.2 * wealth + 0.2)
    alt = _pick(rng, ("river", "truck", "well"), np.tile([0.3, 0.2, 0.5], (n, 1)))
    water_source = np.where(piped, "piped", alt)

    sewer = rng.random(n) < _sigmoid(1.1 * wealth - 0.3)
    alt = _pick(rng, ("latrine", "none", "septic"), np.tile([0.45, 0.20, 0.35], (n, 1)))
    sanitation = np.where(sewer, "sewer", alt)

    electricity = (rng.random(n) < _sigmoid(1.4 * wealth + 1.1)).astype(float)
    tile = rng.random(n) < _sigmoid(1.3 * wealth - 1.0)
    cement = rng.random(n) < _sigmoid(wealth + 0.8)
    floor_material = np.where(tile, "tile", np.where(cement, "cement", "earth"))
    concrete = rng.random(n) < _sigmoid(1.2 * wealth - 1.2)
    metal = rng.random(n) < _sigmoid(wealth + 1.0)
    roof_material = np.where(concrete, "concrete", np.where(metal, "metal", "thatch"))
    rooms = np.clip(
        np.round(2.0 + 1.2 * wealth + 0.25 * household_size + rng.normal(0.0, 1.0, n)), 1.0, 9.0
    )

    owns_fridge = (rng.random(n) < _sigmoid(1.5 * wealth + 0.4)).astype(float)
    owns_vehicle = (rng.random(n) < _sigmoid(1.2 * wealth - 1.1)).astype(float)
    owns_computer = (rng.random(n) < _sigmoid(1.6 * wealth - 1.3)).astype(float)
    internet_access = (rng.random(n) < _sigmoid(1.5 * wealth - 0.8 + 1.0 * owns_computer)).astype(float)
    owns_land = (rng.random(n) < _sigmoid(0.4 * wealth - 0.1)).astype(float)
    rural = (water_source == "river") | (water_source == "well")
    livestock_count = np.where(rural, rng.poisson(3.0, n), rng.poisson(0.4, n)).astype(float)
    phones_count = np.minimum(rng.poisson(1.0 + 1.2 * np.maximum(wealth, 0.0)), 6).astype(float)

    income = (
        38.0
        + 6.0 * schooling
        + 48.0 * formal
        + 2.2 * schooling * formal
        + 1.6 * years_employed
        + 0.85 * hours
        + 10.0 * owns_fridge
        + 16.0 * owns_vehicle
        + 14.0 * owns_computer
        + 9.0 * internet_access
        + 7.0 * electricity
        + 3.5 * rooms
        + 2.5 * phones_count
        + 0.7 * livestock_count
        + 5.0 * owns_land
        + 4.0 * literate
        - 2.0 * (household_size - 1.0)
        + rng.normal(0.0, 25.0, n)
    )
    income = np.round(np.maximum(income, 5.0), 2)

    features = {
        "age": age,
        "schooling_years": schooling,
        "household_size": household_size,
        "n_children": n_children,
        "marital_status": marital_status,
        "literate": literate,
        "formal_activity": formal,
        "years_employed": years_employed,
        "occupation_sector": occupation_sector,
        "weekly_hours": hours,
        "second_job": second_job,
        "water_source": water_source,
        "sanitation": sanitation,
        "electricity": electricity,
        "floor_material": floor_material,
        "roof_material": roof_material,
        "rooms": rooms,
        "owns_fridge": owns_fridge,
        "owns_vehicle": owns_vehicle,
        "owns_computer": owns_computer,
        "internet_access": internet_access,
        "livestock_count": livestock_count,
        "owns_land": owns_land,
        "phones_count": phones_count,
    }
    maskable = [
        "marital_status", "literate", "occupation_sector", "water_source", "sanitation",
        "electricity", "floor_material", "roof_material", "rooms", "owns_fridge",
        "owns_vehicle", "owns_computer", "internet_access", "livestock_count",
        "owns_land", "phones_count",
    ]
    ofi = np.where(
        formal == 1.0,
        np.maximum(np.round(income * household_size * 0.55 + rng.normal(0.0, 20.0, n), 2), 0.0),
        np.nan,
    )
    return features, income, ofi, maskable, 0.02


def _generate_small(rng: np.random.Generator, n: int):
    age = np.minimum(np.round(rng.gamma(2.0, 16.0, n)), 92.0)
    household_size = np.minimum(1.0 + rng.poisson(2.5, n), 10.0)
    formal = (rng.random(n) < 0.4).astype(float)
    years_employed = np.round(
        np.clip(rng.normal((age - 15.0) * 0.4 * formal + 2.0, 3.0, n), 0.0, 60.0)
    )
    wealth = rng.normal(0.0, 0.8, n) + 0.5 * formal
    piped = rng.random(n) < _sigmoid(1.2 * wealth + 0.1)
    alt = _pick(rng, ("river", "well"), np.tile([0.4, 0.6], (n, 1)))
    water_source = np.where(piped, "piped", alt)
    rooms = np.clip(np.round(2.0 + 1.1 * wealth + rng.normal(0.0, 1.0, n)), 1.0, 8.0)
    owns_fridge = (rng.random(n) < _sigmoid(1.4 * wealth + 0.3)).astype(float)
    livestock_count = np.where(piped, rng.poisson(0.3, n), rng.poisson(1.5, n)).astype(float)

    income = (
        30.0
        + 50.0 * formal
        + 1.9 * years_employed
        + 3.0 * rooms
        + 9.0 * owns_fridge
        + 0.8 * livestock_count
        - 1.5 * (household_size - 1.0)
        + rng.normal(0.0, 18.0, n)
    )
    income = np.round(np.maximum(income, 5.0), 2)

    features = {
        "age": age,
        "household_size": household_size,
        "formal_activity": formal,
        "years_employed": years_employed,
        "water_source": water_source,
        "rooms": rooms,
        "owns_fridge": owns_fridge,
        "livestock_count": livestock_count,
    }
    maskable = ["water_source", "rooms", "livestock_count"]
    ofi = np.where(
        formal == 1.0,
        np.maximum(np.round(income * household_size * 0.5 + rng.normal(0.0, 15.0, n), 2), 0.0),
        np.nan,
    )
    return features, income, ofi, maskable, 0.03


def _age_formal_rule(bands: list[tuple[str, float, float]], dependents: list[str]) -> dict:
    cells = []
    for label, lo, hi in bands:
        for suffix, code in (("informal", "0"), ("formal", "1")):
            cells.append(
                {
                    "label": f"{label}_{suffix}",
                    "when": {"age": {"lo": lo, "hi": hi}, "formal_activity": {"in": [code]}},
                }
            )
    return {"drivers": ["age", "formal_activity"], "partition": cells, "dependents": dependents}


_FULL_FEATURES = [
    ("age", "numeric", "sociodemographic", "years"),
    ("schooling_years", "numeric", "sociodemographic", "years"),
    ("household_size", "numeric", "sociodemographic", None),
    ("n_children", "numeric", "sociodemographic", None),
    ("marital_status", "categorical", "sociodemographic", None),
    ("literate", "boolean", "sociodemographic", None),
    ("formal_activity", "boolean", "occupation", None),
    ("years_employed", "numeric", "occupation", "years"),
    ("occupation_sector", "categorical", "occupation", None),
    ("weekly_hours", "numeric", "occupation", "hours"),
    ("second_job", "boolean", "occupation", None),
    ("water_source", "categorical", "housing_services", None),
    ("sanitation", "categorical", "housing_services", None),
    ("electricity", "boolean", "housing_services", None),
    ("floor_material", "categorical", "housing_services", None),
    ("roof_material", "categorical", "housing_services", None),
    ("rooms", "numeric", "housing_services", None),
    ("owns_fridge", "boolean", "assets", None),
    ("owns_vehicle", "boolean", "assets", None),
    ("owns_computer", "boolean", "assets", None),
    ("internet_access", "boolean", "assets", None),
    ("livestock_count", "numeric", "assets", None),
    ("owns_land", "boolean", "assets", None),
    ("phones_count", "numeric", "assets", None),
]

_SMALL_FEATURES = [
    ("age", "numeric", "sociodemographic", "years"),
    ("household_size", "numeric", "sociodemographic", None),
    ("formal_activity", "boolean", "occupation", None),
    ("years_employed", "numeric", "occupation", "years"),
    ("water_source", "categorical", "housing_services", None),
    ("rooms", "numeric", "housing_services", None),
    ("owns_fridge", "boolean", "assets", None),
    ("livestock_count", "numeric", "assets", None),
]

_GROUPS = [
    {"id": "sociodemographic", "label": "Sociodemographic"},
    {"id": "occupation", "label": "Occupation"},
    {"id": "housing_services", "label": "Housing and services"},
    {"id": "assets", "label": "Assets"},
]


def _schema_doc(profile: str, poverty_line: float) -> dict:
    if profile == "full":
        decls = _FULL_FEATURES
        rule = _age_formal_rule(
            [("child", 0, 15), ("young", 15, 30), ("adult", 30, 60), ("senior", 60, 200)],
            ["schooling_years", "years_employed", "weekly_hours", "second_job"],
        )
    else:
        decls = _SMALL_FEATURES
        rule = _age_formal_rule([("under40", 0, 40), ("over40", 40, 200)], ["years_employed"])
    features = []
    for name, kind, group, unit in decls:
        f: dict = {"name": name, "kind": kind, "group": group}
        if unit is not None:
            f["unit"] = unit
        features.append(f)
    return {
        "schema_version": 1,
        "missing_sentinel": "",
        "poverty_line": poverty_line,
        "groups": _GROUPS,
        "features": features,
        "conditionalities": [rule],
    }


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    x = float(v)
    if x.is_integer():
        return str(int(x))
    return f"{x:.2f}"


def synthesize(
    out_dir: str | Path, profile: str = "full", n: int | None = None, seed: int = 0
) -> SynthResult:
    """Write households.csv, schema.json and focals.json into out_dir."""
    if profile not in PROFILES:
        raise InvalidParams(f"unknown profile {profile!r}; choose from {PROFILES}")
    if n is None:
        n = DEFAULT_ROWS[profile]
    if n < 60:
        raise InvalidParams(f"need at least 60 rows to populate every partition cell, got {n}")

    rng = np.random.default_rng(seed)
    gen = _generate_full if profile == "full" else _generate_small
    features, income, ofi, maskable, miss_rate = gen(rng, n)

    # observational missingness, applied after income so the signal stays intact
    masked: dict[str, np.ndarray] = {}
    for name in maskable:
        masked[name] = rng.random(n) < miss_rate

    complete = np.ones(n, dtype=bool)
    for name in maskable:
        complete &= ~masked[name]

    names = list(features)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "households.csv"
    schema_path = out_dir / "schema.json"
    focals_path = out_dir / "focals.json"

    start = datetime.date(2023, 5, 1)
    with csv_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["household_id", "collection_date", "observed_formal_income", "income"] + names)
        for i in range(n):
            row = [
                f"HH{i:05d}",
                (start + datetime.timedelta(days=(i * 397) % 365)).isoformat(),
                "" if np.isnan(ofi[i]) else _fmt(ofi[i]),
                f"{income[i]:.2f}",
            ]
            for name in names:
                if name in masked and masked[name][i]:
                    row.append("")
                else:
                    row.append(_fmt(features[name][i]))
            writer.writerow(row)

    poverty_line = round(float(np.quantile(income, 0.32 if profile == "full" else 0.35)), 2)
    schema_path.write_text(
        json.dumps(_schema_doc(profile, poverty_line), indent=1) + "\n", encoding="utf-8"
    )

    want = FOCAL_COUNTS[profile]
    pool = np.flatnonzero(complete)
    chosen = np.sort(rng.choice(pool, size=min(want, pool.size), replace=False))
    focals_path.write_text(
        json.dumps({"household_ids": [f"HH{i:05d}" for i in chosen]}, indent=1) + "\n",
        encoding="utf-8",
    )

    return SynthResult(
        csv_path=csv_path,
        schema_path=schema_path,
        focals_path=focals_path,
        profile=profile,
        n=n,
        d=len(names),
        poverty_line=poverty_line,
    )
