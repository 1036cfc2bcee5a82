"""Fairness-model data representation: variable roles, the analysis table,
and the categorical grouping transforms applied before estimation.

Variables are partitioned into a binary protected attribute X (after contrast
selection), confounders Z, business-necessity mediators B, redlining-proxy
mediators R, and a real-valued outcome Y.  High-cardinality columns (names,
state, education level) are grouped into small label sets before any nuisance
model sees them; raw values stay on the profile records for rendering.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np


class SfmError(ValueError):
    pass


class GroupingError(ValueError):
    pass


class Role(str, Enum):
    PROTECTED = "protected"
    CONFOUNDER = "confounder"
    BUSINESS = "business_mediator"
    REDLINING = "redlining_mediator"
    OUTCOME = "outcome"


# block order used by every design matrix: Z, then R, then B
_BLOCK_ORDER = (Role.CONFOUNDER, Role.REDLINING, Role.BUSINESS)


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    role: Role
    kind: str  # "categorical", "ordinal" or "real"
    levels: tuple = ()

    def __post_init__(self):
        if self.kind not in ("categorical", "ordinal", "real"):
            raise SfmError(f"unknown column kind {self.kind!r}")
        if self.kind != "real" and len(self.levels) == 0:
            raise SfmError(f"column {self.name!r} has no levels")


@dataclass(frozen=True)
class SfmTable:
    """Validated role-tagged table over a binary protected-attribute contrast.

    x holds 0 for the x0 arm and 1 for the x1 arm; categorical columns are
    stored as integer level codes.  Immutable after construction.
    """

    x: np.ndarray
    y: np.ndarray
    x0: str
    x1: str
    columns: tuple[ColumnSpec, ...]
    data: dict[str, np.ndarray]
    n_dropped: int = 0

    def __post_init__(self):
        if self.x.ndim != 1 or self.y.ndim != 1 or len(self.x) != len(self.y):
            raise SfmError("x and y must be aligned vectors")
        if not np.all(np.isin(self.x, (0, 1))):
            raise SfmError("x must be binary over the contrast arms")
        if np.sum(self.x == 0) == 0:
            raise SfmError(f"empty arm x0={self.x0!r}")
        if np.sum(self.x == 1) == 0:
            raise SfmError(f"empty arm x1={self.x1!r}")
        if not np.all(np.isfinite(self.y)):
            raise SfmError("non-numeric or missing outcome values")
        for col in self.columns:
            if col.name not in self.data:
                raise SfmError(f"missing data for column {col.name!r}")
            if len(self.data[col.name]) != len(self.x):
                raise SfmError(f"column {col.name!r} length mismatch")

    @property
    def n(self) -> int:
        return len(self.x)

    def block(self, role: Role) -> tuple[ColumnSpec, ...]:
        return tuple(c for c in self.columns if c.role == role)

    def design(self, roles: Sequence[Role], x: int | str | None = None) -> np.ndarray:
        """Feature matrix over the given blocks, x indicator first when asked.

        x=None omits the protected column; x="actual" uses the observed arm;
        x=0 or x=1 overwrites the protected column with that arm
        (counterfactual feature substitution).  Categorical columns are
        one-hot encoded; ordinal columns additionally carry their level code.
        """
        cols = []
        if x is not None:
            if x == "actual":
                cols.append(self.x.astype(np.float64))
            elif x in (0, 1):
                cols.append(np.full(self.n, float(x)))
            else:
                raise SfmError(f"invalid x override {x!r}")
        for role in _BLOCK_ORDER:
            if role not in roles:
                continue
            for col in self.block(role):
                vals = self.data[col.name]
                if col.kind == "real":
                    cols.append(vals.astype(np.float64))
                else:
                    codes = vals.astype(np.int64)
                    for lev in range(len(col.levels)):
                        cols.append((codes == lev).astype(np.float64))
                    if col.kind == "ordinal":
                        cols.append(codes.astype(np.float64))
        return np.column_stack(cols)

    def subset(self, idx: np.ndarray) -> "SfmTable":
        return SfmTable(
            x=self.x[idx], y=self.y[idx], x0=self.x0, x1=self.x1,
            columns=self.columns,
            data={k: v[idx] for k, v in self.data.items()},
            n_dropped=0,
        )


def _infer_kind(values: list) -> str:
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float, np.integer, np.floating)):
            return "categorical"
    return "real"


def build_table(
    records: Iterable[Mapping],
    roles: Mapping[str, Role],
    contrast: tuple[str, str],
    kinds: Mapping[str, str] | None = None,
) -> SfmTable:
    """Assemble a validated SfmTable from role-tagged rows.

    Rows whose protected value is outside the contrast are dropped and
    counted.  Exactly one protected and one outcome column are required; the
    outcome must be numeric.
    """
    records = list(records)
    if not records:
        raise SfmError("no records")
    kinds = dict(kinds or {})
    names = list(records[0].keys())
    for rec in records:
        if set(rec.keys()) != set(names):
            raise SfmError("records do not share a schema")
    missing = [n for n in names if n not in roles]
    if missing:
        raise SfmError(f"missing role assignment for columns: {missing}")

    protected = [n for n in names if roles[n] == Role.PROTECTED]
    outcome = [n for n in names if roles[n] == Role.OUTCOME]
    if len(protected) != 1 or len(outcome) != 1:
        raise SfmError("need exactly one protected and one outcome column")
    x_name, y_name = protected[0], outcome[0]

    x0, x1 = contrast
    kept, dropped = [], 0
    for rec in records:
        if rec[x_name] == x0 or rec[x_name] == x1:
            kept.append(rec)
        else:
            dropped += 1
    if not kept:
        raise SfmError("all rows dropped by contrast selection")

    x = np.array([0 if rec[x_name] == x0 else 1 for rec in kept], dtype=np.int8)
    try:
        y = np.array([float(rec[y_name]) for rec in kept], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise SfmError(f"non-numeric outcome: {exc}") from exc

    columns, data = [], {}
    for name in names:
        if name in (x_name, y_name):
            continue
        values = [rec[name] for rec in kept]
        kind = kinds.get(name) or _infer_kind(values)
        if kind == "real":
            data[name] = np.array([float(v) for v in values])
            columns.append(ColumnSpec(name, roles[name], "real"))
        else:
            levels = tuple(sorted(set(str(v) for v in values)))
            index = {lev: i for i, lev in enumerate(levels)}
            data[name] = np.array([index[str(v)] for v in values], dtype=np.int64)
            columns.append(ColumnSpec(name, roles[name], kind, levels))

    return SfmTable(
        x=x, y=y, x0=str(x0), x1=str(x1),
        columns=tuple(columns), data=data, n_dropped=dropped,
    )


# ---------------------------------------------------------------------------
# Grouping of high-cardinality attributes
# ---------------------------------------------------------------------------

REFERENCE_YEAR = 2023

# age bands over the audited 18..44 range, by age at the reference year
AGE_COHORTS = (("young", 18, 26), ("mid", 27, 35), ("old", 36, 44))

EDU_BAND_MAP = {
    "HS/GED": "low",
    "Some college": "low",
    "Associate": "medium",
    "Bachelor": "medium",
    "Master": "high",
    "Professional": "high",
    "Doctorate": "high",
}

_REGIONS = {
    "Northeast": ["CT", "ME", "MA", "NH", "RI", "VT", "NJ", "NY", "PA"],
    "Midwest": ["IL", "IN", "MI", "OH", "WI", "IA", "KS", "MN", "MO", "NE",
                "ND", "SD"],
    "South": ["DE", "FL", "GA", "MD", "NC", "SC", "VA", "DC", "WV", "AL",
              "KY", "MS", "TN", "AR", "LA", "OK", "TX"],
    "West": ["AZ", "CO", "ID", "MT", "NV", "NM", "UT", "WY", "AK", "CA",
             "HI", "OR", "WA"],
}
STATE_TO_REGION = {code: region for region, codes in _REGIONS.items() for code in codes}

STATE_NAMES = {
    "alabama": "AL", "alaska": "AK", "arizona": "AZ", "arkansas": "AR",
    "california": "CA", "colorado": "CO", "connecticut": "CT",
    "delaware": "DE", "district of columbia": "DC", "florida": "FL",
    "georgia": "GA", "hawaii": "HI", "idaho": "ID", "illinois": "IL",
    "indiana": "IN", "iowa": "IA", "kansas": "KS", "kentucky": "KY",
    "louisiana": "LA", "maine": "ME", "maryland": "MD",
    "massachusetts": "MA", "michigan": "MI", "minnesota": "MN",
    "mississippi": "MS", "missouri": "MO", "montana": "MT", "nebraska": "NE",
    "nevada": "NV", "new hampshire": "NH", "new jersey": "NJ",
    "new mexico": "NM", "new york": "NY", "north carolina": "NC",
    "north dakota": "ND", "ohio": "OH", "oklahoma": "OK", "oregon": "OR",
    "pennsylvania": "PA", "rhode island": "RI", "south carolina": "SC",
    "south dakota": "SD", "tennessee": "TN", "texas": "TX", "utah": "UT",
    "vermont": "VT", "virginia": "VA", "washington": "WA",
    "west virginia": "WV", "wisconsin": "WI", "wyoming": "WY",
}


@dataclass(frozen=True)
class GroupingConfig:
    """Thresholds and maps for the pre-estimation grouping transforms.

    Threshold comparisons are strict: a label is assigned only when its
    conditional probability exceeds the threshold, ties fall to neutral.
    """

    gender_typicality_threshold: float = 0.75
    age_typicality_threshold: float = 0.5
    surname_race_threshold: float = 0.5
    region_map: Mapping[str, str] = field(default_factory=lambda: STATE_TO_REGION)
    edu_band_map: Mapping[str, str] = field(default_factory=lambda: EDU_BAND_MAP)
    reference_year: int = REFERENCE_YEAR

    def __post_init__(self):
        if not 0.5 < self.gender_typicality_threshold <= 1.0:
            raise GroupingError("gender typicality threshold must be in (0.5, 1]")
        if not 1.0 / 3.0 < self.age_typicality_threshold <= 1.0:
            raise GroupingError("age typicality threshold must be in (1/3, 1]")
        if not 1.0 / 3.0 < self.surname_race_threshold <= 1.0:
            raise GroupingError("surname race threshold must be in (1/3, 1]")


def age_cohort(age: int) -> str:
    for label, lo, hi in AGE_COHORTS:
        if lo <= age <= hi:
            return label
    raise GroupingError(f"age {age} outside the audited 18..44 range")


class FirstNameTable:
    """Name frequency table: counts by (name, gender, birth_year)."""

    def __init__(self, rows: Iterable[tuple[str, str, int, float]],
                 reference_year: int = REFERENCE_YEAR):
        self.reference_year = reference_year
        self.by_name: dict[str, dict] = {}
        self.display: dict[str, str] = {}
        for name, gender, birth_year, count in rows:
            if count < 0:
                raise GroupingError(f"negative count for name {name!r}")
            key = name.strip().lower()
            gender = gender.strip().lower()
            if gender not in ("male", "female"):
                raise GroupingError(f"unknown gender {gender!r} in name table")
            entry = self.by_name.setdefault(key, {"gender": {}, "cohort": {}, "cells": {}})
            self.display.setdefault(key, name.strip())
            entry["gender"][gender] = entry["gender"].get(gender, 0.0) + count
            age = reference_year - int(birth_year)
            if 18 <= age <= 44:
                cohort = age_cohort(age)
                entry["cohort"][cohort] = entry["cohort"].get(cohort, 0.0) + count
                cell = (gender, cohort)
                entry["cells"][cell] = entry["cells"].get(cell, 0.0) + count

    def lookup(self, name: str) -> dict | None:
        return self.by_name.get(name.strip().lower())

    def names_for(self, gender: str, cohort: str) -> tuple[list[str], np.ndarray]:
        """Names and counts in the (gender, cohort) slice, for sampling."""
        names, counts = [], []
        for key, entry in self.by_name.items():
            c = entry["cells"].get((gender.lower(), cohort), 0.0)
            if c > 0:
                names.append(self.display[key])
                counts.append(c)
        return names, np.asarray(counts, dtype=np.float64)

    def names_for_gender(self, gender: str) -> tuple[list[str], np.ndarray]:
        names, counts = [], []
        for key, entry in self.by_name.items():
            c = entry["gender"].get(gender.lower(), 0.0)
            if c > 0:
                names.append(self.display[key])
                counts.append(c)
        return names, np.asarray(counts, dtype=np.float64)


class SurnameTable:
    """Surname table carrying race shares per name."""

    RACE_COLUMNS = ("white", "black", "asian", "other")

    def __init__(self, rows: Iterable[tuple[str, float, float, float, float]]):
        self.shares: dict[str, dict[str, float]] = {}
        self.display: dict[str, str] = {}
        for surname, p_white, p_black, p_asian, p_other in rows:
            shares = {"white": p_white, "black": p_black, "asian": p_asian,
                      "other": p_other}
            if any(v < 0 for v in shares.values()):
                raise GroupingError(f"negative share for surname {surname!r}")
            key = surname.strip().lower()
            self.shares[key] = shares
            self.display[key] = surname.strip()

    def lookup(self, name: str) -> dict[str, float] | None:
        return self.shares.get(name.strip().lower())

    def names_for_race(self, race_share_key: str) -> tuple[list[str], np.ndarray]:
        """Surnames weighted by the given race's share, for sampling."""
        names, weights = [], []
        for key, shares in self.shares.items():
            w = shares.get(race_share_key, 0.0)
            if w > 0:
                names.append(self.display[key])
                weights.append(w)
        return names, np.asarray(weights, dtype=np.float64)

    def all_names(self) -> tuple[list[str], np.ndarray]:
        names = [self.display[k] for k in self.shares]
        weights = np.array([sum(self.shares[k].values()) for k in self.shares])
        return names, weights


def group_first_name(table: FirstNameTable, name: str,
                     cfg: GroupingConfig | None = None) -> tuple[str, str]:
    """(gender typicality, age typicality) labels for a first name.

    The dominant gender label requires its conditional probability to exceed
    the gender threshold strictly; cohorts likewise against the age threshold.
    Unknown names map to (neutral, neutral).
    """
    cfg = cfg or GroupingConfig()
    entry = table.lookup(name)
    if entry is None:
        return ("neutral", "neutral")

    gender_label = "neutral"
    total = sum(entry["gender"].values())
    if total > 0:
        dominant = max(entry["gender"], key=entry["gender"].get)
        if entry["gender"][dominant] / total > cfg.gender_typicality_threshold:
            gender_label = dominant

    age_label = "neutral"
    total = sum(entry["cohort"].values())
    if total > 0:
        dominant = max(entry["cohort"], key=entry["cohort"].get)
        if entry["cohort"][dominant] / total > cfg.age_typicality_threshold:
            age_label = dominant

    return (gender_label, age_label)


def group_surname(table: SurnameTable, name: str,
                  cfg: GroupingConfig | None = None) -> str:
    """Race-typicality label for a surname: asian/black/white or neutral."""
    cfg = cfg or GroupingConfig()
    shares = table.lookup(name)
    if shares is None:
        return "neutral"
    total = sum(shares.values())
    if total <= 0:
        return "neutral"
    candidates = {race: shares[race] / total for race in ("asian", "black", "white")}
    dominant = max(candidates, key=candidates.get)
    if candidates[dominant] > cfg.surname_race_threshold:
        return dominant
    return "neutral"


def group_state(state: str, cfg: GroupingConfig | None = None) -> str:
    """Census-region label for a state given as USPS code or full name."""
    cfg = cfg or GroupingConfig()
    raw = state.strip()
    code = raw.upper() if len(raw) == 2 else STATE_NAMES.get(raw.lower(), "")
    region = cfg.region_map.get(code)
    if region is None:
        raise GroupingError(f"unknown state {state!r}")
    return region


def group_education(edu_level: str, cfg: GroupingConfig | None = None) -> str:
    """Three-band education label (low/medium/high) for the 7-level input."""
    cfg = cfg or GroupingConfig()
    band = cfg.edu_band_map.get(edu_level)
    if band is None:
        raise GroupingError(f"unknown education level {edu_level!r}")
    return band


# ---------------------------------------------------------------------------
# Loaders for the delimited frequency tables
# ---------------------------------------------------------------------------


def load_first_name_table(path, reference_year: int = REFERENCE_YEAR) -> FirstNameTable:
    """Load a (name, gender, birth_year, count) delimited file."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"name", "gender", "birth_year", "count"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise GroupingError(
                f"first-name table must carry columns {sorted(required)}"
            )
        for rec in reader:
            try:
                rows.append((rec["name"], rec["gender"], int(rec["birth_year"]),
                             float(rec["count"])))
            except (TypeError, ValueError) as exc:
                raise GroupingError(f"malformed first-name row {rec}: {exc}") from exc
    return FirstNameTable(rows, reference_year=reference_year)


def load_surname_table(path) -> SurnameTable:
    """Load a (surname, p_white, p_black, p_asian, p_other) delimited file."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"surname", "p_white", "p_black", "p_asian", "p_other"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise GroupingError(
                f"surname table must carry columns {sorted(required)}"
            )
        for rec in reader:
            try:
                rows.append((rec["surname"], float(rec["p_white"]),
                             float(rec["p_black"]), float(rec["p_asian"]),
                             float(rec["p_other"])))
            except (TypeError, ValueError) as exc:
                raise GroupingError(f"malformed surname row {rec}: {exc}") from exc
    return SurnameTable(rows)
