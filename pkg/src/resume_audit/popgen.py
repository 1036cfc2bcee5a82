"""Population-representative profile sampling.

The joint applicant distribution per occupation factorizes into four stages
sampled ancestrally: demographics and education from an employment-survey
style table (stage 1), years of experience from a truncated-normal model fit
on panel-style rows reweighted by density-ratio matching (stage 2), first
names conditioned on gender and birth cohort (stage 3), and surnames
conditioned on race (stage 4).

Sampling is deterministic per record: record i consumes exactly four uniforms
from a substream derived from (seed, i), so batches are reproducible and
order-independent.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from .sfm import (AGE_COHORTS, FirstNameTable, SurnameTable, age_cohort,
                  load_first_name_table, load_surname_table)

AGE_MIN, AGE_MAX = 18, 44
WEIGHT_CLIP = (0.01, 100.0)
SIGMA_MIN_CELL_WEIGHT = 30.0
SIGMA_FLOOR = 0.05

EDU_ORDER = ("HS/GED", "Some college", "Associate", "Bachelor", "Master",
             "Professional", "Doctorate")


class PopGenError(ValueError):
    pass


@dataclass(frozen=True)
class Profile:
    """Structured applicant record."""

    id: int
    gender: str
    race: str
    age: int
    state: str
    edu_level: str
    exp_year: float
    first_name: str
    surname: str
    job: str

    def __post_init__(self):
        if not AGE_MIN <= self.age <= AGE_MAX:
            raise PopGenError(f"age {self.age} outside [{AGE_MIN}, {AGE_MAX}]")
        if not 0.0 <= self.exp_year <= self.age - AGE_MIN:
            raise PopGenError(
                f"exp_year {self.exp_year} outside [0, {self.age - AGE_MIN}]"
            )

    def as_dict(self) -> dict:
        return {
            "id": self.id, "gender": self.gender, "race": self.race,
            "age": self.age, "state": self.state, "edu_level": self.edu_level,
            "exp_year": self.exp_year, "first_name": self.first_name,
            "surname": self.surname, "job": self.job,
        }


# ---------------------------------------------------------------------------
# Source bundle
# ---------------------------------------------------------------------------

_PUMS_COLUMNS = ("gender", "race", "age", "state", "edu_level", "job", "employed")
_PANEL_COLUMNS = ("gender", "race", "age", "state", "edu_level", "job", "exp_year")


@dataclass
class SourceBundle:
    pums_rows: list[dict]
    panel_rows: list[dict]
    first_names: FirstNameTable
    surnames: SurnameTable

    def check_consistency(self) -> None:
        """Schema compatibility between the sources (the only enforcement
        available for the assumption that the sources are mutually
        consistent)."""
        pums_jobs = {r["job"] for r in self.pums_rows}
        panel_jobs = {r["job"] for r in self.panel_rows}
        if not pums_jobs & panel_jobs:
            raise PopGenError("survey and panel sources share no occupation codes")


def _read_csv(path, required: Sequence[str], numeric: Sequence[str]) -> list[dict]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not set(required).issubset(reader.fieldnames):
            raise PopGenError(f"{path}: expected columns {list(required)}")
        for rec in reader:
            row = dict(rec)
            for col in numeric:
                row[col] = float(rec[col])
            row["age"] = int(float(rec["age"]))
            rows.append(row)
    return rows


def load_source_bundle(pums_path, panel_path, first_names_path,
                       surnames_path) -> SourceBundle:
    bundle = SourceBundle(
        pums_rows=_read_csv(pums_path, _PUMS_COLUMNS, numeric=("employed",)),
        panel_rows=_read_csv(panel_path, _PANEL_COLUMNS, numeric=("exp_year",)),
        first_names=load_first_name_table(first_names_path),
        surnames=load_surname_table(surnames_path),
    )
    bundle.check_consistency()
    return bundle


# ---------------------------------------------------------------------------
# Stage 1: empirical demographic sampler
# ---------------------------------------------------------------------------


class P1Sampler:
    """Uniform-with-replacement sampler over eligible survey rows."""

    def __init__(self, rows: list[dict], job: str):
        self.job = job
        self.rows = [
            r for r in rows
            if r["job"] == job and r["employed"] > 0
            and AGE_MIN <= r["age"] <= AGE_MAX
        ]
        if not self.rows:
            raise PopGenError(f"no eligible survey rows for occupation {job!r}")

    def __len__(self) -> int:
        return len(self.rows)

    def pick(self, u: np.ndarray) -> list[dict]:
        idx = np.minimum((np.asarray(u) * len(self.rows)).astype(int),
                         len(self.rows) - 1)
        return [self.rows[i] for i in idx]

    def marginal(self, column: str) -> dict:
        counts: dict = {}
        for r in self.rows:
            counts[r[column]] = counts.get(r[column], 0) + 1
        total = len(self.rows)
        return {k: v / total for k, v in counts.items()}


def build_p1_sampler(pums_rows: list[dict], job: str) -> P1Sampler:
    return P1Sampler(pums_rows, job)


# ---------------------------------------------------------------------------
# Stage 2: density-ratio weights and the experience model
# ---------------------------------------------------------------------------


class CovariateEncoder:
    """One-hot design over the demographic covariates shared by the sources.

    Education additionally carries its ordinal band code.
    """

    def __init__(self, rows: Iterable[Mapping]):
        rows = list(rows)
        self.genders = sorted({r["gender"] for r in rows})
        self.races = sorted({r["race"] for r in rows})
        self.states = sorted({r["state"] for r in rows})
        self.edu_levels = [e for e in EDU_ORDER if
                           e in {r["edu_level"] for r in rows}]
        self.jobs = sorted({r["job"] for r in rows})

    def encode(self, rows: Iterable[Mapping]) -> np.ndarray:
        rows = list(rows)
        cols = []
        for levels, key in ((self.genders, "gender"), (self.races, "race")):
            for lev in levels:
                cols.append([1.0 if r[key] == lev else 0.0 for r in rows])
        cols.append([float(r["age"]) for r in rows])
        for lev in self.states:
            cols.append([1.0 if r["state"] == lev else 0.0 for r in rows])
        for lev in self.edu_levels:
            cols.append([1.0 if r["edu_level"] == lev else 0.0 for r in rows])
        cols.append([
            float(self.edu_levels.index(r["edu_level"]))
            if r["edu_level"] in self.edu_levels else -1.0
            for r in rows
        ])
        for lev in self.jobs:
            cols.append([1.0 if r["job"] == lev else 0.0 for r in rows])
        return np.column_stack(cols)

    def encode_ratio(self, rows: Iterable[Mapping]) -> np.ndarray:
        """Covariates for source discrimination: demographics + edu + job,
        without state (the panel geography is not trusted)."""
        rows = list(rows)
        cols = []
        for levels, key in ((self.genders, "gender"), (self.races, "race")):
            for lev in levels:
                cols.append([1.0 if r[key] == lev else 0.0 for r in rows])
        cols.append([float(r["age"]) for r in rows])
        for lev in self.edu_levels:
            cols.append([1.0 if r["edu_level"] == lev else 0.0 for r in rows])
        for lev in self.jobs:
            cols.append([1.0 if r["job"] == lev else 0.0 for r in rows])
        return np.column_stack(cols)


def density_ratio_weights(panel_rows: list[dict], pums_rows: list[dict],
                          learner_factory, encoder: CovariateEncoder | None = None
                          ) -> np.ndarray:
    """Per-panel-row weights matching the panel toward the survey population.

    A probabilistic classifier distinguishes the sources; the weight is the
    implied target/source density ratio, normalized to mean one and clipped.
    """
    if not panel_rows or not pums_rows:
        raise PopGenError("density ratio matching needs rows from both sources")
    encoder = encoder or CovariateEncoder(list(panel_rows) + list(pums_rows))
    x = np.vstack([
        encoder.encode_ratio(panel_rows), encoder.encode_ratio(pums_rows)
    ])
    labels = np.concatenate([
        np.zeros(len(panel_rows), dtype=int), np.ones(len(pums_rows), dtype=int)
    ])
    clf = learner_factory.classifier(x, labels)
    proba = clf.predict_proba(encoder.encode_ratio(panel_rows))
    idx = list(np.asarray(clf.classes_)).index(1)
    p_target = np.clip(proba[:, idx], 1e-6, 1 - 1e-6)
    ratio = (p_target / (1 - p_target)) * (len(panel_rows) / len(pums_rows))
    ratio = ratio / ratio.mean()
    return np.clip(ratio, *WEIGHT_CLIP)


@dataclass
class ExperienceModel:
    """Truncated-normal experience model: mean regressor plus a hierarchical
    residual-sd table with (age band, gender, job) -> (gender, job) -> (job)
    -> global fallbacks.  Support is always [0, age - 18]."""

    regressor: object
    encoder: CovariateEncoder
    sigma_cells: dict
    sigma_gender_job: dict
    sigma_job: dict
    sigma_global: float
    min_cell_weight: float = SIGMA_MIN_CELL_WEIGHT

    def mean(self, rows: Iterable[Mapping]) -> np.ndarray:
        return self.regressor.predict(self.encoder.encode(list(rows)))

    def sigma(self, row: Mapping) -> float:
        band = age_cohort(int(row["age"]))
        for table, key in (
            (self.sigma_cells, (band, row["gender"], row["job"])),
            (self.sigma_gender_job, (row["gender"], row["job"])),
            (self.sigma_job, (row["job"],)),
        ):
            if key in table:
                return table[key]
        return self.sigma_global


def _weighted_sd(values: np.ndarray, weights: np.ndarray) -> float:
    mean = np.average(values, weights=weights)
    var = np.average((values - mean) ** 2, weights=weights)
    return float(max(np.sqrt(var), SIGMA_FLOOR))


def fit_experience_model(panel_rows: list[dict], weights: np.ndarray,
                         learner_factory,
                         min_cell_weight: float = SIGMA_MIN_CELL_WEIGHT
                         ) -> ExperienceModel:
    """Weighted regression of experience on the covariates plus the
    hierarchical residual-sd table.  Cells with fewer effective rows than
    min_cell_weight defer to their parent level."""
    if not panel_rows:
        raise PopGenError("empty panel")
    weights = np.asarray(weights, dtype=float)
    if len(weights) != len(panel_rows):
        raise PopGenError("weights do not align with the panel rows")
    encoder = CovariateEncoder(panel_rows)
    x = encoder.encode(panel_rows)
    y = np.array([float(r["exp_year"]) for r in panel_rows])
    reg = learner_factory.regressor(x, y, sample_weight=weights)
    resid = y - reg.predict(x)

    def cells(keyfn):
        groups: dict = {}
        for i, row in enumerate(panel_rows):
            groups.setdefault(keyfn(row), []).append(i)
        out = {}
        for key, idx in groups.items():
            idx = np.asarray(idx)
            if weights[idx].sum() >= min_cell_weight:
                out[key] = _weighted_sd(resid[idx], weights[idx])
        return out

    sigma_cells = cells(lambda r: (age_cohort(int(r["age"])), r["gender"], r["job"]))
    sigma_gender_job = cells(lambda r: (r["gender"], r["job"]))
    sigma_job = cells(lambda r: (r["job"],))
    return ExperienceModel(
        regressor=reg, encoder=encoder,
        sigma_cells=sigma_cells, sigma_gender_job=sigma_gender_job,
        sigma_job=sigma_job, sigma_global=_weighted_sd(resid, weights),
        min_cell_weight=min_cell_weight,
    )


def truncnorm_transform(u, mu, sd, lo, hi):
    """Inverse-CDF map of uniforms onto TruncNormal(mu, sd, [lo, hi]).

    Never rejects; degenerate windows collapse to the nearer bound.
    """
    u = np.asarray(u, dtype=float)
    mu = np.asarray(mu, dtype=float)
    sd = np.asarray(sd, dtype=float)
    lo_b = np.broadcast_to(np.asarray(lo, dtype=float), u.shape)
    hi_b = np.broadcast_to(np.asarray(hi, dtype=float), u.shape)
    fa = ndtr((lo_b - mu) / sd)
    fb = ndtr((hi_b - mu) / sd)
    span = fb - fa
    inner = np.clip(fa + u * span, 1e-300, 1 - 1e-16)
    x = mu + sd * ndtri(inner)
    x = np.where(span < 1e-12, np.where(mu < lo_b, lo_b, hi_b), x)
    return np.clip(x, lo_b, hi_b)


def truncnorm_moments(mu: float, sd: float, lo: float, hi: float) -> tuple[float, float]:
    """Closed-form mean and variance of TruncNormal(mu, sd, [lo, hi])."""
    a = (lo - mu) / sd
    b = (hi - mu) / sd
    z = ndtr(b) - ndtr(a)
    phi = lambda t: np.exp(-0.5 * t * t) / np.sqrt(2 * np.pi)
    mean = mu + sd * (phi(a) - phi(b)) / z
    var = sd**2 * (1 + (a * phi(a) - b * phi(b)) / z - ((phi(a) - phi(b)) / z) ** 2)
    return float(mean), float(var)


def sample_experience(row: Mapping, model: ExperienceModel,
                      rng: np.random.Generator) -> float:
    """One truncated-normal experience draw for a profile-like row."""
    age = int(row["age"])
    if age < AGE_MIN:
        raise PopGenError(f"age {age} below {AGE_MIN}")
    m_support = float(age - AGE_MIN)
    u = rng.random()
    if m_support <= 0.0:
        return 0.0
    mu = float(model.mean([row])[0])
    sd = model.sigma(row)
    return float(truncnorm_transform(np.array([u]), mu, sd, 0.0, m_support)[0])


# ---------------------------------------------------------------------------
# Stages 3-4: name sampling
# ---------------------------------------------------------------------------

RACE_SHARE_KEYS = {"White": "white", "Black": "black", "Asian": "asian",
                   "Other": "other"}


def sample_first_name(table: FirstNameTable, gender: str, age: int,
                      rng: np.random.Generator,
                      counters: dict | None = None) -> str:
    """Categorical draw over the (gender, birth-cohort) name slice.

    An empty slice falls back to the gender-only slice and bumps the
    diagnostic counter.
    """
    u = rng.random()
    cohort = age_cohort(age)
    names, counts = table.names_for(gender, cohort)
    if not names:
        if counters is not None:
            counters["first_name_cohort_fallback"] = (
                counters.get("first_name_cohort_fallback", 0) + 1
            )
        names, counts = table.names_for_gender(gender)
    if not names:
        raise PopGenError(f"no first names available for gender {gender!r}")
    cdf = np.cumsum(counts) / counts.sum()
    return names[int(np.searchsorted(cdf, u, side="right"))]


def sample_surname(table: SurnameTable, race: str, rng: np.random.Generator,
                   counters: dict | None = None) -> str:
    """Categorical draw over surnames weighted by the race's share."""
    u = rng.random()
    key = RACE_SHARE_KEYS.get(race, "other")
    names, weights = table.names_for_race(key)
    if not names:
        if counters is not None:
            counters["surname_race_fallback"] = (
                counters.get("surname_race_fallback", 0) + 1
            )
        names, weights = table.all_names()
    if not names:
        raise PopGenError("surname table is empty")
    cdf = np.cumsum(weights) / weights.sum()
    return names[int(np.searchsorted(cdf, u, side="right"))]


# ---------------------------------------------------------------------------
# Full ancestral sampler
# ---------------------------------------------------------------------------

_DRAWS_PER_RECORD = 4  # p1 row, experience, first name, surname


def record_uniforms(seed: int, start: int, n: int) -> np.ndarray:
    """The four canonical uniforms of records start..start+n-1, shape (n, 4)."""
    out = np.empty((n, _DRAWS_PER_RECORD))
    for i in range(n):
        rng = np.random.default_rng(np.random.SeedSequence((seed, start + i)))
        out[i] = rng.random(_DRAWS_PER_RECORD)
    return out


def sample_profiles(job: str, n: int, sources: SourceBundle,
                    model: ExperienceModel, seed: int, id_start: int = 0,
                    counters: dict | None = None) -> list[Profile]:
    """Ancestral sampling of n profiles for one occupation.

    Record i consumes the substream derived from (seed, id_start + i); output
    is independent of batching or scheduling.
    """
    if n == 0:
        return []
    sampler = build_p1_sampler(sources.pums_rows, job)
    u = record_uniforms(seed, id_start, n)
    base_rows = sampler.pick(u[:, 0])

    mu = model.mean(base_rows)
    sd = np.array([model.sigma(r) for r in base_rows])
    support = np.array([float(r["age"] - AGE_MIN) for r in base_rows])
    exp = truncnorm_transform(u[:, 1], mu, sd, 0.0, support)
    exp = np.where(support <= 0, 0.0, exp)

    profiles = []
    for i, row in enumerate(base_rows):
        first = sample_first_name(
            sources.first_names, row["gender"], int(row["age"]),
            _FixedUniform(u[i, 2]), counters=counters,
        )
        sur = sample_surname(
            sources.surnames, row["race"], _FixedUniform(u[i, 3]),
            counters=counters,
        )
        profiles.append(Profile(
            id=id_start + i, gender=row["gender"], race=row["race"],
            age=int(row["age"]), state=row["state"],
            edu_level=row["edu_level"], exp_year=float(exp[i]),
            first_name=first, surname=sur, job=job,
        ))
    return profiles


class _FixedUniform:
    """Generator stub replaying one already-drawn uniform."""

    def __init__(self, value: float):
        self.value = float(value)

    def random(self):
        return self.value


# ---------------------------------------------------------------------------
# Residual diagnostic
# ---------------------------------------------------------------------------

QQ_GRID = np.arange(1, 100) / 100.0


def qq_residuals(panel_rows: list[dict], model: ExperienceModel) -> np.ndarray:
    """(theoretical, empirical) standard-normal quantile pairs of the
    standardized experience residuals, on the interior percentile grid.

    The grid stops at the 1st/99th percentiles: extreme order statistics are
    too variable to carry a stable plot or test band.
    """
    if len(panel_rows) < 10:
        raise PopGenError("need at least 10 residuals for the Q-Q diagnostic")
    y = np.array([float(r["exp_year"]) for r in panel_rows])
    resid = (y - model.mean(panel_rows)) / np.array(
        [model.sigma(r) for r in panel_rows]
    )
    theoretical = ndtri(QQ_GRID)
    empirical = np.quantile(resid, QQ_GRID)
    return np.column_stack([theoretical, empirical])
