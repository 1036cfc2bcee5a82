"""Deterministic synthetic source tables.

The real survey, panel and name corpora are access-restricted; these
generators produce format-compatible stand-ins with plausible occupational
structure (gender/education/age composition varying by job, experience
growing with age) so the full pipeline can run and be tested end to end.
"""

from __future__ import annotations

import csv

import numpy as np

from .popgen import SourceBundle, truncnorm_transform
from .sfm import FirstNameTable, SurnameTable

OCCUPATIONS = (
    "registered_nurses",
    "elementary_middle_school_teachers",
    "software_developers",
    "accountants_auditors",
    "construction_laborers",
)

# per-occupation profile counts matching the shipped corpus definition
CORPUS_COUNTS = {
    "registered_nurses": 17632,
    "elementary_middle_school_teachers": 16188,
    "software_developers": 13370,
    "accountants_auditors": 7784,
    "construction_laborers": 5910,
}

_STATES = ["CA", "WA", "TX", "FL", "GA", "NY", "MA", "PA", "IL", "OH", "MN", "CO"]

_JOB_PROFILES = {
    "registered_nurses": {
        "p_male": 0.12,
        "race": {"White": 0.62, "Black": 0.14, "Asian": 0.12, "Other": 0.12},
        "edu": {"Associate": 0.28, "Bachelor": 0.52, "Master": 0.14,
                "Some college": 0.04, "Doctorate": 0.02},
        "age_tilt": 0.0,
        "state_tilt": {},
    },
    "elementary_middle_school_teachers": {
        "p_male": 0.24,
        "race": {"White": 0.70, "Black": 0.12, "Asian": 0.06, "Other": 0.12},
        "edu": {"Bachelor": 0.58, "Master": 0.36, "Some college": 0.02,
                "Associate": 0.02, "Doctorate": 0.02},
        "age_tilt": 0.2,
        "state_tilt": {"TX": 1.4, "FL": 1.2},
    },
    "software_developers": {
        "p_male": 0.78,
        "race": {"White": 0.50, "Black": 0.06, "Asian": 0.34, "Other": 0.10},
        "edu": {"Bachelor": 0.60, "Master": 0.30, "Some college": 0.04,
                "Associate": 0.03, "Doctorate": 0.03},
        "age_tilt": -0.5,
        "state_tilt": {"CA": 2.5, "WA": 2.0, "MA": 1.4},
    },
    "accountants_auditors": {
        "p_male": 0.42,
        "race": {"White": 0.64, "Black": 0.10, "Asian": 0.14, "Other": 0.12},
        "edu": {"Bachelor": 0.62, "Master": 0.24, "Associate": 0.08,
                "Some college": 0.04, "Professional": 0.02},
        "age_tilt": 0.1,
        "state_tilt": {"NY": 1.6, "IL": 1.3},
    },
    "construction_laborers": {
        "p_male": 0.93,
        "race": {"White": 0.52, "Black": 0.14, "Asian": 0.03, "Other": 0.31},
        "edu": {"HS/GED": 0.62, "Some college": 0.24, "Associate": 0.10,
                "Bachelor": 0.04},
        "age_tilt": -0.2,
        "state_tilt": {"TX": 1.6, "FL": 1.4},
    },
}

# (name, male count, female count, cohort) -- cohort tilts the birth years
_FIRST_NAMES = [
    ("James", 9000, 240, "old"), ("Michael", 9500, 260, "mid"),
    ("Robert", 7800, 150, "old"), ("David", 8200, 180, "mid"),
    ("William", 7000, 140, "old"), ("Gary", 3800, 60, "old"),
    ("Dennis", 3200, 50, "old"), ("Ethan", 6400, 170, "young"),
    ("Liam", 7200, 160, "young"), ("Noah", 6900, 200, "young"),
    ("Jacob", 6700, 190, "young"), ("Tyler", 5100, 420, "young"),
    ("Carlos", 4200, 90, "mid"), ("Miguel", 3900, 70, "mid"),
    ("Wei", 2100, 350, "mid"), ("Jamal", 2600, 60, "mid"),
    ("Darnell", 2300, 55, "mid"), ("Mary", 180, 8800, "old"),
    ("Linda", 90, 7600, "old"), ("Deborah", 70, 5400, "old"),
    ("Susan", 80, 6800, "old"), ("Jennifer", 210, 9200, "mid"),
    ("Jessica", 190, 8700, "mid"), ("Ashley", 260, 7900, "mid"),
    ("Amanda", 140, 6900, "mid"), ("Emily", 200, 8100, "young"),
    ("Emma", 170, 8400, "young"), ("Olivia", 150, 8000, "young"),
    ("Ava", 110, 7300, "young"), ("Mia", 120, 6800, "young"),
    ("Sophia", 130, 7700, "young"), ("Maria", 160, 7400, "mid"),
    ("Keisha", 40, 3100, "mid"), ("Latoya", 30, 2800, "mid"),
    ("Mei", 60, 2400, "mid"), ("Priya", 45, 2600, "young"),
    ("Taylor", 3600, 4100, "young"), ("Jordan", 4300, 3500, "young"),
    ("Casey", 2700, 3000, "mid"), ("Riley", 2500, 2900, "young"),
    ("Morgan", 2300, 3100, "mid"), ("Avery", 1900, 2400, "young"),
    ("Quinn", 1500, 1700, "young"), ("Skyler", 1200, 1400, "young"),
    ("Jesse", 3100, 2300, "mid"), ("Angel", 2600, 2200, "young"),
]

_COHORT_YEARS = {"young": (2003, 1999), "mid": (1994, 1990), "old": (1985, 1981)}

# synthetic race-share table (white, black, asian, other)
_SURNAMES = [
    ("Olson", 0.93, 0.01, 0.01, 0.05), ("Schmidt", 0.94, 0.01, 0.01, 0.04),
    ("Meyer", 0.92, 0.02, 0.01, 0.05), ("Novak", 0.93, 0.01, 0.01, 0.05),
    ("Sullivan", 0.90, 0.04, 0.01, 0.05), ("Becker", 0.93, 0.01, 0.01, 0.05),
    ("Larsen", 0.94, 0.01, 0.01, 0.04), ("Snyder", 0.92, 0.02, 0.01, 0.05),
    ("Walsh", 0.91, 0.03, 0.01, 0.05), ("Koch", 0.93, 0.01, 0.01, 0.05),
    ("Yoder", 0.97, 0.01, 0.01, 0.01), ("Mueller", 0.95, 0.01, 0.01, 0.03),
    ("Washington", 0.05, 0.88, 0.01, 0.06), ("Jefferson", 0.18, 0.74, 0.01, 0.07),
    ("Booker", 0.28, 0.64, 0.01, 0.07), ("Gaines", 0.32, 0.60, 0.01, 0.07),
    ("Pierre", 0.12, 0.78, 0.02, 0.08), ("Okafor", 0.03, 0.92, 0.01, 0.04),
    ("Nguyen", 0.02, 0.01, 0.94, 0.03), ("Tran", 0.02, 0.01, 0.94, 0.03),
    ("Kim", 0.03, 0.01, 0.93, 0.03), ("Chen", 0.02, 0.01, 0.95, 0.02),
    ("Wong", 0.04, 0.01, 0.91, 0.04), ("Patel", 0.02, 0.01, 0.93, 0.04),
    ("Zhang", 0.02, 0.01, 0.95, 0.02), ("Choi", 0.03, 0.01, 0.93, 0.03),
    ("Le", 0.06, 0.01, 0.89, 0.04), ("Huang", 0.02, 0.01, 0.95, 0.02),
    ("Garcia", 0.06, 0.01, 0.01, 0.92), ("Rodriguez", 0.05, 0.01, 0.01, 0.93),
    ("Martinez", 0.06, 0.01, 0.01, 0.92), ("Rivera", 0.06, 0.02, 0.01, 0.91),
    ("Lopez", 0.05, 0.01, 0.01, 0.93), ("Hernandez", 0.04, 0.01, 0.01, 0.94),
    ("Smith", 0.73, 0.22, 0.01, 0.04), ("Johnson", 0.61, 0.33, 0.01, 0.05),
    ("Brown", 0.60, 0.34, 0.01, 0.05), ("Jones", 0.58, 0.36, 0.01, 0.05),
    ("Davis", 0.65, 0.29, 0.01, 0.05), ("Miller", 0.86, 0.09, 0.01, 0.04),
    ("Wilson", 0.69, 0.24, 0.02, 0.05), ("Moore", 0.69, 0.25, 0.01, 0.05),
    ("Lee", 0.40, 0.16, 0.38, 0.06), ("Jackson", 0.42, 0.51, 0.01, 0.06),
    ("Williams", 0.49, 0.45, 0.01, 0.05), ("Taylor", 0.67, 0.27, 0.01, 0.05),
]


def first_name_rows() -> list[tuple[str, str, int, float]]:
    """(name, gender, birth_year, count) rows for the fixture name table."""
    rows = []
    for name, male, female, cohort in _FIRST_NAMES:
        y_major, y_minor = _COHORT_YEARS[cohort]
        for gender, count in (("male", male), ("female", female)):
            rows.append((name, gender, y_major, count * 0.75))
            rows.append((name, gender, y_minor, count * 0.10))
            # thin spread into the other cohorts so every slice is populated
            for other in _COHORT_YEARS:
                if other != cohort:
                    rows.append((name, gender, _COHORT_YEARS[other][0],
                                 count * 0.075))
    return rows


def surname_rows() -> list[tuple[str, float, float, float, float]]:
    return [tuple(r) for r in _SURNAMES]


def _pick(rng, mapping):
    keys = list(mapping)
    probs = np.array([mapping[k] for k in keys], dtype=float)
    probs = probs / probs.sum()
    return keys[rng.choice(len(keys), p=probs)]


def _state_probs(tilt: dict) -> dict:
    probs = {s: tilt.get(s, 1.0) for s in _STATES}
    total = sum(probs.values())
    return {s: p / total for s, p in probs.items()}


def make_pums_rows(seed: int = 0, rows_per_job: int = 2500) -> list[dict]:
    """Employment-survey style rows for all fixture occupations."""
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x9135)))
    rows = []
    for job in OCCUPATIONS:
        spec = _JOB_PROFILES[job]
        state_probs = _state_probs(spec["state_tilt"])
        for _ in range(rows_per_job):
            gender = "Male" if rng.random() < spec["p_male"] else "Female"
            race = _pick(rng, spec["race"])
            # triangular-ish age distribution, tilted per occupation
            age = int(np.clip(round(rng.normal(30 + 3 * spec["age_tilt"], 7.0)),
                              16, 48))
            edu = _pick(rng, spec["edu"])
            state = _pick(rng, state_probs)
            employed = 1.0 if rng.random() < 0.94 else 0.0
            rows.append({
                "gender": gender, "race": race, "age": age, "state": state,
                "edu_level": edu, "job": job, "employed": employed,
            })
    return rows


_EDU_YEARS = {"HS/GED": 0.0, "Some college": 1.0, "Associate": 2.0,
              "Bachelor": 4.0, "Master": 6.0, "Professional": 7.0,
              "Doctorate": 9.0}


def true_experience_mean(row: dict) -> float:
    """The generating-process mean used by the panel fixture."""
    base = 0.72 * (row["age"] - 18 - _EDU_YEARS.get(row["edu_level"], 0.0))
    if row["job"] == "software_developers":
        base -= 0.5
    if row["gender"] == "Male" and row["job"] == "construction_laborers":
        base += 0.5
    return max(base, 0.0)


def true_experience_sd(row: dict) -> float:
    sd = 1.6
    if row["job"] == "construction_laborers":
        sd += 0.5
    if row["age"] >= 36:
        sd += 0.4
    return sd


def make_panel_rows(seed: int = 0, rows_per_job: int = 2500) -> list[dict]:
    """Panel-style rows with experience drawn from the generating process.

    The demographics are tilted against the survey composition (more low
    education, older) so density-ratio matching has real work to do.
    """
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x9A41)))
    rows = []
    for job in OCCUPATIONS:
        spec = _JOB_PROFILES[job]
        state_probs = _state_probs(spec["state_tilt"])
        edu = dict(spec["edu"])
        low = {"HS/GED", "Some college", "Associate"}
        edu = {k: v * (1.8 if k in low else 1.0) for k, v in edu.items()}
        for _ in range(rows_per_job):
            gender = "Male" if rng.random() < spec["p_male"] else "Female"
            race = _pick(rng, spec["race"])
            age = int(np.clip(round(rng.normal(33 + 3 * spec["age_tilt"], 7.0)),
                              18, 44))
            level = _pick(rng, edu)
            state = _pick(rng, state_probs)
            row = {"gender": gender, "race": race, "age": age, "state": state,
                   "edu_level": level, "job": job}
            mu = true_experience_mean(row)
            sd = true_experience_sd(row)
            support = float(age - 18)
            exp = float(truncnorm_transform(
                np.array([rng.random()]), mu, sd, 0.0, support)[0])
            row["exp_year"] = exp
            rows.append(row)
    return rows


def make_source_bundle(seed: int = 0, rows_per_job: int = 2500) -> SourceBundle:
    bundle = SourceBundle(
        pums_rows=make_pums_rows(seed, rows_per_job),
        panel_rows=make_panel_rows(seed, rows_per_job),
        first_names=FirstNameTable(first_name_rows()),
        surnames=SurnameTable(surname_rows()),
    )
    bundle.check_consistency()
    return bundle


def write_source_files(out_dir, seed: int = 0, rows_per_job: int = 2500) -> dict:
    """Write the four delimited source files; returns their paths."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "pums": os.path.join(out_dir, "pums_fixture.csv"),
        "panel": os.path.join(out_dir, "panel_fixture.csv"),
        "first_names": os.path.join(out_dir, "first_names.csv"),
        "surnames": os.path.join(out_dir, "surnames.csv"),
    }
    with open(paths["pums"], "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(_PUMS_FIELDS))
        writer.writeheader()
        writer.writerows(make_pums_rows(seed, rows_per_job))
    with open(paths["panel"], "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(_PANEL_FIELDS))
        writer.writeheader()
        writer.writerows(make_panel_rows(seed, rows_per_job))
    with open(paths["first_names"], "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["name", "gender", "birth_year", "count"])
        writer.writerows(first_name_rows())
    with open(paths["surnames"], "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["surname", "p_white", "p_black", "p_asian", "p_other"])
        writer.writerows(surname_rows())
    return paths


_PUMS_FIELDS = ("gender", "race", "age", "state", "edu_level", "job", "employed")
_PANEL_FIELDS = ("gender", "race", "age", "state", "edu_level", "job", "exp_year")
