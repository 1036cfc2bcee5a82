"""Cross-fitted doubly robust estimation of the five quantities, bootstrap
confidence intervals, and significance flags.

For each fold the nuisances are fit on the complement and the influence
values evaluated in-fold.  Per-row scores, with e = P(X=x1|Z),
g = P(X=x1|R,Z), h = P(X=x1|B,R,Z) and all probabilities clipped:

  Q1:  1[x=x0]/(1-e) (y - m(x0,Z)) + m(x0,Z)
  Q2:  1[x=x1]/e     (y - m(x1,Z)) + m(x1,Z)
  Q3:  pi_y (y - mu3) + pi_w (mu3(x1) - nu(X,Z)) + nu(x0,Z)
         pi_y = 1[x=x1] ((1-h)/h) / (1-e),  pi_w = 1[x=x0]/(1-e)
  Q5:  pi3 (y - mu3) + pi2 (mu3(x1) - mu2(R,X,Z))
         + pi1 (mu2(R,x1,Z) - mu1(X,Z)) + mu1(x0,Z)
         pi3 = pi2 = 1[x=x1] ((1-g)/g) / (1-e),  pi1 = 1[x=x0]/(1-e)
  Q4:  pi3 (y - mu3) + pi2 (mu3(x1) - mu2(R,X,Z))
         + pi1 (mu2(R,x0,Z) - mu1(X,Z)) + mu1(x1,Z)
         pi3 = 1[x=x1] ((1-h)/h) (g/(1-g)) / e
         pi2 = 1[x=x0] (g/(1-g)) / e,  pi1 = 1[x=x1]/e

The Q5 weights use only P(X|Z) and P(X|R,Z); because Q4 intervenes on B at
the arm opposite to the outcome stage, rewriting its mediator-density ratio
through Bayes' rule additionally requires the propensity P(X|B,R,Z) (the same
one the joint-mediator Q3 score uses).  Correctness of every score is gated
on oracle equivalence, not on the derivation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .estimands import (EFFECT_NAMES, EstimandSpec, QUANTITIES, check_supported,
                        effects_from_quantities)
from .sfm import Role, SfmTable

HEAVY_WEIGHT_LIMIT = 1e4
PROB_CLIP = 1e-6

_ZRB = (Role.CONFOUNDER, Role.REDLINING, Role.BUSINESS)
_ZR = (Role.CONFOUNDER, Role.REDLINING)
_Z = (Role.CONFOUNDER,)


class EstimationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Nuisances
# ---------------------------------------------------------------------------


@dataclass
class NuisanceStack:
    """Fitted nuisance models for one training split.

    Regressions: m = E[Y|X,Z], mu3 = E[Y|B,R,X,Z],
    mu2 = E[mu3(B,R,x1,Z)|R,X,Z], and the three stage-1 collapses
    mu1_q (q in Q3/Q4/Q5) onto (X,Z).  Classifiers e, g, h produce the
    propensities P(X|Z), P(X|R,Z), P(X|B,R,Z).
    """

    m: object
    mu3: object
    mu2: object
    mu1_q3: object
    mu1_q4: object
    mu1_q5: object
    e: object
    g: object
    h: object


def _p1(classifier, features) -> np.ndarray:
    """P(X = x1 | features), clipped away from 0 and 1."""
    proba = classifier.predict_proba(features)
    classes = list(np.asarray(classifier.classes_))
    idx = classes.index(1)
    return np.clip(proba[:, idx], PROB_CLIP, 1 - PROB_CLIP)


def fit_nuisances(table: SfmTable, train_idx: np.ndarray, factory) -> NuisanceStack:
    """Fit the full nuisance stack on the given training rows."""
    tr = table.subset(train_idx)
    if np.sum(tr.x == 0) == 0 or np.sum(tr.x == 1) == 0:
        raise EstimationError("training fold with an empty arm")

    f_xz = tr.design(_Z, x="actual")
    f_xrz = tr.design(_ZR, x="actual")
    f_xbrz = tr.design(_ZRB, x="actual")

    m = factory.regressor(f_xz, tr.y)
    mu3 = factory.regressor(f_xbrz, tr.y)
    t3 = mu3.predict(tr.design(_ZRB, x=1))
    mu2 = factory.regressor(f_xrz, t3)
    mu1_q3 = factory.regressor(f_xz, t3)
    mu1_q5 = factory.regressor(f_xz, mu2.predict(tr.design(_ZR, x=1)))
    mu1_q4 = factory.regressor(f_xz, mu2.predict(tr.design(_ZR, x=0)))
    e = factory.classifier(tr.design(_Z), tr.x.astype(int))
    g = factory.classifier(tr.design(_ZR), tr.x.astype(int))
    h = factory.classifier(tr.design(_ZRB), tr.x.astype(int))
    return NuisanceStack(m=m, mu3=mu3, mu2=mu2, mu1_q3=mu1_q3, mu1_q4=mu1_q4,
                         mu1_q5=mu1_q5, e=e, g=g, h=h)


def _scores_on(table: SfmTable, idx: np.ndarray, nus: NuisanceStack,
               specs: dict[str, EstimandSpec]) -> tuple[dict, np.ndarray]:
    """Per-row influence values on the held-out rows for every spec."""
    ev = table.subset(idx)
    y = ev.y
    is1 = (ev.x == 1).astype(float)
    is0 = 1.0 - is1

    e1 = _p1(nus.e, ev.design(_Z))
    e0 = 1.0 - e1
    g1 = _p1(nus.g, ev.design(_ZR))
    g0 = 1.0 - g1
    h1 = _p1(nus.h, ev.design(_ZRB))
    h0 = 1.0 - h1

    m_act = nus.m.predict(ev.design(_Z, x="actual"))
    m0 = nus.m.predict(ev.design(_Z, x=0))
    m1 = nus.m.predict(ev.design(_Z, x=1))
    mu3_act = nus.mu3.predict(ev.design(_ZRB, x="actual"))
    t3 = nus.mu3.predict(ev.design(_ZRB, x=1))
    mu2_act = nus.mu2.predict(ev.design(_ZR, x="actual"))
    mu2_x1 = nus.mu2.predict(ev.design(_ZR, x=1))
    mu2_x0 = nus.mu2.predict(ev.design(_ZR, x=0))

    out = {}
    heavy = np.zeros(len(idx), dtype=bool)
    for name, spec in specs.items():
        if name == "Q1":
            pi = is0 / e0
            phi = pi * (y - m0) + m0
            heavy |= np.abs(pi) > HEAVY_WEIGHT_LIMIT
        elif name == "Q2":
            pi = is1 / e1
            phi = pi * (y - m1) + m1
            heavy |= np.abs(pi) > HEAVY_WEIGHT_LIMIT
        elif name == "Q3":
            nu_act = nus.mu1_q3.predict(ev.design(_Z, x="actual"))
            nu_x0 = nus.mu1_q3.predict(ev.design(_Z, x=0))
            pi_y = is1 * (h0 / h1) / e0
            pi_w = is0 / e0
            phi = pi_y * (y - mu3_act) + pi_w * (t3 - nu_act) + nu_x0
            heavy |= (np.abs(pi_y) > HEAVY_WEIGHT_LIMIT) | (np.abs(pi_w) > HEAVY_WEIGHT_LIMIT)
        elif name == "Q5":
            mu1_act = nus.mu1_q5.predict(ev.design(_Z, x="actual"))
            mu1_x0 = nus.mu1_q5.predict(ev.design(_Z, x=0))
            pi32 = is1 * (g0 / g1) / e0
            pi1 = is0 / e0
            phi = (pi32 * (y - mu3_act) + pi32 * (t3 - mu2_act)
                   + pi1 * (mu2_x1 - mu1_act) + mu1_x0)
            heavy |= (np.abs(pi32) > HEAVY_WEIGHT_LIMIT) | (np.abs(pi1) > HEAVY_WEIGHT_LIMIT)
        elif name == "Q4":
            mu1_act = nus.mu1_q4.predict(ev.design(_Z, x="actual"))
            mu1_x1 = nus.mu1_q4.predict(ev.design(_Z, x=1))
            pi3 = is1 * (h0 / h1) * (g1 / g0) / e1
            pi2 = is0 * (g1 / g0) / e1
            pi1 = is1 / e1
            phi = (pi3 * (y - mu3_act) + pi2 * (t3 - mu2_act)
                   + pi1 * (mu2_x0 - mu1_act) + mu1_x1)
            heavy |= (np.abs(pi3) > HEAVY_WEIGHT_LIMIT) | (np.abs(pi2) > HEAVY_WEIGHT_LIMIT)
        else:
            raise EstimationError(f"unsupported quantity {name}")
        bad = ~np.isfinite(phi)
        if np.any(bad):
            row = int(idx[np.nonzero(bad)[0][0]])
            raise EstimationError(f"non-finite influence value for {name} at row {row}")
        out[name] = phi
    return out, heavy


# ---------------------------------------------------------------------------
# Cross-fitting
# ---------------------------------------------------------------------------


@dataclass
class QuantityScores:
    """Per-row influence values for one quantity plus the fold assignment."""

    name: str
    phi: np.ndarray
    fold: np.ndarray

    @property
    def point(self) -> float:
        return float(self.phi.mean())

    @property
    def stderr(self) -> float:
        return float(self.phi.std(ddof=1) / np.sqrt(len(self.phi)))

    def fold_means(self) -> np.ndarray:
        n_folds = int(self.fold.max()) + 1
        return np.array([self.phi[self.fold == f].mean() for f in range(n_folds)])


def make_folds(n: int, folds: int, rng: np.random.Generator) -> np.ndarray:
    """Random fold assignment with sizes differing by at most one."""
    perm = rng.permutation(n)
    assignment = np.empty(n, dtype=np.int64)
    for f, chunk in enumerate(np.array_split(perm, folds)):
        assignment[chunk] = f
    return assignment


def crossfit_quantities(
    table: SfmTable,
    learner_factory,
    folds: int = 5,
    seed: int = 0,
    specs: dict[str, EstimandSpec] | None = None,
    fixed_nuisances: NuisanceStack | None = None,
) -> tuple[dict[str, QuantityScores], dict]:
    """Cross-fit all requested quantities on one shared fold partition.

    The five score vectors share rows and folds so that effect estimates (and
    every bootstrap resample of them) satisfy the additivity identities.
    fixed_nuisances substitutes one externally fitted stack for every fold
    (test hook; no refitting).
    """
    if folds < 2:
        raise EstimationError("need at least 2 folds")
    if table.n < 2 * folds:
        raise EstimationError(f"table too small ({table.n} rows) for {folds} folds")
    specs = dict(specs) if specs is not None else dict(QUANTITIES)
    for name, spec in specs.items():
        check_supported(spec)

    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xF01D]))
    assignment = make_folds(table.n, folds, rng)

    phi = {name: np.empty(table.n) for name in specs}
    heavy_count = 0
    for f in range(folds):
        test_idx = np.nonzero(assignment == f)[0]
        train_idx = np.nonzero(assignment != f)[0]
        nus = fixed_nuisances or fit_nuisances(table, train_idx, learner_factory)
        fold_scores, heavy = _scores_on(table, test_idx, nus, specs)
        heavy_count += int(heavy.sum())
        for name, values in fold_scores.items():
            phi[name][test_idx] = values

    scores = {
        name: QuantityScores(name=name, phi=phi[name], fold=assignment)
        for name in specs
    }
    diagnostics = {
        "heavy_weight_rows": heavy_count,
        "heavy_weight_limit": HEAVY_WEIGHT_LIMIT,
        "prob_clip": PROB_CLIP,
        "folds": folds,
        "n": table.n,
    }
    return scores, diagnostics


def crossfit_quantity(table: SfmTable, spec: EstimandSpec, learner_factory,
                      folds: int = 5, seed: int = 0,
                      fixed_nuisances: NuisanceStack | None = None) -> QuantityScores:
    """Cross-fit a single quantity (same machinery, one spec)."""
    name = check_supported(spec)
    scores, _ = crossfit_quantities(
        table, learner_factory, folds=folds, seed=seed, specs={name: spec},
        fixed_nuisances=fixed_nuisances,
    )
    return scores[name]


# ---------------------------------------------------------------------------
# Corruption probe (doubly-robustness property checks)
# ---------------------------------------------------------------------------


class _ConstantRegressor:
    def __init__(self, value: float):
        self.value = value

    def predict(self, features):
        return np.full(np.asarray(features).shape[0], self.value)


class _ConstantClassifier:
    def __init__(self, classes, freqs):
        self.classes_ = np.asarray(classes)
        self.freqs = np.asarray(freqs, dtype=float)

    def predict_proba(self, features):
        n = np.asarray(features).shape[0]
        return np.tile(self.freqs, (n, 1))


class _CorruptedFactory:
    """Replaces one nuisance group by constant (feature-blind) estimators."""

    def __init__(self, inner, corrupt: str):
        if corrupt not in ("mu-side", "pi-side"):
            raise EstimationError(
                "corrupt must be 'mu-side' or 'pi-side'; corrupting both "
                "sides simultaneously is rejected"
            )
        self.inner = inner
        self.corrupt = corrupt

    def regressor(self, features, targets, sample_weight=None):
        if self.corrupt == "mu-side":
            return _ConstantRegressor(float(np.mean(targets)))
        return self.inner.regressor(features, targets, sample_weight=sample_weight)

    def classifier(self, features, labels, sample_weight=None):
        if self.corrupt == "pi-side":
            classes, counts = np.unique(np.asarray(labels), return_counts=True)
            return _ConstantClassifier(classes, counts / counts.sum())
        return self.inner.classifier(features, labels, sample_weight=sample_weight)


def corruption_probe(table: SfmTable, spec: EstimandSpec, learner_factory,
                     corrupt: str, folds: int = 5, seed: int = 0) -> float:
    """DR estimate with one nuisance group corrupted to constants."""
    factory = _CorruptedFactory(learner_factory, corrupt)
    return crossfit_quantity(table, spec, factory, folds=folds, seed=seed).point


# ---------------------------------------------------------------------------
# Bootstrap and the effect report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EffectEstimate:
    point: float
    lo: float
    hi: float
    significant: bool

    @property
    def significance(self) -> str:
        return "significant" if self.significant else "negligible"

    def as_dict(self) -> dict:
        return {"point": self.point, "ci": [self.lo, self.hi],
                "significance": self.significance}


@dataclass
class EffectReport:
    """Five effect estimates with bootstrap CIs and significance flags."""

    effects: dict[str, EffectEstimate]
    quantities: dict[str, float]
    level: float
    n_bootstrap: int
    seed: int
    diagnostics: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def to_mapping(self) -> dict:
        return {
            "effects": {k: v.as_dict() for k, v in self.effects.items()},
            "quantities": self.quantities,
            "level": self.level,
            "n_bootstrap": self.n_bootstrap,
            "seed": self.seed,
            "diagnostics": self.diagnostics,
            "provenance": self.provenance,
        }

    @classmethod
    def from_mapping(cls, d: dict) -> "EffectReport":
        effects = {
            k: EffectEstimate(point=v["point"], lo=v["ci"][0], hi=v["ci"][1],
                              significant=v["significance"] == "significant")
            for k, v in d["effects"].items()
        }
        return cls(effects=effects, quantities=d["quantities"], level=d["level"],
                   n_bootstrap=d["n_bootstrap"], seed=d["seed"],
                   diagnostics=d.get("diagnostics", {}),
                   provenance=d.get("provenance", {}))

    def to_json(self) -> str:
        return json.dumps(self.to_mapping(), indent=2, sort_keys=True)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "EffectReport":
        with open(path) as fh:
            return cls.from_mapping(json.load(fh))

    def to_text(self) -> str:
        lines = [f"{'effect':<6} {'point':>10} {'95% CI':>22} significance"]
        for name in EFFECT_NAMES:
            est = self.effects[name]
            ci = f"[{est.lo:.3f}, {est.hi:.3f}]"
            lines.append(f"{name:<6} {est.point:>10.3f} {ci:>22} {est.significance}")
        return "\n".join(lines)


def bootstrap_effects(scores: dict[str, QuantityScores], n_bootstrap: int = 500,
                      level: float = 0.95, seed: int = 0,
                      diagnostics: dict | None = None,
                      provenance: dict | None = None) -> EffectReport:
    """Percentile bootstrap over jointly resampled influence rows.

    Rows are resampled with replacement once per draw and shared across the
    five score vectors, then the five effects are recomputed from the
    resampled quantity means.  Influence values are resampled, nuisances are
    not refit (noted in the report provenance).
    """
    if n_bootstrap < 2:
        raise EstimationError("need at least 2 bootstrap resamples")
    missing = [q for q in QUANTITIES if q not in scores]
    if missing:
        raise EstimationError(f"missing quantity scores: {missing}")
    n = len(scores["Q1"].phi)
    for name, qs in scores.items():
        if len(qs.phi) != n:
            raise EstimationError("score vectors do not share row indexing")

    phi = np.vstack([scores[q].phi for q in ("Q1", "Q2", "Q3", "Q4", "Q5")])

    points = effects_from_quantities(*[float(v.mean()) for v in phi])

    ss = np.random.SeedSequence([seed, 0xB007])
    children = ss.spawn(n_bootstrap)
    draws = np.empty((n_bootstrap, 5))
    for b in range(n_bootstrap):
        idx = np.random.default_rng(children[b]).integers(0, n, size=n)
        qmeans = phi[:, idx].mean(axis=1)
        es = effects_from_quantities(*qmeans)
        draws[b] = [es.te, es.nde, es.nie, es.rie, es.bie]

    alpha = (1.0 - level) / 2.0
    lo = np.percentile(draws, 100 * alpha, axis=0)
    hi = np.percentile(draws, 100 * (1 - alpha), axis=0)

    point_vec = [points.te, points.nde, points.nie, points.rie, points.bie]
    effects = {}
    for i, name in enumerate(EFFECT_NAMES):
        significant = not (lo[i] <= 0.0 <= hi[i])
        effects[name] = EffectEstimate(point=float(point_vec[i]), lo=float(lo[i]),
                                       hi=float(hi[i]), significant=significant)

    prov = {
        "library_version": __version__,
        "bootstrap": "influence-resampling (nuisances not refit per resample)",
        "n_bootstrap": n_bootstrap,
        "level": level,
        "bootstrap_seed": seed,
    }
    prov.update(provenance or {})
    return EffectReport(
        effects=effects,
        quantities={q: float(scores[q].point) for q in QUANTITIES},
        level=level, n_bootstrap=n_bootstrap, seed=seed,
        diagnostics=dict(diagnostics or {}), provenance=prov,
    )


def estimate_effects(table: SfmTable, learner_factory, folds: int = 5,
                     n_bootstrap: int = 500, level: float = 0.95,
                     seed: int = 0, provenance: dict | None = None) -> EffectReport:
    """Cross-fit all five quantities and bootstrap the effect report."""
    scores, diagnostics = crossfit_quantities(
        table, learner_factory, folds=folds, seed=seed
    )
    prov = {"fold_seed": seed, "folds": folds}
    if hasattr(learner_factory, "describe"):
        prov["learners"] = learner_factory.describe()
    prov.update(provenance or {})
    return bootstrap_effects(
        scores, n_bootstrap=n_bootstrap, level=level, seed=seed,
        diagnostics=diagnostics, provenance=prov,
    )
