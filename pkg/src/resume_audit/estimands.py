"""The five potential-outcome quantities, their exact discrete oracle, and a
sequential-regression plug-in estimator.

Arm coding follows the table contrast: 0 is the x0 arm, 1 is the x1 arm.  The
five supported quantities are

    Q1 = E[Y(x0)]
    Q2 = E[Y(x1)]
    Q3 = E[Y(x1, W(x0))]                       W = (B, R) jointly
    Q4 = E[Y(x1, B(x0, R(x1)), R(x1))]         nested
    Q5 = E[Y(x1, B(x1, R(x0)), R(x0))]         nested

and the effects derived from them:

    TE  = Q2 - Q1
    NDE = Q3 - Q1
    NIE = Q2 - Q3
    BIE = ((Q2 - Q4) + (Q5 - Q3)) / 2
    RIE = ((Q2 - Q5) + (Q4 - Q3)) / 2

so TE = NDE + NIE and NIE = BIE + RIE hold identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import yaml

from .sfm import ColumnSpec, Role, SfmTable

_NORM_TOL = 1e-12


class EstimandError(ValueError):
    pass


@dataclass(frozen=True)
class EstimandSpec:
    """Arms for the outcome stage (y), the B-generating stage and the
    R-generating stage; nested marks B generated conditional on intervened R.
    """

    y_arm: int
    b_arm: int
    r_arm: int
    nested: bool

    def __post_init__(self):
        if any(a not in (0, 1) for a in (self.y_arm, self.b_arm, self.r_arm)):
            raise EstimandError("arms must be 0 (x0) or 1 (x1)")

    @property
    def name(self) -> str:
        for name, spec in QUANTITIES.items():
            if spec == self:
                return name
        return "custom"


Q1 = EstimandSpec(y_arm=0, b_arm=0, r_arm=0, nested=False)
Q2 = EstimandSpec(y_arm=1, b_arm=1, r_arm=1, nested=False)
Q3 = EstimandSpec(y_arm=1, b_arm=0, r_arm=0, nested=False)
Q4 = EstimandSpec(y_arm=1, b_arm=0, r_arm=1, nested=True)
Q5 = EstimandSpec(y_arm=1, b_arm=1, r_arm=0, nested=True)

QUANTITIES = {"Q1": Q1, "Q2": Q2, "Q3": Q3, "Q4": Q4, "Q5": Q5}
EFFECT_NAMES = ("TE", "NDE", "NIE", "RIE", "BIE")


def check_supported(spec: EstimandSpec) -> str:
    for name, known in QUANTITIES.items():
        if known == spec:
            return name
    raise EstimandError(f"spec {spec} is not one of the five supported quantities")


# ---------------------------------------------------------------------------
# Discrete structural model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscreteScm:
    """Finite-support model over (X, Z, R, B, Y) with named probability tables.

    Table axes are ordered (x, z, r, b); x indexes the contrast arm.
    """

    z_levels: tuple
    r_levels: tuple
    b_levels: tuple
    pz: np.ndarray        # (kz,)
    px1_z: np.ndarray     # (kz,) P(X=x1 | z)
    pr_xz: np.ndarray     # (2, kz, kr)
    pb_xrz: np.ndarray    # (2, kz, kr, kb)
    ey_xrb: np.ndarray    # (2, kz, kr, kb) E[Y | x, z, r, b]

    def __post_init__(self):
        kz, kr, kb = len(self.z_levels), len(self.r_levels), len(self.b_levels)
        if self.pz.shape != (kz,):
            raise EstimandError("pz shape mismatch")
        if self.px1_z.shape != (kz,):
            raise EstimandError("px1_z shape mismatch")
        if self.pr_xz.shape != (2, kz, kr):
            raise EstimandError("pr_xz shape mismatch")
        if self.pb_xrz.shape != (2, kz, kr, kb):
            raise EstimandError("pb_xrz shape mismatch")
        if self.ey_xrb.shape != (2, kz, kr, kb):
            raise EstimandError("ey shape mismatch")
        if abs(self.pz.sum() - 1.0) > _NORM_TOL:
            raise EstimandError("pz does not sum to 1")
        if np.any(np.abs(self.pr_xz.sum(axis=-1) - 1.0) > _NORM_TOL):
            raise EstimandError("pr_xz rows do not normalize")
        if np.any(np.abs(self.pb_xrz.sum(axis=-1) - 1.0) > _NORM_TOL):
            raise EstimandError("pb_xrz rows do not normalize")
        if np.any((self.px1_z < 0) | (self.px1_z > 1)):
            raise EstimandError("px1_z outside [0, 1]")

    # -- construction -------------------------------------------------------

    @classmethod
    def random(cls, rng: np.random.Generator, kz: int = 3, kr: int = 3,
               kb: int = 3, min_mass: float = 0.05) -> "DiscreteScm":
        """Random tables with all conditional masses bounded away from zero."""

        def simplex(shape):
            p = rng.dirichlet(np.full(shape[-1], 2.0), size=shape[:-1])
            p = np.maximum(p, min_mass)
            return p / p.sum(axis=-1, keepdims=True)

        return cls(
            z_levels=tuple(range(kz)),
            r_levels=tuple(range(kr)),
            b_levels=tuple(range(kb)),
            pz=simplex((kz,)),
            px1_z=rng.uniform(0.25, 0.75, size=kz),
            pr_xz=simplex((2, kz, kr)),
            pb_xrz=simplex((2, kz, kr, kb)),
            ey_xrb=rng.uniform(0.0, 1.0, size=(2, kz, kr, kb)),
        )

    @classmethod
    def from_table(cls, table: SfmTable) -> "DiscreteScm":
        """Empirical tables of a fully categorical single-column-per-block
        table; empty conditional cells fall back exactly like the tabular
        exact learner (marginal frequencies, global outcome mean)."""
        z_cols = table.block(Role.CONFOUNDER)
        r_cols = table.block(Role.REDLINING)
        b_cols = table.block(Role.BUSINESS)
        if len(z_cols) != 1 or len(r_cols) != 1 or len(b_cols) != 1:
            raise EstimandError("empirical construction expects one column per block")
        if any(c.kind == "real" for c in (*z_cols, *r_cols, *b_cols)):
            raise EstimandError("empirical construction requires categorical blocks")
        z = table.data[z_cols[0].name].astype(int)
        r = table.data[r_cols[0].name].astype(int)
        b = table.data[b_cols[0].name].astype(int)
        x = table.x.astype(int)
        y = table.y
        kz = len(z_cols[0].levels)
        kr = len(r_cols[0].levels)
        kb = len(b_cols[0].levels)

        counts = np.zeros((2, kz, kr, kb))
        ysum = np.zeros((2, kz, kr, kb))
        np.add.at(counts, (x, z, r, b), 1.0)
        np.add.at(ysum, (x, z, r, b), y)

        pz = counts.sum(axis=(0, 2, 3)) / len(y)
        n_xz = counts.sum(axis=(2, 3))
        px1_z = np.divide(n_xz[1], n_xz.sum(axis=0),
                          out=np.full(kz, 0.5), where=n_xz.sum(axis=0) > 0)

        n_xzr = counts.sum(axis=3)
        r_marg = counts.sum(axis=(0, 1, 3)) / len(y)
        pr_xz = np.where(
            n_xz[..., None] > 0,
            n_xzr / np.maximum(n_xz[..., None], 1),
            r_marg[None, None, :],
        )
        b_marg = counts.sum(axis=(0, 1, 2)) / len(y)
        pb_xrz = np.where(
            n_xzr[..., None] > 0,
            counts / np.maximum(n_xzr[..., None], 1),
            b_marg[None, None, None, :],
        )
        ey = np.where(counts > 0, ysum / np.maximum(counts, 1), float(y.mean()))
        return cls(
            z_levels=z_cols[0].levels, r_levels=r_cols[0].levels,
            b_levels=b_cols[0].levels,
            pz=pz, px1_z=px1_z, pr_xz=pr_xz, pb_xrz=pb_xrz, ey_xrb=ey,
        )

    # -- sampling -----------------------------------------------------------

    def sample(self, n: int, rng: np.random.Generator,
               outcome: str = "bernoulli", noise_sd: float = 0.1,
               x0: str = "x0", x1: str = "x1") -> SfmTable:
        """Ancestral sample as a ready-to-estimate table.

        outcome="bernoulli" draws Y ~ Bernoulli(E[Y|cell]) (requires means in
        [0, 1]); outcome="gaussian" adds N(0, noise_sd) noise.
        """
        kz, kr, kb = len(self.z_levels), len(self.r_levels), len(self.b_levels)
        z = rng.choice(kz, size=n, p=self.pz)
        x = (rng.random(n) < self.px1_z[z]).astype(int)
        u = rng.random(n)
        cdf_r = np.cumsum(self.pr_xz[x, z], axis=1)
        r = (u[:, None] > cdf_r).sum(axis=1)
        u = rng.random(n)
        cdf_b = np.cumsum(self.pb_xrz[x, z, r], axis=1)
        b = (u[:, None] > cdf_b).sum(axis=1)
        mean = self.ey_xrb[x, z, r, b]
        if outcome == "bernoulli":
            if np.any((self.ey_xrb < 0) | (self.ey_xrb > 1)):
                raise EstimandError("bernoulli outcome needs means in [0, 1]")
            y = (rng.random(n) < mean).astype(float)
        elif outcome == "gaussian":
            y = mean + rng.normal(0.0, noise_sd, size=n)
        else:
            raise EstimandError(f"unknown outcome kind {outcome!r}")

        columns = (
            ColumnSpec("z", Role.CONFOUNDER, "categorical",
                       tuple(str(v) for v in self.z_levels)),
            ColumnSpec("r", Role.REDLINING, "categorical",
                       tuple(str(v) for v in self.r_levels)),
            ColumnSpec("b", Role.BUSINESS, "categorical",
                       tuple(str(v) for v in self.b_levels)),
        )
        return SfmTable(
            x=x.astype(np.int8), y=y, x0=x0, x1=x1, columns=columns,
            data={"z": z.astype(np.int64), "r": r.astype(np.int64),
                  "b": b.astype(np.int64)},
        )

    # -- named-table round-trip ---------------------------------------------

    def to_mapping(self) -> dict:
        zl = [str(v) for v in self.z_levels]
        rl = [str(v) for v in self.r_levels]
        bl = [str(v) for v in self.b_levels]
        arms = ("x0", "x1")

        def nest(values, levels_chain):
            if not levels_chain:
                return float(values)
            head, *rest = levels_chain
            return {lev: nest(values[i], rest) for i, lev in enumerate(head)}

        return {
            "z_levels": zl, "r_levels": rl, "b_levels": bl,
            "p_z": nest(self.pz, [zl]),
            "p_x1_given_z": nest(self.px1_z, [zl]),
            "p_r_given_x_z": nest(self.pr_xz, [arms, zl, rl]),
            "p_b_given_x_z_r": nest(self.pb_xrz, [arms, zl, rl, bl]),
            "e_y_given_x_z_r_b": nest(self.ey_xrb, [arms, zl, rl, bl]),
        }

    @classmethod
    def from_mapping(cls, d: dict) -> "DiscreteScm":
        zl, rl, bl = d["z_levels"], d["r_levels"], d["b_levels"]
        arms = ("x0", "x1")

        def un_nest(node, levels_chain):
            if not levels_chain:
                return float(node)
            head, *rest = levels_chain
            return np.array([un_nest(node[lev], rest) for lev in head])

        return cls(
            z_levels=tuple(zl), r_levels=tuple(rl), b_levels=tuple(bl),
            pz=un_nest(d["p_z"], [zl]),
            px1_z=un_nest(d["p_x1_given_z"], [zl]),
            pr_xz=un_nest(d["p_r_given_x_z"], [arms, zl, rl]),
            pb_xrz=un_nest(d["p_b_given_x_z_r"], [arms, zl, rl, bl]),
            ey_xrb=un_nest(d["e_y_given_x_z_r_b"], [arms, zl, rl, bl]),
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            yaml.safe_dump(self.to_mapping(), fh, sort_keys=False)

    @classmethod
    def load(cls, path) -> "DiscreteScm":
        with open(path) as fh:
            return cls.from_mapping(yaml.safe_load(fh))


def oracle_exact(scm: DiscreteScm, spec: EstimandSpec) -> float:
    """Exact weighted sum per the identification formula of the quantity.

    sum_z P(z) sum_r P(r | r_arm, z) sum_b P(b | b_arm, r, z) E[Y | y_arm, b, r, z]
    """
    check_supported(spec)
    inner = np.einsum(
        "zrb,zrb->zr", scm.pb_xrz[spec.b_arm], scm.ey_xrb[spec.y_arm]
    )
    outer = np.einsum("zr,zr->z", scm.pr_xz[spec.r_arm], inner)
    return float(np.dot(scm.pz, outer))


# ---------------------------------------------------------------------------
# Effects
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EffectSet:
    te: float
    nde: float
    nie: float
    bie: float
    rie: float

    def as_dict(self) -> dict:
        return {"TE": self.te, "NDE": self.nde, "NIE": self.nie,
                "RIE": self.rie, "BIE": self.bie}


def effects_from_quantities(q1: float, q2: float, q3: float, q4: float,
                            q5: float) -> EffectSet:
    """Five effects from shared quantity estimates.

    Effects must always be derived from one shared set of quantity estimates,
    never from independently re-fit quantities, so the additivity identities
    TE = NDE + NIE and NIE = BIE + RIE hold up to rounding.
    """
    qs = (q1, q2, q3, q4, q5)
    if not all(math.isfinite(q) for q in qs):
        raise EstimandError(f"non-finite quantity among {qs}")
    return EffectSet(
        te=q2 - q1,
        nde=q3 - q1,
        nie=q2 - q3,
        bie=0.5 * ((q2 - q4) + (q5 - q3)),
        rie=0.5 * ((q2 - q5) + (q4 - q3)),
    )


# ---------------------------------------------------------------------------
# Sequential-regression plug-in estimator (no cross-fitting)
# ---------------------------------------------------------------------------

_ZRB = (Role.CONFOUNDER, Role.REDLINING, Role.BUSINESS)
_ZR = (Role.CONFOUNDER, Role.REDLINING)
_Z = (Role.CONFOUNDER,)


def plugin_sequential(table: SfmTable, spec: EstimandSpec, learner_factory) -> float:
    """Nested-regression plug-in estimate of one quantity.

    All learners fit on the whole table.  Counterfactual evaluation rewrites
    the protected feature column and re-predicts.  Stage identity is attached
    to learner failures.
    """
    name = check_supported(spec)

    def stage(label, fn):
        try:
            return fn()
        except Exception as exc:
            raise EstimandError(f"{name} stage {label} failed: {exc}") from exc

    if not spec.nested and spec.y_arm == spec.b_arm == spec.r_arm:
        m = stage("mu(X,Z)", lambda: learner_factory.regressor(
            table.design(_Z, x="actual"), table.y))
        return float(np.mean(m.predict(table.design(_Z, x=spec.y_arm))))

    mu3 = stage("mu3(B,R,X,Z)", lambda: learner_factory.regressor(
        table.design(_ZRB, x="actual"), table.y))
    t3 = mu3.predict(table.design(_ZRB, x=spec.y_arm))

    if not spec.nested:
        mu1 = stage("mu1(X,Z)", lambda: learner_factory.regressor(
            table.design(_Z, x="actual"), t3))
        return float(np.mean(mu1.predict(table.design(_Z, x=spec.r_arm))))

    mu2 = stage("mu2(R,X,Z)", lambda: learner_factory.regressor(
        table.design(_ZR, x="actual"), t3))
    s2 = mu2.predict(table.design(_ZR, x=spec.b_arm))
    mu1 = stage("mu1(X,Z)", lambda: learner_factory.regressor(
        table.design(_Z, x="actual"), s2))
    return float(np.mean(mu1.predict(table.design(_Z, x=spec.r_arm))))
