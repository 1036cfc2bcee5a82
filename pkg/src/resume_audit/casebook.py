"""Discrimination-pattern classification over an effect report.

The five case rules are independent predicates over the (point, significance)
pairs of the five effects; a report can match several cases or none.

  C1: the direct effect is significant.
  C2: TE negligible while NDE and NIE are significant with opposite signs
      (direct and indirect effects cancel, masking the disparity).
  C3: NDE and RIE negligible, BIE significant (disparity transmitted through
      job-relevant qualifications).
  C4: NDE and BIE negligible, RIE significant (disparity through demographic
      proxies).
  C5: BIE and RIE both significant; mode is "cancellation" when they carry
      opposite signs and "amplification" otherwise.

Sign tests use point estimates.  C1 is keyed purely on NDE significance; the
presence or absence of explicit demographics in the scored documents is
reporting metadata, not a rule input.
"""

from __future__ import annotations

from dataclasses import dataclass

CASE_NAMES = ("C1", "C2", "C3", "C4", "C5")


class CasebookError(ValueError):
    pass


@dataclass(frozen=True)
class CaseLabel:
    cases: frozenset[str]
    c5_mode: str  # "cancellation", "amplification" or "none"

    def __post_init__(self):
        if self.c5_mode not in ("cancellation", "amplification", "none"):
            raise CasebookError(f"unknown C5 mode {self.c5_mode!r}")
        if self.c5_mode != "none" and "C5" not in self.cases:
            raise CasebookError("C5 mode set without C5 present")

    def sorted_cases(self) -> list[str]:
        return [c for c in CASE_NAMES if c in self.cases]

    def __str__(self) -> str:
        if not self.cases:
            return "-"
        return ",".join(self.sorted_cases())


def _extract(report) -> dict[str, tuple[float, bool]]:
    """(point, significant) per effect from an EffectReport or plain mapping."""
    effects = report.effects if hasattr(report, "effects") else report
    out = {}
    for name in ("TE", "NDE", "NIE", "RIE", "BIE"):
        if name not in effects:
            raise CasebookError(f"missing effect {name}")
        est = effects[name]
        if hasattr(est, "point"):
            point, significant = est.point, est.significant
        else:
            point, significant = est
        if not isinstance(significant, (bool,)):
            raise CasebookError(f"missing significance flag for {name}")
        out[name] = (float(point), significant)
    return out


def classify(report) -> CaseLabel:
    """Case labels for one audited configuration.

    Accepts an EffectReport or a mapping of effect name to
    (point, significant) pairs.
    """
    eff = _extract(report)
    te_pt, te_sig = eff["TE"]
    nde_pt, nde_sig = eff["NDE"]
    nie_pt, nie_sig = eff["NIE"]
    rie_pt, rie_sig = eff["RIE"]
    bie_pt, bie_sig = eff["BIE"]

    cases = set()
    if nde_sig:
        cases.add("C1")
    if (not te_sig) and nde_sig and nie_sig and (nde_pt * nie_pt < 0):
        cases.add("C2")
    if (not nde_sig) and (not rie_sig) and bie_sig:
        cases.add("C3")
    if (not nde_sig) and (not bie_sig) and rie_sig:
        cases.add("C4")
    mode = "none"
    if bie_sig and rie_sig:
        cases.add("C5")
        mode = "cancellation" if bie_pt * rie_pt < 0 else "amplification"

    return CaseLabel(cases=frozenset(cases), c5_mode=mode)
