"""End-to-end analysis of one vector field, stage by stage.

Every gate records what it found; the first failing gate stops the run and
leaves a partial report behind.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

from . import numverify as nv
from .blockmap import (DEFAULT_LADDER, Inconclusive, Orientation, RegularityReport,
                       assemble_block_map, c1_residue_test, classify, dulac_pairs,
                       epsilon_transition)
from .blowup import NotInV, VectorField, blowup_x, c0_test, characteristic_data, rotate_to_axis
from .classes import C01, CAlpha, CkLogLip, NotRegularisable
from .saddle import Irrational, normalize_saddle, resonance_order


class StageError(RuntimeError):
    """A downstream error, tagged with the stage that raised it."""

    def __init__(self, stage: str, error: Exception):
        super().__init__(f"{stage}: {type(error).__name__}: {error}")
        self.stage = stage
        self.error = error


@dataclass
class Analysis:
    field: VectorField
    order: int
    stages: Dict[str, Any] = field(default_factory=dict)
    aligned: Optional[VectorField] = None
    transform: Any = None
    residue: Any = None
    normal_form: Any = None
    resonance: Any = None
    transition: Any = None
    orientation: Optional[Orientation] = None
    report: Optional[RegularityReport] = None
    stopped_at: Optional[str] = None

    @property
    def cls(self):
        return self.report.cls if self.report else None


def _run(stage: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except Exception as exc:   # surfaced with the stage name
        raise StageError(stage, exc) from exc


def analyze(X: VectorField, order: int = 5, K: int = 3,
            ladder: Sequence[float] = DEFAULT_LADDER) -> Analysis:
    """characteristic data, C0 gate, alignment, residue test, normal form,
    middle transition, block map and class, in that order."""
    out = Analysis(X, order)
    data = _run("characteristic_data", characteristic_data, X.leading())
    out.stages["characteristic_data"] = data
    try:
        dec = c0_test(X)
    except NotInV:
        raise
    out.stages["c0"] = dec
    if not dec.regularisable:
        out.report = RegularityReport(NotRegularisable(dec.reason), dec.r_star, None, None)
        out.stopped_at = "c0"
        return out

    Xa, T = _run("rotate_to_axis", rotate_to_axis, X, dec.direction)
    out.aligned, out.transform = Xa, T
    out.residue = _run("c1_residue_test", c1_residue_test, Xa)

    nf = _run("normalize_saddle", normalize_saddle, blowup_x(Xa, truncation_order=order), order)
    res = resonance_order(nf)
    out.normal_form, out.resonance = nf, res

    max_order = None
    if res.m is not None and nf.q:
        max_order = (res.m - 1) * nf.q
    K = min(K, order - 1)
    F = _run("epsilon_transition", epsilon_transition, Xa, nf, K, ladder, max_order=max_order)
    out.transition = F

    orient = Orientation(nf.lam_w < 0, nf.p, nf.q)
    out.orientation = orient
    log_e = None
    if res.m is not None and not isinstance(nf.r, Irrational):
        log_e = Fraction(1 + (res.m - 1) * nf.p)
    if isinstance(nf.r, Irrational) and res.m is not None:
        raise StageError("assemble_block_map", Inconclusive("irrational ratio with resonance"))
    dp = dulac_pairs(nf, res, orient)
    upper, lower = _run("assemble_block_map", assemble_block_map,
                        (dp["upper"][0], dp["lower"][0]), (dp["upper"][1], dp["lower"][1]),
                        F, orient.entry_positive, log_e)
    a_in, a_out = dp["upper"][2], dp["upper"][3]
    cls = _run("classify", classify, nf.r, res, F, out.residue.passes_C1, a_in, a_out, order)

    rep = RegularityReport(cls, dec.r_star, res.m, F.k, upper, lower, p=nf.p, q=nf.q)
    if isinstance(cls, CAlpha):
        e = Fraction(cls.alpha) if not isinstance(nf.r, Irrational) else cls.alpha
        rep.leading_correction_exponent = e
        rep.leading_correction_coefficient = upper.coefficient(e)
    elif isinstance(cls, CkLogLip):
        rep.leading_correction_exponent = log_e
        rep.leading_correction_coefficient = upper.coefficient(log_e, 1)
        rep.alpha_pm = (a_in - a_out) / nf.p
        rep.caveat = f"non-log coefficient of x^{log_e} not determined"
    elif isinstance(cls, C01):
        rep.leading_correction_exponent = Fraction(1)
        rep.leading_correction_coefficient = upper.coefficient(Fraction(1))
    out.report = rep
    return out


# ------------------------------------------------------------ numeric check

@dataclass
class Verification:
    verdict: nv.VerificationVerdict
    sections: nv.SectionSpec
    upper: List[nv.TransitionSample]
    lower: List[nv.TransitionSample]
    fit_upper: Any
    fit_lower: Any


def _fit(cls, samples, tol, k_log):
    try:
        if isinstance(cls, C01):
            return nv.fit_slope(samples)
        if isinstance(cls, CkLogLip):
            return nv.fit_log_lipschitz(samples, k_log, tol)
        return nv.fit_exponent(samples, tol)
    except nv.IllConditioned as exc:
        return exc


def verify(an: Analysis, ladder: Sequence[float] = nv.DEFAULT_LADDER, tol: float = 1e-12,
           section: float = nv.DEFAULT_SECTION, workers: int = 1) -> Verification:
    """Integrate the aligned field across the origin on both sides and compare."""
    if an.report is None or isinstance(an.cls, NotRegularisable) or an.aligned is None:
        raise ValueError("verification needs a regularisable analysis")
    Xa = an.aligned
    sec = nv.SectionSpec.symmetric(section, an.orientation.entry_positive)
    up_ladder, lo_ladder = list(ladder), list(ladder)
    if isinstance(an.cls, C01):
        # keep the images as small as the inputs on the expanding side
        slope = abs(an.report.leading_correction_coefficient or 1.0)
        if slope > 1:
            up_ladder = [y / slope for y in ladder]
        else:
            lo_ladder = [y * slope for y in ladder]
    up = nv.sample_ladder(Xa.P, Xa.Q, sec, up_ladder, "upper", tol, workers)
    lo = nv.sample_ladder(Xa.P, Xa.Q, sec, lo_ladder, "lower", tol, workers)
    k_log = an.cls.k if isinstance(an.cls, CkLogLip) else 1
    fu = _fit(an.cls, up, tol, k_log)
    fl = _fit(an.cls, lo, tol, k_log)
    verdict = nv.verify_report(an.report, fu, fl, an.normal_form, sec)
    return Verification(verdict, sec, up, lo, fu, fl)


def verify_regular(P, Q, ladder: Sequence[float] = nv.DEFAULT_LADDER, tol: float = 1e-12,
                   section: float = 0.5) -> Verification:
    """Numeric transition for a field that does not vanish at the origin."""
    sec = nv.SectionSpec(-section, section)
    up = nv.sample_ladder(P, Q, sec, ladder, "upper", tol)
    lo = nv.sample_ladder(P, Q, sec, ladder, "lower", tol)
    fits = []
    for s in (up, lo):
        try:
            fits.append(nv.fit_exponent(s, tol))
        except nv.IllConditioned as exc:
            fits.append(exc)
    ill = all(isinstance(f, nv.IllConditioned) for f in fits)
    note = "no correction detectable" if ill else "correction detected"
    verdict = nv.VerificationVerdict(ill, "regular point", {"note": note})
    return Verification(verdict, sec, up, lo, fits[0], fits[1])
