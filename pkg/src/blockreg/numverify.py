"""Direct numerical check of a block map.

Orbits of the original field are followed from the line ``x = entry`` to the
line ``x = exit`` by integrating ``d ln|y| / dx = Q / (y P)``.  The resulting
samples are fitted against the asymptotic form predicted symbolically.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence

import numpy as np
from scipy.optimize import curve_fit

from . import _kernels
from .classes import C01, CAlpha, CInf, CInfUpToOrder, CkLogLip
from .polyalg import BivarPoly


class TransversalityLost(ArithmeticError):
    pass


class Blowup(ArithmeticError):
    pass


class IllConditioned(ArithmeticError):
    """Nothing to fit: the map is linear to within the integrator noise."""


DEFAULT_SECTION = 0.05
DEFAULT_LADDER = tuple(1e-3 * 0.5 ** j for j in range(11))   # 1e-3 down to ~1e-6


@dataclass(frozen=True)
class SectionSpec:
    """Vertical sections ``x = entry`` and ``x = exit`` on opposite sides of the origin."""

    entry: float
    exit: float

    def __post_init__(self):
        if self.entry * self.exit >= 0:
            raise ValueError("sections must lie on opposite sides of x = 0")

    @classmethod
    def symmetric(cls, c: float, entry_positive: bool) -> "SectionSpec":
        c = abs(c)
        return cls(c, -c) if entry_positive else cls(-c, c)

    def scaled(self, f: float) -> "SectionSpec":
        return SectionSpec(self.entry * f, self.exit * f)


@dataclass(frozen=True)
class TransitionSample:
    y_in: float
    y_out: float
    integrator_error_estimate: float


@dataclass
class ExponentFit:
    slope: float
    alpha: Optional[float]
    coefficient: Optional[float]       # of |y_out - A y_in|, sign included
    residual: float
    side: str
    relative_coefficient: Optional[float] = None
    model: str = "power"


@dataclass
class VerificationVerdict:
    consistent: bool
    kind: str
    details: dict = field(default_factory=dict)

    @property
    def label(self) -> str:
        return "CONSISTENT" if self.consistent else "INCONSISTENT"


def _field_tables(P: BivarPoly, Q: BivarPoly):
    return _kernels.monomial_table(P), _kernels.monomial_table(Q)


def _integrate(TP, TQ, sections: SectionSpec, y_in: float, rtol: float, bound: float):
    z0 = np.array([math.log(abs(y_in))])
    sign = 1.0 if y_in > 0 else -1.0
    z, status, _, _ = _kernels.dopri(0, sections.entry, sections.exit, z0, TP, TQ, sign, 0,
                                     rtol, rtol * 1e-3, bound, 200000)
    if status == _kernels.TRANSVERSALITY:
        raise TransversalityLost(f"P changes sign on the orbit through y = {y_in:g}")
    if status == _kernels.BLOWUP:
        raise Blowup(f"orbit through y = {y_in:g} leaves |y| <= {bound:g}")
    if status != _kernels.OK:
        raise ArithmeticError("integrator did not converge")
    return sign * math.exp(z[0])


def integrate_transition(P: BivarPoly, Q: BivarPoly, sections: SectionSpec, y_in: float,
                         tol: float = 1e-12, bound: float = 1.0, tables=None) -> TransitionSample:
    """Image of ``(entry, y_in)`` on the exit line.

    The error estimate is the change in ``y_out`` when the tolerance is
    tightened tenfold.
    """
    if y_in == 0:
        raise ValueError("y_in must be nonzero")
    TP, TQ = tables if tables is not None else _field_tables(P, Q)
    y1 = _integrate(TP, TQ, sections, y_in, tol, bound)
    y2 = _integrate(TP, TQ, sections, y_in, tol / 10, bound)
    return TransitionSample(y_in, y2, abs(y2 - y1))


def sample_ladder(P: BivarPoly, Q: BivarPoly, sections: SectionSpec, ladder: Iterable[float],
                  side: str = "upper", tol: float = 1e-12, workers: int = 1) -> List[TransitionSample]:
    sgn = 1.0 if side == "upper" else -1.0
    tables = _field_tables(P, Q)
    ys = [sgn * abs(y) for y in ladder]

    def one(y):
        return integrate_transition(P, Q, sections, y, tol, tables=tables)

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(one, ys))   # map keeps the input order
    return [one(y) for y in ys]


def _arrays(samples: Sequence[TransitionSample]):
    y = np.array([abs(s.y_in) for s in samples])
    ratio = np.array([s.y_out / s.y_in for s in samples])
    # relative to |y_out| so that it compares with the ratio
    err = np.array([s.integrator_error_estimate / abs(s.y_out) for s in samples])
    order = np.argsort(y)
    return y[order], ratio[order], err[order]


def _check_ladder(y: np.ndarray):
    if len(y) < 6 or y.max() / y.min() < 99.0:
        raise ValueError("need at least 6 samples spanning 2 decades")


def fit_exponent(samples: Sequence[TransitionSample], tol: float = 1e-12,
                 side: Optional[str] = None) -> ExponentFit:
    """Fit ``y_out / y_in = A (1 + C y^b + D y^{2b} + E y^{3b})`` and report ``alpha = 1 + b``.

    Starting values come from a log-log fit of the ratio increments, so the
    nonlinear solve does not depend on a good guess of ``A``.
    """
    y, ratio, err = _arrays(samples)
    _check_ladder(y)
    side = side or ("upper" if samples[0].y_in > 0 else "lower")
    noise = max(10 * tol, 10 * float(np.max(err)))
    spread = float(np.max(ratio) - np.min(ratio))
    if spread <= noise * max(1.0, float(np.max(np.abs(ratio)))):
        raise IllConditioned("no correction detectable above integrator noise")
    d = np.diff(ratio)
    dy = np.diff(np.log(y))
    mid = np.exp(0.5 * (np.log(y[1:]) + np.log(y[:-1])))
    g = np.abs(d / dy)
    b0 = float(np.polyfit(np.log(mid), np.log(g), 1)[0])
    b0 = min(max(b0, 0.05), 3.0)

    def model(yy, A, C, b, D, E):
        t = yy ** b
        return A * (1 + C * t + D * t * t + E * t ** 3)

    A0 = ratio[0]
    C0 = (ratio[-1] / A0 - 1) / y[-1] ** b0
    popt, _ = curve_fit(model, y, ratio, p0=[A0, C0, b0, 0.0, 0.0], maxfev=20000)
    A, C, b = popt[0], popt[1], popt[2]
    resid = float(np.max(np.abs(model(y, *popt) - ratio) / np.abs(ratio)))
    return ExponentFit(float(A), float(1 + b), float(A * C), resid, side,
                       relative_coefficient=float(C))


def fit_log_lipschitz(samples: Sequence[TransitionSample], exponent: int = 1,
                      tol: float = 1e-12, side: Optional[str] = None) -> ExponentFit:
    """Linear fit of ``y_out / y_in = A (1 + C y^e ln y + D y^e + E y^{2e} ln y)``."""
    y, ratio, err = _arrays(samples)
    _check_ladder(y)
    side = side or ("upper" if samples[0].y_in > 0 else "lower")
    t = y ** exponent
    L = np.log(y)
    M = np.column_stack([np.ones_like(y), t * L, t, t * t * L, t * t])
    norms = np.abs(M).max(axis=0)
    coef, *_ = np.linalg.lstsq(M / norms, ratio, rcond=None)
    coef = coef / norms
    A = coef[0]
    resid = float(np.max(np.abs(M @ coef - ratio) / np.abs(ratio)))
    if np.max(np.abs(M[:, 1:] @ coef[1:])) <= max(10 * tol, 10 * float(np.max(err))) * abs(A):
        raise IllConditioned("no correction detectable above integrator noise")
    C = coef[1] / A
    return ExponentFit(float(A), 1.0 + exponent, float(coef[1]), resid, side,
                       relative_coefficient=float(C), model="log")


def fit_slope(samples: Sequence[TransitionSample], side: Optional[str] = None) -> ExponentFit:
    """Leading slope only, from a linear fit of the ratio against ``y``."""
    y, ratio, _ = _arrays(samples)
    side = side or ("upper" if samples[0].y_in > 0 else "lower")
    u = y / y.max()   # unscaled columns would fall below the lstsq cutoff
    M = np.column_stack([np.ones_like(u), u, u * u])
    coef, *_ = np.linalg.lstsq(M, ratio, rcond=None)
    resid = float(np.max(np.abs(M @ coef - ratio) / np.abs(ratio)))
    return ExponentFit(float(coef[0]), None, None, resid, side, model="slope")


def samples_to_csv(samples: Sequence[TransitionSample]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["y_in", "y_out", "error_estimate"])
    for s in samples:
        w.writerow([repr(float(s.y_in)), repr(float(s.y_out)), repr(float(s.integrator_error_estimate))])
    return buf.getvalue()


# ------------------------------------------------------------ predictions

def section_scale(nf, c: float) -> float:
    """Factor ``s`` turning ``y`` on ``x = c`` into the block-map variable at leading order.

    With ``W = |w(c, 0)|`` and ``a = dv/dy`` along the section, ``s = |a| W^(1/r)``.
    """
    Sw, Sv = nf.phi
    u = float(c)
    W = abs(float(Sw(u, 0.0)))
    a = abs(float(Sv.diff_y()(u, 0.0))) / abs(u)
    return a * W ** (1.0 / float(nf.r))


def predicted_relative(report, nf, c: float) -> Optional[float]:
    """Relative correction coefficient expected on the line ``x = c``."""
    cls = report.cls
    if report.leading_correction_coefficient is None:
        return None
    s = section_scale(nf, c)
    if isinstance(cls, CAlpha):
        return report.leading_correction_coefficient * s ** float(cls.alpha - 1)
    if isinstance(cls, CkLogLip):
        return report.leading_correction_coefficient * s ** cls.k
    return None


def verify_report(report, fit_upper, fit_lower, nf=None, sections: Optional[SectionSpec] = None,
                  tol_alpha: float = 0.05, tol_coef: float = 0.05, tol_slope: float = 1e-4,
                  tol_log: float = 0.10) -> VerificationVerdict:
    """Compare fits (or ``IllConditioned`` instances) with the symbolic report."""
    cls = report.cls
    ill_u = isinstance(fit_upper, IllConditioned)
    ill_l = isinstance(fit_lower, IllConditioned)
    info = {"class": cls.label()}
    if isinstance(cls, (CInf, CInfUpToOrder)):
        info["note"] = "no correction detectable" if (ill_u and ill_l) else "correction detected"
        return VerificationVerdict(ill_u and ill_l, "smooth", info)
    if isinstance(cls, C01):
        if ill_u or ill_l:
            return VerificationVerdict(False, "lipschitz", {**info, "note": "slope fit failed"})
        prod = fit_upper.slope * fit_lower.slope
        info.update(slope_upper=fit_upper.slope, slope_lower=fit_lower.slope, product=prod)
        ok = (abs(prod - 1) <= tol_slope and abs(fit_upper.slope - 1) > 10 * tol_slope
              and abs(fit_lower.slope - 1) > 10 * tol_slope)
        return VerificationVerdict(ok, "lipschitz", info)
    if ill_u:
        return VerificationVerdict(False, "fit", {**info, "note": "no correction detectable"})
    c = abs(sections.entry) if sections is not None else DEFAULT_SECTION
    pred = predicted_relative(report, nf, c) if nf is not None else None
    info.update(fitted_alpha=fit_upper.alpha, fitted_relative=fit_upper.relative_coefficient,
                predicted_relative=pred, fit_residual=fit_upper.residual)
    if isinstance(cls, CAlpha):
        target = float(cls.alpha)
        info["predicted_alpha"] = target
        ok = abs(fit_upper.alpha - target) <= tol_alpha
        if pred is not None:
            ok = ok and abs(fit_upper.relative_coefficient - pred) <= tol_coef * abs(pred)
        return VerificationVerdict(ok, "holder", info)
    if isinstance(cls, CkLogLip):
        ok = pred is not None and abs(fit_upper.relative_coefficient - pred) <= tol_log * abs(pred)
        return VerificationVerdict(ok, "log-lipschitz", info)
    return VerificationVerdict(False, "unsupported", info)
