"""Residue test, epsilon-ladder transition map, block-map assembly and classification."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import integrate

from . import _kernels
from .blowup import VectorField, blowup_y
from .classes import (C01, CAlpha, CInfUpToOrder, CkLogLip, NotRegularisable,
                      RegularityClass)
from .polyalg import UnivarPoly, complex_roots
from .saddle import (Irrational, NormalFormResult, QuasiRegularSeries, ResonanceInfo,
                     dulac_series, qr_compose)


class RealPoleUnexpected(ValueError):
    pass


class LadderDivergence(ArithmeticError):
    pass


class TruncationTooLow(ValueError):
    pass


class Inconclusive(ArithmeticError):
    pass


DEFAULT_LADDER = tuple(2.0 ** -k for k in range(3, 13))


# ------------------------------------------------------------ residue test

@dataclass
class ResidueTestResult:
    residue_sum: complex
    principal_value: float
    passes_C1: bool
    tol: float


def _integrand_polys(X: VectorField) -> Tuple[UnivarPoly, UnivarPoly]:
    Ps, Qs = X.component(X.s)
    num = Qs.slice_y1()
    den = Ps.slice_y1() - UnivarPoly([0, 1]) * num
    return num, den


def c1_residue_test(X: VectorField, tol_c1: float = 1e-9) -> ResidueTestResult:
    """Principal value of ``int Q_s(x,1) / q_s(x) dx`` via residues."""
    num, den = _integrand_polys(X)
    if num.is_zero():
        return ResidueTestResult(0j, 0.0, True, tol_c1)
    roots = complex_roots(den)
    if roots.real_roots:
        raise RealPoleUnexpected("q_s has a real root; field not aligned to a single direction")
    dden = den.derivative()
    nf, df = num.to_float(), dden.to_float()
    total = 0j
    for z, mult in roots.complex_pairs:
        if mult != 1:
            raise RealPoleUnexpected("repeated pole")
        total += npoly.polyval(z, nf) / npoly.polyval(z, df)
    if num.degree == den.degree - 1:
        res_inf = -float(num.lc()) / float(den.lc())
        total += 0.5 * res_inf
    elif num.degree >= den.degree:
        raise RealPoleUnexpected("integrand does not decay at infinity")
    pv = (2j * math.pi * total).real
    return ResidueTestResult(total, pv, abs(total) <= tol_c1, tol_c1)


def principal_value_quadrature(X: VectorField, R: float = 1e4) -> float:
    """Independent check: symmetric quadrature on [-R, R] plus the exact tail in 1/x."""
    num, den = _integrand_polys(X)
    nf, dfl = num.to_float(), den.to_float()
    g = lambda x: npoly.polyval(x, nf) / npoly.polyval(x, dfl)
    sym = lambda x: g(x) + g(-x)
    core = integrate.quad(sym, 0.0, R, limit=400, epsabs=1e-13, epsrel=1e-13)[0]
    tail = integrate.quad(lambda t: sym(1.0 / t) / (t * t), 0.0, 1.0 / R,
                          limit=200, epsabs=1e-15, epsrel=1e-13)[0]
    return core + tail


# ------------------------------------------------------------ truncated series

def _smul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    K = len(a) - 1
    return np.convolve(a, b)[: K + 1]


def _sinv(a: np.ndarray) -> np.ndarray:
    K = len(a) - 1
    out = np.zeros(K + 1)
    out[0] = 1.0 / a[0]
    for n in range(1, K + 1):
        out[n] = -sum(a[k] * out[n - k] for k in range(1, n + 1)) / a[0]
    return out


def _2mul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    K = A.shape[0] - 1
    out = np.zeros_like(A)
    for m1 in range(K + 1):
        for j1 in range(K + 1 - m1):
            if A[m1, j1] == 0.0:
                continue
            for m2 in range(K + 1 - m1 - j1):
                for j2 in range(K + 1 - m1 - j1 - m2):
                    out[m1 + m2, j1 + j2] += A[m1, j1] * B[m2, j2]
    return out


def _2div(Bs: np.ndarray, As: np.ndarray) -> np.ndarray:
    """``B / A`` for bivariate truncated series with ``A[0,0] != 0``."""
    K = As.shape[0] - 1
    out = np.zeros_like(Bs)
    for d in range(K + 1):
        for m in range(d + 1):
            j = d - m
            s = Bs[m, j]
            for m2 in range(m + 1):
                for j2 in range(j + 1):
                    if m2 == 0 and j2 == 0:
                        continue
                    s -= As[m2, j2] * out[m - m2, j - j2]
            out[m, j] = s / As[0, 0]
    return out


def _taylor_shift(c: np.ndarray, X: float, K: int) -> np.ndarray:
    """Coefficients of ``c(X + d)`` in powers of ``d`` up to ``d^K``."""
    out = np.zeros(K + 1)
    cur = np.array(c, dtype=float)
    fact = 1.0
    for m in range(K + 1):
        out[m] = npoly.polyval(X, cur) / fact if cur.size else 0.0
        cur = npoly.polyder(cur) if cur.size > 1 else np.zeros(1)
        fact *= m + 1
    return out


def _subs2(Y: np.ndarray, d: np.ndarray, e: np.ndarray) -> np.ndarray:
    """``sum Y[m, j] d^m e^j`` for univariate series ``d, e`` with zero constant term."""
    K = Y.shape[0] - 1
    out = np.zeros(K + 1)
    dp = [np.eye(1, K + 1, 0).ravel()]
    ep = [np.eye(1, K + 1, 0).ravel()]
    for _ in range(K):
        dp.append(_smul(dp[-1], d))
        ep.append(_smul(ep[-1], e))
    for m in range(K + 1):
        for j in range(K + 1 - m):
            if Y[m, j] != 0.0:
                out += Y[m, j] * _smul(dp[m], ep[j])
    return out


def _poly_in_param(P, a_fn, K: int) -> np.ndarray:
    """Univariate series in ``t`` of the BivarPoly ``P(w(t), v)`` with ``w = sw*t``, fixed ``v``."""
    out = np.zeros(K + 1)
    sw, v = a_fn
    for (i, j), c in P.terms.items():
        if i <= K:
            out[i] += float(c) * sw ** i * v ** j
    return out


# ------------------------------------------------------------ transition

@dataclass
class TransitionSeries:
    coefficients: List[float]
    k: Optional[int]
    K: int
    ladder_diagnostics: List[float]
    raw: List[List[float]] = field(default_factory=list)
    eps: List[float] = field(default_factory=list)
    second_order_variational_zero: bool = False
    exponent_lattice: int = 1

    @property
    def F1(self) -> float:
        return self.coefficients[0]

    def label(self) -> str:
        return f"k={self.k}" if self.k is not None else f"NoneUpToOrder({self.K})"


def _chart_tables(Xa: VectorField, K: int):
    ch = blowup_y(Xa, truncation_order=K + 2)
    def table(poly):
        rows = []
        for j in range(K + 1):
            cs = {}
            for (i, jj), c in poly.terms.items():
                if jj == j:
                    cs[i] = float(c)
            n = max(cs, default=-1) + 1
            rows.append([cs.get(i, 0.0) for i in range(n)] or [0.0])
        width = max(len(r) for r in rows)
        return np.array([r + [0.0] * (width - len(r)) for r in rows])
    return table(ch.A), table(ch.B), ch


def variational_at(TA: np.ndarray, TB: np.ndarray, K: int, X: float,
                   rtol: float = 1e-13) -> np.ndarray:
    """``G_1..G_K`` at ``xbar = X`` for orbits labelled by their height at ``xbar = 0``."""
    z0 = np.zeros(K)
    z0[0] = 1.0
    z, status, _, _ = _kernels.dopri(1, 0.0, math.asinh(X), z0, TA, TB, 1.0, K,
                                      rtol, 1e-16, 1e300, 2_000_000)
    if status != _kernels.OK:
        raise LadderDivergence(f"variational integration failed (status {status})")
    return z


def _flow_box(TA, TB, K, X, G):
    """Bivariate series ``Y(d, eta)`` of the y-chart orbit near ``xbar = X``."""
    At = np.zeros((K + 1, K + 1))
    Bt = np.zeros((K + 1, K + 1))
    for j in range(K + 1):
        if j < TA.shape[0]:
            At[:, j] = _taylor_shift(TA[j], X, K)
        if j < TB.shape[0]:
            Bt[:, j] = _taylor_shift(TB[j], X, K)
    for m in range(K + 1):
        for j in range(K + 1):
            if m + j > K:
                At[m, j] = Bt[m, j] = 0.0
    R = _2div(Bt, At)
    Y0 = np.zeros((K + 1, K + 1))
    Y0[0, 1:] = G
    Y = Y0.copy()
    for _ in range(K + 1):
        # R(d, Y(d, eta)) as series in (d, eta)
        comp = np.zeros_like(Y)
        Ypow = np.zeros_like(Y)
        Ypow[0, 0] = 1.0
        for i in range(K + 1):
            if i > 0:
                Ypow = _2mul(Ypow, Y)
            for m in range(K + 1 - i):
                if R[m, i] == 0.0:
                    continue
                shifted = np.zeros_like(Y)
                shifted[m:, :] = Ypow[: K + 1 - m, :]
                comp += R[m, i] * shifted
        for m in range(K + 1):
            for j in range(K + 1):
                if m + j > K:
                    comp[m, j] = 0.0
        Y = Y0.copy()
        for m in range(K):
            Y[m + 1, :] += comp[m, :] / (m + 1)
        for m in range(K + 1):
            for j in range(K + 1):
                if m + j > K:
                    Y[m, j] = 0.0
    return Y


def _section(nf: NormalFormResult, sw: float, v: float, K: int):
    """Chart data of ``{v fixed, w = sw * t}`` as series in ``t``: ``(X0, delta(t), ybar(t))``."""
    U, V = nf.phi_inv
    xh = _poly_in_param(U, (sw, v), K)
    yh = _poly_in_param(V, (sw, v), K)
    xb = _sinv(yh)
    yb = _smul(xh, yh)
    delta = xb.copy()
    delta[0] = 0.0
    return xb[0], delta, yb


def transition_coefficients(Xa: VectorField, nf: NormalFormResult, K: int, eps: float,
                            tables=None) -> np.ndarray:
    """Taylor coefficients ``c_1..c_K`` of ``F_eps: w1 -> w2`` at one ladder point."""
    TA, TB, _ = tables if tables is not None else _chart_tables(Xa, K)
    X1, d1, y1 = _section(nf, 1.0, eps, K)
    X2, d2, y2 = _section(nf, -1.0, -eps, K)
    G1 = variational_at(TA, TB, K, X1)
    G2 = variational_at(TA, TB, K, X2)
    Y1 = _flow_box(TA, TB, K, X1, G1)
    Y2 = _flow_box(TA, TB, K, X2, G2)
    # eta(t) from section 1
    eta = np.zeros(K + 1)
    eta[1] = y1[1] / Y1[0, 1]
    for _ in range(K + 2):
        eta = eta + (y1 - _subs2(Y1, d1, eta)) / Y1[0, 1]
        eta[0] = 0.0
    # w2(t) from section 2
    w2 = np.zeros(K + 1)
    w2[1] = _subs2(Y2, d2, eta)[1] / y2[1]
    for _ in range(K + 2):
        lhs = _subs2(Y2, _compose1(d2, w2), eta)
        rhs = _compose1(y2, w2)
        w2 = w2 + (lhs - rhs) / y2[1]
        w2[0] = 0.0
    return w2[1:]


def _compose1(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """``f(g(t))`` for ``g(0) = 0``."""
    K = len(f) - 1
    out = np.zeros(K + 1)
    out[0] = f[0]
    gp = np.eye(1, K + 1, 0).ravel()
    for n in range(1, K + 1):
        gp = _smul(gp, g)
        out += f[n] * gp
    return out


def exponent_lattice(Xa: VectorField, nf: NormalFormResult) -> int:
    num, den = _integrand_polys(Xa)
    q = nf.q if nf.q else 1
    if num.degree == den.degree - 1 and num.exact and den.exact:
        c_inf = Fraction(num.lc()) / Fraction(den.lc())
        return q * c_inf.denominator // math.gcd(q, c_inf.denominator)
    return q


def extrapolate(eps: Sequence[float], values: Sequence[float], D: int,
                terms: int = 4) -> Tuple[float, float]:
    """Least-squares fit ``f0 + sum b_n eps^(n/D)`` on the finest points; residual = window drift."""
    e = np.asarray(eps, dtype=float)
    f = np.asarray(values, dtype=float)
    order = np.argsort(e)
    e, f = e[order], f[order]
    npts = min(len(e), terms + 3)

    def fit(lo):
        sl = slice(lo, lo + npts)
        t = e[sl] ** (1.0 / D)
        M = np.vander(t, terms + 1, increasing=True)
        return np.linalg.lstsq(M, f[sl], rcond=None)[0][0]

    best = fit(0)
    if len(e) > npts:
        prev = fit(1)
        drift = abs(best - prev)
    else:
        drift = 0.0
    return float(best), float(drift)


def epsilon_transition(Xa: VectorField, nf: NormalFormResult, K: int = 3,
                       ladder: Sequence[float] = DEFAULT_LADDER, tol_k: float = 1e-7,
                       tol_ladder: float = 1e-3, max_order: Optional[int] = None) -> TransitionSeries:
    """Limit coefficients of the middle transition, scaled by ``eps^{-(j-1) r}``.

    ``max_order`` caps the orders that are extrapolated (used when a resonance
    makes higher scaled coefficients log-divergent in ``eps``).
    """
    if K + 1 > nf.N:
        raise TruncationTooLow(f"transition order {K} needs normal form order >= {K + 1}")
    r = float(nf.r)
    tables = _chart_tables(Xa, K)
    TA, TB, _ = tables
    raw = []
    for eps in ladder:
        c = transition_coefficients(Xa, nf, K, eps, tables)
        raw.append([c[j] * eps ** (-j * r) for j in range(K)])
    raw_arr = np.array(raw)
    D = exponent_lattice(Xa, nf)
    top = K if max_order is None else min(K, max_order)
    coeffs, diags = [], []
    for j in range(top):
        val, drift = extrapolate(ladder, raw_arr[:, j], D)
        coeffs.append(val)
        diags.append(drift / max(abs(val), 1e-300))
    # order of transition
    k = None
    for j in range(1, top):
        thresh = max(tol_k * max(1.0, abs(coeffs[0])), 20.0 * diags[j] * abs(coeffs[j]))
        if abs(coeffs[j]) > thresh:
            if diags[j] > tol_ladder:
                raise LadderDivergence(f"order-{j + 1} coefficient did not stabilise "
                                       f"(drift {diags[j]:.2e})")
            k = j + 1
            break
    second_zero = _second_variational_zero(Xa)
    return TransitionSeries(coeffs, k, top, diags, raw, list(ladder), second_zero, D)


def _second_variational_zero(Xa: VectorField) -> bool:
    """Exact check that the ybar^2 coefficient of B/A vanishes identically."""
    ch = blowup_y(Xa, truncation_order=4)
    A, B = ch.A, ch.B
    def slice_j(P, j):
        cs = {}
        for (i, jj), c in P.terms.items():
            if jj == j:
                cs[i] = c
        n = max(cs, default=-1) + 1
        return UnivarPoly([cs.get(i, 0) for i in range(n)])
    a0, a1 = slice_j(A, 0), slice_j(A, 1)
    b1, b2 = slice_j(B, 1), slice_j(B, 2)
    # r_2 = (b2 a0 - b1 a1) / a0^2
    return (b2 * a0 - b1 * a1).is_zero()


# ------------------------------------------------------------ assembly

def _revert(f: np.ndarray) -> np.ndarray:
    """Compositional inverse of ``sum_{j>=1} f_j t^j`` (index 0 holds f_1)."""
    K = len(f)
    F = np.concatenate([[0.0], f])
    g = np.zeros(K + 1)
    g[1] = 1.0 / F[1]
    for _ in range(K + 1):
        comp = _compose1(F, g)
        target = np.zeros(K + 1)
        target[1] = 1.0
        g = g + (target - comp) / F[1]
        g[0] = 0.0
    return g[1:]


def _to_qr(f: np.ndarray) -> QuasiRegularSeries:
    K = len(f)
    return QuasiRegularSeries({Fraction(j + 1): [float(f[j])] for j in range(K)}, Fraction(K + 1))


@dataclass
class Orientation:
    entry_positive: bool
    p: int
    q: int

    def quadrant_signs(self, side: str):
        sw = 1 if self.entry_positive else -1
        if side == "upper":
            return (sw, sw), (-sw, -sw)
        return (sw, -sw), (-sw, sw)

    def u_sign(self, signs) -> int:
        w, v = signs
        return (v ** self.p) * (w ** self.q)


def dulac_pairs(nf: NormalFormResult, res: ResonanceInfo, orient: Orientation):
    """Forward/inverse Dulac series for each side, with quadrant-signed resonance coefficients."""
    out = {}
    for side in ("upper", "lower"):
        ent, ext = orient.quadrant_signs(side)
        if res.m is None or isinstance(nf.r, Irrational):
            d1 = dulac_series(nf.r, res, "forward")
            d2 = dulac_series(nf.r, res, "inverse")
            a1 = a2 = 0.0
        else:
            a1 = orient.u_sign(ent) * float(res.alpha_m)
            a2 = orient.u_sign(ext) * float(res.alpha_m)
            d1 = dulac_series(nf.r, res, "forward", alpha_override=a1)
            d2 = dulac_series(nf.r, res, "inverse", alpha_override=a2)
        out[side] = (d1, d2, a1, a2)
    return out


def assemble_block_map(d1, d2, F: TransitionSeries, entry_positive: bool,
                       log_exponent: Optional[Fraction] = None):
    """Upper and lower block maps ``d2 o G o d1`` in quasi-regular algebra.

    ``d1`` and ``d2`` are ``(upper, lower)`` pairs.  The upper middle map is
    ``F`` when the flow enters on the positive side, otherwise its inverse;
    the lower one is ``z -> -G^{-1}(-z)``.

    With a resonance, ``log_exponent`` is the exponent ``1 + (m-1) p`` of the
    leading log term.  The middle map is then only known below the order that
    feeds that exponent, so it is padded with zeros, the result is cut at
    ``log_exponent`` and only the log part survives there.
    """
    f = np.array(F.coefficients, dtype=float)
    if log_exponent is not None:
        f = np.concatenate([f, np.zeros(2)])
    G = f if entry_positive else _revert(f)
    Gi = _revert(G)
    Gl = np.array([Gi[j] * (-1) ** j for j in range(len(Gi))])
    upper = qr_compose(d2[0], qr_compose(_to_qr(G), d1[0]))
    lower = qr_compose(d2[1], qr_compose(_to_qr(Gl), d1[1]))
    if log_exponent is not None:
        upper = QuasiRegularSeries(upper.terms, log_exponent, logs_at_trunc=True)
        lower = QuasiRegularSeries(lower.terms, log_exponent, logs_at_trunc=True)
    return upper, lower


# ------------------------------------------------------------ classification

@dataclass
class RegularityReport:
    cls: RegularityClass
    r_star: object
    m: Optional[int]
    k: Optional[int]
    upper_series: Optional[QuasiRegularSeries] = None
    lower_series: Optional[QuasiRegularSeries] = None
    leading_correction_coefficient: Optional[float] = None
    leading_correction_exponent: Optional[object] = None
    caveat: str = ""
    p: int = 0
    q: int = 0
    alpha_pm: Optional[float] = None


def classify(r, res: ResonanceInfo, F: TransitionSeries, c1_passes: bool,
             alpha_entry: float = 0.0, alpha_exit: float = 0.0, N: int = 5,
             tol_slope: float = 1e-6) -> RegularityClass:
    """Case split of the leading-order lemma."""
    if not c1_passes:
        return C01()
    p, q = res.p, res.q
    k = F.k
    m = res.m
    rf = float(r)
    lhs = math.inf if k is None else k - 1
    rhs = math.inf if (m is None or not q) else (m - 1) * q
    if k is not None and lhs < rhs:
        if isinstance(r, Irrational):
            return CAlpha(1 + (k - 1) * rf)
        a = 1 + (k - 1) * Fraction(r)
        return CAlpha(a, lipschitz_top=((k - 1) * Fraction(r)).denominator == 1)
    if m is not None:
        apm = (alpha_entry - alpha_exit) / p
        if abs(apm) > 1e-12:
            return CkLogLip((m - 1) * p, m, p, q)
        raise Inconclusive("resonant log terms cancel at leading order; "
                           "higher order terms will need to be computed")
    return CInfUpToOrder(N)
