"""Normal form of the blown-up saddle, Dulac series and quasi-regular series.

Coordinates: the x-chart saddle sits at the origin with the chart variable
``u`` (transverse to the critical manifold, eigenvalue ``lam_w``) and the
direction variable ``v`` (along the critical manifold, eigenvalue ``lam_v``).
After diagonalising, normal coordinates are ``(w, v)``.  The ratio of
hyperbolicity is ``r = -lam_w / lam_v = p / q`` and the resonant monomial is
``u = v**p * w**q``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from .blowup import ChartField
from .polyalg import BivarPoly


class NotHyperbolic(ValueError):
    pass


class NotHomeomorphism(ValueError):
    pass


@dataclass(frozen=True)
class Irrational:
    value: float

    def __float__(self) -> float:
        return self.value


@dataclass
class NormalFormResult:
    r: Union[Fraction, Irrational]
    p: int
    q: int
    alpha: List  # alpha[0] is alpha_2, ...
    phi_inv: Tuple[BivarPoly, BivarPoly]   # (w, v) -> (u, v) chart coordinates
    phi: Tuple[BivarPoly, BivarPoly]       # chart coordinates -> (w, v)
    normal_form: Tuple[BivarPoly, BivarPoly]
    N: int
    lam_w: object
    lam_v: object
    gamma: object
    resonant: Dict[Tuple[int, Tuple[int, int]], object] = field(default_factory=dict)

    @property
    def r_float(self) -> float:
        return float(self.r)


def _trunc(f: BivarPoly, d: int) -> BivarPoly:
    return f.truncate(d)


def _homog(f: BivarPoly, d: int) -> BivarPoly:
    return f.homogeneous(d)


def _compose(f: BivarPoly, X: BivarPoly, Y: BivarPoly, d: int) -> BivarPoly:
    return f.substitute(X, Y, max_degree=d)


def normalize_saddle(Xhat: ChartField, N: int = 5) -> NormalFormResult:
    """Conjugacy normal form to order ``N`` by solving the homological equation degree by degree."""
    A, B = Xhat.A, Xhat.B
    if B.terms.get((0, 0), 0) != 0 or A.terms.get((0, 0), 0) != 0:
        raise ValueError("origin of the chart field is not singular")
    if A.terms.get((0, 1), 0) != 0:
        raise ValueError("chart field is not aligned with the critical manifold")
    lam_w = A.terms.get((1, 0), 0)
    lam_v = B.terms.get((0, 1), 0)
    beta = B.terms.get((1, 0), 0)
    if lam_w == 0 or lam_v == 0:
        raise NotHyperbolic("zero eigenvalue at the blown-up point")
    if (lam_w > 0) == (lam_v > 0):
        raise NotHyperbolic("blown-up point is a node, not a saddle")
    gamma = beta / (lam_w - lam_v)
    w, v = BivarPoly.x(), BivarPoly.y()
    # chart (u, vv) = (w, v + gamma w)
    Fw = _compose(A, w, v + w * gamma, N)
    Fv = _compose(B, w, v + w * gamma, N) - Fw * gamma
    lam = (lam_w, lam_v)
    exact = isinstance(lam_w, (int, Fraction)) and isinstance(lam_v, (int, Fraction))

    r_val = -lam_w / lam_v
    if exact:
        r = Fraction(r_val)
        p, q = r.numerator, r.denominator
    else:
        fr = Fraction(float(r_val)).limit_denominator(1000)
        if abs(float(fr) - float(r_val)) < 1e-12:
            r, p, q = fr, fr.numerator, fr.denominator
        else:
            r, p, q = Irrational(float(r_val)), 0, 0

    H = [BivarPoly(), BivarPoly()]           # h, the nonlinear part of phi^-1
    G = [BivarPoly({(1, 0): lam_w}), BivarPoly({(0, 1): lam_v})]
    resonant = {}
    for d in range(2, N + 1):
        Zw, Zv = w + H[0], v + H[1]
        lhs = [_homog(_compose(Fw, Zw, Zv, d), d), _homog(_compose(Fv, Zw, Zv, d), d)]
        for k in range(2):
            Dh = [H[k].diff_x(), H[k].diff_y()]
            corr = _homog(_trunc(Dh[0] * G[0] + Dh[1] * G[1], d), d)
            lhs[k] = lhs[k] - corr
        for k in range(2):
            for (i, j), c in lhs[k].terms.items():
                div = i * lam_w + j * lam_v - lam[k]
                small = div == 0 if exact else abs(div) < 1e-12 * (abs(lam_w) + abs(lam_v))
                if small:
                    G[k] = G[k] + BivarPoly({(i, j): c})
                    resonant[(k, (i, j))] = c
                else:
                    H[k] = H[k] + BivarPoly({(i, j): c / div})

    # phi^-1 in chart coordinates
    U = w + H[0]
    V = v + H[1] + U * gamma
    # phi by fixed-point inversion of zeta = z' - h(zeta)
    x, y = BivarPoly.x(), BivarPoly.y()
    zw, zv = x, y - x * gamma
    Sw, Sv = zw, zv
    for _ in range(N):
        Sw = zw - _compose(H[0], Sw, Sv, N)
        Sv = zv - _compose(H[1], Sw, Sv, N)
    alpha = _orbital_alpha(resonant, lam_v, p, q, N) if p else []
    return NormalFormResult(r, p, q, alpha, (U, V), (Sw, Sv), (G[0], G[1]), N,
                            lam_w, lam_v, gamma, resonant)


def _orbital_alpha(resonant, lam_v, p, q, N) -> List:
    """Coefficients of ``du/dtau = sum alpha_{i+1} u^{i+1}`` with ``dv/dtau = v``."""
    imax = (N - 1) // (p + q)
    if imax < 1:
        return []
    a = [0] * (imax + 1)   # v-component: v * u^i
    b = [0] * (imax + 1)   # w-component: w * u^i
    for (k, (i, j)), c in resonant.items():
        if k == 1 and (j - 1) % p == 0 and i % q == 0 and i // q == (j - 1) // p:
            if i // q <= imax:
                a[i // q] += c
        if k == 0 and j % p == 0 and (i - 1) % q == 0 and j // p == (i - 1) // q:
            if j // p <= imax:
                b[j // p] += c
    # num(u) = p A + q B, den(u) = lam_v + A ; P(u) = u num/den
    num = [p * a[i] + q * b[i] for i in range(imax + 1)]
    den = [lam_v] + a[1:]
    quo = [0] * (imax + 1)
    for n in range(imax + 1):
        s = num[n] - sum(quo[k] * den[n - k] for k in range(n))
        quo[n] = s / den[0]
    return quo[1:]


@dataclass
class ResonanceInfo:
    m: Optional[int]
    alpha_m: object
    p: int
    q: int
    checked_up_to: int

    @property
    def none(self) -> bool:
        return self.m is None

    def label(self) -> str:
        if self.m is None:
            return f"NoneUpToOrder({self.checked_up_to})"
        return f"m={self.m}"


def resonance_order(nf: NormalFormResult) -> ResonanceInfo:
    for i, a in enumerate(nf.alpha):
        if a != 0 and not (isinstance(a, float) and abs(a) < 1e-12):
            return ResonanceInfo(i + 2, a, nf.p, nf.q, nf.N)
    return ResonanceInfo(None, 0, nf.p, nf.q, nf.N)


# ------------------------------------------------------------ quasi-regular

Exp = Union[Fraction, float]


def _lpoly_mul(a, b):
    out = [0.0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _lpoly_add(a, b):
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0.0) + (b[i] if i < len(b) else 0.0) for i in range(n)]


def _trim(poly, tol=0.0):
    out = list(poly)
    while out and abs(out[-1]) <= tol:
        out.pop()
    return out


class QuasiRegularSeries:
    """Finite sum ``sum_k x**e_k * P_k(ln x)`` known up to ``O(x**trunc)``."""

    def __init__(self, terms: Dict[Exp, List[float]], trunc: Exp = math.inf,
                 logs_at_trunc: bool = False):
        clean = {}
        for e, poly in terms.items():
            if e > trunc or (e == trunc and not logs_at_trunc):
                continue
            if e == trunc:
                # only the log part is determined at the truncation exponent
                poly = [0.0] + list(poly[1:])
            poly = _trim([float(c) for c in poly], 0.0)
            if poly:
                clean[e] = poly
        self.terms: Dict[Exp, List[float]] = dict(sorted(clean.items(), key=lambda kv: float(kv[0])))
        self.trunc = trunc
        self.logs_at_trunc = logs_at_trunc

    # -- basic accessors
    @classmethod
    def monomial(cls, e: Exp, c: float = 1.0, trunc: Exp = math.inf) -> "QuasiRegularSeries":
        return cls({e: [c]}, trunc)

    @property
    def lead(self) -> Tuple[Exp, List[float]]:
        e = next(iter(self.terms))
        return e, self.terms[e]

    def coefficient(self, e: Exp, log_power: int = 0) -> float:
        poly = self.terms.get(e)
        if poly is None:
            for k, v in self.terms.items():
                if abs(float(k) - float(e)) < 1e-12:
                    poly = v
        if not poly or log_power >= len(poly):
            return 0.0
        return poly[log_power]

    def __call__(self, x: float) -> float:
        L = math.log(x)
        return sum(x ** float(e) * sum(c * L ** k for k, c in enumerate(poly))
                   for e, poly in self.terms.items())

    def __repr__(self) -> str:
        parts = []
        for e, poly in self.terms.items():
            parts.append(f"x^{e}*[{', '.join(f'{c:.6g}' for c in poly)}]")
        tail = f"O(x^{self.trunc})"
        return " + ".join(parts or ["0"]) + " + " + tail

    def triples(self) -> List[Tuple[str, int, float]]:
        """``(exponent, log_degree, coefficient)`` rows for reports."""
        return [(str(e), k, c) for e, poly in self.terms.items() for k, c in enumerate(poly) if c != 0]

    # -- arithmetic
    def __add__(self, other: "QuasiRegularSeries") -> "QuasiRegularSeries":
        t = dict(self.terms)
        for e, poly in other.terms.items():
            t[e] = _lpoly_add(t.get(e, []), poly)
        return QuasiRegularSeries(t, min(self.trunc, other.trunc))

    def scale(self, c: float) -> "QuasiRegularSeries":
        return QuasiRegularSeries({e: [c * v for v in p] for e, p in self.terms.items()}, self.trunc)

    def shift(self, e0: Exp) -> "QuasiRegularSeries":
        return QuasiRegularSeries({e + e0: p for e, p in self.terms.items()}, self.trunc + e0)

    def __mul__(self, other: "QuasiRegularSeries") -> "QuasiRegularSeries":
        if not self.terms or not other.terms:
            return QuasiRegularSeries({}, min(self.trunc + _lead_or(other), other.trunc + _lead_or(self)))
        trunc = min(self.trunc + other.lead[0], other.trunc + self.lead[0])
        t: Dict[Exp, List[float]] = {}
        for e1, p1 in self.terms.items():
            for e2, p2 in other.terms.items():
                e = e1 + e2
                if e < trunc:
                    t[e] = _lpoly_add(t.get(e, []), _lpoly_mul(p1, p2))
        return QuasiRegularSeries(t, trunc)


def _lead_or(s: QuasiRegularSeries) -> Exp:
    return s.lead[0] if s.terms else s.trunc


def _one(trunc) -> QuasiRegularSeries:
    return QuasiRegularSeries({Fraction(0): [1.0]}, trunc)


def _binom(a: float, n: int) -> float:
    out = 1.0
    for k in range(n):
        out *= (a - k) / (k + 1)
    return out


def _series_fn(delta: QuasiRegularSeries, coeff) -> QuasiRegularSeries:
    """``sum_n coeff(n) delta**n`` for ``delta`` with positive exponents."""
    tr = delta.trunc
    out = _one(tr).scale(coeff(0)) if coeff(0) != 0 else QuasiRegularSeries({}, tr)
    if not delta.terms:
        return out
    e0 = float(delta.lead[0])
    if e0 <= 0:
        raise NotHomeomorphism("correction does not vanish at 0")
    nmax = int(math.ceil(float(tr) / e0)) + 1 if math.isfinite(float(tr)) else 12
    power = _one(tr)
    for n in range(1, nmax + 1):
        power = power * delta
        if not power.terms:
            break
        c = coeff(n)
        if c != 0:
            out = out + power.scale(c)
    return out


def _split(g: QuasiRegularSeries) -> Tuple[Exp, float, QuasiRegularSeries]:
    """Write ``g = c x**mu (1 + delta)``."""
    if not g.terms:
        raise NotHomeomorphism("empty series")
    mu, poly = g.lead
    if len(poly) != 1 or poly[0] <= 0:
        raise NotHomeomorphism("leading term is not a positive constant times a power")
    c = poly[0]
    delta = QuasiRegularSeries({e - mu: [v / c for v in p] for e, p in g.terms.items() if e != mu},
                               g.trunc - mu)
    return mu, c, delta


def qr_power(g: QuasiRegularSeries, a: Exp) -> QuasiRegularSeries:
    mu, c, delta = _split(g)
    rel = _series_fn(delta, lambda n: _binom(float(a), n))
    return rel.scale(c ** float(a)).shift(mu * a)


def qr_log(g: QuasiRegularSeries) -> QuasiRegularSeries:
    """``ln g`` as a series whose exponent-0 term carries ``ln c + mu L``."""
    mu, c, delta = _split(g)
    rel = _series_fn(delta, lambda n: 0.0 if n == 0 else (-1.0) ** (n + 1) / n)
    base = QuasiRegularSeries({Fraction(0) if isinstance(mu, Fraction) else 0.0: [math.log(c), float(mu)]},
                              rel.trunc)
    return base + rel


def qr_scale(f: QuasiRegularSeries, c: float) -> QuasiRegularSeries:
    return f.scale(c)


def qr_compose(outer: QuasiRegularSeries, inner: QuasiRegularSeries) -> QuasiRegularSeries:
    """``outer(inner(x))``."""
    mu, c, delta = _split(inner)
    if not outer.terms:
        return QuasiRegularSeries({}, outer.trunc * mu)
    lg = qr_log(inner) if any(len(p) > 1 for p in outer.terms.values()) else None
    total = None
    for e, poly in outer.terms.items():
        term = qr_power(inner, e)
        if len(poly) > 1:
            acc = QuasiRegularSeries({Fraction(0): [poly[-1]]}, term.trunc - term.lead[0])
            for coef in reversed(poly[:-1]):
                acc = acc * lg + QuasiRegularSeries({Fraction(0): [coef]}, acc.trunc)
            term = term * acc
        else:
            term = term.scale(poly[0])
        total = term if total is None else total + term
    total.trunc = min(total.trunc, outer.trunc * mu) if math.isfinite(float(outer.trunc)) else total.trunc
    return QuasiRegularSeries(total.terms, total.trunc)


def qr_invert_leading(f: QuasiRegularSeries) -> QuasiRegularSeries:
    """Inverse of the leading term ``c x**lam``: ``(y / c)**(1/lam)``."""
    lam, poly = f.lead
    if len(poly) != 1 or poly[0] <= 0:
        raise NotHomeomorphism("leading term is not a positive constant times a power")
    inv = 1 / lam if isinstance(lam, Fraction) else 1.0 / lam
    return QuasiRegularSeries.monomial(inv, poly[0] ** (-float(inv)))


def qr_inverse(f: QuasiRegularSeries, iterations: int = 8) -> QuasiRegularSeries:
    """Compositional inverse by the iteration ``g <- g * (f(g) / y)**(-1/lam)``."""
    lam, _ = f.lead
    inv = 1 / lam if isinstance(lam, Fraction) else 1.0 / lam
    rel_tr = f.trunc - lam
    g = qr_invert_leading(f)
    g = QuasiRegularSeries(g.terms, inv + rel_tr * inv)
    one = Fraction(1) if isinstance(lam, Fraction) else 1.0
    for _ in range(iterations):
        fg = qr_compose(f, g)
        ratio = QuasiRegularSeries({e - one: p for e, p in fg.terms.items()}, fg.trunc - one)
        g = g * qr_power(ratio, -inv)
    return g


def dulac_series(r, res: Optional[ResonanceInfo], direction: str = "forward",
                 truncation: Optional[int] = None, alpha_override=None) -> QuasiRegularSeries:
    """Leading Dulac series of the linearisable-up-to-resonance saddle.

    ``alpha_override`` replaces ``res.alpha_m`` (used to feed the signed,
    quadrant-dependent coefficient).
    """
    if isinstance(r, Irrational):
        e = r.value if direction == "forward" else 1.0 / r.value
        return QuasiRegularSeries.monomial(e, 1.0, e + (truncation or 5))
    r = Fraction(r)
    p, q = r.numerator, r.denominator
    if direction == "forward":
        lead, a, b = r, p, q
    else:
        lead, a, b = 1 / r, q, p
    if res is None or res.m is None:
        checked = res.checked_up_to if res is not None else (truncation or 5)
        imax = max((checked - 1) // (p + q), 0)
        return QuasiRegularSeries.monomial(lead, 1.0, lead + (imax + 1) * a)
    m = res.m
    alpha = res.alpha_m if alpha_override is None else alpha_override
    if direction == "forward":
        c = -float(alpha) / q
    else:
        c = float(q) * float(alpha) / (p * p)
    e = lead + (m - 1) * a
    return QuasiRegularSeries({lead: [1.0], e: [0.0, c]}, lead + m * a)
