"""Directional blow-ups, characteristic directions and the C0 gate."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .polyalg import (BivarPoly, RootSet, UnivarPoly, complex_roots, homogeneous_components,
                      poly_gcd, real_root_isolation)

INFINITY = math.inf


class NotIsolated(ValueError):
    pass


class ZeroDirectionalPolynomial(ValueError):
    pass


class NotInV(ValueError):
    """A characteristic direction is not simple; outside the supported class."""


@dataclass(frozen=True)
class VectorField:
    P: BivarPoly
    Q: BivarPoly

    def __post_init__(self):
        if self.P.is_zero() and self.Q.is_zero():
            raise ValueError("vector field is identically zero")
        if (0, 0) in self.P.terms or (0, 0) in self.Q.terms:
            raise ValueError("origin is not a singular point")

    @classmethod
    def from_terms(cls, P: dict, Q: dict) -> "VectorField":
        return cls(BivarPoly(P), BivarPoly(Q))

    @property
    def s(self) -> int:
        return min(d for d in (self.P.low_degree, self.Q.low_degree) if d >= 0)

    @property
    def degree(self) -> int:
        return max(self.P.degree, self.Q.degree)

    @property
    def exact(self) -> bool:
        return self.P.exact and self.Q.exact

    def component(self, d: int) -> Tuple[BivarPoly, BivarPoly]:
        return self.P.homogeneous(d), self.Q.homogeneous(d)

    def leading(self) -> "VectorField":
        return VectorField(*self.component(self.s))

    def truncate(self, d: int) -> "VectorField":
        return VectorField(self.P.truncate(d), self.Q.truncate(d))

    def scale(self, c) -> "VectorField":
        return VectorField(self.P * c, self.Q * c)

    def linear_transform(self, T) -> "VectorField":
        """Push forward by u = T z: the new field is ``T X(T^-1 u)``."""
        (a, b), (c, d) = T
        det = a * d - b * c
        if det == 0:
            raise ValueError("singular transform")
        ia, ib, ic, id_ = d / det, -b / det, -c / det, a / det
        x = BivarPoly({(1, 0): ia, (0, 1): ib})
        y = BivarPoly({(1, 0): ic, (0, 1): id_})
        P = self.P.substitute(x, y)
        Q = self.Q.substitute(x, y)
        return VectorField(P * a + Q * b, P * c + Q * d)

    def __call__(self, x, y):
        return self.P(x, y), self.Q(x, y)


@dataclass(frozen=True)
class ChartField:
    chart: str  # "x" or "y"
    A: BivarPoly
    B: BivarPoly
    desingularised: bool
    divided_power: int

    def __call__(self, u, v):
        return self.A(u, v), self.B(u, v)


def blowup_x(X: VectorField, truncation_order: int = 5) -> ChartField:
    """x-chart ``(x, y) = (u, u v)`` with the factor ``u**(s-1)`` removed."""
    s = X.s
    A, B = BivarPoly(), BivarPoly()
    for d in range(s, min(X.degree, s + truncation_order) + 1):
        Pd, Qd = X.component(d)
        p1 = Pd.slice_x1()
        pd = Qd.slice_x1() - UnivarPoly([0, 1]) * p1
        for j, c in enumerate(p1.coeffs):
            A = A + BivarPoly({(d - s + 1, j): c})
        for j, c in enumerate(pd.coeffs):
            B = B + BivarPoly({(d - s, j): c})
    return ChartField("x", A, B, True, s - 1)


def blowup_y(X: VectorField, truncation_order: int = 5) -> ChartField:
    """y-chart ``(x, y) = (u v, v)`` with the factor ``v**(s-1)`` removed."""
    s = X.s
    A, B = BivarPoly(), BivarPoly()
    for d in range(s, min(X.degree, s + truncation_order) + 1):
        Pd, Qd = X.component(d)
        q1 = Qd.slice_y1()
        qd = Pd.slice_y1() - UnivarPoly([0, 1]) * q1
        for i, c in enumerate(qd.coeffs):
            A = A + BivarPoly({(i, d - s): c})
        for i, c in enumerate(q1.coeffs):
            B = B + BivarPoly({(i, d - s + 1): c})
    return ChartField("y", A, B, True, s - 1)


def blow_down_x(ch: ChartField) -> VectorField:
    """Invert :func:`blowup_x` on ``u != 0``; used as a consistency check."""
    # P(u, uv) = u^k A and Q(u, uv) = u^k (v A + u B), k = divided_power
    k = ch.divided_power
    P, Q = BivarPoly(), BivarPoly()
    for (i, j), c in ch.A.terms.items():
        P = P + BivarPoly({(k + i - j, j): c})
        Q = Q + BivarPoly({(k + i - j - 1, j + 1): c})
    for (i, j), c in ch.B.terms.items():
        Q = Q + BivarPoly({(k + i + 1 - j, j): c})
    return VectorField(P, Q)


def directional_polynomial(X: VectorField) -> UnivarPoly:
    """``p(t) = Q_s(1, t) - t P_s(1, t)`` of the leading component."""
    Ps, Qs = X.component(X.s)
    return Qs.slice_x1() - UnivarPoly([0, 1]) * Ps.slice_x1()


def is_isolated(X: VectorField) -> bool:
    """Isolation over the reals of the origin for the leading component.

    A common complex factor (e.g. ``x^2 + y^2``) does not create a real curve
    of zeros, so only shared real linear factors count.
    """
    Ps, Qs = X.component(X.s)
    if not X.exact:
        return True
    pp, qq = Ps.slice_x1(), Qs.slice_x1()
    g = pp if qq.is_zero() else (qq if pp.is_zero() else poly_gcd(pp, qq))
    if g.degree > 0 and real_root_isolation(g):
        return False
    # shared factor x shows up as both slices dropping degree
    def x_divides(f: BivarPoly) -> bool:
        return all(i > 0 for i, _ in f.terms)
    return not (x_divides(Ps) and x_divides(Qs))


@dataclass
class Direction:
    direction: object  # Fraction, float or INFINITY
    multiplicity: int
    r_star: Optional[object] = None
    lambda_along: Optional[object] = None
    lambda_transverse: Optional[object] = None

    @property
    def is_infinite(self) -> bool:
        return isinstance(self.direction, float) and math.isinf(self.direction)


@dataclass
class CharacteristicData:
    directions: List[Direction]
    complex_pairs: List[Tuple[complex, int]]
    is_Vhom: bool
    roots: RootSet = field(repr=False, default=None)

    @property
    def real_count(self) -> int:
        return len(self.directions)

    def total_multiplicity(self) -> int:
        return sum(d.multiplicity for d in self.directions) + 2 * sum(m for _, m in self.complex_pairs)


QUARTER_TURN = ((Fraction(0), Fraction(1)), (Fraction(-1), Fraction(0)))


def _eigen_at(X: VectorField, t) -> Tuple[object, object, object]:
    Ps, _ = X.component(X.s)
    p = directional_polynomial(X)
    lam_a = p.derivative()(t)
    lam_t = Ps.slice_x1()(t)
    return lam_a, lam_t, lam_t / lam_a


def characteristic_data(X: VectorField) -> CharacteristicData:
    L = X.leading()
    if not is_isolated(L):
        raise NotIsolated("leading components share a real factor")
    p = directional_polynomial(L)
    if p.is_zero():
        raise ZeroDirectionalPolynomial("x Q_s - y P_s vanishes identically")
    rs = complex_roots(p, projective_degree=L.s + 1)
    dirs = []
    for t, m in rs.real_roots:
        d = Direction(t, m)
        if m == 1:
            d.lambda_along, d.lambda_transverse, d.r_star = _eigen_at(L, t)
        dirs.append(d)
    if rs.infinity_multiplicity:
        d = Direction(INFINITY, rs.infinity_multiplicity)
        if d.multiplicity == 1:
            R = L.linear_transform(QUARTER_TURN)
            d.lambda_along, d.lambda_transverse, d.r_star = _eigen_at(R, Fraction(0))
        dirs.append(d)
    vhom = all(d.multiplicity == 1 for d in dirs) and all(m == 1 for _, m in rs.complex_pairs)
    return CharacteristicData(dirs, list(rs.complex_pairs), vhom, rs)


def rotation_for(direction) -> Tuple[Tuple[object, object], Tuple[object, object]]:
    """Linear map sending the direction ``(1, t)`` to the positive x-axis.

    For finite ``t`` this is the scaled rotation ``[[1, t], [-t, 1]]``, rational
    whenever ``t`` is; ``t = inf`` uses the quarter turn ``(x, y) -> (y, -x)``.
    """
    if isinstance(direction, float) and math.isinf(direction):
        return QUARTER_TURN
    t = direction
    one = Fraction(1) if isinstance(t, Fraction) else 1.0
    return ((one, t), (-t, one))


def rotate_to_axis(X: VectorField, direction) -> Tuple[VectorField, tuple]:
    if not (isinstance(direction, float) and math.isinf(direction)) and direction == 0:
        T = ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)))
        return X, T
    T = rotation_for(direction)
    return X.linear_transform(T), T


@dataclass
class C0Decision:
    regularisable: bool
    reason: str
    r_star: Optional[object] = None
    direction: Optional[object] = None


def c0_test(X: VectorField) -> C0Decision:
    data = characteristic_data(X.leading())
    if not data.is_Vhom:
        raise NotInV("a characteristic direction has multiplicity > 1")
    if X.s % 2 == 1:
        return C0Decision(False, "parity")
    if data.real_count != 1:
        return C0Decision(False, "count")
    d = data.directions[0]
    if d.r_star >= 0:
        return C0Decision(False, "sign", d.r_star, d.direction)
    return C0Decision(True, "ok", d.r_star, d.direction)
