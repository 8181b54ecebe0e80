"""Mobius reduction of direction triples and the quadratic canonical form."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Tuple

from .blowup import (NotInV, VectorField, characteristic_data, directional_polynomial,
                     rotate_to_axis)
from .classes import C01, CInf, NotRegularisable, RegularityClass


class DegenerateRoots(ValueError):
    pass


class NotCanonicalizable(ValueError):
    pass


class Unsupported(ValueError):
    pass


@dataclass(frozen=True)
class MobiusTransform:
    """``v -> (c + d v) / (a + b v)``, real coefficients."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if self.a * self.d - self.b * self.c == 0:
            raise ValueError("degenerate Mobius transform")

    @classmethod
    def identity(cls) -> "MobiusTransform":
        return cls(1.0, 0.0, 0.0, 1.0)

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def __call__(self, v):
        if isinstance(v, float) and math.isinf(v):
            return math.inf if self.b == 0 else self.d / self.b
        den = self.a + self.b * v
        if den == 0:
            return math.inf
        return (self.c + self.d * v) / den

    def _matrix(self):
        # acts as [[d, c], [b, a]] on (v, 1)
        return ((self.d, self.c), (self.b, self.a))

    @staticmethod
    def _from_matrix(m) -> "MobiusTransform":
        (d, c), (b, a) = m
        return MobiusTransform(a, b, c, d)

    def compose(self, other: "MobiusTransform") -> "MobiusTransform":
        """``self o other``."""
        (p, q), (r, s) = self._matrix()
        (t, u), (v, w) = other._matrix()
        return self._from_matrix(((p * t + q * v, p * u + q * w), (r * t + s * v, r * u + s * w)))

    def inverse(self) -> "MobiusTransform":
        (p, q), (r, s) = self._matrix()
        det = p * s - q * r
        return self._from_matrix(((s / det, -q / det), (-r / det, p / det)))

    def normalized(self) -> "MobiusTransform":
        k = 1.0 / math.sqrt(abs(self.det))
        return MobiusTransform(self.a * k, self.b * k, self.c * k, self.d * k)


def _is_inf(v) -> bool:
    return isinstance(v, float) and math.isinf(v)


def _is_real(r) -> bool:
    return _is_inf(r) or abs(complex(r).imag) < 1e-14


def mobius_reduce_cubic(roots: Sequence) -> Tuple[Tuple, MobiusTransform]:
    """Return ``(representative, S)`` with ``S^{-1}`` sending the roots to the representative.

    ``roots`` holds three projective roots of a real cubic: real numbers,
    ``math.inf`` or complex numbers (a conjugate pair).
    """
    roots = list(roots)
    if len(roots) != 3:
        raise ValueError("need three roots")
    for i in range(3):
        for j in range(i + 1, 3):
            a, b = roots[i], roots[j]
            if _is_inf(a) or _is_inf(b):
                if _is_inf(a) and _is_inf(b):
                    raise DegenerateRoots("repeated characteristic direction")
            elif abs(a - b) < 1e-12:
                raise DegenerateRoots("repeated characteristic direction")
    real = [r for r in roots if _is_real(r)]
    if len(real) == 1:
        t0 = real[0]
        z = next(complex(r) for r in roots if not _is_real(r))
        if z.imag < 0:
            z = z.conjugate()
        if _is_inf(t0):
            M1 = MobiusTransform(0.0, 1.0, -1.0, 0.0)       # v -> -1/v
        else:
            M1 = MobiusTransform(1.0, 0.0, -float(complex(t0).real), 1.0)  # v -> v - t0
        w = complex(M1(z))
        mu, nu = w.real, w.imag
        # v -> v / (a + b v) fixes 0 and sends w to i; det = a > 0
        M2 = MobiusTransform((mu * mu + nu * nu) / nu, -mu / nu, 0.0, 1.0)
        Sinv = M2.compose(M1).normalized()
        return (0.0, -1j, 1j), Sinv.inverse()
    if len(real) == 3:
        t1, t2, t3 = [math.inf if _is_inf(r) else float(complex(r).real) for r in roots]
        return (0.0, math.inf, 1.0), _three_point(t1, t2, t3).inverse()
    raise ValueError("roots are not those of a real cubic")


def _three_point(t1, t2, t3) -> MobiusTransform:
    """Mobius map with t1 -> 0, t2 -> inf, t3 -> 1."""
    if _is_inf(t1):
        return MobiusTransform(-t2, 1.0, t3 - t2, 0.0)   # v -> (t3 - t2) / (v - t2)
    if _is_inf(t2):
        return MobiusTransform(t3 - t1, 0.0, -t1, 1.0)   # v -> (v - t1) / (t3 - t1)
    if _is_inf(t3):
        return MobiusTransform(-t2, 1.0, -t1, 1.0)       # v -> (v - t1) / (v - t2)
    k = (t3 - t2) / (t3 - t1)
    return MobiusTransform(-t2, 1.0, -t1 * k, k)


@dataclass
class QuadraticCanonical:
    kappa1: float
    kappa2: float
    transform: Tuple[Tuple[float, float], Tuple[float, float]]
    scale: float
    field: VectorField = None


def _matmul(A, B):
    return tuple(tuple(sum(A[i][k] * B[k][j] for k in range(2)) for j in range(2)) for i in range(2))


def quadratic_canonicalize(X: VectorField) -> QuadraticCanonical:
    if X.s != 2 or X.degree != 2:
        raise Unsupported("canonical form only for homogeneous quadratic fields")
    data = characteristic_data(X)
    if not data.is_Vhom:
        raise NotInV("repeated characteristic direction")
    if data.real_count == 3:
        raise NotCanonicalizable("three real characteristic directions")
    t0 = data.directions[0].direction
    Y, T1 = rotate_to_axis(X, t0)
    # remaining roots of the aligned directional polynomial: a conjugate pair
    z = characteristic_data(Y).complex_pairs[0][0]
    mu, nu = z.real, z.imag
    a, b = (mu * mu + nu * nu) / nu, -mu / nu
    T2 = ((a, b), (0.0, 1.0))
    Z = Y.linear_transform(T2)
    c = -float(Z.P.terms.get((0, 2), 0))
    T = _matmul(T2, T1)
    if c < 0:
        # rotation by pi flips the sign of an even-degree field
        T = tuple(tuple(-v for v in row) for row in T)
        Z = Z.linear_transform(((-1.0, 0.0), (0.0, -1.0)))
        c = -c
    Z = Z.scale(1.0 / c)
    Z = Z.__class__(Z.P.map_coeffs(float), Z.Q.map_coeffs(float))
    k1 = float(Z.P.terms.get((2, 0), 0.0))
    k2 = float(Z.P.terms.get((1, 1), 0.0))
    T = tuple(tuple(float(v) for v in row) for row in T)
    return QuadraticCanonical(k1, k2, T, 1.0 / c, Z)


def canonical_field(k1, k2) -> VectorField:
    return VectorField.from_terms({(2, 0): k1, (1, 1): k2, (0, 2): -1},
                                  {(1, 1): k1 + 1, (0, 2): k2})


def quadratic_classify(c: QuadraticCanonical, tol: float = 1e-10) -> RegularityClass:
    if c.kappa1 >= 0:
        return NotRegularisable("kappa1 >= 0")
    if abs(c.kappa2) <= tol:
        return CInf()
    return C01()
