"""Exact rational polynomials, Sturm root isolation and complex roots.

Coefficients are ``fractions.Fraction`` wherever the input is rational.  The
classes also accept floats so that fields transformed by an irrational linear
map can flow through the same code; exact-only routines (Sturm chains, gcd)
refuse float input.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Number
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

Rational = Fraction


class NonConvergence(ArithmeticError):
    """Root polishing did not reach the requested residual."""


def _is_exact(c) -> bool:
    return isinstance(c, (int, Fraction))


def as_rational(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v.strip())
    raise TypeError(f"not an exact rational: {v!r}")


# ---------------------------------------------------------------- univariate

class UnivarPoly:
    """Dense univariate polynomial, ``coeffs[k]`` multiplies ``t**k``."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [Fraction(c) if isinstance(c, int) else c for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: Tuple = tuple(cs)

    @classmethod
    def monomial(cls, k: int, c=1) -> "UnivarPoly":
        return cls([0] * k + [c])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def exact(self) -> bool:
        return all(_is_exact(c) for c in self.coeffs)

    def lc(self):
        return self.coeffs[-1]

    def __eq__(self, other) -> bool:
        if isinstance(other, Number):
            other = UnivarPoly([other])
        return isinstance(other, UnivarPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"UnivarPoly({[str(c) for c in self.coeffs]})"

    def __add__(self, other) -> "UnivarPoly":
        other = _upoly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return UnivarPoly(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self) -> "UnivarPoly":
        return UnivarPoly(-c for c in self.coeffs)

    def __sub__(self, other) -> "UnivarPoly":
        return self + (-_upoly(other))

    def __rsub__(self, other) -> "UnivarPoly":
        return _upoly(other) - self

    def __mul__(self, other) -> "UnivarPoly":
        other = _upoly(other)
        if self.is_zero() or other.is_zero():
            return UnivarPoly()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return UnivarPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "UnivarPoly":
        out = UnivarPoly([1])
        for _ in range(n):
            out = out * self
        return out

    def __call__(self, t):
        acc = 0 * t if not isinstance(t, (int, Fraction)) else Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def derivative(self) -> "UnivarPoly":
        return UnivarPoly(k * c for k, c in enumerate(self.coeffs) if k > 0)

    def divmod(self, other: "UnivarPoly") -> Tuple["UnivarPoly", "UnivarPoly"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self.coeffs)
        q = [0] * max(len(r) - other.degree, 1)
        lc = other.lc()
        for k in range(len(r) - 1, other.degree - 1, -1):
            c = r[k] / lc if _is_exact(r[k]) and _is_exact(lc) else r[k] / lc
            if c == 0:
                continue
            q[k - other.degree] = c
            for j, b in enumerate(other.coeffs):
                r[k - other.degree + j] -= c * b
        rem = UnivarPoly(r[: other.degree])
        return UnivarPoly(q), rem

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def __mod__(self, other):
        return self.divmod(other)[1]

    def monic(self) -> "UnivarPoly":
        if self.is_zero():
            return self
        lc = self.lc()
        return UnivarPoly(c / lc for c in self.coeffs)

    def to_float(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs], dtype=float)

    def compose_linear(self, a, b) -> "UnivarPoly":
        """Return ``p(a + b t)``."""
        out = UnivarPoly()
        base = UnivarPoly([a, b])
        for c in reversed(self.coeffs):
            out = out * base + c
        return out

    def reversed_poly(self, n: Optional[int] = None) -> "UnivarPoly":
        """``t**n p(1/t)`` for ``n >= degree``."""
        n = self.degree if n is None else n
        cs = list(self.coeffs) + [0] * (n + 1 - len(self.coeffs))
        return UnivarPoly(reversed(cs))


def _upoly(v) -> UnivarPoly:
    if isinstance(v, UnivarPoly):
        return v
    return UnivarPoly([v])


def poly_gcd(a: UnivarPoly, b: UnivarPoly) -> UnivarPoly:
    """Monic gcd over Q."""
    if not (a.exact and b.exact):
        raise TypeError("gcd needs exact coefficients")
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def square_free_decomposition(p: UnivarPoly) -> List[Tuple[UnivarPoly, int]]:
    """Yun's algorithm.  Returns ``[(f_k, k)]`` with ``p = lc * prod f_k**k``."""
    if p.is_zero():
        return []
    out = []
    dp = p.derivative()
    a = poly_gcd(p, dp)
    b = p.monic() // a
    c = dp.monic() * (dp.lc() / p.lc()) // a if not dp.is_zero() else UnivarPoly()
    d = c - b.derivative()
    k = 1
    while b.degree > 0:
        g = poly_gcd(b, d)
        if g.degree > 0:
            out.append((g, k))
        b = b // g
        c = d // g
        d = c - b.derivative()
        k += 1
    return out


# ---------------------------------------------------------------- Sturm

def sturm_sequence(p: UnivarPoly) -> List[UnivarPoly]:
    seq = [p, p.derivative()]
    while not seq[-1].is_zero():
        r = seq[-2] % seq[-1]
        seq.append(-r)
    return seq[:-1]


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def _variations(seq: Sequence[UnivarPoly], t) -> int:
    signs = [_sign(q(t)) for q in seq]
    signs = [s for s in signs if s != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _variations_inf(seq: Sequence[UnivarPoly], positive: bool) -> int:
    signs = []
    for q in seq:
        s = _sign(q.lc())
        if not positive and q.degree % 2 == 1:
            s = -s
        signs.append(s)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def cauchy_bound(p: UnivarPoly) -> Fraction:
    lc = abs(p.lc())
    return 1 + max((abs(c) / lc for c in p.coeffs[:-1]), default=Fraction(0))


def count_real_roots(p: UnivarPoly, a=None, b=None) -> int:
    """Distinct real roots in the half-open interval (a, b]; ``None`` means infinite."""
    seq = sturm_sequence(p)
    va = _variations_inf(seq, False) if a is None else _variations(seq, a)
    vb = _variations_inf(seq, True) if b is None else _variations(seq, b)
    return va - vb


def real_root_isolation(p: UnivarPoly) -> List[Tuple[Fraction, Fraction]]:
    """Disjoint rational intervals ``(a, b]``, one per distinct real root."""
    if p.is_zero() or p.degree < 1:
        return []
    seq = sturm_sequence(p)
    B = cauchy_bound(p)
    out: List[Tuple[Fraction, Fraction]] = []
    stack = [(-B, B, _variations(seq, -B), _variations(seq, B))]
    while stack:
        a, b, va, vb = stack.pop()
        n = va - vb
        if n == 0:
            continue
        if n == 1:
            out.append((a, b))
            continue
        m = (a + b) / 2
        vm = _variations(seq, m)
        stack.append((m, b, vm, vb))
        stack.append((a, m, va, vm))
    out.sort()
    return out


def refine_root(p: UnivarPoly, a: Fraction, b: Fraction, width) -> Tuple[Fraction, Fraction]:
    """Bisect the isolating interval ``(a, b]`` of a squarefree ``p`` below ``width``."""
    width = Fraction(width)
    if p(b) == 0:
        return b, b
    sb = _sign(p(b))
    while b - a > width:
        m = (a + b) / 2
        pm = p(m)
        if pm == 0:
            return m, m
        if _sign(pm) == sb:
            b = m
        else:
            a = m
    return a, b


def exact_rational_root(p: UnivarPoly, a: Fraction, b: Fraction) -> Optional[Fraction]:
    """The root in ``(a, b]`` if it is rational, else ``None``."""
    if not p.exact:
        return None
    den = 1
    for c in p.coeffs:
        den = den * c.denominator // np.gcd(den, c.denominator)
    ip = [int(c * den) for c in p.coeffs]
    lead = abs(ip[-1])
    lo, hi = refine_root(p, a, b, Fraction(1, 2 * lead * lead + 1))
    if lo == hi:
        return lo
    cand = ((lo + hi) / 2).limit_denominator(lead)
    return cand if p(cand) == 0 else None


# ---------------------------------------------------------------- roots

@dataclass
class RootSet:
    real_roots: List[Tuple[object, int]] = field(default_factory=list)
    complex_pairs: List[Tuple[complex, int]] = field(default_factory=list)
    infinity_multiplicity: int = 0

    @property
    def has_root_at_infinity(self) -> bool:
        return self.infinity_multiplicity > 0

    def total_multiplicity(self) -> int:
        return (sum(m for _, m in self.real_roots)
                + 2 * sum(m for _, m in self.complex_pairs)
                + self.infinity_multiplicity)

    def all_complex(self) -> List[complex]:
        out = [complex(float(v)) for v, m in self.real_roots for _ in range(m)]
        for z, m in self.complex_pairs:
            out += [z, z.conjugate()] * m
        return out


def _polish(coeffs: np.ndarray, z: complex, tol: float, budget: int) -> complex:
    """Newton iteration on a float polynomial (ascending coefficients)."""
    c = coeffs[::-1]
    dc = np.polyder(c)
    scale = 1.0 + np.abs(coeffs).sum()
    for _ in range(budget):
        f = np.polyval(c, z)
        if abs(f) <= tol * scale * max(1.0, abs(z)) ** len(coeffs):
            return z
        d = np.polyval(dc, z)
        if d == 0:
            break
        z = z - f / d
    f = np.polyval(c, z)
    if abs(f) <= 1e3 * tol * scale * max(1.0, abs(z)) ** len(coeffs):
        return z
    raise NonConvergence(f"root polish stalled near {z}")


def _float_roots(p: UnivarPoly, tol: float, budget: int) -> List[complex]:
    cs = p.to_float()
    if len(cs) <= 1:
        return []
    cs = cs / cs[-1]
    comp = np.roots(cs[::-1])
    return [_polish(cs, complex(z), tol, budget) for z in comp]


def complex_roots(p: UnivarPoly, tol_root: float = 1e-12, budget: int = 200,
                  projective_degree: Optional[int] = None) -> RootSet:
    """All roots of ``p`` with multiplicities.

    Multiplicities come from the exact square-free decomposition when ``p`` is
    rational.  ``projective_degree`` adds a root at infinity of multiplicity
    ``projective_degree - deg p``.
    """
    rs = RootSet()
    if p.is_zero():
        return rs
    if projective_degree is not None:
        rs.infinity_multiplicity = projective_degree - p.degree
    factors = square_free_decomposition(p) if p.exact else [(p, 1)]
    for f, mult in factors:
        if f.exact:
            for a, b in real_root_isolation(f):
                q = exact_rational_root(f, a, b)
                if q is None:
                    lo, hi = refine_root(f, a, b, Fraction(1, 10 ** 18))
                    q = float((lo + hi) / 2)
                rs.real_roots.append((q, mult))
            n_real = len(real_root_isolation(f))
            zs = [z for z in _float_roots(f, tol_root, budget)]
            zs.sort(key=lambda z: abs(z.imag))
            cplx = [z for z in zs[n_real:] if z.imag > 0]
            if 2 * len(cplx) != f.degree - n_real:
                raise NonConvergence("complex roots did not pair up")
            rs.complex_pairs += [(z, mult) for z in cplx]
        else:
            zs = _float_roots(f, tol_root, budget)
            scale = 1.0 + float(np.abs(f.to_float()).sum())
            for z in zs:
                if abs(z.imag) <= 1e-9 * max(1.0, abs(z)):
                    rs.real_roots.append((z.real, mult))
                elif z.imag > 0:
                    rs.complex_pairs.append((z, mult))
            del scale
    rs.real_roots.sort(key=lambda rm: float(rm[0]))
    rs.complex_pairs.sort(key=lambda zm: (zm[0].real, zm[0].imag))
    return rs


def square_free_multiplicities(p: UnivarPoly, projective_degree: Optional[int] = None,
                               tol_root: float = 1e-12) -> RootSet:
    return complex_roots(p, tol_root=tol_root, projective_degree=projective_degree)


# ---------------------------------------------------------------- bivariate

class BivarPoly:
    """Sparse polynomial in (x, y): ``{(i, j): coeff}`` with no stored zeros."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Dict[Tuple[int, int], object]] = None):
        t = {}
        for k, v in (terms or {}).items():
            if isinstance(v, int):
                v = Fraction(v)
            if v != 0:
                t[(int(k[0]), int(k[1]))] = v
        self.terms: Dict[Tuple[int, int], object] = t

    @classmethod
    def x(cls) -> "BivarPoly":
        return cls({(1, 0): 1})

    @classmethod
    def y(cls) -> "BivarPoly":
        return cls({(0, 1): 1})

    @classmethod
    def const(cls, c) -> "BivarPoly":
        return cls({(0, 0): c})

    @property
    def degree(self) -> int:
        return max((i + j for i, j in self.terms), default=-1)

    @property
    def low_degree(self) -> int:
        return min((i + j for i, j in self.terms), default=-1)

    @property
    def exact(self) -> bool:
        return all(_is_exact(c) for c in self.terms.values())

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        return isinstance(other, BivarPoly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self) -> str:
        body = " + ".join(f"{c}*x^{i}y^{j}" for (i, j), c in sorted(self.terms.items()))
        return f"BivarPoly({body or '0'})"

    def __add__(self, other) -> "BivarPoly":
        other = _bpoly(other)
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, 0) + v
        return BivarPoly(t)

    __radd__ = __add__

    def __neg__(self) -> "BivarPoly":
        return BivarPoly({k: -v for k, v in self.terms.items()})

    def __sub__(self, other) -> "BivarPoly":
        return self + (-_bpoly(other))

    def __rsub__(self, other) -> "BivarPoly":
        return _bpoly(other) - self

    def __mul__(self, other) -> "BivarPoly":
        other = _bpoly(other)
        t: Dict[Tuple[int, int], object] = {}
        for (i, j), a in self.terms.items():
            for (k, l), b in other.terms.items():
                key = (i + k, j + l)
                t[key] = t.get(key, 0) + a * b
        return BivarPoly(t)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "BivarPoly":
        out = BivarPoly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def __call__(self, x, y):
        return sum((c * x ** i * y ** j for (i, j), c in self.terms.items()), 0 * x)

    def map_coeffs(self, f) -> "BivarPoly":
        return BivarPoly({k: f(v) for k, v in self.terms.items()})

    def homogeneous(self, d: int) -> "BivarPoly":
        return BivarPoly({k: v for k, v in self.terms.items() if k[0] + k[1] == d})

    def truncate(self, d: int) -> "BivarPoly":
        return BivarPoly({k: v for k, v in self.terms.items() if k[0] + k[1] <= d})

    def diff_x(self) -> "BivarPoly":
        return BivarPoly({(i - 1, j): i * c for (i, j), c in self.terms.items() if i > 0})

    def diff_y(self) -> "BivarPoly":
        return BivarPoly({(i, j - 1): j * c for (i, j), c in self.terms.items() if j > 0})

    def slice_x1(self) -> UnivarPoly:
        """``t -> f(1, t)``."""
        n = max((j for _, j in self.terms), default=-1) + 1
        cs = [0] * n
        for (i, j), c in self.terms.items():
            cs[j] += c
        return UnivarPoly(cs)

    def slice_y1(self) -> UnivarPoly:
        """``t -> f(t, 1)``."""
        n = max((i for i, _ in self.terms), default=-1) + 1
        cs = [0] * n
        for (i, j), c in self.terms.items():
            cs[i] += c
        return UnivarPoly(cs)

    def substitute(self, X: "BivarPoly", Y: "BivarPoly", max_degree: Optional[int] = None) -> "BivarPoly":
        """``f(X(x,y), Y(x,y))``, optionally truncated by total degree."""
        out = BivarPoly()
        xp = {0: BivarPoly.const(1)}
        yp = {0: BivarPoly.const(1)}

        def pw(cache, base, n):
            if n not in cache:
                cache[n] = pw(cache, base, n - 1) * base
                if max_degree is not None:
                    cache[n] = cache[n].truncate(max_degree)
            return cache[n]

        for (i, j), c in self.terms.items():
            term = pw(xp, X, i) * pw(yp, Y, j)
            if max_degree is not None:
                term = term.truncate(max_degree)
            out = out + term * c
        return out


def _bpoly(v) -> BivarPoly:
    if isinstance(v, BivarPoly):
        return v
    return BivarPoly.const(v)


def homogeneous_components(f: BivarPoly) -> List[Tuple[int, BivarPoly]]:
    degs = sorted({i + j for i, j in f.terms})
    return [(d, f.homogeneous(d)) for d in degs]
