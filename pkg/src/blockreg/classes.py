"""Regularity classes shared by the canonical-form and block-map stages."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional


class RegularityClass:
    name = "?"

    def label(self) -> str:
        return self.name

    def __str__(self) -> str:
        return self.label()


@dataclass(frozen=True)
class NotRegularisable(RegularityClass):
    reason: str = ""
    name = "NotRegularisable"


@dataclass(frozen=True)
class C0Only(RegularityClass):
    name = "C0Only"


@dataclass(frozen=True)
class C01(RegularityClass):
    """Lipschitz but not C1: the one-sided slopes differ."""
    name = "C01"

    def label(self) -> str:
        return "C01 (C^{0,1})"


@dataclass(frozen=True)
class CAlpha(RegularityClass):
    """``C^alpha`` with ``alpha = 1 + (k-1) r``; ``lipschitz_top`` marks integer ``(k-1) r``."""
    alpha: object
    lipschitz_top: bool = False
    name = "CAlpha"

    def label(self) -> str:
        if self.lipschitz_top:
            n = int(Fraction(self.alpha)) - 1
            return f"CAlpha({self.alpha}) (C^{{{n},1}})"
        return f"CAlpha({self.alpha})"


@dataclass(frozen=True)
class CkLogLip(RegularityClass):
    """``C^k`` whose k-th derivative is Log-Lipschitz; ``(m, p, q)`` kept for reference."""
    k: int
    m: int = 0
    p: int = 0
    q: int = 0
    name = "CkLogLip"

    def label(self) -> str:
        return f"CkLogLip({self.k}) [m={self.m}, p={self.p}, q={self.q}]"


@dataclass(frozen=True)
class CInfUpToOrder(RegularityClass):
    N: int
    name = "CInfUpToOrder"

    def label(self) -> str:
        return f"CInfUpToOrder({self.N})"


@dataclass(frozen=True)
class CInf(RegularityClass):
    """Proven smooth (quadratic canonical family with kappa2 = 0)."""
    name = "CInf"
