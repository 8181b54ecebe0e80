import math
from fractions import Fraction

import pytest

from blockreg.blowup import VectorField, blowup_x
from blockreg.polyalg import BivarPoly
from blockreg.saddle import (Irrational, NotHomeomorphism, QuasiRegularSeries, ResonanceInfo,
                             dulac_series, normalize_saddle, qr_compose, qr_inverse, resonance_order)

from conftest import perturbed_toy, resonant_toy

F = Fraction


def conjugacy_residual(nf, ch, U=None):
    """``F(phi^-1) - D(phi^-1) G`` truncated to the normal-form order."""
    U = nf.phi_inv[0] if U is None else U
    V = nf.phi_inv[1]
    Gw, Gv = nf.normal_form
    N = nf.N
    out = []
    for comp, H in ((ch.A, U), (ch.B, V)):
        lhs = comp.substitute(U, V, max_degree=N)
        rhs = (H.diff_x() * Gw + H.diff_y() * Gv).truncate(N)
        out.append((lhs - rhs).truncate(N))
    return out


def expected_u(lam):
    return {(1, 0): 1, (1, 2): F(-1, 2), (1, 4): F(-1, 8),
            (2, 0): -3 * lam, (2, 2): F(-12, 5) * lam,
            (3, 0): 9 * lam ** 2, (3, 2): F(-27, 20) * lam ** 2,
            (4, 0): -27 * lam ** 3, (5, 0): 81 * lam ** 4}


@pytest.mark.parametrize("lam", [F(1), F(1, 2), F(-2, 3)])
def test_perturbed_toy_normal_form_exact(lam):
    ch = blowup_x(perturbed_toy(lam))
    nf = normalize_saddle(ch, 5)
    assert nf.r == F(1, 3) and (nf.p, nf.q) == (1, 3)
    assert all(a == 0 for a in nf.alpha)
    U = nf.phi_inv[0]
    assert U.terms == {k: v for k, v in expected_u(lam).items()}
    # normal form is linear: the conjugacy is exact to order 5
    assert all(r.is_zero() for r in conjugacy_residual(nf, ch))


def test_flipped_sign_breaks_conjugacy():
    lam = F(1)
    ch = blowup_x(perturbed_toy(lam))
    nf = normalize_saddle(ch, 5)
    bad = nf.phi_inv[0] + BivarPoly({(2, 2): F(24, 5) * lam})   # -12/5 -> +12/5
    res = conjugacy_residual(nf, ch, U=bad)
    assert not res[0].is_zero()


def test_perturbed_toy_no_resonance():
    nf = normalize_saddle(blowup_x(perturbed_toy(F(1, 2))), 5)
    info = resonance_order(nf)
    assert info.m is None and info.label() == "NoneUpToOrder(5)"


@pytest.mark.parametrize("lam", [F(1, 2), F(1)])
def test_resonant_toy(lam):
    ch = blowup_x(resonant_toy(lam))
    nf = normalize_saddle(ch, 5)
    assert nf.r == F(1, 2)
    Gw, Gv = nf.normal_form
    assert Gw == BivarPoly({(1, 0): F(1, 2), (3, 1): lam})
    assert Gv == BivarPoly({(0, 1): -1, (2, 2): -lam})
    info = resonance_order(nf)
    assert info.m == 2 and info.alpha_m == -lam
    assert all(r.is_zero() for r in conjugacy_residual(nf, ch))


def test_linear_saddle():
    X = VectorField.from_terms({(1, 0): 1}, {(0, 1): F(-2)})
    nf = normalize_saddle(blowup_x(X), 5)
    assert nf.phi_inv[0] == BivarPoly.x() and nf.phi_inv[1] == BivarPoly.y()
    assert all(a == 0 for a in nf.alpha)
    assert resonance_order(nf).m is None


def test_dulac_irrational():
    s = dulac_series(Irrational(math.sqrt(2)), None, "forward")
    assert list(s.terms) == [math.sqrt(2)]


def test_dulac_resonant_half():
    a = 0.7
    res = ResonanceInfo(2, a, 1, 2, 5)
    s = dulac_series(F(1, 2), res, "forward")
    assert s.coefficient(F(1, 2)) == 1.0
    assert abs(s.coefficient(F(3, 2), 1) + a / 2) < 1e-15


def test_dulac_no_resonance_truncation():
    s = dulac_series(F(1, 3), ResonanceInfo(None, 0, 1, 3, 5), "forward")
    assert list(s.terms) == [F(1, 3)] and s.trunc == F(1, 3) + 2


def test_compose_monomials():
    out = qr_compose(QuasiRegularSeries.monomial(F(3)), QuasiRegularSeries.monomial(F(1, 3)))
    assert list(out.terms.items()) == [(F(1), [1.0])]


@pytest.mark.parametrize("c", [0.5, -1.3, 2.0])
def test_compose_binomial_oracle(c):
    inner = QuasiRegularSeries({F(1, 3): [1.0], F(2, 3): [c]}, F(2))
    out = qr_compose(QuasiRegularSeries.monomial(F(3)), inner)
    assert abs(out.coefficient(F(4, 3)) - 3 * c) < 1e-12
    for x in (1e-4, 1e-6):
        exact = (x ** (1 / 3) * (1 + c * x ** (1 / 3))) ** 3
        assert abs(out(x) - exact) < 1e-12 * x


def test_compose_identity_inner():
    beta = -0.4
    f = QuasiRegularSeries({F(1): [1.0], F(2): [0.0, beta]}, F(3))
    out = qr_compose(f, QuasiRegularSeries.monomial(F(1), 1.0, F(3)))
    assert out.coefficient(F(1)) == 1.0 and abs(out.coefficient(F(2), 1) - beta) < 1e-15


def test_compose_rejects_bad_inner():
    with pytest.raises(NotHomeomorphism):
        qr_compose(QuasiRegularSeries.monomial(F(2)), QuasiRegularSeries.monomial(F(1), -1.0))


def test_inverse_of_log_series():
    f = QuasiRegularSeries({F(1, 2): [1.0], F(3, 2): [0.0, -0.35]}, F(5, 2))
    g = qr_inverse(f)
    fg = qr_compose(f, g)
    for e, poly in fg.terms.items():
        want = [1.0] if e == 1 else []
        assert all(abs(a - (want[i] if i < len(want) else 0.0)) < 1e-12 for i, a in enumerate(poly))
