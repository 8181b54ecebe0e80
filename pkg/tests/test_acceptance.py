"""Acceptance checks AC1..AC9.

Each check returns ``(ok, message)``.  Under pytest the outcome is recorded for
the end-of-run summary and then asserted; run the file directly to get the
same lines without pytest.
"""
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import mpmath as mp
import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from blockreg.blockmap import _chart_tables, c1_residue_test, variational_at  # noqa: E402
from blockreg.blowup import VectorField, blowup_x, characteristic_data  # noqa: E402
from blockreg.canon import quadratic_canonicalize, quadratic_classify  # noqa: E402
from blockreg.classes import C01, CAlpha, CInf, CkLogLip, NotRegularisable  # noqa: E402
from blockreg.pipeline import analyze, verify  # noqa: E402
from blockreg.polyalg import BivarPoly  # noqa: E402
from blockreg.saddle import normalize_saddle, resonance_order  # noqa: E402

from conftest import AC_RESULTS, canonical, perturbed_toy, resonant_toy  # noqa: E402
from oracles import block_constant, gamma_checked  # noqa: E402

F = Fraction
LADDER = list(np.geomspace(1e-3, 1e-6, 11))


def _join(parts):
    bad = [name for name, ok in parts if not ok]
    return not bad, bad


def ac1():
    t0 = time.perf_counter()
    parts, notes = [], []
    for c1, c2 in ((1, 1), (1, 8)):
        data = characteristic_data(VectorField.from_terms({(0, 2): c1}, {(2, 0): c2}))
        dirs = data.directions
        one = len(dirs) == 1
        d = dirs[0]
        base = float(F(c1) * F(c2) ** 2) ** (1 / 3)
        eig = abs(float(d.lambda_transverse) - base) < 1e-12 * base \
            and abs(float(d.lambda_along) + 3 * base) < 1e-12 * base
        parts += [(f"one direction ({c1},{c2})", one),
                  (f"r*=-1/3 exact ({c1},{c2})", d.r_star == F(-1, 3) and isinstance(d.r_star, F)),
                  (f"eigenvalues ({c1},{c2})", eig)]
        notes.append(f"({c1},{c2}): {d.lambda_transverse}, {d.lambda_along}")
    an = analyze(VectorField.from_terms({(0, 2): 1}, {(2, 0): 1}))
    parts.append(("pipeline r*", an.report.r_star == F(-1, 3)))
    dt = time.perf_counter() - t0
    parts.append(("runtime < 1 s", dt < 1.0))
    ok, bad = _join(parts)
    return ok, f"r*=-1/3 exact; eigenpairs {'; '.join(notes)}; {dt:.2f}s" + (f"; failed: {bad}" if bad else "")


def ac2():
    parts, vals = [], []
    t0 = time.perf_counter()
    rot = c1_residue_test(VectorField.from_terms({(2, 0): 1, (0, 2): 1}, {(1, 1): -2}))
    parts.append(("rotated residue sum", abs(rot.residue_sum) < 1e-10 and rot.passes_C1))
    parts.append(("runtime rotated", time.perf_counter() - t0 < 1.0))
    for k2 in (F(-1), F(-1, 2), F(1, 2), F(1)):
        t0 = time.perf_counter()
        pv = c1_residue_test(canonical(F(-1, 3), k2)).principal_value
        err = abs(pv + float(k2) * math.pi)
        vals.append(f"{k2}:{err:.1e}")
        parts += [(f"PV k2={k2}", err < 1e-9), (f"runtime k2={k2}", time.perf_counter() - t0 < 1.0)]
    ok, bad = _join(parts)
    return ok, f"residue sum {rot.residue_sum:.1e}; |PV + k2 pi| {' '.join(vals)}" + (f"; failed: {bad}" if bad else "")


def ac3():
    expected = {(F(-1), F(0)): CInf, (F(-1), F(1, 2)): C01,
                (F(-1, 3), F(0)): CInf, (F(-1, 3), F(1, 2)): C01,
                (F(1, 3), F(0)): NotRegularisable, (F(1, 3), F(1, 2)): NotRegularisable}
    parts, got = [], []
    for (k1, k2), want in expected.items():
        cls = quadratic_classify(quadratic_canonicalize(canonical(k1, k2)))
        # the full pipeline must agree on the side of the C1 line
        an = analyze(canonical(k1, k2))
        pipe_ok = isinstance(an.cls, NotRegularisable) if want is NotRegularisable else \
            (isinstance(an.cls, C01) if want is C01 else not isinstance(an.cls, (C01, NotRegularisable)))
        parts.append((f"({k1},{k2})", isinstance(cls, want) and pipe_ok))
        got.append(f"({k1},{k2})={cls.label()}")
    ok, bad = _join(parts)
    return ok, " ".join(got) + (f"; failed: {bad}" if bad else "")


# golden phi^-1 coefficients at lambda = 1
STATED_PHI_INV = {(1, 2): F(-1, 2), (1, 4): F(-1, 8), (2, 0): F(-3), (2, 2): F(12, 5),
                 (3, 0): F(9), (3, 2): F(-27, 20), (4, 0): F(-27), (5, 0): F(81)}


def ac4():
    t0 = time.perf_counter()
    nf = normalize_saddle(blowup_x(perturbed_toy(F(1))), 5)
    U = nf.phi_inv[0]
    dt = time.perf_counter() - t0
    wrong = {m: (U.terms.get(m, 0), c) for m, c in STATED_PHI_INV.items() if U.terms.get(m, 0) != c}
    # test_saddle checks the computed value against the conjugacy residual
    fixed = U.terms.get((2, 2))
    ok = not wrong and dt < 10
    msg = f"{len(STATED_PHI_INV) - len(wrong)}/{len(STATED_PHI_INV)} coefficients match; {dt:.2f}s"
    if wrong:
        msg += "; mismatches " + ", ".join(f"w^{i}v^{j}: got {g} want {w}" for (i, j), (g, w) in wrong.items())
        msg += f" (computed {fixed} gives an exact conjugacy, see test_saddle)"
    return ok, msg


def ac5():
    lam = F(1, 2)
    nf = normalize_saddle(blowup_x(resonant_toy(lam)), 5)
    res = resonance_order(nf)
    an = analyze(resonant_toy(lam))
    Gw, Gv = nf.normal_form
    stated_w = BivarPoly({(1, 0): F(1), (3, 1): lam})
    stated_v = BivarPoly({(0, 1): F(-1), (2, 2): -lam})
    up = an.report.upper_series
    log_c = up.coefficient(F(2), 1)
    parts = [("m = 2", res.m == 2),
             ("normal form as stated", Gw == stated_w and Gv == stated_v),
             ("second variational zero", an.transition.second_order_variational_zero
              and an.transition.k is None),
             ("block map x + lambda x^2 ln x", abs(log_c - float(lam)) < 1e-9),
             ("CkLogLip", isinstance(an.cls, CkLogLip))]
    ok, bad = _join(parts)
    msg = f"m={res.m}, X_N=({Gw}, {Gv}), x^2 ln x coefficient {log_c:.6g} (stated {float(lam)}), {an.cls.label()}"
    if bad:
        msg += f"; failed: {bad}"
    return ok, msg


def ac6():
    K = block_constant()
    parts, coefs, info = [], {}, []
    for lam in (F(1, 4), F(1, 2), F(1)):
        t0 = time.perf_counter()
        an = analyze(perturbed_toy(lam))
        dt = time.perf_counter() - t0
        c = an.report.leading_correction_coefficient
        want = float(lam) * K
        coefs[lam] = c
        rel = abs(c - want) / abs(want)
        parts += [(f"class lam={lam}", an.cls == CAlpha(F(4, 3))),
                  (f"coef lam={lam}", rel < 0.01), (f"runtime lam={lam}", dt < 120)]
        info.append(f"{lam}:{c:.5g} ({rel:.1e})")
    lin = max(abs(coefs[l] / float(l) - coefs[F(1)]) / abs(coefs[F(1)]) for l in coefs)
    parts.append(("linear in lambda", lin < 0.01))
    ok, bad = _join(parts)
    return ok, f"K={K:.6g}; " + " ".join(info) + f"; linearity {lin:.1e}" + (f"; failed: {bad}" if bad else "")


def ac7():
    mp.mp.dps = 30
    lam = F(1, 2)
    TA, TB, _ = _chart_tables(perturbed_toy(lam), 3)
    Dc = mp.sqrt(mp.pi) * gamma_checked(mp.mpf(-1) / 6) / (2 * gamma_checked(mp.mpf(1) / 3))
    errs = []
    for eps in (1e-2, 1e-3):
        X = 1 / eps
        G = variational_at(TA, TB, 3, X)
        J = -G[1] / (F(2, 3) * float(lam) * G[0])
        S = ((mp.mpf(16) / 3) * J * (1 + X ** 2) ** (mp.mpf(4) / 3) / X + 9 + 11 * X ** 2) / (9 * (1 + X ** 2) ** 2)
        ref = 3 * mp.mpf(eps) ** 2 + Dc * mp.mpf(eps) ** (mp.mpf(7) / 3)
        errs.append(float(abs(S - ref) / ref))
    ratio = errs[0] / errs[1]
    # relative error ~ eps^2, so a decade in eps should shrink it by ~100
    ok = errs[1] < errs[0] and 50 <= ratio <= 200
    return ok, f"relative errors {errs[0]:.2e}, {errs[1]:.2e}; ratio {ratio:.1f} (window 50..200)"


def ac8():
    parts, info = [], []
    t0 = time.perf_counter()
    an = analyze(perturbed_toy(F(1, 2)))
    v = verify(an, ladder=LADDER)
    fu = v.fit_upper
    ys = [s.y_in for s in v.upper]
    rel = v.verdict.details
    pred, got = rel.get("predicted_relative"), fu.relative_coefficient
    parts += [("alpha", abs(fu.alpha - 4 / 3) < 0.05),
              ("coefficient 5%", pred is not None and abs(got - pred) < 0.05 * abs(pred)),
              ("ladder range", min(ys) >= 1e-6 * 0.999 and max(ys) <= 1e-3 * 1.001),
              ("runtime perturbed", time.perf_counter() - t0 < 60)]
    info.append(f"alpha={fu.alpha:.4f} coef={got:.4g} vs {pred:.4g}" if pred is not None else f"alpha={fu.alpha:.4f}")

    t0 = time.perf_counter()
    v = verify(analyze(canonical(F(-1, 3), F(1, 2))))
    su, sl = v.fit_upper.slope, v.fit_lower.slope
    parts += [("slope product", abs(su * sl - 1) < 1e-4), ("slopes != 1", abs(su - 1) > 1e-3),
              ("runtime C01", time.perf_counter() - t0 < 60)]
    info.append(f"slopes {su:.6g}*{sl:.6g}-1={su * sl - 1:.1e}")

    t0 = time.perf_counter()
    v = verify(analyze(canonical(F(-1, 3), F(0))))
    tol = 1e-12   # relative tolerance handed to the integrator
    dev = max(abs(s.y_out - s.y_in) / (10 * tol * abs(s.y_in)) for s in v.upper + v.lower)
    parts += [("identity", dev <= 1.0), ("runtime identity", time.perf_counter() - t0 < 60)]
    info.append(f"identity deviation {dev:.2f} of 10x tolerance")
    ok, bad = _join(parts)
    return ok, "; ".join(info) + (f"; failed: {bad}" if bad else "")


def ac9():
    """The randomized suites live in test_properties; here we confirm they pass."""
    import subprocess
    here = Path(__file__).parent
    r = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                        str(here / "test_properties.py"),
                        str(here / "test_numverify.py") + "::test_section_independence"],
                       capture_output=True, text=True, cwd=here.parent)
    last = r.stdout.strip().splitlines()[-1] if r.stdout.strip() else r.stderr.strip()[-200:]
    return r.returncode == 0, f"property suites and section independence: {last}"


CHECKS = {f"AC{i}": fn for i, fn in enumerate([ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8, ac9], 1)}


def _check(key):
    ok, msg = CHECKS[key]()
    AC_RESULTS[key] = (ok, msg)
    assert ok, msg


def test_ac1_toy_critical_value():
    _check("AC1")


def test_ac2_residue_test():
    _check("AC2")


def test_ac3_quadratic_table():
    _check("AC3")


def test_ac4_normal_form_golden():
    _check("AC4")


def test_ac5_resonance():
    _check("AC5")


def test_ac6_block_coefficient():
    _check("AC6")


def test_ac7_section_quantity():
    _check("AC7")


def test_ac8_numeric_verification():
    _check("AC8")


def test_ac9_properties():
    _check("AC9")


if __name__ == "__main__":
    failed = 0
    for key, fn in CHECKS.items():
        ok, msg = fn()
        failed += not ok
        print(f"{key}: {'PASS' if ok else 'FAIL'}  {msg}")
    sys.exit(1 if failed else 0)
