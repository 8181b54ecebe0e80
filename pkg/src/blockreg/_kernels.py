"""Hot loops: adaptive Dormand-Prince integration of the two ODEs we need.

``kind == 0``: transition across the singular point,
    d(ln|y|)/dx = Q(x, y) / (y P(x, y)),  y = sign * exp(eta),
with P and Q given as monomial tables (rows ``[coef, i, j]``).

``kind == 1``: variational equations of the y-chart flow in ``s = asinh(xb)``,
    dG/ds = cosh(s) [ sum_i r_i(xb) Y^i ]_{eta^j},  Y = sum_j G_j eta^j,
where ``r_i`` are the ybar-Taylor coefficients of ``B/A`` and the rows of the
two coefficient tables hold ``A_j(xb)`` and ``B_j(xb)`` (ascending powers).

Set ``BLOCKREG_NO_NUMBA=1`` to run the same code as plain numpy/Python.
"""
from __future__ import annotations

import math
import os

import numpy as np

USE_NUMBA = os.environ.get("BLOCKREG_NO_NUMBA", "0") not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False

if not USE_NUMBA:
    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]
        return lambda f: f


# status codes
OK, TRANSVERSALITY, BLOWUP, MAXSTEPS = 0, 1, 2, 3


@njit(cache=True)
def _poly_table(tab, x, y):
    acc = 0.0
    for k in range(tab.shape[0]):
        acc += tab[k, 0] * x ** int(tab[k, 1]) * y ** int(tab[k, 2])
    return acc


@njit(cache=True)
def _horner(c, x):
    acc = 0.0
    for k in range(c.shape[0] - 1, -1, -1):
        acc = acc * x + c[k]
    return acc


@njit(cache=True)
def _rhs(kind, t, z, T1, T2, sign, K, out):
    if kind == 0:
        y = sign * math.exp(z[0])
        P = _poly_table(T1, t, y)
        Q = _poly_table(T2, t, y)
        out[0] = Q / (y * P)
        return P
    xb = math.sinh(t)
    jac = math.cosh(t)
    nA = T1.shape[0]
    a = np.zeros(K + 1)
    b = np.zeros(K + 1)
    for j in range(min(nA, K + 1)):
        a[j] = _horner(T1[j], xb)
    for j in range(min(T2.shape[0], K + 1)):
        b[j] = _horner(T2[j], xb)
    r = np.zeros(K + 1)
    for n in range(K + 1):
        s = b[n]
        for k in range(n):
            s -= r[k] * a[n - k]
        r[n] = s / a[0]
    # Y = sum_{j>=1} G_j eta^j ; accumulate sum_i r_i Y^i truncated at eta^K
    Y = np.zeros(K + 1)
    for j in range(1, K + 1):
        Y[j] = z[j - 1]
    acc = np.zeros(K + 1)
    pw = np.zeros(K + 1)
    pw[0] = 1.0
    for i in range(1, K + 1):
        nxt = np.zeros(K + 1)
        for p in range(K + 1):
            if pw[p] == 0.0:
                continue
            for q in range(1, K + 1 - p):
                nxt[p + q] += pw[p] * Y[q]
        pw = nxt
        for p in range(K + 1):
            acc[p] += r[i] * pw[p]
    for j in range(1, K + 1):
        out[j - 1] = jac * acc[j]
    return a[0]


@njit(cache=True)
def dopri(kind, t0, t1, z0, T1, T2, sign, K, rtol, atol, bound, max_steps):
    """Integrate from t0 to t1.  Returns ``(z, status, steps, err_sum)``."""
    c2, c3, c4, c5 = 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9
    a21 = 1.0 / 5
    a31, a32 = 3.0 / 40, 9.0 / 40
    a41, a42, a43 = 44.0 / 45, -56.0 / 15, 32.0 / 9
    a51, a52, a53, a54 = 19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729
    a61, a62, a63, a64, a65 = 9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656
    b1, b3, b4, b5, b6 = 35.0 / 384, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84
    e1, e3, e4, e5, e6, e7 = (71.0 / 57600, -71.0 / 16695, 71.0 / 1920, -17253.0 / 339200,
                              22.0 / 525, -1.0 / 40)
    n = z0.shape[0]
    z = z0.copy()
    t = t0
    direction = 1.0 if t1 >= t0 else -1.0
    span = abs(t1 - t0)
    if span == 0.0:
        return z, OK, 0, 0.0
    h = direction * min(1e-3 * span, 1e-4)
    k1 = np.zeros(n)
    k2 = np.zeros(n)
    k3 = np.zeros(n)
    k4 = np.zeros(n)
    k5 = np.zeros(n)
    k6 = np.zeros(n)
    k7 = np.zeros(n)
    tmp = np.zeros(n)
    sgn0 = _rhs(kind, t, z, T1, T2, sign, K, k1)
    steps = 0
    err_sum = 0.0
    while direction * (t1 - t) > 0.0:
        if steps >= max_steps:
            return z, MAXSTEPS, steps, err_sum
        if direction * (t + h - t1) > 0.0:
            h = t1 - t
        for i in range(n):
            tmp[i] = z[i] + h * a21 * k1[i]
        _rhs(kind, t + c2 * h, tmp, T1, T2, sign, K, k2)
        for i in range(n):
            tmp[i] = z[i] + h * (a31 * k1[i] + a32 * k2[i])
        _rhs(kind, t + c3 * h, tmp, T1, T2, sign, K, k3)
        for i in range(n):
            tmp[i] = z[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i])
        _rhs(kind, t + c4 * h, tmp, T1, T2, sign, K, k4)
        for i in range(n):
            tmp[i] = z[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i])
        _rhs(kind, t + c5 * h, tmp, T1, T2, sign, K, k5)
        for i in range(n):
            tmp[i] = z[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i])
        _rhs(kind, t + h, tmp, T1, T2, sign, K, k6)
        for i in range(n):
            tmp[i] = z[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i])
        sg = _rhs(kind, t + h, tmp, T1, T2, sign, K, k7)
        err = 0.0
        for i in range(n):
            ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i])
            sc = atol + rtol * max(abs(z[i]), abs(tmp[i]))
            err = max(err, abs(ei) / sc)
        finite = True
        for i in range(n):
            if not math.isfinite(tmp[i]):
                finite = False
        if err <= 1.0 and finite:
            if kind == 0 and sg * sgn0 <= 0.0:
                return z, TRANSVERSALITY, steps, err_sum
            t = t + h
            for i in range(n):
                err_sum += abs(h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i]
                                    + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]))
                z[i] = tmp[i]
                k1[i] = k7[i]
            steps += 1
            if kind == 0 and math.exp(z[0]) > bound:
                return z, BLOWUP, steps, err_sum
            if abs(t1 - t) <= 1e-14 * max(1.0, abs(t1)):
                break   # rounding left a sliver; we are at t1
            fac = 0.9 * (1.0 / max(err, 1e-10)) ** 0.2
            h = h * min(5.0, max(0.2, fac))
        else:
            if not finite:
                h = h * 0.25
            else:
                h = h * max(0.1, 0.9 * (1.0 / err) ** 0.2)
            if abs(h) < 1e-15 * max(1.0, abs(t)):
                return z, MAXSTEPS, steps, err_sum
    return z, OK, steps, err_sum


def monomial_table(poly) -> np.ndarray:
    rows = [[float(c), i, j] for (i, j), c in sorted(poly.terms.items())]
    return np.array(rows if rows else [[0.0, 0, 0]], dtype=np.float64)
