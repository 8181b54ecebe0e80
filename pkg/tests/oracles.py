"""Independent reference values used across the tests."""
import math

import mpmath as mp
import numpy as np
from scipy.integrate import solve_ivp

from blockreg.blowup import blowup_x, blowup_y


def gamma_checked(z):
    """``Gamma(z)`` from mpmath, cross-checked by the reflection identity."""
    g = mp.gamma(z)
    refl = mp.pi / (mp.sin(mp.pi * z) * mp.gamma(1 - z))
    assert abs(g - refl) <= mp.mpf(10) ** -25 * abs(g)
    return g


def block_constant():
    """``27 sqrt(pi) Gamma(-1/6) / (8 Gamma(1/3))``, the x^{4/3} coefficient per unit lambda."""
    mp.mp.dps = 40
    val = 27 * mp.sqrt(mp.pi) * gamma_checked(mp.mpf(-1) / 6) / (8 * gamma_checked(mp.mpf(1) / 3))
    # lgamma gives an independent float check of the magnitude
    mag = 27 * math.sqrt(math.pi) * math.exp(math.lgamma(-1 / 6) - math.lgamma(1 / 3)) / 8
    assert abs(abs(float(val)) - mag) < 1e-12 * mag
    return float(val)


def three_leg_transition(X, c_in, c_out, y_in, v_switch=2.0, rtol=1e-13):
    """Follow the orbit through ``(c_in, y_in)`` in the blown-up charts.

    Leg 1 runs in the x-chart from ``u = c_in`` until ``|v| = v_switch``; leg 2
    crosses the critical manifold in the y-chart; leg 3 returns to the x-chart
    and runs out to ``u = c_out``.  Each leg integrates logarithmic variables so
    the saddle passage stays well scaled.
    """
    chx = blowup_x(X, truncation_order=8)
    chy = blowup_y(X, truncation_order=8)
    A, B = chx.A.map_coeffs(float), chx.B.map_coeffs(float)
    Ab, Bb = chy.A.map_coeffs(float), chy.B.map_coeffs(float)
    su, sv = math.copysign(1, c_in), math.copysign(1, y_in / c_in)

    # leg 1: d ln|v| / d ln|u| = u B / (v A), from ln|c_in| downwards
    def rhs1(s, z):
        u, v = su * math.exp(s), sv * math.exp(z[0])
        return [u * B(u, v) / (v * A(u, v))]

    hit = lambda s, z: z[0] - math.log(v_switch)
    hit.terminal = True
    sol = solve_ivp(rhs1, (math.log(abs(c_in)), -80.0), [math.log(abs(y_in / c_in))],
                    method="DOP853", rtol=rtol, atol=1e-14, events=hit)
    s1 = sol.t_events[0][0]
    u1, v1 = su * math.exp(s1), sv * v_switch
    # leg 2: y-chart, d ln|ybar| / d xbar = Bb / (ybar Ab)
    xb0, yb0 = 1.0 / v1, u1 * v1
    sy = math.copysign(1, yb0)

    def rhs2(xb, z):
        yb = sy * math.exp(z[0])
        return [Bb(xb, yb) / (yb * Ab(xb, yb))]

    sol = solve_ivp(rhs2, (xb0, -xb0), [math.log(abs(yb0))], method="DOP853", rtol=rtol, atol=1e-14)
    yb1 = sy * math.exp(sol.y[0, -1])
    xb1 = -xb0
    u2, v2 = xb1 * yb1, 1.0 / xb1
    su2, sv2 = math.copysign(1, u2), math.copysign(1, v2)

    def rhs3(s, z):
        u, v = su2 * math.exp(s), sv2 * math.exp(z[0])
        return [u * B(u, v) / (v * A(u, v))]

    sol = solve_ivp(rhs3, (math.log(abs(u2)), math.log(abs(c_out))), [math.log(abs(v2))],
                    method="DOP853", rtol=rtol, atol=1e-14)
    v_end = sv2 * math.exp(sol.y[0, -1])
    return c_out * v_end
