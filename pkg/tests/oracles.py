"""Independent reference calculations used by the tests.

Nothing here calls the package's solver; only potentials and constants are
shared.
"""
import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import gamma, jv, jvp

from crscat.units import CONST


def vdw_beta(c6, mu):
    """``(2 mu C6 / hbar^2)^(1/4)`` (m)."""
    return (2 * mu * c6 / CONST.hbar**2) ** 0.25


def _tail_basis(r, beta):
    """``sqrt(r) J_{+-1/4}(beta^2 / 2 r^2)`` and their r-derivatives."""
    y = beta**2 / (2 * r * r)
    dy = -beta**2 / r**3
    out = []
    for nu in (0.25, -0.25):
        f = math.sqrt(r) * jv(nu, y)
        df = 0.5 / math.sqrt(r) * jv(nu, y) + math.sqrt(r) * jvp(nu, y) * dy
        out.append((f, df))
    return out


def a_from_tail(r, u, du, c6, mu):
    """Scattering length from ``u, u'`` at a radius inside a pure ``-c6/r^6`` tail.

    Zero-energy solutions there are ``sqrt(r) J_{+-1/4}(beta^2/2r^2)``;
    as ``r -> inf`` the ``-1/4`` one grows like ``r`` and the ``+1/4`` one
    tends to a constant, which fixes ``a``.
    """
    beta = vdw_beta(c6, mu)
    (f1, d1), (f2, d2) = _tail_basis(r, beta)
    # u = A f1 + B f2
    det = f1 * d2 - f2 * d1
    A = (u * d2 - f2 * du) / det
    B = (f1 * du - u * d1) / det
    return -(A / B) * 0.5 * beta * gamma(0.75) / gamma(1.25)


def hard_core_vdw_a(r_core, c6, mu):
    """Closed-form scattering length of ``-c6/r^6`` outside a hard core."""
    beta = vdw_beta(c6, mu)
    y = beta**2 / (2 * r_core**2)
    return (jv(-0.25, y) / jv(0.25, y)) * 0.5 * beta * gamma(0.75) / gamma(1.25)


def zero_energy_a(pot, mu, r_start, r_match, rtol=1e-11):
    """Integrate ``u'' = (2 mu/hbar^2) V u`` with an adaptive ODE solver, then match to the tail.

    Radii in metres; integration is done in units of a0.
    Returns ``(a, nodes)``.
    """
    L = CONST.a0
    s = 2 * mu * L * L / CONST.hbar**2

    def rhs(x, y):
        return [y[1], s * float(pot(x * L)) * y[0]]

    sol = solve_ivp(rhs, (r_start / L, r_match / L), [0.0, 1e-10], method="DOP853",
                    rtol=rtol, atol=1e-300, first_step=1e-4, max_step=0.01)
    u, du = sol.y[0, -1], sol.y[1, -1]
    nodes = int(np.count_nonzero(np.diff(np.sign(sol.y[0, 1:])) != 0))
    # match in SI: rescale derivative back to 1/m
    a = a_from_tail(r_match, u, du / L, pot.c6, mu)
    return a, nodes


def square_well_a(kappa_R, R):
    return R * (1 - math.tan(kappa_R) / kappa_R)


def square_well_delta(k, kappa0, R):
    """s-wave phase shift of an attractive square well (mod pi)."""
    K = math.sqrt(kappa0**2 + k**2)
    return math.atan(k / K * math.tan(K * R)) - k * R
