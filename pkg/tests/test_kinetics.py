import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crscat.ert import ert_model
from crscat.kinetics import (ALPHA_CONSTANT, ALPHA_UNITARITY, KERNEL_A, KERNEL_B,
                             ConstantCrossSection, CrossSectionModel, EffectiveRangeCrossSection,
                             NumericCrossSection, QuadratureError, TrapConfig, UnitarityCrossSection,
                             effective_cross_section, equilibrium_temperature, kernel_coefficients,
                             mean_density, mean_relative_speed, rate_over_density, relaxation_rate,
                             sth_avg_sigma_v, thermal_avg_sigma_v)
from crscat.units import CONST, CR52

from conftest import A0, C6, UK

SIGMA0 = 8 * math.pi * (170 * A0) ** 2
REF_TRAP = TrapConfig.from_hz(207, 207, 72.6)


def ert(a_a0):
    return EffectiveRangeCrossSection(ert_model(a_a0 * A0, C6, CR52))


def k_thermal(T):
    return math.sqrt(2 * CR52.reduced_mass * CONST.k_B * T) / CONST.hbar


# -- mean relative speed ---------------------------------------------------------------


def test_mean_relative_speed_values():
    assert mean_relative_speed(42 * UK, CR52) == pytest.approx(0.185, abs=5e-4)
    assert mean_relative_speed(100 * UK, CR52) == pytest.approx(0.2853, rel=1e-3)
    assert mean_relative_speed(4 * 42 * UK, CR52) == pytest.approx(2 * mean_relative_speed(42 * UK, CR52), rel=1e-15)
    with pytest.raises(ValueError):
        mean_relative_speed(0.0, CR52)


def test_mean_relative_speed_monte_carlo(rng):
    T = 42 * UK
    s = math.sqrt(CONST.k_B * T / CR52.mass)
    v1 = rng.normal(0, s, (400_000, 3))
    v2 = rng.normal(0, s, (400_000, 3))
    g = np.linalg.norm(v1 - v2, axis=1)
    assert g.mean() == pytest.approx(mean_relative_speed(T, CR52), abs=4 * g.std() / math.sqrt(len(g)))


# -- thermal averages -------------------------------------------------------------------


def test_constant_cross_section_average():
    m = ConstantCrossSection(SIGMA0)
    T = 42 * UK
    assert thermal_avg_sigma_v(m, T, CR52) == pytest.approx(SIGMA0 * mean_relative_speed(T, CR52), rel=1e-12)
    assert sth_avg_sigma_v(m, T, CR52) == pytest.approx(4 / 2.65 * SIGMA0 * mean_relative_speed(T, CR52), rel=1e-12)


@pytest.mark.parametrize("T", [1 * UK, 42 * UK, 500 * UK])
def test_unitarity_average_closed_form(T):
    mu = CR52.reduced_mass
    inv_v = math.sqrt(2 * mu / (math.pi * CONST.k_B * T))
    expect = 8 * math.pi * CONST.hbar**2 / mu**2 * inv_v
    m = UnitarityCrossSection()
    th = thermal_avg_sigma_v(m, T, CR52)
    assert th == pytest.approx(expect, rel=1e-8)
    assert sth_avg_sigma_v(m, T, CR52) == pytest.approx(4 / 10.7 * th, rel=1e-12)


def test_ert_low_temperature_limit():
    T = 10e-9
    got = thermal_avg_sigma_v(ert(170), T, CR52)
    assert got == pytest.approx(SIGMA0 * mean_relative_speed(T, CR52), rel=1e-3)


def test_ert_alpha_is_intermediate():
    rb = relaxation_rate(1e16, ert(170), 42 * UK, CR52)
    assert ALPHA_CONSTANT < rb.alpha < ALPHA_UNITARITY


def test_kernel_coefficients():
    A, B = kernel_coefficients()
    assert (A, B) == (KERNEL_A, KERNEL_B)
    assert abs(6 * A + 2 * B - 4 / 2.65) < 1e-12
    assert abs(2 * A + B - 4 / 10.7) < 1e-12
    assert A == pytest.approx(0.3805, abs=1e-3) and B == pytest.approx(-0.387, abs=2e-3)


@pytest.mark.parametrize("T", [5 * UK, 42 * UK, 500 * UK])
def test_anchor_identities(T):
    assert abs(relaxation_rate(1e16, ConstantCrossSection(SIGMA0), T, CR52).alpha - 2.65) < 1e-12
    assert abs(relaxation_rate(1e16, UnitarityCrossSection(), T, CR52).alpha - 10.7) < 1e-12


@pytest.mark.parametrize("a_a0", [170.0, -220.0, 40.0])
@pytest.mark.parametrize("T", [5 * UK, 100 * UK, 500 * UK])
def test_quadrature_convergence(a_a0, T):
    m = ert(a_a0)
    for fn in (thermal_avg_sigma_v, sth_avg_sigma_v):
        base = fn(m, T, CR52)
        assert fn(m, T, CR52, refine=2) == pytest.approx(base, rel=1e-8)
        assert fn(m, T, CR52, method="adaptive") == pytest.approx(base, rel=1e-8)


@pytest.mark.filterwarnings("ignore")
def test_quadrature_failure():
    class Broken(CrossSectionModel):
        def sigma(self, k):
            return np.nan * np.asarray(k)

    with pytest.raises(QuadratureError):
        thermal_avg_sigma_v(Broken(), 42 * UK, CR52, method="adaptive")


# -- rates ---------------------------------------------------------------------------------


def test_relaxation_rate_example():
    rb = relaxation_rate(3.147e16, ConstantCrossSection(2.034e-15), 42 * UK, CR52)
    assert rb.gamma_coll == pytest.approx(11.8, abs=0.05)
    assert rb.gamma_rel == pytest.approx(4.47, abs=0.005)
    assert rb.alpha == pytest.approx(2.65, abs=1e-12)


def test_relaxation_rate_linear_in_density():
    a = relaxation_rate(1e16, ert(170), 42 * UK, CR52)
    b = relaxation_rate(2e16, ert(170), 42 * UK, CR52)
    assert b.gamma_rel == 2 * a.gamma_rel and b.gamma_coll == 2 * a.gamma_coll
    with pytest.raises(ValueError):
        relaxation_rate(0.0, ert(170), 42 * UK, CR52)


def test_effective_cross_section_examples():
    assert effective_cross_section(4.47, 3.147e16, 42 * UK, CR52) == pytest.approx(2.034e-15, rel=2e-3)
    with pytest.raises(ValueError):
        effective_cross_section(-1.0, 3e16, 42 * UK, CR52)


@given(sigma0=st.floats(1e-18, 1e-12), n=st.floats(1e14, 1e19), T=st.floats(1e-7, 1e-3))
def test_effective_cross_section_inverts_constant_model(sigma0, n, T):
    rb = relaxation_rate(n, ConstantCrossSection(sigma0), T, CR52)
    assert effective_cross_section(rb.gamma_rel, n, T, CR52) == pytest.approx(sigma0, rel=1e-13)


def test_effective_cross_section_low_temperature():
    T = 5 * UK
    n = 1e16
    rb = relaxation_rate(n, ert(170), T, CR52)
    assert effective_cross_section(rb.gamma_rel, n, T, CR52) == pytest.approx(SIGMA0, rel=0.03)


@settings(max_examples=60, deadline=None)
@given(a_a0=st.floats(100.0, 2000.0), neg=st.booleans(), frac=st.floats(0.01, 1.0))
def test_alpha_bracket_in_low_energy_regime(a_a0, neg, frac):
    # temperatures where k_th |a| and k_th^2 |a| r_e / 2 stay below one, i.e.
    # where the effective-range expansion holds
    a = (-a_a0 if neg else a_a0) * A0
    model = ert_model(a, C6, CR52)
    k_max = 1.0 / max(abs(a), math.sqrt(0.5 * abs(a) * model.r_e))
    T = frac * (CONST.hbar * k_max) ** 2 / (2 * CR52.reduced_mass * CONST.k_B)
    rb = relaxation_rate(1e16, EffectiveRangeCrossSection(model), T, CR52)
    assert rb.gamma_rel > 0
    assert 2.0 <= rb.alpha <= 12.0


def test_alpha_leaves_bracket_beyond_low_energy_regime():
    # pinned: the quadratic kernel is a low-energy stand-in (see README)
    rb = relaxation_rate(1e16, ert(-220), 500 * UK, CR52)
    assert rb.alpha == pytest.approx(24.18, abs=0.05)


def test_equilibrium_temperature():
    assert equilibrium_temperature(50 * UK, 20 * UK) == pytest.approx(40 * UK, rel=1e-15)
    assert equilibrium_temperature(42 * UK, 42 * UK) == pytest.approx(42 * UK, rel=1e-15)
    assert equilibrium_temperature(0.06e-3, 0.03e-3) == pytest.approx(0.05e-3, rel=1e-14)
    with pytest.raises(ValueError):
        equilibrium_temperature(-1.0, 1.0)


# -- density ---------------------------------------------------------------------------------


def test_mean_density_value():
    assert mean_density(1e6, 42 * UK, 42 * UK, 42 * UK, REF_TRAP, CR52) == pytest.approx(3.15e16, rel=3e-3)


def test_mean_density_monte_carlo(rng):
    N, T = 1e6, 42 * UK
    s = np.sqrt(CONST.k_B * T / CR52.mass) / REF_TRAP.omega
    x = rng.normal(0, 1, (1_000_000, 3)) * s
    n = N / ((2 * math.pi) ** 1.5 * np.prod(s)) * np.exp(-0.5 * np.sum((x / s) ** 2, axis=1))
    err = 4 * n.std() / math.sqrt(len(n))
    assert n.mean() == pytest.approx(mean_density(N, T, T, T, REF_TRAP, CR52), abs=err)


def test_mean_density_scalings():
    base = mean_density(1e6, 42 * UK, 42 * UK, 42 * UK, REF_TRAP, CR52)
    assert mean_density(2e6, 42 * UK, 42 * UK, 42 * UK, REF_TRAP, CR52) == pytest.approx(2 * base, rel=1e-15)
    T4 = 4 * 42 * UK
    assert mean_density(1e6, T4, T4, T4, REF_TRAP, CR52) == pytest.approx(base / 8, rel=1e-14)


# -- models and trap -------------------------------------------------------------------------


def test_numeric_cross_section_interpolant():
    k = np.geomspace(1e5, 1e8, 40)
    sin2 = np.clip(np.sin(3 * np.log(k)) ** 2, 0, 1)
    m = NumericCrossSection(k, sin2)
    kk = np.geomspace(1e4, 1e9, 5000)
    s = m.sigma(kk)
    assert np.all(s >= 0)
    assert np.all(s <= 8 * math.pi / kk**2 * (1 + 1e-12))
    # no overshoot between table points
    inner = (kk >= k[0]) & (kk <= k[-1])
    idx = np.searchsorted(k, kk[inner]).clip(1, len(k) - 1)
    lo = np.minimum(sin2[idx - 1], sin2[idx])
    hi = np.maximum(sin2[idx - 1], sin2[idx])
    s2 = s[inner] * kk[inner] ** 2 / (8 * math.pi)
    assert np.all(s2 >= lo - 1e-12) and np.all(s2 <= hi + 1e-12)
    # zero-energy plateau below the table
    assert m.sigma(1e3) == pytest.approx(8 * math.pi * sin2[0] / k[0] ** 2)


def test_trap_config():
    with pytest.raises(ValueError):
        TrapConfig(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        TrapConfig(1.0, 1.0, 1.0, ramp=((0.0, 1.0), (0.0, 2.0)))
    trap = TrapConfig.from_hz(207, 207, 72.6, ramp=((-0.025, 2 * math.pi * 124), (0.0, 2 * math.pi * 207)))
    assert trap.omega_at(-1.0)[0] == pytest.approx(2 * math.pi * 124)
    assert trap.omega_at(-0.0125)[0] == pytest.approx(2 * math.pi * 165.5)
    assert trap.omega_at(1.0)[0] == pytest.approx(2 * math.pi * 207)
    assert trap.final().ramp is None


def test_rate_over_density_vectorised():
    T = np.array([5, 50, 500]) * UK
    r = rate_over_density(ert(170), T, CR52)
    assert r.shape == (3,)
    assert r[1] == pytest.approx(0.25 * sth_avg_sigma_v(ert(170), T[1], CR52), rel=1e-15)
