import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from crscat.ert import ErtModel, effective_range, ert_model, mean_scattering_length, sigma_ert
from crscat.units import CONST, CR50, CR52

from conftest import A0, C6


def abar_oracle(c6, mu):
    # 2 pi / Gamma(1/4)^2 * (2 mu C6 / hbar^2)^(1/4), evaluated independently
    return 2 * math.pi / math.gamma(0.25) ** 2 * (2 * mu * c6 / CONST.hbar**2) ** 0.25


def test_mean_scattering_length():
    abar = mean_scattering_length(C6, CR52)
    assert abar == pytest.approx(abar_oracle(C6, CR52.reduced_mass), rel=1e-14)
    assert abar / A0 == pytest.approx(47.7, abs=0.05)


def test_mean_scattering_length_scalings():
    assert mean_scattering_length(16 * C6, CR52) == pytest.approx(2 * mean_scattering_length(C6, CR52), rel=1e-14)
    ratio = mean_scattering_length(C6, CR50) / mean_scattering_length(C6, CR52)
    assert ratio == pytest.approx((49.9460 / 51.9405) ** 0.25, rel=1e-9)
    assert ratio == pytest.approx(0.9903, abs=1e-4)
    with pytest.raises(ValueError):
        mean_scattering_length(0.0, CR52)


def test_effective_range_anchors():
    assert effective_range(170 * A0, C6, CR52) / A0 == pytest.approx(83.0, rel=0.03)
    re_neg = effective_range(-220 * A0, C6, CR52) / A0
    assert round(re_neg) == 213
    assert re_neg == pytest.approx(229, rel=0.10)


def test_effective_range_limits():
    abar = mean_scattering_length(C6, CR52)
    big = effective_range(1e12 * A0, C6, CR52)
    assert big == pytest.approx(math.gamma(0.25) ** 4 / (6 * math.pi**2) * abar, rel=1e-9)
    assert big / abar == pytest.approx(2.9179, abs=1e-4)
    with pytest.raises(ZeroDivisionError):
        effective_range(0.0, C6, CR52)


def test_sigma_ert_examples():
    m = ErtModel(170 * A0, 83 * A0, C6, CR52)
    assert sigma_ert(0.0, m) == pytest.approx(8 * math.pi * (170 * A0) ** 2, rel=1e-15)
    assert sigma_ert(0.0, m) == pytest.approx(2.034e-15, rel=1e-3)
    a = 100 * A0
    m0 = ErtModel(a, 0.0, C6, CR52)
    assert sigma_ert(1 / a, m0) == pytest.approx(4 * math.pi * a * a, rel=1e-14)
    # 1/2 k^2 r_e a = 1 puts the formula on the unitarity envelope
    k = math.sqrt(2 / (m.r_e * m.a))
    assert sigma_ert(k, m) == pytest.approx(8 * math.pi / k**2, rel=1e-12)
    with pytest.raises(ValueError):
        sigma_ert(-1.0, m)


@given(a_a0=st.floats(1.0, 3000.0), logk=st.floats(4.0, 10.0))
def test_negative_a_stays_below_unitarity(a_a0, logk):
    m = ert_model(-a_a0 * A0, C6, CR52)
    assert m.r_e > 0
    k = 10.0**logk
    assert sigma_ert(k, m) < 8 * math.pi / k**2


@given(a_a0=st.floats(-3000.0, 3000.0).filter(lambda v: abs(v) > 1.0), logk=st.floats(4.0, 10.0))
def test_sigma_ert_envelope(a_a0, logk):
    m = ert_model(a_a0 * A0, C6, CR52)
    k = 10.0**logk
    s = sigma_ert(k, m)
    assert 0 <= s <= (8 * math.pi / k**2 + 8 * math.pi * m.a**2) * (1 + 1e-12)


def test_sigma_ert_vectorised_and_continuous():
    m = ert_model(170 * A0, C6, CR52)
    k = np.linspace(0, 3e8, 20001)
    s = sigma_ert(k, m)
    assert s.shape == k.shape
    assert np.max(np.abs(np.diff(s))) / s.max() < 1e-3
