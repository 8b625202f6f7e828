"""Theory curves for the rethermalization plots, as plain tables."""
from __future__ import annotations

import math
import warnings
from functools import lru_cache

import numpy as np

from .ert import ert_model
from .kinetics import (
    EffectiveRangeCrossSection,
    NumericCrossSection,
    mean_relative_speed,
    rate_over_density,
)
from .potential import DEFAULT_TEMPLATE, MorseVdwParams
from .scattering import (
    DWaveWarning,
    energy_grid,
    phase_shift_table,
    tune_to_scattering_length,
)
from .units import CONST, CR50, CR52, Isotope

__all__ = [
    "REFERENCE_N_BOUND",
    "default_n_bound",
    "tuned_potential",
    "numeric_cross_section",
    "sigma_eff_curve",
    "fig2_curves",
    "fig3_curves",
    "fig4_curves",
    "FIGURES",
]

C6_NOMINAL = 1050.0 * CONST.c6_au


#: bound-state count of the reference model; the true count is unknown, so
#: results that matter are checked against an N_b sweep instead
REFERENCE_N_BOUND = 24


def default_n_bound(iso: Isotope | None = None, template: MorseVdwParams = DEFAULT_TEMPLATE) -> int:
    """Bound-state count used when none is given (the same for every isotope)."""
    return REFERENCE_N_BOUND


@lru_cache(maxsize=64)
def _tuned(a: float, label: str, mass_u: float, n_bound: int, template: MorseVdwParams):
    iso = Isotope(label, mass_u)
    return tune_to_scattering_length(template, a, iso, n_bound)


def tuned_potential(a: float, iso: Isotope, n_bound: int | None = None,
                    template: MorseVdwParams = DEFAULT_TEMPLATE):
    """Model potential with scattering length ``a`` (cached)."""
    n_bound = default_n_bound(iso, template) if n_bound is None else n_bound
    return _tuned(float(a), iso.label, iso.mass_u, int(n_bound), template)


def numeric_cross_section(a: float, iso: Isotope, T_max: float = 500e-6, n_bound: int | None = None,
                          per_decade: int = 30) -> NumericCrossSection:
    """Single-channel cross section of a tuned potential.

    The table reaches ``40 T_max`` so the thermal averages see no cut-off.
    """
    pot = tuned_potential(a, iso, n_bound)
    E = energy_grid(1e-8, 40 * T_max, per_decade)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DWaveWarning)
        table = phase_shift_table(pot, iso, E)
    return NumericCrossSection.from_table(table)


def sigma_eff_curve(model, T, iso: Isotope) -> np.ndarray:
    """``2.65 Gamma_rel / (n_bar <v_r>)`` for a model cross section."""
    T = np.asarray(T, dtype=float)
    return 2.65 * rate_over_density(model, T, iso) / mean_relative_speed(T, iso)


def fig2_curves(T=None, a_values=(150.0, 170.0, 190.0), iso: Isotope = CR52, c6: float = C6_NOMINAL):
    """Effective cross section vs temperature for several positive ``a`` (a0)."""
    T = np.geomspace(0.5e-6, 25e-6, 60) if T is None else np.asarray(T, dtype=float)
    header = ["T_K"] + [f"sigma_eff_m2_a{a:+g}a0" for a in a_values]
    cols = [T]
    for a in a_values:
        m = EffectiveRangeCrossSection(ert_model(a * CONST.a0, c6, iso))
        cols.append(sigma_eff_curve(m, T, iso))
    return header, np.column_stack(cols)


def fig3_curves(T=None, a_values=(170.0, -220.0), iso: Isotope = CR52, c6: float = C6_NOMINAL,
                numeric: bool = True):
    """``Gamma_rel/n_bar`` from the effective-range and single-channel models."""
    T = np.geomspace(5e-6, 500e-6, 60) if T is None else np.asarray(T, dtype=float)
    header, cols = ["T_K"], [T]
    for a in a_values:
        m = EffectiveRangeCrossSection(ert_model(a * CONST.a0, c6, iso))
        header.append(f"ert_m3s_a{a:+g}a0")
        cols.append(rate_over_density(m, T, iso))
    if numeric:
        for a in a_values:
            m = numeric_cross_section(a * CONST.a0, iso, float(T.max()))
            header.append(f"numeric_m3s_a{a:+g}a0")
            cols.append(rate_over_density(m, T, iso))
    return header, np.column_stack(cols)


def fig4_curves(T=None, a50=(40.0, -200.0), a52: float = 170.0):
    """Single-channel ``Gamma_rel/n_bar`` for Cr-50 candidates and Cr-52."""
    T = np.geomspace(5e-6, 500e-6, 60) if T is None else np.asarray(T, dtype=float)
    header, cols = ["T_K"], [T]
    for a in a50:
        m = numeric_cross_section(a * CONST.a0, CR50, float(T.max()))
        header.append(f"Cr50_numeric_m3s_a{a:+g}a0")
        cols.append(rate_over_density(m, T, CR50))
    m = numeric_cross_section(a52 * CONST.a0, CR52, float(T.max()))
    header.append(f"Cr52_numeric_m3s_a{a52:+g}a0")
    cols.append(rate_over_density(m, T, CR52))
    return header, np.column_stack(cols)


FIGURES = {"fig2": fig2_curves, "fig3": fig3_curves, "fig4": fig4_curves}


def ratio_at(header, data, num: str, den: str, T: float) -> float:
    """Interpolated ratio of two columns at temperature ``T`` (log-log)."""
    i, j = header.index(num), header.index(den)
    lt = np.log(data[:, 0])
    return float(math.exp(np.interp(math.log(T), lt, np.log(data[:, i])) -
                          np.interp(math.log(T), lt, np.log(data[:, j]))))
