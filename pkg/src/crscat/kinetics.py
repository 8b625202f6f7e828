"""Thermal averages, relaxation rates and trap-averaged densities.

Collision energies are written as ``x = E / (k_B T)``.  For a Maxwellian gas
the flux-weighted energy distribution is ``x exp(-x)``, so

    <sigma v>_th  = <v_r> * int sigma(x) x exp(-x) dx
    <sigma v>_sth = <v_r> * int sigma(x) x exp(-x) (A x^2 + B x) dx

The second one is the average that drives relaxation of a temperature
anisotropy.  ``A`` and ``B`` are fixed so that the ratio
``alpha = <sigma v>_th / (<sigma v>_sth / 4)`` is exactly 2.65 for an
energy-independent cross section and exactly 10.7 in the unitarity limit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator

from .ert import ErtModel, sigma_ert
from .units import CONST, Isotope

__all__ = [
    "ALPHA_CONSTANT",
    "ALPHA_UNITARITY",
    "SIGMA_EFF_FACTOR",
    "KERNEL_A",
    "KERNEL_B",
    "kernel_coefficients",
    "CrossSectionModel",
    "ConstantCrossSection",
    "EffectiveRangeCrossSection",
    "NumericCrossSection",
    "UnitarityCrossSection",
    "QuadratureError",
    "TrapConfig",
    "RateBundle",
    "mean_relative_speed",
    "thermal_avg_sigma_v",
    "sth_avg_sigma_v",
    "relaxation_rate",
    "effective_cross_section",
    "equilibrium_temperature",
    "mean_density",
    "rate_over_density",
]

ALPHA_CONSTANT = 2.65
ALPHA_UNITARITY = 10.7
#: fixed factor in the effective cross section, independent of temperature
SIGMA_EFF_FACTOR = 2.65


def kernel_coefficients(alpha_const: float = ALPHA_CONSTANT, alpha_unit: float = ALPHA_UNITARITY):
    """Solve ``6A + 2B = 4/alpha_const`` and ``2A + B = 4/alpha_unit``."""
    M = np.array([[6.0, 2.0], [2.0, 1.0]])
    rhs = np.array([4.0 / alpha_const, 4.0 / alpha_unit])
    A, B = np.linalg.solve(M, rhs)
    return float(A), float(B)


KERNEL_A, KERNEL_B = kernel_coefficients()


class QuadratureError(RuntimeError):
    pass


# -- cross-section models ----------------------------------------------------


class CrossSectionModel:
    """Elastic s-wave cross section as a function of relative wavenumber."""

    #: integer tag understood by the compiled DSMC kernel
    kind: int = -1

    def sigma(self, k):
        raise NotImplementedError

    def kernel_spec(self, k_max: float):
        """``(kind, params, table)`` for the DSMC kernel."""
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantCrossSection(CrossSectionModel):
    sigma0: float
    kind = 0

    def __post_init__(self):
        if self.sigma0 < 0:
            raise ValueError("sigma0 must be non-negative")

    def sigma(self, k):
        k = np.asarray(k, dtype=float)
        out = np.full_like(k, self.sigma0)
        return out if out.ndim else float(out)

    def kernel_spec(self, k_max):
        return 0, np.array([self.sigma0, 0.0]), np.zeros(1)


@dataclass(frozen=True)
class EffectiveRangeCrossSection(CrossSectionModel):
    model: ErtModel
    kind = 1

    def sigma(self, k):
        return sigma_ert(k, self.model)

    def kernel_spec(self, k_max):
        return 1, np.array([self.model.a, self.model.r_e]), np.zeros(1)


@dataclass(frozen=True)
class UnitarityCrossSection(CrossSectionModel):
    """``8 pi / k^2``: the s-wave maximum for identical bosons."""

    kind = 2

    def sigma(self, k):
        k = np.asarray(k, dtype=float)
        with np.errstate(divide="ignore"):
            out = 8 * np.pi / (k * k)
        return out if out.ndim else float(out)

    def kernel_spec(self, k_max):
        return 2, np.array([0.0, 0.0]), np.zeros(1)


@dataclass(frozen=True, eq=False)
class NumericCrossSection(CrossSectionModel):
    """Interpolated single-channel cross section from a phase-shift table.

    ``sin^2(delta0)`` is interpolated with PCHIP in ``log k``, which never
    overshoots the tabulated values, so ``0 <= sigma <= 8 pi/k^2`` holds
    everywhere.  Below the table ``sigma`` is held at its first value (the
    zero-energy plateau), above it ``sin^2(delta0)`` is held.
    """

    k_table: np.ndarray
    sin2: np.ndarray
    _interp: PchipInterpolator = field(init=False, repr=False)
    kind = 3

    def __post_init__(self):
        k = np.asarray(self.k_table, dtype=float)
        s2 = np.asarray(self.sin2, dtype=float)
        object.__setattr__(self, "k_table", k)
        object.__setattr__(self, "sin2", s2)
        object.__setattr__(self, "_interp", PchipInterpolator(np.log(k), s2, extrapolate=False))

    @classmethod
    def from_table(cls, table) -> NumericCrossSection:
        return cls(table.k, np.sin(table.delta0) ** 2)

    @property
    def k_min(self) -> float:
        return float(self.k_table[0])

    @property
    def k_max(self) -> float:
        return float(self.k_table[-1])

    def sigma(self, k):
        k = np.asarray(k, dtype=float)
        kc = np.clip(k, self.k_min, self.k_max)
        s2 = np.clip(self._interp(np.log(kc)), 0.0, 1.0)
        with np.errstate(divide="ignore"):
            out = np.where(k < self.k_min, 8 * np.pi * self.sin2[0] / self.k_min**2, 8 * np.pi * s2 / k**2)
        return out if out.ndim else float(out)

    def kernel_spec(self, k_max, n: int = 4096):
        grid = np.linspace(0.0, k_max, n)
        k0, dk = 0.0, grid[1] - grid[0]
        return 3, np.array([k0, dk]), self.sigma(np.maximum(grid, 1e-300))


# -- trap ---------------------------------------------------------------------


@dataclass(frozen=True)
class TrapConfig:
    """Harmonic trap with an optional radial-frequency schedule.

    ``ramp`` is a sequence of ``(t, omega_r)`` points; between them the radial
    frequency is interpolated linearly, outside them it is held constant.
    ``offset_field`` (G) is recorded only.
    """

    omega_x: float
    omega_y: float
    omega_z: float
    offset_field: float | None = None
    ramp: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if min(self.omega_x, self.omega_y, self.omega_z) <= 0:
            raise ValueError("trap frequencies must be positive")
        if self.ramp is not None:
            t = [p[0] for p in self.ramp]
            if any(b <= a for a, b in zip(t, t[1:])):
                raise ValueError("ramp times must increase")
            if any(p[1] <= 0 for p in self.ramp):
                raise ValueError("ramp frequencies must be positive")

    @classmethod
    def from_hz(cls, fx, fy, fz, **kw) -> TrapConfig:
        return cls(2 * math.pi * fx, 2 * math.pi * fy, 2 * math.pi * fz, **kw)

    @property
    def omega(self) -> np.ndarray:
        return np.array([self.omega_x, self.omega_y, self.omega_z])

    def omega_at(self, t: float) -> np.ndarray:
        if self.ramp is None:
            return self.omega
        ts = [p[0] for p in self.ramp]
        ws = [p[1] for p in self.ramp]
        wr = float(np.interp(t, ts, ws))
        return np.array([wr, wr, self.omega_z])

    def final(self) -> TrapConfig:
        """Static trap at the end of the schedule."""
        if self.ramp is None:
            return self
        wr = self.ramp[-1][1]
        return TrapConfig(wr, wr, self.omega_z, self.offset_field)


# -- averages ----------------------------------------------------------------


def mean_relative_speed(T, iso: Isotope):
    """``sqrt(16 k_B T / (pi m))`` (m/s)."""
    T = np.asarray(T, dtype=float)
    if np.any(T <= 0):
        raise ValueError("temperature must be positive")
    out = np.sqrt(16 * CONST.k_B * T / (math.pi * iso.mass))
    return out if out.ndim else float(out)


def _panels(n_panels: int = 48, order: int = 16, x_max: float = 90.0):
    edges = np.concatenate([[0.0], np.geomspace(1e-6, x_max, n_panels)])
    g, wg = np.polynomial.legendre.leggauss(order)
    a, b = edges[:-1, None], edges[1:, None]
    x = (0.5 * (b - a) * g + 0.5 * (b + a)).ravel()
    w = (0.5 * (b - a) * wg).ravel()
    return x, w


_NODES = {}


def _nodes(refine: int = 1):
    if refine not in _NODES:
        _NODES[refine] = _panels(48 * refine, 16)
    return _NODES[refine]


def _k_of_x(x, T, iso):
    return np.sqrt(2 * iso.reduced_mass * CONST.k_B * T * x) / CONST.hbar


def _average(model, T, iso, weight, method, refine):
    T = float(T)
    if not T > 0:
        raise ValueError("temperature must be positive")
    vbar = mean_relative_speed(T, iso)
    if method == "adaptive":
        f = lambda x: model.sigma(_k_of_x(x, T, iso)) * x * math.exp(-x) * weight(x)  # noqa: E731
        pieces = [(0, 1e-3), (1e-3, 1), (1, 10), (10, 40), (40, 120)]
        total = 0.0
        for lo, hi in pieces:
            val, err = quad(f, lo, hi, epsabs=0.0, epsrel=1e-11, limit=400)
            if not np.isfinite(val) or err > 1e-8 * max(abs(val), 1e-300) and abs(val) > 0:
                raise QuadratureError(f"quadrature did not converge on [{lo}, {hi}]")
            total += val
        return vbar * total
    x, w = _nodes(refine)
    s = model.sigma(_k_of_x(x, T, iso))
    return vbar * float(np.sum(w * s * x * np.exp(-x) * weight(x)))


def thermal_avg_sigma_v(model: CrossSectionModel, T: float, iso: Isotope, method: str = "fixed",
                        refine: int = 1) -> float:
    """Maxwell average of ``sigma(v_r) v_r`` (m^3/s).

    ``method="fixed"`` uses a composite Gauss-Legendre rule (48 geometric
    panels x 16 nodes); ``"adaptive"`` uses QUADPACK.
    """
    return _average(model, T, iso, lambda x: 1.0, method, refine)


def sth_avg_sigma_v(model: CrossSectionModel, T: float, iso: Isotope, method: str = "fixed",
                    refine: int = 1, coefficients: tuple[float, float] | None = None) -> float:
    """Anisotropy-relaxation average of ``sigma(v_r) v_r`` (m^3/s)."""
    A, B = coefficients or (KERNEL_A, KERNEL_B)
    return _average(model, T, iso, lambda x: A * x * x + B * x, method, refine)


@dataclass(frozen=True)
class RateBundle:
    T: float
    n_bar: float
    gamma_coll: float
    gamma_rel: float

    @property
    def alpha(self) -> float:
        return self.gamma_coll / self.gamma_rel


def relaxation_rate(n_bar: float, model: CrossSectionModel, T: float, iso: Isotope, **kw) -> RateBundle:
    """``Gamma_rel = n_bar <sigma v>_sth / 4`` and ``Gamma_coll = n_bar <sigma v>_th``."""
    if not n_bar > 0:
        raise ValueError("density must be positive")
    g_rel = 0.25 * n_bar * sth_avg_sigma_v(model, T, iso, **kw)
    g_coll = n_bar * thermal_avg_sigma_v(model, T, iso, **kw)
    return RateBundle(T, n_bar, g_coll, g_rel)


def rate_over_density(model: CrossSectionModel, T, iso: Isotope) -> np.ndarray:
    """``Gamma_rel / n_bar`` (m^3/s) on an array of temperatures."""
    T = np.atleast_1d(np.asarray(T, dtype=float))
    return np.array([0.25 * sth_avg_sigma_v(model, t, iso) for t in T])


def effective_cross_section(gamma_rel, n_bar, T, iso: Isotope):
    """``2.65 Gamma_rel / (n_bar <v_r>_th)`` (m^2)."""
    gamma_rel = np.asarray(gamma_rel, dtype=float)
    n_bar = np.asarray(n_bar, dtype=float)
    if np.any(gamma_rel <= 0) or np.any(n_bar <= 0):
        raise ValueError("rate and density must be positive")
    out = SIGMA_EFF_FACTOR * gamma_rel / (n_bar * mean_relative_speed(T, iso))
    return out if np.ndim(out) else float(out)


def equilibrium_temperature(T_r, T_z):
    """Common temperature after cross-dimensional mixing: ``(2 T_r + T_z)/3``."""
    if np.any(np.asarray(T_r) <= 0) or np.any(np.asarray(T_z) <= 0):
        raise ValueError("temperatures must be positive")
    return (2 * np.asarray(T_r) + np.asarray(T_z)) / 3 if np.ndim(T_r) else (2 * T_r + T_z) / 3


def mean_density(N, T_x, T_y, T_z, trap: TrapConfig, iso: Isotope, t: float | None = None):
    """``int n^2 dV / int n dV`` of a thermal cloud in a harmonic trap (1/m^3)."""
    if min(np.min(T_x), np.min(T_y), np.min(T_z)) <= 0 or np.min(N) < 0:
        raise ValueError("temperatures must be positive and N non-negative")
    w = trap.omega if t is None else trap.omega_at(t)
    pref = (iso.mass / (4 * math.pi * CONST.k_B)) ** 1.5
    return N * w[0] * w[1] * w[2] * pref / np.sqrt(T_x * T_y * T_z)
