"""Effective-range theory for a van der Waals tail.

The effective range follows from the scattering length and C6 through the
mean scattering length ``abar = [2 pi / Gamma(1/4)^2] (2 mu C6 / hbar^2)^(1/4)``
(Gribakin and Flambaum) and the Flambaum-Gribakin-Harabati relation

    r_e = [Gamma(1/4)^4 / (6 pi^2)] abar [1 - 2 abar/a + 2 (abar/a)^2].
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .units import CONST, Isotope

__all__ = [
    "ABAR_FACTOR",
    "RE_FACTOR",
    "ErtModel",
    "mean_scattering_length",
    "effective_range",
    "sigma_ert",
    "ert_model",
]

ABAR_FACTOR = 2 * math.pi / math.gamma(0.25) ** 2  # 0.4779888...
RE_FACTOR = math.gamma(0.25) ** 4 / (6 * math.pi**2)  # 2.9179...


def mean_scattering_length(c6: float, iso: Isotope) -> float:
    """Mean scattering length (m) of a ``-c6/r**6`` tail."""
    if not c6 > 0:
        raise ValueError("c6 must be positive")
    return ABAR_FACTOR * (2 * iso.reduced_mass * c6 / CONST.hbar**2) ** 0.25


def effective_range(a: float, c6: float, iso: Isotope) -> float:
    """Effective range (m) implied by scattering length ``a`` and ``c6``."""
    if a == 0:
        raise ZeroDivisionError("effective range is singular at a = 0")
    abar = mean_scattering_length(c6, iso)
    x = abar / a
    return RE_FACTOR * abar * (1 - 2 * x + 2 * x * x)


@dataclass(frozen=True)
class ErtModel:
    a: float
    r_e: float
    c6: float
    isotope: Isotope

    def __post_init__(self):
        if not self.c6 > 0:
            raise ValueError("c6 must be positive")

    def sigma(self, k):
        return sigma_ert(k, self)


def ert_model(a: float, c6: float, iso: Isotope) -> ErtModel:
    """ERT model with the effective range derived from ``(a, c6)``."""
    return ErtModel(a, effective_range(a, c6, iso), c6, iso)


def sigma_ert(k, model: ErtModel):
    """``8 pi a^2 / (k^2 a^2 + (k^2 r_e a / 2 - 1)^2)`` in m^2."""
    k = np.asarray(k, dtype=float)
    if np.any(k < 0):
        raise ValueError("k must be non-negative")
    a, re = model.a, model.r_e
    k2 = k * k
    out = 8 * np.pi * a * a / (k2 * a * a + (0.5 * k2 * re * a - 1.0) ** 2)
    return out if out.ndim else float(out)
