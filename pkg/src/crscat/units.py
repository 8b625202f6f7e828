"""Physical constants, unit conversion and isotope data.

Everything inside the package is SI. Unit tags only show up at I/O
boundaries (CLI arguments, key-value files).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np
from scipy import constants as _sc

__all__ = [
    "PhysicalConstants",
    "CONST",
    "Isotope",
    "CR52",
    "CR50",
    "isotope",
    "convert",
    "parse_quantity",
    "DimensionError",
]


@dataclass(frozen=True)
class PhysicalConstants:
    k_B: float = _sc.k
    hbar: float = _sc.hbar
    h: float = _sc.h
    a0: float = _sc.physical_constants["Bohr radius"][0]
    u: float = _sc.physical_constants["atomic mass constant"][0]
    # one atomic unit of C6, rounded as quoted for chromium
    c6_au: float = 9.57e-80


CONST = PhysicalConstants()


@dataclass(frozen=True)
class Isotope:
    label: str
    mass_u: float
    mass: float = field(init=False)
    reduced_mass: float = field(init=False)

    def __post_init__(self):
        if not self.mass_u > 0:
            raise ValueError(f"mass_u must be positive, got {self.mass_u}")
        m = self.mass_u * CONST.u
        object.__setattr__(self, "mass", m)
        # identical collision partners
        object.__setattr__(self, "reduced_mass", m / 2)


CR52 = Isotope("Cr-52", 51.9405)
CR50 = Isotope("Cr-50", 49.9460)

_ISOTOPES = {"cr-52": CR52, "cr52": CR52, "52cr": CR52, "cr-50": CR50, "cr50": CR50, "50cr": CR50}


def isotope(label: str | Isotope) -> Isotope:
    """Look up an isotope by label (``Cr-52``, ``cr50`` ...)."""
    if isinstance(label, Isotope):
        return label
    try:
        return _ISOTOPES[label.strip().lower()]
    except KeyError:
        raise KeyError(f"unknown isotope {label!r}; known: Cr-52, Cr-50") from None


class DimensionError(ValueError):
    """Raised when converting between unit tags of different dimensions."""


# tag -> (dimension, SI factor); temperature-equivalent energies go through k_B
_UNITS: dict[str, tuple[str, float]] = {
    "m": ("length", 1.0),
    "nm": ("length", 1e-9),
    "um": ("length", 1e-6),
    "a0": ("length", CONST.a0),
    "J": ("energy", 1.0),
    "K_E": ("energy", CONST.k_B),
    "uK_E": ("energy", CONST.k_B * 1e-6),
    "Hz_E": ("energy", CONST.h),
    "J*m6": ("c6", 1.0),
    "au": ("c6", CONST.c6_au),
    "K": ("temperature", 1.0),
    "mK": ("temperature", 1e-3),
    "uK": ("temperature", 1e-6),
    "s": ("time", 1.0),
    "ms": ("time", 1e-3),
    "Hz": ("frequency", 1.0),
    "m3/s": ("rate_coefficient", 1.0),
    "cm3/s": ("rate_coefficient", 1e-6),
    "m-3": ("density", 1.0),
    "cm-3": ("density", 1e6),
}
_ALIASES = {
    "c6_au": "au",
    "a.u.": "au",
    "jm6": "J*m6",
    "j*m6": "J*m6",
    "j": "J",
    "μk": "uK",
    "µk": "uK",
    "uk": "uK",
    "mk": "mK",
    "k": "K",
    "μm": "um",
    "bohr": "a0",
    "hz": "Hz",
}


def _resolve(tag: str) -> tuple[str, float]:
    if tag in _UNITS:
        return _UNITS[tag]
    alias = _ALIASES.get(tag.lower())
    if alias is None:
        raise KeyError(f"unknown unit tag {tag!r}")
    return _UNITS[alias]


def convert(value, from_unit: str, to_unit: str):
    """Linear conversion between two unit tags of the same dimension.

    >>> convert(1, "au", "J*m6")
    9.57e-80
    """
    dim_a, fa = _resolve(from_unit)
    dim_b, fb = _resolve(to_unit)
    if dim_a != dim_b:
        raise DimensionError(f"cannot convert {from_unit} ({dim_a}) to {to_unit} ({dim_b})")
    if fa == fb:
        return value
    return value * fa / fb


_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([^\d\s].*)?$")


def parse_quantity(text: str, dimension: str, default_unit: str | None = None) -> float:
    """Parse a unit-suffixed string such as ``170a0`` or ``42uK`` into SI.

    A bare number is taken to be in ``default_unit`` (SI if not given).
    """
    m = _QUANTITY.match(str(text))
    if not m:
        raise ValueError(f"cannot parse quantity {text!r}")
    number = float(m.group(1))
    unit = (m.group(2) or "").strip() or default_unit
    if unit is None:
        return number
    dim, factor = _resolve(unit)
    if dim != dimension:
        raise DimensionError(f"{text!r} is a {dim}, expected {dimension}")
    return number * factor


def temperature_to_energy(T):
    return CONST.k_B * T


def energy_to_temperature(E):
    return E / CONST.k_B


def wavenumber(E, iso: Isotope):
    """Relative wavenumber for collision energy ``E``."""
    return np.sqrt(2 * iso.reduced_mass * E) / CONST.hbar


def collision_energy(k, iso: Isotope):
    return (CONST.hbar * k) ** 2 / (2 * iso.reduced_mass)
