"""Single-channel interaction potentials.

The chromium model is a Morse well blended into a ``-C6/r**6`` tail over a
narrow switching window.  Two analytic stubs (hard sphere, square well) share
the same small interface so the radial solver can be checked against closed
forms.

Every potential exposes:

``__call__(r)``          potential energy in J, vectorised over ``r`` (m)
``start_radius(E)``      where outward integration begins (u = 0 there)
``breakpoints``          radii that must fall on the integration grid
``length_scale``         natural length unit (m)
``depth``                energy scale (J)
``c6``                   dispersion coefficient of the tail, 0 if short range
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .units import CONST, convert

__all__ = [
    "MorseVdwParams",
    "PotentialModel",
    "JointMismatchError",
    "build_morse_vdw",
    "evaluate",
    "default_join_radius",
    "HardSphere",
    "SquareWell",
    "ZeroPotential",
    "HardCoreVdw",
    "DEFAULT_TEMPLATE",
    "params_to_record",
    "params_from_record",
]

#: half width of the switching window relative to the joining radius
BLEND_HALF_WIDTH = 0.05
#: maximum relative Morse/vdW mismatch at the joint that the blend may absorb
MAX_JOINT_MISMATCH = 0.20
#: integration starts where V - E exceeds this many well depths
START_DEPTHS = 10.0


class JointMismatchError(ValueError):
    """The Morse branch and the dispersion tail disagree too much at r_join."""


@dataclass(frozen=True)
class MorseVdwParams:
    """Morse well parameters plus dispersion tail (all SI).

    ``r_join=None`` asks :func:`build_morse_vdw` to place the joint at the
    outer crossing of the two branches.
    """

    depth: float
    r_min: float
    width: float
    c6: float
    r_join: float | None = None

    def __post_init__(self):
        if not (self.depth > 0 and self.width > 0 and self.c6 > 0 and self.r_min > 0):
            raise ValueError(f"depth, r_min, width and c6 must be positive: {self}")
        if self.r_join is not None and not self.r_join > self.r_min:
            raise ValueError(f"r_join ({self.r_join}) must exceed r_min ({self.r_min})")

    def with_depth(self, depth: float) -> MorseVdwParams:
        return replace(self, depth=depth)


def _morse(p: MorseVdwParams, r):
    e = np.exp(-p.width * (r - p.r_min))
    return p.depth * ((1.0 - e) ** 2 - 1.0)


def _vdw(c6: float, r):
    return -c6 / r**6


def _switch(t):
    # quintic smoothstep: value, first and second derivative vanish at both ends
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0)


def default_join_radius(p: MorseVdwParams) -> float:
    """Outer radius where the Morse branch crosses ``-c6/r**6``.

    Beyond ``r_min`` the Morse tail decays exponentially, so the dispersion
    term eventually dominates; the crossing is bracketed and bisected.
    """
    f = lambda r: _morse(p, r) - _vdw(p.c6, r)  # noqa: E731
    lo = p.r_min
    if f(lo) >= 0:
        raise JointMismatchError(
            "well is shallower than the dispersion tail at r_min; no outer crossing"
        )
    hi = lo * 1.1
    while f(hi) < 0:
        hi *= 1.1
        if hi > 1e3 * p.r_min:
            raise JointMismatchError("no crossing of Morse and dispersion branches found")
    return brentq(f, lo, hi, xtol=1e-15 * p.r_min, rtol=1e-15)


@dataclass(frozen=True)
class PotentialModel:
    """Morse well smoothly switched onto a dispersion tail."""

    params: MorseVdwParams
    join_coefficients: tuple[float, float] = field(default=(0.0, 0.0))

    @property
    def r_join(self) -> float:
        return 0.5 * (self.join_coefficients[0] + self.join_coefficients[1])

    @property
    def depth(self) -> float:
        return self.params.depth

    @property
    def c6(self) -> float:
        return self.params.c6

    @property
    def length_scale(self) -> float:
        return CONST.a0

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return ()

    @property
    def tail_start(self) -> float:
        """Radius beyond which the potential is the pure dispersion tail."""
        return self.join_coefficients[1]

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise ValueError("potential evaluated at r <= 0")
        lo, hi = self.join_coefficients
        s = _switch((r - lo) / (hi - lo))
        out = (1.0 - s) * _morse(self.params, r) + s * _vdw(self.params.c6, r)
        return out if out.ndim else float(out)

    def start_radius(self, E: float = 0.0) -> float:
        p = self.params
        target = E + START_DEPTHS * p.depth
        f = lambda r: self(r) - target  # noqa: E731
        r_floor = 1e-3 * p.r_min
        if f(r_floor) < 0:
            return r_floor
        return brentq(f, r_floor, p.r_min, xtol=1e-12 * p.r_min)


def build_morse_vdw(params: MorseVdwParams) -> PotentialModel:
    """Assemble the blended potential, placing the joint if not given."""
    r_join = params.r_join if params.r_join is not None else default_join_radius(params)
    morse = _morse(params, r_join)
    tail = _vdw(params.c6, r_join)
    mismatch = abs(morse - tail) / abs(tail)
    if mismatch > MAX_JOINT_MISMATCH:
        raise JointMismatchError(
            f"Morse and dispersion branches differ by {mismatch:.1%} at r_join="
            f"{r_join / CONST.a0:.3f} a0 (limit {MAX_JOINT_MISMATCH:.0%})"
        )
    delta = BLEND_HALF_WIDTH * r_join
    if r_join - delta <= params.r_min:
        raise JointMismatchError("switching window reaches into the well minimum")
    return PotentialModel(replace(params, r_join=r_join), (r_join - delta, r_join + delta))


def evaluate(model, r):
    """Potential energy (J) at radius ``r`` (m)."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("radius must be positive")
    return model(r)


# -- analytic stubs ---------------------------------------------------------


@dataclass(frozen=True)
class HardSphere:
    """Impenetrable sphere of radius ``R``; zero potential outside."""

    R: float
    depth: float = 0.0
    c6: float = 0.0

    @property
    def length_scale(self) -> float:
        return self.R

    @property
    def breakpoints(self):
        return (self.R,)

    @property
    def tail_start(self) -> float:
        return self.R

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.where(r < self.R, np.inf, 0.0)
        return out if out.ndim else float(out)

    def start_radius(self, E: float = 0.0) -> float:
        return self.R


@dataclass(frozen=True)
class SquareWell:
    """Attractive well ``-V0`` for ``r < R``.

    At ``r == R`` the midpoint value is returned, which keeps Numerov second
    order accurate across the jump.
    """

    R: float
    V0: float
    c6: float = 0.0

    @classmethod
    def from_kappa(cls, kappa_R: float, R: float, reduced_mass: float) -> SquareWell:
        """Well whose zero-energy interior wavenumber times R equals ``kappa_R``."""
        V0 = (CONST.hbar * kappa_R / R) ** 2 / (2 * reduced_mass)
        return cls(R, V0)

    @property
    def depth(self) -> float:
        return self.V0

    @property
    def length_scale(self) -> float:
        return self.R

    @property
    def breakpoints(self):
        return (self.R,)

    @property
    def tail_start(self) -> float:
        return self.R

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.where(r < self.R, -self.V0, 0.0)
        out = np.where(r == self.R, -0.5 * self.V0, out)
        return out if out.ndim else float(out)

    def start_radius(self, E: float = 0.0) -> float:
        return 0.0


@dataclass(frozen=True)
class ZeroPotential:
    """Free motion; used for the vanishing-potential limits."""

    scale: float = CONST.a0
    depth: float = 0.0
    c6: float = 0.0

    @property
    def length_scale(self) -> float:
        return self.scale

    @property
    def breakpoints(self):
        return ()

    @property
    def tail_start(self) -> float:
        return 0.0

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        return out if out.ndim else 0.0

    def start_radius(self, E: float = 0.0) -> float:
        return 0.0


@dataclass(frozen=True)
class HardCoreVdw:
    """Pure ``-c6/r**6`` outside a hard core at ``r_core``.

    Its zero-energy scattering length has a Bessel-function closed form,
    which pins the tail extrapolation of the solver.
    """

    r_core: float
    c6: float

    @property
    def depth(self) -> float:
        return self.c6 / self.r_core**6

    @property
    def length_scale(self) -> float:
        return CONST.a0

    @property
    def breakpoints(self):
        return ()

    @property
    def tail_start(self) -> float:
        return self.r_core

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.where(r <= self.r_core, np.inf, -self.c6 / np.maximum(r, self.r_core) ** 6)
        return out if out.ndim else float(out)

    def start_radius(self, E: float = 0.0) -> float:
        return self.r_core


# -- template and file schema ------------------------------------------------

#: Short-range shape used for the chromium model.  Only the depth is varied
#: when tuning; r_min and the Morse width are fixed by this template.
DEFAULT_TEMPLATE = MorseVdwParams(
    depth=convert(1000.0, "K_E", "J"),
    r_min=10.0 * CONST.a0,
    width=1.2 / CONST.a0,
    c6=1050.0 * CONST.c6_au,
)

_RECORD_KEYS = ("depth_K", "r_min_a0", "width_inv_a0", "c6_au", "r_join_a0")


def params_to_record(p: MorseVdwParams) -> dict[str, float]:
    """Potential-file record in the documented I/O units."""
    rec = {
        "depth_K": p.depth / CONST.k_B,
        "r_min_a0": p.r_min / CONST.a0,
        "width_inv_a0": p.width * CONST.a0,
        "c6_au": p.c6 / CONST.c6_au,
    }
    if p.r_join is not None:
        rec["r_join_a0"] = p.r_join / CONST.a0
    return rec


def params_from_record(rec: dict) -> MorseVdwParams:
    missing = [k for k in _RECORD_KEYS[:4] if k not in rec]
    if missing:
        raise KeyError(f"potential record lacks {', '.join(missing)}")
    r_join = rec.get("r_join_a0")
    return MorseVdwParams(
        depth=float(rec["depth_K"]) * CONST.k_B,
        r_min=float(rec["r_min_a0"]) * CONST.a0,
        width=float(rec["width_inv_a0"]) / CONST.a0,
        c6=float(rec["c6_au"]) * CONST.c6_au,
        r_join=None if r_join is None else float(r_join) * CONST.a0,
    )
