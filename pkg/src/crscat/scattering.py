"""Single-channel s-wave scattering by outward Numerov propagation.

Phase convention: the s-wave phase shift is absolute, i.e. it is fixed by the
node count of the radial solution, so that ``delta0 -> N_b * pi`` as the
collision energy goes to zero (Levinson).  ``sigma = 8 pi sin^2(delta0)/k^2``
carries the identical-boson factor.

The grid is fixed-step inside the well and doubles its step outward once the
local wavelength and the potential length scale allow, which keeps the
zero-energy integration out to ~8000 a0 cheap.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from ._backend import kernels, threads
from .ert import mean_scattering_length
from .potential import JointMismatchError, MorseVdwParams, PotentialModel, build_morse_vdw
from .units import CONST, Isotope

__all__ = [
    "SolverSettings",
    "ConvergenceError",
    "NoSolutionError",
    "ResonanceWarning",
    "DWaveWarning",
    "RelativeMotion",
    "PhaseShiftTable",
    "ScatteringSummary",
    "radial_solution",
    "phase_shift",
    "scattering_length",
    "bound_state_count",
    "summarize",
    "cross_section_numeric",
    "phase_shift_table",
    "depth_branch",
    "tune_to_scattering_length",
    "mass_scale_predict",
    "MassScaleResult",
    "D_WAVE_THRESHOLD_K",
]

#: temperature above which d-wave contributions stop being negligible for Cr
D_WAVE_THRESHOLD_K = 1.3e-3


class ConvergenceError(RuntimeError):
    """Raised when a result changes by more than its tolerance under refinement."""


class NoSolutionError(RuntimeError):
    """Raised when no potential in the searched family meets the target."""


class ResonanceWarning(UserWarning):
    """|a| is huge: a bound state sits right at threshold."""


class DWaveWarning(UserWarning):
    """Collision energy is above the d-wave threshold; s-wave only is used."""


@dataclass(frozen=True)
class SolverSettings:
    """Numerical knobs of the radial propagation.

    points_per_wavelength
        grid points per local de Broglie wavelength (minimum 50).
    points_per_scale
        grid points per potential length scale ``|V/V'|`` in the tail.
    radii_abar
        radii, in units of the mean scattering length, where the local
        scattering length is sampled before extrapolating in ``1/r**3``.
    match_abar
        matching radius for finite-energy phase shifts (mean scattering lengths).
    """

    points_per_wavelength: float = 400.0
    points_per_scale: float = 50.0
    radii_abar: tuple[float, ...] = (20.0, 40.0, 80.0, 160.0)
    match_abar: float = 160.0
    a_tol: float = 1e-4  # relative spread allowed between extrapolation orders
    phase_tol: float = 1e-6  # rad, matching radius vs half of it
    min_inner_steps: int = 2000

    def refined(self, factor: float = 2.0) -> SolverSettings:
        return replace(self, points_per_wavelength=self.points_per_wavelength * factor,
                       min_inner_steps=int(self.min_inner_steps * factor))


DEFAULT_SETTINGS = SolverSettings()


@dataclass(frozen=True)
class RelativeMotion:
    """Wavenumber, relative speed and energy of a colliding pair."""

    k: float
    v_r: float
    E: float

    @classmethod
    def from_energy(cls, E: float, iso: Isotope) -> RelativeMotion:
        k = math.sqrt(2 * iso.reduced_mass * E) / CONST.hbar
        return cls(k, CONST.hbar * k / iso.reduced_mass, E)

    @classmethod
    def from_k(cls, k: float, iso: Isotope) -> RelativeMotion:
        return cls(k, CONST.hbar * k / iso.reduced_mass, (CONST.hbar * k) ** 2 / (2 * iso.reduced_mass))

    @classmethod
    def from_speed(cls, v_r: float, iso: Isotope) -> RelativeMotion:
        return cls.from_k(iso.reduced_mass * v_r / CONST.hbar, iso)


@dataclass
class _Segment:
    x: np.ndarray
    u: np.ndarray
    w: np.ndarray
    h: float

    def deriv(self, i: int) -> float:
        c = self.h**2 / 6.0
        return (self.u[i + 1] * (1 - c * self.w[i + 1]) - self.u[i - 1] * (1 - c * self.w[i - 1])) / (2 * self.h)


@dataclass
class RadialSolution:
    """Outward solution ``u(x)`` on a piecewise-uniform grid (x in units of L)."""

    segments: list
    L: float
    k: float  # in 1/L
    nodes_per_segment: list

    @property
    def x_out(self) -> float:
        return float(self.segments[-1].x[-1])

    def _locate(self, x: float):
        for seg in self.segments:
            if seg.x[1] <= x < seg.x[-2] or seg is self.segments[-1]:
                i = int(np.clip(np.searchsorted(seg.x, x), 1, len(seg.x) - 2))
                return seg, i
        raise ValueError(x)

    def nodes_upto(self, seg_idx: int, i: int) -> int:
        n = sum(self.nodes_per_segment[:seg_idx])
        seg = self.segments[seg_idx]
        start = 0 if seg_idx == 0 else 1
        return n + _count_nodes(seg.u[start : i + 1])

    def local_scattering_length(self, x: float) -> tuple[float, float]:
        """``(x_i, x_i - u/u')`` at the grid point nearest above ``x``."""
        seg, i = self._locate(x)
        return float(seg.x[i]), float(seg.x[i] - seg.u[i] / seg.deriv(i))

    def phase(self, x: float) -> float:
        """Absolute phase shift from matching near ``x`` to ``sin(kx + delta)``."""
        seg_idx = None
        for j, seg in enumerate(self.segments):
            if seg.x[0] <= x <= seg.x[-1]:
                seg_idx = j
        if seg_idx is None:
            seg_idx = len(self.segments) - 1
        seg = self.segments[seg_idx]
        i2 = int(np.clip(np.searchsorted(seg.x, x), 1, len(seg.x) - 1))
        k = self.k
        # partner point about a quarter wavelength inward for conditioning
        m = max(1, min(i2 - 1, int(round(0.5 * math.pi / (k * seg.h)))))
        i1 = i2 - m
        x1, x2 = seg.x[i1], seg.x[i2]
        u1, u2 = seg.u[i1], seg.u[i2]
        s1, c1 = math.sin(k * x1), math.cos(k * x1)
        s2, c2 = math.sin(k * x2), math.cos(k * x2)
        det = s1 * c2 - s2 * c1
        C = (u1 * c2 - u2 * c1) / det
        S = (s1 * u2 - s2 * u1) / det
        d0 = math.atan2(S, C)
        n = self.nodes_upto(seg_idx, i2)
        phi = k * x2 + d0
        phi = phi - math.pi * math.floor(phi / math.pi) + n * math.pi
        return phi - k * x2


def _count_nodes(u: np.ndarray) -> int:
    s = np.sign(u)
    nz = s[s != 0]
    return int(np.count_nonzero(nz[1:] != nz[:-1]))


def _abar(pot, iso: Isotope) -> float:
    if pot.c6 > 0:
        return mean_scattering_length(pot.c6, iso)
    return 0.0


def radial_solution(pot, iso: Isotope, E: float, x_out: float,
                    settings: SolverSettings = DEFAULT_SETTINGS) -> RadialSolution:
    """Propagate ``u'' = (2 mu / hbar^2)(V - E) u`` outward to ``x_out`` (units of L)."""
    L = pot.length_scale
    scale = 2 * iso.reduced_mass * L * L / CONST.hbar**2
    k2 = scale * E
    k = math.sqrt(k2)

    def w_of(x):
        return scale * pot(x * L) - k2

    x_s = pot.start_radius(E) / L
    x_t = max([pot.tail_start / L, x_s] + [b / L for b in pot.breakpoints])
    x_inner_end = max(x_t * 1.05, x_s + 1e-12)

    # base step from the fastest local oscillation/decay in the inner region
    xs = np.linspace(x_s, x_inner_end, 4001)[1:]
    q_inner = np.sqrt(np.abs(w_of(xs)))
    q_inner = q_inner[np.isfinite(q_inner)]
    q_max = max(float(q_inner.max()) if q_inner.size else 0.0, k)
    ppw = settings.points_per_wavelength
    span = x_inner_end - x_s
    h = span / settings.min_inner_steps
    if q_max > 0:
        h = min(h, 2 * math.pi / (ppw * q_max))
    if any(b / L > x_s for b in pot.breakpoints):
        n0 = math.ceil((x_t - x_s) / h)
        h = (x_t - x_s) / n0

    # largest admissible step beyond each sample radius (reverse cumulative min)
    samples = np.geomspace(max(x_inner_end, 1e-12), max(x_out, x_inner_end * 1.01), 2000)
    w_s = np.abs(w_of(samples) + k2)  # |U| without the energy
    q_s = np.sqrt(w_s + k2)
    with np.errstate(divide="ignore"):
        h_wave = np.where(q_s > 0, 2 * math.pi / (ppw * q_s), np.inf)
    h_scale = samples / (6.0 * settings.points_per_scale)
    h_allow = np.minimum.accumulate(np.minimum(h_wave, h_scale)[::-1])[::-1]

    segments = []
    nodes = []
    x_b = x_s
    u_a, u_b = 0.0, 1e-30  # u at x_b and x_b + h
    first = True
    while True:
        if first:
            x_from = x_b
        else:
            x_from = x_b - h
        # decide where this segment may end
        if x_b < x_inner_end:
            j0 = 0
        else:
            j0 = int(np.searchsorted(samples, x_b))
        ok = np.flatnonzero(h_allow[j0:] >= 2 * h)
        if ok.size and samples[j0 + ok[0]] < x_out:
            x_end = max(samples[j0 + ok[0]], x_inner_end, x_b + 2 * h)
        else:
            x_end = x_out
        n = max(2, math.ceil((x_end - x_from) / h - 1e-9))
        x = x_from + h * np.arange(n + 1)
        w = w_of(x)
        if first and not np.isfinite(w[0]):
            w[0] = w[1]  # hard wall at x_s; u = 0 there anyway
        u = np.empty(n + 1)
        u[0], u[1] = u_a, u_b
        kernels.numerov_fill(np.ascontiguousarray(w), u, h * h)
        segments.append(_Segment(x, u, w, h))
        nodes.append(_count_nodes(u if first else u[1:]))
        if x[-1] >= x_out:
            break
        norm = max(abs(u[-1]), abs(u[-3]))
        u_a, u_b = u[-3] / norm, u[-1] / norm
        x_b = x[-1]
        h *= 2
        first = False
    return RadialSolution(segments, L, k, nodes)


def _zero_energy(pot, iso, settings):
    L = pot.length_scale
    abar = _abar(pot, iso)
    if abar > 0:
        radii = np.array(settings.radii_abar) * abar / L
    else:
        rng = max(pot.tail_start, max(pot.breakpoints, default=0.0), pot.start_radius(0.0)) / L
        radii = np.array([2.0, 3.0, 4.0]) * max(rng, 1.0)
    sol = radial_solution(pot, iso, 0.0, radii[-1] * 1.02, settings)
    pts = [sol.local_scattering_length(r) for r in radii]
    return sol, np.array([p[0] for p in pts]), np.array([p[1] for p in pts]), abar


def _extrapolate(r, a_loc, abar, L, tol):
    """Remove the ``1/r**3`` (+ ``1/r**4``) tail correction of the local a(r)."""
    if abar == 0:
        return a_loc[-1], 0.0
    A3 = np.vstack([np.ones_like(r), r**-3.0, r**-4.0]).T
    a3 = np.linalg.lstsq(A3, a_loc, rcond=None)[0][0]
    # two-point 1/r^3 elimination from the outermost pair
    r1, r2 = r[-2], r[-1]
    a2 = (a_loc[-1] * r2**3 - a_loc[-2] * r1**3) / (r2**3 - r1**3)
    return a3, abs(a3 - a2)


def scattering_length(pot, iso: Isotope, settings: SolverSettings = DEFAULT_SETTINGS,
                      check: bool = True) -> float:
    """Zero-energy s-wave scattering length (m)."""
    sol, r, a_loc, abar = _zero_energy(pot, iso, settings)
    L = pot.length_scale
    a, spread = _extrapolate(r, a_loc, abar, L, settings.a_tol)
    if check:
        _check_a(a * L, spread * L, abar, settings)
    return a * L


def _check_a(a, spread, abar, settings):
    """``a``, ``spread`` and ``abar`` in metres."""
    scale = max(abs(a), abar)
    if abar > 0 and spread > settings.a_tol * scale:
        raise ConvergenceError(
            f"scattering length extrapolation unstable: spread {spread:.3g} m at a = {a:.6g} m")
    if abs(a) > 1e4 * CONST.a0:
        warnings.warn(f"|a| = {abs(a) / CONST.a0:.4g} a0 exceeds 1e4 a0: near-threshold bound state",
                      ResonanceWarning, stacklevel=3)


def bound_state_count(pot, iso: Isotope, settings: SolverSettings = DEFAULT_SETTINGS) -> int:
    """Number of s-wave bound states = nodes of the zero-energy solution in (0, inf)."""
    sol, r, a_loc, abar = _zero_energy(pot, iso, settings)
    return _count_from(sol, r, a_loc, abar, pot.length_scale, settings)


def _count_from(sol, r, a_loc, abar, L, settings) -> int:
    n = sum(sol.nodes_per_segment)
    a, _ = _extrapolate(r, a_loc, abar, L, settings.a_tol)
    # beyond the grid u ~ (r - a): one more node if a lies outside it
    if a > sol.x_out:
        n += 1
    return n


@dataclass(frozen=True)
class ScatteringSummary:
    a: float
    n_bound: int
    c6: float
    isotope: Isotope


def summarize(pot, iso: Isotope, settings: SolverSettings = DEFAULT_SETTINGS) -> ScatteringSummary:
    sol, r, a_loc, abar = _zero_energy(pot, iso, settings)
    L = pot.length_scale
    a, spread = _extrapolate(r, a_loc, abar, L, settings.a_tol)
    return ScatteringSummary(a * L, _count_from(sol, r, a_loc, abar, L, settings), pot.c6, iso)


def phase_shift(pot, iso: Isotope, E: float, settings: SolverSettings = DEFAULT_SETTINGS) -> float:
    """Absolute s-wave phase shift (rad) at collision energy ``E`` (J)."""
    if not E > 0:
        raise ValueError("phase_shift needs E > 0")
    L = pot.length_scale
    abar = _abar(pot, iso) / L
    k = math.sqrt(2 * iso.reduced_mass * E) / CONST.hbar * L
    if abar > 0:
        x_match = settings.match_abar * abar
    else:
        rng = max(pot.tail_start, max(pot.breakpoints, default=0.0), pot.start_radius(E)) / L
        x_match = 2.0 * max(rng, 1.0) + 0.5 * math.pi / k
    sol = radial_solution(pot, iso, E, x_match * 1.001, settings)
    d = sol.phase(x_match)
    if abar > 0:
        d_half = sol.phase(0.5 * x_match)
        if abs(d - d_half) > settings.phase_tol:
            raise ConvergenceError(
                f"phase shift moved by {abs(d - d_half):.3g} rad when doubling the matching radius"
            )
    return d


def cross_section_numeric(pot, iso: Isotope, k: float, settings: SolverSettings = DEFAULT_SETTINGS) -> float:
    """``8 pi sin^2(delta0) / k^2`` (m^2) at relative wavenumber ``k`` (1/m)."""
    if not k > 0:
        raise ValueError("k must be positive")
    E = (CONST.hbar * k) ** 2 / (2 * iso.reduced_mass)
    if E / CONST.k_B > D_WAVE_THRESHOLD_K:
        warnings.warn(f"collision energy {E / CONST.k_B * 1e3:.2f} mK above the d-wave threshold; "
                      "s-wave only", DWaveWarning, stacklevel=2)
    d = phase_shift(pot, iso, E, settings)
    sigma = 8 * math.pi * math.sin(d) ** 2 / k**2
    assert sigma <= 8 * math.pi / k**2 * (1 + 1e-12)
    return sigma


@dataclass
class PhaseShiftTable:
    """Phase shifts on an increasing energy grid."""

    isotope: Isotope
    E: np.ndarray
    delta0: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.E = np.asarray(self.E, dtype=float)
        self.delta0 = np.asarray(self.delta0, dtype=float)
        if np.any(np.diff(self.E) <= 0):
            raise ValueError("energies must be strictly increasing")
        if not np.all(np.isfinite(self.delta0)):
            raise ValueError("phase shifts must be finite")

    @property
    def k(self) -> np.ndarray:
        return np.sqrt(2 * self.isotope.reduced_mass * self.E) / CONST.hbar

    @property
    def sigma(self) -> np.ndarray:
        return 8 * np.pi * np.sin(self.delta0) ** 2 / self.k**2

    def to_csv(self, path) -> None:
        from .io import write_csv

        rows = zip(self.E, self.E / CONST.k_B, self.k, self.delta0, self.sigma)
        write_csv(path, ["E_J", "T_equiv_K", "k_inv_m", "delta0_rad", "sigma_m2"], rows,
                  manifest=self.metadata)

    @classmethod
    def from_csv(cls, path, iso: Isotope) -> PhaseShiftTable:
        from .io import read_csv

        cols, meta = read_csv(path)
        return cls(iso, cols["E_J"], cols["delta0_rad"], meta)


def energy_grid(T_lo: float = 1e-7, T_hi: float = 2e-3, per_decade: int = 60) -> np.ndarray:
    """Logarithmic energy grid (J) between two temperature equivalents."""
    n = int(round(math.log10(T_hi / T_lo) * per_decade)) + 1
    return np.geomspace(T_lo, T_hi, n) * CONST.k_B


def phase_shift_table(pot, iso: Isotope, energies=None,
                      settings: SolverSettings = DEFAULT_SETTINGS) -> PhaseShiftTable:
    """Phase shifts over an energy grid; parallel over ``CRSCAT_THREADS`` workers."""
    E = energy_grid() if energies is None else np.asarray(energies, dtype=float)
    fn = lambda e: phase_shift(pot, iso, float(e), settings)  # noqa: E731
    nthreads = threads()
    if nthreads > 1:
        with ThreadPoolExecutor(nthreads) as ex:
            d = list(ex.map(fn, E))
    else:
        d = [fn(e) for e in E]
    meta = {"points_per_wavelength": settings.points_per_wavelength, "match_abar": settings.match_abar}
    return PhaseShiftTable(iso, E, np.array(d), meta)


# -- tuning and mass scaling -------------------------------------------------


def _model(template: MorseVdwParams, depth: float) -> PotentialModel:
    return build_morse_vdw(replace(template, depth=depth, r_join=None))


def _count_at(template, depth, iso, settings):
    return bound_state_count(_model(template, depth), iso, settings)


def _threshold_depth(template, n, iso, settings, lo=None, hi=None):
    """Smallest depth supporting ``n`` bound states (bisection on the node count)."""
    d = template.depth
    if lo is None or hi is None:
        lo = hi = d
        c = _count_at(template, d, iso, settings)
        if c >= n:
            while c >= n:
                hi = lo
                lo *= 0.8
                c = _count_at(template, lo, iso, settings)
        else:
            while c < n:
                lo = hi
                hi *= 1.25
                c = _count_at(template, hi, iso, settings)
    while hi / lo - 1 > 1e-12:
        mid = math.sqrt(lo * hi)
        if _count_at(template, mid, iso, settings) >= n:
            hi = mid
        else:
            lo = mid
    return hi


def depth_branch(template: MorseVdwParams, n_bound: int, iso: Isotope,
                 settings: SolverSettings = DEFAULT_SETTINGS) -> tuple[float, float]:
    """Depth interval in which the model holds exactly ``n_bound`` bound states."""
    d_lo = _threshold_depth(template, n_bound, iso, settings)
    d_hi = _threshold_depth(template, n_bound + 1, iso, settings)
    return d_lo, d_hi


def _a_quiet(template, depth, iso, settings):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResonanceWarning)
        return scattering_length(_model(template, depth), iso, settings, check=False)


def tune_to_scattering_length(template: MorseVdwParams, target_a: float, iso: Isotope,
                              target_n_bound: int,
                              settings: SolverSettings = DEFAULT_SETTINGS,
                              branch: tuple[float, float] | None = None) -> PotentialModel:
    """Adjust the Morse depth so that ``a = target_a`` with ``target_n_bound`` bound states.

    Within one bound-state branch ``a(depth)`` falls monotonically from
    ``+inf`` to ``-inf``, so the root is unique and bracketed.
    """
    if target_n_bound < 1:
        raise ValueError("target_n_bound must be >= 1")
    d_lo, d_hi = branch or depth_branch(template, target_n_bound, iso, settings)
    f = lambda d: _a_quiet(template, d, iso, settings) - target_a  # noqa: E731
    # right at a threshold a(r) is too large to extrapolate; back off until
    # the branch-edge signs (+inf side, -inf side) show up
    for eps in (1e-6, 1e-5, 1e-4, 1e-3):
        lo, hi = d_lo * (1 + eps), d_hi * (1 - eps)
        f_lo, f_hi = f(lo), f(hi)
        if f_lo > 0 > f_hi:
            break
    else:
        raise NoSolutionError(
            f"a = {target_a / CONST.a0:.1f} a0 with N_b = {target_n_bound} not bracketed "
            f"(a - target = {f_lo:.3g}, {f_hi:.3g} m at branch edges)"
        )
    depth = brentq(f, lo, hi, xtol=1e-14 * d_lo, rtol=1e-14, maxiter=200)
    model = _model(template, depth)
    summ = summarize(model, iso, settings)
    if summ.n_bound != target_n_bound or abs(summ.a - target_a) > 0.1 * CONST.a0:
        raise NoSolutionError(f"tuning ended at a={summ.a / CONST.a0:.3f} a0, N_b={summ.n_bound}")
    return model


@dataclass
class MassScaleResult:
    """Candidates from rescaling a potential family to another isotope."""

    iso_from: Isotope
    iso_to: Isotope
    a_from: float
    candidates: list  # (n_bound, a_to or None, depth or None, error message or None)

    @property
    def values(self) -> list[tuple[int, float]]:
        return [(n, a) for n, a, _, err in self.candidates if err is None]

    @property
    def positive_fraction(self) -> float:
        vals = [a for _, a in self.values]
        return float(np.mean([a > 0 for a in vals])) if vals else float("nan")


def mass_scale_predict(model: PotentialModel, iso_from: Isotope, iso_to: Isotope,
                       n_bound_range, settings: SolverSettings = DEFAULT_SETTINGS) -> MassScaleResult:
    """Scattering length at ``iso_to`` for each bound-state count in ``n_bound_range``.

    For every ``N_b`` the depth is re-tuned so that ``iso_from`` keeps its
    scattering length with ``N_b`` bound states; the same potential is then
    evaluated with the reduced mass of ``iso_to``.
    """
    a_from = scattering_length(model, iso_from, settings)
    template = model.params
    lo, hi = (n_bound_range[0], n_bound_range[-1]) if not isinstance(n_bound_range, range) else (
        n_bound_range.start, n_bound_range.stop - 1)
    cands = []
    thresholds = {}

    def thr(n):
        if n not in thresholds:
            near = [m for m in thresholds]
            below = max((m for m in near if m < n), default=None)
            above = min((m for m in near if m > n), default=None)
            if below is not None and above is not None:
                thresholds[n] = _threshold_depth(template, n, iso_from, settings,
                                                 thresholds[below], thresholds[above])
            else:
                thresholds[n] = _threshold_depth(template, n, iso_from, settings)
        return thresholds[n]

    for n in range(lo, hi + 1):
        try:
            tuned = tune_to_scattering_length(template, a_from, iso_from, n, settings,
                                              branch=(thr(n), thr(n + 1)))
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ResonanceWarning)
                a_to = scattering_length(tuned, iso_to, settings)
            cands.append((n, a_to, tuned.params.depth, None))
        except (NoSolutionError, ConvergenceError, JointMismatchError) as exc:
            cands.append((n, None, None, str(exc)))
    return MassScaleResult(iso_from, iso_to, a_from, cands)
