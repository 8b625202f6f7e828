"""Test-particle Monte Carlo of a trapped thermal cloud.

Each step applies, in order,

1. exact harmonic motion per axis at the trap frequency of the step midpoint,
2. no-time-counter binary collisions on a cubic cell grid,
3. two-body pair loss with local rate ``beta * n`` and a deterministic
   heating term.

One test particle stands for ``weight`` atoms.  Collision candidates are
drawn with a fixed bound ``sv_max``.  A candidate whose ``sigma*v`` exceeds
the bound collides ``floor(ratio)`` times, plus once more with the leftover
probability.  The multiplicity is counted, so the collision rate stays
unbiased even for the divergent unitarity cross section.  One
isotropic redirection represents all events of a pair, since repeated
isotropic scatterings at fixed relative speed have the same distribution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ._backend import kernels
from .kinetics import (
    ConstantCrossSection,
    CrossSectionModel,
    EffectiveRangeCrossSection,
    NumericCrossSection,
    TrapConfig,
    UnitarityCrossSection,
    mean_density,
    thermal_avg_sigma_v,
)
from .units import CONST, CR52, Isotope

__all__ = [
    "StabilityError",
    "FitFailure",
    "Ensemble",
    "DsmcConfig",
    "Scenario",
    "CloudState",
    "RelaxationSeries",
    "initialize",
    "advance",
    "measure",
    "run_scenario",
    "estimate_alpha",
    "stability_limit",
    "compression_trap",
    "compression_scenario",
    "scenario_to_record",
    "scenario_from_record",
]

#: largest allowed omega*dt
OMEGA_DT_MAX = 0.02
#: largest allowed Gamma_coll*dt
GAMMA_DT_MAX = 0.1


class StabilityError(ValueError):
    """Time step violates the stability rule."""


class FitFailure(RuntimeError):
    """Relaxation fit inside :func:`estimate_alpha` failed."""


@dataclass
class Ensemble:
    positions: np.ndarray
    velocities: np.ndarray
    weight: float
    rng: np.random.Generator
    time: float = 0.0
    isotope: Isotope = CR52
    #: cumulative collision events since creation
    collisions: int = 0
    #: per-axis sum of x^2 after the last drift
    moments: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.positions) == 0:
            raise ValueError("ensemble is empty")
        if not self.weight > 0:
            raise ValueError("weight must be positive")
        self.positions = np.ascontiguousarray(self.positions, dtype=float)
        self.velocities = np.ascontiguousarray(self.velocities, dtype=float)

    @property
    def n_test(self) -> int:
        return len(self.positions)

    @property
    def atom_number(self) -> float:
        return self.weight * self.n_test

    def energy(self, omega) -> np.ndarray:
        """Per-axis mechanical energy summed over test particles (J)."""
        m = self.isotope.mass
        w = np.asarray(omega, dtype=float)
        return 0.5 * m * (np.sum(self.velocities**2, axis=0) + w**2 * np.sum(self.positions**2, axis=0))


@dataclass(frozen=True)
class DsmcConfig:
    """Simulation controls.

    ``dt=None`` picks the largest step allowed by the stability rule.
    ``cell_scheme`` is the number of cells per smallest Gaussian radius.
    """

    n_test: int = 100_000
    dt: float | None = None
    cell_scheme: float = 5.0
    sigma_model: CrossSectionModel = field(default_factory=lambda: ConstantCrossSection(0.0))
    loss_beta: float = 0.0
    heat_rate: float = 0.0
    seed: int = 0
    isotope: Isotope = CR52

    def __post_init__(self):
        if self.n_test < 2:
            raise ValueError("need at least two test particles")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.cell_scheme < 5.0:
            raise ValueError("cells must be at most 1/5 of the smallest cloud radius")
        if self.loss_beta < 0 or self.heat_rate < 0:
            raise ValueError("loss and heating must be non-negative")


@dataclass(frozen=True)
class Scenario:
    """Trap schedule, initial cloud and output times.

    Time zero is the end of the trap ramp; ramp points carry ``t <= 0``.
    The initial cloud is thermal in the trap at the first ramp time.
    """

    trap: TrapConfig
    N: float
    T_r: float
    T_z: float
    duration: float
    sampling: tuple[float, ...]

    def __post_init__(self):
        if not (self.N > 0 and self.T_r > 0 and self.T_z > 0 and self.duration > 0):
            raise ValueError("N, temperatures and duration must be positive")
        s = np.asarray(self.sampling, dtype=float)
        if s.size == 0 or np.any(s < 0) or np.any(s > self.duration) or np.any(np.diff(s) <= 0):
            raise ValueError("sampling times must increase within [0, duration]")
        object.__setattr__(self, "sampling", tuple(float(x) for x in s))
        if self.trap.ramp is not None and self.trap.ramp[-1][0] > 0:
            raise ValueError("trap ramp must end at or before t = 0")

    @property
    def t_start(self) -> float:
        return min(0.0, self.trap.ramp[0][0]) if self.trap.ramp else 0.0


@dataclass(frozen=True)
class CloudState:
    N: float
    T_x: float
    T_y: float
    T_z: float
    n_bar: float

    @property
    def T_r(self) -> float:
        return 0.5 * (self.T_x + self.T_y)

    @property
    def T_mean(self) -> float:
        return (self.T_x + self.T_y + self.T_z) / 3


@dataclass
class RelaxationSeries:
    t: np.ndarray
    t_star: np.ndarray
    T_r: np.ndarray
    T_z: np.ndarray
    N: np.ndarray
    n_bar: np.ndarray
    #: per-atom collision rate in each sampling interval (1/s), if simulated
    collision_rate: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    COLUMNS = ("t_s", "tstar_s", "Tr_K", "Tz_K", "N", "nbar_m3")

    def __post_init__(self):
        for name in ("t", "t_star", "T_r", "T_z", "N", "n_bar"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        n = len(self.t)
        if any(len(getattr(self, a)) != n for a in ("t_star", "T_r", "T_z", "N", "n_bar")):
            raise ValueError("columns differ in length")

    @property
    def delta_T(self) -> np.ndarray:
        return self.T_r - self.T_z

    @property
    def T_mean(self) -> np.ndarray:
        return (2 * self.T_r + self.T_z) / 3

    def to_csv(self, path, manifest=None) -> None:
        from .io import write_csv

        rows = zip(self.t, self.t_star, self.T_r, self.T_z, self.N, self.n_bar)
        write_csv(path, self.COLUMNS, rows, manifest=manifest if manifest is not None else self.metadata or None)

    @classmethod
    def from_csv(cls, path) -> RelaxationSeries:
        from .io import read_csv

        c, meta = read_csv(path, required=cls.COLUMNS)
        return cls(c["t_s"], c["tstar_s"], c["Tr_K"], c["Tz_K"], c["N"], c["nbar_m3"], metadata=meta)


# -- trap presets ---------------------------------------------------------------


def compression_trap(ramp_time: float = 0.025) -> TrapConfig:
    """Radial compression from 124 Hz to 207 Hz, axial 72.6 Hz."""
    two_pi = 2 * math.pi
    return TrapConfig(
        two_pi * 207.0, two_pi * 207.0, two_pi * 72.6, offset_field=1.75,
        ramp=((-ramp_time, two_pi * 124.0), (0.0, two_pi * 207.0)),
    )


def compression_scenario(N: float = 1e6, T0: float = 29e-6, duration: float = 1.0, n_samples: int = 40) -> Scenario:
    """Isotropic cloud at ``T0`` in the loading trap, compressed radially."""
    times = np.linspace(0.0, duration, n_samples)
    return Scenario(compression_trap(), N, T0, T0, duration, tuple(times))


# -- core steps -------------------------------------------------------------------


def _sample(rng, n, T, omega, m):
    T = np.asarray(T, dtype=float)
    sx = np.sqrt(CONST.k_B * T / (m * omega**2))
    sv = np.sqrt(CONST.k_B * T / m)
    pos = rng.standard_normal((n, 3)) * sx
    vel = rng.standard_normal((n, 3)) * sv
    return pos, vel


def initialize(scenario: Scenario, config: DsmcConfig) -> Ensemble:
    """Anisotropic thermal Gaussian for ``(T_r, T_r, T_z)`` in the initial trap."""
    rng = np.random.Generator(np.random.PCG64(config.seed))
    iso = config.isotope
    t0 = scenario.t_start
    omega = scenario.trap.omega_at(t0)
    T = np.array([scenario.T_r, scenario.T_r, scenario.T_z])
    pos, vel = _sample(rng, config.n_test, T, omega, iso.mass)
    return Ensemble(pos, vel, scenario.N / config.n_test, rng, t0, iso)


def _sv_max(model: CrossSectionModel, T_ref: float, iso: Isotope) -> float:
    g_mp = math.sqrt(4 * CONST.k_B * T_ref / iso.mass)
    g = np.linspace(0.3, 3.0, 271) * g_mp
    sv = np.asarray(model.sigma(iso.reduced_mass * g / CONST.hbar)) * g
    return float(np.max(sv))


def stability_limit(trap: TrapConfig, gamma_coll: float) -> float:
    """Largest time step allowed for the given trap and collision rate."""
    w_max = float(np.max(trap.omega))
    if trap.ramp is not None:
        w_max = max(w_max, max(p[1] for p in trap.ramp))
    dt = OMEGA_DT_MAX / w_max
    if gamma_coll > 0:
        dt = min(dt, GAMMA_DT_MAX / gamma_coll)
    return dt


class _Stepper:
    """Cached per-run quantities for :func:`advance`."""

    def __init__(self, ens: Ensemble, config: DsmcConfig, T_ref: float):
        iso = ens.isotope
        self.config = config
        self.model = config.sigma_model
        self.k_per_v = iso.reduced_mass / CONST.hbar
        self.sv_max = _sv_max(self.model, T_ref, iso) if not _is_zero(self.model) else 0.0
        g_top = 8 * math.sqrt(4 * CONST.k_B * T_ref / iso.mass)
        self.kind, params, table = self.model.kernel_spec(g_top * self.k_per_v)
        self.params = np.ascontiguousarray(params, dtype=float)
        self.table = np.ascontiguousarray(table, dtype=float)


def _is_zero(model) -> bool:
    return isinstance(model, ConstantCrossSection) and model.sigma0 == 0.0


def _drift(ens: Ensemble, omega: np.ndarray, dt: float):
    lo, hi, sq = kernels.drift(ens.positions, ens.velocities, omega, dt)
    ens.moments = sq
    return lo, hi, sq


def _collide(ens: Ensemble, stepper: _Stepper, dt: float, stats) -> int:
    cfg = stepper.config
    do_coll = stepper.sv_max > 0
    do_loss = cfg.loss_beta > 0
    if not (do_coll or do_loss):
        return 0
    lo, hi, sq = stats
    h = float(np.min(np.sqrt(sq / ens.n_test))) / cfg.cell_scheme
    inv_h = 1.0 / h
    dims = ((hi - lo) * inv_h).astype(np.int64) + 1
    order, starts = kernels.bin_cells(ens.positions, lo, inv_h, dims)
    vol = h**3
    cand = ens.weight * dt / (2 * vol) if do_coll else 0.0
    loss = cfg.loss_beta * ens.weight * dt / (2 * vol)
    alive = np.ones(ens.n_test, dtype=np.uint8)
    n_coll, _, _ = kernels.ntc_collide(
        ens.velocities, order, starts, stepper.kind, stepper.params, stepper.table,
        stepper.k_per_v, stepper.sv_max if do_coll else 1.0, cand, loss, ens.rng, alive,
    )
    if do_loss and not alive.all():
        keep = alive.astype(bool)
        if not keep.any():
            raise RuntimeError("all test particles lost")
        ens.positions = np.ascontiguousarray(ens.positions[keep])
        ens.velocities = np.ascontiguousarray(ens.velocities[keep])
        ens.moments = np.sum(ens.positions**2, axis=0)
    return int(n_coll)


def _heat(ens: Ensemble, heat_rate: float, dt: float) -> None:
    if heat_rate <= 0:
        return
    m = ens.isotope.mass
    T_kin = m * np.mean(ens.velocities**2, axis=0) / CONST.k_B
    ens.velocities *= np.sqrt(1.0 + 2.0 * heat_rate * dt / T_kin)


def advance(ens: Ensemble, trap: TrapConfig, config: DsmcConfig, dt: float,
            _stepper: _Stepper | None = None, gamma_coll: float = 0.0) -> Ensemble:
    """One drift/collide/loss step of length ``dt``; updates ``ens`` in place.

    ``gamma_coll`` is the current collision-rate estimate used by the
    stability check.
    """
    if dt > stability_limit(trap, gamma_coll) * (1 + 1e-12):
        raise StabilityError(f"dt = {dt:.3e} s exceeds the stability limit {stability_limit(trap, gamma_coll):.3e} s")
    if _stepper is None:
        cached = getattr(ens, "_stepper", None)
        if cached is None or cached.config is not config:
            T = measure(ens, trap.omega_at(ens.time)).T_mean
            cached = _Stepper(ens, config, T)
            ens._stepper = cached
        _stepper = cached
    omega = trap.omega_at(ens.time + 0.5 * dt)
    stats = _drift(ens, omega, dt)
    ens.collisions += _collide(ens, _stepper, dt, stats)
    _heat(ens, config.heat_rate, dt)
    ens.time += dt
    return ens


def _temperatures(pos: np.ndarray, omega: np.ndarray, m: float) -> np.ndarray:
    return m * omega**2 * np.mean(pos * pos, axis=0) / CONST.k_B


def measure(ens: Ensemble, trap_or_omega) -> CloudState:
    """Axis temperatures from position second moments."""
    omega = trap_or_omega.omega_at(ens.time) if isinstance(trap_or_omega, TrapConfig) else np.asarray(trap_or_omega)
    m = ens.isotope.mass
    T = _temperatures(ens.positions, omega, m)
    N = ens.atom_number
    n_bar = N * np.prod(omega) * (m / (4 * math.pi * CONST.k_B)) ** 1.5 / math.sqrt(np.prod(T))
    return CloudState(N, float(T[0]), float(T[1]), float(T[2]), float(n_bar))


def _gamma_estimate(model, N, T, trap, iso) -> float:
    if _is_zero(model):
        return 0.0
    n = mean_density(N, T, T, T, trap, iso)
    return n * thermal_avg_sigma_v(model, T, iso)


def run_scenario(scenario: Scenario, config: DsmcConfig, progress=None) -> RelaxationSeries:
    """Simulate the ramp and the subsequent relaxation.

    The rescaled time ``t*`` accumulates ``n_bar(t)/n_bar(0) dt`` every step
    (trapezoid rule) with ``n_bar`` from the measured temperatures.
    """
    iso = config.isotope
    ens = initialize(scenario, config)
    trap = scenario.trap
    final = trap.final()
    # hottest temperature reached: adiabatic radial compression bound
    w0, w1 = trap.omega_at(scenario.t_start), final.omega
    T_ref = max(scenario.T_r * float(np.max(w1[:2] / w0[:2])), scenario.T_z)
    T_bar = (2 * scenario.T_r * float(np.max(w1[:2] / w0[:2])) + scenario.T_z) / 3
    gamma = _gamma_estimate(config.sigma_model, scenario.N, T_bar, final, iso)
    dt_max = stability_limit(trap, 1.3 * gamma)
    dt = config.dt if config.dt is not None else dt_max
    stepper = _Stepper(ens, config, T_ref)

    m = iso.mass
    # ramp phase
    if scenario.t_start < 0:
        n_ramp = max(1, int(math.ceil(-scenario.t_start / dt - 1e-9)))
        h = -scenario.t_start / n_ramp
        for _ in range(n_ramp):
            advance(ens, trap, config, h, stepper, 1.3 * gamma)
        ens.time = 0.0

    rows = []
    coll_rate = []

    def nbar_now():
        T = m * w1**2 * (ens.moments / ens.n_test) / CONST.k_B
        return ens.atom_number * np.prod(w1) * (m / (4 * math.pi * CONST.k_B)) ** 1.5 / math.sqrt(np.prod(T))

    ens.moments = np.sum(ens.positions**2, axis=0)
    n0 = nbar_now()
    t_star = 0.0
    prev_ratio = 1.0
    last_coll, last_t = ens.collisions, 0.0
    for t_sample in scenario.sampling:
        n_steps = int(math.ceil((t_sample - ens.time) / dt - 1e-9))
        if n_steps > 0:
            h = (t_sample - ens.time) / n_steps
            for _ in range(n_steps):
                t_next = ens.time + h
                advance(ens, final, config, h, stepper, 1.3 * gamma)
                ens.time = t_next
                ratio = nbar_now() / n0
                t_star += 0.5 * (ratio + prev_ratio) * h
                prev_ratio = ratio
        st = measure(ens, w1)
        span = ens.time - last_t
        coll_rate.append(2.0 * (ens.collisions - last_coll) / (ens.n_test * span) if span > 0 else np.nan)
        last_coll, last_t = ens.collisions, ens.time
        rows.append((ens.time, t_star, st.T_r, st.T_z, st.N, st.n_bar))
        if progress is not None:
            progress(ens.time, st)
    a = np.array(rows)
    meta = {
        "dt_s": dt, "n_test": config.n_test, "seed": config.seed, "sv_max": stepper.sv_max,
        "backend": kernels.BACKEND, "sigma_model": type(config.sigma_model).__name__,
    }
    return RelaxationSeries(a[:, 0], a[:, 1], a[:, 2], a[:, 3], a[:, 4], a[:, 5],
                            collision_rate=np.array(coll_rate), metadata=meta)


def estimate_alpha(model: CrossSectionModel, T: float, config: DsmcConfig, trap: TrapConfig,
                   gamma_over_omega: float = 0.04, anisotropy: float = 0.15,
                   n_tau: float = 3.0, n_samples: int = 60, N: float | None = None) -> float:
    """Ratio of the per-atom collision rate to the fitted relaxation rate.

    The cloud starts at ``T_r = T (1 + anisotropy)`` and
    ``T_z = T (1 - 2 anisotropy)`` in the static ``trap``, so its mean
    temperature is ``T``.  Unless ``N`` is given, the atom number is chosen
    so that the expected collision rate is ``gamma_over_omega`` times the
    smallest trap frequency.
    """
    from .analysis import fit_relaxation_time

    if config.loss_beta > 0 or config.heat_rate > 0:
        raise ValueError("losses and heating must be disabled")
    iso = config.isotope
    static = trap.final()
    if N is None:
        per_atom = _gamma_estimate(model, 1.0, T, static, iso)
        N = gamma_over_omega * float(np.min(static.omega)) / per_atom
    gamma = _gamma_estimate(model, N, T, static, iso)
    # first guess from the constant-cross-section value
    tau_guess = 2.65 / gamma
    duration = n_tau * tau_guess
    times = np.linspace(0.0, duration, n_samples)
    sc = Scenario(static, N, T * (1 + anisotropy), T * (1 - 2 * anisotropy), duration, tuple(times))
    series = run_scenario(sc, replace(config, sigma_model=model, isotope=iso))
    try:
        fit = fit_relaxation_time(series)
    except Exception as exc:  # noqa: BLE001
        raise FitFailure(str(exc)) from exc
    # collision rate normalised to the initial density, like t*
    ratio = series.n_bar / series.n_bar[0]
    cr = series.collision_rate[1:] / (0.5 * (ratio[1:] + ratio[:-1]))
    w = np.diff(series.t)
    coll = float(np.sum(cr * w) / np.sum(w))
    return coll * fit.value


# -- scenario files ---------------------------------------------------------------------


def _model_record(model: CrossSectionModel) -> dict:
    if isinstance(model, ConstantCrossSection):
        return {"sigma_model": "constant", "sigma0_m2": model.sigma0}
    if isinstance(model, UnitarityCrossSection):
        return {"sigma_model": "unitarity"}
    if isinstance(model, EffectiveRangeCrossSection):
        return {"sigma_model": "ert", "a_a0": model.model.a / CONST.a0, "c6_au": model.model.c6 / CONST.c6_au}
    raise ValueError(f"{type(model).__name__} cannot be written to a scenario file")


def scenario_to_record(scenario: Scenario, config: DsmcConfig) -> dict:
    """Flat key-value record (I/O units in the key suffixes)."""
    tr = scenario.trap
    two_pi = 2 * math.pi
    rec = {
        "isotope": config.isotope.label,
        "trap_fr_hz": tr.omega_x / two_pi,
        "trap_fz_hz": tr.omega_z / two_pi,
    }
    if tr.omega_y != tr.omega_x:
        rec["trap_fy_hz"] = tr.omega_y / two_pi
    if tr.offset_field is not None:
        rec["offset_field_G"] = tr.offset_field
    if tr.ramp is not None:
        rec["ramp_fr_start_hz"] = tr.ramp[0][1] / two_pi
        rec["ramp_duration_s"] = -tr.ramp[0][0]
    rec.update({
        "N": scenario.N, "Tr_K": scenario.T_r, "Tz_K": scenario.T_z,
        "duration_s": scenario.duration, "sample_times_s": list(scenario.sampling),
        "n_test": config.n_test, "cell_scheme": config.cell_scheme,
    })
    if config.dt is not None:
        rec["dt_s"] = config.dt
    rec.update(_model_record(config.sigma_model))
    rec.update({"loss_beta_m3s": config.loss_beta, "heat_rate_Ks": config.heat_rate, "seed": config.seed})
    return rec


def _f(rec, key, default=None):
    from .io import InputDataError

    if key not in rec:
        if default is not None:
            return default
        raise InputDataError(f"scenario lacks {key}")
    try:
        return float(rec[key])
    except ValueError:
        raise InputDataError(f"{key} is not a number: {rec[key]!r}") from None


def scenario_from_record(rec: dict, base_dir=None) -> tuple[Scenario, DsmcConfig]:
    """Inverse of :func:`scenario_to_record`; values may be strings."""
    from pathlib import Path

    from .ert import ert_model
    from .io import InputDataError
    from .scattering import PhaseShiftTable
    from .units import isotope

    known = {"isotope", "trap_fr_hz", "trap_fy_hz", "trap_fz_hz", "offset_field_G", "ramp_fr_start_hz",
             "ramp_duration_s", "N", "Tr_K", "Tz_K", "duration_s", "sample_times_s", "n_samples", "n_test",
             "cell_scheme", "dt_s", "sigma_model", "sigma0_m2", "a_a0", "c6_au", "sigma_table",
             "loss_beta_m3s", "heat_rate_Ks", "seed"}
    unknown = sorted(set(rec) - known)
    if unknown:
        raise InputDataError(f"unknown scenario keys: {', '.join(unknown)}")
    try:
        iso = isotope(str(rec.get("isotope", "Cr-52")))
    except KeyError as exc:
        raise InputDataError(str(exc)) from None
    two_pi = 2 * math.pi
    fr = _f(rec, "trap_fr_hz")
    fy = _f(rec, "trap_fy_hz", fr)
    ramp = None
    if "ramp_fr_start_hz" in rec:
        d = _f(rec, "ramp_duration_s")
        ramp = ((-d, two_pi * _f(rec, "ramp_fr_start_hz")), (0.0, two_pi * fr))
    off = _f(rec, "offset_field_G") if "offset_field_G" in rec else None
    try:
        trap = TrapConfig(two_pi * fr, two_pi * fy, two_pi * _f(rec, "trap_fz_hz"), off, ramp)
        duration = _f(rec, "duration_s")
        if "sample_times_s" in rec:
            raw = rec["sample_times_s"]
            times = [float(x) for x in (raw.split(",") if isinstance(raw, str) else raw)]
        else:
            times = list(np.linspace(0.0, duration, int(_f(rec, "n_samples", 40))))
        scenario = Scenario(trap, _f(rec, "N"), _f(rec, "Tr_K"), _f(rec, "Tz_K"), duration, tuple(times))
        kind = str(rec.get("sigma_model", "constant")).lower()
        if kind == "constant":
            model = ConstantCrossSection(_f(rec, "sigma0_m2"))
        elif kind == "unitarity":
            model = UnitarityCrossSection()
        elif kind == "ert":
            model = EffectiveRangeCrossSection(
                ert_model(_f(rec, "a_a0") * CONST.a0, _f(rec, "c6_au", 1050.0) * CONST.c6_au, iso))
        elif kind == "numeric":
            path = Path(str(rec["sigma_table"]))
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            model = NumericCrossSection.from_table(PhaseShiftTable.from_csv(path, iso))
        else:
            raise InputDataError(f"unknown sigma_model {kind!r}")
        config = DsmcConfig(
            n_test=int(_f(rec, "n_test", 100_000)),
            dt=_f(rec, "dt_s") if "dt_s" in rec else None,
            cell_scheme=_f(rec, "cell_scheme", 5.0),
            sigma_model=model,
            loss_beta=_f(rec, "loss_beta_m3s", 0.0),
            heat_rate=_f(rec, "heat_rate_Ks", 0.0),
            seed=int(_f(rec, "seed", 0)),
            isotope=iso,
        )
    except (ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, InputDataError):
            raise
        raise InputDataError(str(exc)) from None
    return scenario, config
