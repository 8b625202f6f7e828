"""Relaxation data analysis.

Pipeline: rescale the time axis for density decay, fit an exponential to the
temperature difference, convert to a density-normalised rate, fit the s-wave
scattering length on each sign branch and compare the two branches.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.optimize import brentq, curve_fit, minimize_scalar

from .ert import effective_range
from .kinetics import KERNEL_A, KERNEL_B, CrossSectionModel, mean_relative_speed, sth_avg_sigma_v, _nodes
from .units import CONST, Isotope

__all__ = [
    "ThermalizationPoint",
    "FitResult",
    "SignReport",
    "BranchEmptyError",
    "SignError",
    "NarrowRangeWarning",
    "rescale_time",
    "fit_relaxation_time",
    "rate_over_density_model",
    "fit_scattering_length",
    "discriminate_sign",
    "propagate_systematics",
    "synthetic_points",
    "coverage_study",
    "sign_study",
    "points_to_csv",
    "points_from_csv",
    "A_MIN_A0",
    "A_MAX_A0",
    "DEFAULT_THRESHOLD",
]

A_MIN_A0 = 1.0
A_MAX_A0 = 2000.0
DEFAULT_THRESHOLD = 3.0
#: grid points per branch used to bracket the chi-square minimum
SCAN_POINTS = 160


class BranchEmptyError(RuntimeError):
    """No interior chi-square minimum on the requested sign branch."""


class SignError(ValueError):
    """The temperature difference changes sign beyond its noise."""


class NarrowRangeWarning(UserWarning):
    """Temperature span too small to tell the sign of ``a``."""


@dataclass(frozen=True)
class ThermalizationPoint:
    T: float
    rate_over_density: float
    stat_err: float

    def __post_init__(self):
        if not (self.T > 0 and self.rate_over_density > 0 and self.stat_err >= 0):
            raise ValueError(f"invalid thermalization point {self}")


@dataclass
class FitResult:
    value: float
    stat_err: float
    sys_err: float = 0.0
    chi2: float = 0.0
    dof: int = 1
    converged: bool = True
    uniform_weights: bool = False
    context: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.stat_err < 0 or self.sys_err < 0:
            raise ValueError("errors must be non-negative")
        if self.dof < 1:
            raise ValueError("need at least one degree of freedom")

    @property
    def total_err(self) -> float:
        return math.hypot(self.stat_err, self.sys_err)

    def to_record(self, unit: str = "") -> dict:
        rec = {
            "value": self.value, "stat_err": self.stat_err, "sys_err": self.sys_err,
            "total_err": self.total_err, "chi2": self.chi2, "dof": self.dof,
            "converged": self.converged, "uniform_weights": self.uniform_weights,
        }
        if unit:
            rec["unit"] = unit
        return rec


@dataclass
class SignReport:
    best_positive: FitResult
    best_negative: FitResult
    chi2_ratio: float
    verdict: str
    threshold: float = DEFAULT_THRESHOLD

    def to_record(self) -> dict:
        rec = {"verdict": self.verdict, "chi2_ratio": self.chi2_ratio, "threshold": self.threshold}
        for name, fit in (("positive", self.best_positive), ("negative", self.best_negative)):
            for k, v in fit.to_record().items():
                rec[f"{name}_{k}"] = v
            rec[f"{name}_a_a0"] = fit.value / CONST.a0
            rec[f"{name}_stat_err_a0"] = fit.stat_err / CONST.a0
        return rec


# -- time axis and exponential fit -------------------------------------------------


def rescale_time(series):
    """Return a copy of ``series`` with ``t*`` from trapezoidal integration of ``n(t)/n(t0)``."""
    t = np.asarray(series.t, dtype=float)
    n = np.asarray(series.n_bar, dtype=float)
    if np.any(np.diff(t) <= 0):
        raise ValueError("time axis must be strictly increasing")
    if np.any(n <= 0) or not np.all(np.isfinite(n)):
        raise ValueError("densities must be positive")
    t_star = t[0] + cumulative_trapezoid(n / n[0], t, initial=0.0)
    return replace(series, t_star=t_star)


def _exp(t, amp, rate):
    return amp * np.exp(-rate * t)


def fit_relaxation_time(series, sigma=None, use_rescaled: bool = True) -> FitResult:
    """Weighted least-squares fit of ``T_r - T_z = dT0 exp(-t*/tau)``.

    ``sigma`` gives per-point 1-sigma errors of the difference; without it
    the points are weighted uniformly and the covariance is scaled by the
    residual variance.
    """
    t = np.asarray(series.t_star if use_rescaled else series.t, dtype=float)
    y = np.asarray(series.T_r, dtype=float) - np.asarray(series.T_z, dtype=float)
    if len(t) < 5:
        raise ValueError("need at least five samples")
    uniform = sigma is None
    s = np.ones_like(y) if uniform else np.broadcast_to(np.asarray(sigma, dtype=float), y.shape)
    sign = np.sign(y[0])
    if sign == 0:
        raise SignError("initial temperature difference is zero")
    # start from a log-linear fit on the clearly non-zero points
    good = sign * y > 3 * s if not uniform else sign * y > 0.2 * abs(y[0])
    if good.sum() < 2:
        good = sign * y > 0
    p = np.polyfit(t[good], np.log(sign * y[good]), 1, w=(sign * y[good]) / s[good])
    p0 = (sign * math.exp(p[1]), max(-p[0], 1e-12))
    try:
        popt, pcov = curve_fit(_exp, t, y, p0=p0, sigma=s, absolute_sigma=not uniform,
                               ftol=1e-15, xtol=1e-15, gtol=1e-15, maxfev=20000)
    except RuntimeError as exc:
        raise RuntimeError(f"exponential fit did not converge: {exc}") from None
    amp, rate = popt
    if not rate > 0:
        raise RuntimeError("fitted relaxation rate is not positive")
    resid = (y - _exp(t, *popt)) / s
    chi2 = float(resid @ resid)
    dof = max(len(t) - 2, 1)
    noise = s if not uniform else np.full_like(y, math.sqrt(chi2 / dof))
    if np.any(sign * y < -4 * noise - 1e-300):
        raise SignError("temperature difference changes sign beyond noise")
    var = pcov[1, 1]
    if not np.isfinite(var):
        var = 0.0
    tau = 1.0 / rate
    return FitResult(tau, tau * tau * math.sqrt(var) if var > 0 else 0.0, 0.0, chi2, dof,
                     True, uniform, {"amplitude": amp})


# -- rate model -------------------------------------------------------------------------


def _sth_matrix(T, iso: Isotope):
    """Quadrature nodes for ``Gamma_rel/n_bar`` at every temperature."""
    x, w = _nodes()
    T = np.asarray(T, dtype=float)[:, None]
    k = np.sqrt(2 * iso.reduced_mass * CONST.k_B * T * x) / CONST.hbar
    weight = w * x * np.exp(-x) * (KERNEL_A * x * x + KERNEL_B * x)
    vbar = mean_relative_speed(T[:, 0], iso)
    return k, 0.25 * vbar[:, None] * weight


def rate_over_density_model(a: float, T, c6: float, iso: Isotope,
                            sigma_factory: Callable[[float], CrossSectionModel] | None = None,
                            _cache=None) -> np.ndarray:
    """Predicted ``Gamma_rel/n_bar`` (m^3/s) for scattering length ``a``.

    Defaults to the effective-range cross section with ``r_e`` derived from
    ``(a, c6)``; ``sigma_factory`` substitutes any other model of ``a``.
    """
    T = np.atleast_1d(np.asarray(T, dtype=float))
    if sigma_factory is not None:
        model = sigma_factory(a)
        return np.array([0.25 * sth_avg_sigma_v(model, t, iso) for t in T])
    k, wt = _cache if _cache is not None else _sth_matrix(T, iso)
    re = effective_range(a, c6, iso)
    k2 = k * k
    b = 0.5 * k2 * re * a - 1.0
    sigma = 8 * np.pi * a * a / (k2 * a * a + b * b)
    return np.sum(wt * sigma, axis=1)


def _unpack(points):
    T = np.array([p.T for p in points])
    y = np.array([p.rate_over_density for p in points])
    s = np.array([p.stat_err for p in points])
    uniform = bool(np.any(s <= 0))
    if uniform:
        s = np.ones_like(y) * np.mean(y)
    return T, y, s, uniform


def _chi2_fn(T, y, s, c6, iso, sigma_factory, density_scale):
    cache = None if sigma_factory is not None else _sth_matrix(T, iso)
    y = y / density_scale

    def chi2(a):
        r = (y - rate_over_density_model(a, T, c6, iso, sigma_factory, cache)) / s
        return float(r @ r)

    return chi2


def _fit_branch(chi2, sign: int, uniform: bool, n: int) -> FitResult:
    a0 = CONST.a0
    lo, hi = math.log(A_MIN_A0), math.log(A_MAX_A0)
    f = lambda la: chi2(sign * math.exp(la) * a0)  # noqa: E731
    grid = np.linspace(lo, hi, SCAN_POINTS)
    vals = np.array([f(g) for g in grid])
    i = int(np.argmin(vals))
    edge = i == 0 or i == len(grid) - 1
    lo_b, hi_b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = minimize_scalar(f, bounds=(lo_b, hi_b), method="bounded", options={"xatol": 1e-10})
    la, c_min = (res.x, res.fun) if res.fun <= vals[i] else (grid[i], vals[i])
    a = sign * math.exp(la) * a0
    edge = edge and (abs(la - lo) < 1e-6 or abs(la - hi) < 1e-6)
    dof = max(n - 1, 1)
    scale = math.sqrt(c_min / dof) if uniform else 1.0
    target = c_min + scale**2
    # 1-sigma half width from chi2 = chi2_min + 1 on each side, in |a|
    g = lambda la_: f(la_) - target  # noqa: E731
    widths = []
    bounds = [None, None]
    for slot, direction in enumerate((-1, 1)):
        step, probe = 1e-3, la
        while True:
            probe = la + direction * step
            if probe < lo or probe > hi:
                probe = None
                break
            if g(probe) > 0:
                break
            step *= 2
        if probe is not None:
            root = brentq(g, min(la, probe), max(la, probe), xtol=1e-12)
            widths.append(abs(math.exp(root) - math.exp(la)) * a0)
            bounds[slot] = sign * math.exp(root) * a0
    err = float(np.mean(widths)) if widths else float("inf")
    interval = (min(b for b in bounds if b is not None), max(b for b in bounds if b is not None)) \
        if None not in bounds else (-math.inf, math.inf)
    fit = FitResult(a, err, 0.0, c_min, dof, not edge, uniform)
    fit.interval = interval
    return fit


def fit_scattering_length(points, c6: float, iso: Isotope, sign: str = "free",
                          sigma_factory: Callable[[float], CrossSectionModel] | None = None,
                          density_scale: float = 1.0, strict: bool = True) -> FitResult:
    """Fit ``a`` (m) on one sign branch or both (``sign`` in {'+', '-', 'free'}).

    The minimum is bracketed on a logarithmic grid of ``|a|`` in
    [1, 2000] a0 and refined by bounded Brent minimisation.  ``density_scale``
    multiplies every density (the data rates are divided by it).
    With ``strict``, a minimum at the bracket edge raises
    :class:`BranchEmptyError`.
    """
    points = list(points)
    if len(points) < 3:
        raise ValueError("need at least three points")
    if sign not in ("+", "-", "free"):
        raise ValueError("sign must be '+', '-' or 'free'")
    T, y, s, uniform = _unpack(points)
    chi2 = _chi2_fn(T, y, s, c6, iso, sigma_factory, density_scale)
    branches = {"+": [1], "-": [-1], "free": [1, -1]}[sign]
    fits = [_fit_branch(chi2, b, uniform, len(points)) for b in branches]
    if sign == "free":
        ok = [f for f in fits if f.converged] or fits
        best = min(ok, key=lambda f: f.chi2)
    else:
        best = fits[0]
        if strict and not best.converged:
            raise BranchEmptyError(f"no interior minimum for sign {sign}")
    interval = best.interval
    best.context = {"interval": interval, "points": points, "c6": c6, "iso": iso, "sign": sign,
                    "sigma_factory": sigma_factory, "density_scale": density_scale}
    return best


def discriminate_sign(points, c6: float, iso: Isotope, threshold: float = DEFAULT_THRESHOLD,
                      sigma_factory=None, min_decades: float = 1.5) -> SignReport:
    """Fit both branches and compare chi-square minima.

    ``positive`` when ``chi2_neg/chi2_pos > threshold`` and the positive fit
    converged, ``negative`` for the mirrored condition, else ``inconclusive``.
    """
    points = list(points)
    T = np.array([p.T for p in points])
    span = math.log10(T.max() / T.min())
    if span < min_decades:
        warnings.warn(f"temperatures span {span:.2f} decades; sign discrimination needs {min_decades}",
                      NarrowRangeWarning, stacklevel=2)
    pos = fit_scattering_length(points, c6, iso, "+", sigma_factory, strict=False)
    neg = fit_scattering_length(points, c6, iso, "-", sigma_factory, strict=False)
    tiny = 1e-300
    ratio = (neg.chi2 + tiny) / (pos.chi2 + tiny)
    if ratio > threshold and pos.converged:
        verdict = "positive"
    elif 1.0 / ratio > threshold and neg.converged:
        verdict = "negative"
    else:
        verdict = "inconclusive"
    return SignReport(pos, neg, ratio, verdict, threshold)


def propagate_systematics(fit: FitResult, density_frac_err: float = 0.20) -> FitResult:
    """Add the density systematic: refit with ``n_bar * (1 +- err)``, half the spread."""
    if density_frac_err < 0:
        raise ValueError("density error must be non-negative")
    if density_frac_err == 0:
        return replace(fit, sys_err=0.0)
    ctx = fit.context
    if not ctx:
        raise ValueError("fit carries no data to refit")
    sign = "+" if fit.value > 0 else "-"
    vals = []
    for f in (1 + density_frac_err, 1 - density_frac_err):
        r = fit_scattering_length(ctx["points"], ctx["c6"], ctx["iso"], sign, ctx["sigma_factory"],
                                  ctx["density_scale"] * f, strict=False)
        vals.append(r.value)
    sys_err = 0.5 * abs(vals[0] - vals[1])
    return replace(fit, sys_err=sys_err)


# -- synthetic data and Monte Carlo studies ------------------------------------------


def synthetic_points(a: float, T, c6: float, iso: Isotope, noise: float = 0.0,
                     rng: np.random.Generator | None = None, sigma_factory=None):
    """Points on the model curve with Gaussian relative noise ``noise``.

    The reported error of each point is ``noise`` times the true rate (uniform
    weights when ``noise`` is zero).
    """
    T = np.asarray(T, dtype=float)
    y = rate_over_density_model(a, T, c6, iso, sigma_factory)
    if noise > 0:
        rng = rng or np.random.default_rng()
        y_obs = y * (1 + noise * rng.standard_normal(len(y)))
        y_obs = np.maximum(y_obs, 1e-3 * y)
        err = noise * y
    else:
        y_obs, err = y, np.zeros_like(y)
    return [ThermalizationPoint(float(t), float(v), float(e)) for t, v, e in zip(T, y_obs, err)]


def coverage_study(a: float, T, c6: float, iso: Isotope, noise: float = 0.05,
                   n_real: int = 500, seed: int = 0, sign: str = "+") -> dict:
    """Fraction of realizations whose 1-sigma interval contains the true ``a``.

    The interval is where ``chi2 <= chi2_min + 1``, which may be asymmetric.
    """
    ss = np.random.SeedSequence(seed)
    hits = 0
    pulls = []
    for child in ss.spawn(n_real):
        rng = np.random.default_rng(child)
        pts = synthetic_points(a, T, c6, iso, noise, rng)
        fit = fit_scattering_length(pts, c6, iso, sign, strict=False)
        lo, hi = fit.context["interval"]
        pulls.append((fit.value - a) / fit.stat_err)
        hits += lo <= a <= hi
    return {"coverage": hits / n_real, "pulls": np.array(pulls), "n": n_real}


def sign_study(a: float, T, c6: float, iso: Isotope, noise: float = 0.10,
               n_real: int = 100, seed: int = 0, threshold: float = DEFAULT_THRESHOLD) -> dict:
    """Verdict counts over noise realizations."""
    ss = np.random.SeedSequence(seed)
    counts = {"positive": 0, "negative": 0, "inconclusive": 0}
    ratios = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NarrowRangeWarning)
        for child in ss.spawn(n_real):
            rng = np.random.default_rng(child)
            rep = discriminate_sign(synthetic_points(a, T, c6, iso, noise, rng), c6, iso, threshold)
            counts[rep.verdict] += 1
            ratios.append(rep.chi2_ratio)
    return {"counts": counts, "ratios": np.array(ratios)}


# -- CSV -----------------------------------------------------------------------------

POINT_COLUMNS = ("T_K", "rate_over_density_m3s", "stat_err_m3s")


def points_to_csv(points, path, manifest=None) -> None:
    from .io import write_csv

    write_csv(path, POINT_COLUMNS, ((p.T, p.rate_over_density, p.stat_err) for p in points), manifest)


def points_from_csv(path):
    from .io import InputDataError, read_csv

    c, _ = read_csv(path, required=POINT_COLUMNS)
    try:
        return [ThermalizationPoint(*row) for row in zip(*(c[k].tolist() for k in POINT_COLUMNS))]
    except ValueError as exc:
        raise InputDataError(str(exc)) from None
