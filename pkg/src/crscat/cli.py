"""Command-line interface.

Every subcommand prints ``key = value`` lines and can write its result to a
file (``--out``), which is accompanied by a ``.manifest.json`` sidecar.

Exit status: 0 success, 2 usage error, 3 bad input data, 4 numerical
non-convergence.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .io import InputDataError, RunManifest, format_value, write_csv, write_kv, write_manifest
from .units import CONST, DimensionError, isotope, parse_quantity

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_NUMERIC = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *a, **kw):
        super().__init__(*a, **kw)
        # let "-220a0" through as a value rather than an option
        self._negative_number_matcher = re.compile(r"^-(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?[A-Za-z]\w*$|^-\d+$|^-\d*\.\d+$")

    def error(self, message):
        raise UsageError(message)


# -- argument helpers -------------------------------------------------------------


def _q(dimension: str, example: str):
    """Argument type for a quantity; the unit suffix is mandatory."""

    def parse(text):
        try:
            float(text)
        except ValueError:
            pass
        else:
            raise argparse.ArgumentTypeError(f"{text!r} has no unit (write e.g. {example})")
        try:
            return parse_quantity(text, dimension)
        except (ValueError, KeyError) as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None

    parse.__name__ = dimension
    return parse


def _iso(text):
    try:
        return isotope(text)
    except KeyError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _emit(record: dict, out: str | None, manifest: RunManifest, json_path: str | None = None) -> None:
    for k, v in record.items():
        print(f"{k} = {format_value(v)}")
    if out:
        write_kv(out, record, manifest)
    if json_path:
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump({k: (v.item() if isinstance(v, np.generic) else v) for k, v in record.items()},
                      fh, indent=2, sort_keys=True)
            fh.write("\n")
        write_manifest(json_path, manifest)


def _manifest(args, inputs=()) -> RunManifest:
    params = {k: v for k, v in vars(args).items() if k not in ("func", "command") and v is not None}
    params = {k: (v.label if hasattr(v, "label") else v) for k, v in params.items()}
    return RunManifest(args.command, [str(p) for p in inputs], params, getattr(args, "seed", None), __version__)


def _temperatures(args):
    if args.T:
        return np.array(args.T, dtype=float)
    return np.geomspace(args.T_min, args.T_max, args.n_T)


def _model_from_args(args, iso):
    from .ert import ert_model
    from .kinetics import (ConstantCrossSection, EffectiveRangeCrossSection, NumericCrossSection,
                           UnitarityCrossSection)
    from .scattering import PhaseShiftTable

    if args.model == "constant":
        if args.sigma0 is None:
            raise UsageError("--sigma0 is required for the constant model")
        return ConstantCrossSection(args.sigma0)
    if args.model == "unitarity":
        return UnitarityCrossSection()
    if args.model == "ert":
        if args.a is None:
            raise UsageError("--a is required for the ert model")
        return EffectiveRangeCrossSection(ert_model(args.a, args.c6, iso))
    if args.table is None:
        raise UsageError("--table is required for the numeric model")
    return NumericCrossSection.from_table(PhaseShiftTable.from_csv(args.table, iso))


# -- subcommands -------------------------------------------------------------------


def cmd_ert(args):
    from .ert import effective_range, mean_scattering_length, sigma_ert, ert_model

    iso = args.isotope
    r_e = effective_range(args.a, args.c6, iso)
    rec = {
        "isotope": iso.label,
        "a_a0": args.a / CONST.a0,
        "c6_au": args.c6 / CONST.c6_au,
        "abar_a0": mean_scattering_length(args.c6, iso) / CONST.a0,
        "r_e_a0": r_e / CONST.a0,
    }
    if args.k is not None:
        rec["k_inv_m"] = args.k
        rec["sigma_m2"] = float(sigma_ert(args.k, ert_model(args.a, args.c6, iso)))
    _emit(rec, args.out, _manifest(args))


def cmd_solve(args):
    from .io import load_potential
    from .potential import build_morse_vdw
    from .scattering import energy_grid, phase_shift_table, summarize

    pf = load_potential(args.potential)
    pot = build_morse_vdw(pf.params)
    iso = args.isotope
    summ = summarize(pot, iso)
    rec = {"isotope": iso.label, "a_a0": summ.a / CONST.a0, "n_bound": summ.n_bound}
    if args.out:
        E = energy_grid(args.T_min, args.T_max, args.per_decade)
        table = phase_shift_table(pot, iso, E)
        man = _manifest(args, [args.potential])
        table.metadata = man.to_dict()
        table.to_csv(args.out)
        rec["table"] = args.out
        rec["n_energies"] = len(E)
    for k, v in rec.items():
        print(f"{k} = {format_value(v)}")


def cmd_tune(args):
    from .io import load_potential, save_potential
    from .potential import DEFAULT_TEMPLATE
    from .scattering import scattering_length, tune_to_scattering_length
    from .figures import default_n_bound

    template = load_potential(args.template).params if args.template else DEFAULT_TEMPLATE
    iso = args.isotope
    nb = args.n_bound if args.n_bound is not None else default_n_bound(iso, template)
    model = tune_to_scattering_length(template, args.a, iso, nb)
    a = scattering_length(model, iso)
    rec = {
        "isotope": iso.label, "n_bound": nb, "a_a0": a / CONST.a0,
        "depth_K": model.depth / CONST.k_B, "r_join_a0": model.r_join / CONST.a0,
    }
    for k, v in rec.items():
        print(f"{k} = {format_value(v)}")
    if args.out:
        save_potential(args.out, model.params, _manifest(args, [args.template] if args.template else []))


def cmd_kinetics(args):
    from .kinetics import (TrapConfig, effective_cross_section, mean_density, relaxation_rate,
                           sth_avg_sigma_v, thermal_avg_sigma_v)

    iso = args.isotope
    model = _model_from_args(args, iso)
    T = _temperatures(args)
    header = ["T_K", "sigma_v_th_m3s", "sigma_v_sth_m3s", "rate_over_density_m3s"]
    rows = []
    trap = TrapConfig.from_hz(*args.trap) if args.N is not None else None
    if trap is not None:
        header += ["nbar_m3", "gamma_coll_s", "gamma_rel_s", "sigma_eff_m2"]
    for t in T:
        th = thermal_avg_sigma_v(model, t, iso)
        sth = sth_avg_sigma_v(model, t, iso)
        row = [t, th, sth, 0.25 * sth]
        if trap is not None:
            n = mean_density(args.N, t, t, t, trap, iso)
            rb = relaxation_rate(n, model, t, iso)
            row += [n, rb.gamma_coll, rb.gamma_rel, effective_cross_section(rb.gamma_rel, n, t, iso)]
        rows.append(row)
    if args.out:
        write_csv(args.out, header, rows, _manifest(args, [args.table] if args.table else []))
    else:
        print(",".join(header))
        for r in rows:
            print(",".join(format_value(x) for x in r))


def cmd_simulate(args):
    from dataclasses import replace

    from .dsmc import run_scenario, scenario_from_record
    from .io import read_kv

    rec = read_kv(args.scenario)
    scenario, config = scenario_from_record(rec, Path(args.scenario).parent)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.n_test is not None:
        config = replace(config, n_test=args.n_test)
    series = run_scenario(scenario, config)
    man = _manifest(args, [args.scenario])
    man.seed = config.seed
    man.parameters.update({"scenario": {k: v for k, v in rec.items()}})
    series.to_csv(args.out, man)
    print(f"rows = {len(series.t)}")
    print(f"out = {args.out}")


def cmd_rescale(args):
    from .analysis import rescale_time
    from .dsmc import RelaxationSeries

    s = rescale_time(RelaxationSeries.from_csv(args.data))
    s.to_csv(args.out, _manifest(args, [args.data]))
    print(f"tstar_end_s = {format_value(float(s.t_star[-1]))}")


def cmd_fit_tau(args):
    from .analysis import fit_relaxation_time, rescale_time
    from .dsmc import RelaxationSeries

    s = RelaxationSeries.from_csv(args.data)
    if args.rescale:
        s = rescale_time(s)
    fit = fit_relaxation_time(s, sigma=args.sigma, use_rescaled=not args.raw)
    rec = {"tau_rel_s": fit.value, **{k: v for k, v in fit.to_record("s").items() if k != "value"}}
    rec["gamma_rel_s"] = 1.0 / fit.value
    rec["rate_over_density_m3s"] = 1.0 / (fit.value * float(s.n_bar[0]))
    rec["nbar0_m3"] = float(s.n_bar[0])
    rec["T_mean_K"] = float(np.mean(s.T_mean))
    _emit(rec, args.out, _manifest(args, [args.data]), args.json)


def _points(path):
    from .analysis import points_from_csv

    return points_from_csv(path)


def cmd_fit_a(args):
    from .analysis import fit_scattering_length, propagate_systematics

    pts = _points(args.data)
    sign = {"positive": "+", "negative": "-", "pos": "+", "neg": "-"}.get(args.sign, args.sign)
    factory = _numeric_factory(args.isotope) if args.sigma_model == "numeric" else None
    fit = fit_scattering_length(pts, args.c6, args.isotope, sign, factory)
    fit = propagate_systematics(fit, args.density_err)
    rec = {"a_a0": fit.value / CONST.a0, "stat_err_a0": fit.stat_err / CONST.a0,
           "sys_err_a0": fit.sys_err / CONST.a0, "total_err_a0": fit.total_err / CONST.a0,
           "chi2": fit.chi2, "dof": fit.dof, "converged": fit.converged,
           "uniform_weights": fit.uniform_weights, "sigma_model": args.sigma_model}
    _emit(rec, args.out, _manifest(args, [args.data]), args.json)


def _numeric_factory(iso):
    from .figures import numeric_cross_section

    cache = {}

    def factory(a):
        key = round(a / CONST.a0, 6)
        if key not in cache:
            cache[key] = numeric_cross_section(a, iso)
        return cache[key]

    return factory


def cmd_discriminate(args):
    from .analysis import discriminate_sign

    rep = discriminate_sign(_points(args.data), args.c6, args.isotope, args.threshold)
    _emit(rep.to_record(), args.out, _manifest(args, [args.data]), args.json)


def cmd_mass_scale(args):
    from .io import load_potential
    from .potential import DEFAULT_TEMPLATE, build_morse_vdw
    from .scattering import mass_scale_predict
    from .figures import tuned_potential

    if args.potential:
        model = build_morse_vdw(load_potential(args.potential).params)
    else:
        if args.a is None:
            raise UsageError("give --potential or --a")
        model = tuned_potential(args.a, args.iso_from, template=DEFAULT_TEMPLATE)
    res = mass_scale_predict(model, args.iso_from, args.iso_to, range(args.nb_min, args.nb_max + 1))
    rows = [(n, a / CONST.a0 if a is not None else np.nan, d / CONST.k_B if d is not None else np.nan)
            for n, a, d, _ in res.candidates]
    print(f"a_from_a0 = {format_value(res.a_from / CONST.a0)}")
    print(f"n_candidates = {len(res.values)}")
    print(f"positive_fraction = {format_value(res.positive_fraction)}")
    if args.out:
        write_csv(args.out, ["n_bound", "a_to_a0", "depth_K"], rows,
                  _manifest(args, [args.potential] if args.potential else []))
    else:
        print("n_bound,a_to_a0,depth_K")
        for r in rows:
            print(",".join(format_value(x) for x in r))


def cmd_reproduce(args):
    from .figures import FIGURES

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = sorted(FIGURES) if args.figure == "all" else [args.figure]
    for name in names:
        header, data = FIGURES[name]()
        path = out_dir / f"{name}.csv"
        man = _manifest(args)
        man.parameters["figure"] = name
        write_csv(path, header, data.tolist(), man)
        print(f"{name} = {path}")


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="crscat", description="Ultracold s-wave scattering and rethermalization toolkit")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    length = _q("length", "170a0")
    c6 = _q("c6", "1050au")
    temp = _q("temperature", "42uK")

    def common(sp, out=True):
        sp.add_argument("--isotope", type=_iso, default=isotope("Cr-52"))
        if out:
            sp.add_argument("--out", default=None)

    def trange(sp):
        sp.add_argument("--T", type=temp, nargs="+", default=None, help="temperatures (e.g. 42uK)")
        sp.add_argument("--T-min", dest="T_min", type=temp, default=5e-6)
        sp.add_argument("--T-max", dest="T_max", type=temp, default=500e-6)
        sp.add_argument("--n-T", dest="n_T", type=int, default=30)

    sp = sub.add_parser("ert", help="effective range and ERT cross section")
    sp.add_argument("--a", type=length, required=True)
    sp.add_argument("--c6", type=c6, default=1050 * CONST.c6_au)
    sp.add_argument("--k", type=float, default=None, help="wavenumber (1/m) for sigma")
    common(sp)
    sp.set_defaults(func=cmd_ert)

    sp = sub.add_parser("solve", help="scattering length, bound states and phase-shift table")
    sp.add_argument("--potential", required=True)
    sp.add_argument("--T-min", dest="T_min", type=temp, default=1e-7)
    sp.add_argument("--T-max", dest="T_max", type=temp, default=2e-3)
    sp.add_argument("--per-decade", dest="per_decade", type=int, default=30)
    common(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("tune", help="tune the model depth to a scattering length")
    sp.add_argument("--a", type=length, required=True)
    sp.add_argument("--n-bound", dest="n_bound", type=int, default=None)
    sp.add_argument("--template", default=None)
    common(sp)
    sp.set_defaults(func=cmd_tune)

    sp = sub.add_parser("kinetics", help="thermal averages and relaxation rates")
    sp.add_argument("--model", choices=["constant", "ert", "unitarity", "numeric"], default="ert")
    sp.add_argument("--a", type=length, default=None)
    sp.add_argument("--c6", type=c6, default=1050 * CONST.c6_au)
    sp.add_argument("--sigma0", type=float, default=None, help="constant cross section (m^2)")
    sp.add_argument("--table", default=None, help="phase-shift table CSV for the numeric model")
    sp.add_argument("--N", type=float, default=None, help="atom number; adds trap-averaged rates")
    sp.add_argument("--trap", type=float, nargs=3, default=[207.0, 207.0, 72.6], metavar=("FX", "FY", "FZ"))
    trange(sp)
    common(sp)
    sp.set_defaults(func=cmd_kinetics)

    sp = sub.add_parser("simulate", help="run a DSMC scenario")
    sp.add_argument("--scenario", required=True)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--n-test", dest="n_test", type=int, default=None)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("rescale", help="recompute t* from the density column")
    sp.add_argument("--data", required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_rescale)

    sp = sub.add_parser("fit-tau", help="exponential fit of T_r - T_z")
    sp.add_argument("--data", required=True)
    sp.add_argument("--sigma", type=float, default=None, help="1-sigma error of T_r - T_z (K)")
    sp.add_argument("--raw", action="store_true", help="fit against t instead of t*")
    sp.add_argument("--rescale", action="store_true", help="recompute t* before fitting")
    sp.add_argument("--out", default=None)
    sp.add_argument("--json", default=None)
    sp.set_defaults(func=cmd_fit_tau)

    for name, func in (("fit-a", cmd_fit_a), ("discriminate", cmd_discriminate)):
        sp = sub.add_parser(name)
        sp.add_argument("--data", required=True)
        sp.add_argument("--c6", type=c6, default=1050 * CONST.c6_au)
        sp.add_argument("--json", default=None)
        common(sp)
        if name == "fit-a":
            sp.add_argument("--sign", choices=["+", "-", "free", "positive", "negative"], default="free")
            sp.add_argument("--density-err", dest="density_err", type=float, default=0.20)
            sp.add_argument("--sigma-model", dest="sigma_model", choices=["ert", "numeric"], default="ert")
        else:
            sp.add_argument("--threshold", type=float, default=3.0)
        sp.set_defaults(func=func)

    sp = sub.add_parser("mass-scale", help="predict the scattering length of another isotope")
    sp.add_argument("--potential", default=None)
    sp.add_argument("--a", type=length, default=None)
    sp.add_argument("--from", dest="iso_from", type=_iso, default=isotope("Cr-52"))
    sp.add_argument("--to", dest="iso_to", type=_iso, default=isotope("Cr-50"))
    sp.add_argument("--nb-min", dest="nb_min", type=int, default=20)
    sp.add_argument("--nb-max", dest="nb_max", type=int, default=40)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_mass_scale)

    sp = sub.add_parser("reproduce-figures", help="write theory curves as CSV")
    sp.add_argument("--figure", choices=["fig2", "fig3", "fig4", "all"], default="all")
    sp.add_argument("--out-dir", dest="out_dir", required=True)
    sp.set_defaults(func=cmd_reproduce)
    return p


def _fail(code: int, kind: str, exc) -> int:
    msg = " ".join(str(exc).split()) or type(exc).__name__
    print(f"error: {kind}: {msg}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    from .analysis import BranchEmptyError, SignError
    from .dsmc import FitFailure, StabilityError
    from .kinetics import QuadratureError
    from .potential import JointMismatchError
    from .scattering import ConvergenceError, NoSolutionError

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return _fail(EXIT_USAGE, "usage", exc)
    warnings.simplefilter("default")
    try:
        args.func(args)
    except UsageError as exc:
        return _fail(EXIT_USAGE, "usage", exc)
    except (ConvergenceError, NoSolutionError, BranchEmptyError, FitFailure, QuadratureError) as exc:
        return _fail(EXIT_NUMERIC, "nonconvergence", exc)
    except RuntimeError as exc:
        return _fail(EXIT_NUMERIC, "nonconvergence", exc)
    except (InputDataError, FileNotFoundError, IsADirectoryError, DimensionError, JointMismatchError,
            StabilityError, SignError, KeyError, ValueError) as exc:
        return _fail(EXIT_INPUT, "input", exc)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
