"""Time the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--n-test 100000] [--repeat 3]
"""
import argparse
import math
import time

import numpy as np

from crscat import _kernels_py
from crscat.dsmc import DsmcConfig, Scenario, _Stepper, initialize
from crscat.kinetics import ConstantCrossSection, TrapConfig
from crscat.units import CONST

try:
    from crscat import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(mod, n_test):
    trap = TrapConfig.from_hz(207, 207, 72.6)
    sigma = ConstantCrossSection(8 * math.pi * (170 * CONST.a0) ** 2)
    sc = Scenario(trap, 3e6, 42e-6, 42e-6, 1.0, (0.0,))
    cfg = DsmcConfig(n_test=n_test, seed=0, sigma_model=sigma)
    ens = initialize(sc, cfg)
    st = _Stepper(ens, cfg, 42e-6)
    pos, vel = ens.positions.copy(), ens.velocities.copy()
    lo, hi = pos.min(axis=0), pos.max(axis=0)
    h = float(np.min(pos.std(axis=0))) / 5
    dims = ((hi - lo) / h).astype(np.int64) + 1
    order, starts = mod.bin_cells(pos, lo, 1 / h, dims)
    dt = 0.02 / trap.omega.max()
    cand = ens.weight * dt / (2 * h**3)

    x = np.linspace(0.1, 50.0, 200_000)
    w = -(1 + 1 / x)

    def numerov():
        u = np.zeros_like(x)
        u[1] = 1e-8
        mod.numerov_fill(w, u, (x[1] - x[0]) ** 2)

    def collide():
        v = vel.copy()
        alive = np.ones(len(v), dtype=np.uint8)
        mod.ntc_collide(v, order, starts, st.kind, st.params, st.table, st.k_per_v, st.sv_max,
                        cand, 0.0, np.random.Generator(np.random.PCG64(1)), alive)

    return {
        "numerov_fill (2e5 points)": numerov,
        f"drift ({n_test} particles)": lambda: mod.drift(pos.copy(), vel.copy(), trap.omega, dt),
        f"bin_cells ({n_test} particles)": lambda: mod.bin_cells(pos, lo, 1 / h, dims),
        f"ntc_collide ({n_test} particles)": collide,
    }


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n-test", type=int, default=100_000)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    py = cases(_kernels_py, args.n_test)
    cy = cases(_compiled, args.n_test) if _compiled is not None else {}
    print(f"{'kernel':34s} {'python (s)':>12s} {'compiled (s)':>13s} {'speed-up':>9s}")
    for name, fn in py.items():
        t_py = best_of(fn, args.repeat)
        if name in cy:
            t_cy = best_of(cy[name], args.repeat)
            print(f"{name:34s} {t_py:12.4g} {t_cy:13.4g} {t_py / t_cy:9.1f}")
        else:
            print(f"{name:34s} {t_py:12.4g} {'n/a':>13s} {'':>9s}")


if __name__ == "__main__":
    main()
