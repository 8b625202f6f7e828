"""Pure-Python implementations of the hot loops.

Semantics match ``_kernels.pyx`` line for line; the compiled module is
preferred at import time and this one is the fallback.
"""
from __future__ import annotations

import math

import numpy as np

BACKEND = "python"

_BIG = 1e250


def numerov_fill(w, u, h2):
    """Fill ``u[2:]`` by the Numerov recursion for ``u'' = w u``.

    ``u[0]`` and ``u[1]`` must be set.  If the solution grows past 1e250 the
    whole prefix is rescaled, so only ratios are meaningful.
    """
    n = len(w)
    c = h2 / 12.0
    w = w.tolist()
    uu = u.tolist()
    fm = 1.0 - c * w[0]
    f0 = 1.0 - c * w[1]
    um, u0 = uu[0], uu[1]
    for i in range(1, n - 1):
        fp = 1.0 - c * w[i + 1]
        up = ((12.0 - 10.0 * f0) * u0 - fm * um) / fp
        if abs(up) > _BIG:
            for j in range(i + 1):
                uu[j] /= _BIG
            u0 /= _BIG
            up /= _BIG
        uu[i + 1] = up
        um, u0 = u0, up
        fm, f0 = f0, fp
    u[:] = uu


def cell_sort(cell, n_cells):
    """Stable counting sort of particle indices by cell index.

    Returns ``(order, starts)`` with ``starts`` of length ``n_cells + 1``.
    """
    order = np.argsort(cell, kind="stable")
    counts = np.bincount(cell, minlength=n_cells)
    starts = np.zeros(n_cells + 1, dtype=np.int64)
    np.cumsum(counts, out=starts[1:])
    return order.astype(np.int64), starts


def drift(pos, vel, omega, dt):
    """Exact harmonic motion in place; returns per-axis (min, max, sum x^2)."""
    omega = np.asarray(omega, dtype=float)
    c = np.cos(omega * dt)
    sw = np.sin(omega * dt) / omega
    ws = omega * np.sin(omega * dt)
    x_new = pos * c + vel * sw
    vel *= c
    vel -= pos * ws
    pos[:] = x_new
    return pos.min(axis=0), pos.max(axis=0), np.sum(pos * pos, axis=0)


def bin_cells(pos, lo, inv_h, dims):
    """Counting sort of particles into a cubic cell grid anchored at ``lo``."""
    idx = ((pos - np.asarray(lo)) * inv_h).astype(np.int64)
    cell = (idx[:, 0] * dims[1] + idx[:, 1]) * dims[2] + idx[:, 2]
    return cell_sort(cell, int(dims[0]) * int(dims[1]) * int(dims[2]))


def sigma_of_k(kind, params, table, k):
    if kind == 0:
        return params[0]
    if kind == 1:
        a, re = params[0], params[1]
        k2 = k * k
        b = 0.5 * k2 * re * a - 1.0
        return 8.0 * math.pi * a * a / (k2 * a * a + b * b)
    if kind == 2:
        return 8.0 * math.pi / (k * k)
    # kind 3: uniform table in k, linear interpolation, clamped at both ends
    k0, dk = params[0], params[1]
    x = (k - k0) / dk
    n = len(table)
    if x <= 0.0:
        return table[0]
    if x >= n - 1:
        return table[n - 1]
    i = int(x)
    f = x - i
    return table[i] * (1.0 - f) + table[i + 1] * f


def ntc_collide(vel, order, starts, kind, params, table, k_per_v,
                sv_max, cand_factor, loss_factor, rng, alive):
    """No-time-counter collisions and two-body pair loss on a cell grid.

    ``cand_factor`` is ``w dt / (2 V_cell)`` and ``loss_factor`` is
    ``beta w dt / (2 V_cell)``; both multiply ``N_c (N_c - 1)``.  Random
    numbers are drawn in a fixed order so both backends agree.
    Returns ``(n_collisions, n_candidates, max_sv)``.
    """
    counts = np.diff(starts)
    eligible = np.flatnonzero(counts >= 2)
    nc = counts[eligible].astype(float)
    expected = nc * (nc - 1.0) * cand_factor * sv_max
    draws = rng.random(len(eligible))
    n_cand = np.floor(expected).astype(np.int64) + (draws < expected - np.floor(expected))
    table = table.tolist() if kind == 3 else table
    params = [float(p) for p in params]
    two_pi = 2.0 * math.pi
    n_coll = 0
    total_cand = 0
    max_sv = 0.0
    for c_idx, m in zip(eligible.tolist(), n_cand.tolist()):
        if m == 0:
            continue
        s = int(starts[c_idx])
        ncell = int(starts[c_idx + 1]) - s
        total_cand += m
        for _ in range(m):
            i = int(rng.random() * ncell)
            j = int(rng.random() * (ncell - 1))
            if j >= i:
                j += 1
            pi = order[s + i]
            pj = order[s + j]
            vi = vel[pi]
            vj = vel[pj]
            gx = vi[0] - vj[0]
            gy = vi[1] - vj[1]
            gz = vi[2] - vj[2]
            g = math.sqrt(gx * gx + gy * gy + gz * gz)
            if g == 0.0:
                rng.random()
                continue
            sv = sigma_of_k(kind, params, table, g * k_per_v) * g
            if sv > max_sv:
                max_sv = sv
            ratio = sv / sv_max
            events = int(ratio)
            if rng.random() < ratio - events:
                events += 1
            if events == 0:
                continue
            n_coll += events
            cos_t = 2.0 * rng.random() - 1.0
            sin_t = math.sqrt(max(0.0, 1.0 - cos_t * cos_t))
            phi = two_pi * rng.random()
            cmx = 0.5 * (vi[0] + vj[0])
            cmy = 0.5 * (vi[1] + vj[1])
            cmz = 0.5 * (vi[2] + vj[2])
            hx = 0.5 * g * sin_t * math.cos(phi)
            hy = 0.5 * g * sin_t * math.sin(phi)
            hz = 0.5 * g * cos_t
            vel[pi, 0] = cmx + hx
            vel[pi, 1] = cmy + hy
            vel[pi, 2] = cmz + hz
            vel[pj, 0] = cmx - hx
            vel[pj, 1] = cmy - hy
            vel[pj, 2] = cmz - hz
    if loss_factor > 0.0:
        expected = nc * (nc - 1.0) * loss_factor
        draws = rng.random(len(eligible))
        n_loss = np.floor(expected).astype(np.int64) + (draws < expected - np.floor(expected))
        for c_idx, m in zip(eligible.tolist(), n_loss.tolist()):
            if m == 0:
                continue
            s = int(starts[c_idx])
            ncell = int(starts[c_idx + 1]) - s
            for _ in range(m):
                i = int(rng.random() * ncell)
                j = int(rng.random() * (ncell - 1))
                if j >= i:
                    j += 1
                pi = order[s + i]
                pj = order[s + j]
                if alive[pi] and alive[pj]:
                    alive[pi] = 0
                    alive[pj] = 0
    return n_coll, total_cand, max_sv
