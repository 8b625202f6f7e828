# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: Numerov recursion and the DSMC collision step.

Semantics (including the order of random draws) match ``_kernels_py``.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, floor, cos, sin, M_PI
from libc.stdint cimport int64_t
from cpython.pycapsule cimport PyCapsule_GetPointer
from numpy.random cimport bitgen_t

cnp.import_array()

BACKEND = "cython"

cdef double _BIG = 1e250


def numerov_fill(const double[::1] w, double[::1] u, double h2):
    cdef Py_ssize_t n = w.shape[0], i, j
    cdef double c = h2 / 12.0
    cdef double fm, f0, fp, um, u0, up
    with nogil:
        fm = 1.0 - c * w[0]
        f0 = 1.0 - c * w[1]
        um = u[0]
        u0 = u[1]
        for i in range(1, n - 1):
            fp = 1.0 - c * w[i + 1]
            up = ((12.0 - 10.0 * f0) * u0 - fm * um) / fp
            if fabs(up) > _BIG:
                for j in range(i + 1):
                    u[j] = u[j] / _BIG
                u0 = u0 / _BIG
                up = up / _BIG
            u[i + 1] = up
            um = u0
            u0 = up
            fm = f0
            f0 = fp


def cell_sort(const int64_t[::1] cell, Py_ssize_t n_cells):
    cdef Py_ssize_t n = cell.shape[0], i
    starts_arr = np.zeros(n_cells + 1, dtype=np.int64)
    order_arr = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] starts = starts_arr
    cdef int64_t[::1] order = order_arr
    cdef int64_t[::1] fill = np.empty(n_cells, dtype=np.int64)
    with nogil:
        for i in range(n):
            starts[cell[i] + 1] += 1
        for i in range(n_cells):
            starts[i + 1] += starts[i]
            fill[i] = starts[i]
        for i in range(n):
            order[fill[cell[i]]] = i
            fill[cell[i]] += 1
    return order_arr, starts_arr


def drift(double[:, ::1] pos, double[:, ::1] vel, omega, double dt):
    """Exact harmonic motion in place; returns per-axis (min, max, sum x^2)."""
    cdef Py_ssize_t n = pos.shape[0], i, a
    cdef double c[3]
    cdef double sw[3]
    cdef double ws[3]
    cdef double lo[3]
    cdef double hi[3]
    cdef double sq[3]
    cdef double x, v, xn
    for a in range(3):
        w = float(omega[a])
        c[a] = cos(w * dt)
        sw[a] = sin(w * dt) / w
        ws[a] = w * sin(w * dt)
        lo[a] = 1e300
        hi[a] = -1e300
        sq[a] = 0.0
    with nogil:
        for i in range(n):
            for a in range(3):
                x = pos[i, a]
                v = vel[i, a]
                xn = x * c[a] + v * sw[a]
                vel[i, a] = v * c[a] - x * ws[a]
                pos[i, a] = xn
                if xn < lo[a]:
                    lo[a] = xn
                if xn > hi[a]:
                    hi[a] = xn
                sq[a] += xn * xn
    return (np.array([lo[0], lo[1], lo[2]]), np.array([hi[0], hi[1], hi[2]]),
            np.array([sq[0], sq[1], sq[2]]))


def bin_cells(const double[:, ::1] pos, lo, double inv_h, dims):
    """Counting sort of particles into a cubic cell grid anchored at ``lo``."""
    cdef Py_ssize_t n = pos.shape[0], i
    cdef double l0 = lo[0], l1 = lo[1], l2 = lo[2]
    cdef int64_t d1 = dims[1], d2 = dims[2]
    cdef Py_ssize_t n_cells = int(dims[0]) * d1 * d2
    cell_arr = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] cell = cell_arr
    with nogil:
        for i in range(n):
            cell[i] = ((<int64_t>((pos[i, 0] - l0) * inv_h)) * d1
                       + <int64_t>((pos[i, 1] - l1) * inv_h)) * d2 + <int64_t>((pos[i, 2] - l2) * inv_h)
    return cell_sort(cell_arr, n_cells)


cdef inline double _sigma(int kind, const double[::1] p, const double[::1] table,
                          double k) noexcept nogil:
    cdef double k2, b, x, f
    cdef Py_ssize_t n, i
    if kind == 0:
        return p[0]
    if kind == 1:
        k2 = k * k
        b = 0.5 * k2 * p[1] * p[0] - 1.0
        return 8.0 * M_PI * p[0] * p[0] / (k2 * p[0] * p[0] + b * b)
    if kind == 2:
        return 8.0 * M_PI / (k * k)
    x = (k - p[0]) / p[1]
    n = table.shape[0]
    if x <= 0.0:
        return table[0]
    if x >= n - 1:
        return table[n - 1]
    i = <Py_ssize_t>x
    f = x - i
    return table[i] * (1.0 - f) + table[i + 1] * f


def sigma_of_k(int kind, params, table, double k):
    p = np.ascontiguousarray(params, dtype=float)
    t = np.ascontiguousarray(table, dtype=float)
    return _sigma(kind, p, t, k)


def ntc_collide(double[:, ::1] vel, const int64_t[::1] order, const int64_t[::1] starts,
                int kind, params, table, double k_per_v, double sv_max,
                double cand_factor, double loss_factor, rng, cnp.uint8_t[::1] alive):
    cdef const double[::1] p = np.ascontiguousarray(params, dtype=float)
    cdef const double[::1] tab = np.ascontiguousarray(table, dtype=float)
    cdef Py_ssize_t n_cells = starts.shape[0] - 1
    cdef Py_ssize_t c, s, ncell, i, j, pi, pj, m, q, t
    cdef Py_ssize_t n_elig = 0
    cdef int64_t n_coll = 0, total_cand = 0, events
    cdef double expected, nc, g, gx, gy, gz, sv, ratio, max_sv = 0.0
    cdef double cos_t, sin_t, phi, cmx, cmy, cmz, hx, hy, hz
    cdef bitgen_t *bg
    bitgen = rng.bit_generator
    capsule = bitgen.capsule
    bg = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")
    for c in range(n_cells):
        if starts[c + 1] - starts[c] >= 2:
            n_elig += 1
    cdef int64_t[::1] ncand = np.zeros(n_elig, dtype=np.int64)
    cdef int64_t[::1] elig = np.zeros(n_elig, dtype=np.int64)
    with bitgen.lock, nogil:
        q = 0
        for c in range(n_cells):
            ncell = starts[c + 1] - starts[c]
            if ncell >= 2:
                nc = <double>ncell
                expected = nc * (nc - 1.0) * cand_factor * sv_max
                elig[q] = c
                ncand[q] = <int64_t>floor(expected)
                if bg.next_double(bg.state) < expected - floor(expected):
                    ncand[q] += 1
                q += 1
        for q in range(n_elig):
            m = ncand[q]
            if m == 0:
                continue
            c = elig[q]
            s = starts[c]
            ncell = starts[c + 1] - s
            total_cand += m
            for t in range(m):
                i = <Py_ssize_t>(bg.next_double(bg.state) * ncell)
                j = <Py_ssize_t>(bg.next_double(bg.state) * (ncell - 1))
                if j >= i:
                    j += 1
                pi = order[s + i]
                pj = order[s + j]
                gx = vel[pi, 0] - vel[pj, 0]
                gy = vel[pi, 1] - vel[pj, 1]
                gz = vel[pi, 2] - vel[pj, 2]
                g = sqrt(gx * gx + gy * gy + gz * gz)
                if g == 0.0:
                    bg.next_double(bg.state)
                    continue
                sv = _sigma(kind, p, tab, g * k_per_v) * g
                if sv > max_sv:
                    max_sv = sv
                ratio = sv / sv_max
                events = <int64_t>ratio
                if bg.next_double(bg.state) < ratio - events:
                    events += 1
                if events == 0:
                    continue
                n_coll += events
                cos_t = 2.0 * bg.next_double(bg.state) - 1.0
                sin_t = sqrt(max(0.0, 1.0 - cos_t * cos_t))
                phi = 2.0 * M_PI * bg.next_double(bg.state)
                cmx = 0.5 * (vel[pi, 0] + vel[pj, 0])
                cmy = 0.5 * (vel[pi, 1] + vel[pj, 1])
                cmz = 0.5 * (vel[pi, 2] + vel[pj, 2])
                hx = 0.5 * g * sin_t * cos(phi)
                hy = 0.5 * g * sin_t * sin(phi)
                hz = 0.5 * g * cos_t
                vel[pi, 0] = cmx + hx
                vel[pi, 1] = cmy + hy
                vel[pi, 2] = cmz + hz
                vel[pj, 0] = cmx - hx
                vel[pj, 1] = cmy - hy
                vel[pj, 2] = cmz - hz
        if loss_factor > 0.0:
            for q in range(n_elig):
                c = elig[q]
                nc = <double>(starts[c + 1] - starts[c])
                expected = nc * (nc - 1.0) * loss_factor
                ncand[q] = <int64_t>floor(expected)
                if bg.next_double(bg.state) < expected - floor(expected):
                    ncand[q] += 1
            for q in range(n_elig):
                m = ncand[q]
                if m == 0:
                    continue
                c = elig[q]
                s = starts[c]
                ncell = starts[c + 1] - s
                for t in range(m):
                    i = <Py_ssize_t>(bg.next_double(bg.state) * ncell)
                    j = <Py_ssize_t>(bg.next_double(bg.state) * (ncell - 1))
                    if j >= i:
                        j += 1
                    pi = order[s + i]
                    pj = order[s + j]
                    if alive[pi] and alive[pj]:
                        alive[pi] = 0
                        alive[pj] = 0
    return n_coll, total_cand, max_sv
