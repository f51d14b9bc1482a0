# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: projected-SOR color sweeps and pairwise r^-1 sums.

The numpy fallback in ``_kernels_np`` implements the same signatures.
"""

import numpy as np

cimport cython
from libc.math cimport fabs, sqrt


def psor_sweep(double[:, :, ::1] v, double[:, :, ::1] phi, double omega, int color):
    """One projected-SOR half sweep over nodes with (i+j+k) % 2 == color.

    Updates v in place on interior nodes; returns the max nodal update.
    Nodes of one color do not couple through the 7-point stencil, so the
    simultaneous update equals a sequential Gauss-Seidel pass.
    """
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t i, j, k, k0
    cdef int p
    cdef double s, cand, vnew, d, dmax = 0.0
    with nogil:
        for i in range(1, n - 1):
            for j in range(1, n - 1):
                p = (color - <int> i - <int> j) % 2
                if p < 0:
                    p += 2
                k0 = 2 - p
                for k in range(k0, n - 1, 2):
                    s = (v[i - 1, j, k] + v[i + 1, j, k]
                         + v[i, j - 1, k] + v[i, j + 1, k]
                         + v[i, j, k - 1] + v[i, j, k + 1])
                    cand = (1.0 - omega) * v[i, j, k] + omega * s / 6.0
                    vnew = cand if cand > phi[i, j, k] else phi[i, j, k]
                    d = fabs(vnew - v[i, j, k])
                    if d > dmax:
                        dmax = d
                    v[i, j, k] = vnew
    return dmax


def inv_r_sum(double[:, ::1] targets, double[:, ::1] sources,
              double[::1] charge, long[::1] skip):
    """out[a] = sum_b charge[b] / |t_a - s_b|, omitting b == skip[a]."""
    cdef Py_ssize_t m = targets.shape[0], nsrc = sources.shape[0]
    cdef Py_ssize_t a, b
    cdef double dx, dy, dz, acc
    out = np.zeros(m)
    cdef double[::1] o = out
    with nogil:
        for a in range(m):
            acc = 0.0
            for b in range(nsrc):
                if b == skip[a]:
                    continue
                dx = targets[a, 0] - sources[b, 0]
                dy = targets[a, 1] - sources[b, 1]
                dz = targets[a, 2] - sources[b, 2]
                acc += charge[b] / sqrt(dx * dx + dy * dy + dz * dz)
            o[a] = acc
    return out


def aniso_grad_inv_r_sum(double[:, ::1] targets, double[:, ::1] sources,
                         double[::1] charge, double vsq):
    """out[a] = sum_b charge[b] * grad_t (1 / R), R^2 = dx^2+dy^2+vsq*dz^2.

    Terms with R = 0 are skipped (the exact self-cell gradient integral
    vanishes at the cell center by symmetry).
    """
    cdef Py_ssize_t m = targets.shape[0], nsrc = sources.shape[0]
    cdef Py_ssize_t a, b
    cdef double dx, dy, dz, r2, w, gx, gy, gz
    out = np.zeros((m, 3))
    cdef double[:, ::1] o = out
    with nogil:
        for a in range(m):
            gx = gy = gz = 0.0
            for b in range(nsrc):
                dx = targets[a, 0] - sources[b, 0]
                dy = targets[a, 1] - sources[b, 1]
                dz = targets[a, 2] - sources[b, 2]
                r2 = dx * dx + dy * dy + vsq * dz * dz
                if r2 == 0.0:
                    continue
                w = charge[b] / (r2 * sqrt(r2))
                gx -= w * dx
                gy -= w * dy
                gz -= w * vsq * dz
            o[a, 0] = gx
            o[a, 1] = gy
            o[a, 2] = gz
    return out


def aniso_grad_z2_r3_sum(double[:, ::1] targets, double[:, ::1] sources,
                         double[::1] charge, double vsq):
    """out[a] = sum_b charge[b] * grad_t (dz^2 / R^3), same metric as above."""
    cdef Py_ssize_t m = targets.shape[0], nsrc = sources.shape[0]
    cdef Py_ssize_t a, b
    cdef double dx, dy, dz, r2, r3, r5, gx, gy, gz, c
    out = np.zeros((m, 3))
    cdef double[:, ::1] o = out
    with nogil:
        for a in range(m):
            gx = gy = gz = 0.0
            for b in range(nsrc):
                dx = targets[a, 0] - sources[b, 0]
                dy = targets[a, 1] - sources[b, 1]
                dz = targets[a, 2] - sources[b, 2]
                r2 = dx * dx + dy * dy + vsq * dz * dz
                if r2 == 0.0:
                    continue
                c = charge[b]
                r3 = r2 * sqrt(r2)
                r5 = r3 * r2
                gx -= 3.0 * c * dx * dz * dz / r5
                gy -= 3.0 * c * dy * dz * dz / r5
                gz += c * (2.0 * dz / r3 - 3.0 * vsq * dz * dz * dz / r5)
            o[a, 0] = gx
            o[a, 1] = gy
            o[a, 2] = gz
    return out
