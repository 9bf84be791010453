# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled versions of the hot per-step kernels (see pyref.py for the
reference semantics)."""
import numpy as np

cimport numpy as cnp

cnp.import_array()


def weak_dx_impl(double[:, :, ::1] c, double[::1] phiL, double[::1] phiR,
                 double[:, ::1] stiff, int side, object bcl_obj, object bcr_obj):
    cdef Py_ssize_t n = c.shape[0]
    cdef Py_ssize_t m = c.shape[1]
    cdef Py_ssize_t nv = c.shape[2]
    cdef cnp.ndarray[cnp.float64_t, ndim=3] out_arr = np.empty((n, m, nv))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] f_arr = np.empty((n + 1, nv))
    cdef double[:, :, ::1] out = out_arr
    cdef double[:, ::1] F = f_arr
    cdef double[::1] bcl
    cdef double[::1] bcr
    cdef Py_ssize_t i, j, v, p
    cdef double acc

    # one-sided traces into the interface table
    if side > 0:
        for i in range(n):
            for v in range(nv):
                acc = 0.0
                for j in range(m):
                    acc += c[i, j, v] * phiL[j]
                F[i, v] = acc
        for v in range(nv):
            F[n, v] = F[0, v]
    else:
        for i in range(n):
            for v in range(nv):
                acc = 0.0
                for j in range(m):
                    acc += c[i, j, v] * phiR[j]
                F[i + 1, v] = acc
        for v in range(nv):
            F[0, v] = F[n, v]
    if bcl_obj is not None:
        bcl = bcl_obj
        for v in range(nv):
            F[0, v] = bcl[v]
    if bcr_obj is not None:
        bcr = bcr_obj
        for v in range(nv):
            F[n, v] = bcr[v]

    for i in range(n):
        for j in range(m):
            for v in range(nv):
                acc = F[i + 1, v] * phiR[j] - F[i, v] * phiL[j]
                out[i, j, v] = acc
        for p in range(m):
            for j in range(m):
                if stiff[p, j] != 0.0:
                    for v in range(nv):
                        out[i, j, v] -= c[i, p, v] * stiff[p, j]
    return out_arr


def relax_r_const_impl(double[:, :, ::1] rc, double[:, ::1] gain_t, double[::1] coef,
                       double b_gain, double tau_sq, double[::1] bmom, double[::1] maxw):
    cdef Py_ssize_t n = rc.shape[0]
    cdef Py_ssize_t m = rc.shape[1]
    cdef Py_ssize_t nv = rc.shape[2]
    cdef cnp.ndarray[cnp.float64_t, ndim=3] out_arr = np.empty((n, m, nv))
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t i, j, v, l
    cdef double rho, g
    for i in range(n):
        for j in range(m):
            rho = 0.0
            for l in range(nv):
                rho += rc[i, j, l] * bmom[l]
            for v in range(nv):
                g = 0.0
                for l in range(nv):
                    g += rc[i, j, l] * gain_t[v, l]
                out[i, j, v] = coef[v] * rc[i, j, v] + b_gain * g + tau_sq * rho * maxw[v]
    return out_arr


def lincomb_impl(double a, double[:, :, ::1] x, double b, double[:, :, ::1] y):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t m = x.shape[1]
    cdef Py_ssize_t nv = x.shape[2]
    cdef cnp.ndarray[cnp.float64_t, ndim=3] out_arr = np.empty((n, m, nv))
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t i, j, v
    for i in range(n):
        for j in range(m):
            for v in range(nv):
                out[i, j, v] = a * x[i, j, v] + b * y[i, j, v]
    return out_arr


def vaxpby_impl(double[::1] a_v, double[:, :, ::1] x, double[::1] b_v, double[:, :, ::1] y):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t m = x.shape[1]
    cdef Py_ssize_t nv = x.shape[2]
    cdef cnp.ndarray[cnp.float64_t, ndim=3] out_arr = np.empty((n, m, nv))
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t i, j, v
    for i in range(n):
        for j in range(m):
            for v in range(nv):
                out[i, j, v] = a_v[v] * x[i, j, v] + b_v[v] * y[i, j, v]
    return out_arr


def limit_cells_impl(double[:, :, ::1] rc, double[:, :, ::1] jc,
                     double[::1] eps_cell, double[:, ::1] BS,
                     double inv_sqrt_h, long[::1] mirror, int exact_vertex,
                     double g1, double g2):
    cdef Py_ssize_t n = rc.shape[0]
    cdef Py_ssize_t m = rc.shape[1]
    cdef Py_ssize_t nv = rc.shape[2]
    cdef Py_ssize_t ns = BS.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=3] rn_arr = np.empty((n, m, nv))
    cdef cnp.ndarray[cnp.float64_t, ndim=3] jn_arr = np.empty((n, m, nv))
    cdef cnp.ndarray[cnp.float64_t, ndim=3] f_arr = np.empty((n, m, nv))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] th_arr = np.empty((n, nv))
    cdef double[:, :, ::1] rn = rn_arr
    cdef double[:, :, ::1] jn = jn_arr
    cdef double[:, :, ::1] f = f_arr
    cdef double[:, ::1] theta = th_arr
    cdef Py_ssize_t i, j, v, s, vm
    cdef double eps, fmin, val, favg, th, xi, fvert, denom
    cdef double min_after = 1e300
    cdef long n_limited = 0
    cdef long n_negative = 0
    cdef double c1, c2

    for i in range(n):
        eps = eps_cell[i]
        for j in range(m):
            for v in range(nv):
                f[i, j, v] = rc[i, j, v] + eps * jc[i, j, v]
        for v in range(nv):
            fmin = 1e300
            for s in range(ns):
                val = 0.0
                for j in range(m):
                    val += f[i, j, v] * BS[j, s]
                if val < fmin:
                    fmin = val
            if exact_vertex:
                c1 = f[i, 1, v]
                c2 = f[i, 2, v]
                if c2 != 0.0:
                    xi = -c1 * g1 / (3.0 * c2 * g2)
                    if -1.0 < xi < 1.0:
                        fvert = f[i, 0, v] * BS[0, 0] + c1 * g1 * xi \
                            + c2 * g2 * 0.5 * (3.0 * xi * xi - 1.0)
                        if fvert < fmin:
                            fmin = fvert
            favg = f[i, 0, v] * inv_sqrt_h
            if favg < 0.0:
                th = 0.0
                n_negative += 1
                n_limited += 1
            else:
                denom = favg - fmin
                if denom > 0.0:
                    th = favg / denom
                    if th > 1.0:
                        th = 1.0
                else:
                    th = 1.0
                if th < 1.0:
                    n_limited += 1
            theta[i, v] = th
            val = th * (fmin - favg) + favg
            if val < min_after:
                min_after = val
        for j in range(m):
            if j > 0:
                for v in range(nv):
                    f[i, j, v] *= theta[i, v]
        for v in range(nv):
            vm = mirror[v]
            for j in range(m):
                rn[i, j, v] = 0.5 * (f[i, j, v] + f[i, j, vm])
                jn[i, j, v] = (f[i, j, v] - f[i, j, vm]) / (2.0 * eps)
    return rn_arr, jn_arr, int(n_limited), int(n_negative), float(min_after)
