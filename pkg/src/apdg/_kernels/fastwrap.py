"""Thin adapter giving the compiled kernels the pyref call signatures."""
import numpy as np

from . import _fast


def weak_dx(c, phiL, phiR, stiff, side, bcl, bcr):
    return _fast.weak_dx_impl(
        c,
        phiL,
        phiR,
        stiff,
        int(side),
        None if bcl is None else np.ascontiguousarray(bcl, dtype=float),
        None if bcr is None else np.ascontiguousarray(bcr, dtype=float),
    )


def relax_r_const(rc, gain_t, coef, b_gain, tau_sq, bmom, maxw):
    return _fast.relax_r_const_impl(rc, gain_t, coef, float(b_gain), float(tau_sq), bmom, maxw)


def lincomb(a, x, b, y):
    return _fast.lincomb_impl(float(a), x, float(b), y)


def vaxpby(a_v, x, b_v, y):
    return _fast.vaxpby_impl(a_v, x, b_v, y)


def limit_cells(rc, jc, eps_cell, BS, inv_sqrt_h, mirror, exact_vertex, g1=0.0, g2=0.0):
    return _fast.limit_cells_impl(
        np.ascontiguousarray(rc),
        np.ascontiguousarray(jc),
        np.ascontiguousarray(eps_cell, dtype=float),
        np.ascontiguousarray(BS),
        float(inv_sqrt_h),
        np.ascontiguousarray(mirror, dtype=np.int_),
        1 if exact_vertex else 0,
        float(g1),
        float(g2),
    )
