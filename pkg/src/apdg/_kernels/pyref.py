"""Pure numpy reference implementation of the hot per-step kernels.

Array convention: modal coefficient tensors have shape (n_cells, n_modes,
n_vnodes), C-contiguous.  The compiled backend mirrors these signatures
exactly; tests assert the two agree to rounding.
"""
import numpy as np


def weak_dx(c, phiL, phiR, stiff, side, bcl, bcr):
    """One-sided weak d/dx on every cell/mode/velocity slot.

    out[i,m,v] = F[i+1,v] phiR[m] - F[i,v] phiL[m] - sum_n c[i,n,v] stiff[n,m]
    with interface values F taken from the 'plus' (side=+1, right cell) or
    'minus' (side=-1, left cell) trace; bcl/bcr (if given) replace F at the
    two boundary interfaces, otherwise the closure is periodic.
    """
    n = c.shape[0]
    nv = c.shape[2]
    uL = np.einsum("imv,m->iv", c, phiL)
    uR = np.einsum("imv,m->iv", c, phiR)
    F = np.empty((n + 1, nv))
    if side > 0:
        F[:-1] = uL
        F[-1] = uL[0]
    else:
        F[1:] = uR
        F[0] = uR[-1]
    if bcl is not None:
        F[0] = bcl
    if bcr is not None:
        F[-1] = bcr
    out = F[1:, None, :] * phiR[None, :, None] - F[:-1, None, :] * phiL[None, :, None]
    out -= np.einsum("inv,nm->imv", c, stiff)
    return out


def relax_r_const(rc, gain_t, coef, b_gain, tau_sq, bmom, maxw):
    """Constant-epsilon relaxation of r, fused:
    out = coef_v * rc + b_gain * (rc @ gain_t.T) + tau_sq * (rc @ bmom) x maxw."""
    rho = rc @ bmom
    return coef * rc + b_gain * (rc @ gain_t.T) + tau_sq * rho[:, :, None] * maxw


def lincomb(a, x, b, y):
    """Scalar linear combination a*x + b*y (SSP stage update)."""
    return a * x + b * y


def vaxpby(a_v, x, b_v, y):
    """Per-velocity-node linear combination a_v * x + b_v * y."""
    return a_v * x + b_v * y


def limit_cells(rc, jc, eps_cell, BS, inv_sqrt_h, mirror, exact_vertex, g1=0.0, g2=0.0):
    """Cell-average-preserving positivity squash of f = r + eps*j.

    Per (cell, velocity node) the polynomial f is sampled at the Lobatto
    columns of BS (plus, for degree 2, the exact interior vertex using the
    scaled-basis slopes g1, g2); theta = min(favg/(favg - fmin), 1) rescales
    the non-mean modes.  Cells with negative average are flattened to their
    average (theta = 0) and counted separately.

    Returns (r_new, j_new, n_limited, n_negative_avg, min_f_after).
    """
    f = rc + eps_cell[:, None, None] * jc
    vals = np.einsum("imv,ms->isv", f, BS)
    fmin = vals.min(axis=1)
    if exact_vertex:
        c1 = f[:, 1, :]
        c2 = f[:, 2, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            xi = -c1 * g1 / (3.0 * c2 * g2)
        inside = np.isfinite(xi) & (np.abs(xi) < 1.0) & (c2 != 0.0)
        xi = np.where(inside, xi, 0.0)
        # f(xi) = c0*b0 + c1*g1*xi + c2*g2*(3 xi^2 - 1)/2 with b0 = BS[0,0]
        fvert = f[:, 0, :] * BS[0, 0] + c1 * g1 * xi + c2 * g2 * 0.5 * (3.0 * xi**2 - 1.0)
        fmin = np.where(inside, np.minimum(fmin, fvert), fmin)
    favg = f[:, 0, :] * inv_sqrt_h
    denom = favg - fmin
    with np.errstate(divide="ignore", invalid="ignore"):
        theta = np.where(denom > 0.0, favg / denom, 1.0)
    theta = np.minimum(theta, 1.0)
    theta = np.maximum(theta, 0.0)
    negative = favg < 0.0
    theta = np.where(negative, 0.0, theta)

    f_new = f.copy()
    f_new[:, 1:, :] *= theta[:, None, :]
    min_after = float((theta * (fmin - favg) + favg).min())
    n_limited = int(np.count_nonzero(theta < 1.0))
    n_negative = int(np.count_nonzero(negative))

    f_mirror = f_new[:, :, mirror]
    r_new = 0.5 * (f_new + f_mirror)
    j_new = (f_new - f_mirror) / (2.0 * eps_cell[:, None, None])
    return r_new, j_new, n_limited, n_negative, min_after
