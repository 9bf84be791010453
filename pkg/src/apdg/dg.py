"""1D discontinuous Galerkin infrastructure on a uniform mesh.

Scalar DG fields are plain arrays of modal coefficients with shape
(n_cells, k+1); phase-space fields carry one trailing velocity axis,
(n_cells, k+1, n_nodes).  The per-cell basis is the L2-orthonormal scaled
Legendre family phi_m(x) = sqrt((2m+1)/h) * P_m(xi), so the mass matrix is
the identity: integrals and L2 norms are coefficient sums, and the weak
updates of the time stepper are explicit coefficient updates.

The interface coupling lives in :func:`weak_derivative`, the one-sided weak
d/dx operator with selectable trace side (the alternating-flux building
block); everything else here is projection, evaluation, quadrature and norms.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
import numpy.polynomial.legendre as npleg

from . import _kernels
from .hermite import CollisionKernel, VelocityGrid


@dataclass(frozen=True)
class Mesh1D:
    """Uniform partition of [x_left, x_right] into n_cells cells."""

    x_left: float
    x_right: float
    n_cells: int

    def __post_init__(self):
        if self.n_cells < 1 or self.x_right <= self.x_left:
            raise ValueError("mesh needs n_cells >= 1 and x_right > x_left")

    @property
    def h(self) -> float:
        return (self.x_right - self.x_left) / self.n_cells

    @property
    def interfaces(self) -> np.ndarray:
        return self.x_left + self.h * np.arange(self.n_cells + 1)

    @property
    def centers(self) -> np.ndarray:
        return self.x_left + self.h * (np.arange(self.n_cells) + 0.5)


def _lobatto_points(n: int) -> np.ndarray:
    """n Gauss-Lobatto points on [-1, 1] (roots of P'_{n-1} plus endpoints)."""
    if n < 2:
        raise ValueError("need at least 2 Lobatto points")
    interior = npleg.Legendre.basis(n - 1).deriv().roots() if n > 2 else np.array([])
    return np.concatenate(([-1.0], np.sort(interior), [1.0]))


@dataclass(frozen=True)
class DGBasis:
    """Reference-cell tables for the orthonormal Legendre basis of degree k.

    Values are on [-1, 1] with unit-measure orthonormalization
    phihat_m = sqrt((2m+1)/2) P_m; the physical scaling sqrt(2/h) is applied
    by :class:`DGSpace`.
    """

    degree: int
    quad_points: np.ndarray      # (Q,) Gauss-Legendre, Q = k+1
    quad_weights: np.ndarray     # (Q,)
    values: np.ndarray           # (M, Q) phihat_m(xi_q)
    derivs: np.ndarray           # (M, Q) phihat'_m(xi_q)
    left: np.ndarray             # (M,) phihat_m(-1)
    right: np.ndarray            # (M,) phihat_m(+1)
    center: np.ndarray           # (M,) phihat_m(0)
    sample_points: np.ndarray    # (S,) Lobatto incl. endpoints, S = k+2
    sample_values: np.ndarray    # (M, S)


def _ref_basis_values(k: int, xi: np.ndarray) -> np.ndarray:
    scale = np.sqrt((2.0 * np.arange(k + 1) + 1.0) / 2.0)
    return scale[:, None] * npleg.legvander(xi, k).T


def build_basis(degree: int) -> DGBasis:
    if degree < 0:
        raise ValueError("degree must be >= 0")
    k = degree
    xi, om = npleg.leggauss(k + 1)
    vals = _ref_basis_values(k, xi)
    # P'_m(xi) = m (P_{m-1} - xi P_m) / (1 - xi^2); Gauss points are interior
    pvander = npleg.legvander(xi, k).T
    derivs = np.zeros_like(vals)
    scale = np.sqrt((2.0 * np.arange(k + 1) + 1.0) / 2.0)
    for m in range(1, k + 1):
        derivs[m] = scale[m] * m * (pvander[m - 1] - xi * pvander[m]) / (1.0 - xi**2)
    ends = _ref_basis_values(k, np.array([-1.0, 0.0, 1.0]))
    samples = _lobatto_points(k + 2)
    return DGBasis(
        degree=k,
        quad_points=xi,
        quad_weights=om,
        values=vals,
        derivs=derivs,
        left=ends[:, 0],
        center=ends[:, 1],
        right=ends[:, 2],
        sample_points=samples,
        sample_values=_ref_basis_values(k, samples),
    )


class DGSpace:
    """Mesh + basis bundle with the physically scaled, precomputed tables."""

    def __init__(self, mesh: Mesh1D, basis: DGBasis):
        self.mesh = mesh
        self.basis = basis
        h = mesh.h
        s = np.sqrt(2.0 / h)
        self.h = h
        self.n_cells = mesh.n_cells
        self.n_modes = basis.degree + 1
        self.B = s * basis.values                       # (M, Q) values at quad
        self.Bderiv = s * (2.0 / h) * basis.derivs      # (M, Q) d/dx at quad
        self.quad_w = 0.5 * h * basis.quad_weights      # (Q,) physical weights
        self.BW = self.quad_w * self.B                  # (M, Q) projection table
        self.phiL = s * basis.left
        self.phiR = s * basis.right
        self.phiC = s * basis.center
        self.BS = s * basis.sample_values               # (M, S) limiter samples
        # stiffness S[m, n] = (phi_m, phi'_n) over one cell
        self.stiff = np.einsum("q,mq,nq->mn", self.quad_w, self.B, self.Bderiv)
        # physical quadrature points, (N, Q)
        self.quad_x = mesh.centers[:, None] + 0.5 * h * basis.quad_points[None, :]
        self.inv_sqrt_h = 1.0 / np.sqrt(h)

    # -- projection and evaluation -------------------------------------------------

    def project(self, fn) -> np.ndarray:
        """Quadrature L2 projection of a function of x onto the space."""
        vals = np.asarray(fn(self.quad_x), dtype=float)
        return np.einsum("iq,mq->im", vals, self.BW)

    def project_values(self, vals: np.ndarray) -> np.ndarray:
        """Projection from values at the quadrature points (any trailing axes)."""
        return np.einsum("iq...,mq->im...", vals, self.BW)

    def eval_quad(self, c: np.ndarray) -> np.ndarray:
        """Field values at the quadrature points (any trailing axes)."""
        return np.einsum("im...,mq->iq...", c, self.B)

    def eval_at(self, c: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Evaluate modal coefficients at arbitrary points in the domain."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        idx = np.clip(
            np.floor((x - self.mesh.x_left) / self.h).astype(int), 0, self.n_cells - 1
        )
        xi = 2.0 * (x - self.mesh.centers[idx]) / self.h
        vals = _ref_basis_values(self.basis.degree, xi) * np.sqrt(2.0 / self.h)
        return np.einsum("im...,mi->i...", c[idx], vals)

    def cell_averages(self, c: np.ndarray) -> np.ndarray:
        return c[:, 0] * self.inv_sqrt_h

    # -- integrals and norms ---------------------------------------------------------

    def integrate(self, c: np.ndarray) -> float:
        """Integral over the domain of a scalar DG field."""
        return float(np.sum(c[:, 0])) * np.sqrt(self.h)

    def l2_norm(self, c: np.ndarray) -> float:
        """Exact L2(x) norm of a scalar DG field (orthonormal basis)."""
        return float(np.sqrt(np.sum(c * c)))

    def traces(self, c: np.ndarray):
        """Per-cell endpoint limits (u at left end, u at right end)."""
        return np.einsum("im...,m->i...", c, self.phiL), np.einsum(
            "im...,m->i...", c, self.phiR
        )

    def trace(self, c: np.ndarray, interface: int, side: str):
        """One-sided limit at interface x_{i+1/2}; side 'minus' is the limit
        from the left cell, 'plus' from the right cell.  Periodic wraparound.
        """
        n = self.n_cells
        if not 0 <= interface <= n:
            raise IndexError(f"interface index {interface} out of range 0..{n}")
        uL, uR = self.traces(c)
        if side == "minus":
            return uR[(interface - 1) % n]
        if side == "plus":
            return uL[interface % n]
        raise ValueError("side must be 'minus' or 'plus'")


def jump_and_average(u_minus, u_plus):
    """Interface jump [u] = u+ - u- and average {u} = (u+ + u-)/2."""
    return u_plus - u_minus, 0.5 * (u_plus + u_minus)


def weak_derivative(space: DGSpace, c: np.ndarray, side: str, bc=None) -> np.ndarray:
    """One-sided weak d/dx of a DG field, as modal coefficients.

    For every cell i and mode m this returns
        F_{i+1/2} phi_m(right) - F_{i-1/2} phi_m(left) - (c, phi_m')_i,
    where the interface value F is the 'plus' or 'minus' one-sided trace.
    Tested against a test function u this is the operator
    -(c, u_x) - sum_i c^{side}[u] of the scheme; in particular the plus/minus
    pair satisfies the discrete skew-symmetry identity under periodic closure.

    ``bc=None`` closes periodically; otherwise ``bc=(left, right)`` supplies
    the two boundary interface flux values (scalars or per-velocity arrays)
    that replace the traces at x_{1/2} and x_{N+1/2}.
    """
    if side not in ("plus", "minus"):
        raise ValueError("side must be 'plus' or 'minus'")
    squeeze = c.ndim == 2
    c3 = c[:, :, None] if squeeze else c
    if bc is None:
        bcl = bcr = None
    else:
        nv = c3.shape[2]
        bcl = np.broadcast_to(np.asarray(bc[0], dtype=float), (nv,)).copy()
        bcr = np.broadcast_to(np.asarray(bc[1], dtype=float), (nv,)).copy()
    out = _kernels.impl.weak_dx(
        np.ascontiguousarray(c3),
        space.phiL,
        space.phiR,
        space.stiff,
        1 if side == "plus" else -1,
        bcl,
        bcr,
    )
    return out[:, :, 0] if squeeze else out


def phase_norm(space: DGSpace, grid: VelocityGrid, kernel: CollisionKernel, c: np.ndarray) -> float:
    """Weighted phase-space norm sqrt( int int g^2 lam/M dv dx ).

    ``c`` holds nodal-in-v samples of the distribution g, so the integrand is
    psi^2 lam M with psi = g/M and the v-integral reduces to normalized-weight
    sums; the x-integral is exact through the orthonormal modal coefficients.
    """
    return float(np.sqrt(phase_norm_sq(grid, kernel, c)))


def phase_norm_sq(grid: VelocityGrid, kernel: CollisionKernel, c: np.ndarray) -> float:
    w = grid.normalized_weights * kernel.lam / grid.maxwellian**2
    return float(np.einsum("imv,imv,v->", c, c, w))


# -- CSV emission -------------------------------------------------------------------


def write_quadrature_csv(path, space: DGSpace, c: np.ndarray, name: str = "value"):
    """Emit (x at quad points, pointwise field values) as CSV."""
    vals = space.eval_quad(c)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", name])
        for xi, vi in zip(space.quad_x.ravel(), vals.ravel()):
            w.writerow([f"{xi:.16g}", f"{vi:.16g}"])


def write_cell_average_csv(path, space: DGSpace, c: np.ndarray, name: str = "value"):
    """Emit (cell center, cell average) as CSV."""
    avgs = space.cell_averages(c)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x_center", f"{name}_avg"])
        for xi, vi in zip(space.mesh.centers, avgs):
            w.writerow([f"{xi:.16g}", f"{vi:.16g}"])
