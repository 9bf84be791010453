"""Velocity-space discretization on Gauss-Hermite quadrature nodes.

Distributions are stored as nodal samples f(v_l) at the quadrature nodes of
the weight exp(-v^2/2).  The renormalized Hermite polynomials

    H_0 = (2*pi)**-0.25,   H_{l+1} = v*H_l/sqrt(l+1) - H_{l-1}*sqrt(l/(l+1))

are orthonormal under sum_l H_i(v_l) H_j(v_l) w_l = delta_ij, which makes the
nodal <-> modal transforms plain matrix products.  The discrete collision
operator, the velocity differentiation matrix and the velocity moments are all
precomputed dense matrices/vectors on the node set.

Weight conventions: `weights` are the raw Gauss weights (sum = sqrt(2*pi)),
`normalized_weights` = weights/sqrt(2*pi) (sum = 1) appear wherever the
continuous integral carries a Maxwellian, and `density_weights` =
weights*exp(v^2/2) implement the plain integral of a distribution over v.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SQRT_2PI = float(np.sqrt(2.0 * np.pi))


@dataclass(frozen=True)
class VelocityGrid:
    """Gauss-Hermite node set with precomputed spectral tables.

    n_modes is the highest Hermite index N_v; there are N_v + 1 nodes.
    ``hermite_table[i, l]`` holds H_i(v_l); ``deriv_matrix[i, m]`` is the
    nodal differentiation matrix C with  dpsi/dv(v_m) = sum_i psi(v_i) C[i, m].
    ``mirror[l]`` is the index of the node -v_l.
    """

    n_modes: int
    nodes: np.ndarray
    weights: np.ndarray
    maxwellian: np.ndarray
    hermite_table: np.ndarray
    deriv_matrix: np.ndarray
    mirror: np.ndarray
    normalized_weights: np.ndarray
    density_weights: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.n_modes + 1


@dataclass(frozen=True)
class CollisionKernel:
    """Tabulated scattering matrix sigma(v_i, v_l) with its frequency vector.

    ``lam[i]`` is the discrete collision frequency sum_l sigma(v_i, v_l)
    * normalized_weights[l]; ``mu`` is an upper bound for lam used by the
    relaxed operator P = Q + mu*I.
    """

    sigma: np.ndarray
    lam: np.ndarray
    mu: float


def build_velocity_grid(n_modes: int) -> VelocityGrid:
    """Construct the velocity grid for highest Hermite index ``n_modes``.

    ``n_modes`` must be odd so that the node count is even and every node has
    an exact mirror -v (no zero node); the parity reconstruction in the
    limiter relies on that pairing.  Nodes/weights come from the symmetric
    tridiagonal (Golub-Welsch) eigenproblem of the probabilists' Hermite
    recurrence and are symmetrized so that v[mirror[l]] == -v[l] bitwise.
    """
    if n_modes < 1 or n_modes % 2 == 0:
        raise ValueError(f"n_modes must be a positive odd integer, got {n_modes}")
    n = n_modes + 1

    # Golub-Welsch on the Jacobi matrix of He_k: off-diagonal sqrt(k).
    off = np.sqrt(np.arange(1.0, n))
    jac = np.diag(off, 1) + np.diag(off, -1)
    vals, vecs = np.linalg.eigh(jac)
    nodes = vals
    weights = SQRT_2PI * vecs[0, :] ** 2

    # enforce exact +/- symmetry of the node set
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    mirror = np.arange(n)[::-1].copy()

    maxwellian = np.exp(-0.5 * nodes**2) / SQRT_2PI

    # renormalized Hermite values H[i, l] by the three-term recurrence
    table = np.zeros((n, n))
    table[0] = (2.0 * np.pi) ** -0.25
    if n > 1:
        table[1] = nodes * table[0]
    for ell in range(1, n - 1):
        table[ell + 1] = (
            nodes * table[ell] / np.sqrt(ell + 1.0)
            - table[ell - 1] * np.sqrt(ell / (ell + 1.0))
        )

    # C[i, m] = sum_l sqrt(l) H_l(v_i) H_{l-1}(v_m) w_i
    sql = np.sqrt(np.arange(1.0, n))
    deriv = np.einsum("l,li,lm->im", sql, table[1:], table[:-1]) * weights[:, None]

    return VelocityGrid(
        n_modes=n_modes,
        nodes=nodes,
        weights=weights,
        maxwellian=maxwellian,
        hermite_table=table,
        deriv_matrix=deriv,
        mirror=mirror,
        normalized_weights=weights / SQRT_2PI,
        density_weights=weights * np.exp(0.5 * nodes**2),
    )


def build_collision_kernel(grid: VelocityGrid, sigma=1.0, mu: float | None = None) -> CollisionKernel:
    """Build the collision tables from a scattering kernel.

    ``sigma`` may be a positive scalar, a callable sigma(v_i, v_l), or a full
    (n, n) matrix.  It must be symmetric and strictly positive.  ``mu``
    defaults to 2*max(lam), matching the usual choice mu=2 for sigma=1.
    """
    n = grid.n_nodes
    if np.isscalar(sigma):
        smat = np.full((n, n), float(sigma))
    elif callable(sigma):
        smat = np.asarray(sigma(grid.nodes[:, None], grid.nodes[None, :]), dtype=float)
    else:
        smat = np.asarray(sigma, dtype=float)
    if smat.shape != (n, n):
        raise ValueError(f"sigma table must have shape {(n, n)}, got {smat.shape}")
    if not np.allclose(smat, smat.T, rtol=0.0, atol=1e-13):
        raise ValueError("sigma must be symmetric")
    if not (smat > 0.0).all():
        raise ValueError("sigma must be strictly positive")

    lam = smat @ grid.normalized_weights
    if mu is None:
        mu = 2.0 * float(lam.max())
    if mu < lam.max():
        raise ValueError(f"mu={mu} must dominate max collision frequency {lam.max()}")
    return CollisionKernel(sigma=smat, lam=lam, mu=float(mu))


def hermite_transform(grid: VelocityGrid, samples: np.ndarray) -> np.ndarray:
    """Expansion coefficients psi_i = sum_l samples(v_l) H_i(v_l) w_l."""
    samples = _check_nodal(grid, samples)
    return (grid.hermite_table * grid.weights) @ samples


def hermite_synthesize(grid: VelocityGrid, coeffs: np.ndarray) -> np.ndarray:
    """Nodal values sum_i coeffs_i H_i(v_l); inverse of hermite_transform."""
    coeffs = _check_nodal(grid, coeffs)
    return grid.hermite_table.T @ coeffs


def velocity_derivative(grid: VelocityGrid, samples: np.ndarray) -> np.ndarray:
    """d/dv of the polynomial interpolant of psi samples, at the nodes.

    Exact for psi of degree <= n_modes.
    """
    samples = _check_nodal(grid, samples)
    return samples @ grid.deriv_matrix


def distribution_derivative_matrix(grid: VelocityGrid) -> np.ndarray:
    """Matrix DD with (d/dv g)(v_m) = sum_i g(v_i) DD[i, m] for g = psi*M.

    Product rule on g = psi*M: dg/dv = M*(dpsi/dv - v*psi); exact whenever
    psi is a polynomial of degree <= n_modes.
    """
    m_ratio = grid.maxwellian[None, :] / grid.maxwellian[:, None]
    return m_ratio * grid.deriv_matrix - np.diag(grid.nodes)


def collision_apply(kernel: CollisionKernel, grid: VelocityGrid, f_samples: np.ndarray) -> np.ndarray:
    """Discrete collision operator Q(f) at the nodes.

    Gain term M(v_i) * sum_l sigma(v_i,v_l) psi(v_l) wbar_l with psi = f/M,
    loss term lam(v_i) f(v_i).  The 1/sqrt(2*pi) normalization sits in
    wbar = normalized_weights so that sigma = 1 gives lam = 1 and Q(rho*M) = 0.
    """
    f_samples = _check_nodal(grid, f_samples)
    psi = f_samples / grid.maxwellian
    gain = grid.maxwellian * ((grid.normalized_weights * psi) @ kernel.sigma.T)
    return gain - kernel.lam * f_samples


def relaxed_operator_P(kernel: CollisionKernel, grid: VelocityGrid, r_samples: np.ndarray) -> np.ndarray:
    """P(r) = Q(r) + mu*r; entrywise nonnegative for nonnegative r."""
    return collision_apply(kernel, grid, r_samples) + kernel.mu * np.asarray(r_samples, dtype=float)


def moment_density(grid: VelocityGrid, samples: np.ndarray) -> float:
    """Discrete integral of a distribution over v (its density)."""
    samples = _check_nodal(grid, samples)
    return float(grid.density_weights @ samples)


def diffusion_constant(grid: VelocityGrid, kernel: CollisionKernel) -> float:
    """Discrete integral of v^2 M / lam over v."""
    return float(grid.density_weights @ (grid.nodes**2 * grid.maxwellian / kernel.lam))


def gain_matrix(grid: VelocityGrid, kernel: CollisionKernel) -> np.ndarray:
    """Matrix G with gain(v_m) = sum_l f(v_l) G[l, m] for nodal samples of f."""
    wbar = grid.normalized_weights
    return (wbar[:, None] / grid.maxwellian[:, None]) * kernel.sigma.T * grid.maxwellian[None, :]


def _check_nodal(grid: VelocityGrid, samples: np.ndarray) -> np.ndarray:
    samples = np.asarray(samples, dtype=float)
    if samples.shape[-1] != grid.n_nodes:
        raise ValueError(
            f"expected {grid.n_nodes} nodal values on the last axis, got shape {samples.shape}"
        )
    return samples
