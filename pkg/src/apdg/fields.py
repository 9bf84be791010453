"""Electric field providers: zero field, prescribed fields, and the
self-consistent Poisson solve.

Providers expose ``evaluate(space, rho_coeffs) -> FieldSample`` returning the
field sampled at the x-quadrature points plus its two boundary-interface
values (the inflow flux formulas need E at x_{1/2} and x_{N+1/2}).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .dg import DGSpace

PULSE_SHARPNESS = 50.0 * np.e


def pulse_field(x):
    """Odd-symmetric field pulse centered at x = 1/4.

    E(x) = -2c (1/4 - x) exp(-c (1/4 - x)^2) with c = 50 e; the gradient of a
    narrow Gaussian well, peaking at about +-10.
    """
    c = PULSE_SHARPNESS
    d = 0.25 - np.asarray(x, dtype=float)
    return -2.0 * c * d * np.exp(-c * d * d)


def doping_profile(x, floor: float = 0.001, edge0: float = 0.3, edge1: float = 0.7, s: float = 0.02):
    """Channel doping profile: 1 outside [edge0, edge1], ``floor`` inside.

    c(x) = 1 - (1-m) [tanh((x-edge0)/s) - tanh((x-edge1)/s)], m = (1-floor)/2.
    """
    x = np.asarray(x, dtype=float)
    m = (1.0 - floor) / 2.0
    return 1.0 - (1.0 - m) * (np.tanh((x - edge0) / s) - np.tanh((x - edge1) / s))


@dataclass(frozen=True)
class PoissonConfig:
    """Parameters of the coupled Poisson problem beta Phi_xx = rho - c(x)."""

    beta: float
    phi_left: float = 0.0
    phi_right: float = 5.0

    def __post_init__(self):
        if self.beta <= 0.0:
            raise ValueError("beta must be positive")


@dataclass
class FieldSample:
    """Field data consumed by one time step: quad-point values and boundary
    interface values; ``phi``/``e_nodes`` are set by the Poisson provider."""

    e_quad: np.ndarray          # (N, Q)
    e_left: float
    e_right: float
    phi: np.ndarray | None = None      # (N+1,) potential at interfaces
    e_nodes: np.ndarray | None = None  # (N+1,) field at interfaces


class ZeroField:
    """E = 0; the scheme skips all velocity-derivative terms."""

    is_zero = True

    def evaluate(self, space: DGSpace, rho_c=None) -> FieldSample:
        return FieldSample(
            e_quad=np.zeros_like(space.quad_x), e_left=0.0, e_right=0.0
        )


class PrescribedField:
    """Static field given by a callable E(x), sampled at quadrature points."""

    is_zero = False

    def __init__(self, fn):
        self.fn = fn

    def evaluate(self, space: DGSpace, rho_c=None) -> FieldSample:
        return FieldSample(
            e_quad=np.asarray(self.fn(space.quad_x), dtype=float),
            e_left=float(self.fn(space.mesh.x_left)),
            e_right=float(self.fn(space.mesh.x_right)),
        )


class PoissonField:
    """Self-consistent field from beta Phi_xx = rho - c(x), E = -Phi_x."""

    is_zero = False

    def __init__(self, config: PoissonConfig, doping=None):
        self.config = config
        self.doping = doping if doping is not None else doping_profile

    def evaluate(self, space: DGSpace, rho_c: np.ndarray) -> FieldSample:
        return solve_poisson(space, rho_c, self.config, self.doping)


def solve_poisson(space: DGSpace, rho_c: np.ndarray, config: PoissonConfig, doping=None) -> FieldSample:
    """Tridiagonal second-order FD solve of the coupled Poisson problem.

    Unknowns live on the N+1 interface points; the source at an interior
    point uses the average {rho} of the two one-sided DG traces; Dirichlet
    values pin the endpoints.  E is the centered difference of Phi at the
    interior points (one-sided second-order at the ends), and inside cells it
    is the piecewise-linear interpolant between interface values (exactly its
    projection onto the DG space for k >= 1).
    """
    if doping is None:
        doping = doping_profile
    rho_c = np.asarray(rho_c, dtype=float)
    if not np.isfinite(rho_c).all():
        raise ValueError("NaN/Inf in density passed to the Poisson solve")
    mesh = space.mesh
    n = mesh.n_cells
    h = mesh.h
    xs = mesh.interfaces

    uL, uR = space.traces(rho_c)            # per-cell endpoint limits
    rho_iface = np.empty(n + 1)
    rho_iface[1:-1] = 0.5 * (uR[:-1] + uL[1:])
    rho_iface[0] = uL[0]
    rho_iface[-1] = uR[-1]

    rhs = (h * h / config.beta) * (rho_iface - doping(xs))
    rhs[0] = config.phi_left
    rhs[-1] = config.phi_right

    # banded tridiagonal system: Phi_{p-1} - 2 Phi_p + Phi_{p+1} = rhs_p
    ab = np.zeros((3, n + 1))
    ab[0, 1:] = 1.0
    ab[1, :] = -2.0
    ab[2, :-1] = 1.0
    ab[1, 0] = ab[1, -1] = 1.0
    ab[0, 1] = 0.0
    ab[2, -2] = 0.0
    phi = solve_banded((1, 1), ab, rhs)

    e_nodes = np.empty(n + 1)
    e_nodes[1:-1] = -(phi[2:] - phi[:-2]) / (2.0 * h)
    e_nodes[0] = -(-1.5 * phi[0] + 2.0 * phi[1] - 0.5 * phi[2]) / h
    e_nodes[-1] = -(1.5 * phi[-1] - 2.0 * phi[-2] + 0.5 * phi[-3]) / h

    # linear interpolation to quadrature points within each cell
    t = (space.quad_x - xs[:-1][:, None]) / h
    e_quad = (1.0 - t) * e_nodes[:-1][:, None] + t * e_nodes[1:][:, None]
    return FieldSample(
        e_quad=e_quad,
        e_left=float(e_nodes[0]),
        e_right=float(e_nodes[-1]),
        phi=phi,
        e_nodes=e_nodes,
    )


def poisson_residual(space: DGSpace, sample: FieldSample, rho_c: np.ndarray, config: PoissonConfig, doping=None) -> float:
    """Max residual of the interior FD equations (diagnostic)."""
    if doping is None:
        doping = doping_profile
    h = space.mesh.h
    xs = space.mesh.interfaces
    uL, uR = space.traces(rho_c)
    rho_iface = np.empty(space.n_cells + 1)
    rho_iface[1:-1] = 0.5 * (uR[:-1] + uL[1:])
    rho_iface[0] = uL[0]
    rho_iface[-1] = uR[-1]
    phi = sample.phi
    lap = (phi[:-2] - 2.0 * phi[1:-1] + phi[2:]) / (h * h)
    res = config.beta * lap - (rho_iface[1:-1] - doping(xs[1:-1]))
    return float(np.abs(res).max())
