"""Reference solvers for the diffusive limit.

The mixed-form DG diffusion step reuses exactly the weak-derivative assembly
of the kinetic scheme (plus trace for the auxiliary variable, minus trace for
the update), which is what makes the one-step agreement with the vanishing-
mean-free-path kinetic update an identity rather than an approximation.

The drift-diffusion solver is an independent Crank-Nicolson finite-difference
discretization of  d_t rho = d_x( D (d_x rho + E rho) ),  the macroscopic
limit of the kinetic model with the force term -E d_v f (so the drift
velocity is -D E).  For E = 0 it reduces to the heat equation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .dg import DGSpace, weak_derivative
from .fields import PoissonConfig, doping_profile


def decaying_cosine_density(x, t):
    """Closed-form heat-equation solution rho = exp(-4 pi^2 t) cos(2 pi x) + 1."""
    return np.exp(-4.0 * np.pi**2 * t) * np.cos(2.0 * np.pi * np.asarray(x)) + 1.0


def ldg_limit_step(space: DGSpace, rho_c: np.ndarray, d_const: float, dt: float) -> np.ndarray:
    """One forward-Euler mixed-form DG diffusion step (periodic closure)."""
    g = weak_derivative(space, rho_c, "plus")
    return rho_c + dt * d_const * weak_derivative(space, g, "minus")


@dataclass
class DriftDiffusionState:
    """Nodal density values and time for the finite-difference reference."""

    rho: np.ndarray
    x: np.ndarray
    t: float


class DriftDiffusionSolver:
    """Crank-Nicolson FD solver for d_t rho = d_x(D(d_x rho + E rho)).

    ``e_values``: None (E=0), a callable of x, an array at the half-points,
    or the string 'poisson' (re-solved from the current density each step,
    frozen over the step).  ``bc`` is 'periodic' or ('dirichlet', gl, gr).
    """

    def __init__(self, x: np.ndarray, d_const: float, dt: float, e_values=None,
                 bc="periodic", poisson: PoissonConfig | None = None, doping=None):
        self.x = np.asarray(x, dtype=float)
        self.n = self.x.size
        self.h = float(self.x[1] - self.x[0])
        self.d = float(d_const)
        self.dt = float(dt)
        self.bc = bc
        self.poisson = poisson
        self.doping = doping if doping is not None else doping_profile
        self._lu = None
        if isinstance(e_values, str) and e_values == "poisson":
            if poisson is None:
                raise ValueError("poisson config required for e_values='poisson'")
            self.mode = "poisson"
            self.e_half = None
        else:
            self.mode = "static"
            if e_values is None:
                self.e_half = np.zeros(self.n if bc == "periodic" else self.n - 1)
            elif callable(e_values):
                self.e_half = np.asarray(e_values(self._half_points()), dtype=float)
            else:
                self.e_half = np.asarray(e_values, dtype=float)

    def _half_points(self):
        xh = 0.5 * (self.x[:-1] + self.x[1:])
        if self.bc == "periodic":
            # extra wrap interface between x[-1] and x[0] + period
            return np.concatenate([xh, [self.x[-1] + 0.5 * self.h]])
        return xh

    def _build_matrix(self, e_half: np.ndarray) -> np.ndarray:
        """Flux-form operator; rows of pinned Dirichlet endpoints are zero."""
        n, h, d = self.n, self.h, self.d
        a = np.zeros((n, n))
        if self.bc == "periodic":
            for p in range(n):
                pp = (p + 1) % n
                gp = d / h * (1.0 / h + 0.5 * e_half[p])
                gm = d / h * (-1.0 / h + 0.5 * e_half[p])
                a[p, pp] += gp
                a[p, p] += gm
                a[pp, pp] -= gp
                a[pp, p] -= gm
        else:
            for p in range(1, n - 1):
                er = e_half[p]
                el = e_half[p - 1]
                a[p, p + 1] += d / h * (1.0 / h + 0.5 * er)
                a[p, p] += d / h * (-1.0 / h + 0.5 * er)
                a[p, p] -= d / h * (1.0 / h + 0.5 * el)
                a[p, p - 1] -= d / h * (-1.0 / h + 0.5 * el)
        return a

    def _poisson_field(self, rho: np.ndarray) -> np.ndarray:
        """Solve beta phi_xx = rho - c on the node grid; return E at half points."""
        cfg = self.poisson
        n, h = self.n, self.h
        diag = np.full(n, -2.0)
        rhs = (h * h / cfg.beta) * (rho - self.doping(self.x))
        mat = np.diag(diag) + np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1)
        mat[0, :] = 0.0
        mat[0, 0] = 1.0
        mat[-1, :] = 0.0
        mat[-1, -1] = 1.0
        rhs[0] = cfg.phi_left
        rhs[-1] = cfg.phi_right
        phi = np.linalg.solve(mat, rhs)
        return -(phi[1:] - phi[:-1]) / h  # exact midpoint field of the FD potential

    def step(self, rho: np.ndarray) -> np.ndarray:
        n = self.n
        if self.mode == "poisson":
            e_half = self._poisson_field(rho)
            a = self._build_matrix(e_half)
            lhs = np.eye(n) - 0.5 * self.dt * a
            rhs_m = np.eye(n) + 0.5 * self.dt * a
            self._apply_dirichlet(lhs)
            self._apply_dirichlet(rhs_m)
            return np.linalg.solve(lhs, rhs_m @ rho)
        if self._lu is None:
            a = self._build_matrix(self.e_half)
            lhs = np.eye(n) - 0.5 * self.dt * a
            self._rhs_m = np.eye(n) + 0.5 * self.dt * a
            self._apply_dirichlet(lhs)
            self._apply_dirichlet(self._rhs_m)
            self._lu = lu_factor(lhs)
        return lu_solve(self._lu, self._rhs_m @ rho)

    def _apply_dirichlet(self, mat: np.ndarray):
        if self.bc == "periodic":
            return
        mat[0, :] = 0.0
        mat[0, 0] = 1.0
        mat[-1, :] = 0.0
        mat[-1, -1] = 1.0

    def solve(self, rho0: np.ndarray, t_end: float) -> DriftDiffusionState:
        rho = np.asarray(rho0, dtype=float).copy()
        if self.bc != "periodic":
            rho[0] = self.bc[1]
            rho[-1] = self.bc[2]
        n_steps = int(round(t_end / self.dt))
        if abs(n_steps * self.dt - t_end) > 1e-12 * max(1.0, t_end):
            raise ValueError("t_end must be an integer number of dt steps")
        t = 0.0
        for _ in range(n_steps):
            rho = self.step(rho)
            if not np.isfinite(rho).all():
                raise FloatingPointError("drift-diffusion solve produced NaN/Inf")
            t += self.dt
        return DriftDiffusionState(rho=rho, x=self.x, t=t)


def drift_diffusion_solve(rho0, x, d_const, t_end, dt, e_values=None, bc="periodic",
                          poisson: PoissonConfig | None = None) -> DriftDiffusionState:
    """One-call wrapper around :class:`DriftDiffusionSolver`."""
    solver = DriftDiffusionSolver(x, d_const, dt, e_values=e_values, bc=bc, poisson=poisson)
    return solver.solve(rho0, t_end)
