"""The asymptotic-preserving time integrator for the parity system.

State is the pair of parity fields (r, j) as modal/nodal tensors of shape
(n_cells, k+1, n_vnodes).  One full step is the three-stage strong-stability
convex combination of complete forward-Euler substeps; each substep performs

  1. the exponential relaxation update of r (density preserving, crushes r to
     rho*M as the stiffness parameter tau -> 1),
  2. the implicit-in-effect update of j with coefficients alpha, beta and the
     one-sided 'plus' weak derivative of r*,
  3. the explicit transport update with the opposite 'minus' traces.

Wrapping the SSP combination around the complete substep (rather than around
the transport alone) keeps the stiff relaxation inside every stage, which is
what makes the diffusive-limit density update third-order accurate in time;
per-substep energy dissipation plus convexity preserves the stability bound.

All interface coupling goes through :func:`apdg.dg.weak_derivative`; at inflow
boundaries the two boundary interface values are replaced by the flux formulas
in :meth:`Solver.inflow_boundary_fluxes` and ghost data is never fabricated.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field, replace

import numpy as np

from . import _kernels
from .dg import DGSpace, phase_norm_sq, weak_derivative
from .fields import FieldSample, ZeroField
from .hermite import (
    CollisionKernel,
    VelocityGrid,
    distribution_derivative_matrix,
    gain_matrix,
)


class SchemeError(RuntimeError):
    """Raised when the state is invalid (NaN/Inf) or parameters inconsistent."""


@dataclass
class ParityState:
    """Even parity r, odd parity j, and the current time."""

    r: np.ndarray
    j: np.ndarray
    t: float = 0.0

    def copy(self) -> "ParityState":
        return ParityState(self.r.copy(), self.j.copy(), self.t)


@dataclass(frozen=True)
class InflowBC:
    """Inflow data tabulated at the velocity nodes, plus its v-derivative.

    ``negative_v`` selects how the half-space flux formulas are applied at
    the negative velocity nodes: 'abs' (default) evaluates them at |v| and
    extends by parity (r-flux even, j-flux odd); 'literal' plugs the signed
    node value straight into the formulas.
    """

    fl: np.ndarray
    fr: np.ndarray
    dfl: np.ndarray
    dfr: np.ndarray
    negative_v: str = "abs"

    def __post_init__(self):
        if self.negative_v not in ("abs", "literal"):
            raise ValueError("negative_v must be 'abs' or 'literal'")


def maxwellian_inflow(grid: VelocityGrid, negative_v: str = "abs") -> InflowBC:
    """Inflow data F_L = F_R = M(v)."""
    m = grid.maxwellian
    return InflowBC(fl=m, fr=m, dfl=-grid.nodes * m, dfr=-grid.nodes * m,
                    negative_v=negative_v)


@dataclass(frozen=True)
class SchemeParams:
    """Everything the stepper needs besides the state itself.

    ``epsilon`` is a positive scalar or a callable of x; ``dt=None`` selects
    the simple CFL policy min(cfl_parabolic h^2, cfl_hyperbolic h / max|v|).
    ``boundary=None`` means periodic; otherwise an :class:`InflowBC`.
    """

    epsilon: object = 1.0
    dt: float | None = None
    cfl_parabolic: float = 0.05
    cfl_hyperbolic: float = 0.3
    boundary: InflowBC | None = None
    field: object = dc_field(default_factory=ZeroField)
    limiter_on: bool = False
    limit_each_stage: bool = False


@dataclass
class StepDiagnostics:
    step: int
    t: float
    mass: float
    theorem_energy: float
    example_energy: float
    limiter_activations: int
    negative_averages: int
    min_f_sampled: float


def theorem_dt(h: float, lam: float, eps: float, n_modes: int, safety: float = 0.05) -> float:
    """Parabolic-branch step size safety * lam h^2 / ((1-eps^2)(2 N_v + 1))."""
    eps = min(float(eps), 0.999)
    return safety * lam * h * h / ((1.0 - eps * eps) * (2 * n_modes + 1))


class Solver:
    """Precomputed tables + step/diagnostic methods for one configuration."""

    def __init__(self, space: DGSpace, grid: VelocityGrid, kernel: CollisionKernel,
                 params: SchemeParams):
        self.space = space
        self.grid = grid
        self.kernel = kernel
        self.params = params

        self.v = np.ascontiguousarray(grid.nodes)
        self.lam = np.ascontiguousarray(kernel.lam)
        self.mu = kernel.mu
        self.Mv = np.ascontiguousarray(grid.maxwellian)
        self.bmom = np.ascontiguousarray(grid.density_weights)
        self.DD = distribution_derivative_matrix(grid)
        self.G = np.ascontiguousarray(gain_matrix(grid, kernel))
        self.GT = np.ascontiguousarray(self.G.T)

        if params.dt is not None:
            self.dt = float(params.dt)
        else:
            h = space.h
            self.dt = min(params.cfl_parabolic * h * h,
                          params.cfl_hyperbolic * h / float(np.abs(self.v).max()))
        if self.dt <= 0.0:
            raise SchemeError("dt must be positive")

        eps = params.epsilon
        self.const_eps = not callable(eps)
        dt = self.dt
        if self.const_eps:
            e = float(eps)
            if e <= 0.0:
                raise SchemeError("epsilon must be positive")
            self.eps_val = e
            self.eps_cell = np.full(space.n_cells, e)
            self.eps_bL = self.eps_bR = e
            self.phi_val = min(1.0, 1.0 / (e * e))
            self.phi_is_const = True
            e2 = e * e
            self.tau = 1.0 - np.exp(-self.mu * dt / e2)
            self.alpha = e2 / (e2 + self.lam * dt)                 # (V,)
            self.beta = dt * (1.0 - e2 * self.phi_val) / (e2 + self.lam * dt)
            tau = self.tau
            self._relax_coef = np.ascontiguousarray(
                1.0 - tau * tau - tau * (1.0 - tau) * self.lam / self.mu)
            self._relax_bgain = tau * (1.0 - tau) / self.mu
            self._tau_sq = tau * tau
            self._neg_beta_v = np.ascontiguousarray(-self.beta * self.v)
        else:
            eq = np.asarray(eps(space.quad_x), dtype=float)        # (N, Q)
            if (eq <= 0.0).any():
                raise SchemeError("epsilon(x) must be positive everywhere")
            self.eps_q = eq
            self.eps_cell = np.asarray(eps(space.mesh.centers), dtype=float)
            self.eps_bL = float(eps(space.mesh.x_left))
            self.eps_bR = float(eps(space.mesh.x_right))
            phi_q = np.minimum(1.0, 1.0 / eq**2)
            self.phi_is_const = bool(np.all(eq <= 1.0))
            self.phi_val = 1.0
            self.phi_q = phi_q[:, :, None]
            e2 = (eq**2)[:, :, None]
            self.tau = 1.0 - np.exp(-self.mu * dt / e2)            # (N, Q, 1)
            self.alpha = e2 / (e2 + self.lam * dt)                 # (N, Q, V)
            self.beta = dt * (1.0 - e2 * self.phi_q) / (e2 + self.lam * dt)

        # phase-norm weights per velocity node
        self._pw = grid.normalized_weights * self.lam / self.Mv**2
        self._ones_v = np.ones_like(self.v)
        self._neg_dt_v = np.ascontiguousarray(-self.dt * self.v)
        if self.phi_is_const:
            self._neg_dt_phi_v = np.ascontiguousarray(-self.dt * self.phi_val * self.v)

    # ------------------------------------------------------------------ helpers

    def rho_coeffs(self, r_c: np.ndarray) -> np.ndarray:
        """Density as a scalar DG field: velocity moment of r."""
        return r_c @ self.bmom

    def mass(self, state: ParityState) -> float:
        return self.space.integrate(self.rho_coeffs(state.r))

    def _edv(self, c: np.ndarray, e_quad: np.ndarray) -> np.ndarray:
        """Modal coefficients of E(x) * d/dv(field), via quadrature points."""
        vals = self.space.eval_quad(c) @ self.DD
        return self.space.project_values(e_quad[:, :, None] * vals)

    def _field(self, r_c: np.ndarray) -> FieldSample | None:
        prov = self.params.field
        if getattr(prov, "is_zero", False):
            return None
        return prov.evaluate(self.space, self.rho_coeffs(r_c))

    # ------------------------------------------------------------ parity algebra

    def even_odd_decompose(self, f_c: np.ndarray, t: float = 0.0) -> ParityState:
        """Split nodal samples of f into (r, j); exact inverse of reconstruct_f.

        Parity is enforced per mirrored node pair, per cell, per mode; the
        cell-center value of epsilon divides the odd part.
        """
        if (self.eps_cell == 0.0).any():
            raise SchemeError("epsilon = 0 in even-odd decomposition")
        fm = f_c[:, :, self.grid.mirror]
        r = 0.5 * (f_c + fm)
        j = (f_c - fm) / (2.0 * self.eps_cell[:, None, None])
        return ParityState(r=r, j=j, t=t)

    def reconstruct_f(self, state: ParityState) -> np.ndarray:
        """f = r + eps*j at every cell/mode/velocity slot."""
        return state.r + self.eps_cell[:, None, None] * state.j

    # ------------------------------------------------------------ relaxation step

    def relaxation_step_r(self, state: ParityState) -> np.ndarray:
        """r* = (1-tau) r + tau(1-tau) P(r)/mu + tau^2 rho M."""
        rc = state.r
        if self.const_eps:
            return _kernels.impl.relax_r_const(
                rc, self.GT, self._relax_coef, self._relax_bgain, self._tau_sq,
                self.bmom, self.Mv)
        rq = self.space.eval_quad(rc)
        tau = self.tau
        q = rq @ self.G - self.lam * rq
        rho_q = rq @ self.bmom
        star = (
            (1.0 - tau) * rq
            + (tau * (1.0 - tau) / self.mu) * (q + self.mu * rq)
            + (tau * tau) * rho_q[:, :, None] * self.Mv
        )
        return self.space.project_values(star)

    def relaxation_step_j(self, state: ParityState, r_star: np.ndarray,
                          e: FieldSample | None) -> np.ndarray:
        """j* = alpha j - beta (v d_x r* - E d_v r*), with the 'plus' traces."""
        bc_r, _ = self._flux_overrides(r_star, e)
        d = weak_derivative(self.space, r_star, "plus", bc_r)
        if self.const_eps:
            out = _kernels.impl.vaxpby(self.alpha, state.j, self._neg_beta_v, d)
            if e is not None:
                out += self.beta * self._edv(r_star, e.e_quad)
            return out
        jq = self.space.eval_quad(state.j)
        dq = self.space.eval_quad(d)
        adv = self.v * dq
        if e is not None:
            adv = adv - e.e_quad[:, :, None] * (self.space.eval_quad(r_star) @ self.DD)
        return self.space.project_values(self.alpha * jq - self.beta * adv)

    # ------------------------------------------------------------- transport step

    def _flux_overrides(self, r_c: np.ndarray, e: FieldSample | None):
        """Boundary flux values ((rhatL, rhatR), (jhatL, jhatR)) or periodic."""
        if self.params.boundary is None:
            return None, None
        rhat_l, rhat_r, jhat_l, jhat_r = self.inflow_boundary_fluxes(r_c, e)
        return (rhat_l, rhat_r), (jhat_l, jhat_r)

    def inflow_boundary_fluxes(self, r_c: np.ndarray, e: FieldSample | None = None):
        """Boundary interface fluxes (rhat_L, rhat_R, jhat_L, jhat_R), per node.

        rhat = [h (lam F -+ eps E dF) + 2 eps v r_cellcenter] / (lam h + 2 eps v)
        and jhat = (-v (r_c - rhat)/(h/2) + E dF) / lam, evaluated at |v| and
        extended by parity in 'abs' mode, or at the signed node in 'literal'.
        """
        bc = self.params.boundary
        if bc is None:
            raise SchemeError("inflow fluxes requested for a periodic run")
        h = self.space.h
        v = self.v
        e_l = e.e_left if e is not None else 0.0
        e_r = e.e_right if e is not None else 0.0
        r1 = np.einsum("mv,m->v", r_c[0], self.space.phiC)
        rn = np.einsum("mv,m->v", r_c[-1], self.space.phiC)

        if bc.negative_v == "abs":
            idx = np.where(v < 0.0, self.grid.mirror, np.arange(v.size))
            sign = np.where(v < 0.0, -1.0, 1.0)
        else:
            idx = np.arange(v.size)
            sign = np.ones(v.size)
        va = v[idx]
        lama = self.lam[idx]

        den_l = lama * h + 2.0 * self.eps_bL * va
        rhat_l = (
            h * (lama * bc.fl[idx] - self.eps_bL * e_l * bc.dfl[idx])
            + 2.0 * self.eps_bL * va * r1[idx]
        ) / den_l
        jhat_l = sign * (-va * (r1[idx] - rhat_l) / (0.5 * h) + e_l * bc.dfl[idx]) / lama

        den_r = lama * h + 2.0 * self.eps_bR * va
        rhat_r = (
            h * (lama * bc.fr[idx] + self.eps_bR * e_r * bc.dfr[idx])
            + 2.0 * self.eps_bR * va * rn[idx]
        ) / den_r
        jhat_r = sign * (-va * (rn[idx] - rhat_r) / (0.5 * h) + e_r * bc.dfr[idx]) / lama
        return rhat_l, rhat_r, jhat_l, jhat_r

    def transport_forward_euler(self, state: ParityState,
                                e: FieldSample | None = None) -> ParityState:
        """One explicit transport update of (r*, j*) with the 'minus' traces."""
        rc, jc = state.r, state.j
        bc_r, bc_j = self._flux_overrides(rc, e)
        dj = weak_derivative(self.space, jc, "minus", bc_j)
        dr = weak_derivative(self.space, rc, "minus", bc_r)
        dt = self.dt

        r_new = _kernels.impl.vaxpby(self._ones_v, rc, self._neg_dt_v, dj)
        if e is not None:
            r_new += dt * self._edv(jc, e.e_quad)

        if self.phi_is_const:
            j_new = _kernels.impl.vaxpby(self._ones_v, jc, self._neg_dt_phi_v, dr)
            if e is not None:
                j_new += dt * self.phi_val * self._edv(rc, e.e_quad)
        else:
            adv = self.v * self.space.eval_quad(dr)
            if e is not None:
                adv = adv - e.e_quad[:, :, None] * (self.space.eval_quad(rc) @ self.DD)
            j_new = jc - dt * self.space.project_values(self.phi_q * adv)
        return ParityState(r=r_new, j=j_new, t=state.t)

    def ssprk3_transport(self, state: ParityState,
                         e: FieldSample | None = None) -> ParityState:
        """Three-stage SSP convex combination of transport-only Euler updates."""
        u1 = self.transport_forward_euler(state, e)
        f1 = self.transport_forward_euler(u1, e)
        u2 = ParityState(0.75 * state.r + 0.25 * f1.r, 0.75 * state.j + 0.25 * f1.j, state.t)
        f2 = self.transport_forward_euler(u2, e)
        return ParityState(
            state.r / 3.0 + (2.0 / 3.0) * f2.r,
            state.j / 3.0 + (2.0 / 3.0) * f2.j,
            state.t,
        )

    # ------------------------------------------------------------------- limiter

    def positivity_limit(self, state: ParityState):
        """Cell-average-preserving positivity limiter on f = r + eps j.

        Returns (new_state, (n_limited, n_negative_avg, min_f_after)).
        Parity of the rebuilt (r, j) at mirrored nodes is exact by
        construction.  Cells whose f-average is negative cannot be rescued;
        they are flattened to the average and counted.
        """
        k = self.space.basis.degree
        g1 = np.sqrt(3.0 / self.space.h) if k >= 1 else 0.0
        g2 = np.sqrt(5.0 / self.space.h) if k >= 2 else 0.0
        r_new, j_new, n_lim, n_neg, min_f = _kernels.impl.limit_cells(
            np.ascontiguousarray(state.r),
            np.ascontiguousarray(state.j),
            self.eps_cell,
            self.space.BS,
            self.space.inv_sqrt_h,
            self.grid.mirror,
            k == 2,
            g1,
            g2,
        )
        return ParityState(r=r_new, j=j_new, t=state.t), (n_lim, n_neg, min_f)

    def min_f_sampled(self, state: ParityState) -> float:
        """Minimum of reconstructed f over the limiter sample set."""
        f = self.reconstruct_f(state)
        vals = np.einsum("imv,ms->isv", f, self.space.BS)
        return float(vals.min())

    # ------------------------------------------------------------------ full step

    def _euler_substep(self, state: ParityState, e: FieldSample | None) -> ParityState:
        r_star = self.relaxation_step_r(state)
        j_star = self.relaxation_step_j(state, r_star, e)
        return self.transport_forward_euler(ParityState(r_star, j_star, state.t), e)

    def full_step(self, state: ParityState,
                  want_diagnostics: bool = True) -> tuple[ParityState, StepDiagnostics | None]:
        """Advance one time step; returns the new state and its diagnostics
        (or None when ``want_diagnostics`` is off, skipping the extra norms)."""
        if not (np.isfinite(state.r).all() and np.isfinite(state.j).all()):
            raise SchemeError(f"NaN/Inf in state at t={state.t:.6g}")
        e = self._field(state.r)

        n_lim = n_neg = 0
        if self.params.limiter_on:
            state, (n_lim, n_neg, min_f) = self.positivity_limit(state)
        elif want_diagnostics:
            min_f = self.min_f_sampled(state)
        else:
            min_f = np.nan

        def stage_input(s: ParityState) -> ParityState:
            nonlocal n_lim, n_neg, min_f
            if self.params.limit_each_stage:
                s, (a, b, mf) = self.positivity_limit(s)
                n_lim += a
                n_neg += b
                min_f = min(min_f, mf)
            return s

        lincomb = _kernels.impl.lincomb
        u1 = stage_input(self._euler_substep(state, e))
        f1 = self._euler_substep(u1, e)
        u2 = stage_input(ParityState(
            lincomb(0.75, state.r, 0.25, f1.r), lincomb(0.75, state.j, 0.25, f1.j),
            state.t))
        f2 = self._euler_substep(u2, e)
        new = ParityState(
            lincomb(1.0 / 3.0, state.r, 2.0 / 3.0, f2.r),
            lincomb(1.0 / 3.0, state.j, 2.0 / 3.0, f2.j),
            state.t + self.dt,
        )

        if not want_diagnostics:
            return new, None
        energies = self.energy_norms(new)
        diag = StepDiagnostics(
            step=-1,
            t=new.t,
            mass=self.mass(new),
            theorem_energy=energies["theorem_energy"],
            example_energy=energies["example_energy"],
            limiter_activations=n_lim,
            negative_averages=n_neg,
            min_f_sampled=min_f,
        )
        return new, diag

    # ---------------------------------------------------------------- diagnostics

    def phase_sq(self, c: np.ndarray) -> float:
        return float(np.einsum("imv,imv,v->", c, c, self._pw))

    def energy_norms(self, state: ParityState) -> dict:
        """Stability energy |||r|||^2 + eps^2 |||j|||^2 (pointwise eps inside
        the x-integral when eps varies) and the mixed monitor
        |||r|||^2 + ||eps||_L2 * |||j|||."""
        nr2 = self.phase_sq(state.r)
        nj2 = self.phase_sq(state.j)
        if self.const_eps:
            e2j = self.eps_val**2 * nj2
            eps_l2 = self.eps_val * np.sqrt(self.space.mesh.x_right - self.space.mesh.x_left)
        else:
            jq = self.space.eval_quad(state.j)
            e2j = float(np.einsum(
                "q,iq,iqv,iqv,v->", self.space.quad_w, self.eps_q**2, jq, jq, self._pw))
            eps_l2 = float(np.sqrt(np.sum(self.space.quad_w * self.eps_q**2)))
        return {
            "theorem_energy": nr2 + e2j,
            "example_energy": nr2 + eps_l2 * np.sqrt(nj2),
        }


def parity_mirror_error(grid: VelocityGrid, state: ParityState) -> float:
    """Max deviation from r even / j odd at mirrored nodes (diagnostic)."""
    rm = state.r[:, :, grid.mirror]
    jm = state.j[:, :, grid.mirror]
    return float(max(np.abs(state.r - rm).max(), np.abs(state.j + jm).max()))
