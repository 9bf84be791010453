"""Fast invariant suite behind the ``apdg check`` subcommand.

Each check returns (name, passed, detail); the CLI prints one line per check
and exits nonzero if any fails.  These are smoke-level versions of the full
pytest suite, cheap enough to run routinely.
"""
from __future__ import annotations

import numpy as np

from .dg import DGSpace, Mesh1D, build_basis, weak_derivative
from .hermite import (
    SQRT_2PI,
    build_collision_kernel,
    build_velocity_grid,
    collision_apply,
    moment_density,
)
from .limits import ldg_limit_step
from .scheme import ParityState, SchemeParams, Solver, parity_mirror_error


def _solver(nx=16, k=2, n_modes=15, eps=0.5, dt=1e-5, **kw):
    grid = build_velocity_grid(n_modes)
    kernel = build_collision_kernel(grid)
    space = DGSpace(Mesh1D(0.0, 1.0, nx), build_basis(k))
    params = SchemeParams(epsilon=eps, dt=dt, **kw)
    return Solver(space, grid, kernel, params)


def run_checks(seed: int = 0):
    rng = np.random.default_rng(seed)
    checks = []

    def record(name, passed, detail=""):
        checks.append((name, bool(passed), detail))

    grid = build_velocity_grid(15)
    kernel = build_collision_kernel(grid)

    err = abs(grid.weights.sum() - SQRT_2PI)
    record("quadrature_weight_sum", err < 1e-12 * SQRT_2PI, f"|sum w - sqrt(2pi)| = {err:.2e}")

    gram = (grid.hermite_table * grid.weights) @ grid.hermite_table.T
    err = np.abs(gram - np.eye(grid.n_nodes)).max()
    record("hermite_orthonormality", err < 1e-10, f"max |Gram - I| = {err:.2e}")

    f = rng.standard_normal(grid.n_nodes) * grid.maxwellian
    q = collision_apply(kernel, grid, f)
    err = abs(grid.density_weights @ q)
    record("collision_mass_zero", err < 1e-11, f"|int Q dv| = {err:.2e}")

    err = abs(moment_density(grid, grid.maxwellian) - 1.0)
    record("maxwellian_density_one", err < 1e-12, f"|int M dv - 1| = {err:.2e}")

    space = DGSpace(Mesh1D(0.0, 1.0, 12), build_basis(2))
    u = rng.standard_normal((12, 3))
    w = rng.standard_normal((12, 3))
    lhs = float(np.sum(weak_derivative(space, u, "plus") * w)
                + np.sum(weak_derivative(space, w, "minus") * u))
    scale = float(np.sqrt(np.sum(u * u) * np.sum(w * w)))
    record("weak_derivative_skew", abs(lhs) < 1e-11 * max(scale, 1.0),
           f"|L+(u,w)+L-(w,u)| = {abs(lhs):.2e}")

    c = space.project(lambda x: 1.0 + 2.0 * x + 0.5 * x * x)
    xs = np.linspace(0.01, 0.99, 37)
    err = np.abs(space.eval_at(c, xs) - (1.0 + 2.0 * xs + 0.5 * xs * xs)).max()
    record("projection_reproduces_p2", err < 1e-12, f"max eval error = {err:.2e}")

    solver = _solver(nx=8, eps=0.5, dt=1e-5, limiter_on=True)
    f0 = rng.standard_normal((8, 3, 16)) * 0.05 + solver.grid.maxwellian * 1.0
    state = solver.even_odd_decompose(f0)
    limited, (_, _, min_f) = solver.positivity_limit(state)
    favg_before = solver.space.cell_averages(solver.reconstruct_f(state)[:, :1, :].squeeze(1))
    favg_after = solver.space.cell_averages(solver.reconstruct_f(limited)[:, :1, :].squeeze(1))
    err = np.abs(favg_before - favg_after).max()
    record("limiter_preserves_averages", err < 1e-14, f"max avg change = {err:.2e}")
    record("limiter_parity", parity_mirror_error(solver.grid, limited) == 0.0)

    f_back = solver.reconstruct_f(solver.even_odd_decompose(f0))
    err = np.abs(f_back - f0).max()
    record("decompose_roundtrip", err < 1e-13, f"max roundtrip error = {err:.2e}")

    solver = _solver(nx=16, eps=0.5, dt=1e-6)
    rho0 = solver.space.project(lambda x: np.cos(2 * np.pi * x) + 1.0)
    state = ParityState(rho0[:, :, None] * solver.grid.maxwellian,
                        np.zeros((16, 3, 16)))
    mass0 = solver.mass(state)
    for _ in range(50):
        state, _d = solver.full_step(state)
    err = abs(solver.mass(state) - mass0)
    record("mass_conserved_50_steps", err < 1e-12 * abs(mass0), f"|dm| = {err:.2e}")

    solver = _solver(nx=16, eps=1e-8, dt=2e-7)
    state = ParityState(rho0[:, :, None] * solver.grid.maxwellian,
                        np.zeros((16, 3, 16)))
    new, _diag = solver.full_step(state)
    rho_kin = solver.rho_coeffs(new.r)
    rho_ldg = ldg_limit_step(solver.space, rho0, 1.0, solver.dt)
    err = np.abs(rho_kin - rho_ldg).max()
    record("ap_limit_one_step", err < 1e-9, f"max |rho_kin - rho_ldg| = {err:.2e}")

    return checks
