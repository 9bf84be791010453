"""Configuration-driven experiment runner.

Experiments are described by flat ``key = value`` text files (``#`` starts a
comment); each canonical experiment ships as a config under ``configs/``.
Outputs are CSV files with a header row, one file per emitted quantity, file
names encoding experiment, epsilon, mesh and degree.  All runs are
deterministic for a fixed config (fixed summation orders, fixed seed).
"""
from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from .dg import DGBasis, DGSpace, Mesh1D, build_basis, phase_norm_sq, write_cell_average_csv
from .fields import PoissonConfig, PoissonField, PrescribedField, ZeroField, pulse_field
from .hermite import VelocityGrid, build_collision_kernel, build_velocity_grid
from .limits import DriftDiffusionSolver, decaying_cosine_density
from .scheme import (
    InflowBC,
    ParityState,
    SchemeParams,
    Solver,
    maxwellian_inflow,
)

EXPERIMENT_KINDS = (
    "accuracy",
    "ap_sweep",
    "prescribed_field",
    "boltzmann_poisson",
    "mixed_regime",
    "custom",
)


def mixed_regime_epsilon(x):
    """Spatially varying mean free path: 1e-3 + (tanh(1-11x)+tanh(1+11x))/2."""
    x = np.asarray(x, dtype=float)
    return 1e-3 + 0.5 * (np.tanh(1.0 - 11.0 * x) + np.tanh(1.0 + 11.0 * x))


# ---------------------------------------------------------------- configuration


@dataclass
class ExperimentConfig:
    experiment: str = "custom"
    out_dir: str = "out"
    k: int = 2
    n_modes: int = 15
    sigma: float = 1.0
    mu: float | None = None
    seed: int = 0
    threads: int = 1
    x_left: float = 0.0
    x_right: float = 1.0
    nx: int = 20
    nx_list: list = dc_field(default_factory=list)
    epsilon: object = 1.0            # float or "mixed"
    eps_list: list = dc_field(default_factory=list)
    dt: float = 1e-5
    t_end: float = 0.5
    amplitude: float = 1.0
    compare: str = "auto"            # accuracy: exact | self | auto
    limiter: bool = True
    limit_each_stage: bool = False
    negative_v: str = "abs"
    boundary: str = "periodic"       # periodic | inflow_maxwellian
    field: str = "zero"              # zero | pulse | poisson
    beta: float = 0.002
    phi_left: float = 0.0
    phi_right: float = 5.0
    snapshots: list = dc_field(default_factory=list)
    dd_nx: int = 401
    dd_dt: float | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENT_KINDS:
            raise ValueError(f"unknown experiment kind {self.experiment!r}")
        if self.dt <= 0 or self.t_end <= 0:
            raise ValueError("dt and t_end must be positive")


_BOOL = {"on": True, "off": False, "true": True, "false": False, "yes": True, "no": False}


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` lines; '#' starts a comment."""
    out = {}
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {ln}: expected 'key = value', got {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        out[key] = val
    return out


def _coerce(name: str, raw: str, like):
    if isinstance(like, bool):
        try:
            return _BOOL[raw.lower()]
        except KeyError:
            raise ValueError(f"{name}: expected on/off, got {raw!r}") from None
    if isinstance(like, int) and not isinstance(like, bool):
        return int(raw)
    if isinstance(like, float):
        return float(raw)
    if isinstance(like, list):
        return [float(tok) if any(c in tok for c in ".eE") or "." in tok else int(tok)
                for tok in raw.replace(",", " ").split()]
    return raw


def load_config(path: str) -> ExperimentConfig:
    with open(path) as fh:
        pairs = parse_config_text(fh.read())
    cfg = ExperimentConfig.__new__(ExperimentConfig)
    defaults = ExperimentConfig()
    for f in ExperimentConfig.__dataclass_fields__:
        setattr(cfg, f, getattr(defaults, f))
    for key, raw in pairs.items():
        if key not in ExperimentConfig.__dataclass_fields__:
            raise ValueError(f"unknown config key {key!r}")
        current = getattr(defaults, key)
        if key == "epsilon":
            setattr(cfg, key, raw if raw == "mixed" else float(raw))
        elif key in ("mu", "dd_dt"):
            setattr(cfg, key, float(raw))
        elif key in ("nx_list", "eps_list", "snapshots"):
            setattr(cfg, key, _coerce(key, raw, []))
        else:
            setattr(cfg, key, _coerce(key, raw, current))
    cfg.__post_init__()
    return cfg


# ------------------------------------------------------------------- assembly


@dataclass
class Case:
    """One fully assembled (solver, initial state) pair."""

    solver: Solver
    state0: ParityState
    config: ExperimentConfig


def _epsilon_of(cfg: ExperimentConfig):
    if cfg.epsilon == "mixed":
        return mixed_regime_epsilon
    return float(cfg.epsilon)


def _field_of(cfg: ExperimentConfig):
    if cfg.field == "zero":
        return ZeroField()
    if cfg.field == "pulse":
        return PrescribedField(pulse_field)
    if cfg.field == "poisson":
        return PoissonField(PoissonConfig(beta=cfg.beta, phi_left=cfg.phi_left,
                                          phi_right=cfg.phi_right))
    raise ValueError(f"unknown field spec {cfg.field!r}")


def _boundary_of(cfg: ExperimentConfig, grid: VelocityGrid):
    if cfg.boundary == "periodic":
        return None
    if cfg.boundary == "inflow_maxwellian":
        return maxwellian_inflow(grid, negative_v=cfg.negative_v)
    raise ValueError(f"unknown boundary spec {cfg.boundary!r}")


def build_case(cfg: ExperimentConfig, nx: int | None = None, epsilon=None,
               initial="by_experiment") -> Case:
    nx = cfg.nx if nx is None else nx
    grid = build_velocity_grid(cfg.n_modes)
    kernel = build_collision_kernel(grid, sigma=cfg.sigma, mu=cfg.mu)
    space = DGSpace(Mesh1D(cfg.x_left, cfg.x_right, nx), build_basis(cfg.k))
    params = SchemeParams(
        epsilon=_epsilon_of(cfg) if epsilon is None else epsilon,
        dt=cfg.dt,
        boundary=_boundary_of(cfg, grid),
        field=_field_of(cfg),
        limiter_on=cfg.limiter,
        limit_each_stage=cfg.limit_each_stage,
    )
    solver = Solver(space, grid, kernel, params)
    f0 = _initial_coeffs(cfg, space, grid, initial)
    return Case(solver=solver, state0=solver.even_odd_decompose(f0), config=cfg)


def _initial_coeffs(cfg: ExperimentConfig, space: DGSpace, grid: VelocityGrid, initial):
    if initial == "by_experiment":
        initial = {
            "accuracy": "equilibrium_cosine",
            "ap_sweep": "maxwellian",
            "prescribed_field": "maxwellian",
            "boltzmann_poisson": "maxwellian",
            "mixed_regime": "double_maxwellian",
            "custom": "maxwellian",
        }[cfg.experiment]
    if initial == "equilibrium_cosine":
        rho = space.project(lambda x: cfg.amplitude * np.cos(2.0 * np.pi * x) + 1.0)
        return rho[:, :, None] * grid.maxwellian
    if initial == "maxwellian":
        one = space.project(lambda x: np.ones_like(x))
        return one[:, :, None] * grid.maxwellian
    if initial == "double_maxwellian":
        u0 = 0.2
        xq = space.quad_x
        t0 = (5.0 - 2.0 * np.cos(2.0 * np.pi * xq)) / 20.0
        rho0 = (2.0 - np.sin(2.0 * np.pi * xq)) / 2.0
        v = grid.nodes
        vals = 0.5 * rho0[:, :, None] * (
            np.exp(-((v - u0) ** 2) / t0[:, :, None])
            + np.exp(-((v + u0) ** 2) / t0[:, :, None])
        )
        return space.project_values(vals)
    raise ValueError(f"unknown initial data spec {initial!r}")


# ------------------------------------------------------------------ simulation


@dataclass
class SimResult:
    state: ParityState
    diagnostics: np.ndarray        # structured columns, one row per step
    snapshots: dict                # t -> ParityState
    probes: dict                   # name -> array over steps


DIAG_COLUMNS = (
    "step", "t", "mass", "theorem_energy", "example_energy",
    "limiter_activations", "negative_averages", "min_f_sampled",
)


def n_steps_for(t_end: float, dt: float) -> int:
    n = int(round(t_end / dt))
    if abs(n * dt - t_end) > 1e-9 * max(1.0, abs(t_end)):
        raise ValueError(f"t_end={t_end} is not an integer multiple of dt={dt}")
    return n


def simulate(solver: Solver, state: ParityState, n_steps: int,
             snapshot_times=(), probes=None, record=True) -> SimResult:
    """March n_steps, recording per-step diagnostics and optional probes.

    ``probes`` maps name -> callable(solver, state) evaluated after every
    step; ``snapshot_times`` are absolute times captured to copies.
    """
    snap_left = sorted(float(t) for t in snapshot_times)
    snapshots = {}
    rows = np.empty((n_steps, len(DIAG_COLUMNS))) if record else None
    probe_vals = {name: np.empty(n_steps) for name in (probes or {})}
    if snap_left and abs(snap_left[0] - state.t) < 0.5 * solver.dt:
        snapshots[snap_left.pop(0)] = state.copy()
    for step in range(n_steps):
        state, diag = solver.full_step(state, want_diagnostics=record)
        if record:
            rows[step] = (
                step + 1, diag.t, diag.mass, diag.theorem_energy,
                diag.example_energy, diag.limiter_activations,
                diag.negative_averages, diag.min_f_sampled,
            )
        for name, fn in (probes or {}).items():
            probe_vals[name][step] = fn(solver, state)
        while snap_left and state.t >= snap_left[0] - 0.5 * solver.dt:
            snapshots[snap_left.pop(0)] = state.copy()
    return SimResult(state=state, diagnostics=rows, snapshots=snapshots, probes=probe_vals)


def equilibrium_distance(solver: Solver, state: ParityState) -> float:
    """Phase norm of f - (int f dv) M, the local-equilibrium gap."""
    f = solver.reconstruct_f(state)
    rho = solver.rho_coeffs(state.r)
    diff = f - rho[:, :, None] * solver.grid.maxwellian
    return math.sqrt(phase_norm_sq(solver.grid, solver.kernel, diff))


# ----------------------------------------------------------------- error norms


def density_values(solver: Solver, state: ParityState, space: DGSpace | None = None):
    return (space or solver.space).eval_quad(solver.rho_coeffs(state.r))


def norms_from_samples(weights, diff_quad, diff_extra=None):
    """L1/L2 from quadrature samples; Linf over quadrature plus extra samples."""
    l1 = float(np.sum(weights * np.abs(diff_quad)))
    l2 = float(np.sqrt(np.sum(weights * diff_quad**2)))
    linf = float(np.abs(diff_quad).max())
    if diff_extra is not None and diff_extra.size:
        linf = max(linf, float(np.abs(diff_extra).max()))
    return l1, l2, linf


def density_error_vs_exact(solver: Solver, state: ParityState, exact_fn):
    """Density error norms against a callable rho(x) on the run's own mesh."""
    space = solver.space
    rho = solver.rho_coeffs(state.r)
    diff_q = space.eval_quad(rho) - exact_fn(space.quad_x)
    ends = space.mesh.interfaces
    diff_e = space.eval_at(rho, ends) - exact_fn(ends)
    w = np.broadcast_to(space.quad_w, space.quad_x.shape)
    return norms_from_samples(w, diff_q, diff_e)


def density_error_between(solver_a: Solver, state_a: ParityState,
                          solver_b: Solver, state_b: ParityState):
    """Density error norms between runs on nested meshes (fine mesh samples)."""
    na, nb = solver_a.space.n_cells, solver_b.space.n_cells
    fine, coarse = (solver_b, solver_a) if nb >= na else (solver_a, solver_b)
    fine_state, coarse_state = (state_b, state_a) if nb >= na else (state_a, state_b)
    if fine.space.n_cells % coarse.space.n_cells != 0:
        raise ValueError("meshes have no common refinement")
    fs = fine.space
    rho_f = fine.rho_coeffs(fine_state.r)
    rho_c = coarse.rho_coeffs(coarse_state.r)
    diff_q = fs.eval_quad(rho_f) - coarse.space.eval_at(rho_c, fs.quad_x.ravel()).reshape(fs.quad_x.shape)
    ends = fs.mesh.interfaces[1:-1]  # interior fine interfaces; traces are two-valued at ends
    diff_e = fs.eval_at(rho_f, ends) - coarse.space.eval_at(rho_c, ends)
    w = np.broadcast_to(fs.quad_w, fs.quad_x.shape)
    return norms_from_samples(w, diff_q, diff_e)


def field_error_norms(space_a: DGSpace, ca: np.ndarray, space_b: DGSpace, cb: np.ndarray,
                      norm: str = "L2") -> float:
    """Scalar-field error between two DG fields on nested (or equal) meshes."""
    if space_b.n_cells % space_a.n_cells and space_a.n_cells % space_b.n_cells:
        raise ValueError("meshes have no common refinement")
    fine, cf = (space_a, ca) if space_a.n_cells >= space_b.n_cells else (space_b, cb)
    other, co = (space_b, cb) if space_a.n_cells >= space_b.n_cells else (space_a, ca)
    diff_q = fine.eval_quad(cf) - other.eval_at(co, fine.quad_x.ravel()).reshape(fine.quad_x.shape)
    w = np.broadcast_to(fine.quad_w, fine.quad_x.shape)
    l1, l2, linf = norms_from_samples(w, diff_q)
    return {"L1": l1, "L2": l2, "Linf": linf}[norm]


def fit_loglog_slope(xs, ys):
    """Least-squares slope of log(y) vs log(x); None for fewer than 2 points."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 2:
        return None
    a = np.vstack([np.log(xs), np.ones_like(xs)]).T
    slope, _ = np.linalg.lstsq(a, np.log(ys), rcond=None)[0]
    return float(slope)


def orders_from_errors(errors):
    """order_i = log2(e_{i-1} / e_i) with a leading None."""
    out = [None]
    for prev, cur in zip(errors[:-1], errors[1:]):
        out.append(math.log2(prev / cur) if prev > 0 and cur > 0 else None)
    return out


# ------------------------------------------------------------------ experiments


def _map_cases(fn, items, threads: int):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def run_accuracy_study(cfg: ExperimentConfig, out_dir: str | None = None) -> dict:
    """Mesh-refinement error/order table on the decaying-cosine problem.

    Diffusive mode compares the density to the closed-form heat solution;
    kinetic mode compares each mesh to the doubled mesh (self refinement).
    Mode 'auto' picks diffusive for epsilon < 1e-2.
    """
    if len(cfg.nx_list) < 2:
        raise ValueError("accuracy study needs at least 2 mesh sizes in nx_list")
    if cfg.epsilon == "mixed":
        raise ValueError("accuracy study needs a constant epsilon")
    mode = cfg.compare
    if mode == "auto":
        mode = "exact" if float(cfg.epsilon) < 1e-2 else "self"
    n_steps = n_steps_for(cfg.t_end, cfg.dt)
    meshes = sorted(int(n) for n in cfg.nx_list)
    run_meshes = meshes + [2 * meshes[-1]] if mode == "self" else meshes

    def one(nx):
        case = build_case(cfg, nx=nx)
        res = simulate(case.solver, case.state0, n_steps, record=False)
        return case.solver, res.state

    runs = dict(zip(run_meshes, _map_cases(one, run_meshes, cfg.threads)))

    errors = []
    for nx in meshes:
        solver, state = runs[nx]
        if mode == "exact":
            exact = lambda x: cfg.amplitude * (decaying_cosine_density(x, cfg.t_end) - 1.0) + 1.0
            errors.append(density_error_vs_exact(solver, state, exact))
        else:
            solver2, state2 = runs[2 * nx]
            errors.append(density_error_between(solver, state, solver2, state2))
    l1s, l2s, linfs = (np.array([e[i] for e in errors]) for i in range(3))
    table = {
        "nx": meshes,
        "l1": l1s, "l1_order": orders_from_errors(l1s),
        "l2": l2s, "l2_order": orders_from_errors(l2s),
        "linf": linfs, "linf_order": orders_from_errors(linfs),
        "mode": mode,
    }
    if out_dir is not None:
        path = os.path.join(out_dir, f"accuracy_{mode}_eps{cfg.epsilon}_k{cfg.k}.csv")
        _write_accuracy_csv(path, table)
        table["csv"] = path
    return table


def _write_accuracy_csv(path, table):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["nx", "l1", "l1_order", "l2", "l2_order", "linf", "linf_order"])
        for i, nx in enumerate(table["nx"]):
            row = [nx]
            for col in ("l1", "l1_order", "l2", "l2_order", "linf", "linf_order"):
                val = table[col][i]
                if val is None:
                    row.append("")
                elif col.endswith("order"):
                    row.append(f"{val:.4f}")
                else:
                    row.append(f"{val:.6e}")
            w.writerow(row)


def dd_reference_for_pulse(cfg: ExperimentConfig, d_const: float = 1.0):
    """Fine-grid drift-diffusion reference for the pulse-field setup."""
    x = np.linspace(cfg.x_left, cfg.x_right, cfg.dd_nx)
    dt = cfg.dd_dt if cfg.dd_dt is not None else cfg.dt
    solver = DriftDiffusionSolver(x, d_const, dt, e_values=pulse_field,
                                  bc=("dirichlet", 1.0, 1.0))
    return solver.solve(np.ones_like(x), cfg.t_end)


def run_ap_sweep(cfg: ExperimentConfig, out_dir: str | None = None) -> dict:
    """Error between the kinetic and limiting drift-diffusion densities vs eps."""
    if not cfg.eps_list:
        raise ValueError("ap_sweep needs eps_list")
    n_steps = n_steps_for(cfg.t_end, cfg.dt)
    dd = dd_reference_for_pulse(cfg)

    def one(eps):
        case = build_case(cfg, epsilon=float(eps), initial="maxwellian")
        res = simulate(case.solver, case.state0, n_steps, record=False)
        space = case.solver.space
        rho_q = space.eval_quad(case.solver.rho_coeffs(res.state.r))
        dd_q = np.interp(space.quad_x.ravel(), dd.x, dd.rho).reshape(rho_q.shape)
        w = np.broadcast_to(space.quad_w, rho_q.shape)
        _, l2, _ = norms_from_samples(w, rho_q - dd_q)
        return l2

    eps = sorted(float(e) for e in cfg.eps_list)
    errs = _map_cases(one, eps, cfg.threads)
    slope = fit_loglog_slope(eps, errs)
    out = {"eps": eps, "errors": errs, "slope": slope}
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, f"ap_sweep_nx{cfg.nx}_k{cfg.k}.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["epsilon", "l2_error_vs_dd"])
            for e, err in zip(eps, errs):
                w.writerow([f"{e:.8e}", f"{err:.10e}"])
            w.writerow([])
            w.writerow(["slope", "" if slope is None else f"{slope:.4f}"])
        out["csv"] = path
    return out


def run_example(cfg: ExperimentConfig, out_dir: str | None = None) -> dict:
    """Run one of the canonical experiment setups and emit its artifacts."""
    if cfg.experiment not in ("prescribed_field", "boltzmann_poisson", "mixed_regime", "custom"):
        raise ValueError(f"run_example cannot handle experiment {cfg.experiment!r}")
    out_dir = out_dir or cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)
    case = build_case(cfg)
    solver = case.solver
    n_steps = n_steps_for(cfg.t_end, cfg.dt)
    probes = {}
    if cfg.experiment == "boltzmann_poisson":
        probes["equilibrium_distance"] = equilibrium_distance
    res = simulate(solver, case.state0, n_steps, snapshot_times=cfg.snapshots, probes=probes)

    tag = f"{cfg.experiment}_eps{cfg.epsilon}_nx{cfg.nx}_k{cfg.k}"
    paths = {}
    paths["diagnostics"] = os.path.join(out_dir, f"{tag}_diagnostics.csv")
    _write_diagnostics_csv(paths["diagnostics"], res.diagnostics)

    rho_c = solver.rho_coeffs(res.state.r)
    paths["rho"] = os.path.join(out_dir, f"{tag}_rho_t{cfg.t_end}.csv")
    _write_profile_csv(paths["rho"], solver.space, rho_c, "rho")
    write_cell_average_csv(os.path.join(out_dir, f"{tag}_rho_avg_t{cfg.t_end}.csv"),
                           solver.space, rho_c, "rho")

    for t_snap, snap in res.snapshots.items():
        fpath = os.path.join(out_dir, f"{tag}_f_t{t_snap}.csv")
        _write_fgrid_csv(fpath, solver, snap)
        paths[f"f_t{t_snap}"] = fpath
        rpath = os.path.join(out_dir, f"{tag}_rho_t{t_snap}.csv")
        _write_profile_csv(rpath, solver.space, solver.rho_coeffs(snap.r), "rho")

    if probes:
        ppath = os.path.join(out_dir, f"{tag}_equilibrium_distance.csv")
        with open(ppath, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "phase_norm_f_minus_feq"])
            for i, val in enumerate(res.probes["equilibrium_distance"]):
                w.writerow([f"{(i + 1) * cfg.dt:.10g}", f"{val:.12e}"])
        paths["equilibrium_distance"] = ppath

    if cfg.experiment == "boltzmann_poisson":
        sample = solver.params.field.evaluate(solver.space, rho_c)
        epath = os.path.join(out_dir, f"{tag}_potential_field.csv")
        with open(epath, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "phi", "E"])
            for x, p, e in zip(solver.space.mesh.interfaces, sample.phi, sample.e_nodes):
                w.writerow([f"{x:.10g}", f"{p:.12e}", f"{e:.12e}"])
        paths["potential_field"] = epath

    return {"paths": paths, "result": res, "solver": solver}


def _write_profile_csv(path, space, c, name):
    vals = space.eval_quad(c)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", name])
        for x, v in zip(space.quad_x.ravel(), vals.ravel()):
            w.writerow([f"{x:.10g}", f"{v:.12e}"])


def _write_fgrid_csv(path, solver: Solver, state: ParityState):
    f = solver.reconstruct_f(state)
    centers = solver.space.mesh.centers
    vals = np.einsum("imv,m->iv", f, solver.space.phiC)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x_center", "v", "f"])
        for i, x in enumerate(centers):
            for ell, v in enumerate(solver.grid.nodes):
                w.writerow([f"{x:.10g}", f"{v:.10g}", f"{vals[i, ell]:.12e}"])


def _write_diagnostics_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(DIAG_COLUMNS)
        for row in rows:
            w.writerow(
                [int(row[0])] + [f"{x:.12e}" for x in row[1:5]]
                + [int(row[5]), int(row[6]), f"{row[7]:.12e}"]
            )


def run_experiment(cfg: ExperimentConfig, out_dir: str | None = None) -> dict:
    out_dir = out_dir or cfg.out_dir
    if cfg.experiment == "accuracy":
        return run_accuracy_study(cfg, out_dir)
    if cfg.experiment == "ap_sweep":
        return run_ap_sweep(cfg, out_dir)
    return run_example(cfg, out_dir)
