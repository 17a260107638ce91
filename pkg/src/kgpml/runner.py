"""Experiment orchestration: single runs, convergence studies, sweeps.

Every run writes one CSV per experiment plus a manifest.  CSV bytes are
a pure function of the configuration: float cells use a fixed 16-digit
scientific format, the resolved configuration is embedded as a
``#``-prefixed header block, and sweeps enumerate their grid in a fixed
order, so identical configurations produce identical files.  The
manifest (JSON, written beside the CSVs) additionally records wall
clock and library versions and is exempt from the byte-identity
guarantee.

CSV schema of a single run, one row per snapshot:

    t, e2_pml, einf_pml, HI_pml, HI_ref, gmres_iters, umax

Error and reference columns hold ``nan`` when no reference solve was
requested.  The window-energy derivative uses the stepper's own
velocity for the first-order formulation and the centered two-level
difference for the second-order one (the run takes one extra step past
the final time to form it).
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product
from pathlib import Path

import numpy as np

from . import __version__
from .absorption import sample_profile
from .config import SolverConfig, serialize_config
from .errors import ConfigurationError
from .metrics import (
    ReferenceRun,
    energy_HI,
    reference_solve,
    rel_l2_error,
    rel_linf_error,
    restrict_field,
)
from .pml1_ewi import Pml1Params, Pml1Stepper, init_pml1
from .pml2_fd import Pml2Params, Pml2Stepper, stability_probe
from .spectral import Field

__all__ = ["RunManifest", "TrajectorySample", "simulate", "run_single", "run_convergence", "run_sweep"]

_FLOAT_FMT = "%.16e"


@dataclass
class TrajectorySample:
    """One snapshot of a truncated-domain run."""

    index: int
    t: float
    u: Field
    u_dot: Field
    gmres_iterations: int = 0


@dataclass
class RunManifest:
    """Resolved configuration, environment, and output inventory."""

    resolved_config: str
    versions: dict
    wall_clock_seconds: float
    gmres_iterations: list
    outputs: list

    def write(self, path: Path) -> None:
        payload = {
            "resolved_config": self.resolved_config.splitlines(),
            "versions": self.versions,
            "wall_clock_seconds": self.wall_clock_seconds,
            "gmres_iterations": self.gmres_iterations,
            "outputs": self.outputs,
        }
        path.write_text(json.dumps(payload, indent=2) + "\n")


def _versions() -> dict:
    return {"kgpml": __version__, "numpy": np.__version__}


def _snapshot_indices(nsteps: int, stride: int) -> list[int]:
    idx = list(range(0, nsteps + 1, stride))
    if idx[-1] != nsteps:
        idx.append(nsteps)
    return idx


def _build_pml1(cfg: SolverConfig):
    grid = cfg.make_grid()
    profile = sample_profile(grid, cfg.profile_spec())
    params = Pml1Params(cfg.lam, profile, cfg.tau, eps=cfg.eps)
    return grid, Pml1Stepper(grid, params, cfg.alpha)


def _build_pml2(cfg: SolverConfig):
    grid = cfg.make_grid()
    base = grid if cfg.dimension == 1 else grid.x
    profile = sample_profile(base, cfg.profile_spec())
    params = Pml2Params(
        cfg.lam,
        profile,
        cfg.tau,
        eps=cfg.eps,
        dimension=cfg.dimension,
        omega=cfg.omega,
        demo_complex_shift=cfg.demo_stability,
    )
    return grid, Pml2Stepper(grid, params, gmres_tol=cfg.gmres_tol, linear_solver=cfg.linear_solver)


def simulate(cfg: SolverConfig) -> list[TrajectorySample]:
    """Run the configured truncated-domain solver, returning snapshots at
    indices 0, stride, 2*stride, ..., final."""
    nsteps = int(round(cfg.t_final / cfg.tau))
    wanted = set(_snapshot_indices(nsteps, cfg.snapshot_stride)) if nsteps > 0 else {0}
    samples: list[TrajectorySample] = []

    if cfg.formulation == "pml1":
        grid, stepper = _build_pml1(cfg)
        state = init_pml1(*cfg.initial_data(grid), cfg.alpha)
        if 0 in wanted:
            samples.append(TrajectorySample(0, 0.0, state.u, state.v))
        for n in range(1, nsteps + 1):
            state = stepper.step(state)
            if n in wanted:
                samples.append(TrajectorySample(n, n * cfg.tau, state.u, state.v))
        return samples

    grid, stepper = _build_pml2(cfg)
    u0, v0 = cfg.initial_data(grid)
    if 0 in wanted:
        samples.append(TrajectorySample(0, 0.0, u0, v0))
    if nsteps == 0:
        return samples
    state = stepper.first_step(u0, v0)
    # the centered velocity at level m needs u^{m+1}: run one step past the end
    prev_u, curr_u = u0, state.u_curr
    curr_iters = 0
    for n in range(2, nsteps + 2):
        state, report = stepper.step(state)
        m = n - 1
        if m in wanted:
            u_dot = Field(grid, (state.u_curr.values - prev_u.values) / (2 * cfg.tau))
            samples.append(TrajectorySample(m, m * cfg.tau, curr_u, u_dot, curr_iters))
        prev_u, curr_u = curr_u, state.u_curr
        curr_iters = report.iterations
    samples.sort(key=lambda s: s.index)
    return samples


def _error_columns(cfg: SolverConfig, samples, reference: ReferenceRun | None):
    rows = []
    for k, s in enumerate(samples):
        e2 = einf = hi_ref = float("nan")
        if reference is not None:
            ref_u = restrict_field(reference.fields[k], s.u.grid)
            try:
                e2 = rel_l2_error(s.u, ref_u, cfg.L)
                einf = rel_linf_error(s.u, ref_u, cfg.L)
            except ValueError:
                pass  # reference vanishes on the window: leave nan
            hi_ref = energy_HI(reference.fields[k], reference.velocities[k], cfg.lam, cfg.L)
        hi = energy_HI(s.u, s.u_dot, cfg.lam, cfg.L)
        rows.append((s.t, e2, einf, hi, hi_ref, s.gmres_iterations, s.u.max_norm()))
    return rows


def _write_csv(path: Path, cfg: SolverConfig, columns: list[str], rows: list[tuple]) -> None:
    lines = [f"# {line}" for line in serialize_config(cfg).splitlines()]
    lines.append(",".join(columns))
    for row in rows:
        cells = []
        for value in row:
            if isinstance(value, (int, np.integer)):
                cells.append(str(int(value)))
            else:
                cells.append(_FLOAT_FMT % float(value))
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")


_RUN_COLUMNS = ["t", "e2_pml", "einf_pml", "HI_pml", "HI_ref", "gmres_iters", "umax"]


def run_single(cfg: SolverConfig, out_dir: str | Path | None = None) -> RunManifest:
    """Execute one run (plus its reference when requested) and write
    ``run.csv``; in stability-demo mode, write the max-norm series."""
    started = time.perf_counter()
    out = Path(out_dir if out_dir is not None else cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "run.csv"

    if cfg.t_final <= 0.0:
        _write_csv(csv_path, cfg, _RUN_COLUMNS, [])
        manifest = RunManifest(serialize_config(cfg), _versions(), time.perf_counter() - started, [], [str(csv_path)])
        manifest.write(out / "manifest.json")
        return manifest

    if cfg.demo_stability:
        grid, stepper = _build_pml2(cfg)
        u0, v0 = cfg.initial_data(grid)
        times, norms = stability_probe(u0, v0, stepper.params, cfg.t_final, gmres_tol=cfg.gmres_tol)
        rows = [
            (t, float("nan"), float("nan"), float("nan"), float("nan"), 0, m)
            for t, m in zip(times, norms)
        ]
        _write_csv(csv_path, cfg, _RUN_COLUMNS, rows)
        manifest = RunManifest(serialize_config(cfg), _versions(), time.perf_counter() - started, [], [str(csv_path)])
        manifest.write(out / "manifest.json")
        return manifest

    samples = simulate(cfg)
    reference = reference_solve(cfg) if cfg.reference_enlargement >= 2 else None
    rows = _error_columns(cfg, samples, reference)
    _write_csv(csv_path, cfg, _RUN_COLUMNS, rows)
    manifest = RunManifest(
        serialize_config(cfg),
        _versions(),
        time.perf_counter() - started,
        [s.gmres_iterations for s in samples],
        [str(csv_path)],
    )
    manifest.write(out / "manifest.json")
    return manifest


# ---------------------------------------------------------------------------
# convergence studies

def final_field(cfg: SolverConfig) -> Field:
    """Field at t = T_final with snapshots disabled along the way."""
    quiet = cfg.with_updates(snapshot_stride=max(1, int(round(cfg.t_final / cfg.tau))))
    samples = simulate(quiet)
    return samples[-1].u


def run_convergence(
    cfg: SolverConfig,
    axis: str,
    levels: int,
    out_dir: str | Path | None = None,
    reference_tau: float = 1e-4,
) -> RunManifest:
    """Self-convergence study against a fine-mesh reference run.

    axis = 'tau': halve the step ``levels`` times from cfg.tau, against
    a run at ``reference_tau`` on the same grid.
    axis = 'h':   halve the mesh ``levels`` times from cfg.N, at fixed
    cfg.tau, against a run on a 4x finer grid.
    Observed orders are reported between consecutive levels; a single
    level yields a degenerate table without orders.
    """
    started = time.perf_counter()
    if levels < 1:
        raise ConfigurationError("levels must be >= 1")
    if axis not in ("tau", "h"):
        raise ConfigurationError(f"axis must be tau or h, got {axis!r}")
    out = Path(out_dir if out_dir is not None else cfg.output)
    out.mkdir(parents=True, exist_ok=True)

    if axis == "tau":
        taus = [cfg.tau / 2**i for i in range(levels)]
        ref_tau = cfg.t_final / round(cfg.t_final / reference_tau)
        ref = final_field(cfg.with_updates(tau=ref_tau))
        runs = [(tau, final_field(cfg.with_updates(tau=tau))) for tau in taus]
        param_name = "tau"
    else:
        ns = [cfg.N * 2**i for i in range(levels)]
        ref = final_field(cfg.with_updates(N=ns[-1] * 4))
        runs = [(n, final_field(cfg.with_updates(N=n))) for n in ns]
        param_name = "N"

    rows = []
    errors = []
    for value, f in runs:
        err_inf = rel_linf_error(f, restrict_field(ref, f.grid), cfg.L)
        err_l2 = rel_l2_error(f, restrict_field(ref, f.grid), cfg.L)
        errors.append(err_inf)
        k = len(errors) - 1
        if k == 0:
            order = float("nan")
        else:
            prev = errors[k - 1]
            order = np.log2(prev / errors[k]) if errors[k] > 0 and prev > 0 else float("nan")
        rows.append((float(value), err_inf, err_l2, order))

    csv_path = out / f"convergence_{axis}.csv"
    _write_csv(csv_path, cfg, [param_name, "err_inf", "err_l2", "observed_order"], rows)
    manifest = RunManifest(serialize_config(cfg), _versions(), time.perf_counter() - started, [], [str(csv_path)])
    manifest.write(out / "manifest.json")
    return manifest


def observed_orders(errors: list[float]) -> list[float]:
    """Pairwise orders for a halving ladder."""
    return [float(np.log2(a / b)) for a, b in zip(errors, errors[1:])]


# ---------------------------------------------------------------------------
# parameter sweeps

def _sweep_point(args) -> tuple:
    cfg, names, values = args
    updates = dict(zip(names, values))
    point_cfg = cfg.with_updates(sweep={}, **updates)
    f = final_field(point_cfg)
    ref = reference_solve(
        point_cfg.with_updates(snapshot_stride=max(1, int(round(point_cfg.t_final / point_cfg.tau))))
    )
    ref_u = restrict_field(ref.fields[-1], f.grid)
    return values + (rel_l2_error(f, ref_u, cfg.L), rel_linf_error(f, ref_u, cfg.L))


def run_sweep(
    cfg: SolverConfig,
    grid: dict | None = None,
    out_dir: str | Path | None = None,
    workers: int | None = None,
) -> RunManifest:
    """One row of t = T_final errors per point of the parameter grid.

    The grid is the cartesian product of the per-parameter value lists
    (the config's ``[sweep]`` section unless passed explicitly).  Points
    run independently; ``workers > 1`` fans them out over processes and
    produces byte-identical output to the serial path.
    """
    started = time.perf_counter()
    axes = dict(cfg.sweep) if grid is None else dict(grid)
    if not axes:
        raise ConfigurationError("sweep requires a non-empty parameter grid")
    for key, values in axes.items():
        if len(tuple(values)) == 0:
            raise ConfigurationError(f"sweep axis {key!r} has no values")
    out = Path(out_dir if out_dir is not None else cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    nworkers = workers if workers is not None else cfg.sweep_workers

    names = tuple(sorted(axes))
    points = [(cfg, names, combo) for combo in product(*(tuple(axes[k]) for k in names))]
    if nworkers > 1:
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            rows = list(pool.map(_sweep_point, points))
    else:
        rows = [_sweep_point(p) for p in points]

    csv_path = out / "sweep.csv"
    _write_csv(csv_path, cfg, list(names) + ["e2_pml", "einf_pml"], rows)
    manifest = RunManifest(serialize_config(cfg), _versions(), time.perf_counter() - started, [], [str(csv_path)])
    manifest.write(out / "manifest.json")
    return manifest
