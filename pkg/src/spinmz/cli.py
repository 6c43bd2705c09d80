"""Command-line front end: named experiments with CSV/JSON table output.

Experiments map one-to-one onto the library operations; the CLI only
resolves configuration (defaults < config file < flags), fans scan points
out over a thread pool, and serializes the result deterministically.
CSV output is byte-stable for identical configuration: fixed column
order, 12-significant-digit floats, ``\\n`` line endings. The JSON format
carries the same table plus a metadata block with every resolved setting.

A ``diff`` subcommand compares two output files within numeric
tolerances, for cross-platform regression checks.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import __version__
from .evolve import (
    PropagatorConfig,
    Schedule,
    propagate,
    schedule_single_step_B,
    schedule_single_step_J,
    schedule_two_step,
)
from .hamiltonian import IsingParams
from .interferometer import (
    InterferometerConfig,
    bias_scan,
    default_phi_grid,
    fringe_scan,
    ideal_fringe,
)
from .observables import exact_spectrum, parity_expectation
from .statevec import SpinBasis, make_product_x_state

EXPERIMENTS = (
    "populations",
    "fidelity-scan",
    "scheme-compare",
    "fringe",
    "sensitivity",
    "bias-scan",
    "spectrum",
)
SCHEMES = ("single-J", "single-B", "two-step")
THREADS_ENV = "SPINMZ_THREADS"

# grid sizes when --points is not given; the sensitivity estimate uses a
# denser fringe so the central-difference bias stays below 1e-3 even at N=1
DEFAULT_FRINGE_POINTS = 64
DEFAULT_SENSITIVITY_POINTS = 256


@dataclass
class ExperimentConfig:
    """Resolved settings for one experiment run."""

    experiment: str
    n: tuple[int, ...] = (4,)
    tau: float = 5.0
    j0: float = 1.0
    b0: float = 1.0
    delta: float = 0.0
    omega0: float = 1.0
    dt: float = 1e-3
    method: str = "rk4"
    renormalize_every: int = 100
    sample_every: int = 10
    scheme: str = "two-step"
    b_fixed: float = 0.4
    j_fixed: float = 0.4
    points: int | None = None
    ideal_input: bool = True
    tau_grid: tuple[float, ...] = (2.0, 4.0, 6.0, 8.0, 10.0)
    delta_max: float = 0.1
    delta_points: int = 21
    k_levels: int = 4
    threads: int | None = None
    seed: int = 0
    out: str | None = None
    format: str = "csv"

    def propagator(self) -> PropagatorConfig:
        return PropagatorConfig(dt=self.dt, method=self.method,
                                renormalize_every=self.renormalize_every)

    def interferometer(self, n_spins: int, delta: float | None = None,
                       ) -> InterferometerConfig:
        return InterferometerConfig(
            n_spins=n_spins,
            tau=self.tau,
            j0=self.j0,
            b0=self.b0,
            omega0=self.omega0,
            propagator=self.propagator(),
            delta_bias=self.delta if delta is None else delta,
        )

    def schedule(self, scheme: str) -> Schedule:
        """Sweep program for a named scheme, all over total time 2*tau."""
        if scheme == "two-step":
            return schedule_two_step(self.tau, self.j0, self.b0, self.delta)
        if scheme == "single-J":
            # J ramps to twice the reference coupling over the full 2*tau
            return schedule_single_step_J(2.0 * self.tau, self.b_fixed,
                                          2.0 * self.j0, self.delta)
        if scheme == "single-B":
            return schedule_single_step_B(2.0 * self.tau, self.j_fixed,
                                          2.0 * self.b0, self.delta)
        raise ValueError(f"unknown scheme {scheme!r}, expected one of {SCHEMES}")


@dataclass
class ResultTable:
    """Rectangular numeric table plus reproducibility metadata."""

    columns: list[str]
    rows: list[list[float]]
    meta: dict

    def column(self, name: str) -> np.ndarray:
        return np.array([row[self.columns.index(name)] for row in self.rows])


def _resolved_meta(cfg: ExperimentConfig, wall_time: float) -> dict:
    meta = {k: (list(v) if isinstance(v, tuple) else v)
            for k, v in asdict(cfg).items()}
    meta["version"] = __version__
    meta["wall_time_s"] = round(wall_time, 3)
    return meta


def _thread_count(cfg: ExperimentConfig, n_jobs: int) -> int:
    if cfg.threads is not None:
        return max(1, cfg.threads)
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return max(1, min(n_jobs, os.cpu_count() or 1))


def _parallel_map(fn, jobs, threads):
    if threads <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, jobs))


def _trace_for(cfg: ExperimentConfig, n_spins: int, scheme: str):
    psi0 = make_product_x_state(SpinBasis(n_spins), +1)
    return propagate(psi0, cfg.schedule(scheme), cfg.propagator(),
                     sample_every=cfg.sample_every)


def run_populations(cfg: ExperimentConfig) -> ResultTable:
    """FM populations and NOON fidelity along one sweep scheme, per N."""
    if cfg.scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {cfg.scheme!r}, expected one of {SCHEMES}")
    threads = _thread_count(cfg, len(cfg.n))
    traces = _parallel_map(lambda n: _trace_for(cfg, n, cfg.scheme),
                           list(cfg.n), threads)
    columns = ["t"]
    data = [traces[0].times]
    for n, tr in zip(cfg.n, traces):
        columns += [f"p_up_n{n}", f"p_down_n{n}", f"p_sum_n{n}", f"fidelity_n{n}"]
        data += [tr.p_all_up, tr.p_all_down, tr.p_all_up + tr.p_all_down,
                 tr.noon_fidelity]
    rows = np.column_stack(data).tolist()
    return ResultTable(columns, rows, {})


def run_fidelity_scan(cfg: ExperimentConfig) -> ResultTable:
    """Final NOON fidelity of the two-step sweep versus total time 2*tau."""
    jobs = [(n, two_tau) for n in cfg.n for two_tau in cfg.tau_grid]
    threads = _thread_count(cfg, len(jobs))

    def one(job):
        n, two_tau = job
        psi0 = make_product_x_state(SpinBasis(n), +1)
        sched = schedule_two_step(two_tau / 2.0, cfg.j0, cfg.b0, cfg.delta)
        tr = propagate(psi0, sched, cfg.propagator(), sample_every=10**9)
        return tr.noon_fidelity[-1]

    fids = _parallel_map(one, jobs, threads)
    by_key = dict(zip(jobs, fids))
    columns = ["two_tau"] + [f"fidelity_n{n}" for n in cfg.n]
    rows = [[two_tau] + [by_key[(n, two_tau)] for n in cfg.n]
            for two_tau in cfg.tau_grid]
    return ResultTable(columns, rows, {})


def run_scheme_compare(cfg: ExperimentConfig) -> ResultTable:
    """All three sweep schemes side by side for one N at equal total time."""
    n = cfg.n[0]
    threads = _thread_count(cfg, len(SCHEMES))
    traces = _parallel_map(lambda s: _trace_for(cfg, n, s), list(SCHEMES),
                           threads)
    lengths = {len(tr.times) for tr in traces}
    if len(lengths) != 1:
        raise RuntimeError("scheme traces sampled on different grids")
    columns = ["t"]
    data = [traces[0].times]
    for scheme, tr in zip(SCHEMES, traces):
        tag = scheme.replace("-", "_")
        columns += [f"p_sum_{tag}", f"fidelity_{tag}"]
        data += [tr.p_all_up + tr.p_all_down, tr.noon_fidelity]
    return ResultTable(columns, np.column_stack(data).tolist(), {})


def _scan_for(cfg: ExperimentConfig, n: int, points: int):
    grid = default_phi_grid(n, points)
    if cfg.ideal_input:
        return ideal_fringe(n, grid)
    return fringe_scan(cfg.interferometer(n), grid, ideal_input=False)


def run_fringe(cfg: ExperimentConfig) -> ResultTable:
    """p1 versus fringe phase for the first N in the list."""
    n = cfg.n[0]
    scan = _scan_for(cfg, n, cfg.points or DEFAULT_FRINGE_POINTS)
    columns = ["phi", "p1", "p1_analytic"]
    rows = np.column_stack(
        [scan.phi_values, scan.p1_values, scan.p1_analytic]
    ).tolist()
    return ResultTable(columns, rows,
                       {"sensitivity_at_optimum": scan.sensitivity_at_optimum})


def run_sensitivity(cfg: ExperimentConfig) -> ResultTable:
    """Extracted phase sensitivity per N, against the 1/N limit."""
    points = cfg.points or DEFAULT_SENSITIVITY_POINTS
    threads = _thread_count(cfg, len(cfg.n))
    scans = _parallel_map(lambda n: _scan_for(cfg, n, points), list(cfg.n),
                          threads)
    columns = ["n", "delta_phi", "heisenberg_limit"]
    rows = [[float(n), scan.sensitivity_at_optimum, 1.0 / n]
            for n, scan in zip(cfg.n, scans)]
    return ResultTable(columns, rows, {})


def run_bias_scan(cfg: ExperimentConfig) -> ResultTable:
    """BS1 outcome versus longitudinal bias for the first N in the list."""
    n = cfg.n[0]
    grid = np.linspace(-cfg.delta_max, cfg.delta_max, cfg.delta_points)
    threads = _thread_count(cfg, len(grid))
    base = cfg.interferometer(n)

    def one(d):
        res = bias_scan(base, np.array([d]))
        return [res.delta_over_j0[0], res.p_up[0], res.p_down[0],
                res.noon_fidelity[0]]

    rows = _parallel_map(one, [float(d) for d in grid], threads)
    return ResultTable(["delta_over_j0", "p_up", "p_down", "noon_fidelity"],
                       rows, {})


def run_spectrum(cfg: ExperimentConfig) -> ResultTable:
    """Lowest eigenvalues and parities of the chain Hamiltonian."""
    n = cfg.n[0]
    params = IsingParams(n, cfg.j0, cfg.b0, cfg.delta)
    spec = exact_spectrum(params, cfg.k_levels)
    rows = [
        [float(i), spec.eigenvalues[i], parity_expectation(spec.eigenvectors[i])]
        for i in range(cfg.k_levels)
    ]
    return ResultTable(["level", "energy", "parity"], rows, {})


_RUNNERS = {
    "populations": run_populations,
    "fidelity-scan": run_fidelity_scan,
    "scheme-compare": run_scheme_compare,
    "fringe": run_fringe,
    "sensitivity": run_sensitivity,
    "bias-scan": run_bias_scan,
    "spectrum": run_spectrum,
}


def run_experiment(cfg: ExperimentConfig) -> ResultTable:
    if cfg.experiment not in _RUNNERS:
        raise ValueError(
            f"unknown experiment {cfg.experiment!r}, expected one of {EXPERIMENTS}"
        )
    start = time.perf_counter()
    table = _RUNNERS[cfg.experiment](cfg)
    extra = table.meta
    table.meta = _resolved_meta(cfg, time.perf_counter() - start)
    table.meta.update(extra)
    return table


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def render_csv(table: ResultTable) -> str:
    lines = [",".join(table.columns)]
    lines += [",".join(_fmt(x) for x in row) for row in table.rows]
    return "\n".join(lines) + "\n"


def render_json(table: ResultTable) -> str:
    payload = {
        "meta": table.meta,
        "columns": table.columns,
        "rows": [[float(x) for x in row] for row in table.rows],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_output(table: ResultTable, path: str | None, fmt: str) -> None:
    """Render and write atomically; stdout when no path is given."""
    if fmt == "csv":
        text = render_csv(table)
    elif fmt == "json":
        text = render_json(table)
    else:
        raise ValueError(f"unknown format {fmt!r}, expected csv or json")
    if path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".spinmz-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_table(path: str) -> ResultTable:
    """Read back a CSV or JSON table written by this tool."""
    with open(path) as fh:
        text = fh.read()
    if path.endswith(".json") or text.lstrip().startswith("{"):
        payload = json.loads(text)
        return ResultTable(payload["columns"], payload["rows"],
                           payload.get("meta", {}))
    lines = [ln for ln in text.splitlines() if ln]
    columns = lines[0].split(",")
    rows = [[float(x) for x in ln.split(",")] for ln in lines[1:]]
    return ResultTable(columns, rows, {})


def diff_tables(a: ResultTable, b: ResultTable, rtol: float, atol: float) -> list[str]:
    """Human-readable list of mismatches; empty when tables agree."""
    problems = []
    if a.columns != b.columns:
        problems.append(f"column mismatch: {a.columns} vs {b.columns}")
        return problems
    if len(a.rows) != len(b.rows):
        problems.append(f"row count mismatch: {len(a.rows)} vs {len(b.rows)}")
        return problems
    x = np.asarray(a.rows, dtype=np.float64)
    y = np.asarray(b.rows, dtype=np.float64)
    bad = ~np.isclose(x, y, rtol=rtol, atol=atol)
    for r, c in zip(*np.nonzero(bad)):
        problems.append(
            f"row {r}, column {a.columns[c]}: {x[r, c]!r} vs {y[r, c]!r}"
        )
        if len(problems) >= 20:
            problems.append("... (truncated)")
            break
    return problems


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(","))


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(","))


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="spinmz",
        description="Adiabatic Mach-Zehnder interferometry experiments "
                    "on a transverse-field Ising chain.",
    )
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", help="JSON file with flat key/value settings "
                                    "(flags override the file)")
    p.add_argument("--n", type=_int_list, help="comma-separated chain sizes")
    p.add_argument("--tau", type=float, help="per-step sweep duration")
    p.add_argument("--j0", type=float, help="coupling endpoint")
    p.add_argument("--b0", type=float, help="field endpoint")
    p.add_argument("--delta", type=float, help="longitudinal bias")
    p.add_argument("--omega0", type=float, help="free precession frequency")
    p.add_argument("--dt", type=float, help="integrator step bound")
    p.add_argument("--method", choices=("rk4", "expmid"))
    p.add_argument("--renormalize-every", type=int, dest="renormalize_every")
    p.add_argument("--sample-every", type=int, dest="sample_every")
    p.add_argument("--scheme", choices=SCHEMES)
    p.add_argument("--b-fixed", type=float, dest="b_fixed",
                   help="constant B of the single-J scheme")
    p.add_argument("--j-fixed", type=float, dest="j_fixed",
                   help="constant J of the single-B scheme")
    p.add_argument("--points", type=int, help="fringe grid points")
    inp = p.add_mutually_exclusive_group()
    inp.add_argument("--ideal", dest="ideal_input", action="store_true",
                     default=None, help="exact NOON input for fringes")
    inp.add_argument("--adiabatic", dest="ideal_input", action="store_false",
                     default=None, help="swept NOON input for fringes")
    p.add_argument("--tau-grid", type=_float_list, dest="tau_grid",
                   help="comma-separated total times 2*tau")
    p.add_argument("--delta-max", type=float, dest="delta_max")
    p.add_argument("--delta-points", type=int, dest="delta_points")
    p.add_argument("--k-levels", type=int, dest="k_levels")
    p.add_argument("--threads", type=int,
                   help=f"scan parallelism (default: auto, env {THREADS_ENV})")
    p.add_argument("--seed", type=int, help="reserved; echoed in metadata")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"))
    return p


def _build_diff_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spinmz diff",
                                description="Numeric comparison of two "
                                            "result tables.")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--rtol", type=float, default=1e-9)
    p.add_argument("--atol", type=float, default=1e-12)
    return p


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Defaults, then the config file, then explicit flags."""
    settings: dict = {}
    if args.config:
        with open(args.config) as fh:
            file_cfg = json.load(fh)
        if not isinstance(file_cfg, dict):
            raise ValueError("config file must hold a flat JSON object")
        known = {f.name for f in fields(ExperimentConfig)}
        unknown = set(file_cfg) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        settings.update(file_cfg)
    for f in fields(ExperimentConfig):
        val = getattr(args, f.name, None)
        if val is not None:
            settings[f.name] = val
    settings["experiment"] = args.experiment
    for key in ("n", "tau_grid"):
        if key in settings and isinstance(settings[key], list):
            settings[key] = tuple(settings[key])
    if isinstance(settings.get("n"), int):
        settings["n"] = (settings["n"],)
    cfg = ExperimentConfig(**settings)
    if not cfg.n:
        raise ValueError("need at least one chain size")
    return cfg


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        if argv and argv[0] == "diff":
            args = _build_diff_parser().parse_args(argv[1:])
            problems = diff_tables(load_table(args.left),
                                   load_table(args.right),
                                   args.rtol, args.atol)
            for line in problems:
                print(line, file=sys.stderr)
            return 1 if problems else 0
        args = _build_parser().parse_args(argv)
        cfg = resolve_config(args)
        table = run_experiment(cfg)
        write_output(table, cfg.out, cfg.format)
        return 0
    except SystemExit as exc:  # argparse validation
        return int(exc.code or 0)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
