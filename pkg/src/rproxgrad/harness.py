"""Experiment harness: problem grids, solver matrices, CSV reports.

An experiment is a grid over ``(n, p, m, lambda)`` cells, each repeated
with fresh data. Within one (cell, repetition) job the plain proximal
gradient solver always runs first; its final objective value becomes the
``target_value`` at which the accelerated solvers stop, mirroring the
protocol the solvers are benchmarked under.

Reports are CSV with a fixed schema (columns
``variant,n,p,m,lambda,seed,solver,iterations,final_value,sparsity,seconds,termination``),
written append-only so a crashed run leaves parseable partial output.
Every job draws its data from an RNG stream derived from
``(seed, cell_index, repetition)``, so results are identical no matter how
many workers execute the grid.
"""

from __future__ import annotations

import itertools
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, RproxgradError
from .solvers import (
    IterationRecord,
    RunResult,
    default_config,
    parpg,
    rpg,
    varpg,
)
from .spca import (
    VARIANTS,
    build_spca_problem,
    descent_lipschitz,
    generate_random_data,
    generate_synthetic_data,
    initial_point,
)

__all__ = [
    "REPORT_COLUMNS",
    "TRACE_COLUMNS",
    "ExperimentConfig",
    "ExperimentReport",
    "run_experiment",
    "emit_trace",
    "read_trace",
    "load_config",
]

REPORT_COLUMNS = (
    "variant", "n", "p", "m", "lambda", "seed", "solver",
    "iterations", "final_value", "sparsity", "seconds", "termination",
)
TRACE_COLUMNS = ("k", "F", "eta_norm", "restarted", "linesearch_steps", "seconds")

SOLVER_FUNCTIONS = {"rpg": rpg, "varpg": varpg, "parpg": parpg}
DATA_KINDS = ("random", "synthetic")

#: Environment variable overriding the configured worker count.
WORKERS_ENV_VAR = "RPROXGRAD_WORKERS"


@dataclass
class ExperimentConfig:
    """Declarative description of one experiment grid.

    ``solver_options`` apply to every solver; ``per_solver_options`` maps a
    solver name to overrides that win over the shared ones. Both accept any
    :class:`~rproxgrad.solvers.SolverConfig` field.
    """

    variant: str = "oblique"
    n_values: tuple = (32,)
    p_values: tuple = (4,)
    m_values: tuple = (20,)
    lambda_values: tuple = (2.0,)
    data: str = "random"
    repetitions: int = 1
    seed: int = 0
    solvers: tuple = ("rpg",)
    solver_options: dict = field(default_factory=dict)
    per_solver_options: dict = field(default_factory=dict)
    output_dir: Optional[str] = None
    emit_traces: bool = False
    workers: int = 1

    def validate(self) -> "ExperimentConfig":
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.data not in DATA_KINDS:
            raise ConfigError(f"data must be one of {DATA_KINDS}, got {self.data!r}")
        for name, grid in (
            ("n_values", self.n_values), ("p_values", self.p_values),
            ("m_values", self.m_values), ("lambda_values", self.lambda_values),
        ):
            if not grid:
                raise ConfigError(f"{name} must be nonempty")
        if self.repetitions < 1:
            raise ConfigError(f"repetitions must be >= 1, got {self.repetitions}")
        if not self.solvers:
            raise ConfigError("solver list must be nonempty")
        for s in self.solvers:
            if s not in SOLVER_FUNCTIONS:
                raise ConfigError(
                    f"unknown solver {s!r}; expected subset of {tuple(SOLVER_FUNCTIONS)}"
                )
        for s in self.per_solver_options:
            if s not in SOLVER_FUNCTIONS:
                raise ConfigError(f"per_solver_options references unknown solver {s!r}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        return self

    def cells(self) -> list:
        return list(itertools.product(
            self.n_values, self.p_values, self.m_values, self.lambda_values
        ))

    @classmethod
    def from_mapping(cls, mapping: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(mapping) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**{k: _coerce(k, v) for k, v in mapping.items()})
        return cfg.validate()


def _coerce(key, value):
    if key.endswith("_values") and not isinstance(value, (list, tuple)):
        return (value,)
    if key in ("solvers",) and isinstance(value, str):
        return tuple(part.strip() for part in value.split(",") if part.strip())
    if isinstance(value, list):
        return tuple(value)
    return value


def load_config(path) -> ExperimentConfig:
    """Read an experiment config from a YAML file (flat keys matching the
    :class:`ExperimentConfig` fields; see the schema in the README)."""
    import yaml

    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path) as handle:
            raw = yaml.safe_load(handle)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config root must be a mapping, got {type(raw).__name__}")
    return ExperimentConfig.from_mapping(raw)


@dataclass
class ExperimentReport:
    """All result rows plus per-(cell, solver) aggregates."""

    rows: list
    aggregates: list
    report_path: Optional[str] = None

    def row_count(self) -> int:
        return len(self.rows)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _job_data(variant, n, p, m, lam, data_kind, root_seed, cell_index, rep):
    stream_seed = [int(root_seed), int(cell_index), int(rep)]
    if data_kind == "random":
        a = generate_random_data(m, n, stream_seed)
    else:
        a = generate_synthetic_data(m, n, stream_seed)
    problem = build_spca_problem(variant, a, p, lam)
    return problem, initial_point(a, p)


def _run_job(variant, cell, cell_index, rep, data_kind, root_seed,
             solver_names, solver_options, per_solver_options, clock=None):
    """Run all requested solvers on one (cell, repetition); returns
    (rows, results-by-solver). Never raises on solver failure."""
    n, p, m, lam = cell
    clock = clock or time.perf_counter
    problem, x0 = _job_data(variant, n, p, m, lam, data_kind, root_seed, cell_index, rep)

    def make_config(name, **extra):
        options = dict(solver_options)
        options.update(per_solver_options.get(name, {}))
        options.update(extra)
        # "descent_safe" resolves to the per-instance curvature bound
        for key in ("lipschitz", "lipschitz_estimate"):
            if options.get(key) == "descent_safe":
                options[key] = descent_lipschitz(problem, x0)
        return default_config(problem, **options)

    rows, results = [], {}

    def record(name, outcome, seconds):
        if isinstance(outcome, RunResult):
            results[name] = outcome
            row = dict(
                variant=variant, n=n, p=p, m=m, seed=root_seed, solver=name,
                iterations=outcome.iterations, final_value=outcome.final_value,
                sparsity=outcome.sparsity, seconds=max(seconds, 1e-9),
                termination=outcome.termination,
            )
        else:
            row = dict(
                variant=variant, n=n, p=p, m=m, seed=root_seed, solver=name,
                iterations=0, final_value=float("nan"), sparsity=float("nan"),
                seconds=max(seconds, 1e-9),
                termination=f"failed:{type(outcome).__name__}",
            )
        row["lambda"] = lam
        rows.append(row)

    # the plain solver always runs first: its final value is the target the
    # accelerated solvers stop at
    start = clock()
    try:
        baseline = rpg(problem, x0, make_config("rpg"), clock=clock)
    except (RproxgradError, ValueError, TypeError) as exc:
        baseline = exc
    base_seconds = clock() - start
    if "rpg" in solver_names:
        record("rpg", baseline, base_seconds)
    target = baseline.final_value if isinstance(baseline, RunResult) else None

    for name in solver_names:
        if name == "rpg":
            continue
        start = clock()
        try:
            outcome = SOLVER_FUNCTIONS[name](
                problem, x0, make_config(name, target_value=target), clock=clock
            )
        except (RproxgradError, ValueError, TypeError) as exc:
            outcome = exc
        record(name, outcome, clock() - start)

    ordered = [row for name in solver_names for row in rows if row["solver"] == name]
    return ordered, results


def run_experiment(config: ExperimentConfig,
                   clock: Callable[[], float] = time.perf_counter) -> ExperimentReport:
    """Execute the grid described by ``config``.

    Writes ``report.csv`` (and per-run trace files when ``emit_traces`` is
    set) under ``config.output_dir`` if given, appending rows as jobs
    finish. With ``workers > 1`` the jobs run in a process pool; the row
    order and all numeric content are identical to a sequential run
    because every job owns its own RNG stream. The injectable ``clock`` is
    honored only in the sequential path.
    """
    config.validate()
    workers = int(os.environ.get(WORKERS_ENV_VAR, config.workers))
    cells = config.cells()
    jobs = [
        (cell_index, rep)
        for cell_index in range(len(cells))
        for rep in range(config.repetitions)
    ]

    out_dir = Path(config.output_dir) if config.output_dir else None
    handle = None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        handle = open(out_dir / "report.csv", "w")
        handle.write(",".join(REPORT_COLUMNS) + "\n")
        handle.flush()

    rows = []
    try:
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [
                    pool.submit(
                        _run_job, config.variant, cells[ci], ci, rep, config.data,
                        config.seed, config.solvers, config.solver_options,
                        config.per_solver_options,
                    )
                    for ci, rep in jobs
                ]
                outcomes = (future.result() for future in futures)
                rows = _collect(config, jobs, outcomes, handle, out_dir)
        else:
            outcomes = (
                _run_job(
                    config.variant, cells[ci], ci, rep, config.data, config.seed,
                    config.solvers, config.solver_options,
                    config.per_solver_options, clock=clock,
                )
                for ci, rep in jobs
            )
            rows = _collect(config, jobs, outcomes, handle, out_dir)
    finally:
        if handle is not None:
            handle.close()

    expected = len(cells) * config.repetitions * len(config.solvers)
    assert len(rows) == expected, f"row count {len(rows)} != {expected}"
    return ExperimentReport(
        rows=rows,
        aggregates=_aggregate(rows),
        report_path=str(out_dir / "report.csv") if out_dir else None,
    )


def _collect(config, jobs, outcomes, handle, out_dir):
    rows = []
    for (cell_index, rep), (job_rows, results) in zip(jobs, outcomes):
        for row in job_rows:
            rows.append(row)
            if handle is not None:
                handle.write(",".join(_fmt(row[c]) for c in REPORT_COLUMNS) + "\n")
                handle.flush()
        if config.emit_traces and out_dir is not None:
            for solver, result in results.items():
                name = f"trace_{config.variant}_cell{cell_index}_rep{rep}_{solver}.csv"
                emit_trace(result, out_dir / name)
    return rows


def _aggregate(rows):
    groups = {}
    for row in rows:
        key = (row["variant"], row["n"], row["p"], row["m"], row["lambda"], row["solver"])
        groups.setdefault(key, []).append(row)
    aggregates = []
    for key in sorted(groups, key=str):
        bucket = groups[key]
        ok = [r for r in bucket if not r["termination"].startswith("failed")]
        variant, n, p, m, lam, solver = key
        aggregates.append(dict(
            variant=variant, n=n, p=p, m=m, solver=solver, runs=len(bucket),
            failures=len(bucket) - len(ok),
            mean_iterations=_mean([r["iterations"] for r in ok]),
            mean_final_value=_mean([r["final_value"] for r in ok]),
            mean_sparsity=_mean([r["sparsity"] for r in ok]),
            mean_seconds=_mean([r["seconds"] for r in ok]),
            **{"lambda": lam},
        ))
    return aggregates


def _mean(values):
    return float(np.mean(values)) if values else float("nan")


def emit_trace(result: RunResult, path) -> None:
    """Write one CSV row per iteration record (schema in
    :data:`TRACE_COLUMNS`); every run has at least the k = 0 row."""
    with open(path, "w") as handle:
        handle.write(",".join(TRACE_COLUMNS) + "\n")
        for rec in result.trace:
            handle.write(
                ",".join((
                    str(rec.k), repr(rec.f_value), repr(rec.eta_norm),
                    str(int(rec.restarted)), str(rec.linesearch_steps),
                    repr(rec.seconds),
                )) + "\n"
            )


def read_trace(path) -> list:
    """Parse a trace file back into iteration records."""
    records = []
    with open(path) as handle:
        header = handle.readline().strip().split(",")
        if tuple(header) != TRACE_COLUMNS:
            raise ValueError(f"unexpected trace header {header}")
        for line in handle:
            k, f, eta, restarted, ls, seconds = line.strip().split(",")
            records.append(IterationRecord(
                k=int(k), f_value=float(f), eta_norm=float(eta),
                inner_iterations=0, restarted=bool(int(restarted)),
                linesearch_steps=int(ls), seconds=float(seconds),
            ))
    return records
