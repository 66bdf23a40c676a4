"""Running an experiment grid through the harness API.

Sweeps the problem size over a small grid with repetitions, runs the
benchmark protocol per cell (plain solver first, accelerated solvers stop
at its final value), and prints the aggregate table. The same grid can be
declared in YAML and run from the command line:

    rproxgrad run demos/example_experiment.yaml --output /tmp/grid

Run:  python demos/experiment_grid.py
"""

import tempfile
from pathlib import Path

from rproxgrad.harness import ExperimentConfig, read_trace, run_experiment

out = Path(tempfile.mkdtemp(prefix="rproxgrad_grid_"))
config = ExperimentConfig(
    variant="oblique",
    n_values=(16, 32),
    p_values=(2,),
    m_values=(20,),
    lambda_values=(1.0, 2.0),
    data="random",
    repetitions=3,
    seed=42,
    solvers=("rpg", "parpg"),
    solver_options={"lipschitz": "descent_safe", "max_iterations": 4000},
    output_dir=str(out),
    emit_traces=True,
)

report = run_experiment(config)
print(f"{report.row_count()} rows "
      f"({len(config.cells())} cells x {config.repetitions} repetitions "
      f"x {len(config.solvers)} solvers)\n")

header = f"{'n':>4} {'lam':>5} {'solver':>7} {'iters':>9} {'sparsity':>9} {'seconds':>8}"
print(header)
print("-" * len(header))
for agg in report.aggregates:
    print(f"{agg['n']:>4} {agg['lambda']:>5} {agg['solver']:>7} "
          f"{agg['mean_iterations']:>9.1f} {agg['mean_sparsity']:>9.3f} "
          f"{agg['mean_seconds']:>8.3f}")

print(f"\nreport: {report.report_path}")
traces = sorted(out.glob("trace_*.csv"))
print(f"{len(traces)} trace files; first few rows of {traces[0].name}:")
for rec in read_trace(traces[0])[:4]:
    print(f"  k={rec.k} F={rec.f_value:.6f} |eta|={rec.eta_norm:.3e}")
