"""Outer optimization loops and run diagnostics.

Three solvers for composite objectives ``F = f + lam ||.||_1`` on a
manifold, all built on the tangent prox model of :mod:`rproxgrad.proxmap`:

* :func:`rpg` -- plain proximal gradient: solve the model at the current
  point, retract along the solution. Monotone descent, stops on the scaled
  stationarity measure ``||eta* L||^2 < tol * n * p``.
* :func:`varpg` -- momentum acceleration: the model is solved at an
  auxiliary point that extrapolates past iterates through the inverse
  retraction. Fast in practice but carries no descent guarantee and can
  diverge.
* :func:`parpg` -- the practical variant: the momentum iteration plus a
  periodic safeguard that compares the accelerated iterate against a plain
  prox step from a reference point, restarting the momentum (and adapting
  the model constant and the check interval) when acceleration stops
  paying off.

All runs are deterministic given their inputs; wall-clock stamps come from
an injectable ``clock`` so callers needing reproducible traces can supply
a counter instead of a timer.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import (
    AntipodalPoints,
    InsufficientData,
    InverseRetractionFailure,
    ProxSolveFailure,
    RproxgradError,
    SingularSystem,
    UnboundedEstimate,
)
from .proxmap import ProxModel, solve_prox

__all__ = [
    "TERMINATION_STATIONARY",
    "TERMINATION_TARGET",
    "TERMINATION_MAXITER",
    "SolverConfig",
    "default_config",
    "IterationRecord",
    "RunResult",
    "SafeguardState",
    "SafeguardCheckpoint",
    "sparsity_level",
    "stationarity_measure",
    "rpg",
    "varpg",
    "parpg",
    "safeguard_step",
    "RateFit",
    "empirical_rate_fit",
]

TERMINATION_STATIONARY = "StationarityTol"
TERMINATION_TARGET = "TargetValue"
TERMINATION_MAXITER = "MaxIter"

#: Entries smaller than this in magnitude count as zero for sparsity.
SPARSITY_THRESHOLD = 1e-5


@dataclass
class SolverConfig:
    """Tunables shared by the three solvers.

    ``lipschitz`` weights the tangent model in :func:`rpg` and
    :func:`varpg`; :func:`parpg` instead uses the adaptive
    ``lipschitz_estimate``, enlarged by factor ``tau`` whenever the
    safeguard's line search fails or a restart fires below the maximum
    check interval. ``sigma`` and ``nu`` are the sufficient-decrease and
    shrink parameters of that line search, capped at ``linesearch_max``
    trials. The safeguard runs every ``safeguard_interval`` iterations,
    adapted within ``[interval_min, interval_max]``.
    """

    lipschitz: float
    lipschitz_estimate: float
    tau: float = 1.1
    sigma: float = 1e-4
    nu: float = 0.5
    safeguard_interval: int = 5
    interval_min: int = 2
    interval_max: int = 10
    linesearch_max: int = 3
    max_iterations: int = 10000
    stationarity_tol: float = 1e-8
    target_value: Optional[float] = None
    prox_tol: Optional[float] = None
    prox_max_iter: Optional[int] = None
    prox_inner_tol: Optional[float] = None
    prox_inner_max_iter: Optional[int] = None

    def validate(self) -> "SolverConfig":
        if self.lipschitz <= 0 or self.lipschitz_estimate <= 0:
            raise ValueError("model constants must be positive")
        if self.tau <= 1.0:
            raise ValueError(f"tau must exceed 1, got {self.tau}")
        if not 0.0 < self.sigma < 1.0:
            raise ValueError(f"sigma must lie in (0, 1), got {self.sigma}")
        if not 0.0 < self.nu < 1.0:
            raise ValueError(f"nu must lie in (0, 1), got {self.nu}")
        if not self.interval_min <= self.safeguard_interval <= self.interval_max:
            raise ValueError(
                "need interval_min <= safeguard_interval <= interval_max, got "
                f"{self.interval_min} <= {self.safeguard_interval} <= {self.interval_max}"
            )
        if self.linesearch_max < 1:
            raise ValueError("linesearch_max must be at least 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.stationarity_tol <= 0:
            raise ValueError("stationarity_tol must be positive")
        return self


def default_config(problem, **overrides) -> SolverConfig:
    """Config prefilled with the problem's model constants and the
    protocol defaults for its manifold family."""
    base = dict(
        lipschitz=problem.lipschitz,
        lipschitz_estimate=problem.lipschitz_estimate,
    )
    if problem.manifold.kind == "stiefel":
        base.update(safeguard_interval=5, interval_min=3, interval_max=5)
    base.update(overrides)
    return SolverConfig(**base).validate()


@dataclass
class IterationRecord:
    """One row of a run trace.

    ``eta_norm`` is the tangent-step norm from the prox solved at this
    iterate; the final record of a run that ended without solving another
    prox carries ``nan`` there. ``restarted`` and ``linesearch_steps``
    describe safeguard activity at this iteration (always falsy for
    :func:`rpg` and :func:`varpg`).
    """

    k: int
    f_value: float
    eta_norm: float
    inner_iterations: int
    restarted: bool
    linesearch_steps: int
    seconds: float


@dataclass
class SafeguardCheckpoint:
    k: int
    f_value: float
    interval: int
    restarted: bool
    estimate: float = 0.0


@dataclass
class RunResult:
    """Outcome of one solver run. ``trace`` has ``iterations + 1`` records
    (the k = 0 record included)."""

    final_point: np.ndarray
    final_value: float
    iterations: int
    termination: str
    trace: list
    sparsity: float
    restart_count: int = 0
    checkpoints: list = field(default_factory=list)


def sparsity_level(x: np.ndarray, threshold: float = SPARSITY_THRESHOLD) -> float:
    """Fraction of entries with magnitude below ``threshold``."""
    return float(np.mean(np.abs(x) < threshold))


def stationarity_measure(eta: np.ndarray, lipschitz: float) -> float:
    """Scaled stationarity measure ``||eta||^2 * L^2``; callers compare it
    against ``stationarity_tol * n * p``."""
    return float(lipschitz**2) * float(np.sum(np.asarray(eta) ** 2))


def _prox_overrides(cfg: SolverConfig) -> dict:
    return dict(
        tol=cfg.prox_tol,
        max_iter=cfg.prox_max_iter,
        sigma=cfg.sigma,
        inner_tol=cfg.prox_inner_tol,
        inner_max_iter=cfg.prox_inner_max_iter,
    )


def _solve_model(problem, point, lipschitz, cfg, k):
    model = ProxModel(
        problem.manifold, point, problem.riemannian_grad_f(point),
        lipschitz, problem.l1_weight,
    )
    try:
        return solve_prox(model, **_prox_overrides(cfg))
    except RproxgradError as exc:
        raise ProxSolveFailure(
            f"prox solve failed at outer iteration {k}: {exc}", iteration=k
        ) from exc


def _finish(x, f_x, iterations, termination, trace, restarts=0, checkpoints=None):
    return RunResult(
        final_point=x,
        final_value=f_x,
        iterations=iterations,
        termination=termination,
        trace=trace,
        sparsity=sparsity_level(x),
        restart_count=restarts,
        checkpoints=checkpoints if checkpoints is not None else [],
    )


def rpg(problem, x0, config: SolverConfig | None = None,
        clock: Callable[[], float] = time.perf_counter) -> RunResult:
    """Proximal gradient descent on the manifold.

    Each iteration solves the tangent prox model at ``x_k`` and retracts:
    ``x_{k+1} = R_{x_k}(eta*)``. The model contract guarantees
    ``F(x_{k+1}) <= F(x_k)`` whenever ``config.lipschitz`` dominates the
    true smoothness constant. Terminates when
    ``||eta* L||^2 < stationarity_tol * n * p``, when ``target_value`` is
    passed (if set), or at ``max_iterations``.
    """
    cfg = (config or default_config(problem)).validate()
    man = problem.manifold
    x = man.check_point(x0).copy()
    start = clock()
    f_x = problem.objective(x)
    threshold = cfg.stationarity_tol * man.n * man.p
    trace = []
    k = 0
    while True:
        sol = _solve_model(problem, x, cfg.lipschitz, cfg, k)
        eta_norm = man.norm(sol.eta)
        trace.append(IterationRecord(
            k, f_x, eta_norm, sol.inner_iterations, False, 0, clock() - start
        ))
        if (cfg.lipschitz * eta_norm) ** 2 < threshold:
            return _finish(x, f_x, k, TERMINATION_STATIONARY, trace)
        x = man.retract(x, sol.eta)
        f_x = problem.objective(x)
        k += 1
        if cfg.target_value is not None and f_x < cfg.target_value:
            trace.append(IterationRecord(k, f_x, math.nan, 0, False, 0, clock() - start))
            return _finish(x, f_x, k, TERMINATION_TARGET, trace)
        if k >= cfg.max_iterations:
            trace.append(IterationRecord(k, f_x, math.nan, 0, False, 0, clock() - start))
            return _finish(x, f_x, k, TERMINATION_MAXITER, trace)


def _momentum_coefficients(t: float) -> tuple[float, float]:
    t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
    return t_next, (t - 1.0) / t_next


def varpg(problem, x0, config: SolverConfig | None = None,
          clock: Callable[[], float] = time.perf_counter) -> RunResult:
    """Momentum-accelerated proximal gradient (no safeguard).

    The prox model is solved at the auxiliary point ``y_k``; with
    ``t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2`` the next auxiliary point is

        y_{k+1} = R_{y_k}( (t_{k+1} + t_k - 1)/t_{k+1} * eta*
                           - (t_k - 1)/t_{k+1} * R_{y_k}^{-1}(x_k) ).

    In flat space this is exactly the classical fast iterative shrinkage
    scheme. There is no descent guarantee; termination is by
    ``target_value`` or the iteration cap.

    Raises
    ------
    InverseRetractionFailure
        If ``x_k`` leaves the invertibility region of the retraction at
        ``y_k`` (iterate spread too large); carries the partial trace.
    """
    cfg = (config or default_config(problem)).validate()
    man = problem.manifold
    x = man.check_point(x0).copy()
    y = x.copy()
    t = 1.0
    start = clock()
    f_x = problem.objective(x)
    trace = []
    k = 0
    while True:
        sol = _solve_model(problem, y, cfg.lipschitz, cfg, k)
        trace.append(IterationRecord(
            k, f_x, man.norm(sol.eta), sol.inner_iterations, False, 0, clock() - start
        ))
        x_next = man.retract(y, sol.eta)
        t_next, shrink = _momentum_coefficients(t)
        try:
            back = man.inverse_retract(y, x)
        except (AntipodalPoints, SingularSystem) as exc:
            raise InverseRetractionFailure(
                f"iterate spread too large at iteration {k}: {exc}",
                iteration=k, partial_trace=trace,
            ) from exc
        combo = ((t_next + t - 1.0) / t_next) * sol.eta - shrink * back
        y = man.retract(y, combo)
        x, t = x_next, t_next
        f_x = problem.objective(x)
        k += 1
        if cfg.target_value is not None and f_x < cfg.target_value:
            trace.append(IterationRecord(k, f_x, math.nan, 0, False, 0, clock() - start))
            return _finish(x, f_x, k, TERMINATION_TARGET, trace)
        if k >= cfg.max_iterations:
            trace.append(IterationRecord(k, f_x, math.nan, 0, False, 0, clock() - start))
            return _finish(x, f_x, k, TERMINATION_MAXITER, trace)


@dataclass
class SafeguardState:
    """Rolling state of the safeguard between checks.

    ``z`` is the reference iterate the next check will measure against;
    ``next_check`` the iteration index of that check; ``estimate`` the
    current adaptive model constant; ``interval`` the current check
    spacing.
    """

    z: np.ndarray
    next_check: int
    estimate: float
    interval: int
    initial_estimate: float
    restart_count: int = 0


@dataclass
class SafeguardReport:
    restarted: bool
    linesearch_steps: int
    inner_iterations: int
    enlargements: int


def safeguard_step(problem, cfg: SolverConfig, state: SafeguardState,
                   x: np.ndarray, y: np.ndarray, t: float, f_x: float):
    """One safeguard invocation.

    Solves the prox model at the reference point ``state.z`` with the
    current estimate, backtracks (``alpha <- nu * alpha``, at most
    ``linesearch_max`` trials) until the step decreases ``F`` by at least
    ``sigma * alpha * ||eta||^2``; a failed line search enlarges the
    estimate by ``tau`` and redoes the prox. If the safeguarded point beats
    ``F(x_k)``, the momentum is restarted from it (``y = x``, ``t = 1``),
    the estimate is enlarged unless the interval is already maximal, and
    checks become more frequent; otherwise the iterate is kept and checks
    become rarer. The estimate never decreases and the interval stays in
    ``[interval_min, interval_max]``.

    Returns ``(new_state, x, y, t, f_x, report)``.

    Raises
    ------
    UnboundedEstimate
        After 30 enlargements in one invocation, or once the estimate
        exceeds ``1e12`` times its initial value.
    """
    man = problem.manifold
    z = state.z
    estimate = state.estimate
    f_z = problem.objective(z)
    enlargements = 0
    inner_total = 0
    while True:
        sol = _solve_model(problem, z, estimate, cfg, state.next_check)
        inner_total += sol.inner_iterations
        eta = sol.eta
        decrease = cfg.sigma * man.inner(eta, eta)
        alpha = 1.0
        steps = cfg.linesearch_max
        accepted = False
        for i in range(cfg.linesearch_max):
            cand = man.retract(z, alpha * eta)
            f_cand = problem.objective(cand)
            if f_cand <= f_z - alpha * decrease:
                accepted = True
                steps = i
                break
            alpha *= cfg.nu
        if accepted:
            break
        estimate *= cfg.tau
        enlargements += 1
        # termination guard: growth past 1e12x the initial estimate can
        # only mean the objective or gradient is inconsistent
        if enlargements > 500 or estimate > 1e12 * state.initial_estimate:
            raise UnboundedEstimate(
                f"model-constant estimate grew to {estimate:.3e} without an "
                "acceptable safeguard step; the objective or gradient is "
                "likely inconsistent"
            )
    if f_cand < f_x:
        # the plain prox step beats the accelerated iterate: restart
        if state.interval != cfg.interval_max:
            estimate *= cfg.tau
        x, y, t, f_x = cand, cand.copy(), 1.0, f_cand
        restarted = True
        interval = max(state.interval - 1, cfg.interval_min)
    else:
        restarted = False
        interval = min(state.interval + 1, cfg.interval_max)
    new_state = SafeguardState(
        z=x.copy(),
        next_check=state.next_check + interval,
        estimate=estimate,
        interval=interval,
        initial_estimate=state.initial_estimate,
        restart_count=state.restart_count + int(restarted),
    )
    report = SafeguardReport(restarted, steps, inner_total, enlargements)
    return new_state, x, y, t, f_x, report


def parpg(problem, x0, config: SolverConfig | None = None,
          clock: Callable[[], float] = time.perf_counter) -> RunResult:
    """Safeguarded momentum acceleration.

    Identical to :func:`varpg` except that (i) the tangent model is
    weighted by the adaptive estimate that the safeguard maintains, and
    (ii) every ``interval`` iterations :func:`safeguard_step` either
    confirms progress or restarts the momentum from a reference point. The
    objective values at the checkpoints are nonincreasing by construction.
    """
    cfg = (config or default_config(problem)).validate()
    man = problem.manifold
    x = man.check_point(x0).copy()
    y = x.copy()
    t = 1.0
    start = clock()
    f_x = problem.objective(x)
    state = SafeguardState(
        z=x.copy(),
        next_check=cfg.safeguard_interval,
        estimate=cfg.lipschitz_estimate,
        interval=cfg.safeguard_interval,
        initial_estimate=cfg.lipschitz_estimate,
    )
    trace = []
    checkpoints = []
    k = 0
    while True:
        restarted = False
        ls_steps = 0
        safeguard_inner = 0
        if k == state.next_check:
            state, x, y, t, f_x, report = safeguard_step(
                problem, cfg, state, x, y, t, f_x
            )
            restarted = report.restarted
            ls_steps = report.linesearch_steps
            safeguard_inner = report.inner_iterations
            checkpoints.append(
                SafeguardCheckpoint(k, f_x, state.interval, restarted, state.estimate)
            )
        sol = _solve_model(problem, y, state.estimate, cfg, k)
        trace.append(IterationRecord(
            k, f_x, man.norm(sol.eta),
            sol.inner_iterations + safeguard_inner,
            restarted, ls_steps, clock() - start,
        ))
        x_next = man.retract(y, sol.eta)
        t_next, shrink = _momentum_coefficients(t)
        try:
            back = man.inverse_retract(y, x)
        except (AntipodalPoints, SingularSystem) as exc:
            raise InverseRetractionFailure(
                f"iterate spread too large at iteration {k}: {exc}",
                iteration=k, partial_trace=trace,
            ) from exc
        combo = ((t_next + t - 1.0) / t_next) * sol.eta - shrink * back
        y = man.retract(y, combo)
        x, t = x_next, t_next
        f_x = problem.objective(x)
        k += 1
        if cfg.target_value is not None and f_x < cfg.target_value:
            trace.append(IterationRecord(k, f_x, math.nan, 0, False, 0, clock() - start))
            return _finish(x, f_x, k, TERMINATION_TARGET, trace,
                           state.restart_count, checkpoints)
        if k >= cfg.max_iterations:
            trace.append(IterationRecord(k, f_x, math.nan, 0, False, 0, clock() - start))
            return _finish(x, f_x, k, TERMINATION_MAXITER, trace,
                           state.restart_count, checkpoints)


@dataclass
class RateFit:
    """Power-law and geometric fits of a convergence trace.

    ``exponent`` and ``r_squared`` describe the least-squares fit of
    ``log(F_k - F_star)`` against ``log k``; ``linear_rate`` and
    ``linear_r_squared`` the fit against ``k`` (per-iteration contraction
    factor). ``best_model`` names whichever explains more variance.
    """

    exponent: float
    r_squared: float
    linear_rate: float
    linear_r_squared: float

    @property
    def best_model(self) -> str:
        return "power" if self.r_squared >= self.linear_r_squared else "linear"


def _r_squared(pred: np.ndarray, obs: np.ndarray) -> float:
    ss_res = float(np.sum((obs - pred) ** 2))
    ss_tot = float(np.sum((obs - obs.mean()) ** 2))
    if ss_tot <= 1e-300:
        return 1.0 if ss_res <= 1e-300 else 0.0
    return 1.0 - ss_res / ss_tot


def empirical_rate_fit(trace, f_star: float) -> RateFit:
    """Fit the objective gap of a run trace against iteration count.

    Uses the records with ``k >= 1`` and ``f_value > f_star``; raises
    :class:`InsufficientData` with fewer than 10 usable points.
    """
    ks, gaps = [], []
    for rec in trace:
        if rec.k >= 1 and rec.f_value > f_star:
            ks.append(float(rec.k))
            gaps.append(rec.f_value - f_star)
    if len(ks) < 10:
        raise InsufficientData(
            f"need at least 10 trace points above f_star, got {len(ks)}"
        )
    ks = np.array(ks)
    log_gap = np.log(np.array(gaps))
    exp_slope, exp_icept = np.polyfit(np.log(ks), log_gap, 1)
    lin_slope, lin_icept = np.polyfit(ks, log_gap, 1)
    return RateFit(
        exponent=float(exp_slope),
        r_squared=_r_squared(exp_slope * np.log(ks) + exp_icept, log_gap),
        linear_rate=float(np.exp(lin_slope)),
        linear_r_squared=_r_squared(lin_slope * ks + lin_icept, log_gap),
    )
