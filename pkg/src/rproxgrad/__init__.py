"""Proximal gradient methods for composite objectives on the oblique and
Stiefel manifolds, with sparse-PCA problem instances and an experiment
harness."""

from .errors import (
    AntipodalPoints,
    BadShape,
    ConfigError,
    InsufficientData,
    InverseRetractionFailure,
    MaxIterExceeded,
    NotPositiveDefinite,
    NumericalDomain,
    ProxSolveFailure,
    RproxgradError,
    SingularSystem,
    StepTooLong,
    UnboundedEstimate,
)
from .linalg import inv_sqrt_spd, soft_threshold, solve_lyapunov, solve_sylvester, thin_svd
from .manifolds import Euclidean, Manifold, Oblique, Stiefel, sphere_exp, sphere_log
from .problems import CompositeProblem, euclidean_l1_problem
from .proxmap import (
    ProxModel,
    ProxSolution,
    eval_prox_model,
    oblique_prox,
    solve_prox,
    sphere_l1_closed_form,
    sphere_prox_conditional_gradient,
    stiefel_prox,
    tangent_constrained_prox,
)
from .solvers import (
    IterationRecord,
    RateFit,
    RunResult,
    SafeguardState,
    SolverConfig,
    default_config,
    empirical_rate_fit,
    parpg,
    rpg,
    safeguard_step,
    sparsity_level,
    stationarity_measure,
    varpg,
)
from .spca import (
    build_spca_problem,
    generate_random_data,
    generate_synthetic_data,
    initial_point,
    oblique_spca_problem,
    standardize_columns,
    stiefel_spca_problem,
    synthetic_components,
)

__version__ = "0.1.0"
