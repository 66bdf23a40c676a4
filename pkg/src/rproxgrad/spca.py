"""Sparse-PCA problem instances, data generation, and initialization.

Two composite models on a standardized data matrix ``A`` (m x n, columns
with mean 0 and standard deviation 1):

* oblique variant (weakly correlated loadings):
  ``min_{X in OB(p,n)} ||X^T A^T A X - D^2||_F^2 + lam ||X||_1``
  with ``D`` the leading ``p`` singular values of ``A``;
* Stiefel variant (penalized variance maximization):
  ``min_{X in St(p,n)} -trace(X^T A^T A X) + lam ||X||_1``.

Default model constants follow the experimental protocol: oblique
``L = 4 ||A||_F^2`` with adaptive estimate ``0.5 ||A||_F^2``; Stiefel
``L = 2 ||A||_2`` with adaptive estimate ``1.6 ||A||_F^2`` (taken verbatim;
override per run if a strict upper bound is required).
"""

from __future__ import annotations

import numpy as np

from .errors import BadShape
from .linalg import thin_svd
from .manifolds import Oblique, Stiefel
from .problems import CompositeProblem

__all__ = [
    "standardize_columns",
    "generate_random_data",
    "synthetic_components",
    "generate_synthetic_data",
    "initial_point",
    "oblique_spca_problem",
    "stiefel_spca_problem",
    "build_spca_problem",
    "descent_lipschitz",
    "experiment_lipschitz_options",
]

VARIANTS = ("oblique", "stiefel")


# ----------------------------------------------------------------------
# Data generation
# ----------------------------------------------------------------------

def standardize_columns(a: np.ndarray) -> np.ndarray:
    """Shift and scale each column to mean 0 and standard deviation 1.

    The population convention (divide by the row count) is used for the
    standard deviation throughout this package.
    """
    a = np.asarray(a, dtype=float)
    centered = a - a.mean(axis=0)
    std = centered.std(axis=0)  # population convention (ddof=0)
    if np.any(std == 0.0):
        cols = np.nonzero(std == 0.0)[0]
        raise ValueError(f"columns {cols.tolist()} are constant; cannot standardize")
    return centered / std


def generate_random_data(m: int, n: int, seed) -> np.ndarray:
    """Standard-normal ``(m, n)`` matrix, columns standardized.

    Deterministic given ``seed`` (numpy PCG64 generator); ``seed`` may be
    anything ``numpy.random.default_rng`` accepts.
    """
    if m < 2:
        raise BadShape(f"need at least 2 rows to standardize, got m={m}")
    rng = np.random.default_rng(seed)
    return standardize_columns(rng.standard_normal((m, n)))


def synthetic_components(n: int) -> np.ndarray:
    """Five fixed unit-norm component patterns of length ``n``.

    Each is supported on one of five contiguous equal windows: two constant
    boxes, two phase-shifted sinusoid bursts, and a triangular ramp. The
    exact shapes are a modeling choice; downstream code accepts any
    ``(5, n)`` component array instead.
    """
    if n < 5:
        raise BadShape(f"need n >= 5 for five components, got n={n}")
    comps = np.zeros((5, n))
    edges = np.linspace(0, n, 6).astype(int)
    for i in range(5):
        lo, hi = edges[i], edges[i + 1]
        width = hi - lo
        t = np.arange(width) / width
        if i < 2:
            comps[i, lo:hi] = 1.0
        elif i < 4:
            phase = 0.0 if i == 2 else np.pi / 2
            comps[i, lo:hi] = np.sin(2.0 * np.pi * 2.0 * t + phase)
        else:
            comps[i, lo:hi] = 1.0 - np.abs(2.0 * t - 1.0)
        comps[i] /= np.linalg.norm(comps[i])
    return comps


def generate_synthetic_data(
    m: int,
    n: int,
    seed,
    noise_std: float = 0.5,
    components: np.ndarray | None = None,
    standardize: bool = True,
) -> np.ndarray:
    """Structured ``(m, n)`` matrix: each of five components repeated
    ``m / 5`` times as rows, plus Gaussian noise with standard deviation
    ``noise_std`` (variance 0.25 by default), then column-standardized.

    Pass ``standardize=False`` to inspect the raw construction (required
    with ``noise_std=0``, where off-support columns are constant).
    """
    if m % 5 != 0:
        raise BadShape(f"row count must be divisible by 5, got m={m}")
    comps = synthetic_components(n) if components is None else np.asarray(components, dtype=float)
    if comps.shape != (5, n):
        raise BadShape(f"components must have shape (5, {n}), got {comps.shape}")
    base = np.repeat(comps, m // 5, axis=0)
    rng = np.random.default_rng(seed)
    a = base + noise_std * rng.standard_normal((m, n))
    return standardize_columns(a) if standardize else a


def initial_point(a: np.ndarray, p: int) -> np.ndarray:
    """Leading ``p`` right singular vectors of ``a`` as an ``(n, p)``
    matrix; orthonormal columns, so it lies on both OB(p, n) and St(p, n).
    Deterministic through the sign convention of :func:`~rproxgrad.linalg.thin_svd`.
    """
    _, _, v = thin_svd(a, p)
    return v


# ----------------------------------------------------------------------
# Problem construction
# ----------------------------------------------------------------------

def _check_standardized(a: np.ndarray, tol: float = 1e-8) -> None:
    mean = np.abs(a.mean(axis=0)).max()
    std = np.abs(a.std(axis=0) - 1.0).max()
    if mean > tol or std > tol:
        raise ValueError(
            f"data columns are not standardized (max |mean| {mean:.2e}, "
            f"max |std-1| {std:.2e}); pass check_standardized=False to skip"
        )


def oblique_spca_problem(
    a: np.ndarray,
    p: int,
    l1_weight: float,
    check_standardized: bool = True,
) -> CompositeProblem:
    """Oblique sparse-PCA model
    ``||X^T A^T A X - D^2||_F^2 + lam ||X||_1`` with
    ``grad f(X) = 4 A^T A X (X^T A^T A X - D^2)``."""
    a = np.asarray(a, dtype=float)
    if check_standardized:
        _check_standardized(a)
    m, n = a.shape
    ata = a.T @ a
    _, d, _ = thin_svd(a, p)
    d_sq = np.diag(d**2)
    fro_sq = float(np.sum(a * a))

    def value(x):
        r = x.T @ (ata @ x) - d_sq
        val = float(np.sum(r * r))
        assert val >= 0.0
        return val

    def grad(x):
        atax = ata @ x
        return 4.0 * atax @ (x.T @ atax - d_sq)

    problem = CompositeProblem(
        manifold=Oblique(n, p),
        smooth_value=value,
        smooth_grad=grad,
        l1_weight=float(l1_weight),
        lipschitz=4.0 * fro_sq,
        lipschitz_estimate=0.5 * fro_sq,
        name="spca-oblique",
    )
    problem.data = a
    problem.singular_values = d
    return problem


def stiefel_spca_problem(
    a: np.ndarray,
    p: int,
    l1_weight: float,
    check_standardized: bool = True,
) -> CompositeProblem:
    """Stiefel sparse-PCA model ``-trace(X^T A^T A X) + lam ||X||_1`` with
    ``grad f(X) = -2 A^T A X``."""
    a = np.asarray(a, dtype=float)
    if check_standardized:
        _check_standardized(a)
    m, n = a.shape
    ata = a.T @ a
    spectral = float(np.linalg.norm(a, 2))
    fro_sq = float(np.sum(a * a))
    lower_bound = -p * spectral**2

    def value(x):
        val = -float(np.sum(x * (ata @ x)))
        assert val >= lower_bound - 1e-8 * max(1.0, abs(lower_bound))
        return val

    def grad(x):
        return -2.0 * ata @ x

    problem = CompositeProblem(
        manifold=Stiefel(n, p),
        smooth_value=value,
        smooth_grad=grad,
        l1_weight=float(l1_weight),
        lipschitz=2.0 * spectral,
        lipschitz_estimate=1.6 * fro_sq,
        name="spca-stiefel",
    )
    problem.data = a
    return problem


def build_spca_problem(
    variant: str,
    a: np.ndarray,
    p: int,
    l1_weight: float,
    check_standardized: bool = True,
) -> CompositeProblem:
    """Build the sparse-PCA problem for ``variant`` in :data:`VARIANTS`."""
    if variant == "oblique":
        return oblique_spca_problem(a, p, l1_weight, check_standardized)
    if variant == "stiefel":
        return stiefel_spca_problem(a, p, l1_weight, check_standardized)
    raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")


def descent_lipschitz(problem: CompositeProblem, x0: np.ndarray) -> float:
    """Model constant that dominates the smooth term's curvature along
    retraction curves inside the sublevel set of ``x0``, so the plain
    proximal gradient iteration descends monotonically.

    The verbatim protocol defaults stored on the problem are far below the
    worst-case curvature of these objectives on standardized data; this
    bound is the conservative alternative for runs that must certify
    per-step descent. With ``B = A^T A``:

    * oblique (unit-speed great circles have acceleration ``||eta||^2``):
      ``8 p ||B||_2^2 + 4 ||B||_2 sqrt(F(x0)) (1 + sqrt(p))`` — the Hessian
      of the spectrum-matching residual plus the gradient-times-curve-
      acceleration term;
    * Stiefel (the smooth term is concave, only the retraction's
      acceleration contributes): ``6 sqrt(p) ||B||_2``.
    """
    a = problem.data
    p = problem.manifold.p
    b_norm = float(np.linalg.norm(a, 2)) ** 2
    if problem.manifold.kind == "oblique":
        f0 = problem.objective(x0)
        return 8.0 * p * b_norm**2 + 4.0 * b_norm * np.sqrt(f0) * (1.0 + np.sqrt(p))
    if problem.manifold.kind == "stiefel":
        return 6.0 * np.sqrt(p) * b_norm
    raise ValueError(f"no descent bound for manifold kind {problem.manifold.kind!r}")


def experiment_lipschitz_options(variant: str) -> dict:
    """Per-solver option overrides for the experiment protocol: the plain
    and vanilla-accelerated solvers get the descent-safe constant (resolved
    per instance by the harness), while the safeguarded solver keeps the
    verbatim adaptive estimate it was designed around."""
    safe = {"lipschitz": "descent_safe"}
    return {"rpg": dict(safe), "varpg": dict(safe)}
