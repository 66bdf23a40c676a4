"""Composite objectives F = f + lam * ||.||_1 on a manifold.

A problem bundles the smooth term (value and Euclidean gradient), the l1
weight, the manifold, and suggested quadratic-model constants. Solvers only
rely on this surface, so any object with the same attributes works — see
:mod:`rproxgrad.spca` for the sparse-PCA instances.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .manifolds import Euclidean, Manifold

__all__ = ["CompositeProblem", "euclidean_l1_problem"]


@dataclass
class CompositeProblem:
    """Minimize ``f(X) + l1_weight * sum(|X|)`` over ``manifold``.

    Attributes
    ----------
    manifold : Manifold
    smooth_value : callable
        ``X -> f(X)``.
    smooth_grad : callable
        ``X -> grad f(X)`` in the ambient (Euclidean) sense.
    l1_weight : float
    lipschitz : float
        Default upper-bound constant for the tangent model.
    lipschitz_estimate : float
        Default adaptive lower estimate used by the safeguarded solver.
    name : str
    smooth_constant : float, optional
        The true smoothness constant along retraction curves, when it is
        known analytically (flat quadratics); enables quantitative descent
        checks.
    """

    manifold: Manifold
    smooth_value: Callable[[np.ndarray], float]
    smooth_grad: Callable[[np.ndarray], np.ndarray]
    l1_weight: float
    lipschitz: float
    lipschitz_estimate: float
    name: str = ""
    smooth_constant: Optional[float] = None

    def f_value(self, x: np.ndarray) -> float:
        return float(self.smooth_value(x))

    def euclidean_grad_f(self, x: np.ndarray) -> np.ndarray:
        return self.smooth_grad(x)

    def riemannian_grad_f(self, x: np.ndarray) -> np.ndarray:
        return self.manifold.project_tangent(x, self.smooth_grad(x))

    def g_value(self, x: np.ndarray) -> float:
        return self.l1_weight * float(np.sum(np.abs(x)))

    def objective(self, x: np.ndarray) -> float:
        return self.f_value(x) + self.g_value(x)


def euclidean_l1_problem(
    q: np.ndarray,
    p: int = 1,
    b: np.ndarray | None = None,
    l1_weight: float = 0.0,
    lipschitz: float | None = None,
) -> CompositeProblem:
    """Flat-space quadratic ``f(X) = trace(X^T Q X) + <b, X>`` plus an l1
    term, on points of shape ``(n, p)``.

    The smoothness constant of ``f`` is exactly ``2 ||Q||_2`` (recorded in
    ``smooth_constant``), which makes this the reference problem for
    quantitative descent checks and for comparing the accelerated solver
    against its textbook flat-space form.
    """
    q = 0.5 * (np.asarray(q, dtype=float) + np.asarray(q, dtype=float).T)
    n = q.shape[0]
    smooth_l = 2.0 * float(np.linalg.norm(q, 2))

    def value(x):
        quad = float(np.sum(x * (q @ x)))
        return quad if b is None else quad + float(np.sum(b * x))

    def grad(x):
        g = 2.0 * q @ x
        return g if b is None else g + b

    lip = lipschitz if lipschitz is not None else 1.1 * smooth_l
    return CompositeProblem(
        manifold=Euclidean(n, p),
        smooth_value=value,
        smooth_grad=grad,
        l1_weight=l1_weight,
        lipschitz=lip,
        lipschitz_estimate=lip,
        name="euclidean-l1-quadratic",
        smooth_constant=smooth_l,
    )
