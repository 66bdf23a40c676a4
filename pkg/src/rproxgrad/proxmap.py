"""Manifold proximal-mapping solvers.

Each outer solver iteration needs a (near-)stationary point of the tangent
model

    ell_x(eta) = <grad_f(x), eta> + (L/2) ||eta||^2 + lam ||R_x(eta)||_1

with model value no worse than ``ell_x(0)``. Three routes are implemented:

* unit sphere / oblique manifold -- a conditional-gradient iteration whose
  inner step has a closed form (:func:`sphere_l1_closed_form`), applied
  column by column;
* Stiefel manifold -- an iterative descent loop that repeatedly solves a
  tangent-space-constrained Euclidean prox subproblem (semismooth Newton on
  the dual multiplier) and pulls the step back through the inverse
  differentiated retraction with a halving line search;
* flat space -- the classical closed-form shrinkage step, used by the
  Euclidean reference manifold.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MaxIterExceeded, NumericalDomain, SingularSystem, StepTooLong
from .linalg import soft_threshold
from .manifolds import Manifold, _columnwise_log

__all__ = [
    "ProxModel",
    "ProxSolution",
    "eval_prox_model",
    "sphere_l1_closed_form",
    "sphere_prox_objective",
    "sphere_prox_conditional_gradient",
    "oblique_prox",
    "tangent_constrained_prox",
    "stiefel_prox",
    "euclidean_prox",
    "solve_prox",
]

# Stopping defaults per manifold family.
OBLIQUE_PROX_TOL = 1e-10
OBLIQUE_PROX_MAX_ITER = 100
STIEFEL_PROX_TOL = 3e-3
STIEFEL_PROX_MAX_ITER = 50
STIEFEL_INNER_TOL = 1e-10
STIEFEL_INNER_MAX_ITER = 100


@dataclass
class ProxModel:
    """Data of one tangent prox subproblem.

    Attributes
    ----------
    manifold : Manifold
    x : (n, p) array
        Base point on the manifold.
    grad : (n, p) array
        Riemannian gradient of the smooth term at ``x`` (tangent at ``x``).
    lipschitz : float
        Quadratic model weight (an upper bound on the smoothness constant).
    l1_weight : float
        Weight of the l1 term, ``>= 0``.
    """

    manifold: Manifold
    x: np.ndarray
    grad: np.ndarray
    lipschitz: float
    l1_weight: float

    def __post_init__(self):
        if self.lipschitz <= 0:
            raise ValueError(f"lipschitz weight must be positive, got {self.lipschitz}")
        if self.l1_weight < 0:
            raise ValueError(f"l1 weight must be nonnegative, got {self.l1_weight}")


@dataclass
class ProxSolution:
    """Result of a prox-model solve.

    ``model_value <= ell_x(0)`` always holds: the solvers fall back to the
    best iterate seen, and the zero step is in their search history.
    """

    eta: np.ndarray
    model_value: float
    inner_iterations: int
    kkt_residual: float
    converged: bool = True
    inner_trace: list = field(default_factory=list)


def eval_prox_model(model: ProxModel, eta: np.ndarray) -> float:
    """Value of the tangent model ``ell_x`` at ``eta``."""
    y = model.manifold.retract(model.x, eta)
    return (
        model.manifold.inner(model.grad, eta)
        + 0.5 * model.lipschitz * model.manifold.inner(eta, eta)
        + model.l1_weight * float(np.sum(np.abs(y)))
    )


# ----------------------------------------------------------------------
# Sphere / oblique route
# ----------------------------------------------------------------------

def sphere_l1_closed_form(x: np.ndarray, lam: float) -> np.ndarray:
    """Global minimizer of ``(1/(2 lam)) ||y - x||^2 + ||y||_1`` on the
    unit sphere.

    With ``z = soft_threshold(x, lam)`` the minimizer is ``z / ||z||`` when
    ``z != 0``, and otherwise the signed canonical basis vector
    ``sign(x_i) e_i`` at the largest-magnitude entry of ``x`` (smallest
    index on ties, so the result is deterministic).
    """
    if lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")
    x = np.asarray(x, dtype=float)
    z = soft_threshold(x, lam)
    nz = np.linalg.norm(z)
    if nz > 0.0:
        return z / nz
    i = int(np.argmax(np.abs(x)))
    e = np.zeros_like(x)
    e[i] = 1.0 if x[i] >= 0 else -1.0
    return e


# theta/sin(theta) and (theta cos(theta) - sin(theta)) / sin(theta)^3 both
# degenerate as x^T y -> 1; switch to series expansions near that edge.
_SERIES_COS = 1.0 - 5e-7


def _t_coeff(c: float) -> float:
    theta = np.arccos(c)
    if c >= _SERIES_COS:
        t2 = theta * theta
        return 1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0
    return theta / np.sqrt(1.0 - c * c)


def _coupling_coeff(c: float) -> float:
    theta = np.arccos(c)
    if c >= _SERIES_COS:
        return -1.0 / 3.0 - 2.0 * theta * theta / 15.0
    s = np.sqrt(1.0 - c * c)
    return (theta * c - s) / s**3


def sphere_prox_objective(x, xi, lam, y) -> float:
    """Objective ``||Log_x(y) + xi||^2 / (2 lam) + ||y||_1`` of the sphere
    prox subproblem; ``+inf`` when the log map is undefined at ``y``."""
    c = float(np.clip(x @ y, -1.0, 1.0))
    if c <= -1.0 + 1e-12:
        return np.inf
    log_xy = _t_coeff(c) * (y - c * x)
    return float(np.sum((log_xy + xi) ** 2)) / (2.0 * lam) + float(np.sum(np.abs(y)))


@dataclass
class SphereProxResult:
    y: np.ndarray
    objective: float
    iterations: int
    converged: bool
    gap: float


def sphere_prox_conditional_gradient(
    x: np.ndarray,
    xi: np.ndarray,
    lam: float,
    y0: np.ndarray | None = None,
    tol: float = OBLIQUE_PROX_TOL,
    max_iter: int = OBLIQUE_PROX_MAX_ITER,
) -> SphereProxResult:
    """Minimize ``||Log_x(y) + xi||^2 / (2 lam) + ||y||_1`` over the unit
    sphere by repeated linearization of the smooth part.

    Each iteration replaces the smooth part ``h`` by its first-order
    expansion at the current iterate; the linearized problem
    ``min_y <grad h(y_k), y> + ||y||_1`` over the sphere is solved in closed
    form by :func:`sphere_l1_closed_form` applied to ``-grad h(y_k)``. With

        grad h(y) = (s(y) x + t(y) xi) / lam,
        t(y) = arccos(c) / sqrt(1 - c^2),        c = x^T y,
        s(y) = -t(y) + (xi^T y) (arccos(c) c - sqrt(1-c^2)) / (1-c^2)^{3/2},

    the iteration stops once neither ``x^T y`` nor ``xi^T y`` moves by more
    than ``tol``. The returned point is the best objective value seen, so
    it never exceeds the objective of the starting point.

    Parameters
    ----------
    x : unit vector (base point)
    xi : tangent vector at ``x`` (the scaled smooth gradient)
    lam : positive scaled l1 weight
    y0 : starting point on the sphere; defaults to ``x``.

    Raises
    ------
    NumericalDomain
        If an iterate becomes (numerically) antipodal to ``x``.
    """
    if lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")
    y = x.copy() if y0 is None else np.asarray(y0, dtype=float).copy()
    best_u = sphere_prox_objective(x, xi, lam, y)
    best_y = y
    gap = np.inf
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        c = float(x @ y)
        if c <= -1.0 + 1e-12:
            raise NumericalDomain(
                "sphere prox iterate became antipodal to the base point"
            )
        c = min(c, 1.0)
        xiy = float(xi @ y)
        t = _t_coeff(c)
        s = -t + xiy * _coupling_coeff(c)
        grad_h = (s * x + t * xi) / lam
        y_next = sphere_l1_closed_form(-grad_h, 1.0)
        gap = max(abs(c - float(x @ y_next)), abs(xiy - float(xi @ y_next)))
        y = y_next
        u = sphere_prox_objective(x, xi, lam, y)
        if u < best_u:
            best_u, best_y = u, y
        if gap < tol:
            converged = True
            break
    return SphereProxResult(best_y, best_u, iterations, converged, gap)


def _t_coeff_columns(c: np.ndarray) -> np.ndarray:
    theta = np.arccos(c)
    near = c >= _SERIES_COS
    t2 = theta * theta
    out = 1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0
    denom = np.sqrt(1.0 - c * c, where=~near, out=np.ones_like(c))
    np.divide(theta, denom, out=out, where=~near)
    return out


def _coupling_coeff_columns(c: np.ndarray) -> np.ndarray:
    theta = np.arccos(c)
    near = c >= _SERIES_COS
    out = -1.0 / 3.0 - 2.0 * theta * theta / 15.0
    s = np.sqrt(1.0 - c * c, where=~near, out=np.ones_like(c))
    np.divide(theta * c - s, s**3, out=out, where=~near)
    return out


def _column_objectives(x, xi, lam, y) -> np.ndarray:
    c = np.clip(np.sum(x * y, axis=0), -1.0, 1.0)
    logs = _t_coeff_columns(c) * (y - x * c)
    u = np.sum((logs + xi) ** 2, axis=0) / (2.0 * lam) + np.sum(np.abs(y), axis=0)
    return np.where(c <= -1.0 + 1e-12, np.inf, u)


def _columnwise_shrink_step(g: np.ndarray) -> np.ndarray:
    """Closed-form minimizer of (1/2)||y + g_j||^2 + ||y||_1 on the sphere,
    per column."""
    z = soft_threshold(-g, 1.0)
    norms = np.linalg.norm(z, axis=0)
    safe = np.where(norms > 0.0, norms, 1.0)
    y = z / safe
    for j in np.nonzero(norms == 0.0)[0]:
        i = int(np.argmax(np.abs(g[:, j])))
        y[:, j] = 0.0
        y[i, j] = 1.0 if -g[i, j] >= 0 else -1.0
    return y


def oblique_prox(
    model: ProxModel,
    tol: float = OBLIQUE_PROX_TOL,
    max_iter: int = OBLIQUE_PROX_MAX_ITER,
) -> ProxSolution:
    """Solve the tangent prox model on the oblique manifold.

    The model separates over columns: column ``j`` is the sphere subproblem
    with base point ``x_j``, scaled gradient ``grad_j / L`` and weight
    ``lam / L``, warm-started at ``x_j`` — the same iteration as
    :func:`sphere_prox_conditional_gradient`, run on all columns at once.
    The step is recovered column-wise as ``eta_j = Log_{x_j}(y_j)``.
    """
    x, grad = model.x, model.grad
    lip, lam = model.lipschitz, model.l1_weight
    if lam == 0.0:
        # pure quadratic over the tangent space: exact minimizer
        eta = -grad / lip
        return ProxSolution(eta, eval_prox_model(model, eta), 1, 0.0)
    xi = grad / lip
    lam_scaled = lam / lip
    y = x.copy()
    best_y = x.copy()
    best_u = _column_objectives(x, xi, lam_scaled, y)
    gaps = np.full(x.shape[1], np.inf)
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        c = np.sum(x * y, axis=0)
        if np.any(c <= -1.0 + 1e-12):
            bad = int(np.nonzero(c <= -1.0 + 1e-12)[0][0])
            raise NumericalDomain(
                f"column {bad}: sphere prox iterate became antipodal to the base point"
            )
        c = np.minimum(c, 1.0)
        xiy = np.sum(xi * y, axis=0)
        t = _t_coeff_columns(c)
        s = -t + xiy * _coupling_coeff_columns(c)
        grad_h = (x * s + xi * t) / lam_scaled
        y_next = _columnwise_shrink_step(grad_h)
        gaps = np.maximum(
            np.abs(c - np.sum(x * y_next, axis=0)),
            np.abs(xiy - np.sum(xi * y_next, axis=0)),
        )
        y = y_next
        u = _column_objectives(x, xi, lam_scaled, y)
        better = u < best_u
        if np.any(better):
            best_u = np.where(better, u, best_u)
            best_y[:, better] = y[:, better]
        if np.all(gaps < tol):
            converged = True
            break
    eta = _columnwise_log(x, best_y)
    return ProxSolution(
        eta, eval_prox_model(model, eta), iterations, float(gaps.max()), converged
    )


# ----------------------------------------------------------------------
# Stiefel route
# ----------------------------------------------------------------------

@dataclass
class TangentProxResult:
    xi: np.ndarray
    kkt_residual: float
    iterations: int
    multiplier: np.ndarray  # symmetric; 0 in v + L xi + lam d||Y+xi||_1 + Y @ multiplier
    residual_history: list = field(default_factory=list)


def _sym_pairs(p: int):
    return [(i, j) for i in range(p) for j in range(i, p)]


def _sym_vec(m: np.ndarray, pairs) -> np.ndarray:
    return np.array([m[i, j] for i, j in pairs])


def _sym_unvec(v: np.ndarray, p: int, pairs) -> np.ndarray:
    m = np.zeros((p, p))
    for val, (i, j) in zip(v, pairs):
        m[i, j] = val
        m[j, i] = val
    return m


def tangent_constrained_prox(
    y: np.ndarray,
    v: np.ndarray,
    lipschitz: float,
    l1_weight: float,
    tol: float = STIEFEL_INNER_TOL,
    max_iter: int = STIEFEL_INNER_MAX_ITER,
) -> TangentProxResult:
    """Minimize ``<v, xi> + (L/2) ||xi||^2 + lam ||y + xi||_1`` over the
    tangent space of the Stiefel manifold at ``y``.

    Works on the dual: for a symmetric multiplier ``Lam`` the stationarity
    condition gives

        xi(Lam) = soft_threshold(y - (v + 2 y Lam) / L, lam / L) - y,

    which satisfies the first-order inclusion exactly; the remaining
    equation is the tangency defect ``E(Lam) = y^T xi + xi^T y = 0``. A
    semismooth Newton iteration on the ``p (p+1) / 2`` free entries of
    ``Lam`` drives ``||E||_F`` below ``tol``; the generalized Jacobian is
    assembled column by column from the active/inactive shrinkage pattern.
    Only residual-reducing steps are accepted (damped by halving), with a
    fixed-point direction ``(L/4) E`` as fallback when the Newton system is
    singular, so the reported residual decreases monotonically.

    Returns
    -------
    TangentProxResult
        ``xi`` with tangency defect = ``kkt_residual <= tol`` and the
        multiplier certifying stationarity.

    Raises
    ------
    MaxIterExceeded
        If the residual cannot be driven below ``tol``; carries the best
        residual reached.
    """
    y = np.asarray(y, dtype=float)
    v = np.asarray(v, dtype=float)
    if not np.isfinite(v).all():
        raise ValueError("v contains NaN or Inf entries")
    lip = float(lipschitz)
    p = y.shape[1]
    pairs = _sym_pairs(p)
    shrink = l1_weight / lip

    def xi_of(lam_mat):
        return soft_threshold(y - (v + 2.0 * y @ lam_mat) / lip, shrink) - y

    def tangency(xi):
        m = y.T @ xi
        return m + m.T

    lam_mat = np.zeros((p, p))
    xi = xi_of(lam_mat)
    e = tangency(xi)
    res = float(np.linalg.norm(e))
    history = [res]
    iterations = 0
    while res > tol and iterations < max_iter:
        iterations += 1
        inactive = (
            np.abs(y - (v + 2.0 * y @ lam_mat) / lip) > shrink
        ).astype(float)
        jac = np.empty((len(pairs), len(pairs)))
        for col, (i, j) in enumerate(pairs):
            basis = np.zeros((p, p))
            basis[i, j] = 1.0
            basis[j, i] = 1.0
            dxi = -(2.0 / lip) * inactive * (y @ basis)
            jac[:, col] = _sym_vec(tangency(dxi), pairs)
        rhs = -_sym_vec(e, pairs)
        directions = []
        try:
            newton = np.linalg.solve(jac, rhs)
            if np.isfinite(newton).all():
                directions.append(newton)
        except np.linalg.LinAlgError:
            pass
        directions.append((lip / 4.0) * _sym_vec(e, pairs))  # fixed-point fallback
        improved = False
        for direction in directions:
            alpha = 1.0
            for _ in range(20):
                cand = lam_mat + alpha * _sym_unvec(direction, p, pairs)
                cand_xi = xi_of(cand)
                cand_e = tangency(cand_xi)
                cand_res = float(np.linalg.norm(cand_e))
                if cand_res < res:
                    lam_mat, xi, e, res = cand, cand_xi, cand_e, cand_res
                    history.append(res)
                    improved = True
                    break
                alpha *= 0.5
            if improved:
                break
        if not improved:
            break
    if not (res <= tol):
        raise MaxIterExceeded(
            f"tangent prox stalled at residual {res:.3e} (tol {tol:.1e}) "
            f"after {iterations} iterations",
            best_residual=res,
        )
    return TangentProxResult(xi, res, iterations, 2.0 * lam_mat, history)


def stiefel_prox(
    model: ProxModel,
    sigma: float = 1e-4,
    tol: float = STIEFEL_PROX_TOL,
    max_iter: int = STIEFEL_PROX_MAX_ITER,
    inner_tol: float = STIEFEL_INNER_TOL,
    inner_max_iter: int = STIEFEL_INNER_MAX_ITER,
) -> ProxSolution:
    """Solve the tangent prox model on the Stiefel manifold.

    Starting from ``eta_0 = 0``, each outer iteration retracts to
    ``y_k = R_x(eta_k)``, pushes ``grad_f + L eta_k`` to ``y_k`` through the
    adjoint-inverse differentiated retraction, solves the local subproblem
    with :func:`tangent_constrained_prox`, and updates
    ``eta_{k+1} = eta_k + alpha T^{-1} xi*`` where ``alpha`` starts at 1 and
    halves until the model decreases by at least ``sigma alpha ||xi*||^2``.
    Stops when ``||xi*|| < tol``, when the accepted step is shorter than
    ``tol``, or at the iteration cap.

    Raises
    ------
    StepTooLong
        If a vector transport becomes singular (the tangent step left the
        region where the differentiated retraction is invertible).
    """
    if not 0.0 < sigma < 1.0:
        raise ValueError(f"sigma must lie in (0, 1), got {sigma}")
    manifold, x = model.manifold, model.x
    lip = model.lipschitz
    eta = np.zeros_like(x)
    ell = eval_prox_model(model, eta)
    ell_zero = ell
    total_inner = 0
    kkt = np.inf
    inner_trace = [(ell, 0)]
    for _ in range(max_iter):
        y = manifold.retract(x, eta)
        try:
            v = manifold.transport_adjoint_inverse(x, eta, model.grad + lip * eta)
        except SingularSystem as exc:
            raise StepTooLong(f"transport singular at ||eta||={np.linalg.norm(eta):.3e}") from exc
        sub = tangent_constrained_prox(
            y, v, lip, model.l1_weight, inner_tol, inner_max_iter
        )
        total_inner += sub.iterations
        xi_norm = float(np.linalg.norm(sub.xi))
        kkt = xi_norm
        if xi_norm < tol:
            break
        try:
            back = manifold.transport_inverse(x, eta, sub.xi)
        except SingularSystem as exc:
            raise StepTooLong(f"transport singular at ||eta||={np.linalg.norm(eta):.3e}") from exc
        alpha = 1.0
        halvings = 0
        accepted = False
        while halvings <= 60:
            cand = eta + alpha * back
            ell_cand = eval_prox_model(model, cand)
            if ell_cand < ell - sigma * alpha * xi_norm**2:
                accepted = True
                break
            alpha *= 0.5
            halvings += 1
        if not accepted:
            break  # no model decrease possible along this direction
        eta, ell = eta + alpha * back, ell_cand
        inner_trace.append((ell, halvings))
        if alpha * float(np.linalg.norm(back)) < tol:
            break
    if ell > ell_zero:  # cannot happen with the line search; guarded anyway
        eta = np.zeros_like(x)
        ell = ell_zero
    return ProxSolution(eta, ell, total_inner, kkt, kkt < np.inf, inner_trace)


# ----------------------------------------------------------------------
# Flat route
# ----------------------------------------------------------------------

def euclidean_prox(model: ProxModel) -> ProxSolution:
    """Closed-form shrinkage step in flat space:
    ``eta = soft_threshold(x - grad/L, lam/L) - x``."""
    lip = model.lipschitz
    target = soft_threshold(model.x - model.grad / lip, model.l1_weight / lip)
    eta = target - model.x
    return ProxSolution(eta, eval_prox_model(model, eta), 1, 0.0)


def solve_prox(model: ProxModel, **overrides) -> ProxSolution:
    """Dispatch a prox-model solve to the manifold's solver, with the
    per-manifold stopping defaults. Keyword overrides: ``tol``,
    ``max_iter``, plus ``sigma``, ``inner_tol``, ``inner_max_iter`` on the
    Stiefel route."""
    kind = model.manifold.kind
    if kind == "oblique":
        return oblique_prox(
            model,
            tol=overrides.get("tol") or OBLIQUE_PROX_TOL,
            max_iter=overrides.get("max_iter") or OBLIQUE_PROX_MAX_ITER,
        )
    if kind == "stiefel":
        return stiefel_prox(
            model,
            sigma=overrides.get("sigma") or 1e-4,
            tol=overrides.get("tol") or STIEFEL_PROX_TOL,
            max_iter=overrides.get("max_iter") or STIEFEL_PROX_MAX_ITER,
            inner_tol=overrides.get("inner_tol") or STIEFEL_INNER_TOL,
            inner_max_iter=overrides.get("inner_max_iter") or STIEFEL_INNER_MAX_ITER,
        )
    if kind == "euclidean":
        return euclidean_prox(model)
    raise ValueError(f"no prox solver for manifold kind {kind!r}")
