"""Built-in property checks behind ``rproxgrad validate``.

A fast, self-contained subset of the package's invariants: geometry round
trips and transport identities, prox-solver optimality against brute-force
grids, solver descent, the flat-space equivalence of the accelerated
update, and run determinism. Each check returns ``(name, ok, detail)``.
"""

from __future__ import annotations

import numpy as np

from .linalg import soft_threshold
from .manifolds import Oblique, Stiefel
from .problems import euclidean_l1_problem
from .proxmap import (
    ProxModel,
    eval_prox_model,
    oblique_prox,
    sphere_l1_closed_form,
    stiefel_prox,
    tangent_constrained_prox,
)
from .solvers import default_config, rpg, varpg
from .spca import build_spca_problem, descent_lipschitz, generate_random_data, initial_point

__all__ = ["run_checks"]


def _check_sphere_round_trip():
    man = Oblique(12, 3)
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(100):
        x = man.random_point(rng)
        eta = man.random_tangent(x, rng)
        eta *= 0.4 / np.linalg.norm(eta)
        back = man.inverse_retract(x, man.retract(x, eta))
        worst = max(worst, float(np.linalg.norm(back - eta)))
    return worst <= 1e-8, f"worst round-trip error {worst:.2e}"


def _check_retraction_axioms():
    worst = 0.0
    rng = np.random.default_rng(1)
    for man in (Oblique(9, 2), Stiefel(9, 2)):
        x = man.random_point(rng)
        if not np.array_equal(man.retract(x, np.zeros_like(x)), x):
            return False, f"{man.kind}: R(0) != x"
        eta = man.random_tangent(x, rng)
        t = 1e-6
        fd = (man.retract(x, t * eta) - man.retract(x, -t * eta)) / (2 * t)
        worst = max(worst, float(np.abs(fd - eta).max()))
    return worst <= 1e-5, f"worst derivative defect {worst:.2e}"


def _check_stiefel_transports():
    man = Stiefel(10, 3)
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(25):
        x = man.random_point(rng)
        eta = man.random_tangent(x, rng)
        eta *= 0.3 / np.linalg.norm(eta)
        xi = man.random_tangent(x, rng)
        y = man.retract(x, eta)
        zeta = man.random_tangent(y, rng)
        back = man.transport_inverse(x, eta, man.transport(x, eta, xi))
        worst = max(worst, float(np.linalg.norm(back - xi)))
        lhs = man.inner(xi, man.transport_inverse(x, eta, zeta))
        rhs = man.inner(man.transport_adjoint_inverse(x, eta, xi), zeta)
        worst = max(worst, abs(lhs - rhs))
    return worst <= 1e-8, f"worst identity defect {worst:.2e}"


def _check_sphere_l1_oracle():
    theta = np.arange(0.0, 2 * np.pi, 1e-4)
    grid = np.stack([np.cos(theta), np.sin(theta)])
    grid_l1 = np.sum(np.abs(grid), axis=0)
    rng = np.random.default_rng(3)
    worst = -np.inf
    for _ in range(20):
        x = rng.standard_normal(2)
        x /= np.linalg.norm(x)
        lam = float(rng.uniform(0.1, 1.5))
        y = sphere_l1_closed_form(x, lam)
        mine = 0.5 / lam * np.sum((y - x) ** 2) + np.sum(np.abs(y))
        best = (0.5 / lam * np.sum((grid - x[:, None]) ** 2, axis=0) + grid_l1).min()
        worst = max(worst, mine - best)
    return worst <= 1e-3, f"worst objective excess {worst:.2e}"


def _check_tangent_prox():
    man = Stiefel(7, 2)
    rng = np.random.default_rng(4)
    y = man.random_point(rng)
    v = rng.standard_normal((7, 2))
    res = tangent_constrained_prox(y, v, 2.0, 0.0)
    closed = man.project_tangent(y, -v / 2.0)
    gap = float(np.linalg.norm(res.xi - closed))
    res2 = tangent_constrained_prox(y, v, 2.0, 0.5)
    return gap <= 1e-10 and res2.kkt_residual <= 1e-10, (
        f"closed-form gap {gap:.2e}, kkt residual {res2.kkt_residual:.2e}"
    )


def _check_prox_model_decrease():
    rng = np.random.default_rng(5)
    worst = -np.inf
    for man, solver in ((Oblique(8, 2), oblique_prox), (Stiefel(8, 2), stiefel_prox)):
        x = man.random_point(rng)
        grad = man.random_tangent(x, rng)
        model = ProxModel(man, x, grad, 3.0, 0.5)
        sol = solver(model)
        worst = max(worst, sol.model_value - eval_prox_model(model, np.zeros_like(x)))
    return worst <= 1e-12, f"worst model excess over zero step {worst:.2e}"


def _check_rpg_descent():
    a = generate_random_data(20, 24, 6)
    prob = build_spca_problem("oblique", a, 2, 2.0)
    x0 = initial_point(a, 2)
    cfg = default_config(
        prob, lipschitz=descent_lipschitz(prob, x0), max_iterations=200
    )
    res = rpg(prob, x0, cfg)
    f = [r.f_value for r in res.trace]
    worst = max((b - a) for a, b in zip(f, f[1:]))
    return worst <= 1e-10, f"worst per-step increase {worst:.2e}"


def _check_flat_fista_equivalence():
    rng = np.random.default_rng(7)
    q = rng.standard_normal((6, 6))
    q = q.T @ q / 6 + np.eye(6)
    b = rng.standard_normal((6, 1))
    prob = euclidean_l1_problem(q, p=1, b=b, l1_weight=0.3)
    lip = prob.lipschitz
    x0 = prob.manifold.random_point(rng)
    x = y = x0
    t = 1.0
    worst = 0.0
    for k in range(1, 21):
        step = y - prob.smooth_grad(y) / lip
        x_next = soft_threshold(step, prob.l1_weight / lip)
        t_next = 0.5 * (1 + np.sqrt(1 + 4 * t * t))
        y = x_next + (t - 1.0) / t_next * (x_next - x)
        x, t = x_next, t_next
        res = varpg(prob, x0, default_config(prob, max_iterations=k))
        worst = max(worst, float(np.abs(res.final_point - x).max()))
    return worst <= 1e-12, f"worst deviation from flat-space reference {worst:.2e}"


def _check_determinism():
    a = generate_random_data(20, 16, 8)
    prob = build_spca_problem("oblique", a, 2, 2.0)
    x0 = initial_point(a, 2)
    cfg = default_config(prob, lipschitz=descent_lipschitz(prob, x0), max_iterations=50)
    fake = iter(np.arange(1e6) * 1e-3)
    first = rpg(prob, x0, cfg, clock=lambda: next(fake))
    fake = iter(np.arange(1e6) * 1e-3)
    second = rpg(prob, x0, cfg, clock=lambda: next(fake))
    same = first.final_value == second.final_value and all(
        r1 == r2 for r1, r2 in zip(first.trace, second.trace)
    )
    return same, "identical traces" if same else "traces differ"


CHECKS = (
    ("sphere exp/log round trip", _check_sphere_round_trip),
    ("retraction axioms", _check_retraction_axioms),
    ("Stiefel transport identities", _check_stiefel_transports),
    ("sphere l1 prox vs grid search", _check_sphere_l1_oracle),
    ("tangent-constrained prox", _check_tangent_prox),
    ("prox model decrease", _check_prox_model_decrease),
    ("proximal gradient descent", _check_rpg_descent),
    ("flat-space accelerated equivalence", _check_flat_fista_equivalence),
    ("run determinism", _check_determinism),
)


def run_checks():
    """Run all built-in checks; returns a list of (name, ok, detail)."""
    results = []
    for name, check in CHECKS:
        try:
            ok, detail = check()
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append((name, bool(ok), detail))
    return results
