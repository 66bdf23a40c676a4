"""Small dense linear-algebra kernels used by the geometry and prox solvers.

Everything here operates on plain ``numpy`` arrays. Matrix-equation solves
are verified by residual re-substitution on every call: a solution that does
not reproduce the right-hand side to tolerance raises
:class:`~rproxgrad.errors.SingularSystem` instead of being returned. This
keeps the detection of degenerate systems independent of the decomposition
scipy happens to use.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg

from .errors import NotPositiveDefinite, SingularSystem

__all__ = [
    "symmetrize",
    "solve_sylvester",
    "solve_lyapunov",
    "inv_sqrt_spd",
    "soft_threshold",
    "thin_svd",
]

#: Relative residual tolerance for matrix-equation solves.
RESIDUAL_TOL = 1e-10


def _as_finite(name: str, a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if not np.isfinite(a).all():
        raise ValueError(f"{name} contains NaN or Inf entries")
    return a


def symmetrize(m: np.ndarray) -> np.ndarray:
    """Return the symmetric part ``(m + m^T) / 2``."""
    return 0.5 * (m + m.T)


def solve_sylvester(c: np.ndarray, e: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Solve the Sylvester equation ``c @ z + z @ e = q`` for ``z``.

    Parameters
    ----------
    c, e : (p, p) arrays
        Coefficient matrices. The equation is solvable iff the spectra of
        ``c`` and ``-e`` are disjoint; this is checked a posteriori through
        the residual, not through eigenvalues.
    q : (p, p) array
        Right-hand side.

    Returns
    -------
    z : (p, p) array
        Solution with ``||c z + z e - q||_F <= 1e-10 * max(1, ||q||_F)``.

    Raises
    ------
    SingularSystem
        If no solution meets the residual tolerance.
    """
    c = _as_finite("c", c)
    e = _as_finite("e", e)
    q = _as_finite("q", q)
    z = _guarded_solve(lambda: scipy.linalg.solve_sylvester(c, e, q), "Sylvester")
    _check_residual(c @ z + z @ e - q, q, "Sylvester")
    return z


def solve_lyapunov(c: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Solve the Lyapunov equation ``c @ s + s @ c^T = q`` for symmetric ``s``.

    ``q`` is symmetrized on entry; the returned ``s`` is exactly symmetric.

    Raises
    ------
    SingularSystem
        If no solution meets the residual tolerance (some pair of
        eigenvalues of ``c`` sums to zero).
    """
    c = _as_finite("c", c)
    q = symmetrize(_as_finite("q", q))
    s = _guarded_solve(lambda: scipy.linalg.solve_continuous_lyapunov(c, q), "Lyapunov")
    s = symmetrize(s)
    _check_residual(c @ s + s @ c.T - q, q, "Lyapunov")
    return s


def _guarded_solve(solve, label: str) -> np.ndarray:
    # A (near-)singular operator surfaces either as an exception, as a
    # solver warning (scipy perturbs the coefficients and says so), or as a
    # garbage solution caught later by the residual check.
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            out = solve()
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise SingularSystem(f"{label} solve failed: {exc}") from exc
    if caught:
        details = "; ".join(str(w.message) for w in caught)
        raise SingularSystem(f"{label} operator is (near-)singular: {details}")
    return out


def _check_residual(residual: np.ndarray, q: np.ndarray, label: str) -> None:
    res = np.linalg.norm(residual)
    bound = RESIDUAL_TOL * max(1.0, np.linalg.norm(q))
    if not np.isfinite(res) or res > bound:
        raise SingularSystem(
            f"{label} residual {res:.3e} exceeds {bound:.3e}; "
            "the coefficient spectra overlap"
        )


def inv_sqrt_spd(m: np.ndarray) -> np.ndarray:
    """Inverse symmetric square root of an SPD matrix.

    Returns the symmetric ``z`` with ``z @ m @ z = I``.

    Raises
    ------
    NotPositiveDefinite
        If the smallest eigenvalue is not above ``1e-14 * ||m||_2``.
    """
    m = symmetrize(_as_finite("m", m))
    w, v = np.linalg.eigh(m)
    if w[0] <= 1e-14 * max(abs(w[-1]), abs(w[0])) or w[0] <= 0.0:
        raise NotPositiveDefinite(
            f"matrix is not SPD (eigenvalue range [{w[0]:.3e}, {w[-1]:.3e}])"
        )
    return symmetrize((v / np.sqrt(w)) @ v.T)


def soft_threshold(x: np.ndarray, lam: float) -> np.ndarray:
    """Entrywise shrinkage ``sign(x) * max(|x| - lam, 0)``."""
    if lam < 0:
        raise ValueError(f"threshold must be nonnegative, got {lam}")
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.maximum(np.abs(x) - lam, 0.0)


def thin_svd(a: np.ndarray, r: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Leading ``r`` singular triplets of ``a``.

    Returns ``(u, s, v)`` with ``a @ v ~= u * s``, singular values ``s``
    nonincreasing, and a deterministic sign convention: the first nonzero
    entry of each right singular vector is nonnegative.

    Parameters
    ----------
    a : (m, n) array
    r : int
        Number of triplets, ``1 <= r <= min(m, n)``.
    """
    a = _as_finite("a", a)
    m, n = a.shape
    if not 1 <= r <= min(m, n):
        raise ValueError(f"rank r={r} outside [1, {min(m, n)}]")
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    u, s, v = u[:, :r].copy(), s[:r].copy(), vt[:r].T.copy()
    for j in range(r):
        col = v[:, j]
        nonzero = np.nonzero(np.abs(col) > 1e-12)[0]
        if nonzero.size and col[nonzero[0]] < 0:
            v[:, j] = -col
            u[:, j] = -u[:, j]
    return u, s, v
