"""Geometry of the unit sphere, the oblique manifold OB(p, n), and the
Stiefel manifold St(p, n).

Points and tangent vectors are plain ``(n, p)`` numpy arrays; each manifold
object knows how to validate, project, retract and (where defined) invert
its retraction. All manifolds here carry the Euclidean trace metric
``<a, b> = trace(a^T b)``.

Retractions used:

* oblique  -- the exponential map, applied column-wise on the sphere
  ``Exp_x(eta) = x cos(||eta||) + eta sin(||eta||) / ||eta||``;
* Stiefel  -- the polar retraction
  ``R_X(eta) = (X + eta)(I + eta^T eta)^{-1/2}``.

The Stiefel class additionally provides the vector transport obtained by
differentiating the polar retraction, together with its inverse and the
adjoint of the inverse. All three reduce to small Sylvester solves because
``Y^T (X + eta) = (I + eta^T eta)^{1/2}`` is symmetric positive definite.
"""

from __future__ import annotations

import numpy as np

from .errors import AntipodalPoints, SingularSystem
from .linalg import inv_sqrt_spd, solve_lyapunov, solve_sylvester, symmetrize

__all__ = [
    "sphere_exp",
    "sphere_log",
    "Manifold",
    "Oblique",
    "Stiefel",
    "Euclidean",
]

# Below this tangent norm the sphere map switches to its series expansion.
_SERIES_TOL = 1e-8
# Above this value of x^T y the log map switches to its series expansion.
_LOG_SERIES_COS = 1.0 - 1e-10
# x^T y at or below -1 + this margin counts as antipodal.
_ANTIPODAL_MARGIN = 1e-12


def sphere_exp(x: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """Exponential map on the unit sphere: follow the great circle from
    ``x`` in direction ``eta`` (tangent, ``x^T eta = 0``) for arc length
    ``||eta||``."""
    t = float(np.linalg.norm(eta))
    if t == 0.0:
        return x.copy()
    if t < _SERIES_TOL:
        sinc = 1.0 - t * t / 6.0
    else:
        sinc = np.sin(t) / t
    y = x * np.cos(t) + eta * sinc
    return y / np.linalg.norm(y)


def _log_factor(c: float) -> float:
    # theta / sin(theta) evaluated at c = cos(theta), series near c -> 1.
    theta = np.arccos(c)
    if c >= _LOG_SERIES_COS:
        return 1.0 + theta * theta / 6.0
    return theta / np.sqrt(1.0 - c * c)


def sphere_log(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Inverse exponential map on the unit sphere.

    Returns the tangent vector at ``x`` whose exponential is ``y``:
    ``arccos(x^T y) / sqrt(1 - (x^T y)^2) * (I - x x^T) y``.

    Raises
    ------
    AntipodalPoints
        If ``x^T y <= -1 + 1e-12`` (the log map is undefined).
    """
    c = float(np.clip(x @ y, -1.0, 1.0))
    if c <= -1.0 + _ANTIPODAL_MARGIN:
        raise AntipodalPoints("log map undefined for (near-)antipodal points")
    return _log_factor(c) * (y - c * x)


def _columnwise_exp(x: np.ndarray, eta: np.ndarray) -> np.ndarray:
    # vectorized column-wise sphere_exp; exact-zero columns stay put
    t = np.linalg.norm(eta, axis=0)
    sinc = np.empty_like(t)
    small = t < _SERIES_TOL
    sinc[small] = 1.0 - t[small] ** 2 / 6.0
    np.divide(np.sin(t), t, out=sinc, where=~small)
    y = x * np.cos(t) + eta * sinc
    y /= np.linalg.norm(y, axis=0)
    return np.where(t == 0.0, x, y)


def _columnwise_log_factor(c: np.ndarray) -> np.ndarray:
    theta = np.arccos(c)
    factor = np.empty_like(c)
    near = c >= _LOG_SERIES_COS
    factor[near] = 1.0 + theta[near] ** 2 / 6.0
    np.divide(theta, np.sqrt(1.0 - c * c, where=~near, out=np.ones_like(c)),
              out=factor, where=~near)
    return factor


def _columnwise_log(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    # vectorized column-wise sphere_log
    c = np.clip(np.sum(x * y, axis=0), -1.0, 1.0)
    if np.any(c <= -1.0 + _ANTIPODAL_MARGIN):
        bad = np.nonzero(c <= -1.0 + _ANTIPODAL_MARGIN)[0]
        raise AntipodalPoints(
            f"log map undefined for (near-)antipodal columns {bad.tolist()}"
        )
    return _columnwise_log_factor(c) * (y - x * c)


class Manifold:
    """Shared surface of the manifolds in this module.

    Attributes
    ----------
    kind : str
        One of ``"oblique"``, ``"stiefel"``, ``"euclidean"``.
    n, p : int
        Points are ``(n, p)`` matrices, ``1 <= p <= n``.
    """

    kind = "abstract"

    def __init__(self, n: int, p: int):
        if not 1 <= p <= n:
            raise ValueError(f"need 1 <= p <= n, got p={p}, n={n}")
        self.n = int(n)
        self.p = int(p)

    # Euclidean trace metric, shared by every manifold here.
    @staticmethod
    def inner(a: np.ndarray, b: np.ndarray) -> float:
        return float(np.sum(a * b))

    @staticmethod
    def norm(a: np.ndarray) -> float:
        return float(np.linalg.norm(a))

    def zero_tangent(self) -> np.ndarray:
        return np.zeros((self.n, self.p))

    # -- implemented by subclasses -------------------------------------
    def project_tangent(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def retract(self, x: np.ndarray, eta: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def inverse_retract(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def point_defect(self, x: np.ndarray) -> float:
        """Distance of ``x`` from satisfying the manifold constraint."""
        raise NotImplementedError

    def tangent_defect(self, x: np.ndarray, eta: np.ndarray) -> float:
        """Distance of ``eta`` from the tangent space at ``x``."""
        raise NotImplementedError

    # -- validation helpers --------------------------------------------
    def check_point(self, x: np.ndarray, tol: float = 1e-10) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n, self.p):
            raise ValueError(f"expected shape {(self.n, self.p)}, got {x.shape}")
        defect = self.point_defect(x)
        if defect > tol:
            raise ValueError(f"point off the {self.kind} manifold (defect {defect:.3e})")
        return x

    def check_tangent(self, x: np.ndarray, eta: np.ndarray, tol: float = 1e-10) -> np.ndarray:
        eta = np.asarray(eta, dtype=float)
        if eta.shape != (self.n, self.p):
            raise ValueError(f"expected shape {(self.n, self.p)}, got {eta.shape}")
        defect = self.tangent_defect(x, eta)
        if defect > tol:
            raise ValueError(f"vector not tangent at the base point (defect {defect:.3e})")
        return eta

    def random_point(self, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def random_tangent(self, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return self.project_tangent(x, rng.standard_normal((self.n, self.p)))

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n}, p={self.p})"


class Oblique(Manifold):
    """(n, p) matrices whose columns each have unit 2-norm; the product of
    ``p`` unit spheres. Retraction is the column-wise exponential map."""

    kind = "oblique"

    def project_tangent(self, x, v):
        # column-wise: v - x (x^T v), removing each column's radial part
        return v - x * np.sum(x * v, axis=0)

    def retract(self, x, eta):
        return _columnwise_exp(x, eta)

    def inverse_retract(self, x, y):
        return _columnwise_log(x, y)

    def point_defect(self, x):
        return float(np.max(np.abs(np.linalg.norm(x, axis=0) - 1.0)))

    def tangent_defect(self, x, eta):
        return float(np.max(np.abs(np.sum(x * eta, axis=0))))

    def random_point(self, rng):
        x = rng.standard_normal((self.n, self.p))
        return x / np.linalg.norm(x, axis=0)


class Stiefel(Manifold):
    """(n, p) matrices with orthonormal columns, ``X^T X = I_p``, with the
    polar retraction and its differentiated-retraction transports."""

    kind = "stiefel"

    def project_tangent(self, x, v):
        return v - x @ symmetrize(x.T @ v)

    def retract(self, x, eta):
        if not np.any(eta):
            return x.copy()
        return (x + eta) @ inv_sqrt_spd(np.eye(self.p) + eta.T @ eta)

    def inverse_retract(self, x, y):
        # S solves (X^T Y) S + S (Y^T X) = 2 I with S symmetric; the polar
        # retraction of Y S - X recovers Y provided S is positive definite,
        # which holds whenever the points are close enough.
        s = solve_lyapunov(x.T @ y, 2.0 * np.eye(self.p))
        if np.linalg.eigvalsh(s)[0] <= 0.0:
            raise SingularSystem(
                "inverse polar retraction undefined: points too far apart"
            )
        return y @ s - x

    def point_defect(self, x):
        return float(np.linalg.norm(x.T @ x - np.eye(self.p)))

    def tangent_defect(self, x, eta):
        xte = x.T @ eta
        return float(np.linalg.norm(xte + xte.T))

    def random_point(self, rng):
        q, _ = np.linalg.qr(rng.standard_normal((self.n, self.p)))
        return q

    # -- differentiated-retraction transports --------------------------
    def _retraction_factors(self, x, eta):
        y = self.retract(x, eta)
        m = y.T @ (x + eta)  # equals (I + eta^T eta)^{1/2}, SPD
        return y, m

    def transport(self, x, eta, xi):
        """Differentiated polar retraction applied to ``xi``: the tangent
        vector at ``Y = R_X(eta)`` given by ``d/dt R_X(eta + t xi)`` at 0.

        Computed as ``Y Omega + (I - Y Y^T) xi M^{-1}`` with
        ``M = Y^T (X + eta)`` and ``Omega`` solving
        ``M Omega + Omega M = Y^T xi - xi^T Y``.
        """
        y, m = self._retraction_factors(x, eta)
        ytxi = y.T @ xi
        omega = solve_sylvester(m, m, ytxi - ytxi.T)
        w = _solve_right(m, xi)  # xi @ inv(m)
        out = y @ omega + w - y @ (y.T @ w)
        assert self.tangent_defect(y, out) <= 1e-8 * max(1.0, self.norm(out))
        return out

    def transport_inverse(self, x, eta, zeta):
        """Inverse of :meth:`transport`: the tangent vector ``xi`` at ``X``
        with ``transport(x, eta, xi) = zeta``."""
        y, m = self._retraction_factors(x, eta)
        p_part = (zeta - y @ (y.T @ zeta)) @ m
        ytz = y.T @ zeta
        ytx = y.T @ x
        rhs = (ytz @ m + m @ ytz) @ ytx - x.T @ p_part - p_part.T @ x
        a = solve_sylvester(x.T @ y, ytx, rhs)
        out = y @ a + p_part
        assert self.tangent_defect(x, out) <= 1e-8 * max(1.0, self.norm(out))
        return out

    def transport_adjoint_inverse(self, x, eta, xi):
        """Adjoint of :meth:`transport_inverse` in the trace metric: the
        tangent vector at ``Y = R_X(eta)`` satisfying
        ``<xi, transport_inverse(x, eta, zeta)> = <result, zeta>``
        for every tangent ``zeta`` at ``Y``."""
        y, m = self._retraction_factors(x, eta)
        xty = x.T @ y
        b = solve_sylvester(y.T @ x, xty, y.T @ xi)
        g = x @ b + x @ b.T - xi
        term = (g - y @ (y.T @ g)) @ m
        out = y @ (b @ xty @ m + m @ b @ xty) - term
        # the pairing only determines the result modulo the normal space at
        # Y; project onto the tangent space to get the canonical
        # representative
        out = self.project_tangent(y, out)
        assert self.tangent_defect(y, out) <= 1e-8 * max(1.0, self.norm(out))
        return out


def _solve_right(m: np.ndarray, b: np.ndarray) -> np.ndarray:
    # b @ inv(m) without forming the inverse
    return np.linalg.solve(m.T, b.T).T


class Euclidean(Manifold):
    """Flat reference space: ``R^{n x p}`` with retraction ``x + eta``.

    Every matrix is a point and every matrix a tangent vector. Used to
    validate the solvers against their textbook flat-space counterparts.
    """

    kind = "euclidean"

    def project_tangent(self, x, v):
        return np.asarray(v, dtype=float)

    def retract(self, x, eta):
        return x + eta

    def inverse_retract(self, x, y):
        return y - x

    def point_defect(self, x):
        return 0.0

    def tangent_defect(self, x, eta):
        return 0.0

    def random_point(self, rng):
        return rng.standard_normal((self.n, self.p))
