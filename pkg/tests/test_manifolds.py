import numpy as np
import pytest

from conftest import oblique_case, stiefel_case
from rproxgrad.errors import AntipodalPoints, SingularSystem
from rproxgrad.manifolds import Euclidean, Oblique, Stiefel, sphere_exp, sphere_log


def e(i, n=3):
    v = np.zeros(n)
    v[i] = 1.0
    return v


def tangent_basis(man, x):
    """Orthonormal basis of the tangent space at x, via SVD of projected
    canonical directions."""
    n, p = man.n, man.p
    cols = []
    for i in range(n):
        for j in range(p):
            v = np.zeros((n, p))
            v[i, j] = 1.0
            cols.append(man.project_tangent(x, v).ravel())
    u, s, _ = np.linalg.svd(np.array(cols).T, full_matrices=False)
    basis = [u[:, k].reshape(n, p) for k in range(len(s)) if s[k] > 1e-8]
    return basis


class TestSphereMaps:
    def test_exp_at_zero_is_exact(self):
        x = e(0)
        assert np.array_equal(sphere_exp(x, np.zeros(3)), x)

    def test_exp_quarter_turn(self):
        np.testing.assert_allclose(sphere_exp(e(0), (np.pi / 2) * e(1)), e(1), atol=1e-15)

    def test_exp_half_turn(self):
        np.testing.assert_allclose(sphere_exp(e(0), np.pi * e(1)), -e(0), atol=1e-15)

    def test_log_at_base(self):
        np.testing.assert_allclose(sphere_log(e(0), e(0)), np.zeros(3), atol=1e-15)

    def test_log_quarter_turn(self):
        np.testing.assert_allclose(sphere_log(e(0), e(1)), (np.pi / 2) * e(1), atol=1e-15)

    def test_round_trip(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            x = rng.standard_normal(5)
            x /= np.linalg.norm(x)
            y = rng.standard_normal(5)
            y /= np.linalg.norm(y)
            if x @ y <= -0.99:
                continue
            eta = sphere_log(x, y)
            np.testing.assert_allclose(sphere_exp(x, eta), y, atol=1e-8)

    def test_log_near_base_series_branch(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal(6)
        x /= np.linalg.norm(x)
        eta = rng.standard_normal(6)
        eta -= (x @ eta) * x
        eta *= 1e-7 / np.linalg.norm(eta)
        y = sphere_exp(x, eta)
        np.testing.assert_allclose(sphere_log(x, y), eta, atol=1e-14)

    def test_antipodal_raises(self):
        with pytest.raises(AntipodalPoints):
            sphere_log(e(0), -e(0))


class TestProjectTangent:
    @pytest.mark.parametrize("case", [oblique_case(6, 3, 11), stiefel_case(6, 3, 12)])
    def test_idempotent_and_tangent(self, case):
        man, x, _ = case
        rng = np.random.default_rng(0)
        v = rng.standard_normal((man.n, man.p))
        pv = man.project_tangent(x, v)
        assert man.tangent_defect(x, pv) <= 1e-10
        np.testing.assert_allclose(man.project_tangent(x, pv), pv, atol=1e-12)

    def test_oblique_kills_radial(self):
        man = Oblique(4, 2)
        x = man.random_point(np.random.default_rng(1))
        np.testing.assert_allclose(man.project_tangent(x, x), 0.0, atol=1e-14)

    def test_stiefel_p1_kills_base(self):
        man = Stiefel(3, 1)
        x = e(0).reshape(3, 1)
        np.testing.assert_allclose(man.project_tangent(x, x), 0.0, atol=1e-14)

    def test_projection_is_orthogonal(self):
        # projection residual is metric-orthogonal to the tangent space
        man, x, _ = stiefel_case(5, 2, 13)
        rng = np.random.default_rng(2)
        v = rng.standard_normal((5, 2))
        res = v - man.project_tangent(x, v)
        for b in tangent_basis(man, x):
            assert abs(man.inner(res, b)) <= 1e-12


class TestRetractions:
    @pytest.mark.parametrize("case", [oblique_case(7, 3, 21), stiefel_case(7, 3, 22)])
    def test_zero_step_exact(self, case):
        man, x, _ = case
        assert np.array_equal(man.retract(x, np.zeros_like(x)), x)

    @pytest.mark.parametrize("case", [oblique_case(7, 3, 23), stiefel_case(7, 3, 24)])
    def test_lands_on_manifold(self, case):
        man, x, eta = case
        assert man.point_defect(man.retract(x, eta)) <= 1e-10

    @pytest.mark.parametrize("case", [oblique_case(7, 3, 25), stiefel_case(7, 3, 26)])
    def test_directional_derivative(self, case):
        # d/dt R(t eta) at 0 equals eta (centered differences, step 1e-6)
        man, x, eta = case
        t = 1e-6
        fd = (man.retract(x, t * eta) - man.retract(x, -t * eta)) / (2 * t)
        np.testing.assert_allclose(fd, eta, atol=1e-5)

    def test_stiefel_p1_is_normalization(self):
        man = Stiefel(5, 1)
        rng = np.random.default_rng(5)
        x = man.random_point(rng)
        eta = man.random_tangent(x, rng)
        expected = (x + eta) / np.linalg.norm(x + eta)
        np.testing.assert_allclose(man.retract(x, eta), expected, atol=1e-12)

    def test_stiefel_restores_orthonormality(self):
        man, x, eta = stiefel_case(3, 2, 27, scale=0.5)
        y = man.retract(x, eta)
        np.testing.assert_allclose(y.T @ y, np.eye(2), atol=1e-10)


class TestInverseRetractions:
    @pytest.mark.parametrize("case", [oblique_case(6, 2, 31), stiefel_case(6, 2, 32)])
    def test_same_point_gives_zero(self, case):
        man, x, _ = case
        np.testing.assert_allclose(man.inverse_retract(x, x), 0.0, atol=1e-12)

    @pytest.mark.parametrize(
        "case",
        [oblique_case(6, 2, 33), stiefel_case(6, 2, 34), stiefel_case(9, 4, 35)],
    )
    def test_inverse_then_retract(self, case):
        man, x, eta = case
        y = man.retract(x, eta)
        back = man.inverse_retract(x, y)
        np.testing.assert_allclose(man.retract(x, back), y, atol=1e-8)

    @pytest.mark.parametrize(
        "case",
        [oblique_case(6, 2, 36, scale=0.1), stiefel_case(6, 2, 37, scale=0.1)],
    )
    def test_retract_then_inverse(self, case):
        man, x, eta = case
        np.testing.assert_allclose(
            man.inverse_retract(x, man.retract(x, eta)), eta, atol=1e-8
        )

    def test_stiefel_far_points_raise(self):
        man = Stiefel(4, 2)
        x = np.eye(4)[:, :2]
        y = np.eye(4)[:, 2:]  # orthogonal complement: X^T Y = 0
        with pytest.raises(SingularSystem):
            man.inverse_retract(x, y)


class TestStiefelTransports:
    def test_identity_at_zero(self):
        man, x, _ = stiefel_case(6, 3, 41)
        rng = np.random.default_rng(0)
        xi = man.random_tangent(x, rng)
        zero = np.zeros_like(x)
        np.testing.assert_allclose(man.transport(x, zero, xi), xi, atol=1e-10)
        np.testing.assert_allclose(man.transport_inverse(x, zero, xi), xi, atol=1e-10)
        np.testing.assert_allclose(
            man.transport_adjoint_inverse(x, zero, xi), xi, atol=1e-10
        )

    def test_linearity(self):
        man, x, eta = stiefel_case(6, 3, 42)
        rng = np.random.default_rng(1)
        xi1 = man.random_tangent(x, rng)
        xi2 = man.random_tangent(x, rng)
        for op in (man.transport, man.transport_adjoint_inverse):
            combo = op(x, eta, 0.3 * xi1 - 1.7 * xi2)
            parts = 0.3 * op(x, eta, xi1) - 1.7 * op(x, eta, xi2)
            np.testing.assert_allclose(combo, parts, atol=1e-10)

    def test_matches_finite_difference(self):
        man, x, eta = stiefel_case(6, 3, 43)
        rng = np.random.default_rng(2)
        xi = man.random_tangent(x, rng)
        y = man.retract(x, eta)
        t = 1e-6
        fd = (man.retract(x, eta + t * xi) - man.retract(x, eta)) / t
        fd = man.project_tangent(y, fd)
        np.testing.assert_allclose(man.transport(x, eta, xi), fd, atol=1e-4)

    def test_inverse_composition(self):
        man, x, eta = stiefel_case(6, 3, 44)
        rng = np.random.default_rng(3)
        xi = man.random_tangent(x, rng)
        y = man.retract(x, eta)
        zeta = man.random_tangent(y, rng)
        np.testing.assert_allclose(
            man.transport_inverse(x, eta, man.transport(x, eta, xi)), xi, atol=1e-8
        )
        np.testing.assert_allclose(
            man.transport(x, eta, man.transport_inverse(x, eta, zeta)), zeta, atol=1e-8
        )

    def test_adjoint_identity_probes(self):
        man, x, eta = stiefel_case(6, 3, 45)
        rng = np.random.default_rng(4)
        for _ in range(20):
            xi = man.random_tangent(x, rng)
            y = man.retract(x, eta)
            zeta = man.random_tangent(y, rng)
            lhs = man.inner(xi, man.transport_inverse(x, eta, zeta))
            rhs = man.inner(man.transport_adjoint_inverse(x, eta, xi), zeta)
            assert abs(lhs - rhs) <= 1e-8 * max(1.0, abs(lhs))

    def test_adjoint_against_materialized_matrix(self):
        # build the matrix of T^{-1}: T_Y -> T_X column by column; the
        # adjoint's matrix in the same orthonormal bases must be its
        # transpose
        man, x, eta = stiefel_case(5, 2, 46)
        y = man.retract(x, eta)
        basis_x = tangent_basis(man, x)
        basis_y = tangent_basis(man, y)
        inv_mat = np.array(
            [
                [man.inner(bx, man.transport_inverse(x, eta, by)) for by in basis_y]
                for bx in basis_x
            ]
        )
        adj_mat = np.array(
            [
                [man.inner(by, man.transport_adjoint_inverse(x, eta, bx)) for bx in basis_x]
                for by in basis_y
            ]
        )
        np.testing.assert_allclose(adj_mat, inv_mat.T, atol=1e-9)


class TestEuclidean:
    def test_flat_ops(self):
        man = Euclidean(4, 2)
        rng = np.random.default_rng(6)
        x = man.random_point(rng)
        v = rng.standard_normal((4, 2))
        np.testing.assert_array_equal(man.project_tangent(x, v), v)
        np.testing.assert_array_equal(man.retract(x, v), x + v)
        np.testing.assert_allclose(man.inverse_retract(x, x + v), v, atol=1e-15)
        assert man.point_defect(x) == 0.0


class TestValidation:
    def test_check_point_rejects_off_manifold(self):
        man = Stiefel(4, 2)
        with pytest.raises(ValueError):
            man.check_point(np.ones((4, 2)))
        with pytest.raises(ValueError):
            man.check_point(np.eye(4)[:, :1])  # wrong shape

    def test_check_tangent_rejects_nontangent(self):
        man = Oblique(4, 2)
        x = man.random_point(np.random.default_rng(7))
        with pytest.raises(ValueError):
            man.check_tangent(x, x)
