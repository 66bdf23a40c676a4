import numpy as np
import pytest

from rproxgrad.errors import BadShape
from rproxgrad.spca import (
    build_spca_problem,
    generate_random_data,
    generate_synthetic_data,
    initial_point,
    oblique_spca_problem,
    standardize_columns,
    stiefel_spca_problem,
    synthetic_components,
)


def finite_difference_gradient(f, x, step=1e-6):
    g = np.zeros_like(x)
    for idx in np.ndindex(*x.shape):
        plus = x.copy()
        minus = x.copy()
        plus[idx] += step
        minus[idx] -= step
        g[idx] = (f(plus) - f(minus)) / (2 * step)
    return g


class TestDataGeneration:
    def test_random_data_standardized(self):
        a = generate_random_data(20, 32, 1)
        assert np.abs(a.mean(axis=0)).max() <= 1e-12
        assert np.abs(a.std(axis=0) - 1.0).max() <= 1e-12

    def test_random_data_deterministic(self):
        np.testing.assert_array_equal(
            generate_random_data(20, 32, 7), generate_random_data(20, 32, 7)
        )

    def test_paper_shape_accepted(self):
        assert generate_random_data(20, 32, 0).shape == (20, 32)

    def test_synthetic_block_structure_noise_free(self):
        raw = generate_synthetic_data(20, 25, 0, noise_std=0.0, standardize=False)
        comps = synthetic_components(25)
        for i in range(5):
            block = raw[4 * i : 4 * (i + 1)]
            np.testing.assert_array_equal(block, np.tile(comps[i], (4, 1)))

    def test_synthetic_standardized_and_deterministic(self):
        a = generate_synthetic_data(20, 30, 3)
        assert np.abs(a.mean(axis=0)).max() <= 1e-12
        assert np.abs(a.std(axis=0) - 1.0).max() <= 1e-12
        np.testing.assert_array_equal(a, generate_synthetic_data(20, 30, 3))

    def test_synthetic_rejects_bad_row_count(self):
        with pytest.raises(BadShape):
            generate_synthetic_data(21, 30, 0)

    def test_components_unit_norm_contiguous(self):
        comps = synthetic_components(40)
        np.testing.assert_allclose(np.linalg.norm(comps, axis=1), 1.0, atol=1e-12)
        for row in comps:
            support = np.nonzero(np.abs(row) > 1e-12)[0]
            assert support.size > 0
            assert support[-1] - support[0] <= len(row) // 5

    def test_standardize_rejects_constant_column(self):
        a = np.ones((6, 2))
        a[:, 1] = np.arange(6.0)
        with pytest.raises(ValueError):
            standardize_columns(a)


class TestInitialPoint:
    def test_diagonal_case(self):
        x0 = initial_point(np.diag([3.0, 2.0, 1.0]), 2)
        np.testing.assert_allclose(x0, np.eye(3)[:, :2], atol=1e-12)

    def test_on_both_manifolds(self):
        a = generate_random_data(20, 12, 5)
        x0 = initial_point(a, 3)
        np.testing.assert_allclose(x0.T @ x0, np.eye(3), atol=1e-10)
        np.testing.assert_allclose(np.linalg.norm(x0, axis=0), 1.0, atol=1e-10)

    def test_deterministic(self):
        a = generate_random_data(20, 12, 6)
        np.testing.assert_array_equal(initial_point(a, 3), initial_point(a, 3))


class TestObliqueModel:
    def test_zero_residual_point(self):
        # orthogonal data columns: the leading right singular vectors
        # reproduce D^2 exactly, so f = 0 and grad f = 0
        a = np.diag([3.0, 2.0, 1.0, 0.5])
        prob = oblique_spca_problem(a, 2, 1.0, check_standardized=False)
        x = np.eye(4)[:, :2]
        assert prob.f_value(x) == pytest.approx(0.0, abs=1e-12)
        np.testing.assert_allclose(prob.euclidean_grad_f(x), 0.0, atol=1e-12)

    def test_gradient_matches_finite_differences(self):
        a = generate_random_data(10, 8, 11)
        prob = oblique_spca_problem(a, 2, 1.0)
        x = prob.manifold.random_point(np.random.default_rng(0))
        fd = finite_difference_gradient(prob.f_value, x)
        scale = max(1.0, np.abs(fd).max())
        np.testing.assert_allclose(
            prob.euclidean_grad_f(x) / scale, fd / scale, atol=1e-5
        )

    def test_value_nonnegative(self):
        a = generate_random_data(10, 8, 12)
        prob = oblique_spca_problem(a, 3, 1.0)
        rng = np.random.default_rng(1)
        for _ in range(10):
            assert prob.f_value(prob.manifold.random_point(rng)) >= 0.0

    def test_riemannian_gradient_definition(self):
        a = generate_random_data(10, 8, 13)
        prob = oblique_spca_problem(a, 2, 1.0)
        x = prob.manifold.random_point(np.random.default_rng(2))
        egrad = prob.euclidean_grad_f(x)
        expected = egrad - x * np.sum(x * egrad, axis=0)
        np.testing.assert_allclose(prob.riemannian_grad_f(x), expected, atol=1e-12)
        assert prob.manifold.tangent_defect(x, prob.riemannian_grad_f(x)) <= 1e-10


class TestStiefelModel:
    def test_identity_data(self):
        prob = stiefel_spca_problem(np.eye(3), 2, 1.0, check_standardized=False)
        x = np.eye(3)[:, :2]
        assert prob.f_value(x) == pytest.approx(-2.0)
        np.testing.assert_allclose(prob.euclidean_grad_f(x), -2.0 * x, atol=1e-12)

    def test_gradient_matches_finite_differences(self):
        a = generate_random_data(10, 8, 14)
        prob = stiefel_spca_problem(a, 2, 1.0)
        x = prob.manifold.random_point(np.random.default_rng(3))
        fd = finite_difference_gradient(prob.f_value, x)
        scale = max(1.0, np.abs(fd).max())
        np.testing.assert_allclose(
            prob.euclidean_grad_f(x) / scale, fd / scale, atol=1e-5
        )

    def test_value_lower_bound(self):
        a = generate_random_data(10, 8, 15)
        prob = stiefel_spca_problem(a, 3, 1.0)
        bound = -3 * np.linalg.norm(a, 2) ** 2
        rng = np.random.default_rng(4)
        for _ in range(10):
            assert prob.f_value(prob.manifold.random_point(rng)) >= bound - 1e-9

    def test_riemannian_gradient_definition(self):
        a = generate_random_data(10, 8, 16)
        prob = stiefel_spca_problem(a, 2, 1.0)
        x = prob.manifold.random_point(np.random.default_rng(5))
        egrad = prob.euclidean_grad_f(x)
        expected = egrad - 0.5 * x @ (x.T @ egrad + egrad.T @ x)
        np.testing.assert_allclose(prob.riemannian_grad_f(x), expected, atol=1e-12)


class TestDirectionalDerivative:
    @pytest.mark.parametrize("variant", ["oblique", "stiefel"])
    def test_gradient_against_retraction_curve(self, variant):
        a = generate_random_data(12, 9, 17)
        prob = build_spca_problem(variant, a, 2, 1.0)
        man = prob.manifold
        rng = np.random.default_rng(6)
        x = man.random_point(rng)
        eta = man.random_tangent(x, rng)
        eta /= np.linalg.norm(eta)
        t = 1e-6
        fd = (prob.f_value(man.retract(x, t * eta)) - prob.f_value(man.retract(x, -t * eta))) / (2 * t)
        inner = man.inner(prob.riemannian_grad_f(x), eta)
        assert fd == pytest.approx(inner, rel=1e-5, abs=1e-7)


class TestProblemConstruction:
    def test_rejects_unstandardized_data(self):
        with pytest.raises(ValueError):
            oblique_spca_problem(np.eye(4), 2, 1.0)

    def test_default_constants(self):
        a = generate_random_data(20, 16, 18)
        fro_sq = np.sum(a * a)
        ob = oblique_spca_problem(a, 2, 2.0)
        assert ob.lipschitz == pytest.approx(4.0 * fro_sq)
        assert ob.lipschitz_estimate == pytest.approx(0.5 * fro_sq)
        st = stiefel_spca_problem(a, 2, 2.0)
        assert st.lipschitz == pytest.approx(2.0 * np.linalg.norm(a, 2))
        assert st.lipschitz_estimate == pytest.approx(1.6 * fro_sq)

    def test_g_value_and_objective(self):
        a = generate_random_data(10, 6, 19)
        prob = stiefel_spca_problem(a, 2, 2.0)
        assert prob.g_value(np.eye(6)[:, :2]) == pytest.approx(4.0)
        x = prob.manifold.random_point(np.random.default_rng(7))
        assert prob.objective(x) == pytest.approx(prob.f_value(x) + prob.g_value(x))

    def test_unknown_variant(self):
        a = generate_random_data(10, 6, 20)
        with pytest.raises(ValueError):
            build_spca_problem("grassmann", a, 2, 1.0)
