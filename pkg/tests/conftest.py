import numpy as np
import pytest

from rproxgrad.manifolds import Oblique, Stiefel


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)


def make_case(manifold_cls, n, p, seed, scale=0.3):
    """Seeded (manifold, point, tangent) triple with a moderate tangent."""
    rng = np.random.default_rng(seed)
    man = manifold_cls(n, p)
    x = man.random_point(rng)
    eta = man.random_tangent(x, rng)
    norm = np.linalg.norm(eta)
    if norm > 0:
        eta *= scale / norm
    return man, x, eta


def stiefel_case(n, p, seed, scale=0.3):
    return make_case(Stiefel, n, p, seed, scale)


def oblique_case(n, p, seed, scale=0.3):
    return make_case(Oblique, n, p, seed, scale)
