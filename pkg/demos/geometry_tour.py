"""A guided tour of the manifold geometry toolkit.

Walks through the unit-sphere maps, the oblique and Stiefel manifolds,
their retractions and inverse retractions, and the three Stiefel vector
transports, verifying the defining identities numerically along the way.

Run:  python demos/geometry_tour.py
"""

import numpy as np

from rproxgrad.manifolds import Oblique, Stiefel, sphere_exp, sphere_log

rng = np.random.default_rng(7)

print("== Unit sphere: exponential map and its inverse ==")
x = rng.standard_normal(5)
x /= np.linalg.norm(x)
eta = rng.standard_normal(5)
eta -= (x @ eta) * x          # project to the tangent space at x
eta *= 0.8 / np.linalg.norm(eta)
y = sphere_exp(x, eta)
print(f"||y|| = {np.linalg.norm(y):.15f}  (stays on the sphere)")
back = sphere_log(x, y)
print(f"log(exp(eta)) error: {np.linalg.norm(back - eta):.2e}")
print(f"arc length = ||eta|| = {np.linalg.norm(eta):.6f}, "
      f"angle(x, y) = {np.arccos(x @ y):.6f}")

print("\n== Oblique manifold OB(p, n): a product of spheres ==")
oblique = Oblique(8, 3)
x = oblique.random_point(rng)
print(f"column norms: {np.linalg.norm(x, axis=0)}")
v = rng.standard_normal((8, 3))
eta = oblique.project_tangent(x, v)
print(f"tangency defect diag(X^T eta): {oblique.tangent_defect(x, eta):.2e}")
y = oblique.retract(x, 0.5 * eta)
print(f"retraction keeps unit columns: defect {oblique.point_defect(y):.2e}")
print(f"round trip error: "
      f"{np.linalg.norm(oblique.inverse_retract(x, y) - 0.5 * eta):.2e}")

print("\n== Stiefel manifold St(p, n): polar retraction ==")
stiefel = Stiefel(8, 3)
x = stiefel.random_point(rng)
eta = stiefel.random_tangent(x, rng)
eta *= 0.4 / np.linalg.norm(eta)
y = stiefel.retract(x, eta)
print(f"orthonormality defect of R_X(eta): {stiefel.point_defect(y):.2e}")
print(f"inverse retraction error: "
      f"{np.linalg.norm(stiefel.inverse_retract(x, y) - eta):.2e}")

# the retraction differentiates to the identity at the origin
t = 1e-6
fd = (stiefel.retract(x, t * eta) - stiefel.retract(x, -t * eta)) / (2 * t)
print(f"derivative-at-zero defect: {np.abs(fd - eta).max():.2e}")

print("\n== Differentiated-retraction transports ==")
xi = stiefel.random_tangent(x, rng)
moved = stiefel.transport(x, eta, xi)
print(f"transported vector is tangent at Y: {stiefel.tangent_defect(y, moved):.2e}")
back = stiefel.transport_inverse(x, eta, moved)
print(f"inverse transport round trip: {np.linalg.norm(back - xi):.2e}")

# adjoint identity <xi, T^-1 zeta>_X = <T^-sharp xi, zeta>_Y
zeta = stiefel.random_tangent(y, rng)
lhs = stiefel.inner(xi, stiefel.transport_inverse(x, eta, zeta))
rhs = stiefel.inner(stiefel.transport_adjoint_inverse(x, eta, xi), zeta)
print(f"adjoint identity gap: {abs(lhs - rhs):.2e}")
