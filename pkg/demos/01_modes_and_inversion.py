"""
Fourier modes, harmonic fields and the Kelvin inversion
=======================================================

Every field in this package is a finite sum of polar harmonics
``r^{+-n} e^{i n theta}`` on a stack of annuli. This script projects a
boundary function onto modes, evaluates the resulting field, checks its
gradient energy against brute-force quadrature and reflects it through the
unit circle.
"""
# %%
import numpy as np

from plasmonres.fourier_core import (
    FieldRegion,
    HarmonicField,
    ModalCoefficients,
    evaluate_polar,
    grad_energy_annulus,
    grad_energy_disk,
    h_half_norm,
    project_boundary,
)
from plasmonres.kelvin import KELVIN, map_point, reflect_field
from plasmonres.oracle import QuadratureGrid, cartesian_gradient, quadrature_energy

# %%
# Project a smooth boundary function. The trapezoid rule on 8N nodes is exact
# for trigonometric polynomials of lower degree.
g = project_boundary(lambda t: np.cos(t) + 0.5j * np.sin(3 * t), N=4)
print("h_+ :", np.round(g.plus, 12))
print("h_- :", np.round(g.minus, 12))
print("squared H^1/2 norm:", h_half_norm(g))

# %%
# Harmonic extension into the unit disk and its gradient energy,
# closed form against tensor quadrature.
disk = HarmonicField([FieldRegion(0.0, 1.0, g)])
closed = grad_energy_disk(g, 1.0)
quad = quadrature_energy(cartesian_gradient(disk), ("annulus", 0.0, 1.0), QuadratureGrid.for_modes(g.N))
print(f"disk energy: closed form {closed:.15f}, quadrature {quad:.15f}")

# %%
# An exterior field on 1 < r < 3 with growing, decaying and log terms.
rng = np.random.default_rng(1)
inner = ModalCoefficients(0.0, rng.normal(size=3), rng.normal(size=3))
outer = ModalCoefficients(0.0, rng.normal(size=3), 1j * rng.normal(size=3))
u = HarmonicField([FieldRegion(1.0, 3.0, inner, outer, 0.25)])
print("annulus energy:", grad_energy_annulus(inner, outer, 0.25, 1.0, 3.0))

# %%
# Inversion x -> x/|x|^2 swaps r^n and r^-n and maps 1 < r < 3 onto 1/3 < r < 1.
# Harmonicity and the Dirichlet energy both survive.
print("F(2, 0) =", map_point(KELVIN, np.array([2.0, 0.0])))
v = reflect_field(u)
r, t = np.array([1.5, 2.5]), np.array([0.3, 2.0])
print("u(r, t)   =", evaluate_polar(u, r, t))
print("v(1/r, t) =", evaluate_polar(v, 1 / r, t))
grid = QuadratureGrid(64, 32)
eu = quadrature_energy(cartesian_gradient(u), ("annulus", 1.0, 3.0), grid)
ev = quadrature_energy(cartesian_gradient(v), ("annulus", 1 / 3, 1.0), grid)
print(f"energy on 1<r<3: {eu:.12f}; energy of the image on 1/3<r<1: {ev:.12f}")
