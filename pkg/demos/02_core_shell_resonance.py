"""
Core-shell resonance with Dirichlet data
========================================

A core ``|x| < 1`` with permittivity ``-1 + i delta`` sits inside a matrix
``1 < |x| < R``; Dirichlet data ``g`` is imposed on ``|x| = R``. With
``g = sum n^-2 e^{i n theta}`` and ``R = 3`` the gradient energy blows up as
the loss vanishes while the dissipated power stays bounded, and the field
near the origin converges.
"""
# %%
import numpy as np

from plasmonres import problem1 as p1
from plasmonres.fourier_core import evaluate_polar

R = 3.0
h = p1.inverse_square_data(100)

# %%
print(f"{'delta':>8} {'N':>4} {'power':>10} {'grad energy':>12} {'gap':>10} {'|u(0.1,0)|':>11}")
for k in (4, 8, 12, 16, 20):
    d = 10.0 ** -k
    sol = p1.solve_modes(h, p1.SolverConfig.for_data(R, d, h))
    u = evaluate_polar(p1.assemble_field(sol), np.array([0.1]), np.array([0.0]))[0]
    print(f"{d:8.0e} {sol.config.N:4d} {p1.power(sol):10.5f} {p1.grad_energy(sol):12.4e} "
          f"{p1.localized_resonance_gap(sol):10.3e} {abs(u):11.6f}")

# %%
# The trace of u_delta - v on |x| = 1/R is h_n times a multiplier of modulus
# at most one; it saturates at one once delta R^{2n} is large.
n = np.arange(1, 31)
print("multiplier moduli at delta=1e-8:", np.round(p1.gap_multiplier_modulus(n, R, 1e-8)[::5], 6))

# %%
# Limit field inside B_{1/R}: the harmonic extension of h from |x| = 1/R.
v = p1.limit_field_v(h, R)
print("v(0.1, 0) =", evaluate_polar(v, np.array([0.1]), np.array([0.0]))[0])
