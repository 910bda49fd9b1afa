"""
Whole-plane source problem
==========================

A source ``f`` with zero mean lives in ``2 < |x| < 3`` and the core has
permittivity ``-1 + i delta`` everywhere inside the unit circle. Inverting
the exterior onto the disk turns the solve into a Neumann problem for ``w``;
the trace of ``w`` on the unit circle decides everything. A nonzero trace
gives energy growth like ``delta^-2`` on every region, a zero trace gives a
field that does not depend on ``delta`` at all.
"""
# %%
import numpy as np

from plasmonres import problem2 as p2
from plasmonres.regions import AnnularSector, Disk, Rectangle

# %%
prepared = p2.prepare_source(p2.cutoff_source(100))
print("verdict:", prepared.compat.verdict.value, "dominant mode:", prepared.compat.dominant_mode)
print("w_n(1), n=1..4:", prepared.w_trace.plus[:4].real, "vs 2/6^n:", 2 / 6.0 ** np.arange(1, 5))

# %%
grid = np.logspace(-8, -3, 6)
for name, reg in {"core": Disk(0.25), "shell image": AnnularSector(1.2, 1.8, 0, np.pi / 4),
                  "far field": Rectangle(5, 6, 0, 1)}.items():
    print(f"{name:12s} slope {p2.plane_sweep(prepared, reg, grid).slope:.6f}")

# %%
bump = p2.prepare_source(p2.compatible_bump_source())
print("bump verdict:", bump.compat.verdict.value)
# zero inside the core and in 1 < r < 2, psi(1/r) cos(theta) on the source ring
x, y = np.array([0.5, 1.5, 2.5, 0.0, -1.8]), np.array([0.0, 0.5, 0.0, 2.2, -1.5])
for d in (1e-2, 1e-8):
    print(f"delta={d:.0e}: u =", np.round(p2.assemble_field2(p2.solve_plane(bump, d))(x, y), 12))
