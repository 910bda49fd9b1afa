"""
Compatibility and blow-up rates
===============================

Whether the energy stays bounded is decided by the decay of the data:
``sum n R^{2n} |h_n|^2 < infinity``. Data built to sit past the threshold by a
controlled amount grows like ``delta^{-2 alpha}``, which a log-log fit recovers.
"""
# %%
import numpy as np

from plasmonres import problem1 as p1
from plasmonres.fourier_core import ModalCoefficients, field_h1_norm

R = 3.0

# %%
# Without a tail descriptor the verdict comes from the coefficients alone. A
# trig polynomial is recognized by a zero upper half of its container, so it
# is padded here; unpadded, two nonzero modes out of two are Indeterminate.
cases = {
    "trig polynomial": ModalCoefficients(0.0, [1.0, 0.5], [0.2, 0.0]).resized(8),
    "h_n = R^-2n": ModalCoefficients(0.0, R ** -(2.0 * np.arange(1, 101)), np.zeros(100)),
    "h_n = n^-2": p1.inverse_square_data(100),
}
for name, h in cases.items():
    v = p1.classify_compatibility(h, R)
    print(f"{name:16s} -> {v.verdict.value:12s} decay rate {v.decay_rate:.4f} (critical {1 / R:.4f})")
print("rate 1/R with a descriptor:", p1.classify_compatibility(cases["h_n = R^-2n"], R, p1.TailDescriptor(1 / R)).verdict.value)

# %%
grid = np.logspace(-10, -4, 13)
for alpha in (0.25, 0.4):
    fit = p1.delta_sweep(lambda N, a=alpha: p1.design_incompatible_data(a, R, N), R, grid)
    print(f"alpha={alpha}: fitted slope {fit.slope:.4f}, expected {-2 * alpha}, residual {fit.max_residual:.1e}")

# %%
# Compatible data: the gradient energy settles, and u_delta approaches the
# closed-form limit u_0 at rate delta once every mode has passed delta R^{2n} ~ 1.
h = cases["trig polynomial"]
print("grad energy slope:", round(p1.delta_sweep(h, R, grid).slope, 5))
u0 = p1.limit_field_u0(h, R)
for d in (1e-4, 1e-6, 1e-8):
    diff = p1.assemble_field(p1.solve_modes(h, p1.SolverConfig(R, d, h.N))) - u0
    print(f"delta={d:.0e}: |u_delta - u_0|_H1 = {field_h1_norm(diff):.3e}")
