"""
Independent oracles and the command line
========================================

The closed forms are checked against brute force: a direct elimination of the
raw transmission conditions, a finite-difference radial solver and the energy
balance. The same computations are reachable from the ``plasmonres`` command.
"""
# %%
import json
import tempfile
from pathlib import Path

import numpy as np

from plasmonres import problem1 as p1
from plasmonres import problem2 as p2
from plasmonres.cli import main
from plasmonres.oracle import energy_identity_check, fd_radial_bvp, mode_transmission_oracle

# %%
c, p, q = mode_transmission_oracle(1, 1.0, 2.0, 1.0)
print("oracle c for n=1, R=2, delta=1:", c, "  closed form:", p1.core_coefficients(1.0, 1, 2.0, 1.0))

h = p1.inverse_square_data(100)
for d in (1e-2, 1e-10, 1e-18):
    sol = p1.solve_modes(h, p1.SolverConfig.for_data(3.0, d, h))
    print(f"energy balance residual at delta={d:.0e}: {energy_identity_check(sol):.1e}")

# %%
src = p2.pushforward_source(p2.cutoff_source(4))
prepared = p2.prepare_source(p2.cutoff_source(4))
N = src.N


def f1(r):
    out = np.zeros(r.shape, complex)
    m = (r >= src.rho_lo) & (r <= src.rho_hi)
    out[m] = src(r[m])[N + 1]
    return out


for M in (1000, 2000, 4000):
    err = abs(fd_radial_bvp(1, f1, M)[1][-1] - prepared.w_trace.plus[0])
    print(f"finite differences, M={M}: trace error {err:.2e}")

# %%
with tempfile.TemporaryDirectory() as tmp:
    cfg = Path(tmp) / "run.ini"
    cfg.write_text("[problem]\nR = 3\ndelta = 1e-6\n\n[data]\ngenerator = inverse_square\n")
    code = main(["--out", str(Path(tmp) / "out"), "solve1", str(cfg)])
    summary = json.loads((Path(tmp) / "out" / "summary.json").read_text())
    print("exit", code, {k: summary[k] for k in ("N", "E_delta", "verdict")})
    print("check-compat exit:", main(["check-compat", "1", "--data", "generator=geometric", "--data", "rate=0.5", "--data", "N=10"]))
