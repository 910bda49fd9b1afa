"""Core-shell Dirichlet problem in B_R with permittivity -1 + i delta inside B_1.

``div(eps_delta grad u) = 0`` in ``B_R``, ``u = g`` on ``|x| = R``; ``eps = 1``
for ``1 < |x| < R``. Everything reduces to one scalar relation per Fourier
mode, so the solver is exact up to the truncation order.
"""
from __future__ import annotations

import enum
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .fourier_core import (
    FieldRegion,
    HarmonicField,
    ModalCoefficients,
    field_grad_energy,
    field_h1_norm,
    grad_energy_disk,
    h_half_norm,
)
from .rates import RateFit, fit_rate

__all__ = [
    "SolverConfig",
    "CoreShellSolution",
    "Verdict",
    "TailDescriptor",
    "CompatibilityVerdict",
    "truncation_order",
    "core_coefficients",
    "solve_modes",
    "assemble_field",
    "exterior_field",
    "kelvin_field",
    "power",
    "grad_energy",
    "h1_norm",
    "limit_field_v",
    "limit_field_u0",
    "gap_multipliers",
    "gap_multiplier_modulus",
    "localized_resonance_gap",
    "classify_compatibility",
    "design_incompatible_data",
    "inverse_square_data",
    "delta_sweep",
    "SWEEP_QUANTITIES",
]

SAFETY_FACTOR = 4


def truncation_order(delta: float, R: float) -> int:
    """Smallest integer ``>= |ln delta / ln R| / 2``, floored at 1."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if not R > 1:
        raise ValueError("R must exceed 1")
    x = 0.5 * abs(math.log(delta) / math.log(R))
    # absorb rounding so that delta = R^{-2k} gives exactly k
    return max(1, math.ceil(x - 1e-9 * max(1.0, x)))


@dataclass(frozen=True)
class SolverConfig:
    R: float
    delta: float
    N: Optional[int] = None

    def __post_init__(self):
        if not self.R > 1:
            raise ValueError(f"outer radius must exceed 1, got R={self.R}")
        if not 0 < self.delta < 1:
            raise ValueError(f"loss must lie in (0, 1), got delta={self.delta}")
        if self.N is None:
            object.__setattr__(self, "N", SAFETY_FACTOR * truncation_order(self.delta, self.R))
        if self.N < 1:
            raise ValueError("truncation order must be positive")

    @classmethod
    def for_data(cls, R: float, delta: float, h: ModalCoefficients) -> "SolverConfig":
        """Auto-sized config that never drops modes of ``h``."""
        return cls(R, delta, max(h.N, SAFETY_FACTOR * truncation_order(delta, R)))


def core_coefficients(h, n, R: float, delta: float):
    """``c_n = 2 h_n / [(2 - i delta) R^-n + i delta R^n]``, written in ``R^-n`` only.

    No range check on ``delta`` so that the formula can be probed at ``delta = 1``.
    """
    t = np.power(float(R), -np.asarray(n, dtype=float))
    denom = (2 - 1j * delta) * t * t + 1j * delta
    assert np.all(denom != 0)
    return 2 * np.asarray(h) * t / denom


@dataclass(frozen=True)
class CoreShellSolution:
    """Modal solution.

    ``c``: ``u`` in ``B_1`` (powers ``r^n``). ``a``/``b``: ``v = u o F^{-1}`` on
    ``1/R < r < 1`` as ``a_n r^n + b_n r^-n``; in ``1 < r < R`` this reads
    ``u = a_0 + a_n r^-n + b_n r^n``.
    """

    config: SolverConfig
    h: ModalCoefficients
    c: ModalCoefficients
    a: ModalCoefficients
    b: ModalCoefficients

    @property
    def R(self) -> float:
        return self.config.R

    @property
    def delta(self) -> float:
        return self.config.delta


def solve_modes(h: ModalCoefficients, config: SolverConfig) -> CoreShellSolution:
    """Solve the transmission problem mode by mode for Dirichlet data ``h``.

    ``h`` is resized to ``config.N``; dropping nonzero modes warns.
    """
    if h.N > config.N and (np.any(h.plus[config.N:] != 0) or np.any(h.minus[config.N:] != 0)):
        warnings.warn(f"truncating data from {h.N} to {config.N} modes", stacklevel=2)
    h = h.resized(config.N)
    R, d = config.R, config.delta
    n = h.orders
    c_plus = core_coefficients(h.plus, n, R, d)
    c_minus = core_coefficients(h.minus, n, R, d)
    c = ModalCoefficients(h.zero_mode, c_plus, c_minus)
    a = ModalCoefficients(h.zero_mode, (2 - 1j * d) * c_plus / 2, (2 - 1j * d) * c_minus / 2)
    b = ModalCoefficients(0.0, 1j * d * c_plus / 2, 1j * d * c_minus / 2)
    return CoreShellSolution(config, h, c, a, b)


def _is_real(h: ModalCoefficients) -> bool:
    scale = max(1.0, float(np.max(np.abs(h.plus), initial=0.0)))
    return abs(h.zero_mode.imag) <= 1e-14 * scale and np.allclose(
        h.minus, np.conj(h.plus), rtol=0, atol=1e-14 * scale
    )


def exterior_field(sol: CoreShellSolution) -> HarmonicField:
    """``u`` restricted to the matrix ``1 <= r <= R``."""
    reg = FieldRegion(1.0, sol.R, ModalCoefficients(sol.a.zero_mode, sol.b.plus, sol.b.minus), sol.a)
    return HarmonicField((reg,))


def assemble_field(sol: CoreShellSolution) -> HarmonicField:
    """``u_delta`` on ``B_R`` as a two-region field (disk, then matrix annulus)."""
    disk = FieldRegion(0.0, 1.0, sol.c)
    (ext,) = exterior_field(sol).regions
    return HarmonicField((disk, ext), real_valued=sol.h.real_valued and _is_real(sol.c))


def kelvin_field(sol: CoreShellSolution) -> HarmonicField:
    """``v_delta = u_delta o F^{-1}`` on ``1/R <= r <= 1``."""
    reg = FieldRegion(1.0 / sol.R, 1.0, sol.a, ModalCoefficients(0.0, sol.b.plus, sol.b.minus))
    return HarmonicField((reg,))


def power(sol: CoreShellSolution) -> float:
    """Dissipated power ``delta * int_{B_1} |grad u|^2``."""
    return sol.delta * grad_energy_disk(sol.c, 1.0)


def grad_energy(sol: CoreShellSolution) -> float:
    """``int_{B_R} |grad u_delta|^2``."""
    return field_grad_energy(assemble_field(sol))


def h1_norm(sol: CoreShellSolution) -> float:
    return field_h1_norm(assemble_field(sol))


def limit_field_v(h: ModalCoefficients, R: float) -> HarmonicField:
    """Harmonic extension of ``h`` from ``|x| = 1/R`` into ``B_{1/R}``."""
    scale = float(R) ** h.orders.astype(float)
    return HarmonicField((FieldRegion(0.0, 1.0 / R, h.map_modes(1.0, scale)),), real_valued=h.real_valued)


def limit_field_u0(h: ModalCoefficients, R: float) -> HarmonicField:
    """The ``delta -> 0`` modal limit: ``c_n = a_n = R^n h_n``, ``b_n = 0``.

    Same region layout as :func:`assemble_field`, so the two can be subtracted.
    """
    scale = float(R) ** h.orders.astype(float)
    c = h.map_modes(1.0, scale)
    disk = FieldRegion(0.0, 1.0, c)
    ext = FieldRegion(1.0, R, ModalCoefficients(h.zero_mode, np.zeros(h.N), np.zeros(h.N), h.real_valued), c)
    return HarmonicField((disk, ext), real_valued=h.real_valued)


def gap_multipliers(n, R: float, delta: float) -> np.ndarray:
    """Per-mode factor taking ``h_n`` to the trace of ``u_delta - v`` on ``|x| = 1/R``.

    ``i delta (R^-n - R^n) / [2 R^-n - i delta (R^-n - R^n)]``, rescaled by ``R^-n``.
    """
    t = np.power(float(R), -2.0 * np.asarray(n, dtype=float))
    num = 1j * delta * (t - 1)
    return num / (2 * t - num)


def gap_multiplier_modulus(n, R: float, delta: float) -> np.ndarray:
    """Modulus of :func:`gap_multipliers`, computed so that it never exceeds 1 in floating point."""
    t = np.power(float(R), -2.0 * np.asarray(n, dtype=float))
    y = delta * (1 - t)
    # hypot(2t, y) >= y, so the rounded quotient stays <= 1
    return y / np.hypot(2 * t, y)


def localized_resonance_gap(sol: CoreShellSolution) -> float:
    """Squared discrete H^{1/2}(|x| = 1/R) norm of ``u_delta - v``."""
    n = sol.h.orders
    m = gap_multiplier_modulus(n, sol.R, sol.delta)
    return float(np.sum(n * m ** 2 * (np.abs(sol.h.plus) ** 2 + np.abs(sol.h.minus) ** 2)))


class Verdict(str, enum.Enum):
    COMPATIBLE = "Compatible"
    INCOMPATIBLE = "Incompatible"
    BORDERLINE = "Borderline"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class TailDescriptor:
    """Symbolic tail ``|h_n| ~ C n^power rate^n``."""

    rate: float
    power: float = 0.0


@dataclass(frozen=True)
class CompatibilityVerdict:
    verdict: Verdict
    decay_rate: float
    evidence: dict = field(default_factory=dict)


MIN_TAIL = 16
RATE_MARGIN = 1e-2


def classify_compatibility(
    h: Union[ModalCoefficients, Callable[[int], complex]],
    R: float,
    descriptor: Optional[TailDescriptor] = None,
    n_samples: int = 200,
) -> CompatibilityVerdict:
    """Decide whether ``sum n R^{2n} |h_n|^2`` converges.

    A generator ``n -> h_n`` is sampled on ``n = 1..n_samples``. Without a tail
    descriptor the decay rate is fitted on the last half of the nonzero range.
    """
    if descriptor is not None:
        crit = 1.0 / R
        if descriptor.rate < crit:
            v = Verdict.COMPATIBLE
        elif descriptor.rate > crit:
            v = Verdict.INCOMPATIBLE
        else:
            # sum n * n^{2p} converges iff 2p + 1 < -1
            v = Verdict.COMPATIBLE if 2 * descriptor.power + 1 < -1 else Verdict.INCOMPATIBLE
        return CompatibilityVerdict(v, descriptor.rate, {"source": "descriptor"})

    if callable(h):
        gen = h
        h = ModalCoefficients(0.0, [gen(n) for n in range(1, n_samples + 1)], np.zeros(n_samples))
    mag = np.maximum(np.abs(h.plus), np.abs(h.minus))
    nz = np.flatnonzero(mag > 0)
    if nz.size == 0 or nz[-1] + 1 <= h.N // 2:
        # zero on the upper half of the container: a trigonometric polynomial
        return CompatibilityVerdict(
            Verdict.COMPATIBLE, 0.0, {"source": "finite", "last_mode": int(nz[-1] + 1) if nz.size else 0}
        )
    tail = nz[nz >= nz[-1] // 2]
    if tail.size < MIN_TAIL:
        return CompatibilityVerdict(
            Verdict.INDETERMINATE, float("nan"),
            {"source": "fit", "reason": f"only {tail.size} nonzero tail coefficients (< {MIN_TAIL})"},
        )
    n = tail + 1.0
    slope, intercept = np.polyfit(n, np.log(mag[tail]), 1)
    rate = float(np.exp(slope))
    crit = 1.0 / R
    if rate < crit * (1 - RATE_MARGIN):
        v = Verdict.COMPATIBLE
    elif rate > crit * (1 + RATE_MARGIN):
        v = Verdict.INCOMPATIBLE
    else:
        v = Verdict.BORDERLINE
    nn = h.orders
    with np.errstate(over="ignore"):
        terms = nn * np.exp(2 * nn * np.log(R)) * mag ** 2
    partial = np.cumsum(terms)
    evidence = {
        "source": "fit",
        "fit_modes": [int(n[0]), int(n[-1])],
        "log_rate_slope": float(slope),
        "critical_rate": crit,
        "partial_sums": {int(k): float(partial[k - 1]) for k in (h.N // 4, h.N // 2, h.N) if k >= 1},
    }
    return CompatibilityVerdict(v, rate, evidence)


def design_incompatible_data(alpha: float, R: float, N: int) -> ModalCoefficients:
    """Data whose gradient energy grows like ``delta^{-2 alpha}``: ``h_n = R^{-n gamma}/sqrt(n)``, ``gamma = 1 - 2 alpha``."""
    if not 0 < alpha < 0.5:
        raise ValueError("alpha must lie in (0, 1/2)")
    gamma = 1 - 2 * alpha
    n = np.arange(1, N + 1, dtype=float)
    vals = float(R) ** (-n * gamma) / np.sqrt(n)
    return ModalCoefficients(0.0, vals, vals, real_valued=True)


def inverse_square_data(N: int = 100) -> ModalCoefficients:
    """``g = sum_{n>=1} n^-2 e^{i n theta}`` truncated at ``N``."""
    n = np.arange(1, N + 1, dtype=float)
    return ModalCoefficients(0.0, 1.0 / n ** 2, np.zeros(N))


SWEEP_QUANTITIES = {
    "power": power,
    "grad_energy": grad_energy,
    "gap": localized_resonance_gap,
    "h1_norm": h1_norm,
}


def _check_grid(delta_grid) -> np.ndarray:
    grid = np.asarray(delta_grid, dtype=float)
    if grid.size < 4:
        raise ValueError("delta sweep needs at least 4 points")
    if np.log10(grid.max() / grid.min()) < 3 - 1e-9:
        raise ValueError("delta sweep must span at least 3 decades")
    return grid


def delta_sweep(
    h: Union[ModalCoefficients, Callable[[int], ModalCoefficients]],
    R: float,
    delta_grid: Sequence[float],
    quantity: str = "grad_energy",
    threads: int = 1,
) -> RateFit:
    """Fit ``log quantity`` against ``log delta`` across a sweep.

    ``h`` may be a factory ``N -> ModalCoefficients`` so that the truncation
    follows the smallest ``delta``; fixed data is padded, never cut.
    """
    grid = _check_grid(delta_grid)
    fn = SWEEP_QUANTITIES[quantity]
    if callable(h):
        h = h(SAFETY_FACTOR * truncation_order(grid.min(), R))
    N = max(h.N, SAFETY_FACTOR * truncation_order(grid.min(), R))

    def one(d):
        return fn(solve_modes(h, SolverConfig(R, float(d), N)))

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            values = np.array(list(ex.map(one, grid)))
    else:
        values = np.array([one(d) for d in grid])
    return fit_rate(grid, values, label=quantity)
