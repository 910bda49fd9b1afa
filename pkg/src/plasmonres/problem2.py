"""Whole-plane source problem ``div(eps_delta grad u) = f`` with decay at infinity.

The source lives outside ``B_1``. Kelvin inversion carries it into the disk,
where a Neumann problem ``Delta w = F_* f`` is solved mode by mode; the
boundary trace of ``w`` then fixes the loss-dependent modal coefficients.
"""
from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy.interpolate import BPoly

from .fourier_core import (
    FieldRegion,
    HarmonicField,
    ModalCoefficients,
    evaluate_polar,
    grad_energy_annulus,
    grad_energy_disk,
    polar_gradient,
)
from .rates import RateFit, fit_rate
from .regions import AnnularSector, Disk, Rectangle, tensor_rule

__all__ = [
    "SourceSpec",
    "SourceProfiles",
    "RadialProfiles",
    "PreparedSource",
    "PlaneCoefficients",
    "PlaneSolution",
    "PlaneField",
    "Compat2",
    "Compatibility2",
    "pushforward_source",
    "solve_w",
    "classify_compatibility2",
    "prepare_source",
    "solve_modes2",
    "solve_plane",
    "assemble_field2",
    "power_on_region",
    "plane_sweep",
    "cutoff_source",
    "compatible_bump_source",
    "bump_w",
    "cutoff_phi",
]

ZERO_MEAN_TOL = 1e-8
COMPAT_TOL = 1e-8
GAUSS_POINTS = 8


def _gl_panels(a: float, b: float, panels: int, q: int = GAUSS_POINTS):
    """Knots, per-panel Gauss nodes ``(panels, q)`` and weights."""
    knots = np.linspace(a, b, panels + 1)
    x, w = np.polynomial.legendre.leggauss(q)
    half = 0.5 * np.diff(knots)[:, None]
    mid = 0.5 * (knots[:-1] + knots[1:])[:, None]
    return knots, mid + half * x, half * w


@dataclass(frozen=True)
class SourceSpec:
    """Source ``f`` supported in ``r_inner <= |x| <= r_outer`` (``r_inner > 1``).

    ``evaluator(x, y)`` gives ``f`` pointwise; ``profiles(rho)``, when known in
    closed form, returns the modal profiles of ``F_* f`` as an array indexed
    by ``n = -N..N``.
    """

    r_inner: float
    r_outer: float
    evaluator: Optional[Callable] = None
    profiles: Optional[Callable] = None
    n_modes: Optional[int] = None
    name: str = ""

    def __post_init__(self):
        if not 1 < self.r_inner < self.r_outer:
            raise ValueError("source support must be an annulus strictly outside B_1")
        if self.evaluator is None and self.profiles is None:
            raise ValueError("source needs an evaluator or closed-form profiles")
        if self.profiles is not None and self.n_modes is None:
            raise ValueError("closed-form profiles need n_modes")


@dataclass(frozen=True)
class SourceProfiles:
    """Modal radial profiles of a density on ``rho_lo <= rho <= rho_hi`` inside ``B_1``."""

    rho_lo: float
    rho_hi: float
    N: int
    func: Callable
    l2_norm: float = float("nan")

    def __call__(self, rho) -> np.ndarray:
        return np.asarray(self.func(np.asarray(rho, dtype=float)), dtype=complex)

    @property
    def orders(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)


def _angular_profiles(evaluator, N: int):
    K = 8 * N
    theta = 2 * np.pi * np.arange(K) / K

    idx = np.arange(-N, N + 1) % K
    step = max(1, 20000 // K)

    def func(rho):
        rho = np.asarray(rho, dtype=float)
        out = np.empty((2 * N + 1, rho.size), dtype=complex)
        for s in range(0, rho.size, step):
            r = 1.0 / rho[s:s + step, None]
            x, y = r * np.cos(theta), r * np.sin(theta)
            vals = np.asarray(evaluator(x, y), dtype=complex) * r ** 4
            out[:, s:s + step] = (np.fft.fft(vals, axis=1) / K)[:, idx].T
        return out

    return func


def pushforward_source(source: SourceSpec, N: Optional[int] = None, M: int = 64) -> SourceProfiles:
    """Modal profiles of ``F_* f (y) = f(y/|y|^2) / |y|^4`` on ``[1/r_outer, 1/r_inner]``.

    Rejects sources whose mean is not zero (the Neumann problem for ``w``
    would have no solution).
    """
    if M < 64:
        raise ValueError("need at least 64 radial nodes")
    N = N or source.n_modes
    if N is None:
        raise ValueError("number of modes is required for a pointwise source")
    if source.profiles is not None:
        nat = source.n_modes

        def func(rho, _f=source.profiles):
            full = np.asarray(_f(rho), dtype=complex)
            out = np.zeros((2 * N + 1,) + full.shape[1:], dtype=complex)
            k = min(N, nat)
            out[N - k:N + k + 1] = full[nat - k:nat + k + 1]
            return out
    else:
        func = _angular_profiles(source.evaluator, N)
    lo, hi = 1.0 / source.r_outer, 1.0 / source.r_inner
    _, s, w = _gl_panels(lo, hi, M)
    F = func(s.ravel()).reshape(2 * N + 1, *s.shape)
    norm = float(np.sqrt(2 * np.pi * np.sum(w * s * np.abs(F) ** 2)))
    mean = abs(np.sum(w * s * F[N]))
    if mean > ZERO_MEAN_TOL * max(1.0, norm):
        raise ValueError(f"source does not have zero mean (mode-0 moment {mean:.3e})")
    return SourceProfiles(lo, hi, N, func, norm)


@dataclass(frozen=True, eq=False)
class RadialProfiles:
    """Neumann solution ``w = sum_n w_n(rho) e^{i n theta}`` in ``B_1``, zero disk average.

    Knot values, slopes and second derivatives (from the ODE itself) inside
    the source support feed a quintic Hermite interpolant; outside the support every profile is an exact combination
    of ``rho^|n|`` and ``rho^-|n|`` (or ``1``, ``log rho`` for ``n = 0``).
    """

    orders: np.ndarray
    rho_lo: float
    rho_hi: float
    knots: np.ndarray
    values: np.ndarray
    slopes: np.ndarray
    upper_at_lo: np.ndarray
    lower_at_hi: np.ndarray
    i_plus: np.ndarray
    c0: complex
    j_total: complex
    k_total: complex
    curvature: np.ndarray = None

    def __post_init__(self):
        # a knot at the origin carries no second derivative (the ODE is singular there)
        derivs = [
            np.stack([self.values[:, j], self.slopes[:, j]] + ([] if self.knots[j] == 0 else [self.curvature[:, j]]))
            for j in range(self.knots.size)
        ]
        object.__setattr__(self, "spline", BPoly.from_derivatives(self.knots, derivs))

    @property
    def N(self) -> int:
        return (self.orders.size - 1) // 2

    def _pieces(self, rho):
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        below = rho < self.rho_lo
        above = rho > self.rho_hi
        inside = ~(below | above)
        return rho, below, above, inside

    def evaluate(self, rho) -> np.ndarray:
        """Profiles at ``rho`` as an array ``(2N+1, len(rho))``."""
        rho, below, above, inside = self._pieces(rho)
        m = np.abs(self.orders)[:, None]
        mm = np.where(m == 0, 1, m)
        out = np.empty((self.orders.size, rho.size), dtype=complex)
        z = self.N
        if np.any(below):
            r = rho[below]
            v = -((r / self.rho_lo) ** m * self.upper_at_lo[:, None] + r ** m * self.i_plus[:, None]) / (2 * mm)
            v[z] = self.c0
            out[:, below] = v
        if np.any(above):
            r = rho[above]
            v = -((self.rho_hi / r) ** m * self.lower_at_hi[:, None] + r ** m * self.i_plus[:, None]) / (2 * mm)
            v[z] = self.c0 + np.log(r) * self.j_total - self.k_total
            out[:, above] = v
        if np.any(inside):
            out[:, inside] = self.spline(rho[inside]).T
        return out

    def derivative(self, rho) -> np.ndarray:
        """``d w_n / d rho`` at ``rho``."""
        rho, below, above, inside = self._pieces(rho)
        m = np.abs(self.orders)[:, None]
        out = np.empty((self.orders.size, rho.size), dtype=complex)
        z = self.N
        if np.any(below):
            r = rho[below]
            with np.errstate(divide="ignore", invalid="ignore"):
                v = -((r / self.rho_lo) ** m * self.upper_at_lo[:, None] + r ** m * self.i_plus[:, None]) / (2 * r)
            at0 = r == 0
            if np.any(at0):
                # only |n| = 1 has a nonzero slope at the origin
                lim = -(self.upper_at_lo / self.rho_lo + self.i_plus) / 2
                v[:, at0] = np.where(m == 1, lim[:, None], 0.0)
            v[z] = 0.0
            out[:, below] = v
        if np.any(above):
            r = rho[above]
            v = -(-(self.rho_hi / r) ** m * self.lower_at_hi[:, None] + r ** m * self.i_plus[:, None]) / (2 * r)
            v[z] = self.j_total / r
            out[:, above] = v
        if np.any(inside):
            out[:, inside] = self.spline(rho[inside], 1).T
        return out

    def at_origin(self) -> complex:
        """``w(0)``; only the zero mode survives there."""
        return complex(self.evaluate(np.array([0.0]))[self.N, 0])


def solve_w(source: SourceProfiles, M: int = 256, q: int = GAUSS_POINTS):
    """Neumann problem ``Delta w = F_* f`` in ``B_1`` by variation of parameters.

    Returns ``(RadialProfiles, w_trace)`` with ``w_trace`` the Fourier
    coefficients of ``w`` on the unit circle.
    """
    lo, hi = source.rho_lo, source.rho_hi
    knots, s, wq = _gl_panels(lo, hi, M, q)
    ns = source.orders
    N = source.N
    F = source(s.ravel()).reshape(ns.size, M, q)
    if not np.all(np.isfinite(F)):
        raise ValueError("source profiles are not finite on the quadrature nodes")
    m = np.abs(ns)[:, None, None].astype(float)
    sF = wq * s * F

    # rescaled Green kernel pieces: every power below has base <= 1
    p_lower = np.sum(sF * (s / knots[1:, None]) ** m, axis=2)
    with np.errstate(divide="ignore"):
        p_upper = np.sum(sF * (knots[:-1, None] / s) ** m, axis=2)
    i_plus = np.sum(sF * s ** m, axis=(1, 2))
    ratio = (knots[:-1] / knots[1:])[None, :] ** m[:, :, 0]

    lower = np.zeros((ns.size, M + 1), complex)
    upper = np.zeros((ns.size, M + 1), complex)
    for j in range(M):
        lower[:, j + 1] = ratio[:, j] * lower[:, j] + p_lower[:, j]
    for j in range(M - 1, -1, -1):
        upper[:, j] = ratio[:, j] * upper[:, j + 1] + p_upper[:, j]

    mk = np.abs(ns)[:, None].astype(float)
    mm = np.where(mk == 0, 1.0, mk)
    rk = knots[None, :]
    values = -(upper + lower + rk ** mk * i_plus[:, None]) / (2 * mm)
    with np.errstate(divide="ignore", invalid="ignore"):
        slopes = -(upper - lower + rk ** mk * i_plus[:, None]) / (2 * rk)
    if knots[0] == 0:
        total_f = np.sum(wq * F, axis=(1, 2))
        slopes[:, 0] = np.where(np.abs(ns) == 1, -(total_f + i_plus) / 2, 0.0)

    # zero mode: w0 = C0 + log(rho) J(rho) - K(rho), J = int s f0, K = int s log(s) f0
    f0 = sF[N]
    J = np.concatenate([[0.0], np.cumsum(f0.sum(axis=1))])
    Kc = np.concatenate([[0.0], np.cumsum((f0 * np.log(s)).sum(axis=1))])
    c0 = -2 * np.sum(f0 * (s ** 2 / 4 - 0.25 - np.log(s) / 2))
    with np.errstate(divide="ignore", invalid="ignore"):
        values[N] = np.where(knots > 0, c0 + np.log(knots) * J - Kc, c0)
        slopes[N] = np.where(knots > 0, J / knots, 0.0)
    if not (np.all(np.isfinite(values)) and np.all(np.isfinite(slopes))):
        raise ValueError("radial solve produced non-finite profiles")

    # w'' = f - w'/rho + n^2 w / rho^2 at the knots
    with np.errstate(divide="ignore", invalid="ignore"):
        curv = source(knots) - slopes / rk + mk ** 2 * values / rk ** 2
    profiles = RadialProfiles(
        ns, lo, hi, knots, values, slopes, upper[:, 0], lower[:, -1], i_plus,
        complex(c0), complex(J[-1]), complex(Kc[-1]), curv,
    )
    trace = profiles.evaluate(np.array([1.0]))[:, 0]
    return profiles, ModalCoefficients.from_signed(trace)


class Compatibility2(str, enum.Enum):
    COMPATIBLE = "Compatible"
    INCOMPATIBLE = "Incompatible"


@dataclass(frozen=True)
class Compat2:
    verdict: Compatibility2
    dominant_mode: int
    magnitude: float
    tol: float


def classify_compatibility2(w_trace: ModalCoefficients, tol: float) -> Compat2:
    """Compatible iff every ``|w_{n,+-}|`` with ``n >= 1`` is at most ``tol``."""
    mags = np.concatenate([np.abs(w_trace.plus), np.abs(w_trace.minus)])
    k = int(np.argmax(mags))
    n = k + 1 if k < w_trace.N else -(k - w_trace.N + 1)
    mag = float(mags[k])
    verdict = Compatibility2.COMPATIBLE if mag <= tol else Compatibility2.INCOMPATIBLE
    return Compat2(verdict, n, mag, tol)


@dataclass(frozen=True)
class PreparedSource:
    """Loss-independent part of the solve: the ``w`` profiles and their trace."""

    source: SourceProfiles
    profiles: RadialProfiles
    w_trace: ModalCoefficients
    w_origin: complex
    compat: Compat2


def prepare_source(source: SourceSpec, N: Optional[int] = None, M: int = 256) -> PreparedSource:
    pushed = pushforward_source(source, N, max(M, 64))
    profiles, trace = solve_w(pushed, M)
    compat = classify_compatibility2(trace, COMPAT_TOL * max(1.0, pushed.l2_norm))
    return PreparedSource(pushed, profiles, trace, profiles.at_origin(), compat)


@dataclass(frozen=True)
class PlaneCoefficients:
    delta: float
    a: ModalCoefficients
    b: ModalCoefficients
    a0: complex
    b0: complex


def solve_modes2(w_trace: ModalCoefficients, w0_at_origin: complex, delta: float) -> PlaneCoefficients:
    """``a_n = w_n / (i delta)``, ``b_n = (1 - i delta) a_n``; constants from decay at infinity."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    a = ModalCoefficients(0.0, w_trace.plus / (1j * delta), w_trace.minus / (1j * delta))
    b = a * (1 - 1j * delta)
    b0 = -complex(w0_at_origin)
    a0 = b0 + w_trace.zero_mode
    return PlaneCoefficients(delta, a, b, a0, b0)


@dataclass(frozen=True)
class PlaneSolution:
    delta: float
    prepared: PreparedSource
    coeffs: PlaneCoefficients

    @property
    def w(self) -> RadialProfiles:
        return self.prepared.profiles

    @property
    def w_trace(self) -> ModalCoefficients:
        return self.prepared.w_trace


def solve_plane(prepared: PreparedSource, delta: float, snap: bool = True) -> PlaneSolution:
    """Coefficients for one loss value.

    With ``snap`` a source classified compatible has its ``n >= 1`` trace set
    to zero, so round-off is not amplified by ``1/delta``.
    """
    trace = prepared.w_trace
    if snap and prepared.compat.verdict is Compatibility2.COMPATIBLE:
        trace = ModalCoefficients(trace.zero_mode, np.zeros(trace.N), np.zeros(trace.N))
    return PlaneSolution(delta, prepared, solve_modes2(trace, prepared.w_origin, delta))


class PlaneField:
    """Evaluable ``u_delta`` on the whole plane."""

    def __init__(self, sol: PlaneSolution):
        c = sol.coeffs
        self.solution = sol
        self.interior = HarmonicField((FieldRegion(0.0, 1.0, ModalCoefficients(c.a0, c.a.plus, c.a.minus)),))
        N = c.b.N
        self.exterior_harmonic = HarmonicField(
            (FieldRegion(1.0, np.inf, ModalCoefficients(c.b0, np.zeros(N), np.zeros(N)), c.b),)
        )
        self.w = sol.w

    def _kelvin_part(self, r, theta, chunk=20000):
        """``w(F(x))`` and its polar gradient, for ``r >= 1``."""
        ns = self.w.orders
        val = np.empty(r.size, complex)
        dr = np.empty(r.size, complex)
        dt = np.empty(r.size, complex)
        for s in range(0, r.size, chunk):
            rr, tt = r[s:s + chunk], theta[s:s + chunk]
            rho = 1.0 / rr
            e = np.exp(1j * ns[:, None] * tt[None, :])
            W = self.w.evaluate(rho)
            dW = self.w.derivative(rho)
            val[s:s + chunk] = np.sum(W * e, axis=0)
            dr[s:s + chunk] = np.sum(dW * e, axis=0) * (-rho ** 2)
            dt[s:s + chunk] = np.sum(1j * ns[:, None] * W * e, axis=0) * rho
        return val, dr, dt

    def evaluate_interior(self, r, theta):
        return evaluate_polar(self.interior, r, theta)

    def evaluate_exterior(self, r, theta):
        r, theta = np.broadcast_arrays(np.asarray(r, float), np.asarray(theta, float))
        shape = r.shape
        r, theta = r.ravel(), theta.ravel()
        k, _, _ = self._kelvin_part(r, theta)
        return (evaluate_polar(self.exterior_harmonic, r, theta) + k).reshape(shape)

    def gradient_interior(self, r, theta):
        return polar_gradient(self.interior, r, theta)

    def gradient_exterior(self, r, theta):
        r, theta = np.broadcast_arrays(np.asarray(r, float), np.asarray(theta, float))
        shape = r.shape
        r, theta = r.ravel(), theta.ravel()
        _, kr, kt = self._kelvin_part(r, theta)
        hr, ht = polar_gradient(self.exterior_harmonic, r, theta)
        return (hr + kr).reshape(shape), (ht + kt).reshape(shape)

    def evaluate_polar(self, r, theta):
        r, theta = np.broadcast_arrays(np.asarray(r, float), np.asarray(theta, float))
        out = np.empty(r.shape, complex)
        inside = r <= 1.0
        out[inside] = self.evaluate_interior(r[inside], theta[inside])
        out[~inside] = self.evaluate_exterior(r[~inside], theta[~inside])
        return out

    def __call__(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        return self.evaluate_polar(np.hypot(x, y), np.arctan2(y, x))

    def polar_gradient(self, r, theta):
        """``(du/dr, (1/r) du/dtheta)``."""
        r, theta = np.broadcast_arrays(np.asarray(r, float), np.asarray(theta, float))
        gr = np.empty(r.shape, complex)
        gt = np.empty(r.shape, complex)
        inside = r <= 1.0
        gr[inside], gt[inside] = self.gradient_interior(r[inside], theta[inside])
        gr[~inside], gt[~inside] = self.gradient_exterior(r[~inside], theta[~inside])
        return gr, gt

    def grad_sq(self, x, y):
        r, th = np.hypot(x, y), np.arctan2(y, x)
        gr, gt = self.polar_gradient(r, th)
        return np.abs(gr) ** 2 + np.abs(gt) ** 2


def assemble_field2(sol: PlaneSolution) -> PlaneField:
    return PlaneField(sol)


def power_on_region(sol: PlaneSolution, region, n_radial: int = 64, n_angular: Optional[int] = None) -> float:
    """``int_region |grad u_delta|^2``.

    Closed form for centred disks and full annuli inside ``B_1``; tensor
    Gauss-Legendre otherwise, split at the unit circle and the source support.
    """
    c = sol.coeffs
    if isinstance(region, Disk) and region.centered and region.radius <= 1:
        return grad_energy_disk(c.a, region.radius)
    if isinstance(region, AnnularSector) and region.full_turn and region.r_hi <= 1:
        if region.r_lo == 0:
            return grad_energy_disk(c.a, region.r_hi)
        return grad_energy_annulus(c.a, ModalCoefficients.zeros(c.a.N), 0.0, region.r_lo, region.r_hi)
    if not isinstance(region, (Disk, AnnularSector, Rectangle)):
        raise ValueError(f"unsupported region {region!r}")
    src = sol.prepared.source
    breaks = (1.0, 1.0 / src.rho_hi, 1.0 / src.rho_lo)
    n_angular = n_angular or max(128, 4 * c.a.N + 8)
    x, y, w = tensor_rule(region, n_radial, n_angular, breaks)
    return float(np.sum(w * assemble_field2(sol).grad_sq(x, y)))


def plane_sweep(
    prepared: PreparedSource,
    region,
    delta_grid: Sequence[float],
    threads: int = 1,
) -> RateFit:
    """Rate fit of ``int_region |grad u_delta|^2`` across ``delta_grid``."""
    grid = np.asarray(delta_grid, dtype=float)
    if grid.size < 4 or np.log10(grid.max() / grid.min()) < 3 - 1e-9:
        raise ValueError("delta sweep needs >= 4 points spanning >= 3 decades")

    def one(d):
        return power_on_region(solve_plane(prepared, float(d)), region)

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            vals = list(ex.map(one, grid))
    else:
        vals = [one(d) for d in grid]
    return fit_rate(grid, vals, label=type(region).__name__)


# ---------------------------------------------------------------------------
# sources used in the numerical experiments

_PHI = Polynomial([513.0, -1080.0, 900.0, -370.0, 75.0, -6.0])


def cutoff_phi(r, order: int = 0):
    """Radial cutoff: 1 on ``B_2``, 0 outside ``B_3``, quintic in between."""
    r = np.asarray(r, dtype=float)
    mid = _PHI.deriv(order)(r) if order else _PHI(r)
    if order == 0:
        return np.where(r <= 2, 1.0, np.where(r >= 3, 0.0, mid))
    return np.where((r > 2) & (r < 3), mid, 0.0)


def cutoff_source(n_modes: int = 100) -> SourceSpec:
    """``f = Delta(phi g) chi_{|x|>1}`` with ``g = sum_{n<=n_modes} (r/6)^n e^{i n theta}``."""
    N = n_modes
    n = np.arange(1, N + 1)

    def radial(r):
        # f_n(r) = (r/6)^n [phi'' + (2n + 1) phi' / r]
        r = np.asarray(r, dtype=float)
        p1, p2 = cutoff_phi(r, 1), cutoff_phi(r, 2)
        return (r[None, :] / 6.0) ** n[:, None] * (p2 + (2 * n[:, None] + 1) * p1 / r)

    def profiles(rho):
        rho = np.asarray(rho, dtype=float)
        out = np.zeros((2 * N + 1, rho.size), dtype=complex)
        out[N + 1:] = radial(1.0 / rho) / rho ** 4
        return out

    def evaluator(x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        r, th = np.hypot(x, y).ravel(), np.arctan2(y, x).ravel()
        vals = np.exp(1j * np.outer(th, n)) * radial(r).T
        return np.where(r > 1, vals.sum(axis=1), 0.0).reshape(x.shape)

    return SourceSpec(2.0, 3.0, evaluator, profiles, N, name="cutoff")


class _Bump:
    """``psi = A (rho - rho_a)^4 (rho_b - rho)^4`` on ``[rho_a, rho_b]``, peak value 1.

    Kept in factored form: the expanded monomial basis cancels badly.
    """

    def __init__(self, rho_a: float, rho_b: float):
        self.rho_a, self.rho_b = rho_a, rho_b
        self.A = (0.5 * (rho_b - rho_a)) ** -8

    def __call__(self, rho, order: int = 0):
        rho = np.asarray(rho, dtype=float)
        u, v = rho - self.rho_a, self.rho_b - rho
        if order == 0:
            val = u ** 4 * v ** 4
        elif order == 1:
            val = 4 * u ** 3 * v ** 3 * (v - u)
        elif order == 2:
            val = 12 * u ** 2 * v ** 4 - 32 * u ** 3 * v ** 3 + 12 * u ** 4 * v ** 2
        else:
            raise ValueError("only derivatives up to order 2")
        return np.where((u >= 0) & (v >= 0), self.A * val, 0.0)


def bump_w(rho_a: float = 1 / 3, rho_b: float = 0.5) -> _Bump:
    """Radial part ``psi`` of ``w_c = psi(rho) cos(theta)``; ``psi(rho, k)`` is the k-th derivative."""
    return _Bump(rho_a, rho_b)


def compatible_bump_source(rho_a: float = 1 / 3, rho_b: float = 0.5) -> SourceSpec:
    """Source with ``F_* f = Delta(psi(rho) cos theta)``.

    ``w = psi cos theta`` has zero Cauchy data on the unit circle, so the
    source is compatible.
    """
    psi = _Bump(rho_a, rho_b)

    def lap_radial(rho):
        rho = np.asarray(rho, dtype=float)
        return psi(rho, 2) + psi(rho, 1) / rho - psi(rho) / rho ** 2

    def profiles(rho):
        rho = np.asarray(rho, dtype=float)
        out = np.zeros((3, rho.size), dtype=complex)
        out[0] = out[2] = 0.5 * lap_radial(rho)
        return out

    def evaluator(x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        r2 = x * x + y * y
        with np.errstate(divide="ignore", invalid="ignore"):
            rho = 1.0 / np.sqrt(r2)
            cos = x / np.sqrt(r2)
            # f(x) = (F_* f)(F(x)) J(x), J = |x|^-4
            return np.where(r2 > 1, lap_radial(rho) * cos / r2 ** 2, 0.0)

    return SourceSpec(1.0 / rho_b, 1.0 / rho_a, evaluator, profiles, 1, name="compatible_bump")
