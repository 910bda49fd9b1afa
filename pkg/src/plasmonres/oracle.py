"""Brute-force cross-checks for the closed-form solvers.

Nothing here calls the modal formulas it verifies: transmission conditions
go through a dense linear solve, gradients are taken from the complex-variable
form of each harmonic (``r^n e^{in theta} = z^n`` and friends) and integrated
by tensor quadrature, and the radial ODE is solved by finite differences.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.linalg import solve_banded

from .fourier_core import HarmonicField
from .rates import RateFit, fit_rate

__all__ = [
    "TransmissionSystem",
    "transmission_system",
    "mode_transmission_oracle",
    "QuadratureGrid",
    "cartesian_gradient",
    "quadrature_energy",
    "fd_radial_bvp",
    "energy_identity_check",
    "BoundProbe",
    "a_priori_bound_probe",
]


@dataclass(frozen=True)
class TransmissionSystem:
    """Raw conditions for one mode; unknowns ``(c, p, q)``.

    Rows: ``p R^n + q R^-n = h`` (Dirichlet at R), ``c = p + q`` (continuity
    at 1), ``(-1 + i delta) n c = n (p - q)`` (flux at 1).
    """

    n: np.ndarray
    R: np.ndarray
    delta: np.ndarray
    matrix: np.ndarray
    rhs: np.ndarray


def transmission_system(n, h, R, delta) -> TransmissionSystem:
    n, h, R, delta = np.broadcast_arrays(
        np.asarray(n, float), np.asarray(h, complex), np.asarray(R, float), np.asarray(delta, float)
    )
    A = np.zeros(n.shape + (3, 3), complex)
    A[..., 0, 1] = R ** n
    A[..., 0, 2] = R ** -n
    A[..., 1, 0] = 1.0
    A[..., 1, 1] = -1.0
    A[..., 1, 2] = -1.0
    A[..., 2, 0] = (-1 + 1j * delta) * n
    A[..., 2, 1] = -n
    A[..., 2, 2] = n
    rhs = np.zeros(n.shape + (3,), complex)
    rhs[..., 0] = h
    return TransmissionSystem(n, R, delta, A, rhs)


def _eliminate(A, b):
    """Gaussian elimination without pivoting, batched over leading axes."""
    A = A.copy()
    b = b.copy()
    m = A.shape[-1]
    for k in range(m):
        piv = A[..., k, k]
        if np.any(piv == 0):
            raise np.linalg.LinAlgError("zero pivot in transmission system")
        for i in range(k + 1, m):
            f = A[..., i, k] / piv
            A[..., i, :] -= f[..., None] * A[..., k, :]
            b[..., i] -= f * b[..., k]
    x = np.zeros_like(b)
    for k in range(m - 1, -1, -1):
        acc = b[..., k] - np.sum(A[..., k, k + 1:] * x[..., k + 1:], axis=-1)
        x[..., k] = acc / A[..., k, k]
    return x


# interface rows first, then the outer boundary
_ROW_ORDER = [1, 2, 0]


def mode_transmission_oracle(n, h_n, R, delta):
    """Solve the 3x3 system(s) by direct elimination; returns ``(c, p, q)``.

    The system is nearly singular at the resonance, so a pivoted LU loses
    about ``eps / delta`` in relative accuracy. Eliminating with the two
    interface rows first (no pivoting) keeps every step free of cancellation.
    """
    sysm = transmission_system(n, h_n, R, delta)
    if np.any(sysm.delta <= 0):
        raise ValueError("oracle needs delta > 0")
    x = _eliminate(sysm.matrix[..., _ROW_ORDER, :], sysm.rhs[..., _ROW_ORDER])
    return x[..., 0], x[..., 1], x[..., 2]


@dataclass(frozen=True)
class QuadratureGrid:
    """Gauss-Legendre in the radius, trapezoid over a full turn."""

    n_radial: int
    n_angular: int

    def __post_init__(self):
        if self.n_angular % 4:
            raise ValueError("angular count must be a multiple of 4")

    def polar(self, r_lo: float, r_hi: float):
        x, w = np.polynomial.legendre.leggauss(self.n_radial)
        r = 0.5 * (r_hi - r_lo) * x + 0.5 * (r_hi + r_lo)
        wr = 0.5 * (r_hi - r_lo) * w * r
        t = 2 * np.pi * np.arange(self.n_angular) / self.n_angular
        Rg, Tg = np.meshgrid(r, t, indexing="ij")
        W = np.outer(wr, np.full(self.n_angular, 2 * np.pi / self.n_angular))
        return (Rg * np.cos(Tg)).ravel(), (Rg * np.sin(Tg)).ravel(), W.ravel()

    def rectangle(self, x_lo, x_hi, y_lo, y_hi):
        x, w = np.polynomial.legendre.leggauss(self.n_radial)
        xs = 0.5 * (x_hi - x_lo) * x + 0.5 * (x_hi + x_lo)
        ys = 0.5 * (y_hi - y_lo) * x + 0.5 * (y_hi + y_lo)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        W = np.outer(0.5 * (x_hi - x_lo) * w, 0.5 * (y_hi - y_lo) * w)
        return X.ravel(), Y.ravel(), W.ravel()

    @classmethod
    def for_modes(cls, N: int, n_radial: int = 48) -> "QuadratureGrid":
        """Angular count: the smallest multiple of ``4N`` that is at least ``4N + 16``."""
        m = 4 * max(N, 1)
        return cls(n_radial, m * -(-(m + 16) // m))


def _dpoly(coeffs, w):
    """``d/dw sum_{n>=1} coeffs[n-1] w^n`` by Horner."""
    full = np.concatenate([[0.0], coeffs])
    return P.polyval(w, P.polyder(full))


def cartesian_gradient(field: HarmonicField) -> Callable:
    """Return ``(x, y) -> (du/dx, du/dy)`` for a piecewise harmonic field."""

    def grad(x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        z = x + 1j * y
        r = np.abs(z)
        gx = np.zeros(z.shape, complex)
        gy = np.zeros(z.shape, complex)
        idx = field.region_index(r)
        for k, reg in enumerate(field.regions):
            s = idx == k
            zs = z[s]
            # z^n and conj(z)^n
            dp = _dpoly(reg.inner.plus, zs)
            dm = _dpoly(reg.inner.minus, np.conj(zs))
            gx[s] += dp + dm
            gy[s] += 1j * dp - 1j * dm
            if reg.r_lo > 0:
                # conj(z)^-n and z^-n, via w = 1/conj(z) and w = 1/z
                wb = 1 / np.conj(zs)
                dq = _dpoly(reg.outer.plus, wb) * (-wb ** 2)
                wz = 1 / zs
                dr = _dpoly(reg.outer.minus, wz) * (-wz ** 2)
                gx[s] += dq + dr
                gy[s] += -1j * dq + 1j * dr
                gx[s] += reg.log_coeff * x[s] / r[s] ** 2
                gy[s] += reg.log_coeff * y[s] / r[s] ** 2
        return gx, gy

    return grad


def quadrature_energy(gradient: Callable, region, grid: QuadratureGrid) -> float:
    """``int_region |grad u|^2`` by tensor quadrature.

    ``region`` is ``("annulus", r_lo, r_hi)`` (``r_lo = 0`` for a disk) or
    ``("rectangle", x_lo, x_hi, y_lo, y_hi)``.
    """
    kind, *bounds = region
    if kind == "annulus":
        x, y, w = grid.polar(*bounds)
    elif kind == "rectangle":
        x, y, w = grid.rectangle(*bounds)
    else:
        raise ValueError(f"unknown region kind {kind!r}")
    gx, gy = gradient(x, y)
    return float(np.sum(w * (np.abs(gx) ** 2 + np.abs(gy) ** 2)))


def fd_radial_bvp(n: int, f: Callable, M: int = 1000, rho_min: float = 1e-6):
    """Second-order finite differences for ``w'' + w'/rho - n^2 w/rho^2 = f``.

    ``w(rho_min) = 0`` stands in for regularity at the origin (error of order
    ``rho_min^n``); ``w'(1) = 0`` through a mirrored ghost node. Returns the
    grid and the solution.
    """
    if n < 1:
        raise ValueError("mode 0 is a pure Neumann problem; use n >= 1")
    if M < 1000:
        raise ValueError("need M >= 1000 intervals")
    rho = np.linspace(rho_min, 1.0, M + 1)
    h = rho[1] - rho[0]
    ri = rho[1:]
    lower = 1 / h ** 2 - 1 / (2 * h * ri)
    diag = -2 / h ** 2 - n ** 2 / ri ** 2
    upper = 1 / h ** 2 + 1 / (2 * h * ri)
    rhs = np.asarray(f(ri), dtype=complex).copy()
    # ghost node w_{M+1} = w_{M-1}
    lower = lower.copy()
    lower[-1] += upper[-1]
    ab = np.zeros((3, M), complex)
    ab[0, 1:] = upper[:-1]
    ab[1] = diag
    ab[2, :-1] = lower[1:]
    w = solve_banded((1, 1), ab, rhs)
    return rho, np.concatenate([[0.0], w])


def energy_identity_check(sol) -> float:
    """Relative mismatch between boundary flux and dissipated power.

    Multiplying the equation by ``conj(u)`` and integrating gives
    ``Im int_{|x|=R} du/dr conj(u) ds = delta int_{B_1} |grad u|^2``.
    The flux side is summed from the matrix coefficients, the power side is
    the solver's :func:`plasmonres.problem1.power`.

    With ``u = a_0 + a r^-n + b r^n`` on ``|x| = R`` the flux term per mode is
    ``n (b R^n - a R^-n) conj(a R^-n + b R^n)``, whose imaginary part is
    ``2 n Im(b conj(a))``. Summing that form avoids the cancellation between
    the two nearly opposite terms when ``delta`` is small.
    """
    from .problem1 import power

    n = sol.h.orders.astype(float)
    flux = 0.0
    for aa, bb in ((sol.a.plus, sol.b.plus), (sol.a.minus, sol.b.minus)):
        flux += np.sum(2 * n * (bb * np.conj(aa)).imag)
    lhs = 2 * np.pi * flux
    rhs = power(sol)
    scale = max(abs(rhs), abs(lhs))
    return 0.0 if scale == 0 else abs(lhs - rhs) / scale


@dataclass(frozen=True)
class BoundProbe:
    deltas: np.ndarray
    products: np.ndarray
    fit: RateFit

    @property
    def max_product(self) -> float:
        return float(np.max(self.products))


def a_priori_bound_probe(h, R: float, delta_grid: Sequence[float]) -> BoundProbe:
    """``delta * ||u_delta||_{H^1(B_R)}`` across a sweep, with its log-log slope."""
    from .problem1 import SolverConfig, h1_norm, solve_modes

    grid = np.asarray(delta_grid, dtype=float)
    prods = np.array([d * h1_norm(solve_modes(h, SolverConfig.for_data(R, d, h))) for d in grid])
    return BoundProbe(grid, prods, fit_rate(grid, prods, label="delta*H1"))
