"""Kelvin inversion ``K(x) = R2^2 x / |x|^2`` and the pushforwards it induces."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .fourier_core import (
    FieldRegion,
    HarmonicField,
    ModalCoefficients,
    polar_gradient,
    evaluate_polar,
)

__all__ = [
    "INFINITY",
    "KelvinMap",
    "KELVIN",
    "map_point",
    "jacobian",
    "pushforward_density",
    "pullback_field",
    "reflect_field",
    "TransmissionReport",
    "verify_transmission",
]


class _Infinity:
    """The point at infinity, image of the origin under inversion."""

    def __repr__(self):
        return "INFINITY"


INFINITY = _Infinity()


@dataclass(frozen=True)
class KelvinMap:
    pivot: float = 1.0

    def __post_init__(self):
        if not self.pivot > 0:
            raise ValueError("pivot radius must be positive")


KELVIN = KelvinMap(1.0)


def _is_origin(x) -> bool:
    return x is not INFINITY and np.all(np.asarray(x, dtype=float) == 0.0)


def map_point(K: KelvinMap, x):
    """Image of ``x`` (shape ``(..., 2)``) under inversion in the circle of radius ``K.pivot``.

    ``INFINITY`` maps to the origin; the origin itself is rejected.
    """
    if x is INFINITY:
        return np.zeros(2)
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1, keepdims=True)
    if np.any(r2 == 0):
        raise ValueError("the origin has no finite Kelvin image")
    return K.pivot ** 2 * x / r2


def jacobian(K: KelvinMap, x) -> np.ndarray:
    """``|det DK(x)| = pivot^4 / |x|^4`` in two dimensions."""
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1)
    return K.pivot ** 4 / r2 ** 2


def pushforward_density(f: Callable, K: KelvinMap, y):
    """``K_* f (y) = f(x) / J(x)`` with ``x = K^{-1}(y) = K(y)``.

    ``f`` takes points of shape ``(..., 2)``.
    """
    if _is_origin(y):
        raise ValueError("the pushed density is undefined at the origin (image of infinity)")
    x = map_point(K, y)
    return f(x) / jacobian(K, x)


def pullback_field(u: Callable, K: KelvinMap) -> Callable:
    """Return ``v = u o K^{-1}``.

    At the origin ``u`` is called with ``INFINITY`` and must return its limit there.
    """

    def v(y):
        if _is_origin(y):
            return u(INFINITY)
        return u(map_point(K, y))

    return v


def reflect_field(field: HarmonicField, K: KelvinMap = KELVIN) -> HarmonicField:
    """Coefficients of ``field o K`` on the reflected annuli.

    Under ``r -> p^2/r`` the term ``q r^n`` becomes ``q p^{2n} r^{-n}``; ``log r``
    becomes ``2 log p - log r``. Regions touching the origin or infinity are rejected.
    """
    p = K.pivot
    regions = []
    for reg in reversed(field.regions):
        if reg.r_lo == 0 or not np.isfinite(reg.r_hi):
            raise ValueError("only bounded annuli away from the origin can be reflected")
        n = reg.inner.orders
        scale_up = p ** (2.0 * n)
        inner = ModalCoefficients(
            reg.inner.zero_mode + 2 * np.log(p) * reg.log_coeff,
            reg.outer.plus * p ** (-2.0 * n),
            reg.outer.minus * p ** (-2.0 * n),
        )
        outer = ModalCoefficients(0.0, reg.inner.plus * scale_up, reg.inner.minus * scale_up)
        regions.append(FieldRegion(p ** 2 / reg.r_hi, p ** 2 / reg.r_lo, inner, outer, -reg.log_coeff))
    return HarmonicField(tuple(regions))


@dataclass(frozen=True)
class TransmissionReport:
    value_jump: float
    flux_residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.value_jump <= self.tol and self.flux_residual <= self.tol


def verify_transmission(
    v_interior: HarmonicField,
    u_exterior: HarmonicField,
    tol: float,
    n_angles: int = 128,
    radius: float = 1.0,
) -> TransmissionReport:
    """Compare ``v`` and its Kelvin partner ``u`` on the circle ``r = radius``.

    With the outward normal of the inner region, inversion flips the normal
    derivative, so a matched pair has ``v = u`` and ``dv/dr + du/dr = 0``.
    """
    theta = 2 * np.pi * np.arange(n_angles) / n_angles
    r = np.full(n_angles, float(radius))
    jump = np.abs(evaluate_polar(v_interior, r, theta) - evaluate_polar(u_exterior, r, theta))
    dv, _ = polar_gradient(v_interior, r, theta)
    du, _ = polar_gradient(u_exterior, r, theta)
    flux = np.abs(dv + du)
    return TransmissionReport(float(jump.max()), float(flux.max()), tol)
