"""Plane regions for energy integrals and their tensor Gauss-Legendre rules."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Disk", "AnnularSector", "Rectangle", "tensor_rule"]


@dataclass(frozen=True)
class Disk:
    radius: float
    center: tuple = (0.0, 0.0)

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("disk radius must be positive")

    @property
    def centered(self) -> bool:
        return tuple(self.center) == (0.0, 0.0)


@dataclass(frozen=True)
class AnnularSector:
    r_lo: float
    r_hi: float
    theta_lo: float = 0.0
    theta_hi: float = 2 * np.pi

    def __post_init__(self):
        if not 0 <= self.r_lo < self.r_hi:
            raise ValueError("annular sector needs 0 <= r_lo < r_hi")
        if not 0 < self.theta_hi - self.theta_lo <= 2 * np.pi + 1e-15:
            raise ValueError("annular sector needs 0 < theta_hi - theta_lo <= 2 pi")

    @property
    def full_turn(self) -> bool:
        return self.theta_hi - self.theta_lo >= 2 * np.pi - 1e-15


@dataclass(frozen=True)
class Rectangle:
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float

    def __post_init__(self):
        if not (self.x_lo < self.x_hi and self.y_lo < self.y_hi):
            raise ValueError("rectangle has no area")


def _gl(a, b, n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def tensor_rule(region, n_radial=64, n_angular=128, breaks=()):
    """Cartesian nodes ``(x, y)`` and weights for integrating over ``region``.

    Polar regions are split radially at ``breaks`` (radii where the integrand
    has kinks) and use the trapezoid rule over a full turn, Gauss-Legendre
    otherwise.
    """
    if isinstance(region, Rectangle):
        xs, wx = _gl(region.x_lo, region.x_hi, n_radial)
        ys, wy = _gl(region.y_lo, region.y_hi, n_radial)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        return X.ravel(), Y.ravel(), np.outer(wx, wy).ravel()
    if isinstance(region, Disk):
        cx, cy = region.center
        r_lo, r_hi, t_lo, t_hi, full = 0.0, region.radius, 0.0, 2 * np.pi, True
        if not region.centered:
            breaks = ()
    else:
        cx = cy = 0.0
        r_lo, r_hi = region.r_lo, region.r_hi
        t_lo, t_hi, full = region.theta_lo, region.theta_hi, region.full_turn
    edges = [r_lo] + sorted(b for b in breaks if r_lo < b < r_hi) + [r_hi]
    rs, wr = zip(*(_gl(a, b, n_radial) for a, b in zip(edges[:-1], edges[1:])))
    rs, wr = np.concatenate(rs), np.concatenate(wr)
    if full:
        ts = t_lo + (t_hi - t_lo) * np.arange(n_angular) / n_angular
        wt = np.full(n_angular, (t_hi - t_lo) / n_angular)
    else:
        ts, wt = _gl(t_lo, t_hi, n_angular)
    Rg, Tg = np.meshgrid(rs, ts, indexing="ij")
    W = np.outer(wr * rs, wt)
    return (cx + Rg * np.cos(Tg)).ravel(), (cy + Rg * np.sin(Tg)).ravel(), W.ravel()
