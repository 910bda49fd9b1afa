"""Fourier-mode algebra for harmonic fields on disks and annuli.

A harmonic function in an annulus ``r_lo <= r <= r_hi`` is written as

    u(r, theta) = a_0 + b_0 log r
                  + sum_{n>=1} sum_{+-} (p_{n,+-} r^n + q_{n,+-} r^-n) e^{+-i n theta}

Coefficients of one family (the ``p`` or the ``q``) live in a
:class:`ModalCoefficients` container; a :class:`HarmonicField` stacks
regions of this form.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

__all__ = [
    "ModalCoefficients",
    "PolarPoint",
    "FieldRegion",
    "HarmonicField",
    "OutOfDomainError",
    "project_boundary",
    "h_half_norm",
    "evaluate",
    "evaluate_polar",
    "polar_gradient",
    "grad_energy_disk",
    "grad_energy_annulus",
    "mass_disk",
    "mass_annulus",
    "field_grad_energy",
    "field_h1_norm",
]


class OutOfDomainError(ValueError):
    """Raised when a field is evaluated outside all of its regions."""


def _as_modes(values, N=None) -> np.ndarray:
    arr = np.array(values, dtype=complex).reshape(-1)
    if N is not None and arr.size != N:
        raise ValueError(f"expected {N} modes, got {arr.size}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ModalCoefficients:
    """Truncated coefficients ``zero_mode + sum_n (plus[n] e^{in.} + minus[n] e^{-in.})``.

    ``plus[k]`` and ``minus[k]`` hold mode ``n = k + 1``.
    """

    zero_mode: complex
    plus: np.ndarray
    minus: np.ndarray
    real_valued: bool = False

    def __post_init__(self):
        plus = _as_modes(self.plus)
        minus = _as_modes(self.minus)
        if plus.size != minus.size:
            raise ValueError("plus and minus must have the same length")
        if plus.size < 1:
            raise ValueError("truncation order must be positive")
        zero = complex(self.zero_mode)
        if not (np.isfinite(zero) and np.all(np.isfinite(plus)) and np.all(np.isfinite(minus))):
            raise ValueError("modal coefficients must be finite")
        if self.real_valued:
            scale = max(1.0, float(np.max(np.abs(plus), initial=0.0)), abs(zero))
            if abs(zero.imag) > 1e-12 * scale or not np.allclose(
                minus, np.conj(plus), rtol=1e-12, atol=1e-12 * scale
            ):
                raise ValueError("real-valued data needs minus = conj(plus) and a real zero mode")
        object.__setattr__(self, "zero_mode", zero)
        object.__setattr__(self, "plus", plus)
        object.__setattr__(self, "minus", minus)

    @property
    def N(self) -> int:
        return self.plus.size

    @property
    def orders(self) -> np.ndarray:
        return np.arange(1, self.N + 1)

    @property
    def tail_magnitude(self) -> float:
        """Largest modulus among the two highest-order coefficients."""
        return float(max(abs(self.plus[-1]), abs(self.minus[-1])))

    @classmethod
    def zeros(cls, N: int) -> "ModalCoefficients":
        return cls(0.0, np.zeros(N), np.zeros(N))

    @classmethod
    def from_signed(cls, values: np.ndarray) -> "ModalCoefficients":
        """Build from an array indexed by ``n = -N..N``."""
        values = np.asarray(values, dtype=complex)
        N = (values.size - 1) // 2
        return cls(values[N], values[N + 1:], values[:N][::-1])

    def to_signed(self) -> np.ndarray:
        return np.concatenate([self.minus[::-1], [self.zero_mode], self.plus])

    def resized(self, N: int) -> "ModalCoefficients":
        """Zero-pad or truncate to ``N`` modes."""
        if N == self.N:
            return self
        if N < self.N:
            return ModalCoefficients(self.zero_mode, self.plus[:N], self.minus[:N], self.real_valued)
        pad = np.zeros(N - self.N)
        return ModalCoefficients(
            self.zero_mode, np.concatenate([self.plus, pad]), np.concatenate([self.minus, pad]),
            self.real_valued,
        )

    def map_modes(self, zero_factor, factor) -> "ModalCoefficients":
        """Multiply mode 0 by ``zero_factor`` and mode ``n`` (both signs) by ``factor[n-1]``."""
        factor = np.asarray(factor)
        # real factors keep conjugate symmetry
        real = self.real_valued and np.isrealobj(factor) and np.isrealobj(zero_factor)
        return ModalCoefficients(self.zero_mode * zero_factor, self.plus * factor, self.minus * factor, real)

    def synthesize(self, theta) -> np.ndarray:
        """Evaluate the trigonometric sum at angles ``theta``."""
        theta = np.asarray(theta, dtype=float)
        e = np.exp(1j * np.multiply.outer(theta, self.orders))
        return self.zero_mode + e @ self.plus + np.conj(e) @ self.minus

    def __add__(self, other: "ModalCoefficients") -> "ModalCoefficients":
        N = max(self.N, other.N)
        a, b = self.resized(N), other.resized(N)
        return ModalCoefficients(a.zero_mode + b.zero_mode, a.plus + b.plus, a.minus + b.minus)

    def __sub__(self, other: "ModalCoefficients") -> "ModalCoefficients":
        return self + (-1.0) * other

    def __mul__(self, scalar) -> "ModalCoefficients":
        return ModalCoefficients(self.zero_mode * scalar, self.plus * scalar, self.minus * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True)
class PolarPoint:
    r: float
    theta: float

    def __post_init__(self):
        if not self.r >= 0:
            raise ValueError("radius must be nonnegative")
        object.__setattr__(self, "theta", float(self.theta) % (2 * np.pi))

    @classmethod
    def from_cartesian(cls, x: float, y: float) -> "PolarPoint":
        return cls(float(np.hypot(x, y)), float(np.arctan2(y, x)))


@dataclass(frozen=True)
class FieldRegion:
    """One annular piece of a :class:`HarmonicField`.

    ``inner`` multiplies ``r^n`` (and carries the constant), ``outer``
    multiplies ``r^-n``; ``outer.zero_mode`` is ignored.
    """

    r_lo: float
    r_hi: float
    inner: ModalCoefficients
    outer: Optional[ModalCoefficients] = None
    log_coeff: complex = 0.0

    def __post_init__(self):
        if not 0 <= self.r_lo < self.r_hi:
            raise ValueError(f"bad region bounds [{self.r_lo}, {self.r_hi}]")
        outer = self.outer if self.outer is not None else ModalCoefficients.zeros(self.inner.N)
        if outer.N != self.inner.N:
            N = max(outer.N, self.inner.N)
            object.__setattr__(self, "inner", self.inner.resized(N))
            outer = outer.resized(N)
        object.__setattr__(self, "outer", outer)
        object.__setattr__(self, "log_coeff", complex(self.log_coeff))
        if self.r_lo == 0 and (
            np.any(outer.plus != 0) or np.any(outer.minus != 0) or self.log_coeff != 0
        ):
            raise ValueError("a region touching the origin cannot carry r^-n or log r terms")

    @property
    def N(self) -> int:
        return self.inner.N


@dataclass(frozen=True)
class HarmonicField:
    """Piecewise harmonic field over contiguous annular regions."""

    regions: tuple
    real_valued: bool = False

    def __post_init__(self):
        regions = tuple(self.regions)
        if not regions:
            raise ValueError("field needs at least one region")
        for lo, hi in zip(regions[:-1], regions[1:]):
            if lo.r_hi != hi.r_lo:
                raise ValueError("regions must be contiguous and ordered by radius")
        object.__setattr__(self, "regions", regions)

    @property
    def r_min(self) -> float:
        return self.regions[0].r_lo

    @property
    def r_max(self) -> float:
        return self.regions[-1].r_hi

    def region_index(self, r) -> np.ndarray:
        """Index of the region holding each radius; -1 when outside the field.

        On a shared boundary the inner region wins.
        """
        r = np.asarray(r, dtype=float)
        idx = np.full(r.shape, -1, dtype=int)
        for k in reversed(range(len(self.regions))):
            reg = self.regions[k]
            idx[(r >= reg.r_lo) & (r <= reg.r_hi)] = k
        return idx

    def _combine(self, other: "HarmonicField", op) -> "HarmonicField":
        if len(self.regions) != len(other.regions) or any(
            (a.r_lo, a.r_hi) != (b.r_lo, b.r_hi) for a, b in zip(self.regions, other.regions)
        ):
            raise ValueError("fields must share their region layout")
        regions = [
            FieldRegion(a.r_lo, a.r_hi, op(a.inner, b.inner), op(a.outer, b.outer),
                        op(a.log_coeff, b.log_coeff))
            for a, b in zip(self.regions, other.regions)
        ]
        return HarmonicField(tuple(regions))

    def __add__(self, other):
        return self._combine(other, lambda x, y: x + y)

    def __sub__(self, other):
        return self._combine(other, lambda x, y: x - y)

    def __mul__(self, scalar):
        regions = [
            FieldRegion(g.r_lo, g.r_hi, g.inner * scalar, g.outer * scalar, g.log_coeff * scalar)
            for g in self.regions
        ]
        return HarmonicField(tuple(regions))

    __rmul__ = __mul__


def project_boundary(
    sampler: Optional[Callable] = None,
    N: int = 1,
    *,
    generator: Optional[Callable[[int], complex]] = None,
    minus_generator: Optional[Callable[[int], complex]] = None,
    zero: complex = 0.0,
) -> ModalCoefficients:
    """First ``N`` Fourier coefficients of a boundary function.

    Pass either ``sampler`` (a vectorised function of the angle, projected
    with the trapezoid rule on ``8N`` nodes) or ``generator`` (``n -> h_{n,+}``
    for ``n = 1..N``; ``minus_generator`` and ``zero`` fill the rest).
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if (sampler is None) == (generator is None):
        raise ValueError("give exactly one of sampler or generator")
    if generator is not None:
        ns = range(1, N + 1)
        plus = [generator(n) for n in ns]
        minus = [minus_generator(n) for n in ns] if minus_generator else np.zeros(N)
        return ModalCoefficients(zero, plus, minus)

    K = 8 * N
    theta = 2 * np.pi * np.arange(K) / K
    samples = np.broadcast_to(np.asarray(sampler(theta), dtype=complex), theta.shape)
    bad = ~np.isfinite(samples)
    if np.any(bad):
        raise ValueError(f"sampler returned non-finite values at theta={theta[bad][:3]}")
    spec = np.fft.fft(samples) / K
    # spec[k] is the coefficient of e^{+ik theta}; negative orders wrap around
    return ModalCoefficients(spec[0], spec[1:N + 1], spec[K - N:][::-1])


def h_half_norm(c: ModalCoefficients) -> float:
    """Squared discrete H^{1/2} norm ``|h_0|^2 + sum_n n (|h_n+|^2 + |h_n-|^2)``."""
    n = c.orders
    return float(abs(c.zero_mode) ** 2 + np.sum(n * (np.abs(c.plus) ** 2 + np.abs(c.minus) ** 2)))


def _powers(r: np.ndarray, N: int) -> np.ndarray:
    # r^n for n = 1..N by repeated multiplication along the last axis
    return np.cumprod(np.repeat(r[..., None], N, axis=-1), axis=-1)


def _region_values(reg: FieldRegion, r, theta, derivative=False):
    """Value, or (d/dr, (1/r) d/dtheta), of one region at matching r/theta arrays."""
    N = reg.N
    n = np.arange(1, N + 1)
    has_grow = np.any(reg.inner.plus != 0) or np.any(reg.inner.minus != 0)
    has_decay = reg.r_lo > 0 and (np.any(reg.outer.plus != 0) or np.any(reg.outer.minus != 0))
    # skipped families would give inf * 0 for large r
    rp = _powers(r, N) if has_grow else np.zeros(r.shape + (N,))
    rm = _powers(1.0 / r, N) if has_decay else np.zeros(r.shape + (N,))
    e = np.exp(1j * theta[..., None] * n)
    ec = np.conj(e)
    pp, pm = reg.inner.plus, reg.inner.minus
    qp, qm = reg.outer.plus, reg.outer.minus
    if not derivative:
        val = reg.inner.zero_mode + (rp * (e * pp + ec * pm)).sum(-1)
        if reg.r_lo > 0:
            val = val + (rm * (e * qp + ec * qm)).sum(-1) + reg.log_coeff * np.log(r)
        return val
    # d/dr of r^n is n r^(n-1); at r=0 only n=1 survives
    with np.errstate(divide="ignore", invalid="ignore"):
        rp_1 = np.where(r[..., None] > 0, rp / np.where(r > 0, r, 1.0)[..., None], (n == 1) * 1.0)
    dr = (n * rp_1 * (e * pp + ec * pm)).sum(-1)
    # (1/r) d/dtheta brings i n for e^{+in}, -i n for e^{-in}
    dt = (1j * n * rp_1 * (e * pp - ec * pm)).sum(-1)
    if reg.r_lo > 0:
        rm_1 = rm / r[..., None]
        dr = dr + (-n * rm_1 * (e * qp + ec * qm)).sum(-1) + reg.log_coeff / r
        dt = dt + (1j * n * rm_1 * (e * qp - ec * qm)).sum(-1)
    return dr, dt


def _chunked(field: HarmonicField, r, theta, derivative, chunk=20000):
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    r, theta = np.broadcast_arrays(r, theta)
    shape = r.shape
    r, theta = r.ravel(), theta.ravel()
    idx = field.region_index(r)
    if np.any(idx < 0):
        bad = r[idx < 0][0]
        raise OutOfDomainError(f"radius {bad} outside field domain [{field.r_min}, {field.r_max}]")
    outs = [np.empty(r.size, complex) for _ in range(2 if derivative else 1)]
    for k, reg in enumerate(field.regions):
        sel = np.flatnonzero(idx == k)
        for start in range(0, sel.size, chunk):
            s = sel[start:start + chunk]
            res = _region_values(reg, r[s], theta[s], derivative)
            if derivative:
                outs[0][s], outs[1][s] = res
            else:
                outs[0][s] = res
    outs = [o.reshape(shape) for o in outs]
    return tuple(outs) if derivative else outs[0]


def evaluate_polar(field: HarmonicField, r, theta):
    """Vectorised evaluation at polar coordinates (arrays broadcast)."""
    val = _chunked(field, r, theta, derivative=False)
    if field.real_valued:
        scale = max(1.0, float(np.max(np.abs(val), initial=0.0)))
        if np.max(np.abs(val.imag), initial=0.0) > 1e-12 * scale:
            raise ValueError("field flagged real has a non-negligible imaginary part")
        return val.real
    return val


def evaluate(field: HarmonicField, p: PolarPoint) -> complex:
    val = evaluate_polar(field, np.array([p.r]), np.array([p.theta]))[0]
    return val if field.real_valued else complex(val)


def polar_gradient(field: HarmonicField, r, theta):
    """Return ``(du/dr, (1/r) du/dtheta)`` at the given points."""
    return _chunked(field, r, theta, derivative=True)


def grad_energy_disk(inner: ModalCoefficients, radius: float) -> float:
    """``int_{B_radius} |grad u|^2`` for ``u = c_0 + sum c_n r^n e^{+-in theta}``."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    n = inner.orders
    weight = np.abs(inner.plus) ** 2 + np.abs(inner.minus) ** 2
    nz = weight > 0
    # log-domain power keeps huge n from overflowing when the coefficient is tiny
    terms = np.zeros_like(weight)
    terms[nz] = n[nz] * np.exp(np.log(weight[nz]) + 2 * n[nz] * np.log(radius))
    return float(2 * np.pi * terms.sum())


def grad_energy_annulus(
    inner: ModalCoefficients,
    outer: ModalCoefficients,
    log_coeff: complex,
    r_lo: float,
    r_hi: float,
) -> float:
    """``int |grad u|^2`` over ``r_lo < r < r_hi``; same-mode cross terms vanish."""
    if not 0 < r_lo < r_hi:
        raise ValueError("need 0 < r_lo < r_hi")
    N = max(inner.N, outer.N)
    inner, outer = inner.resized(N), outer.resized(N)
    n = inner.orders
    wi = np.abs(inner.plus) ** 2 + np.abs(inner.minus) ** 2
    wo = np.abs(outer.plus) ** 2 + np.abs(outer.minus) ** 2
    grow = r_hi ** (2 * n) - r_lo ** (2 * n)
    decay = r_lo ** (-2.0 * n) - r_hi ** (-2.0 * n)
    total = abs(log_coeff) ** 2 * np.log(r_hi / r_lo) + np.sum(n * (wi * grow + wo * decay))
    return float(2 * np.pi * total)


def mass_disk(inner: ModalCoefficients, radius: float) -> float:
    """``int_{B_radius} |u|^2`` for the disk expansion."""
    n = inner.orders
    w = np.abs(inner.plus) ** 2 + np.abs(inner.minus) ** 2
    return float(np.pi * abs(inner.zero_mode) ** 2 * radius ** 2
                 + 2 * np.pi * np.sum(w * radius ** (2 * n + 2) / (2 * n + 2)))


def mass_annulus(inner, outer, log_coeff, r_lo, r_hi) -> float:
    """``int |u|^2`` over an annulus, including the r^n / r^-n cross terms."""
    N = max(inner.N, outer.N)
    inner, outer = inner.resized(N), outer.resized(N)
    a0, b0 = inner.zero_mode, complex(log_coeff)

    def zero_prim(r):
        lr = np.log(r)
        return (abs(a0) ** 2 * r ** 2 / 2
                + 2 * (a0 * np.conj(b0)).real * (r ** 2 / 2 * lr - r ** 2 / 4)
                + abs(b0) ** 2 * r ** 2 / 2 * (lr ** 2 - lr + 0.5))

    total = zero_prim(r_hi) - zero_prim(r_lo)
    n = inner.orders
    for p, q in ((inner.plus, outer.plus), (inner.minus, outer.minus)):
        grow = np.abs(p) ** 2 * (r_hi ** (2 * n + 2) - r_lo ** (2 * n + 2)) / (2 * n + 2)
        cross = 2 * (p * np.conj(q)).real * (r_hi ** 2 - r_lo ** 2) / 2
        with np.errstate(divide="ignore", invalid="ignore"):
            dec = np.where(
                n == 1,
                np.log(r_hi / r_lo),
                (r_hi ** (2.0 - 2 * n) - r_lo ** (2.0 - 2 * n)) / (2.0 - 2 * n),
            )
        total += np.sum(grow + cross + np.abs(q) ** 2 * dec)
    return float(2 * np.pi * total)


def field_grad_energy(field: HarmonicField, r_max: Optional[float] = None) -> float:
    """Closed-form gradient energy of a field over ``r <= r_max``."""
    r_max = field.r_max if r_max is None else r_max
    total = 0.0
    for reg in field.regions:
        hi = min(reg.r_hi, r_max)
        if hi <= reg.r_lo:
            break
        if reg.r_lo == 0:
            total += grad_energy_disk(reg.inner, hi)
        else:
            total += grad_energy_annulus(reg.inner, reg.outer, reg.log_coeff, reg.r_lo, hi)
    return total


def field_h1_norm(field: HarmonicField) -> float:
    """``||u||_{H^1}`` over the whole (bounded) field domain, in closed form."""
    if not np.isfinite(field.r_max):
        raise ValueError("H^1 norm needs a bounded field")
    total = 0.0
    for reg in field.regions:
        if reg.r_lo == 0:
            total += grad_energy_disk(reg.inner, reg.r_hi) + mass_disk(reg.inner, reg.r_hi)
        else:
            total += grad_energy_annulus(reg.inner, reg.outer, reg.log_coeff, reg.r_lo, reg.r_hi)
            total += mass_annulus(reg.inner, reg.outer, reg.log_coeff, reg.r_lo, reg.r_hi)
    return float(np.sqrt(total))
