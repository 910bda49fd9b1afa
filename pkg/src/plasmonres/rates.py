"""Log-log least-squares rate fits over a loss sweep."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

__all__ = ["RateFit", "fit_rate", "UNRELIABLE_RESIDUAL"]

UNRELIABLE_RESIDUAL = 0.1


@dataclass(frozen=True)
class RateFit:
    """``log q ~ slope * log delta + intercept``; residuals in natural-log units."""

    slope: float
    intercept: float
    max_residual: float
    delta_window: tuple
    n_points: int
    label: str = ""

    @property
    def reliable(self) -> bool:
        return self.max_residual <= UNRELIABLE_RESIDUAL

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "slope": self.slope,
            "intercept": self.intercept,
            "max_residual": self.max_residual,
            "delta_window": list(self.delta_window),
            "n_points": self.n_points,
            "reliable": self.reliable,
        }


def fit_rate(deltas, values, label: str = "") -> RateFit:
    """Least-squares line through ``(log delta, log value)``.

    Points where the value underflowed to zero (or is not finite) are dropped
    with a warning.
    """
    deltas = np.asarray(deltas, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = np.isfinite(values) & (values > 0)
    if not np.all(keep):
        warnings.warn(
            f"{label or 'quantity'}: dropping {np.count_nonzero(~keep)} sweep points "
            "with zero or non-finite values",
            stacklevel=2,
        )
    x, y = np.log(deltas[keep]), np.log(values[keep])
    if x.size < 2:
        raise ValueError("need at least two usable points for a rate fit")
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    return RateFit(
        float(slope), float(intercept), float(np.max(np.abs(resid))),
        (float(deltas[keep].min()), float(deltas[keep].max())), int(x.size), label,
    )
