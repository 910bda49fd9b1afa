"""Named data generators for configs and the command line.

A data spec is a flat mapping of strings, e.g. ``{"generator": "designer",
"alpha": "0.25"}``. Values are literals only: numbers, complex numbers in
Python syntax, and ``n:value`` lists separated by ``;``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Optional, Union

import numpy as np

from . import problem1 as p1
from . import problem2 as p2
from .fourier_core import ModalCoefficients

__all__ = [
    "SpecError",
    "Problem1Data",
    "problem1_data",
    "problem2_source",
    "read_coefficients",
    "write_coefficients",
    "coefficient_rows",
]

PROBLEM1_GENERATORS = ("inverse_square", "designer", "trig", "geometric", "file")
PROBLEM2_GENERATORS = ("cutoff_source", "bump")


class SpecError(ValueError):
    """Malformed or unknown data spec entry."""


def _get(spec: Mapping[str, str], key: str, conv, default=None):
    if key not in spec:
        if default is None:
            raise SpecError(f"data spec needs '{key}'")
        return default
    try:
        return conv(spec[key])
    except ValueError as exc:
        raise SpecError(f"bad value for '{key}': {spec[key]!r}") from exc


def _allowed(spec, keys):
    extra = set(spec) - set(keys) - {"generator"}
    if extra:
        raise SpecError(f"unexpected data keys: {', '.join(sorted(extra))}")


def parse_modes(text: str) -> dict:
    """``"1:0.5; -2:1j"`` -> ``{1: 0.5, -2: 1j}``."""
    out = {}
    for item in filter(None, (s.strip() for s in text.split(";"))):
        if ":" not in item:
            raise SpecError(f"mode entry {item!r} is not of the form n:value")
        k, v = item.split(":", 1)
        try:
            out[int(k)] = complex(v.strip().replace(" ", ""))
        except ValueError as exc:
            raise SpecError(f"bad mode entry {item!r}") from exc
    if not out:
        raise SpecError("empty mode list")
    return out


@dataclass(frozen=True)
class Problem1Data:
    """Boundary data, or a factory ``N -> data`` when the size follows delta."""

    coeffs: Optional[ModalCoefficients]
    factory: Optional[Callable[[int], ModalCoefficients]] = None
    descriptor: Optional[p1.TailDescriptor] = None
    name: str = ""

    def materialize(self, N: int) -> ModalCoefficients:
        return self.coeffs if self.coeffs is not None else self.factory(N)

    @property
    def for_sweep(self) -> Union[ModalCoefficients, Callable]:
        return self.coeffs if self.coeffs is not None else self.factory


def problem1_data(spec: Mapping[str, str], R: float = 3.0, base: Path = Path(".")) -> Problem1Data:
    gen = spec.get("generator")
    desc = None
    if "descriptor_rate" in spec:
        desc = p1.TailDescriptor(_get(spec, "descriptor_rate", float), _get(spec, "descriptor_power", float, 0.0))
    common = ("descriptor_rate", "descriptor_power")
    if gen == "inverse_square":
        _allowed(spec, ("N",) + common)
        return Problem1Data(p1.inverse_square_data(_get(spec, "N", int, 100)), descriptor=desc, name=gen)
    if gen == "designer":
        _allowed(spec, ("alpha", "N") + common)
        alpha = _get(spec, "alpha", float)
        if "N" in spec:
            return Problem1Data(p1.design_incompatible_data(alpha, R, _get(spec, "N", int)), descriptor=desc, name=gen)
        return Problem1Data(None, lambda N: p1.design_incompatible_data(alpha, R, N), desc, gen)
    if gen == "geometric":
        # h_n = rate^n for n <= N; rate = 1/R sits on the compatibility threshold
        _allowed(spec, ("rate", "N") + common)
        rate = _get(spec, "rate", float)
        N = _get(spec, "N", int, 40)
        vals = rate ** np.arange(1, N + 1, dtype=float)
        return Problem1Data(ModalCoefficients(0.0, vals, np.zeros(N)), descriptor=desc, name=gen)
    if gen == "trig":
        _allowed(spec, ("modes",) + common)
        # the tail is identically zero, so the decay rate is known exactly
        desc = desc or p1.TailDescriptor(0.0)
        return Problem1Data(_from_signed(parse_modes(spec.get("modes", ""))), descriptor=desc, name=gen)
    if gen == "file":
        _allowed(spec, ("path",) + common)
        path = Path(_get(spec, "path", str))
        return Problem1Data(read_coefficients(path if path.is_absolute() else base / path), descriptor=desc, name=gen)
    raise SpecError(f"unknown problem-1 generator {gen!r}; expected one of {', '.join(PROBLEM1_GENERATORS)}")


def problem2_source(spec: Mapping[str, str]) -> p2.SourceSpec:
    gen = spec.get("generator")
    if gen == "cutoff_source":
        _allowed(spec, ("n_modes",))
        return p2.cutoff_source(_get(spec, "n_modes", int, 100))
    if gen == "bump":
        _allowed(spec, ("rho_a", "rho_b"))
        return p2.compatible_bump_source(_get(spec, "rho_a", float, 1 / 3), _get(spec, "rho_b", float, 0.5))
    raise SpecError(f"unknown problem-2 generator {gen!r}; expected one of {', '.join(PROBLEM2_GENERATORS)}")


def _from_signed(table: dict) -> ModalCoefficients:
    N = max(1, max(abs(k) for k in table))
    arr = np.zeros(2 * N + 1, complex)
    for k, v in table.items():
        arr[N + k] = v
    return ModalCoefficients.from_signed(arr)


def coefficient_rows(c: ModalCoefficients):
    """``(n, re, im)`` for ``n = -N..N``."""
    s = c.to_signed()
    return [(int(n), float(v.real), float(v.imag)) for n, v in zip(range(-c.N, c.N + 1), s)]


def write_coefficients(path: Path, c: ModalCoefficients) -> None:
    lines = ["n,re,im"] + [f"{n},{re!r},{im!r}" for n, re, im in coefficient_rows(c)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_coefficients(path: Path) -> ModalCoefficients:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [s.strip() for s in rows[0]] != ["n", "re", "im"]:
        raise SpecError(f"{path}: expected header n,re,im")
    table = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        try:
            n, re, im = int(row[0]), float(row[1]), float(row[2])
        except (ValueError, IndexError) as exc:
            raise SpecError(f"{path}:{lineno}: malformed row {row!r}") from exc
        table[n] = complex(re, im)
    if not table:
        raise SpecError(f"{path}: no coefficients")
    return _from_signed(table)
