"""Flat-file outputs: field grids, summaries and run manifests.

Grids and summaries are deterministic. Timestamps live only in the manifest,
which lists every output file with its SHA-256.
"""
from __future__ import annotations

import datetime as _dt
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from . import __version__

__all__ = [
    "GRID_HEADER",
    "grid_points",
    "write_grid_csv",
    "read_grid_csv",
    "magnitude_quantiles",
    "write_json",
    "sha256_file",
    "write_manifest",
]

GRID_HEADER = "x,y,re_u,im_u,region"
QUANTILES = (0.5, 0.9, 0.99, 0.999)


def grid_points(half_width: float, n: int = 400):
    """Row-major ``n x n`` grid over ``[-half_width, half_width]^2``."""
    xs = np.linspace(-half_width, half_width, n)
    X, Y = np.meshgrid(xs, xs, indexing="xy")
    return X.ravel(), Y.ravel()


def _fmt(v: float) -> str:
    # repr of a Python float is the shortest round-trip decimal
    return repr(float(v))


def write_grid_csv(path, x, y, u, region) -> None:
    re_u, im_u = np.real(u).tolist(), np.imag(u).tolist()
    lines = [GRID_HEADER]
    lines += [
        f"{_fmt(a)},{_fmt(b)},{_fmt(c)},{_fmt(d)},{r}"
        for a, b, c, d, r in zip(np.asarray(x).tolist(), np.asarray(y).tolist(), re_u, im_u, region)
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def read_grid_csv(path):
    """Inverse of :func:`write_grid_csv`: ``(x, y, u, region)``."""
    with open(path) as fh:
        header = fh.readline().strip()
        if header != GRID_HEADER:
            raise ValueError(f"{path}: unexpected header {header!r}")
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    x = np.array([float(r[0]) for r in rows])
    y = np.array([float(r[1]) for r in rows])
    u = np.array([complex(float(r[2]), float(r[3])) for r in rows])
    return x, y, u, [r[4] for r in rows]


def magnitude_quantiles(u) -> dict:
    """Quantiles of ``|u|`` over finite samples, for consistent plot clipping."""
    a = np.abs(np.asarray(u))
    a = a[np.isfinite(a)]
    out = {f"q{q:g}": float(np.quantile(a, q)) for q in QUANTILES}
    out["max"] = float(a.max())
    return out


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, payload: dict) -> None:
    text = json.dumps(_clean(payload), indent=2, sort_keys=True, allow_nan=False)
    Path(path).write_text(text + "\n")


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out_dir, command: str, config: dict, outputs, inputs=(), started=None) -> Path:
    """``manifest.json`` with the config echo, tool version, timestamps and file hashes."""
    out_dir = Path(out_dir)
    now = _dt.datetime.now(_dt.timezone.utc).isoformat()
    payload = {
        "command": command,
        "config": config,
        "tool_version": __version__,
        "timestamps": {"started": started or now, "finished": now},
        "input_hashes": {str(p): sha256_file(p) for p in inputs},
        "outputs": {Path(p).name: sha256_file(p) for p in outputs},
    }
    path = out_dir / "manifest.json"
    write_json(path, payload)
    return path
