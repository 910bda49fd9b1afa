"""Command-line front end.

Commands: ``figure1``, ``figure2``, ``solve1``, ``solve2``, ``rate``,
``check-compat``. Global flags: ``--out``, ``--strict``, ``--threads``,
``--render``.

Exit codes: 0 success (and a definite verdict for ``check-compat``), 2
Borderline verdict, 3 Indeterminate verdict, 4 unreliable rate fit under
``--strict``, 64 malformed config or arguments, 65 invalid physical
parameters, 74 I/O failure.
"""
from __future__ import annotations

import argparse
import configparser
import datetime as _dt
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from . import __version__
from . import problem1 as p1
from . import problem2 as p2
from .artifacts import (
    grid_points,
    magnitude_quantiles,
    write_grid_csv,
    write_json,
    write_manifest,
)
from .dataspec import SpecError, problem1_data, problem2_source, write_coefficients
from .fourier_core import evaluate_polar, h_half_norm
from .rates import fit_rate
from .regions import AnnularSector, Disk, Rectangle

EXIT_OK = 0
EXIT_BORDERLINE = 2
EXIT_INDETERMINATE = 3
EXIT_UNRELIABLE = 4
EXIT_USAGE = 64
EXIT_VALIDATION = 65
EXIT_IO = 74

FIG1_DELTAS = (1e-14, 1e-18, 1e-20)
FIG2_EXPONENTS = (10.0, 10.4, 10.8)
FIG_RESOLUTION = 400
FIG_MODES = 100
FIG_R = 3.0

# disjoint probe regions for the whole-plane problem: inside the core, in the
# image of the shell, and far out in the matrix
PLANE_REGIONS = {
    "core": Disk(0.25),
    "shell_image": AnnularSector(1.2, 1.8, 0.0, np.pi / 4),
    "far_field": Rectangle(5.0, 6.0, 0.0, 1.0),
}


class UsageError(Exception):
    pass


class ValidationError(Exception):
    pass


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


def _map(fn, items, threads: int):
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            return list(ex.map(fn, items))
    return [fn(i) for i in items]


# ---------------------------------------------------------------------------
# grids


def problem1_regions(r, R: float):
    return np.where(r < 1 / R, "core", np.where(r < 1, "shell", np.where(r <= R, "matrix", "exterior")))


def problem1_grid(sol: p1.CoreShellSolution, x, y):
    """Field of ``u_delta`` on Cartesian points; ``nan`` outside ``B_R``."""
    r, t = np.hypot(x, y), np.arctan2(y, x)
    u = np.full(r.shape, np.nan + 0j)
    inside = r <= sol.R
    u[inside] = evaluate_polar(p1.assemble_field(sol), r[inside], t[inside])
    return u, problem1_regions(r, sol.R).tolist()


def problem2_grid(sol: p2.PlaneSolution, x, y):
    r = np.hypot(x, y)
    u = p2.assemble_field2(sol)(x, y)
    return u, np.where(r < 1, "shell", "matrix").tolist()


def _render(out_dir: Path, stem: str, x, y, u, n: int, clip: float) -> list:
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:  # optional dependency
        raise UsageError("--render needs matplotlib (pip install 'artifact[render]')") from exc
    ext = (x.min(), x.max(), y.min(), y.max())
    paths = []
    for part, vals in (("re", u.real), ("im", u.imag)):
        fig, ax = plt.subplots(figsize=(5, 5))
        img = np.clip(vals.reshape(n, n), -clip, clip)
        ax.imshow(img, origin="lower", extent=ext, cmap="RdBu_r")
        ax.set_title(f"{stem} {part}")
        p = out_dir / f"{stem}_{part}.png"
        fig.savefig(p, dpi=100)
        plt.close(fig)
        paths.append(p)
    return paths


# ---------------------------------------------------------------------------
# figures


def cmd_figure1(out_dir, threads: int = 1, render: bool = False, n: int = FIG_RESOLUTION) -> dict:
    """Core-shell problem with ``g = sum n^-2 e^{in theta}`` at three losses."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = _now()
    h = p1.inverse_square_data(FIG_MODES)
    verdict = p1.classify_compatibility(h, FIG_R)
    x, y = grid_points(FIG_R, n)
    r = np.hypot(x, y)

    def run(d):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            sol = p1.solve_modes(h, p1.SolverConfig.for_data(FIG_R, d, h))
        u, reg = problem1_grid(sol, x, y)
        return sol, u, reg

    results = _map(run, FIG1_DELTAS, threads)
    outputs, entries = [], []
    core = r < 1 / 6
    ring = (r > 1 / 3) & (r < FIG_R)
    for d, (sol, u, reg) in zip(FIG1_DELTAS, results):
        path = out_dir / f"figure1_delta_{d:.0e}.csv"
        write_grid_csv(path, x, y, u, reg)
        outputs.append(path)
        q = magnitude_quantiles(u)
        entries.append({
            "delta": d,
            "N": sol.h.N,
            "E_delta": p1.power(sol),
            "grad_energy": p1.grad_energy(sol),
            "gap_h_half": p1.localized_resonance_gap(sol),
            "verdict": verdict.verdict.value,
            "max_abs_u_core": float(np.abs(u[core]).max()),
            "max_abs_u_annulus": float(np.abs(u[ring]).max()),
            "abs_u_quantiles": q,
            "grid": path.name,
        })
        if render:
            outputs += _render(out_dir, path.stem, x, y, u, n, q["q0.99"])
    cores = np.array([e["max_abs_u_core"] for e in entries])
    rings = [e["max_abs_u_annulus"] for e in entries]
    variation = float((cores.max() - cores.min()) / cores.max())
    checks = {
        "core_max_relative_variation": variation,
        "core_bounded": variation < 0.1,
        "annulus_max_increasing": bool(all(b > a for a, b in zip(rings, rings[1:]))),
    }
    grid_d = np.array(FIG1_DELTAS)
    fits = [
        fit_rate(grid_d, [e[k] for e in entries], label=k).as_dict()
        for k in ("grad_energy", "E_delta", "gap_h_half")
    ]
    summary = {
        "command": "figure1",
        "R": FIG_R,
        "window": [-FIG_R, FIG_R],
        "resolution": n,
        "modes": FIG_MODES,
        "runs": entries,
        "checks": checks,
        "rate_fits": fits,
        "manifest": "manifest.json",
    }
    spath = out_dir / "figure1_summary.json"
    write_json(spath, summary)
    outputs.append(spath)
    write_manifest(out_dir, "figure1", {"deltas": list(FIG1_DELTAS), "resolution": n}, outputs, started=started)
    return summary


def cmd_figure2(out_dir, threads: int = 1, render: bool = False, n: int = FIG_RESOLUTION) -> dict:
    """Whole-plane source problem with the quintic cut-off source at three losses."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = _now()
    prepared = p2.prepare_source(p2.cutoff_source(FIG_MODES))
    deltas = [10.0 ** -e for e in FIG2_EXPONENTS]
    x, y = grid_points(4.0, n)
    core = PLANE_REGIONS["core"]

    def run(d):
        sol = p2.solve_plane(prepared, d)
        u, reg = problem2_grid(sol, x, y)
        return sol, u, reg

    results = _map(run, deltas, threads)
    outputs, entries = [], []
    for e, d, (sol, u, reg) in zip(FIG2_EXPONENTS, deltas, results):
        path = out_dir / f"figure2_delta_1e-{e:g}.csv"
        write_grid_csv(path, x, y, u, reg)
        outputs.append(path)
        q = magnitude_quantiles(u)
        ge = p2.power_on_region(sol, Disk(1.0))
        entries.append({
            "delta": d,
            "N": prepared.w_trace.N,
            "E_delta": d * ge,
            "grad_energy": ge,
            "grad_energy_core": p2.power_on_region(sol, core),
            "gap_h_half": None,
            "verdict": prepared.compat.verdict.value,
            "abs_u_quantiles": q,
            "grid": path.name,
        })
        if render:
            outputs += _render(out_dir, path.stem, x, y, u, n, q["q0.99"])
    ratios = [float(b["grad_energy_core"] / a["grad_energy_core"]) for a, b in zip(entries, entries[1:])]
    log_ratios = [float(np.log10(v)) for v in ratios]
    checks = {
        "core_energy_ratios": ratios,
        "core_energy_log10_ratios": log_ratios,
        "expected_log10_ratio": 0.8,
        # slope -2 within 2% over 0.4-decade steps
        "ratio_matches": bool(all(abs(v - 0.8) <= 0.016 for v in log_ratios)),
    }
    grid_d = np.array(deltas)
    fits = [
        fit_rate(grid_d, [e[k] for e in entries], label=k).as_dict()
        for k in ("grad_energy_core", "grad_energy", "E_delta")
    ]
    summary = {
        "command": "figure2",
        "window": [-4.0, 4.0],
        "resolution": n,
        "modes": FIG_MODES,
        "runs": entries,
        "checks": checks,
        "rate_fits": fits,
        "manifest": "manifest.json",
    }
    spath = out_dir / "figure2_summary.json"
    write_json(spath, summary)
    outputs.append(spath)
    write_manifest(out_dir, "figure2", {"deltas": deltas, "resolution": n}, outputs, started=started)
    return summary


# ---------------------------------------------------------------------------
# configs

_PROBLEM_KEYS = {1: {"R", "delta", "N"}, 2: {"delta", "N", "M"}}


def load_config(path, overrides: Sequence[str] = ()) -> tuple:
    """Read an INI config with ``[problem]`` and ``[data]`` sections.

    ``overrides`` are ``section.key=value`` strings applied on top.
    """
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except configparser.Error as exc:
        raise UsageError(f"{path}: {exc}") from exc
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise UsageError(f"override {item!r} is not of the form section.key=value")
        lhs, value = item.split("=", 1)
        section, key = lhs.split(".", 1)
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section, key, value)
    extra = set(cp.sections()) - {"problem", "data"}
    if extra or not cp.has_section("data"):
        raise UsageError(f"{path}: expected sections [problem] and [data]")
    problem = dict(cp["problem"]) if cp.has_section("problem") else {}
    return problem, dict(cp["data"])


def _number(problem: Mapping[str, str], key: str, conv, default=None):
    if key not in problem or problem[key] == "":
        if default is None:
            raise UsageError(f"config needs problem.{key}")
        return default
    try:
        return conv(problem[key])
    except ValueError as exc:
        raise UsageError(f"problem.{key}: cannot parse {problem[key]!r}") from exc


def _check_keys(problem, which):
    extra = set(problem) - _PROBLEM_KEYS[which]
    if extra:
        raise UsageError(f"unexpected problem keys: {', '.join(sorted(extra))}")


def _check_physics(R: Optional[float], delta: float):
    if R is not None and not R > 1:
        raise ValidationError(f"R must exceed 1 (got {R})")
    if not 0 < delta < 1:
        raise ValidationError(f"delta must lie in (0, 1) (got {delta})")


def cmd_solve1(config, out_dir, overrides: Sequence[str] = ()) -> dict:
    started = _now()
    problem, data = load_config(config, overrides)
    _check_keys(problem, 1)
    R = _number(problem, "R", float)
    delta = _number(problem, "delta", float)
    _check_physics(R, delta)
    N = _number(problem, "N", int, 0) or None
    spec = problem1_data(data, R, base=Path(config).parent)
    auto = p1.SAFETY_FACTOR * p1.truncation_order(delta, R)
    h = spec.materialize(N or auto)
    cfg = p1.SolverConfig(R, delta, N or max(h.N, auto))
    sol = p1.solve_modes(h, cfg)
    verdict = p1.classify_compatibility(h, R, spec.descriptor)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    for name, c in (("h", sol.h), ("c", sol.c), ("a", sol.a), ("b", sol.b)):
        p = out_dir / f"coefficients_{name}.csv"
        write_coefficients(p, c)
        outputs.append(p)
    summary = {
        "command": "solve1",
        "R": R,
        "delta": delta,
        "N": cfg.N,
        "E_delta": p1.power(sol),
        "grad_energy": p1.grad_energy(sol),
        "gap_h_half": p1.localized_resonance_gap(sol),
        "verdict": verdict.verdict.value,
        "decay_rate": verdict.decay_rate,
        "rate_fits": [],
        "manifest": "manifest.json",
    }
    spath = out_dir / "summary.json"
    write_json(spath, summary)
    outputs.append(spath)
    echo = {"problem": problem, "data": data, "overrides": list(overrides)}
    write_manifest(out_dir, "solve1", echo, outputs, inputs=[config], started=started)
    return summary


def cmd_solve2(config, out_dir, overrides: Sequence[str] = ()) -> dict:
    started = _now()
    problem, data = load_config(config, overrides)
    _check_keys(problem, 2)
    delta = _number(problem, "delta", float)
    _check_physics(None, delta)
    N = _number(problem, "N", int, 0) or None
    M = _number(problem, "M", int, 256)
    prepared = p2.prepare_source(problem2_source(data), N, M)
    sol = p2.solve_plane(prepared, delta)
    c = sol.coeffs

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    a_full = type(c.a)(c.a0, c.a.plus, c.a.minus)
    b_full = type(c.b)(c.b0, c.b.plus, c.b.minus)
    for name, co in (("w_trace", sol.w_trace), ("a", a_full), ("b", b_full)):
        p = out_dir / f"coefficients_{name}.csv"
        write_coefficients(p, co)
        outputs.append(p)
    ge = p2.power_on_region(sol, Disk(1.0))
    summary = {
        "command": "solve2",
        "delta": delta,
        "N": prepared.w_trace.N,
        "E_delta": delta * ge,
        "grad_energy": ge,
        "gap_h_half": None,
        "verdict": prepared.compat.verdict.value,
        "dominant_mode": prepared.compat.dominant_mode,
        "dominant_magnitude": prepared.compat.magnitude,
        "compat_tol": prepared.compat.tol,
        "rate_fits": [],
        "manifest": "manifest.json",
    }
    spath = out_dir / "summary.json"
    write_json(spath, summary)
    outputs.append(spath)
    echo = {"problem": problem, "data": data, "overrides": list(overrides)}
    write_manifest(out_dir, "solve2", echo, outputs, inputs=[config], started=started)
    return summary


# ---------------------------------------------------------------------------
# rates and compatibility


def cmd_rate(problem: int, data: Mapping[str, str], delta_min: float, delta_max: float, points: int,
             R: float = 3.0, threads: int = 1) -> list:
    """Rate fits across a log-spaced sweep; returns :class:`RateFit` objects."""
    if points < 4 or np.log10(delta_max / delta_min) < 3 - 1e-9:
        raise ValidationError("a rate sweep needs >= 4 points spanning >= 3 decades")
    if not 0 < delta_min < delta_max < 1:
        raise ValidationError("need 0 < delta_min < delta_max < 1")
    grid = np.logspace(np.log10(delta_min), np.log10(delta_max), points)
    if problem == 1:
        if R <= 1:
            raise ValidationError(f"R must exceed 1 (got {R})")
        spec = problem1_data(data, R)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return [
                p1.delta_sweep(spec.for_sweep, R, grid, q, threads)
                for q in ("grad_energy", "power", "gap")
            ]
    prepared = p2.prepare_source(problem2_source(data))

    def one(d):
        sol = p2.solve_plane(prepared, float(d))
        vals = {k: p2.power_on_region(sol, reg) for k, reg in PLANE_REGIONS.items()}
        vals["power"] = d * p2.power_on_region(sol, Disk(1.0))
        return vals

    rows = _map(one, grid, threads)
    return [fit_rate(grid, [r[k] for r in rows], label=k) for k in list(PLANE_REGIONS) + ["power"]]


def cmd_check_compat(problem: int, data: Mapping[str, str], R: float = 3.0) -> tuple:
    """Return ``(report, exit_code)``."""
    if problem == 1:
        spec = problem1_data(data, R)
        h = spec.materialize(200)
        v = p1.classify_compatibility(h, R, spec.descriptor)
        report = {
            "problem": 1,
            "verdict": v.verdict.value,
            "decay_rate": v.decay_rate,
            "critical_rate": 1.0 / R,
            "evidence": v.evidence,
        }
        code = {p1.Verdict.BORDERLINE: EXIT_BORDERLINE, p1.Verdict.INDETERMINATE: EXIT_INDETERMINATE}
        return report, code.get(v.verdict, EXIT_OK)
    prepared = p2.prepare_source(problem2_source(data))
    c = prepared.compat
    mags = np.abs(prepared.w_trace.to_signed())
    order = np.argsort(mags)[::-1][:8]
    report = {
        "problem": 2,
        "verdict": c.verdict.value,
        "dominant_mode": c.dominant_mode,
        "decay_rate": c.magnitude,
        "evidence": {
            "tol": c.tol,
            "largest_trace_modes": {int(k - prepared.w_trace.N): float(mags[k]) for k in order},
        },
    }
    return report, EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _kv(items: Sequence[str]) -> dict:
    out = {}
    for item in items:
        if "=" not in item:
            raise UsageError(f"data entry {item!r} is not of the form key=value")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


class _Parser(argparse.ArgumentParser):
    """Argument errors exit with the usage code; argparse's default 2 means Borderline here."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="plasmonres", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--out", default="out", help="output directory (default: out)")
    ap.add_argument("--strict", action="store_true", help="nonzero exit on unreliable rate fits")
    ap.add_argument("--threads", type=int, default=1, help="parallel workers across delta values")
    ap.add_argument("--render", action="store_true", help="also write PNG renderings (needs matplotlib)")
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("figure1", help="core-shell field grids at delta = 1e-14, 1e-18, 1e-20")
    sub.add_parser("figure2", help="whole-plane field grids at delta = 1e-10, 1e-10.4, 1e-10.8")
    for name in ("solve1", "solve2"):
        p = sub.add_parser(name, help=f"solve problem {name[-1]} from a config file")
        p.add_argument("config")
        p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE")

    p = sub.add_parser("rate", help="log-log rate fits across a delta sweep")
    p.add_argument("problem", type=int, choices=(1, 2))
    p.add_argument("--data", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--R", type=float, default=3.0)
    p.add_argument("--delta-min", type=float, default=1e-10)
    p.add_argument("--delta-max", type=float, default=1e-4)
    p.add_argument("--points", type=int, default=13)

    p = sub.add_parser("check-compat", help="classify data or source compatibility")
    p.add_argument("problem", type=int, choices=(1, 2))
    p.add_argument("--data", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--R", type=float, default=3.0)
    return ap


def _print_fits(fits):
    print(f"{'quantity':<14}{'slope':>12}{'intercept':>14}{'max_resid':>12}  reliable")
    for f in fits:
        print(f"{f.label:<14}{f.slope:>12.6f}{f.intercept:>14.6f}{f.max_residual:>12.3e}  {f.reliable}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        if args.command == "figure1":
            s = cmd_figure1(out, args.threads, args.render)
            print(f"figure1: wrote 3 grids + summary to {out}; checks {s['checks']}")
        elif args.command == "figure2":
            s = cmd_figure2(out, args.threads, args.render)
            print(f"figure2: wrote 3 grids + summary to {out}; checks {s['checks']}")
        elif args.command == "solve1":
            s = cmd_solve1(args.config, out, args.set)
            print(f"solve1: N={s['N']} E_delta={s['E_delta']:.6g} verdict={s['verdict']}")
        elif args.command == "solve2":
            s = cmd_solve2(args.config, out, args.set)
            print(f"solve2: N={s['N']} E_delta={s['E_delta']:.6g} verdict={s['verdict']}")
        elif args.command == "rate":
            data = _kv(args.data)
            fits = cmd_rate(args.problem, data, args.delta_min, args.delta_max, args.points, args.R, args.threads)
            _print_fits(fits)
            out.mkdir(parents=True, exist_ok=True)
            path = out / "rate_fits.json"
            write_json(path, {"problem": args.problem, "data": data, "rate_fits": [f.as_dict() for f in fits],
                              "manifest": "manifest.json"})
            write_manifest(out, "rate", {"problem": args.problem, "data": data, "delta_min": args.delta_min,
                                         "delta_max": args.delta_max, "points": args.points, "R": args.R}, [path])
            if args.strict and not all(f.reliable for f in fits):
                print("unreliable fit (max residual > 0.1)", file=sys.stderr)
                return EXIT_UNRELIABLE
        elif args.command == "check-compat":
            report, code = cmd_check_compat(args.problem, _kv(args.data), args.R)
            print(f"verdict: {report['verdict']}")
            print(f"decay estimate: {report['decay_rate']:.6g}")
            if args.problem == 2:
                print(f"dominant surviving mode: {report['dominant_mode']}")
            print("evidence:")
            for k, v in report["evidence"].items():
                print(f"  {k}: {v}")
            return code
    except (UsageError, SpecError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValidationError, ValueError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
