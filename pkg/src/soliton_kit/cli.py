"""Command line front end.

Subcommands: solve, verify, sweep, geodesic, picard-lab.  Exit codes form a
stable contract: 0 success, 1 usage error, 2 solver failure, 3 verification
failure.

Trajectory CSV: '#'-prefixed key=value metadata lines, then a header row
r,h,h_r,q,u,p,v,w, then data in shortest round-trip decimal so a rewrite of
a parsed file is byte-identical.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import asymptotics, geometry, picard
from .integrate import (
    IntegratorConfig,
    SeederMismatch,
    integrate,
    integrate_negative_lambda,
    make_seed,
)
from .model import SolitonParams, TerminationKind, Trajectory

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SOLVER = 2
EXIT_VERIFY = 3


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # Accept comma lists starting with a negative number
        # (e.g. --mu1 -0.5,0.2,1/3) as values rather than flags.
        self._negative_number_matcher = re.compile(r"^-\d+$|^-\d*\.\d+$|^-\d[\d.,/eE+-]*$")

    # argparse exits 2 on bad flags by default; the contract says 1.
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


class UsageError(Exception):
    pass


def _rational(text: str) -> float:
    """Numeric argument accepting exact rationals like '1/3'."""
    text = text.strip()
    try:
        return float(Fraction(text))
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")


def _rational_list(text: str) -> list[float]:
    items = [t for t in text.split(",") if t.strip()]
    return [_rational(t) for t in items]


def _int_list(text: str) -> list[int]:
    out = []
    for t in text.split(","):
        t = t.strip()
        if not t:
            continue
        try:
            out.append(int(t))
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {t!r}")
    return out


def _default_jobs() -> int:
    env = os.environ.get("SOLITON_KIT_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _add_common(p: argparse.ArgumentParser, lists: bool = False) -> None:
    num = _rational_list if lists else _rational
    integer = _int_list if lists else int
    p.add_argument("--n", type=integer, required=False, help="sphere dimension(s)")
    p.add_argument("--lambda", dest="lam", type=num, default=None)
    p.add_argument("--mu1", type=num, default=None, help="initial slope; accepts '1/3'")
    p.add_argument("--rmax", type=float, default=None)
    p.add_argument("--rel-tol", type=float, default=None)
    p.add_argument("--abs-tol", type=float, default=None)
    p.add_argument(
        "--seeder", choices=("series", "picard", "both"), default=None
    )
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--config", type=str, default=None, help="JSON config file; flags override")
    p.add_argument("--figures", action="store_true", help="also render figures next to --out")


_CONFIG_KEYS = {
    "n", "lambda", "mu1", "rmax", "rel_tol", "abs_tol",
    "seeder", "out", "format", "jobs",
}


def _merge_config(args: argparse.Namespace) -> None:
    """Fill unset flags from the JSON config file, if any."""
    if not args.config:
        return
    try:
        with open(args.config) as f:
            cfg = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}")
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    unknown = set(cfg) - _CONFIG_KEYS
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    mapping = {"lambda": "lam", "rel_tol": "rel_tol", "abs_tol": "abs_tol"}
    for key, val in cfg.items():
        attr = mapping.get(key, key)
        if getattr(args, attr, None) is None:
            if attr in ("lam", "mu1") and isinstance(val, str):
                val = _rational(val)
            setattr(args, attr, val)


def _build_params(args: argparse.Namespace) -> SolitonParams:
    if args.n is None or args.lam is None or args.mu1 is None:
        raise UsageError("--n, --lambda and --mu1 are required")
    try:
        return SolitonParams(n=args.n, lam=args.lam, mu1=args.mu1)
    except ValueError as exc:
        raise UsageError(str(exc))


def _build_config(args: argparse.Namespace, default_rmax: float = 1e6) -> IntegratorConfig:
    try:
        return IntegratorConfig(
            r_max=args.rmax if args.rmax is not None else default_rmax,
            rel_tol=args.rel_tol if args.rel_tol is not None else 1e-10,
            abs_tol=args.abs_tol if args.abs_tol is not None else 1e-12,
        )
    except ValueError as exc:
        raise UsageError(str(exc))


def _fmt(x: float) -> str:
    return repr(float(x))


def write_trajectory_csv(traj: Trajectory, path: str | Path, meta: dict | None = None) -> None:
    d = traj.diagnostics_arrays()
    lines = []
    base_meta = {
        "n": traj.params.n,
        "lambda": _fmt(traj.params.lam),
        "mu1": _fmt(traj.params.mu1),
        "seed_radius": _fmt(traj.seed_radius),
        "termination": traj.termination.describe(),
    }
    if meta:
        base_meta.update(meta)
    for k, v in base_meta.items():
        lines.append(f"# {k}={v}")
    lines.append("r,h,h_r,q,u,p,v,w")
    cols = (traj.r, traj.h, traj.hr, d["q"], d["u"], d["p"], d["v"], d["w"])
    for row in zip(*cols):
        lines.append(",".join(_fmt(x) for x in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_trajectory_csv(path: str | Path) -> tuple[dict, dict[str, np.ndarray]]:
    """Parse a trajectory CSV back into (metadata, column arrays)."""
    meta: dict[str, str] = {}
    header: list[str] | None = None
    rows: list[list[float]] = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            meta[key] = val
            continue
        if header is None:
            header = line.split(",")
            continue
        rows.append([float(t) for t in line.split(",")])
    if header is None:
        raise ValueError(f"{path}: no header row")
    data = np.asarray(rows, dtype=float)
    return meta, {name: data[:, i] for i, name in enumerate(header)}


def _trajectory_json(traj: Trajectory, meta: dict | None = None) -> dict:
    d = traj.diagnostics_arrays()
    out = {
        "params": {"n": traj.params.n, "lambda": traj.params.lam, "mu1": traj.params.mu1},
        "seed_radius": traj.seed_radius,
        "termination": traj.termination.describe(),
        "columns": {
            "r": traj.r.tolist(),
            "h": traj.h.tolist(),
            "h_r": traj.hr.tolist(),
            "q": d["q"].tolist(),
            "u": d["u"].tolist(),
            "p": d["p"].tolist(),
            "v": d["v"].tolist(),
            "w": d["w"].tolist(),
        },
    }
    if meta:
        out.update(meta)
    return out


def _limit_dict(est: asymptotics.LimitEstimate) -> dict:
    return {
        "value": est.value,
        "correction_coeff": est.correction_coeff,
        "fit_window": list(est.fit_window),
        "fit_residual": est.fit_residual,
    }


def report_json(report: asymptotics.VerificationReport) -> dict:
    return {
        "params": {
            "n": report.params.n,
            "lambda": report.params.lam,
            "mu1": report.params.mu1,
        },
        "regime": report.regime.value,
        "checks": [
            {
                "name": c.name,
                "claim": c.claim,
                "measured": c.measured,
                "tolerance": c.tolerance,
                "pass": c.passed,
            }
            for c in report.checks
        ],
        "limits": {k: _limit_dict(v) for k, v in report.limits.items()},
        "flags": list(report.flags),
    }


def _solve_trajectory(params: SolitonParams, config: IntegratorConfig, seeder: str) -> Trajectory:
    seed = make_seed(params, seeder)
    if params.lam < 0.0:
        return integrate_negative_lambda(params, seed, config).trajectory
    return integrate(params, seed, config)


def _render_figures(traj: Trajectory, out: Path) -> list[Path]:
    from . import figures

    paths = [
        figures.save_profile_figure(traj, out.with_suffix(".profile.png")),
        figures.save_diagnostics_figure(traj, out.with_suffix(".diagnostics.png")),
    ]
    return paths


def cmd_solve(args: argparse.Namespace) -> int:
    params = _build_params(args)
    config = _build_config(args)
    seeder = args.seeder or "series"
    try:
        traj = _solve_trajectory(params, config, seeder)
    except SeederMismatch as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    if params.lam >= 0.0 and traj.termination.kind in (
        TerminationKind.POSITIVITY_LOSS,
        TerminationKind.STEP_UNDERFLOW,
    ):
        print(
            f"solver failure: {traj.termination.describe()} (lambda >= 0)",
            file=sys.stderr,
        )
        return EXIT_SOLVER

    fmt = args.format or "csv"
    out = Path(args.out or f"solve.{fmt}")
    meta = {"seeder": seeder, "rel_tol": _fmt(config.rel_tol), "abs_tol": _fmt(config.abs_tol)}
    if fmt == "csv":
        write_trajectory_csv(traj, out, meta)
    else:
        out.write_text(json.dumps(_trajectory_json(traj, {"seeder": seeder}), indent=2) + "\n")
    print(f"wrote {out} ({traj.r.size} samples, {traj.termination.describe()})")
    if args.figures:
        for p in _render_figures(traj, out):
            print(f"wrote {p}")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    params = _build_params(args)
    config = _build_config(args)
    seeder = args.seeder or "series"
    if params.lam < 0.0:
        raise UsageError("verify needs lambda >= 0; use solve for the shrinking side")
    try:
        traj = _solve_trajectory(params, config, seeder)
        report = asymptotics.verify(traj)
    except (SeederMismatch, asymptotics.WindowTooShort) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    doc = report_json(report)
    out = Path(args.out or "verify.json")
    out.write_text(json.dumps(doc, indent=2) + "\n")
    for c in report.checks:
        status = "pass" if c.passed else "FAIL"
        print(f"[{status}] {c.name}: {c.claim} (measured {c.measured:.6g}, tol {c.tolerance:g})")
    print(f"wrote {out}")
    if args.figures:
        for p in _render_figures(traj, out):
            print(f"wrote {p}")
    return EXIT_OK if report.all_passed else EXIT_VERIFY


def _sweep_cell(task: tuple[int, float, float, float, float, float, str]) -> dict:
    n, lam, mu1, rmax, rel_tol, abs_tol, seeder = task
    cell = {"params": {"n": n, "lambda": lam, "mu1": mu1}}
    try:
        params = SolitonParams(n=n, lam=lam, mu1=mu1)
        config = IntegratorConfig(r_max=rmax, rel_tol=rel_tol, abs_tol=abs_tol)
        traj = _solve_trajectory(params, config, seeder)
        if params.lam < 0.0:
            cell["regime"] = "ShrinkingWindow"
            cell["termination"] = traj.termination.describe()
            cell["all_passed"] = traj.r_max >= 0.98 * (n - 1) / abs(lam)
            cell["limits"] = {}
        else:
            report = asymptotics.verify(traj)
            cell["regime"] = report.regime.value
            cell["termination"] = traj.termination.describe()
            cell["limits"] = {k: v.value for k, v in report.limits.items()}
            cell["all_passed"] = report.all_passed
            cell["failed_checks"] = [c.name for c in report.checks if not c.passed]
    except Exception as exc:  # a cell failure must not kill the sweep
        cell["error"] = f"{type(exc).__name__}: {exc}"
        cell["all_passed"] = None
    return cell


def cmd_sweep(args: argparse.Namespace) -> int:
    ns = args.n or []
    lams = args.lam if args.lam is not None else []
    mu1s = args.mu1 if args.mu1 is not None else []
    grid = [(n, lam, mu1) for n in ns for lam in lams for mu1 in mu1s]
    if not grid:
        raise UsageError("empty sweep grid: provide --n, --lambda and --mu1 lists")
    rmax = args.rmax if args.rmax is not None else 1e6
    rel_tol = args.rel_tol if args.rel_tol is not None else 1e-10
    abs_tol = args.abs_tol if args.abs_tol is not None else 1e-12
    seeder = args.seeder or "series"
    jobs = args.jobs if args.jobs is not None else _default_jobs()
    tasks = [(n, lam, mu1, rmax, rel_tol, abs_tol, seeder) for n, lam, mu1 in grid]

    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_cell, tasks))
    else:
        results = [_sweep_cell(t) for t in tasks]

    fmt = args.format or "json"
    out = Path(args.out or f"sweep.{fmt}")
    if fmt == "json":
        out.write_text(json.dumps({"cells": results}, indent=2) + "\n")
    else:
        lines = ["n,lambda,mu1,regime,termination,all_passed,error"]
        for cell in results:
            p = cell["params"]
            lines.append(
                ",".join(
                    [
                        str(p["n"]),
                        _fmt(p["lambda"]),
                        _fmt(p["mu1"]),
                        cell.get("regime", ""),
                        cell.get("termination", ""),
                        str(cell.get("all_passed")),
                        cell.get("error", "").replace(",", ";"),
                    ]
                )
            )
        out.write_text("\n".join(lines) + "\n")
    for cell in results:
        p = cell["params"]
        tag = cell.get("regime") or cell.get("error", "?")
        print(f"n={p['n']} lambda={p['lambda']:g} mu1={p['mu1']:g}: {tag} passed={cell['all_passed']}")
    print(f"wrote {out}")
    if args.figures:
        from . import figures

        fp = figures.save_sweep_figure(results, out.with_suffix(".png"))
        print(f"wrote {fp}")
    if any(c["all_passed"] is not True for c in results):
        return EXIT_VERIFY
    return EXIT_OK


def cmd_geodesic(args: argparse.Namespace) -> int:
    params = _build_params(args)
    config = _build_config(args, default_rmax=1e4)
    seeder = args.seeder or "series"
    try:
        traj = _solve_trajectory(params, config, seeder)
    except SeederMismatch as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    a_max = math.sqrt(traj.r_max) * (1.0 - 1e-9)
    if args.a:
        a_grid = np.asarray(sorted(args.a), dtype=float)
    else:
        a_grid = np.geomspace(a_max / 1e3, a_max, 33)
    try:
        prof = geometry.curvature_profile(traj, a_grid)
    except geometry.OutOfRange as exc:
        raise UsageError(str(exc))
    comp = geometry.completeness_diagnostic(traj)

    fmt = args.format or "csv"
    out = Path(args.out or f"geodesic.{fmt}")
    if fmt == "csv":
        lines = [
            f"# n={params.n}",
            f"# lambda={_fmt(params.lam)}",
            f"# mu1={_fmt(params.mu1)}",
            f"# completeness_slope={_fmt(comp.loglog_slope)}",
            f"# diverging={comp.diverging}",
            "a,t,kappa_radial,kappa_orbital",
        ]
        for row in zip(prof.a_grid, prof.t_of_a, prof.kappa_radial, prof.kappa_orbital):
            lines.append(",".join(_fmt(x) for x in row))
        out.write_text("\n".join(lines) + "\n")
    else:
        doc = {
            "params": {"n": params.n, "lambda": params.lam, "mu1": params.mu1},
            "a": prof.a_grid.tolist(),
            "t": prof.t_of_a.tolist(),
            "kappa_radial": prof.kappa_radial.tolist(),
            "kappa_orbital": prof.kappa_orbital.tolist(),
            "completeness": asdict(comp),
        }
        out.write_text(json.dumps(doc, indent=2) + "\n")
    print(f"wrote {out} (t({prof.a_grid[-1]:g}) = {prof.t_of_a[-1]:.6g}, diverging={comp.diverging})")
    return EXIT_OK


def cmd_picard_lab(args: argparse.Namespace) -> int:
    params = _build_params(args)
    eps1, eps2 = picard.contraction_epsilon(params)
    try:
        pair, report = picard.picard_solve(params, eps=args.eps, grid_m=args.grid)
    except (picard.NoConvergence, picard.PositivityError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    try:
        ratio = picard.empirical_contraction_ratio(report)
    except picard.InsufficientIterations:
        ratio = None
    doc = {
        "params": {"n": params.n, "lambda": params.lam, "mu1": params.mu1},
        "eps1": eps1,
        "eps2": eps2,
        "eps_used": report.eps_used,
        "exploratory": report.exploratory,
        "grid_m": report.grid_m,
        "iterations": report.iterations,
        "final_residual": report.final_residual,
        "empirical_ratios": list(report.empirical_ratios),
        "max_ratio_after_burn_in": ratio,
        "guaranteed_factor": picard.CONTRACTION_FACTOR,
        "in_closed_set": pair.in_closed_set(params),
        "h_at_eps": float(pair.h_vals[-1]),
        "hr_at_eps": float(pair.w_vals[-1]),
    }
    out = Path(args.out or "picard-lab.json")
    out.write_text(json.dumps(doc, indent=2) + "\n")
    print(
        f"eps2={eps2:.6g} eps={report.eps_used:.6g} iterations={report.iterations} "
        f"ratio={ratio if ratio is None else f'{ratio:.4f}'} bound={picard.CONTRACTION_FACTOR:.4f}"
    )
    print(f"wrote {out}")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="soliton-kit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="integrate one profile and export it")
    _add_common(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_verify = sub.add_parser("verify", help="run the asymptotic check list")
    _add_common(p_verify)
    p_verify.set_defaults(func=cmd_verify)

    p_sweep = sub.add_parser("sweep", help="run a parameter grid concurrently")
    _add_common(p_sweep, lists=True)
    p_sweep.set_defaults(func=cmd_sweep)

    p_geo = sub.add_parser("geodesic", help="geodesic distance and curvatures")
    _add_common(p_geo)
    p_geo.add_argument("--a", type=_rational_list, default=None, help="comma list of radii a")
    p_geo.set_defaults(func=cmd_geodesic)

    p_lab = sub.add_parser("picard-lab", help="fixed-point seeding diagnostics")
    _add_common(p_lab)
    p_lab.add_argument("--eps", type=float, default=None, help="interval length (default eps2)")
    p_lab.add_argument("--grid", type=int, default=picard.DEFAULT_GRID)
    p_lab.set_defaults(func=cmd_picard_lab)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _merge_config(args)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
