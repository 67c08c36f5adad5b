"""Command-line front end.

Subcommands: shoot, find-critical, sweep, validate, center-poly.  Each run
writes its data files (CSV trajectories / profiles, JSON reports) plus a
manifest JSON recording the command, the effective configuration, the
output paths and summary results.

Configuration precedence: command-line flags override the optional JSON
config file (--config), which overrides built-in defaults.

Exit codes: 0 success, 2 bad input, 3 search failure, 4 validation failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .classifier import classify
from .errors import SearchError, SolitonShootError
from .geometry import (
    eguchi_hanson_profile,
    reconstruct_profile,
    soliton_residual,
    taub_bolt_profile,
)
from .integrator import trajectory_to_csv
from .center_manifold import biaxial_expansion_check, solve_center_poly
from .pipeline import shoot_compact, shoot_primal
from .search import find_critical, sweep_gamma
from .state_core import ShootParams, conserved_quantities

__all__ = ["main", "RunManifest", "DEFAULTS"]

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_SEARCH = 3
EXIT_VALIDATION = 4

DEFAULTS = {
    "lam": 0.0,
    "gamma": 0.0,
    "horizon": 60.0,
    "epsilon": 1e-4,
    "rtol": 1e-10,
    "atol": 1e-12,
    "tol": 1e-9,
    "chart": "compact",
}


@dataclass
class RunManifest:
    """Record of one CLI invocation; round-trips losslessly through JSON."""

    command: str
    config: dict
    outputs: list = field(default_factory=list)
    results: dict = field(default_factory=dict)
    wall_clock: float = 0.0
    version: str = __version__

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_json(cls, path) -> "RunManifest":
        with open(path) as fh:
            data = json.load(fh)
        return cls(**data)


def _effective_config(args: argparse.Namespace, keys) -> dict:
    """Merge defaults, config file and explicit flags for the given keys."""
    config = dict(DEFAULTS)
    if getattr(args, "config", None):
        with open(args.config) as fh:
            config.update(json.load(fh))
    for key in keys:
        val = getattr(args, key.replace("-", "_"), None)
        if val is not None:
            config[key] = val
    return {k: config[k] for k in sorted(config)}


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_shoot(args) -> int:
    config = _effective_config(
        args, ["lam", "gamma", "horizon", "epsilon", "rtol", "atol", "chart"]
    )
    started = time.time()
    try:
        params = ShootParams(
            n=args.n, alpha=args.alpha, beta=args.beta,
            gamma=config["gamma"], lam=config["lam"],
        )
    except SolitonShootError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    out = _out_dir(args)
    shooter = shoot_primal if config["chart"] == "primal" else shoot_compact
    traj = shooter(
        params, config["horizon"],
        epsilon=config["epsilon"], rtol=config["rtol"], atol=config["atol"],
    )
    manifest = RunManifest(command="shoot", config={**config, **params.to_dict()})
    traj_path = out / "trajectory.csv"
    trajectory_to_csv(traj, traj_path)
    manifest.outputs.append(str(traj_path))
    cls = None
    if traj.chart in ("compact", "biaxial_compact"):
        cls = classify(traj)
        manifest.results["classification"] = cls.to_dict()
    try:
        profile = reconstruct_profile(traj)
    except SolitonShootError:
        profile = None
    if profile is not None:
        prof_path = out / "profile.csv"
        profile.to_csv(prof_path)
        manifest.outputs.append(str(prof_path))
    manifest.wall_clock = time.time() - started
    man_path = out / "manifest.json"
    manifest.to_json(man_path)
    print(f"wrote {man_path}")
    if cls is not None:
        print(f"verdict: {cls.verdict}  pattern: {cls.pattern}")
    return EXIT_OK


def cmd_find_critical(args) -> int:
    config = _effective_config(args, ["lam", "gamma", "tol", "rtol", "atol"])
    started = time.time()
    out = _out_dir(args)
    try:
        bracket = find_critical(
            args.n, config["gamma"], config["tol"],
            lam=config["lam"], rtol=config["rtol"], atol=config["atol"],
        )
    except SearchError as exc:
        print(f"search failed: {exc}", file=sys.stderr)
        return EXIT_SEARCH
    except SolitonShootError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    mid_traj = shoot_compact(
        bracket.params_at(bracket.midpoint), 240.0,
        rtol=config["rtol"], atol=config["atol"],
    )
    traj_path = out / "midpoint_trajectory.csv"
    trajectory_to_csv(mid_traj, traj_path)
    manifest = RunManifest(
        command="find-critical",
        config={**config, "n": args.n},
        outputs=[str(traj_path)],
        results={"bracket": bracket.to_dict()},
        wall_clock=time.time() - started,
    )
    man_path = out / "manifest.json"
    manifest.to_json(man_path)
    print(f"bracket [{bracket.t_lo!r}, {bracket.t_hi!r}] width {bracket.width:.3e}")
    print(f"wrote {man_path}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = _effective_config(args, ["lam", "tol", "rtol", "atol"])
    started = time.time()
    try:
        gammas = [float(g) for g in args.gammas.split(",") if g.strip() != ""]
    except ValueError:
        print(f"error: cannot parse gamma list {args.gammas!r}", file=sys.stderr)
        return EXIT_BAD_INPUT
    if not gammas:
        print("error: empty gamma list", file=sys.stderr)
        return EXIT_BAD_INPUT
    out = _out_dir(args)
    results = sweep_gamma(
        gammas, config["tol"], n=args.n,
        lam=config["lam"], rtol=config["rtol"], atol=config["atol"],
    )
    outputs = []
    for rec in results:
        if "bracket" not in rec:
            continue
        gam = rec["gamma"]
        t_mid = rec["bracket"]["midpoint"]
        params = ShootParams(
            n=args.n,
            alpha=float(np.sqrt(1 - gam**2) * np.cos(0.5 * np.pi * t_mid)),
            beta=float(np.sqrt(1 - gam**2) * np.sin(0.5 * np.pi * t_mid)),
            gamma=gam, lam=config["lam"],
        )
        traj = shoot_compact(params, 240.0, rtol=config["rtol"], atol=config["atol"])
        path = out / f"midpoint_gamma_{gam:+.6f}.csv"
        trajectory_to_csv(traj, path)
        outputs.append(str(path))
    manifest = RunManifest(
        command="sweep",
        config={**config, "n": args.n, "gammas": gammas},
        outputs=outputs,
        results={"sweep": results},
        wall_clock=time.time() - started,
    )
    man_path = out / "manifest.json"
    manifest.to_json(man_path)
    n_found = sum("bracket" in rec for rec in results)
    print(f"{n_found}/{len(results)} slices bracketed; wrote {man_path}")
    return EXIT_OK


def cmd_validate(args) -> int:
    config = _effective_config(args, ["rtol", "atol"])
    started = time.time()
    out = _out_dir(args)
    checks = {}

    tb = soliton_residual(taub_bolt_profile(), 0.0)
    checks["taub_bolt_residual"] = {"value": tb, "bound": 1e-6, "pass": tb < 1e-6}
    eh = soliton_residual(eguchi_hanson_profile(), 0.0)
    checks["eguchi_hanson_residual"] = {"value": eh, "bound": 1e-6, "pass": eh < 1e-6}

    from .search import conserved_drift_report

    params = ShootParams(n=3, alpha=0.6, beta=0.8)
    traj = shoot_compact(params, 50.0, rtol=config["rtol"], atol=config["atol"])
    drift = conserved_drift_report(traj)["c_drift"]
    checks["conservation_drift"] = {"value": drift, "bound": 1e-8, "pass": drift < 1e-8}

    poly = solve_center_poly(2)
    expected = {(2, 0, 0): 0.5, (0, 2, 0): -0.5, (0, 0, 2): -0.5, (0, 1, 1): 1.0}
    dev = max(
        abs(poly.coeffs.get(e, 0.0) - v) for e, v in expected.items()
    )
    checks["center_poly_quadratic"] = {"value": dev, "bound": 1e-8, "pass": dev < 1e-8}
    slice_rep = biaxial_expansion_check(poly)
    checks["center_poly_biaxial_slice"] = {
        "value": slice_rep, "pass": slice_rep["ci_exact"] and slice_rep["cj_exact"],
    }

    all_pass = all(c["pass"] for c in checks.values())
    manifest = RunManifest(
        command="validate",
        config=config,
        results={"checks": checks, "all_pass": all_pass},
        wall_clock=time.time() - started,
    )
    man_path = out / "validate_report.json"
    manifest.to_json(man_path)
    manifest.outputs.append(str(man_path))
    for name, chk in checks.items():
        print(f"{'PASS' if chk['pass'] else 'FAIL'} {name}")
    return EXIT_OK if all_pass else EXIT_VALIDATION


def cmd_center_poly(args) -> int:
    try:
        poly = solve_center_poly(args.degree)
    except SolitonShootError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    out = Path(args.out)
    if out.suffix != ".json":
        out.mkdir(parents=True, exist_ok=True)
        out = out / "center_poly.json"
    poly.to_json(out)
    print(f"wrote {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="solitonshoot",
        description="Shooting and continuation toolkit for cohomogeneity-one "
        "steady soliton trajectories",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, tol=False):
        p.add_argument("--config", help="JSON config file (flags override it)")
        p.add_argument("--lam", type=float, default=None)
        p.add_argument("--rtol", type=float, default=None)
        p.add_argument("--atol", type=float, default=None)
        p.add_argument("--out", required=True, help="output directory")
        if tol:
            p.add_argument("--tol", type=float, default=None,
                           help="target bracket width")

    p = sub.add_parser("shoot", help="integrate a single shooting direction")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--horizon", type=float, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--chart", choices=("compact", "primal"), default=None)
    common(p)
    p.set_defaults(func=cmd_shoot)

    p = sub.add_parser("find-critical", help="bisect the critical direction")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--gamma", type=float, default=None)
    common(p, tol=True)
    p.set_defaults(func=cmd_find_critical)

    p = sub.add_parser("sweep", help="critical search on a list of gamma slices")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--gammas", required=True, help="comma-separated gamma values")
    common(p, tol=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="run reference and conservation checks")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("center-poly", help="export the center-manifold polynomial")
    p.add_argument("--degree", type=int, default=4)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_center_poly)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SearchError as exc:
        print(f"search failed: {exc}", file=sys.stderr)
        return EXIT_SEARCH
    except SolitonShootError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
