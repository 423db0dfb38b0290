"""
front-lab command line.

    front-lab profile --f "cubic(0.3)" [--tol 1e-10] [--out profile.csv]
    front-lab evolve --f "cubic(0.3)" --data planar --dim 1 --t-end 20
    front-lab evolve --data planar --profile profile.csv
    front-lab speed --alpha 1.0472
    front-lab speed --in runs/evolve/snapshots --kind inf|tilde|hausdorff --out speed.csv
    front-lab spreading [--upper]
    front-lab nonstandard --alpha 1.0472 --n 60 --t-end 120 [--out run/]
    front-lab terrace --f "quintic(0.1, 0.9, 8)"
    front-lab verify-supersolution --alpha 1.0472
    front-lab run --config configs/smoke.toml

Exit code 0 iff every criterion of every experiment passed.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from errors import ConfigError, FrontLabError
from experiments import ExperimentReport, get_registry, run_experiment
from front_factory import ball_field, planar_field, step_field
from interface_geometry import DISTANCE_KINDS, extract_level_set, mean_speed
from lab_config import ExperimentConfig, get_settings, parse_configs, with_params
from nonlinearity import analyze, parse_nonlinearity
from rd_engine import (BoundaryPolicy, EdgePolicy, EvolveOptions, evolve, field_to_csv, load_snapshot_dir, make_grid,
                       write_snapshots)
from utils import code_version, ensure_dir, setup_logging
from wave_profile import read_profile_csv, solve_profile, write_profile_csv

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

# subcommand -> experiment
COMMANDS = {
    "profile": "exp_profile",
    "speed": "exp_mean_speed",
    "spreading": "exp_spreading",
    "nonstandard": "exp_nonstandard",
    "terrace": "exp_terrace",
    "verify-supersolution": "exp_supersolution",
}


# ============================================================================
# OUTPUT
# ============================================================================

def print_banner(title: str):
    print("=" * 70)
    print(f">>> {title}")
    print(f">>> {code_version()}")
    print("=" * 70)


def print_report(report: ExperimentReport):
    print()
    print(f"[{report.name}] {'PASS' if report.passed else 'FAIL'} in {report.wall_time:.1f} s")
    for c in report.criteria:
        print(f"  [{c.status}] {c.name:<40} {c.detail}")


# ============================================================================
# COMMANDS
# ============================================================================

def _config_from_args(args, name: str, params: Dict[str, Any]) -> ExperimentConfig:
    settings = get_settings()
    cfg = ExperimentConfig(name=name, f=args.f, seed=args.seed,
                           out_dir=args.out_dir or settings.out_dir,
                           resolution=args.resolution or settings.resolution,
                           h=args.h, dt=args.dt, t_end=args.t_end)
    cfg = with_params(cfg, **params)
    parse_nonlinearity(cfg.f)
    get_registry().get(name).validate(cfg)
    return cfg


def _run_all(configs: List[ExperimentConfig], threads: Optional[int], folder: Optional[str] = None) -> int:
    reports = []
    for cfg in configs:
        report = run_experiment(cfg, workers=threads, folder=folder)
        print_report(report)
        reports.append(report)
    passed = sum(r.passed for r in reports)
    print()
    print("=" * 70)
    print(f"{passed}/{len(reports)} experiment(s) passed")
    print("=" * 70)
    return EXIT_OK if passed == len(reports) else EXIT_FAILED


def cmd_experiment(args) -> int:
    name = COMMANDS[args.command]
    if args.command == "spreading" and args.upper:
        name = "exp_spreading_upper"
    params = {
        "alpha": getattr(args, "alpha", None),
        "n": getattr(args, "n", None),
        "half_width": getattr(args, "half_width", None),
        "theta_step": getattr(args, "theta_step", None),
    }
    if args.command == "spreading":
        params["radius"] = args.radius
        params["eps"] = args.eps
    if args.command == "profile":
        params["shoot_tol"] = args.tol
    cfg = _config_from_args(args, name, params)
    print_banner(f"{name} with f = {cfg.f} ({cfg.resolution})")
    folder = args.out if args.command == "nonstandard" else None
    code = _run_all([cfg], args.threads, folder)
    if args.command == "profile" and args.out:
        _export_profile(cfg, args.out)
    return code


def _export_profile(cfg: ExperimentConfig, target: str):
    source = Path(cfg.out_dir) / cfg.name / "profile.csv"
    if not source.exists():
        logger.warning(f"[CLI] no profile written to {source}; --out skipped")
        return
    p = read_profile_csv(source)
    write_profile_csv(p, target)
    print(f"[OK] c_f = {p.speed:.10f}, lambda = {p.lam:.6f} -> {target}")


def cmd_speed(args) -> int:
    """Mean speed of stored snapshots (--in), or the conical-front experiment."""
    if args.in_dir is None:
        return cmd_experiment(args)
    snapshots = load_snapshot_dir(args.in_dir)
    if not snapshots:
        raise ConfigError(f"no *.flab snapshots in {args.in_dir}")
    print_banner(f"mean speed ({args.kind}) of {len(snapshots)} snapshot(s) in {args.in_dir}")
    estimate = mean_speed([extract_level_set(u) for u in snapshots], args.kind)
    out = Path(args.out) if args.out else Path(args.out_dir or get_settings().out_dir) / "speed.csv"
    estimate.to_csv(out)
    print(f"[OK] gamma_hat = {estimate.gamma_hat:.10f} (residual {estimate.fit_residual:.2e}) -> {out}")
    return EXIT_OK


def cmd_run(args) -> int:
    path = Path(args.config)
    configs = parse_configs(path.read_text(encoding="utf-8"))
    if args.only:
        configs = [c for c in configs if c.name in args.only]
        if not configs:
            raise ConfigError(f"none of {args.only} is in {path}")
    print_banner(f"{len(configs)} experiment(s) from {path}")
    return _run_all(configs, args.threads)


def cmd_evolve(args) -> int:
    """Plain evolution of planar, step or ball data; snapshots go to --out."""
    f = parse_nonlinearity(args.f)
    print_banner(f"evolve {args.data} data with f = {f}")
    print(analyze(f).summary())
    h = args.h or 0.1
    t_end = args.t_end or 20.0
    n = int(round(args.length / h))
    if args.dim == 1:
        grid = make_grid((2 * n + 1,), h, (-n * h,))
    else:
        grid = make_grid((2 * n + 1, 2 * n + 1), h, (-n * h, -n * h))

    if args.data == "planar":
        p = read_profile_csv(args.profile) if args.profile else solve_profile(f)
        direction = [1.0] if args.dim == 1 else [0.0, 1.0]
        u0 = planar_field(p, direction, 0.0, grid)
        bc = (BoundaryPolicy(left=EdgePolicy.dirichlet_farfield(1.0), right=EdgePolicy.dirichlet_farfield(0.0))
              if args.dim == 1 else
              BoundaryPolicy(bottom=EdgePolicy.dirichlet_farfield(1.0), top=EdgePolicy.dirichlet_farfield(0.0)))
    elif args.data == "step":
        u0 = step_field(args.level, "lower", grid)
        bc = BoundaryPolicy()
    else:
        u0 = ball_field(args.level, 0.0, args.radius, grid)
        bc = BoundaryPolicy.uniform(EdgePolicy.dirichlet_farfield(0.0))

    out = ensure_dir(Path(args.out_dir or get_settings().out_dir) / "evolve")
    snapshots = evolve(u0, f, bc, EvolveOptions(dt=args.dt, t_end=t_end, snapshot_every=args.snapshot_every,
                                                workers=args.threads))
    files = write_snapshots(snapshots, out / "snapshots")
    if args.dim == 1:
        for k, u in enumerate(snapshots):
            field_to_csv(u, out / f"u_{k:04d}.csv")
    final = snapshots[-1]
    print(f"[OK] {len(files)} snapshot(s) to t={final.t:g} in {out} "
          f"(min {final.values.min():.4f}, max {final.values.max():.4f})")
    return EXIT_OK


# ============================================================================
# PARSER
# ============================================================================

def _common(parser: argparse.ArgumentParser, default_f: str = "cubic(0.3)"):
    parser.add_argument("--f", default=default_f, help="nonlinearity, e.g. cubic(0.3) or quintic(0.1, 0.9, 8)")
    parser.add_argument("--resolution", choices=("smoke", "full"), default=None,
                        help="parameter profile (default: FRONTLAB_RESOLUTION or smoke)")
    parser.add_argument("--out-dir", default=None, help="output root (default: FRONTLAB_OUT_DIR or runs)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--h", type=float, default=None, help="grid step")
    parser.add_argument("--dt", type=float, default=None, help="time step (default: CFL limit)")
    parser.add_argument("--t-end", type=float, default=None)
    parser.add_argument("--threads", type=int, default=None, help="stencil workers (default: FRONTLAB_THREADS)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="front-lab", description="Bistable reaction-diffusion front lab")
    parser.add_argument("--log-level", default=None, help="override FRONTLAB_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="1D wave speed and profile")
    _common(p)
    p.add_argument("--tol", type=float, default=None, help="bisection tolerance on c_f")
    p.add_argument("--out", default=None, help="copy of profile.csv (header # c_f=...)")

    p = sub.add_parser("evolve", help="plain evolution, snapshots only")
    _common(p)
    p.add_argument("--data", choices=("planar", "step", "ball"), default="planar")
    p.add_argument("--dim", type=int, choices=(1, 2), default=1)
    p.add_argument("--length", type=float, default=40.0, help="half-length of the square domain")
    p.add_argument("--level", type=float, default=0.9, help="step or ball value")
    p.add_argument("--radius", type=float, default=12.0)
    p.add_argument("--snapshot-every", type=float, default=5.0)
    p.add_argument("--profile", default=None, help="stored profile.csv for planar data")

    p = sub.add_parser("speed", help="mean speed of a conical front or of stored snapshots")
    _common(p)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--half-width", type=float, default=None)
    p.add_argument("--in", dest="in_dir", default=None, help="directory of *.flab snapshots")
    p.add_argument("--kind", choices=DISTANCE_KINDS, default="inf", help="interface distance")
    p.add_argument("--out", default=None, help="tau, distance CSV (default <out-dir>/speed.csv)")

    p = sub.add_parser("spreading", help="spreading (or with --upper, retraction) of balls")
    _common(p)
    p.add_argument("--upper", action="store_true", help="ball below theta- inside u = 1")
    p.add_argument("--radius", type=float, default=None)
    p.add_argument("--eps", type=float, default=None)

    p = sub.add_parser("nonstandard", help="symmetrised rotated V-front")
    _common(p)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--n", type=float, default=None, help="launch time -n")
    p.add_argument("--half-width", type=float, default=None)
    p.add_argument("--out", default=None, help="report folder (default <out-dir>/exp_nonstandard)")

    p = sub.add_parser("terrace", help="two-front splitting for a multistable f")
    _common(p, default_f="quintic(0.1, 0.9, 8)")
    p.add_argument("--theta-step", type=float, default=None)

    p = sub.add_parser("verify-supersolution", help="residual sign check of the perturbed V-front")
    _common(p)
    p.add_argument("--alpha", type=float, default=None)

    p = sub.add_parser("run", help="experiments from a config file")
    p.add_argument("--config", required=True, help="key = value experiment file")
    p.add_argument("--only", nargs="*", default=None, help="run only these experiment names")
    p.add_argument("--threads", type=int, default=None)

    sub.add_parser("list", help="registered experiments")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level or get_settings().log_level)
    try:
        if args.command == "list":
            get_registry().print_status()
            return EXIT_OK
        if args.command == "run":
            return cmd_run(args)
        if args.command == "evolve":
            return cmd_evolve(args)
        if args.command == "speed":
            return cmd_speed(args)
        return cmd_experiment(args)
    except ConfigError as exc:
        print(f"[ERROR] config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FrontLabError as exc:
        print(f"[ERROR] {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"[ERROR] {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
