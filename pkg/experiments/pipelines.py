"""
Experiment pipelines.

Every function below checks one claim about bistable fronts on a finite grid
and records its verdicts in ctx.report. The `smoke` profile is sized for a
quick laptop run, `full` is the reference resolution (h halved, domains
widened).
"""

import logging
import math
from typing import Any, Callable, Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd

from errors import DomainError, GeometryError
from experiments.registry import register
from experiments.report import at_least, at_most, close_to, holds, within
from front_factory import (ball_field, build_nonstandard, check_supersolution, compare_at_time,
                           conical_boundary, conical_front, conical_grid, planar_field,
                           reference_interfaces, rotated_v, search_supersolution_params, step_field,
                           suggest_supersolution_params, supersolution_field, supersolution_grid)
from interface_geometry import (DISTANCE_KINDS, InterfaceSet, count_linear_pieces, dist_hausdorff,
                                dist_inf, dist_tilde, extract_level_set, interface_positions,
                                mean_speed, min_shift_distance, planarity, tip_speed,
                                verify_transition)
from lab_config import GRID_KEYS
from nonlinearity import Nonlinearity, analyze, make_cubic, reflect
from rd_engine import (BoundaryPolicy, EdgePolicy, EvolveOptions, ScalarField, evolve, evolve_half_plane, make_grid,
                       save_field, write_snapshots)
from wave_profile import (ProfileSolution, cubic_closed_form, invert_profile, ode_flow, profile_residual,
                          solve_profile, subfront_speeds, write_profile_csv)

logger = logging.getLogger(__name__)

ALPHA_DEFAULT = math.pi / 3
BALANCE_TOL = 1e-12


# ============================================================================
# HELPERS
# ============================================================================

def _line_grid(left: float, right: float, h: float) -> ScalarField:
    """1D grid on [-left, right] with a node on 0."""
    n_left, n_right = int(round(left / h)), int(round(right / h))
    return make_grid((n_left + n_right + 1,), h, (-n_left * h,))


def _quarter_grid(length: float, h: float) -> ScalarField:
    n = int(round(length / h)) + 1
    return make_grid((n, n), h, (0.0, 0.0))


def _line_interpolant(u: ScalarField) -> Callable[[np.ndarray], np.ndarray]:
    x, values = u.axis(0), u.values.copy()
    return lambda y: np.interp(y, x, values)


def _slope(times: Sequence[float], values: Sequence[float]) -> float:
    if len(times) < 2:
        raise GeometryError("need at least two samples to fit a speed")
    return float(np.polyfit(np.asarray(times), np.asarray(values), 1)[0])


def _positive_front(ctx, what: str) -> ProfileSolution:
    p = solve_profile(ctx.f)
    if p.speed <= 0:
        raise DomainError(f"{what} needs c_f > 0; {ctx.f} has c_f = {p.speed:.6g}")
    ctx.report.measure("c_f", p.speed)
    return p


def _settle_time(rows: List[Dict[str, Any]]) -> float:
    """Earliest snapshot time after which no snapshot has a violating node."""
    settle = math.inf
    for row in reversed(rows):
        if row["violators"] > 0:
            break
        settle = row["t"]
    return settle


def _lowest_crossing(u: ScalarField, i: int, level: float = 0.5) -> float:
    """Lowest x2 where column i of a 2D field drops through `level`."""
    column = u.values[i] - level
    idx = np.nonzero((column[:-1] > 0.0) & (column[1:] <= 0.0))[0]
    if idx.size == 0:
        raise GeometryError(f"no {level:g}-crossing in column x1 = {u.axis(0)[i]:.3g}")
    j = idx[0]
    return float(u.axis(1)[j] + u.h * column[j] / (column[j] - column[j + 1]))


def _validators(*checks: Callable[[Dict[str, Any]], None]) -> Callable[[Dict[str, Any]], None]:
    def validate(params: Dict[str, Any]):
        for check in checks:
            check(params)
    return validate


def _positive(*keys: str) -> Callable[[Dict[str, Any]], None]:
    def check(params: Dict[str, Any]):
        for key in keys:
            value = params.get(key)
            if value is not None and not float(value) > 0.0:
                raise DomainError(f"{key} must be positive, got {value}")
    return check


def _unit_interval(*keys: str) -> Callable[[Dict[str, Any]], None]:
    def check(params: Dict[str, Any]):
        for key in keys:
            value = params.get(key)
            values = value if isinstance(value, (list, tuple)) else [value]
            for v in values:
                if v is not None and not 0.0 < float(v) < 1.0:
                    raise DomainError(f"{key} must lie in (0, 1), got {v}")
    return check


def _balanced(f: Nonlinearity):
    if abs(f.integral01) > BALANCE_TOL:
        raise DomainError(f"f = {f} is not balanced: int_0^1 f = {f.integral01:.3g}; use e.g. cubic(0.5)")


def _planar_grid(params: Dict[str, Any]):
    for key in GRID_KEYS:
        value = params.get(key)
        if value is not None and len(value) != 2:
            raise DomainError(f"{key} must have two entries for a 2D grid, got {list(value)}")
    shape = params.get("shape")
    if shape is not None and min(shape) < 3:
        raise DomainError(f"shape needs at least 3 nodes per axis, got {list(shape)}")


def _alpha_between(lo: float, hi: float, label: str) -> Callable[[Dict[str, Any]], None]:
    def check(params: Dict[str, Any]):
        alpha = float(params["alpha"])
        if not lo < alpha < hi:
            raise DomainError(f"alpha={alpha:g} outside {label} = ({lo:.4f}, {hi:.4f})")
    return check


# ============================================================================
# 1D FRONTS
# ============================================================================

@register("exp_profile",
          claim="shooting recovers the closed-form cubic wave; profile of f solves phi'' + c phi' + f = 0",
          smoke={"thetas": [0.2, 0.3, 0.4], "speed_tol": 1e-4, "profile_tol": 1e-5, "shoot_tol": 1e-10,
                 "residual_tol": 1e-6},
          full={"thetas": [0.1, 0.2, 0.3, 0.4, 0.45], "speed_tol": 1e-4, "profile_tol": 1e-5,
                "shoot_tol": 1e-11, "residual_tol": 1e-6},
          validator=_validators(_unit_interval("thetas"), _positive("speed_tol", "profile_tol", "residual_tol")))
def exp_profile(ctx):
    report = ctx.report
    rows = []
    for theta in ctx["thetas"]:
        p = solve_profile(make_cubic(theta), ctx["shoot_tol"])
        exact_speed, exact_phi = cubic_closed_form(theta)
        error = float(np.max(np.abs(p.phi - exact_phi(p.xi))))
        rows.append({"theta": theta, "speed": p.speed, "exact_speed": exact_speed,
                     "speed_error": abs(p.speed - exact_speed), "profile_error": error,
                     "lambda": p.lam, "mu": p.mu,
                     "width_10_90": invert_profile(p, 0.1) - invert_profile(p, 0.9)})
        report.add(close_to(f"speed theta={theta:g}", p.speed, exact_speed, ctx["speed_tol"]))
        report.add(at_most(f"profile error theta={theta:g}", error, ctx["profile_tol"]))
    report.table("cubic_oracle", pd.DataFrame(rows))

    info = analyze(ctx.f)
    report.note(f"{ctx.f}: {info.summary()}")
    p = solve_profile(ctx.f, ctx["shoot_tol"])
    report.measure("c_f", p.speed)
    report.measure("lambda", p.lam)
    report.measure("mu", p.mu)
    report.measure("width_10_90", invert_profile(p, 0.1) - invert_profile(p, 0.9))
    report.add(at_most("ode residual of the profile", profile_residual(p, ctx.f), ctx["residual_tol"]))
    mirrored = solve_profile(reflect(ctx.f), ctx["shoot_tol"])
    report.add(close_to("reflected f reverses the speed", mirrored.speed, -p.speed, ctx["speed_tol"]))
    write_profile_csv(p, ctx.out_dir / "profile.csv")


def _planar_line_run(ctx, p: ProfileSolution, h: float, dt=None) -> Tuple[float, float, pd.DataFrame]:
    """Level-1/2 speed and mass speed of a planar 1D front."""
    t_end, pad = ctx["t_end"], ctx["pad"]
    travel = abs(p.speed) * t_end
    grid = _line_grid(pad + (travel if p.speed < 0 else 0.0), pad + (travel if p.speed > 0 else 0.0), h)
    u0 = planar_field(p, [1.0], 0.0, grid)
    bc = BoundaryPolicy(left=EdgePolicy.dirichlet_farfield(1.0), right=EdgePolicy.dirichlet_farfield(0.0))
    history = evolve(u0, ctx.f, bc, EvolveOptions(dt=dt, t_end=t_end, snapshot_every=ctx["snapshot_every"],
                                                  workers=1))
    rows = []
    for u in history:
        if u.t < ctx["fit_from"] - 1e-9:
            continue
        x = interface_positions(u)
        if x.size:
            rows.append({"t": u.t, "position": float(x[0]), "mass": float(np.sum(u.values) * h)})
    frame = pd.DataFrame(rows)
    if len(frame) < 2:
        raise GeometryError("planar front left the domain before the fit window")
    return _slope(frame["t"], frame["position"]), _slope(frame["t"], frame["mass"]), frame


@register("exp_planar_speed",
          claim="the explicit scheme moves a planar front at c_f with second-order accuracy",
          smoke={"h": 0.1, "t_end": 50.0, "fit_from": 10.0, "snapshot_every": 0.5, "pad": 30.0,
                 "rel_tol": 0.01, "refine_ratio": 3.0},
          full={"h": 0.05, "t_end": 50.0, "fit_from": 10.0, "snapshot_every": 0.5, "pad": 30.0,
                "rel_tol": 0.01, "refine_ratio": 3.0},
          validator=_positive("h", "t_end", "snapshot_every", "pad"))
def exp_planar_speed(ctx):
    report = ctx.report
    p = solve_profile(ctx.f)
    report.measure("c_f", p.speed)
    if p.speed == 0.0:
        raise DomainError("planar speed convergence needs c_f != 0")
    h = ctx["h"]
    coarse, coarse_mass, frame = _planar_line_run(ctx, p, h, ctx.get("dt"))
    fine, fine_mass, _ = _planar_line_run(ctx, p, h / 2)
    err_coarse = abs(coarse - p.speed) / abs(p.speed)
    err_fine = abs(fine - p.speed) / abs(p.speed)
    report.measure("speed_h", coarse)
    report.measure("speed_h_half", fine)
    report.measure("mass_speed_h", coarse_mass)
    report.measure("mass_speed_h_half", fine_mass)
    report.add(within(f"level-1/2 speed at h={h:g}", coarse, p.speed, ctx["rel_tol"]))
    ratio = err_coarse / err_fine if err_fine > 0 else math.inf
    report.add(at_least("error reduction when h is halved", ratio, ctx["refine_ratio"]))
    report.table("positions", frame)


@register("exp_fife_mcleod",
          claim="step data converge uniformly to a shifted front (sup-distance over shifts decreases to 0)",
          smoke={"h": 0.2, "t_end": 60.0, "snapshot_every": 2.0, "lower_level": 0.9, "upper_level": 0.1,
                 "pad": 60.0, "dist_tol": 0.02, "monotone_from": 10.0, "monotone_slack": 1e-4,
                 "bracket": 5.0, "ode_time": 5.0, "ode_tol": 5e-3},
          full={"h": 0.1, "t_end": 60.0, "snapshot_every": 1.0, "lower_level": 0.9, "upper_level": 0.1,
                "pad": 80.0, "dist_tol": 0.02, "monotone_from": 10.0, "monotone_slack": 1e-4,
                "bracket": 5.0, "ode_time": 5.0, "ode_tol": 5e-3},
          validator=_validators(_unit_interval("lower_level", "upper_level"),
                                _positive("h", "t_end", "snapshot_every")))
def exp_fife_mcleod(ctx):
    report = ctx.report
    p = solve_profile(ctx.f)
    report.measure("c_f", p.speed)
    theta = ctx.f.theta_minus
    if theta is not None and not ctx["lower_level"] > ctx.f.theta_plus:
        raise DomainError(f"lower step level {ctx['lower_level']} must exceed theta+ = {ctx.f.theta_plus:g}")
    if theta is not None and not ctx["upper_level"] < theta:
        raise DomainError(f"upper step level {ctx['upper_level']} must stay below theta- = {theta:g}")

    h, t_end, every = ctx["h"], ctx["t_end"], ctx["snapshot_every"]
    travel = abs(p.speed) * t_end
    grid = _line_grid(ctx["pad"] + (travel if p.speed < 0 else 0.0),
                      ctx["pad"] + (travel if p.speed > 0 else 0.0), h)
    times = sorted({round(k * every, 12) for k in range(1, int(math.floor(t_end / every)) + 1)}
                   | {float(ctx["ode_time"])})
    rows = []
    for variant, level in (("lower", ctx["lower_level"]), ("upper", ctx["upper_level"])):
        u0 = step_field(level, variant, grid)
        history = evolve(u0, ctx.f, BoundaryPolicy(),
                         EvolveOptions(dt=ctx.get("dt"), t_end=t_end, snapshot_times=times, workers=1))
        series = []
        for u in history[1:]:
            x = interface_positions(u)
            if not x.size:
                continue
            d, shift = min_shift_distance(u, p, axis=0,
                                          bracket=(x[0] - ctx["bracket"], x[0] + ctx["bracket"]))
            series.append((u.t, d, shift))
            rows.append({"variant": variant, "t": u.t, "distance": d, "shift": shift})
        if not series:
            raise GeometryError(f"{variant} step data never formed an interface")

        final = series[-1][1]
        report.measure(f"{variant}_final_distance", final)
        report.add(at_most(f"{variant} step: distance at t={series[-1][0]:g}", final, ctx["dist_tol"]))
        late = [d for t, d, _ in series if t >= ctx["monotone_from"] - 1e-9]
        rise = max((b - a for a, b in zip(late[:-1], late[1:])), default=0.0)
        report.add(at_most(f"{variant} step: largest increase after t={ctx['monotone_from']:g}",
                           rise, ctx["monotone_slack"]))

        if variant == "lower":
            u_ode = min(history, key=lambda s: abs(s.t - ctx["ode_time"]))
            plateau = float(u_ode.values[0])
            expected = ode_flow(ctx.f, level, u_ode.t)
            report.add(close_to(f"plateau follows rho' = f(rho) at t={u_ode.t:g}", plateau, expected,
                                ctx["ode_tol"]))
    report.table("distance", pd.DataFrame(rows))


# ============================================================================
# SPREADING AND RETRACTION
# ============================================================================

def _radial_run(ctx, u0: ScalarField, bc: BoundaryPolicy, t_end: float,
                inspect: Callable[[ScalarField], Dict[str, Any]]) -> List[Dict[str, Any]]:
    rows: List[Dict[str, Any]] = []
    opts = EvolveOptions(dt=ctx.get("dt"), t_end=t_end, snapshot_every=ctx["snapshot_every"],
                         workers=ctx.workers, keep_snapshots=False,
                         on_snapshot=lambda u: rows.append(inspect(u)))
    evolve(u0, ctx.f, bc, opts)
    return rows


@register("exp_spreading",
          claim="a large ball above theta+ spreads: u >= beta on |x| <= (c_f - eps) t after T_eps",
          smoke={"h": 0.5, "t_end": 150.0, "snapshot_every": 5.0, "radius": 12.0, "beta": 0.9,
                 "eps": 0.08, "pad": 15.0, "settle_fraction": 0.5},
          full={"h": 0.25, "t_end": 150.0, "snapshot_every": 2.5, "radius": 12.0, "beta": 0.9,
                "eps": 0.08, "pad": 30.0, "settle_fraction": 0.5},
          validator=_validators(_unit_interval("beta"), _positive("radius", "eps", "h", "t_end")))
def exp_spreading(ctx):
    report = ctx.report
    p = _positive_front(ctx, "spreading")
    beta, eps, t_end = ctx["beta"], ctx["eps"], ctx["t_end"]
    if p.speed <= eps:
        raise DomainError(f"eps={eps:g} must be smaller than c_f={p.speed:.6g}")
    grid = _quarter_grid(ctx["radius"] + p.speed * t_end + ctx["pad"], ctx["h"])
    u0 = ball_field(beta, 0.0, ctx["radius"], grid)
    far = EdgePolicy.dirichlet_farfield(0.0)
    bc = BoundaryPolicy(right=far, top=far)
    radius = np.hypot(*grid.coords())

    def inspect(u: ScalarField) -> Dict[str, Any]:
        inside = radius <= (p.speed - eps) * u.t
        bad = inside & (u.values < beta)
        axis_row = u.values[:, 0]
        below = np.nonzero(axis_row < 0.5)[0]
        return {"t": u.t, "checked_nodes": int(inside.sum()), "violators": int(bad.sum()),
                "min_inside": float(u.values[inside].min()) if inside.any() else float("nan"),
                "front_radius": float(u.axis(0)[below[0]]) if below.size else float("nan")}

    rows = _radial_run(ctx, u0, bc, t_end, inspect)
    frame = pd.DataFrame(rows)
    settle = _settle_time(rows)
    report.measure("T_eps", settle)
    report.add(at_most("T_eps (no violators afterwards)", settle, ctx["settle_fraction"] * t_end))
    late = frame[frame["t"] >= t_end / 2]
    late = late[np.isfinite(late["front_radius"])]
    if len(late) >= 2:
        report.measure("radial_speed_late", _slope(late["t"], late["front_radius"]))
    report.table("spreading", frame)


@register("exp_spreading_upper",
          claim="a ball below theta- inside u = 1 retracts: u <= level on |x| <= R - (c_f + eps) t",
          smoke={"h": 0.5, "snapshot_every": 5.0, "radius": 60.0, "level": 0.1, "eps": 0.08,
                 "pad": 15.0, "settle_fraction": 0.5},
          full={"h": 0.25, "snapshot_every": 2.5, "radius": 60.0, "level": 0.1, "eps": 0.08,
                "pad": 30.0, "settle_fraction": 0.5},
          validator=_validators(_unit_interval("level"), _positive("radius", "eps", "h")))
def exp_spreading_upper(ctx):
    report = ctx.report
    p = _positive_front(ctx, "retraction")
    level, eps, R = ctx["level"], ctx["eps"], ctx["radius"]
    t_end = ctx.get("t_end") or R / (p.speed + eps)
    report.measure("t_end", t_end)
    grid = _quarter_grid(R + ctx["pad"], ctx["h"])
    u0 = ball_field(level, 1.0, R, grid)
    far = EdgePolicy.dirichlet_farfield(1.0)
    bc = BoundaryPolicy(right=far, top=far)
    radius = np.hypot(*grid.coords())

    def inspect(u: ScalarField) -> Dict[str, Any]:
        inside = radius <= R - (p.speed + eps) * u.t
        bad = inside & (u.values > level)
        return {"t": u.t, "checked_nodes": int(inside.sum()), "violators": int(bad.sum()),
                "max_inside": float(u.values[inside].max()) if inside.any() else float("nan")}

    rows = _radial_run(ctx, u0, bc, t_end, inspect)
    settle = _settle_time(rows)
    report.measure("T_eps", settle)
    report.add(at_most("T_eps (no violators afterwards)", settle, ctx["settle_fraction"] * t_end))
    report.table("retraction", pd.DataFrame(rows))


# ============================================================================
# MEAN SPEED
# ============================================================================

def _conical_speeds(ctx, p: ProfileSolution, half_width: float):
    alpha, h, span = ctx["alpha"], ctx["h"], ctx["t_end"]
    cf = conical_front(p, alpha, conical_grid(alpha, half_width, h), ctx.f,
                       relax_time=ctx["relax_time"], workers=ctx.workers)
    opts = EvolveOptions(dt=ctx.get("dt"), t_end=span, snapshot_every=ctx["snapshot_every"],
                         drift=cf.speed, workers=ctx.workers)
    history = evolve(cf.profile, ctx.f, conical_boundary(p, alpha), opts)
    sets = [extract_level_set(u, 0.5).translated((0.0, cf.speed * u.t)) for u in history]
    # arms of a later set end this far outward along the foot of an earlier one
    reach = cf.speed * span * math.sin(alpha) * math.cos(alpha)
    core = max(half_width - reach - 2.0, half_width / 3.0)
    return cf, {kind: mean_speed(sets, kind, core=core) for kind in DISTANCE_KINDS}, core


@register("exp_mean_speed",
          claim="distance-based mean speed is |c_f| (inf and tilde) while Hausdorff sees c_f / sin(alpha)",
          smoke={"alpha": ALPHA_DEFAULT, "half_width": 24.0, "h": 0.5, "t_end": 40.0,
                 "snapshot_every": 2.0, "relax_time": 600.0, "rel_tol": 0.05, "domain_check": False,
                 "domain_tol": 0.01, "negative_theta": 0.7, "negative_h": 0.1, "negative_tol": 0.02,
                 "pad": 30.0},
          full={"alpha": ALPHA_DEFAULT, "half_width": 48.0, "h": 0.25, "t_end": 40.0,
                "snapshot_every": 2.0, "relax_time": 800.0, "rel_tol": 0.05, "domain_check": True,
                "domain_tol": 0.01, "negative_theta": 0.7, "negative_h": 0.05, "negative_tol": 0.02,
                "pad": 30.0},
          validator=_validators(_alpha_between(0.0, math.pi / 2, "(0, pi/2)"),
                                _unit_interval("negative_theta"),
                                _positive("half_width", "h", "t_end", "relax_time")))
def exp_mean_speed(ctx):
    report = ctx.report
    p = _positive_front(ctx, "the conical mean-speed check")
    cf, speeds, core = _conical_speeds(ctx, p, ctx["half_width"])
    report.measure("c", cf.speed)
    report.measure("core_half_width", core)
    report.measure("conical_steady_residual", cf.steady_residual)
    for kind, expected in (("inf", p.speed), ("tilde", p.speed), ("hausdorff", cf.speed)):
        est = speeds[kind]
        report.measure(f"gamma_{kind}", est.gamma_hat)
        report.add(within(f"mean speed ({kind})", est.gamma_hat, expected, ctx["rel_tol"]))
        report.table(f"distance_{kind}", est.table())

    if ctx["domain_check"]:
        _, wide, _ = _conical_speeds(ctx, p, 2.0 * ctx["half_width"])
        for kind in DISTANCE_KINDS:
            base = speeds[kind].gamma_hat
            report.add(within(f"domain doubling ({kind})", wide[kind].gamma_hat, base, ctx["domain_tol"]))

    f_neg = make_cubic(ctx["negative_theta"])
    q = solve_profile(f_neg)
    travel = abs(q.speed) * ctx["t_end"]
    grid = _line_grid(ctx["pad"] + (travel if q.speed < 0 else 0.0),
                      ctx["pad"] + (travel if q.speed > 0 else 0.0), ctx["negative_h"])
    bc = BoundaryPolicy(left=EdgePolicy.dirichlet_farfield(1.0), right=EdgePolicy.dirichlet_farfield(0.0))
    history = evolve(planar_field(q, [1.0], 0.0, grid), f_neg, bc,
                     EvolveOptions(t_end=ctx["t_end"], snapshot_every=ctx["snapshot_every"], workers=1))
    est = mean_speed([extract_level_set(u) for u in history], "inf")
    report.measure("negative_c_f", q.speed)
    report.add(within(f"1D mean speed for {f_neg}", est.gamma_hat, abs(q.speed), ctx["negative_tol"]))


# ============================================================================
# NON-STANDARD FRONT
# ============================================================================

def _reference_table(run, half_width: float) -> pd.DataFrame:
    rows = []
    for gamma in run.level_sets:
        ref = reference_interfaces(gamma.t, run.alpha, run.profile.speed, half_width)
        for k, (x1, x2) in enumerate(ref.polylines[0]):
            rows.append({"t": gamma.t, "vertex": k, "x1": x1, "x2": x2})
    return pd.DataFrame(rows)


def _resolve_supersolution(ctx, run_cf, p: ProfileSolution):
    choice = ctx["supersolution"]
    if isinstance(choice, str):
        if choice != "auto":
            raise DomainError(f"supersolution must be 'auto', 'none' or [sigma, delta, T]; got {choice!r}")
        best, _ = search_supersolution_params(run_cf, ctx.f, ctx["h"])
        if best is None:
            ctx.report.note("no supersolution parameters passed the residual check; sandwich skipped")
            return None
        return best.sigma, best.delta, best.T
    if not choice:
        return None
    sigma, delta, T = (float(v) for v in choice)
    return sigma, delta, T


@register("exp_nonstandard",
          claim="the symmetrised rotated V-front is a transition front with mean speed c_f that becomes a V-front",
          smoke={"alpha": ALPHA_DEFAULT, "n": 60.0, "t_end": 120.0, "h": 0.5, "half_width": 24.0,
                 "margin": 15.0, "snapshot_every": 4.0, "recenter_every": 5.0, "min_clearance": 8.0,
                 "conical_half_width": 16.0, "relax_time": 600.0, "eps_grid": [0.05, 0.1, 0.2],
                 "speed_tol": 0.07, "tip_tol": 0.05, "convergence_tol": 0.03, "ref_tol": 3.0,
                 "monotone_tol": 1e-6, "bound_tol": 1e-3, "supersolution": "auto",
                 "n_sensitivity": [], "save_snapshots": True},
          full={"alpha": ALPHA_DEFAULT, "n": 60.0, "t_end": 120.0, "h": 0.25, "half_width": 40.0,
                "margin": 15.0, "snapshot_every": 2.0, "recenter_every": 5.0, "min_clearance": 8.0,
                "conical_half_width": 24.0, "relax_time": 800.0, "eps_grid": [0.05, 0.1, 0.2],
                "speed_tol": 0.07, "tip_tol": 0.05, "convergence_tol": 0.03, "ref_tol": 3.0,
                "monotone_tol": 1e-6, "bound_tol": 1e-3, "supersolution": "auto",
                "n_sensitivity": [60.0, 90.0, 120.0], "save_snapshots": True},
          validator=_validators(_alpha_between(math.pi / 4, math.pi / 2, "(pi/4, pi/2)"),
                                _positive("n", "t_end", "h", "half_width", "recenter_every")))
def exp_nonstandard(ctx):
    report = ctx.report
    p = _positive_front(ctx, "the non-standard front")
    alpha, h, t_end, hw = ctx["alpha"], ctx["h"], ctx["t_end"], ctx["half_width"]
    cf = conical_front(p, alpha, conical_grid(alpha, ctx["conical_half_width"], h), ctx.f,
                       relax_time=ctx["relax_time"], workers=ctx.workers)
    triple = _resolve_supersolution(ctx, cf, p)
    common = dict(h=h, half_width=hw, margin=ctx["margin"], snapshot_every=ctx["snapshot_every"],
                  recenter_every=ctx["recenter_every"], min_clearance=ctx["min_clearance"],
                  profile=p, conical=cf, workers=ctx.workers)
    run = build_nonstandard(ctx.f, alpha, ctx["n"], t_end, supersolution=triple, **common)
    tilde_speed = p.speed / abs(math.cos(2 * alpha))
    report.measure("c", cf.speed)
    report.measure("c_tilde", tilde_speed)
    report.measure("window_shift", run.cumulative_shift)

    # transition-front property against the reference interfaces
    table = verify_transition(run.snapshots, run.refs, ctx["eps_grid"])
    m_small = table.M[0]
    report.measure(f"M({table.eps[0]:g})", m_small)
    report.add(holds(f"M({table.eps[0]:g}) finite", math.isfinite(m_small), f"M = {m_small:.4g}", m_small))
    report.table("transition", table.frame())
    ref_gap = dist_tilde(run.level_sets[0], run.refs[0])
    report.add(at_most(f"launch level set vs reference (tilde) at t={run.level_sets[0].t:g}", ref_gap,
                       ctx["ref_tol"]))

    est = mean_speed(run.level_sets, "inf")
    report.measure("gamma_inf", est.gamma_hat)
    report.add(within("mean speed (inf) across t = 0", est.gamma_hat, p.speed, ctx["speed_tol"]))

    # long-time V-shape
    late = [g for g in run.level_sets if g.t >= t_end / 2]
    tip = tip_speed(late, x1=0.0)
    report.measure("tip_speed", tip)
    report.add(within("tip speed c_f / |cos 2 alpha|", tip, tilde_speed, ctx["tip_tol"]))

    alpha_tilde = 2 * alpha - math.pi / 2
    limit = conical_front(p, alpha_tilde, conical_grid(alpha_tilde, ctx["conical_half_width"], h), ctx.f,
                          relax_time=ctx["relax_time"], workers=ctx.workers)
    u_end = run.snapshots[-1]
    i0 = int(np.argmin(np.abs(u_end.axis(0))))
    j0 = int(np.argmin(np.abs(limit.shape_offset[:, 0])))
    guess = _lowest_crossing(u_end, i0) - float(limit.shape_offset[j0, 1])
    mask = np.zeros(u_end.shape, dtype=bool)
    mask[2:-2, 2:-2] = True
    distance, shift = min_shift_distance(u_end, limit.evaluate, axis=1,
                                         bracket=(guess - 5.0, guess + 5.0), mask=mask)
    report.measure("limit_shift", shift)
    report.add(at_most(f"distance to the V-front of angle 2a - pi/2 at t={u_end.t:g}", distance,
                       ctx["convergence_tol"]))

    start_pieces = count_linear_pieces(run.level_sets[0], 2.0 * h)
    end_pieces = count_linear_pieces(run.level_sets[-1], 2.0 * h)
    report.add(holds("three straight pieces at launch", start_pieces == 3, f"{start_pieces} pieces",
                     start_pieces))
    report.add(holds("two straight pieces at the end", end_pieces == 2, f"{end_pieces} pieces", end_pieces))

    report.add(at_least("nodewise increase in time", run.min_increment, -ctx["monotone_tol"]))
    report.add(at_most("lower planar bound excess", run.lower_bound_excess, ctx["bound_tol"]))
    if run.sandwich_excess is not None:
        report.add(at_most("sub/supersolution sandwich excess", run.sandwich_excess, ctx["bound_tol"]))
    elif triple is not None:
        report.note(f"no snapshot before T={triple[2]:g}; sandwich not checked")

    if ctx["n_sensitivity"]:
        runs = [build_nonstandard(ctx.f, alpha, n, 0.0, keep_fields=True, **common)
                for n in ctx["n_sensitivity"]]
        gaps = [compare_at_time(a, b, 0.0) for a, b in zip(runs[:-1], runs[1:])]
        for (a, b), gap in zip(zip(ctx["n_sensitivity"][:-1], ctx["n_sensitivity"][1:]), gaps):
            report.measure(f"sup_diff_t0_n{a:g}_vs_n{b:g}", gap)
        shrinking = all(g2 < g1 for g1, g2 in zip(gaps[:-1], gaps[1:]))
        report.add(holds("launch time insensitivity at t = 0", shrinking,
                         " > ".join(f"{g:.3e}" for g in gaps), gaps[-1]))

    report.table("level_sets", pd.DataFrame([
        {"t": g.t, "points": len(g), "min_x2": float(g.points[:, 1].min()) if len(g) else float("nan"),
         "tilde_to_reference": dist_tilde(g, ref) if len(g) else float("nan")}
        for g, ref in zip(run.level_sets, run.refs)]))
    report.table("refs", _reference_table(run, hw))
    if ctx["save_snapshots"]:
        write_snapshots(run.snapshots, ctx.out_dir / "snapshots")


@register("exp_supersolution",
          claim="the perturbed rotated V-front is a supersolution on {x1 <= 0} with nonnegative flux at x1 = 0",
          smoke={"alpha": ALPHA_DEFAULT, "h": 0.5, "conical_half_width": 16.0, "relax_time": 600.0,
                 "span": 20.0, "n_times": 9, "check_half_width": 30.0, "refine": True},
          full={"alpha": ALPHA_DEFAULT, "h": 0.25, "conical_half_width": 24.0, "relax_time": 800.0,
                "span": 20.0, "n_times": 17, "check_half_width": 30.0, "refine": True},
          validator=_validators(_alpha_between(math.pi / 4, math.pi / 2, "(pi/4, pi/2)"),
                                _positive("h", "span", "relax_time")))
def exp_supersolution(ctx):
    report = ctx.report
    p = _positive_front(ctx, "the supersolution check")
    alpha, h, span = ctx["alpha"], ctx["h"], ctx["span"]
    cf = conical_front(p, alpha, conical_grid(alpha, ctx["conical_half_width"], h), ctx.f,
                       relax_time=ctx["relax_time"], workers=ctx.workers)
    sigma, delta, T = suggest_supersolution_params(cf, ctx.f)
    report.measure("suggested_sigma", sigma)
    report.measure("suggested_delta", delta)
    report.measure("suggested_T", T)

    best, tried = search_supersolution_params(cf, ctx.f, h, span=span, n_times=int(ctx["n_times"]),
                                              half_width=ctx["check_half_width"])
    report.table("search", pd.DataFrame([
        {"sigma": r.sigma, "delta": r.delta, "T": r.T, "min_interior": r.min_interior,
         "min_boundary": r.min_boundary, "tol": r.tol, "passed": r.passed} for r in tried]))
    detail = (f"sigma={best.sigma:g} delta={best.delta:g} T={best.T:g} after {len(tried)} candidate(s)"
              if best else f"none of {len(tried)} candidates passed")
    report.add(holds("residual check passes", best is not None, detail))
    if best is None:
        return
    report.measure("min_interior", best.min_interior)
    report.measure("min_boundary", best.min_boundary)
    grid = supersolution_grid(cf, best.T, h, half_width=ctx["check_half_width"], span=span)
    v = save_field(rotated_v(cf, best.T, grid), ctx.out_dir / "rotated_v.flab")
    w = save_field(supersolution_field(cf, best.sigma, best.delta, best.T, grid), ctx.out_dir / "supersolution.flab")
    report.note(f"fields at t = T: {v.name}, {w.name}")

    if ctx["refine"]:
        fine_h = h / 2
        cf_fine = conical_front(p, alpha, conical_grid(alpha, ctx["conical_half_width"], fine_h), ctx.f,
                                relax_time=ctx["relax_time"], workers=ctx.workers)
        grid = supersolution_grid(cf_fine, best.T, fine_h, half_width=ctx["check_half_width"], span=span)
        times = np.linspace(best.T - span, best.T, int(ctx["n_times"]))
        fine = check_supersolution(cf_fine, best.sigma, best.delta, best.T, grid, times, ctx.f)
        report.measure("min_interior_h_half", fine.min_interior)
        report.measure("min_boundary_h_half", fine.min_boundary)
        report.add(holds(f"residual check passes at h={fine_h:g}", fine.passed,
                         f"min N={fine.min_interior:.3e} min dx1={fine.min_boundary:.3e} tol={fine.tol:.2e}"))
        interior_floor, boundary_floor = fine.refinement_bounds(best)
        report.add(at_least(f"interior minimum at h={fine_h:g} vs h={h:g}", fine.min_interior, interior_floor))
        report.add(at_least(f"boundary minimum at h={fine_h:g} vs h={h:g}", fine.min_boundary, boundary_floor))


# ============================================================================
# TERRACE, PLANARITY, METASTABILITY
# ============================================================================

@register("exp_terrace",
          claim="with sub-front speeds out of order, step data split into two fronts and never settle",
          smoke={"theta_step": 0.05, "h": 0.2, "t_end": 80.0, "snapshot_every": 2.0, "pad": 30.0,
                 "gap_min": 0.05, "rate_tol": 0.10, "separation_min": 0.1},
          full={"theta_step": 0.05, "h": 0.1, "t_end": 150.0, "snapshot_every": 2.0, "pad": 40.0,
                "gap_min": 0.05, "rate_tol": 0.10, "separation_min": 0.1},
          validator=_validators(_unit_interval("theta_step"), _positive("h", "t_end")))
def exp_terrace(ctx):
    report = ctx.report
    ladder = subfront_speeds(ctx.f)
    report.table("subfronts", pd.DataFrame({"lower": [a for a, _ in ladder.intervals],
                                            "upper": [b for _, b in ladder.intervals],
                                            "speed": ladder.speeds}))
    report.add(holds("sub-front speeds out of order", ladder.terrace,
                     f"speeds bottom to top {['%.5g' % s for s in ladder.speeds]}"))
    c_low, c_high = ladder.speeds[0], ladder.speeds[-1]
    low_level = 0.5 * sum(ladder.intervals[0])
    high_level = 0.5 * sum(ladder.intervals[-1])

    t_end = ctx["t_end"]
    left = ctx["pad"] + max(0.0, -min(ladder.speeds)) * t_end
    right = ctx["pad"] + max(0.0, max(ladder.speeds)) * t_end
    grid = _line_grid(left, right, ctx["h"])
    history = evolve(step_field(ctx["theta_step"], "upper", grid), ctx.f, BoundaryPolicy(),
                     EvolveOptions(dt=ctx.get("dt"), t_end=t_end, snapshot_every=ctx["snapshot_every"],
                                   workers=1))
    rows = []
    for u in history[1:]:
        lo, hi = interface_positions(u, low_level), interface_positions(u, high_level)
        if lo.size and hi.size:
            rows.append({"t": u.t, "x_low": float(lo[-1]), "x_high": float(hi[0]),
                         "gap": float(lo[-1] - hi[0])})
    frame = pd.DataFrame(rows)
    late = frame[frame["t"] >= t_end / 2]
    s_low, s_high = _slope(late["t"], late["x_low"]), _slope(late["t"], late["x_high"])
    rate = _slope(late["t"], late["gap"])
    report.measure("speed_low_interface", s_low)
    report.measure("speed_high_interface", s_high)
    report.add(at_least("speed difference of the two interfaces", s_low - s_high, ctx["gap_min"]))
    report.add(within("separation rate", rate, c_low - c_high, ctx["rate_tol"]))

    u_half = min(history, key=lambda s: abs(s.t - t_end / 2))
    reach = max(abs(s) for s in ladder.speeds) * t_end
    distance, _ = min_shift_distance(history[-1], _line_interpolant(u_half), axis=0, bracket=(-reach, reach))
    report.add(at_least("no shape convergence (distance over shifts)", distance, ctx["separation_min"]))
    report.table("interfaces", frame)


@register("exp_planar_liouville",
          claim="almost-planar data become planar fronts; three 1D interfaces merge into one moving at c_f",
          smoke={"h": 0.5, "t_end": 60.0, "snapshot_every": 5.0, "width": 16.0, "bump_height": 3.0,
                 "bump_width": 2.5, "pad": 15.0, "flatten_ratio": 0.25, "normal_tol": 0.01,
                 "islands": [6.0, 6.0], "line_h": 0.1, "speed_tol": 0.02},
          full={"h": 0.25, "t_end": 100.0, "snapshot_every": 5.0, "width": 16.0, "bump_height": 3.0,
                "bump_width": 2.5, "pad": 20.0, "flatten_ratio": 0.25, "normal_tol": 0.01,
                "islands": [6.0, 6.0], "line_h": 0.05, "speed_tol": 0.02},
          validator=_positive("h", "t_end", "width", "bump_width", "line_h"))
def exp_planar_liouville(ctx):
    report = ctx.report
    p = _positive_front(ctx, "the planar Liouville check")
    h, t_end, A = ctx["h"], ctx["t_end"], ctx["bump_height"]

    m = int(round(0.5 * ctx["width"] / h))
    rows = int(math.ceil((2 * ctx["pad"] + A + p.speed * t_end) / h)) + 1
    grid = make_grid((2 * m + 1, rows), h, (-m * h, -h * round(ctx["pad"] / h)))
    x1, x2 = grid.coords()
    u0 = grid.with_values(p(x2 - A * np.exp(-(x1 / ctx["bump_width"]) ** 2)))
    bc = BoundaryPolicy(bottom=EdgePolicy.dirichlet_farfield(1.0), top=EdgePolicy.dirichlet_farfield(0.0))
    history = evolve(u0, ctx.f, bc, EvolveOptions(dt=ctx.get("dt"), t_end=t_end,
                                                  snapshot_every=ctx["snapshot_every"], workers=ctx.workers))
    fits = [(u.t, planarity(extract_level_set(u), u)) for u in history]
    start, end = fits[0][1], fits[-1][1]
    ratio = end.residual / start.residual
    report.measure("planarity_start", start.residual)
    report.measure("planarity_end", end.residual)
    report.add(at_most("bump flattens (residual ratio)", ratio, ctx["flatten_ratio"]))
    report.add(close_to("normal of the limit front", float(end.normal[1]), 1.0, ctx["normal_tol"]))
    report.table("planarity", pd.DataFrame([{"t": t, "residual": fit.residual, "n1": fit.normal[0],
                                             "n2": fit.normal[1], "xi": fit.xi} for t, fit in fits]))

    gap, width = ctx["islands"]
    grid = _line_grid(ctx["pad"], gap + width + ctx["pad"] + p.speed * t_end, ctx["line_h"])
    x = grid.axis(0)
    values = np.where((x <= 0.0) | ((x > gap) & (x <= gap + width)), 1.0, 0.0)
    bc = BoundaryPolicy(left=EdgePolicy.dirichlet_farfield(1.0), right=EdgePolicy.dirichlet_farfield(0.0))
    line = evolve(grid.with_values(values), ctx.f, bc,
                  EvolveOptions(t_end=t_end, snapshot_every=ctx["snapshot_every"], workers=1))
    counts = [interface_positions(u).size for u in line]
    report.add(holds("one interface at the end", counts[-1] == 1, f"{counts[0]} -> {counts[-1]} interface(s)",
                     counts[-1]))
    tail = [(u.t, interface_positions(u)[0]) for u in line
            if u.t >= 2.0 * t_end / 3.0 and interface_positions(u).size == 1]
    if len(tail) >= 2:
        speed = _slope([t for t, _ in tail], [x for _, x in tail])
        report.add(within("merged front speed", speed, p.speed, ctx["speed_tol"]))
    else:
        report.add(holds("merged front speed", False, "fewer than two single-interface snapshots"))


@register("exp_metastable",
          claim="plateaus of a balanced f barely move: interface speeds stay below the tolerance",
          smoke={"h": 0.2, "t_end": 100.0, "snapshot_every": 5.0, "plateau": 20.0,
                 "half_length": 60.0, "speed_max": 1e-3},
          full={"h": 0.1, "t_end": 200.0, "snapshot_every": 5.0, "plateau": 20.0,
                "half_length": 80.0, "speed_max": 1e-3},
          validator=_validators(_positive("plateau", "half_length", "h")),
          f_validator=_balanced)
def exp_metastable(ctx):
    report = ctx.report
    f = ctx.f
    report.measure("integral01", f.integral01)
    L, plateau = ctx["half_length"], ctx["plateau"]
    if plateau >= L:
        raise DomainError(f"plateau {plateau:g} must fit inside the half-length {L:g}")
    grid = _line_grid(L, L, ctx["h"])
    u0 = grid.with_values(np.where(np.abs(grid.axis(0)) <= plateau, 1.0, 0.0))
    history = evolve(u0, f, BoundaryPolicy(), EvolveOptions(dt=ctx.get("dt"), t_end=ctx["t_end"],
                                                          snapshot_every=ctx["snapshot_every"], workers=1))
    rows = []
    for u in history:
        x = interface_positions(u)
        if x.size == 2:
            rows.append({"t": u.t, "left": float(x[0]), "right": float(x[1])})
    frame = pd.DataFrame(rows)
    report.add(holds("two interfaces throughout", len(frame) == len(history),
                     f"{len(frame)} of {len(history)} snapshots"))
    late = frame[frame["t"] >= ctx["t_end"] / 2]
    for side in ("left", "right"):
        speed = abs(_slope(late["t"], late[side]))
        report.add(at_most(f"{side} interface speed", speed, ctx["speed_max"]))
    report.table("interfaces", frame)


# ============================================================================
# PROPERTY SUITE
# ============================================================================

@register("exp_properties",
          claim="comparison principle, distance ordering, determinism and exact equilibria",
          smoke={"h": 0.5, "size": 32, "t_end": 2.0, "pairs": 20, "sets": 100, "threads": [1, 4],
                 "ode_start": 0.6, "ode_tol": 0.01, "order_tol": 1e-12, "equilibrium_tol": 1e-14},
          full={"h": 0.5, "size": 64, "t_end": 4.0, "pairs": 50, "sets": 200, "threads": [1, 4],
                "ode_start": 0.6, "ode_tol": 0.01, "order_tol": 1e-12, "equilibrium_tol": 1e-14},
          validator=_validators(_unit_interval("ode_start"), _positive("h", "size", "t_end", "pairs", "sets"),
                                _planar_grid),
          grid_keys=GRID_KEYS)
def exp_properties(ctx):
    report = ctx.report
    rng, f = ctx.rng, ctx.f
    size = int(ctx["size"])
    shape = ctx.get("shape") or (size, size)
    grid = make_grid(shape, ctx["h"], ctx.get("origin") or (0.0, 0.0))
    opts = EvolveOptions(dt=ctx.get("dt"), t_end=ctx["t_end"], workers=ctx.workers)
    bc = BoundaryPolicy()

    worst_order = math.inf
    for _ in range(int(ctx["pairs"])):
        lower = rng.random(grid.shape)
        upper = np.clip(lower + 0.3 * rng.random(grid.shape), 0.0, 1.0)
        a = evolve(grid.with_values(lower), f, bc, opts)[-1]
        b = evolve(grid.with_values(upper), f, bc, opts)[-1]
        worst_order = min(worst_order, float(np.min(b.values - a.values)))
    report.add(at_least(f"comparison principle over {ctx['pairs']} pairs", worst_order, -ctx["order_tol"]))

    broken = 0
    for _ in range(int(ctx["sets"])):
        sets = []
        for _side in range(2):
            n = int(rng.integers(5, 40))
            pts = rng.normal(size=(n, 2)) * rng.uniform(0.5, 5.0) + rng.uniform(-10.0, 10.0, size=2)
            sets.append(InterfaceSet(t=0.0, level=0.5, points=pts))
        d, dt_, dh = dist_inf(*sets), dist_tilde(*sets), dist_hausdorff(*sets)
        if not (d <= dt_ + 1e-12 and dt_ <= dh + 1e-12):
            broken += 1
    report.add(holds(f"inf <= tilde <= Hausdorff on {ctx['sets']} random pairs", broken == 0,
                     f"{broken} violation(s)", broken))

    start = grid.with_values(rng.random(grid.shape))
    results = [evolve(start, f, bc, EvolveOptions(dt=ctx.get("dt"), t_end=ctx["t_end"], workers=int(w)))[-1]
               for w in ctx["threads"]]
    same = all(np.array_equal(results[0].values, r.values) for r in results[1:])
    report.add(holds(f"bitwise identical for workers {list(ctx['threads'])}", same,
                     "identical" if same else "results differ"))

    m, h = 8, ctx["h"]
    sym = make_grid((2 * m + 1, 15), h, (-m * h, 0.0))
    noise = rng.random(sym.shape)
    even = sym.with_values(0.5 * (noise + noise[::-1]))
    full = evolve(even, f, bc, opts)[-1]
    half0 = ScalarField(values=even.values[: m + 1].copy(), h=h, origin=sym.origin)
    half = evolve_half_plane(half0, f, opts, bc=BoundaryPolicy())[-1]
    gap = float(np.max(np.abs(half.values - full.values[: m + 1])))
    report.add(at_most("half-plane Neumann run equals the even extension", gap, ctx["order_tol"]))

    for z in f.zeros:
        final = evolve(grid.with_values(np.full(grid.shape, z)), f, bc, opts)[-1]
        drift = float(np.max(np.abs(final.values - z)))
        report.add(at_most(f"equilibrium u = {z:.6g} stays put", drift, ctx["equilibrium_tol"]))

    rho0 = ctx["ode_start"]
    final = evolve(grid.with_values(np.full(grid.shape, rho0)), f, bc, opts)[-1]
    expected = ode_flow(f, rho0, final.t)
    report.add(close_to(f"constant data follow rho' = f(rho) from {rho0:g}", float(final.values.mean()),
                        expected, ctx["ode_tol"]))
