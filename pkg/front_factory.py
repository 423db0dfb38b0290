"""
Initial data and front constructions.

Covers planar, step and ball data; V-shaped (conical) fronts relaxed in a
comoving frame; the rotated V-front used as a subsolution on the half-plane
{x1 <= 0}, its exponentially perturbed supersolution; the piecewise-linear
reference interfaces; and the full non-standard front obtained by launching
the rotated V-front at time -n, evolving it with a zero-flux line at x1 = 0
(realised as an even extension) and tracking it in a recentred window.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from errors import DomainError, RelaxationError, WindowOverflowError
from interface_geometry import (InterfaceSet, extract_level_set, polyline_from_vertices)
from nonlinearity import Nonlinearity
from rd_engine import (BoundaryPolicy, EdgePolicy, EvolveOptions, ScalarField, evolve,
                       make_grid, pde_residual)
from wave_profile import ProfileSolution, eval_profile, solve_profile

logger = logging.getLogger(__name__)

BLEND_CELLS = 4.0
STEADY_TOL = 1e-6
SEARCH_SIGMAS = (1.0, 2.0, 4.0, 8.0, 16.0, 32.0)
SEARCH_DELTAS = (0.05, 0.1, 0.2)
SEARCH_TIMES = (-20.0, -40.0)


# ============================================================================
# SIMPLE DATA
# ============================================================================

def planar_field(p: ProfileSolution, e: Sequence[float], xi: float, grid: ScalarField) -> ScalarField:
    """u(x) = phi_f(x . e + xi)."""
    e = np.asarray(e, dtype=float)
    if e.shape != (grid.dim,) or not math.isclose(float(np.linalg.norm(e)), 1.0, abs_tol=1e-12):
        raise DomainError(f"direction must be a unit vector of length {grid.dim}, got {e}")
    arg = sum(c * ek for c, ek in zip(grid.coords(), e)) + xi
    return grid.with_values(eval_profile(p, arg))


def step_field(theta: float, variant: str, grid: ScalarField) -> ScalarField:
    """
    Two-level 1D step at the node nearest 0.

    lower: theta for y <= 0, 0 beyond. upper: 1 for y <= 0, theta beyond.
    """
    if not 0.0 < theta < 1.0:
        raise DomainError(f"step level must lie in (0, 1), got {theta}")
    if grid.dim != 1:
        raise DomainError("step data is one-dimensional")
    x = grid.axis(0)
    split = x[int(np.argmin(np.abs(x)))]
    behind = x <= split
    if variant == "lower":
        values = np.where(behind, theta, 0.0)
    elif variant == "upper":
        values = np.where(behind, 1.0, theta)
    else:
        raise DomainError(f"unknown step variant {variant!r}; use 'lower' or 'upper'")
    return grid.with_values(values)


def ball_field(inside: float, outside: float, R: float, grid: ScalarField) -> ScalarField:
    """inside for |x| < R, outside elsewhere."""
    if R < 2.0 * grid.h:
        raise DomainError(f"ball radius {R} below two cells ({2.0 * grid.h})")
    radius = np.sqrt(sum(c * c for c in grid.coords()))
    return grid.with_values(np.where(radius < R, float(inside), float(outside)))


# ============================================================================
# CONICAL FRONTS
# ============================================================================

def planar_max(p: ProfileSolution, alpha: float, y1, y2):
    """max(phi_f(y1 cos a + y2 sin a), phi_f(-y1 cos a + y2 sin a))."""
    ca, sa = math.cos(alpha), math.sin(alpha)
    return np.maximum(eval_profile(p, y1 * ca + y2 * sa), eval_profile(p, -y1 * ca + y2 * sa))


@dataclass
class ConicalFront:
    """Steady V-shaped front in the frame moving up at `speed` = c_f / sin(alpha)."""
    alpha: float
    speed: float
    profile: ScalarField
    shape_offset: np.ndarray
    planar: ProfileSolution = field(repr=False)
    relax_time: float = 0.0
    steady_residual: float = float("nan")
    edge_planarity: float = float("nan")

    @cached_property
    def _coefficients(self) -> np.ndarray:
        return ndimage.spline_filter(self.profile.values, order=3, mode="nearest")

    def evaluate(self, y1, y2) -> np.ndarray:
        """
        phi(y1, y2) by cubic-spline interpolation of the relaxed field,
        blended into the planar asymptotics near and beyond the window.
        """
        y1 = np.asarray(y1, dtype=float)
        y2 = np.asarray(y2, dtype=float)
        o1, o2 = self.profile.origin
        n1, n2 = self.profile.shape
        i = (y1 - o1) / self.profile.h
        j = (y2 - o2) / self.profile.h
        depth = np.minimum(np.minimum(i, n1 - 1 - i), np.minimum(j, n2 - 1 - j))
        w = np.clip((depth - 1.0) / BLEND_CELLS, 0.0, 1.0)
        w = w * w * (3.0 - 2.0 * w)

        tails = planar_max(self.planar, self.alpha, y1, y2)
        out = np.asarray(tails, dtype=float).copy()
        inside = w > 0.0
        if np.any(inside):
            interp = ndimage.map_coordinates(self._coefficients, [i[inside], j[inside]],
                                             order=3, mode="nearest", prefilter=False)
            out[inside] = w[inside] * interp + (1.0 - w[inside]) * tails[inside]
        return np.clip(out, 0.0, 1.0)

    def __call__(self, y1, y2):
        return self.evaluate(y1, y2)


def conical_grid(alpha: float, half_width: float, h: float, margin: float = 12.0) -> ScalarField:
    """Comoving window: |y1| <= half_width (node on y1 = 0), apex margin below, arms exit on top."""
    m = int(round(half_width / h))
    top = half_width / math.tan(alpha) + margin
    rows = int(math.ceil((top + margin) / h)) + 1
    origin2 = -h * int(round(margin / h))
    return make_grid((2 * m + 1, rows), h, (-m * h, origin2))


def conical_boundary(p: ProfileSolution, alpha: float) -> BoundaryPolicy:
    """Dirichlet traces from the planar asymptotics, fixed in time (comoving frame)."""
    def trace(_t, xy):
        return planar_max(p, alpha, xy[:, 0], xy[:, 1])
    return BoundaryPolicy.uniform(EdgePolicy.dirichlet_profile(trace))


def _shape_offset(u: ScalarField, level: float = 0.5) -> np.ndarray:
    """Lowest crossing ordinate of `level` in every column."""
    x1, x2 = u.axis(0), u.axis(1)
    out = np.full((x1.size, 2), np.nan)
    out[:, 0] = x1
    d = u.values - level
    for i in range(x1.size):
        idx = np.nonzero((d[i, :-1] > 0.0) & (d[i, 1:] <= 0.0))[0]
        if idx.size:
            j = idx[0]
            out[i, 1] = x2[j] + u.h * d[i, j] / (d[i, j] - d[i, j + 1])
    return out


def conical_front(p: ProfileSolution, alpha: float, grid: ScalarField, f: Nonlinearity,
                  relax_time: float = 400.0, tol: float = STEADY_TOL,
                  workers: Optional[int] = None) -> ConicalFront:
    """
    Relax u_t = Lap u + (c_f / sin a) d2 u + f(u) from max(planar+, planar-)
    with edge traces frozen from the initial data until sup|u(t+1) - u(t)| < tol.

    Raises:
        DomainError: c_f <= 0 or alpha outside (0, pi/2)
        RelaxationError: no convergence within relax_time
    """
    if p.speed <= 0:
        raise DomainError(f"conical fronts need c_f > 0, got {p.speed:.6g}")
    if not 0.0 < alpha < math.pi / 2:
        raise DomainError(f"alpha must lie in (0, pi/2), got {alpha}")
    speed = p.speed / math.sin(alpha)
    y1, y2 = grid.coords()
    u = grid.with_values(planar_max(p, alpha, y1, y2), t=0.0)
    bc = conical_boundary(p, alpha)

    change = math.inf
    elapsed = 0.0
    while elapsed < relax_time:
        opts = EvolveOptions(t_end=u.t + 1.0, drift=speed, workers=workers)
        nxt = evolve(u, f, bc, opts)[-1]
        change = float(np.max(np.abs(nxt.values - u.values)))
        u = nxt
        elapsed += 1.0
        if change < tol:
            break
    else:
        raise RelaxationError(f"conical front (alpha={alpha:.4f}) did not settle in {relax_time:g}", change)

    still = [u.with_values(u.values, t=-1.0), u, u.with_values(u.values, t=1.0)]
    residual = float(np.max(np.abs(pde_residual(still, f, drift=speed).values)))

    n1 = u.shape[0]
    band = max(1, int(0.1 * n1))
    outer = np.zeros(u.shape, dtype=bool)
    outer[:band] = True
    outer[-band:] = True
    planarity_gap = float(np.max(np.abs(u.values - planar_max(p, alpha, y1, y2))[outer]))

    logger.info(f"[FACTORY] [OK] conical front alpha={alpha:.4f} c={speed:.6f} relaxed in "
                f"{elapsed:g} (change {change:.1e}, residual {residual:.2e}, edge gap {planarity_gap:.1e})")
    return ConicalFront(alpha=alpha, speed=speed, profile=u.with_values(u.values, t=0.0),
                        shape_offset=_shape_offset(u), planar=p, relax_time=elapsed,
                        steady_residual=residual, edge_planarity=planarity_gap)


# ============================================================================
# ROTATED SUBSOLUTION AND SUPERSOLUTION
# ============================================================================

def rotated_v_at(cf: ConicalFront, t: float, x1, x2) -> np.ndarray:
    """v(t, x) = phi(x1 sin a - x2 cos a, x1 cos a + x2 sin a - c t)."""
    ca, sa = math.cos(cf.alpha), math.sin(cf.alpha)
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    return cf.evaluate(x1 * sa - x2 * ca, x1 * ca + x2 * sa - cf.speed * t)


def rotated_v(cf: ConicalFront, t: float, grid: ScalarField) -> ScalarField:
    x1, x2 = grid.coords()
    return grid.with_values(rotated_v_at(cf, t, x1, x2), t=t)


def supersolution_values(cf: ConicalFront, sigma: float, delta: float, t: float,
                         x1, x2, cap: bool = True) -> np.ndarray:
    """min(v(t + sigma e^{delta t}, x) + delta e^{delta (x1 + t)}, 1)."""
    x1 = np.asarray(x1, dtype=float)
    w = rotated_v_at(cf, t + sigma * math.exp(delta * t), x1, x2) + delta * np.exp(delta * (x1 + t))
    return np.minimum(w, 1.0) if cap else w


def supersolution_field(cf: ConicalFront, sigma: float, delta: float, t: float,
                        grid: ScalarField) -> ScalarField:
    x1, x2 = grid.coords()
    return grid.with_values(supersolution_values(cf, sigma, delta, t, x1, x2), t=t)


def lower_planar_bound(p: ProfileSolution, alpha: float, t: float, x1, x2) -> np.ndarray:
    """max(phi_f(-|x1| sin 2a - x2 cos 2a - c_f t), phi_f(x2 - c_f t))."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    s2, c2 = math.sin(2 * alpha), math.cos(2 * alpha)
    arm = eval_profile(p, -np.abs(x1) * s2 - x2 * c2 - p.speed * t)
    flat = eval_profile(p, x2 - p.speed * t)
    return np.maximum(arm, flat)


@dataclass
class SupersolutionReport:
    sigma: float
    delta: float
    T: float
    min_interior: float
    min_boundary: float
    tol: float
    interior_nodes: int
    boundary_nodes: int
    h: float
    dt: float

    @property
    def passed(self) -> bool:
        return self.min_interior >= -self.tol and self.min_boundary >= -self.tol

    def refinement_bounds(self, coarser: "SupersolutionReport") -> Tuple[float, float]:
        """
        Lowest acceptable (interior, boundary) minima for this finer check:
        no worse than the coarser minima, clipped at 0, less this tolerance.
        """
        return (min(coarser.min_interior, 0.0) - self.tol, min(coarser.min_boundary, 0.0) - self.tol)


def supersolution_grid(cf: ConicalFront, T: float, h: float, half_width: float = 30.0,
                       span: float = 20.0, margin: float = 15.0) -> ScalarField:
    """Grid on {x1 <= 0} covering the level sets over [T - span, T]."""
    cf_speed = cf.planar.speed
    lo = cf_speed * (T - span) - margin
    hi = cf_speed * T + abs(math.tan(2 * cf.alpha)) * half_width + margin
    m = int(round(half_width / h))
    rows = int(math.ceil((hi - lo) / h)) + 1
    return make_grid((m + 1, rows), h, (-m * h, h * math.floor(lo / h)))


def check_supersolution(cf: ConicalFront, sigma: float, delta: float, T: float,
                        grid: ScalarField, times: Sequence[float], f: Nonlinearity,
                        dt: Optional[float] = None) -> SupersolutionReport:
    """
    Sign check of the supersolution residual on {x1 <= 0}.

    Interior: vt - Lap v - f(v) at nodes whose whole space-time stencil has the
    uncapped value below 1. Boundary x1 = 0: second-order one-sided d/dx1.
    PASS iff both minima are >= -10 (h^2 + dt). Never raises for a failure.
    """
    if sigma <= 0 or delta <= 0 or T >= 0:
        raise DomainError(f"need sigma > 0, delta > 0, T < 0 (got {sigma}, {delta}, {T})")
    if abs(grid.axis(0)[-1]) > 1e-9:
        raise DomainError("supersolution grid must end on x1 = 0")
    h = grid.h
    dt = dt if dt is not None else 0.25 * h * h
    tol = 10.0 * (h * h + dt)
    x1, x2 = grid.coords()

    min_interior, min_boundary = math.inf, math.inf
    n_interior = n_boundary = 0
    for t in times:
        if t > T:
            continue
        w_prev, w_now, w_next = (supersolution_values(cf, sigma, delta, s, x1, x2, cap=False)
                                 for s in (t - dt, t, t + dt))
        below = (w_prev < 1.0) & (w_now < 1.0) & (w_next < 1.0)
        inner = (below[1:-1, 1:-1] & below[2:, 1:-1] & below[:-2, 1:-1]
                 & below[1:-1, 2:] & below[1:-1, :-2])
        lap = (w_now[2:, 1:-1] + w_now[:-2, 1:-1] + w_now[1:-1, 2:] + w_now[1:-1, :-2]
               - 4.0 * w_now[1:-1, 1:-1]) / (h * h)
        residual = (w_next[1:-1, 1:-1] - w_prev[1:-1, 1:-1]) / (2.0 * dt) - lap - f.eval(w_now[1:-1, 1:-1])
        if inner.any():
            min_interior = min(min_interior, float(residual[inner].min()))
            n_interior += int(inner.sum())

        edge = below[-1] & below[-2] & below[-3]
        deriv = (3.0 * w_now[-1] - 4.0 * w_now[-2] + w_now[-3]) / (2.0 * h)
        if edge.any():
            min_boundary = min(min_boundary, float(deriv[edge].min()))
            n_boundary += int(edge.sum())

    report = SupersolutionReport(sigma=sigma, delta=delta, T=T,
                                 min_interior=min_interior if n_interior else 0.0,
                                 min_boundary=min_boundary if n_boundary else 0.0,
                                 tol=tol, interior_nodes=n_interior, boundary_nodes=n_boundary,
                                 h=h, dt=dt)
    status = "[OK]" if report.passed else "[WARN]"
    logger.info(f"[FACTORY] {status} supersolution sigma={sigma:g} delta={delta:g} T={T:g}: "
                f"min N={report.min_interior:.3e} min dx1={report.min_boundary:.3e} tol={tol:.2e}")
    return report


def suggest_supersolution_params(cf: ConicalFront, f: Nonlinearity) -> Tuple[float, float, float]:
    """
    (sigma, delta, T) from the sufficient conditions: f' <= 0 on [0, 2 delta]
    and [1 - delta, 1]; kappa = -max d2 phi over the strip delta <= phi <= 1 - delta;
    sigma c kappa >= max|f'|; T = -2 sigma.
    """
    delta = 0.02
    for candidate in (0.2, 0.1, 0.05, 0.02):
        low = np.linspace(0.0, 2.0 * candidate, 201)
        high = np.linspace(1.0 - candidate, 1.0, 201)
        if np.all(f.deriv(low) <= 0.0) and np.all(f.deriv(high) <= 0.0):
            delta = candidate
            break
    values = cf.profile.values
    slope = np.gradient(values, cf.profile.h, axis=1)
    strip = (values >= delta) & (values <= 1.0 - delta)
    kappa = float(-slope[strip].max()) if strip.any() else 0.0
    if kappa <= 0:
        kappa = 1e-3
    sigma = f.max_abs_deriv / (cf.speed * kappa)
    return sigma, delta, -2.0 * sigma


def search_supersolution_params(cf: ConicalFront, f: Nonlinearity, h: float,
                                span: float = 20.0, n_times: int = 9,
                                half_width: float = 30.0) -> Tuple[Optional[SupersolutionReport], List[SupersolutionReport]]:
    """Grid search over (sigma, delta, T) plus the suggested triple; first PASS wins."""
    candidates = [(s, d, T) for T in SEARCH_TIMES for s in SEARCH_SIGMAS for d in SEARCH_DELTAS]
    candidates.append(suggest_supersolution_params(cf, f))
    tried: List[SupersolutionReport] = []
    grids: Dict[float, ScalarField] = {}
    for sigma, delta, T in candidates:
        grid = grids.get(T)
        if grid is None:
            grid = grids[T] = supersolution_grid(cf, T, h, half_width=half_width, span=span)
        times = np.linspace(T - span, T, n_times)
        report = check_supersolution(cf, sigma, delta, T, grid, times, f)
        tried.append(report)
        if report.passed:
            return report, tried
    return None, tried


# ============================================================================
# REFERENCE INTERFACES
# ============================================================================

def reference_interfaces(t: float, alpha: float, cf_speed: float, half_width: float = 40.0,
                         spacing: Optional[float] = None) -> InterfaceSet:
    """
    Piecewise-linear reference set at time t, arms truncated at |x1| = half_width.

    t <= 0: half-line, segment [P^l, P^r] at height c_f t, half-line, with
    P^l = (c t cos a, c_f t), P^r = (-c t cos a, c_f t), c = c_f / sin a.
    t > 0: x2 = |tan 2a| |x1| + c_f t / |cos 2a|.
    """
    if not math.pi / 4 < alpha < math.pi / 2:
        raise DomainError(f"alpha must lie in (pi/4, pi/2), got {alpha}")
    if cf_speed <= 0:
        raise DomainError(f"reference interfaces need c_f > 0, got {cf_speed}")
    c = cf_speed / math.sin(alpha)
    slope = abs(math.tan(2 * alpha))
    if t <= 0:
        left = np.array([c * t * math.cos(alpha), cf_speed * t])
        right = np.array([-left[0], left[1]])
        reach = max(half_width - abs(left[0]), 0.0)
        vertices = [(-half_width, left[1] + slope * reach), tuple(left), tuple(right),
                    (half_width, right[1] + slope * reach)]
    else:
        apex = cf_speed * t / abs(math.cos(2 * alpha))
        vertices = [(-half_width, apex + slope * half_width), (0.0, apex),
                    (half_width, apex + slope * half_width)]
    # drop the zero-length middle segment at t = 0
    cleaned = [vertices[0]]
    for v in vertices[1:]:
        if np.hypot(v[0] - cleaned[-1][0], v[1] - cleaned[-1][1]) > 1e-12:
            cleaned.append(v)
    return polyline_from_vertices(cleaned, t=t, level=0.5, spacing=spacing)


# ============================================================================
# NON-STANDARD FRONT
# ============================================================================

@dataclass
class NonstandardRun:
    alpha: float
    n_start: float
    profile: ProfileSolution = field(repr=False)
    conical: ConicalFront = field(repr=False)
    snapshots: List[ScalarField] = field(default_factory=list, repr=False)
    level_sets: List[InterfaceSet] = field(default_factory=list, repr=False)
    refs: List[InterfaceSet] = field(default_factory=list, repr=False)
    shifts: List[Tuple[float, float]] = field(default_factory=list)
    min_increment: float = math.inf
    lower_bound_excess: float = -math.inf
    sandwich_excess: Optional[float] = None

    @property
    def cumulative_shift(self) -> float:
        return sum(s for _, s in self.shifts)

    def snapshot_at(self, t: float) -> ScalarField:
        return min(self.snapshots, key=lambda u: abs(u.t - t))


def _aligned_rows(a: ScalarField, b: ScalarField) -> Tuple[np.ndarray, np.ndarray]:
    """Values of two fields on their common rows (same x1 axis, windows offset in x2)."""
    offset = int(round((b.origin[1] - a.origin[1]) / a.h))
    n = a.shape[1]
    if offset >= 0:
        return a.values[:, offset:], b.values[:, :n - offset]
    return a.values[:, :n + offset], b.values[:, -offset:]


def lower_bound_violation(snapshots: Sequence[ScalarField], p: ProfileSolution, alpha: float) -> float:
    """max over snapshots and nodes of (lower planar bound - u); <= 0 means the bound holds."""
    worst = -math.inf
    for u in snapshots:
        x1, x2 = u.coords()
        worst = max(worst, float(np.max(lower_planar_bound(p, alpha, u.t, x1, x2) - u.values)))
    return worst


def sandwich_violation(snapshots: Sequence[ScalarField], cf: ConicalFront, sigma: float,
                       delta: float, T: float) -> Optional[float]:
    """
    max excess of u outside [v(t, -|x1|, x2), vbar(t, -|x1|, x2)] over snapshots
    with t <= T. None when no snapshot falls in that range.
    """
    worst: Optional[float] = None
    for u in snapshots:
        if u.t > T:
            continue
        x1, x2 = u.coords()
        mirrored = -np.abs(x1)
        upper = supersolution_values(cf, sigma, delta, u.t, mirrored, x2)
        lower = rotated_v_at(cf, u.t, mirrored, x2)
        excess = max(float(np.max(u.values - upper)), float(np.max(lower - u.values)))
        worst = excess if worst is None else max(worst, excess)
    return worst


def _launch_window(p: ProfileSolution, alpha: float, n_start: float, h: float,
                   half_width: float, margin: float) -> ScalarField:
    m = int(round(half_width / h))
    slope = abs(math.tan(2 * alpha))
    height = slope * half_width + 2.0 * margin
    rows = int(math.ceil(height / h)) + 1
    base = p.speed * (-n_start)
    apex_x = p.speed / math.sin(alpha) * n_start * math.cos(alpha)
    top = base + slope * max(half_width - apex_x, 0.0)
    centre = 0.5 * (base + top)
    origin2 = h * round((centre - 0.5 * (rows - 1) * h) / h)
    return make_grid((2 * m + 1, rows), h, (-m * h, origin2), t=-n_start)


def _recentre(u: ScalarField, gamma: InterfaceSet, trace: Callable, guard_cells: int) -> Tuple[ScalarField, float]:
    x2 = u.axis(1)
    if gamma.empty:
        raise WindowOverflowError(f"interface left the window at t={u.t:g}")
    lo, hi = float(gamma.points[:, 1].min()), float(gamma.points[:, 1].max())
    if lo - x2[0] < guard_cells * u.h or x2[-1] - hi < guard_cells * u.h:
        raise WindowOverflowError(
            f"interface spans x2 in [{lo:.2f}, {hi:.2f}] but window is [{x2[0]:.2f}, {x2[-1]:.2f}] "
            f"at t={u.t:g} (guard {guard_cells} cells)")
    centre = 0.5 * (x2[0] + x2[-1])
    k = int(round((float(np.median(gamma.points[:, 1])) - centre) / u.h))
    if k == 0:
        return u, 0.0
    shifted = make_grid(u.shape, u.h, (u.origin[0], u.origin[1] + k * u.h), t=u.t)
    values = np.empty(u.shape)
    x1c, x2c = shifted.coords()
    if k > 0:
        values[:, :-k] = u.values[:, k:]
        values[:, -k:] = trace(u.t, x1c[:, -k:], x2c[:, -k:])
    else:
        values[:, -k:] = u.values[:, :k]
        values[:, :-k] = trace(u.t, x1c[:, :-k], x2c[:, :-k])
    return shifted.with_values(values), k * u.h


def build_nonstandard(f: Nonlinearity, alpha: float, n_start: float, t_end: float,
                      h: float = 0.25, half_width: float = 40.0, margin: float = 15.0,
                      snapshot_every: float = 2.0, recenter_every: float = 5.0,
                      min_clearance: float = 8.0, conical_half_width: float = 24.0,
                      profile: Optional[ProfileSolution] = None,
                      conical: Optional[ConicalFront] = None, relax_time: float = 400.0,
                      supersolution: Optional[Tuple[float, float, float]] = None,
                      guard_cells: int = 10, workers: Optional[int] = None,
                      keep_fields: bool = True) -> NonstandardRun:
    """
    Launch u(-n, x) = v(-n, -|x1|, x2) on the full plane and evolve to t_end.

    All four edges carry the lower planar bound as a time-dependent Dirichlet
    trace. Every `recenter_every` time units the window moves by whole rows so
    the median of the 1/2-level set sits at its centre; new rows are filled
    from the same bound.

    Raises:
        DomainError: c_f <= 0, alpha outside (pi/4, pi/2), or the left arm
            launches closer than min_clearance to x1 = 0
        WindowOverflowError: the interface came within guard_cells of the
            top or bottom edge
    """
    if not math.pi / 4 < alpha < math.pi / 2:
        raise DomainError(f"alpha must lie in (pi/4, pi/2) = (0.7854, 1.5708), got {alpha}")
    p = profile or solve_profile(f)
    if p.speed <= 0:
        raise DomainError(f"non-standard fronts need c_f > 0, got {p.speed:.6g}")
    if t_end <= -n_start:
        raise DomainError("t_end must come after the launch time -n")
    speed = p.speed / math.sin(alpha)
    apex_x = speed * n_start * math.cos(alpha)
    if apex_x < min_clearance:
        raise DomainError(f"left arm apex sits {apex_x:.2f} from x1 = 0 at t = -{n_start:g}; "
                          f"need >= {min_clearance:g} (increase n)")

    cf = conical or conical_front(p, alpha, conical_grid(alpha, conical_half_width, h), f,
                                  relax_time=relax_time, workers=workers)

    def trace(t, x1, x2):
        return lower_planar_bound(p, alpha, t, x1, x2)

    def edge_trace(t, coords):
        return trace(t, coords[:, 0], coords[:, 1])

    bc = BoundaryPolicy.uniform(EdgePolicy.dirichlet_profile(edge_trace))
    grid = _launch_window(p, alpha, n_start, h, half_width, margin)
    x1, x2 = grid.coords()
    u = grid.with_values(rotated_v_at(cf, -n_start, -np.abs(x1), x2))

    run = NonstandardRun(alpha=alpha, n_start=n_start, profile=p, conical=cf)
    history: List[ScalarField] = [u]
    t = -n_start
    logger.info(f"[FACTORY] non-standard front: alpha={alpha:.4f} n={n_start:g} grid={grid.shape} "
                f"h={h:g} window x2=[{grid.axis(1)[0]:.1f}, {grid.axis(1)[-1]:.1f}]")

    while t < t_end - 1e-12:
        chunk_end = min(t + recenter_every, t_end)
        k0 = math.floor((t - (-n_start)) / snapshot_every + 1e-9) + 1
        times = []
        while -n_start + k0 * snapshot_every < chunk_end - 1e-9:
            times.append(-n_start + k0 * snapshot_every)
            k0 += 1
        opts = EvolveOptions(t_end=chunk_end, snapshot_times=times, workers=workers)
        snaps = evolve(u, f, bc, opts)[1:]
        history.extend(snaps)
        u = snaps[-1]
        t = u.t
        gamma = extract_level_set(u, 0.5)
        u, moved = _recentre(u, gamma, trace, guard_cells)
        if moved:
            run.shifts.append((t, moved))
            history[-1] = u

    for before, after in zip(history[:-1], history[1:]):
        old, new = _aligned_rows(before, after)
        run.min_increment = min(run.min_increment, float(np.min(new - old)))
    run.lower_bound_excess = lower_bound_violation(history, p, alpha)
    if supersolution is not None:
        run.sandwich_excess = sandwich_violation(history, cf, *supersolution)

    run.level_sets = [extract_level_set(s, 0.5) for s in history]
    run.refs = [reference_interfaces(s.t, alpha, p.speed, half_width, spacing=h) for s in history]
    if keep_fields:
        run.snapshots = history
    else:
        run.snapshots = [history[0], history[-1]]
    logger.info(f"[FACTORY] [OK] non-standard front reached t={t:g}: {len(history)} snapshots, "
                f"window moved {run.cumulative_shift:.2f}, min increment {run.min_increment:.2e}, "
                f"lower-bound excess {run.lower_bound_excess:.2e}")
    return run


def compare_at_time(a: NonstandardRun, b: NonstandardRun, t: float) -> float:
    """sup |u_a(t) - u_b(t)| on the common rows of two runs."""
    ua, ub = a.snapshot_at(t), b.snapshot_at(t)
    va, vb = _aligned_rows(ua, ub)
    return float(np.max(np.abs(va - vb)))
