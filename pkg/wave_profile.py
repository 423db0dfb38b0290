"""
Planar traveling fronts phi'' + c phi' + f(phi) = 0, phi(-inf) = 1, phi(+inf) = 0.

The speed is found by shooting from the unstable manifold of (1, 0) and
bisecting on c: trajectories that hit phi = 0 while descending mean c is too
small, trajectories that turn around (phi' = 0) inside (0, 1) mean c is too
large. The sampled profile is normalized so that phi(0) = 1/2 and is extended
by its exact exponential tails. Below a small level the profile follows the
stable manifold of (0, 0), traced backward from its linear eigendirection.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from scipy import integrate, optimize
from scipy.interpolate import PchipInterpolator

from errors import DomainError, NoConnectionError
from nonlinearity import Nonlinearity, analyze, restrict, stable_zeros

logger = logging.getLogger(__name__)

LAUNCH_OFFSET = 1e-6
SAMPLE_STEP = 0.005
TAIL_LEVEL = 1e-9
TAIL_LAUNCH = 1e-10
MATCH_LEVEL = 1e-3
XI_MAX = 2000.0
ODE_RTOL = 1e-11
ODE_ATOL = 1e-14

TOO_SMALL = -1
TOO_LARGE = 1


# ============================================================================
# PROFILE SOLUTION
# ============================================================================

@dataclass
class ProfileSolution:
    """Speed, samples on [-window, window] and exponential tail rates of a front."""
    speed: float
    xi: np.ndarray
    phi: np.ndarray
    lam: float
    mu: float
    window: float
    label: str = ""
    bracket: Tuple[float, float] = (float("nan"), float("nan"))

    @cached_property
    def _interpolant(self) -> PchipInterpolator:
        return PchipInterpolator(self.xi, self.phi, extrapolate=False)

    @cached_property
    def _tail_coefficients(self) -> Tuple[float, float]:
        left = (1.0 - self.phi[0]) * math.exp(self.mu * self.window)
        right = self.phi[-1] * math.exp(self.lam * self.window)
        return left, right

    def __call__(self, xi):
        return eval_profile(self, xi)


def decay_rates(f: Nonlinearity, c: float) -> Tuple[float, float]:
    """Tail rates: phi ~ e^{-lam xi} at +inf and 1 - phi ~ e^{mu xi} at -inf."""
    lam = 0.5 * (c + math.sqrt(c * c - 4.0 * f.fprime0))
    mu = 0.5 * (-c + math.sqrt(c * c - 4.0 * f.fprime1))
    return lam, mu


def eval_profile(p: ProfileSolution, xi):
    """
    Evaluate phi at arbitrary abscissae.

    Monotone cubic interpolation inside the window, exact exponential tails
    outside; the result is always inside the open interval (0, 1).
    """
    xi_arr = np.asarray(xi, dtype=float)
    flat = xi_arr.ravel()
    out = np.empty_like(flat)

    left_coef, right_coef = p._tail_coefficients
    inside = (flat >= -p.window) & (flat <= p.window)
    left = flat < -p.window
    right = flat > p.window

    out[inside] = p._interpolant(flat[inside])
    with np.errstate(over="ignore", under="ignore"):
        out[left] = 1.0 - left_coef * np.exp(p.mu * flat[left])
        out[right] = right_coef * np.exp(-p.lam * flat[right])
    out = np.nan_to_num(out, nan=0.5)
    np.clip(out, np.finfo(float).tiny, np.nextafter(1.0, 0.0), out=out)

    out = out.reshape(xi_arr.shape)
    return float(out) if out.ndim == 0 else out


def invert_profile(p: ProfileSolution, level: float) -> float:
    """Abscissa where phi equals `level`."""
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must lie in (0, 1), got {level}")
    left_coef, right_coef = p._tail_coefficients
    if level >= p.phi[0]:
        return math.log((1.0 - level) / left_coef) / p.mu
    if level <= p.phi[-1]:
        return -math.log(level / right_coef) / p.lam
    return float(optimize.brentq(lambda s: float(p._interpolant(s)) - level,
                                 -p.window, p.window, xtol=1e-13))


# ============================================================================
# SHOOTING
# ============================================================================

def _rhs(f: Nonlinearity, c: float) -> Callable:
    def rhs(_xi, y):
        return [y[1], -c * y[1] - f.eval(y[0])]
    return rhs


def _shoot(f: Nonlinearity, c: float, dense: bool = False):
    """Integrate from the unstable manifold of (1, 0) until a classifying event."""
    mu = 0.5 * (-c + math.sqrt(c * c - 4.0 * f.fprime1))
    y0 = [1.0 - LAUNCH_OFFSET, -LAUNCH_OFFSET * mu]

    def hits_zero(_xi, y):
        return y[0]
    hits_zero.terminal = True
    hits_zero.direction = -1

    def turns(_xi, y):
        return y[1]
    turns.terminal = True
    turns.direction = 1

    return integrate.solve_ivp(
        _rhs(f, c), (0.0, XI_MAX), y0, method="DOP853",
        rtol=ODE_RTOL, atol=ODE_ATOL, events=(hits_zero, turns), dense_output=dense,
    )


def _stable_branch(f: Nonlinearity, c: float, lam: float, phi_match: float):
    """Stable manifold of (0, 0) traced backward in xi from TAIL_LAUNCH up to 2 phi_match."""
    def reaches(_xi, y):
        return y[0] - 2.0 * phi_match
    reaches.terminal = True

    sol = integrate.solve_ivp(
        _rhs(f, c), (0.0, -XI_MAX), [TAIL_LAUNCH, -lam * TAIL_LAUNCH], method="DOP853",
        rtol=ODE_RTOL, atol=ODE_ATOL * TAIL_LAUNCH, events=reaches, dense_output=True,
    )
    if not sol.t_events[0].size:
        raise NoConnectionError(f"stable branch of (0, 0) never reaches phi={2.0 * phi_match:.3g}")
    return sol


def _classify(f: Nonlinearity, c: float) -> int:
    sol = _shoot(f, c)
    if sol.t_events[0].size:
        return TOO_SMALL
    if sol.t_events[1].size:
        return TOO_LARGE
    # stalled near the saddle at the origin: read the unstable component
    phi, q = sol.y[:, -1]
    root = math.sqrt(c * c - 4.0 * f.fprime0)
    m_unstable, m_stable = 0.5 * (-c + root), 0.5 * (-c - root)
    b = (q - m_stable * phi) / (m_unstable - m_stable)
    return TOO_LARGE if b > 0.0 else TOO_SMALL


def _bisect_speed(f: Nonlinearity, tol: float) -> Tuple[float, float]:
    c_max = 2.0 * math.sqrt(f.max_abs_deriv)
    lo, hi = -c_max, c_max
    if _classify(f, lo) != TOO_SMALL or _classify(f, hi) != TOO_LARGE:
        raise NoConnectionError()
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _classify(f, mid) == TOO_SMALL:
            lo = mid
        else:
            hi = mid
    return lo, hi


def solve_profile(f: Nonlinearity, tol: float = 1e-10) -> ProfileSolution:
    """
    Speed and profile of the front connecting 1 to 0.

    Args:
        f: bistable nonlinearity
        tol: final width of the bisection bracket on c

    Raises:
        DomainError: f is not bistable (use subfront_speeds)
        NoConnectionError: the bracket [-c_max, c_max] does not change class
    """
    if tol <= 0:
        raise DomainError(f"tol must be positive, got {tol}")
    report = analyze(f)
    if not report.is_bistable:
        raise DomainError(f"{f} is not bistable; use subfront_speeds for multistable terms")

    lo, hi = _bisect_speed(f, tol)
    c = 0.5 * (lo + hi)
    lam, mu = decay_rates(f, c)

    sol_lo = _shoot(f, lo, dense=True)
    sol_hi = _shoot(f, hi, dense=True)
    sol = _shoot(f, c, dense=True)

    # trust the trajectory while both bracket ends still agree with it
    xi_end = min(sol.t[-1], sol_lo.t[-1], sol_hi.t[-1])
    samples = np.arange(0.0, xi_end, SAMPLE_STEP)
    phi_mid = sol.sol(samples)[0]
    spread = np.abs(sol_lo.sol(samples)[0] - sol_hi.sol(samples)[0])
    bad = (phi_mid < 1e-8) | (spread > 1e-4 * np.maximum(phi_mid, 1e-300)) | (phi_mid <= 0.0)
    bad &= phi_mid < 0.5
    cut_index = int(np.argmax(bad)) if bad.any() else samples.size - 1
    xi_cut = float(samples[max(cut_index - 1, 1)])
    phi_cut = float(sol.sol(xi_cut)[0])

    xi_half = float(optimize.brentq(lambda s: sol.sol(s)[0] - 0.5, 0.0, xi_cut, xtol=1e-14))

    # below MATCH_LEVEL the profile follows the stable manifold of (0, 0)
    phi_match = min(MATCH_LEVEL, phi_cut)
    if phi_match < phi_cut:
        xi_match = float(optimize.brentq(lambda s: sol.sol(s)[0] - phi_match, xi_half, xi_cut,
                                         xtol=1e-14))
    else:
        xi_match = xi_cut
    tail = _stable_branch(f, c, lam, phi_match)
    tau_match = float(optimize.brentq(lambda s: tail.sol(s)[0] - phi_match, tail.t[-1], 0.0,
                                      xtol=1e-14))

    def trajectory(s):
        s = np.asarray(s, dtype=float)
        out = np.empty_like(s)
        left = s < 0.0
        right = s > xi_match
        mid = ~(left | right)
        out[left] = 1.0 - LAUNCH_OFFSET * np.exp(mu * s[left])
        out[mid] = sol.sol(s[mid])[0]
        tau = tau_match + (s[right] - xi_match)
        on_branch = tau <= 0.0
        branch = np.empty_like(tau)
        branch[on_branch] = tail.sol(tau[on_branch])[0]
        branch[~on_branch] = TAIL_LAUNCH * np.exp(-lam * tau[~on_branch])
        out[right] = branch
        return out

    # window: both tails below TAIL_LEVEL
    reach_left = xi_half + math.log(LAUNCH_OFFSET / TAIL_LEVEL) / mu
    reach_right = (xi_match - xi_half) + math.log(phi_match / TAIL_LEVEL) / lam
    window = max(reach_left, reach_right)
    k = int(math.ceil(window / SAMPLE_STEP))
    window = k * SAMPLE_STEP
    xi = np.arange(-k, k + 1) * SAMPLE_STEP
    phi = trajectory(xi + xi_half)
    phi[k] = 0.5

    logger.info(f"[PROFILE] [OK] {f}: c_f={c:.10f} lambda={lam:.6f} mu={mu:.6f} window={window:.2f}")
    return ProfileSolution(speed=c, xi=xi, phi=phi, lam=lam, mu=mu, window=window,
                           label=str(f), bracket=(lo, hi))


def profile_residual(p: ProfileSolution, f: Nonlinearity) -> float:
    """Sup-norm of the centered second-order residual of the profile ODE."""
    step = p.xi[1] - p.xi[0]
    phi = p.phi
    second = (phi[2:] - 2.0 * phi[1:-1] + phi[:-2]) / step ** 2
    first = (phi[2:] - phi[:-2]) / (2.0 * step)
    return float(np.max(np.abs(second + p.speed * first + f.eval(phi[1:-1]))))


def cubic_closed_form(theta: float) -> Tuple[float, Callable]:
    """Exact cubic wave: speed (1 - 2 theta)/sqrt(2), profile 1/(1 + e^{xi/sqrt(2)})."""
    speed = (1.0 - 2.0 * theta) / math.sqrt(2.0)

    def phi(xi):
        return 0.5 * (1.0 - np.tanh(np.asarray(xi, dtype=float) / (2.0 * math.sqrt(2.0))))

    return speed, phi


# ============================================================================
# HOMOGENEOUS FLOW
# ============================================================================

def ode_flow(f: Nonlinearity, theta: float, t):
    """Solution of rho' = f(rho), rho(0) = theta, at time(s) t >= 0."""
    if not 0.0 < theta < 1.0:
        raise DomainError(f"initial value must lie in (0, 1), got {theta}")
    times = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(times < 0):
        raise DomainError("ode_flow needs t >= 0")
    t_end = float(times.max())
    if t_end == 0.0:
        values = np.full(times.shape, theta)
    else:
        sol = integrate.solve_ivp(lambda _s, y: f.eval(y), (0.0, t_end), [theta],
                                  method="DOP853", rtol=1e-12, atol=1e-15, dense_output=True)
        values = np.clip(sol.sol(times)[0], 0.0, 1.0)
    return float(values[0]) if np.ndim(t) == 0 else values


# ============================================================================
# MULTISTABLE TERMS
# ============================================================================

@dataclass
class SubfrontLadder:
    intervals: List[Tuple[float, float]]
    speeds: List[float]
    profiles: List[ProfileSolution] = field(default_factory=list, repr=False)

    @property
    def single_front_possible(self) -> bool:
        """Sub-front speeds strictly increase from the bottom piece to the top one."""
        return all(a < b for a, b in zip(self.speeds, self.speeds[1:]))

    @property
    def terrace(self) -> bool:
        return not self.single_front_possible


def subfront_speeds(f: Nonlinearity, tol: float = 1e-10) -> SubfrontLadder:
    """Front speed of every bistable piece between consecutive stable zeros, bottom to top."""
    stable = stable_zeros(f)
    if len(stable) < 2:
        raise DomainError(f"{f} has fewer than two stable zeros")
    ladder = SubfrontLadder(intervals=[], speeds=[])
    for a, b in zip(stable, stable[1:]):
        piece = restrict(f, a, b)
        profile = solve_profile(piece, tol)
        ladder.intervals.append((a, b))
        ladder.speeds.append(profile.speed)
        ladder.profiles.append(profile)
        logger.info(f"[PROFILE] sub-front on [{a:.4g}, {b:.4g}]: speed={profile.speed:.8f}")
    logger.info(f"[PROFILE] {f}: single front possible={ladder.single_front_possible}")
    return ladder


# ============================================================================
# CSV I/O
# ============================================================================

def write_profile_csv(p: ProfileSolution, path: Union[str, Path]) -> Path:
    """Columns xi, phi; first line `# c_f=<v> lambda=<v> mu=<v>`."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(f"# c_f={p.speed:.12g} lambda={p.lam:.12g} mu={p.mu:.12g}\n")
        pd.DataFrame({"xi": p.xi, "phi": p.phi}).to_csv(handle, index=False, float_format="%.15g")
    return path


def read_profile_csv(path: Union[str, Path]) -> ProfileSolution:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as handle:
        header = handle.readline().lstrip("#").split()
    meta = dict(item.split("=", 1) for item in header)
    frame = pd.read_csv(path, comment="#")
    xi = frame["xi"].to_numpy(dtype=float)
    return ProfileSolution(speed=float(meta["c_f"]), xi=xi, phi=frame["phi"].to_numpy(dtype=float),
                           lam=float(meta["lambda"]), mu=float(meta["mu"]),
                           window=float(xi[-1]), label=path.stem)
