"""
Reaction terms f on [0, 1].

Provides the cubic bistable family, a quintic two-stage multistable family,
callable-backed custom terms, and `analyze`, which locates zeros numerically
and reports whether f satisfies f(0) = f(1) = 0, f'(0) < 0, f'(1) < 0 and
whether it is of bistable type.
"""

import logging
import re
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate, optimize

from errors import DomainError

# ============================================================================
# LOGGER SETUP
# ============================================================================

logger = logging.getLogger(__name__)

ZERO_GRID_CELLS = 10_000
ZERO_XTOL = 1e-12
DERIV_STEP = 1e-6

ArrayFn = Callable[[np.ndarray], np.ndarray]


# ============================================================================
# EVALUATORS
# ============================================================================

@dataclass(frozen=True)
class _FactoredPolynomial:
    """scale * prod(s - r). Zeros stay exact zeros in floating point."""
    scale: float
    roots: Tuple[float, ...]

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        out = np.full_like(s, self.scale)
        for r in self.roots:
            out = out * (s - r)
        return out

    def as_polynomial(self) -> Polynomial:
        return self.scale * Polynomial.fromroots(self.roots)


def _centered_difference(fn: ArrayFn, step: float = DERIV_STEP) -> ArrayFn:
    def deriv(s):
        s = np.asarray(s, dtype=float)
        return (fn(s + step) - fn(s - step)) / (2.0 * step)
    return deriv


# ============================================================================
# NONLINEARITY
# ============================================================================

@dataclass(frozen=True)
class Nonlinearity:
    """
    Immutable reaction term.

    `eval`/`deriv` accept scalars or arrays. Calling the object directly clamps
    the argument to [0, 1] first, which is what the PDE engine uses.
    """
    kind: str
    params: Tuple[float, ...]
    eval_fn: ArrayFn = field(repr=False, compare=False)
    deriv_fn: ArrayFn = field(repr=False, compare=False)
    zeros: Tuple[float, ...]
    integral01: float
    fprime0: float
    fprime1: float
    max_abs_deriv: float
    label: str = ""

    @property
    def theta_minus(self) -> Optional[float]:
        interior = [z for z in self.zeros if 0.0 < z < 1.0]
        return min(interior) if interior else None

    @property
    def theta_plus(self) -> Optional[float]:
        interior = [z for z in self.zeros if 0.0 < z < 1.0]
        return max(interior) if interior else None

    def eval(self, s):
        out = self.eval_fn(np.asarray(s, dtype=float))
        return float(out) if np.ndim(out) == 0 else out

    def deriv(self, s):
        out = self.deriv_fn(np.asarray(s, dtype=float))
        return float(out) if np.ndim(out) == 0 else out

    def __call__(self, s):
        return self.eval_fn(np.clip(np.asarray(s, dtype=float), 0.0, 1.0))

    def __str__(self) -> str:
        return self.label or self.kind


def _max_abs_deriv(deriv_fn: ArrayFn) -> float:
    samples = np.linspace(0.0, 1.0, 1001)
    return float(np.max(np.abs(deriv_fn(samples))))


def _from_polynomial(kind: str, params: Tuple[float, ...], poly: _FactoredPolynomial,
                     label: str) -> Nonlinearity:
    dpoly = poly.as_polynomial().deriv()
    antideriv = poly.as_polynomial().integ()
    return Nonlinearity(
        kind=kind,
        params=params,
        eval_fn=poly,
        deriv_fn=dpoly,
        zeros=tuple(sorted(poly.roots)),
        integral01=float(antideriv(1.0) - antideriv(0.0)),
        fprime0=float(dpoly(0.0)),
        fprime1=float(dpoly(1.0)),
        max_abs_deriv=_max_abs_deriv(dpoly),
        label=label,
    )


def make_cubic(theta: float) -> Nonlinearity:
    """f(s) = s(1-s)(s-theta), bistable for theta in (0, 1)."""
    theta = float(theta)
    if not 0.0 < theta < 1.0:
        raise DomainError(f"cubic: theta must lie in (0, 1), got {theta}")
    poly = _FactoredPolynomial(scale=-1.0, roots=(0.0, theta, 1.0))
    return _from_polynomial("cubic", (theta,), poly, f"cubic({theta:g})")


def make_quintic(theta1: float, theta2: float, k: float) -> Nonlinearity:
    """f(s) = -k s (s-theta1)(s-1/2)(s-theta2)(s-1), two stacked bistable pieces."""
    theta1, theta2, k = float(theta1), float(theta2), float(k)
    if not 0.0 < theta1 < 0.5 < theta2 < 1.0:
        raise DomainError(
            f"quintic: need 0 < theta1 < 1/2 < theta2 < 1, got theta1={theta1}, theta2={theta2}"
        )
    if k <= 0.0:
        raise DomainError(f"quintic: k must be positive, got {k}")
    poly = _FactoredPolynomial(scale=-k, roots=(0.0, theta1, 0.5, theta2, 1.0))
    return _from_polynomial("quintic", (theta1, theta2, k), poly,
                            f"quintic({theta1:g}, {theta2:g}, {k:g})")


def make_custom(eval_fn: ArrayFn, deriv_fn: Optional[ArrayFn] = None,
                label: str = "custom") -> Nonlinearity:
    """
    Wrap arbitrary callables.

    Args:
        eval_fn: vectorized s -> f(s) on [0, 1]
        deriv_fn: vectorized derivative; centered differences when omitted
        label: display name used in logs and reports
    """
    deriv_fn = deriv_fn or _centered_difference(eval_fn)
    zeros = locate_zeros(eval_fn)
    integral, _ = integrate.quad(lambda s: float(eval_fn(np.asarray(s))), 0.0, 1.0,
                                 epsabs=1e-13, epsrel=1e-12, limit=200)
    return Nonlinearity(
        kind="custom",
        params=(),
        eval_fn=eval_fn,
        deriv_fn=deriv_fn,
        zeros=tuple(zeros),
        integral01=float(integral),
        fprime0=float(deriv_fn(np.asarray(0.0))),
        fprime1=float(deriv_fn(np.asarray(1.0))),
        max_abs_deriv=_max_abs_deriv(deriv_fn),
        label=label,
    )


# ============================================================================
# DERIVED TERMS
# ============================================================================

def restrict(f: Nonlinearity, a: float, b: float) -> Nonlinearity:
    """
    Rescale the piece of f between zeros a < b onto [0, 1]:
    g(w) = f(a + (b - a) w) / (b - a). The front speed of g equals that of the
    piece, only the profile values are rescaled.
    """
    if not 0.0 <= a < b <= 1.0:
        raise DomainError(f"restrict: need 0 <= a < b <= 1, got [{a}, {b}]")
    width = b - a

    def to_s(w):
        w = np.asarray(w, dtype=float)
        # endpoint-exact affine map
        return a * (1.0 - w) + b * w

    def g(w):
        return f.eval_fn(to_s(w)) / width

    def dg(w):
        return f.deriv_fn(to_s(w))

    return make_custom(g, dg, label=f"{f}[{a:g},{b:g}]")


def reflect(f: Nonlinearity) -> Nonlinearity:
    """s -> 1 - s mirror: g(s) = -f(1 - s). Reverses the sign of the front speed."""
    def g(s):
        return -f.eval_fn(1.0 - np.asarray(s, dtype=float))

    def dg(s):
        return f.deriv_fn(1.0 - np.asarray(s, dtype=float))

    return make_custom(g, dg, label=f"reflect({f})")


def stable_zeros(f: Nonlinearity) -> List[float]:
    """Zeros with f' < 0, sorted."""
    return [z for z in f.zeros if f.deriv(z) < 0.0]


def parse_nonlinearity(text: str) -> Nonlinearity:
    """Parse `cubic(0.3)` or `quintic(0.2, 0.8, 8.0)`."""
    match = re.fullmatch(r"\s*(cubic|quintic)\s*\(([^()]*)\)\s*", text or "")
    if not match:
        raise DomainError(f"unrecognized nonlinearity {text!r}; use cubic(theta) or quintic(t1, t2, k)")
    kind, raw_args = match.group(1), match.group(2)
    try:
        args = [float(a) for a in raw_args.split(",") if a.strip()]
    except ValueError as exc:
        raise DomainError(f"non-numeric argument in {text!r}") from exc
    if kind == "cubic":
        if len(args) != 1:
            raise DomainError(f"cubic takes 1 argument, got {len(args)}")
        return make_cubic(*args)
    if len(args) != 3:
        raise DomainError(f"quintic takes 3 arguments, got {len(args)}")
    return make_quintic(*args)


# ============================================================================
# ANALYSIS
# ============================================================================

def locate_zeros(eval_fn: ArrayFn, cells: int = ZERO_GRID_CELLS,
                 xtol: float = ZERO_XTOL) -> List[float]:
    """Zeros on [0, 1]: exact grid zeros plus bisection in every sign-change cell."""
    grid = np.linspace(0.0, 1.0, cells + 1)
    values = np.asarray(eval_fn(grid), dtype=float)

    found = [float(x) for x in grid[values == 0.0]]
    changes = np.nonzero(values[:-1] * values[1:] < 0.0)[0]
    scalar = lambda s: float(eval_fn(np.asarray(s)))
    for i in changes:
        found.append(float(optimize.bisect(scalar, grid[i], grid[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps)))

    zeros: List[float] = []
    for z in sorted(found):
        if not zeros or z - zeros[-1] > 10 * xtol:
            zeros.append(z)
    return zeros


@dataclass
class NonlinearityReport:
    zeros: List[float]
    theta_minus: Optional[float]
    theta_plus: Optional[float]
    integral01: float
    fprime0: float
    fprime1: float
    is_hypothesis_f: bool
    is_bistable: bool

    def summary(self) -> str:
        return (f"zeros={['%.6g' % z for z in self.zeros]} f'(0)={self.fprime0:.6g} "
                f"f'(1)={self.fprime1:.6g} int={self.integral01:.6g} "
                f"(f)={self.is_hypothesis_f} bistable={self.is_bistable}")


def analyze(f: Nonlinearity) -> NonlinearityReport:
    """
    Locate zeros independently of the construction and classify f.

    Never raises for a failed hypothesis; flags are reported instead.
    """
    zeros = locate_zeros(f.eval_fn)
    interior = [z for z in zeros if 0.0 < z < 1.0]
    fprime0 = float(f.deriv(0.0))
    fprime1 = float(f.deriv(1.0))

    endpoints_zero = abs(f.eval(0.0)) <= 1e-12 and abs(f.eval(1.0)) <= 1e-12
    is_hypothesis_f = bool(endpoints_zero and fprime0 < 0.0 and fprime1 < 0.0)

    is_bistable = False
    if is_hypothesis_f and len(interior) == 1:
        theta = interior[0]
        grid = np.linspace(0.0, 1.0, ZERO_GRID_CELLS + 1)[1:-1]
        values = np.asarray(f.eval_fn(grid))
        below = (grid < theta - 1e-9)
        above = (grid > theta + 1e-9)
        is_bistable = bool(np.all(values[below] < 0.0) and np.all(values[above] > 0.0))

    report = NonlinearityReport(
        zeros=zeros,
        theta_minus=min(interior) if interior else None,
        theta_plus=max(interior) if interior else None,
        integral01=f.integral01,
        fprime0=fprime0,
        fprime1=fprime1,
        is_hypothesis_f=is_hypothesis_f,
        is_bistable=is_bistable,
    )
    logger.debug(f"[NONLINEARITY] {f}: {report.summary()}")
    return report
