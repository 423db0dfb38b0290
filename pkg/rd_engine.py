"""
Explicit finite-difference integrator for u_t = Lap(u) + c d_{x2} u + f(u).

Grids are uniform with the same spacing on every axis. Axis 0 is x1 and axis 1
is x2; in 1D the drift acts along the single axis. Boundary values enter
through one layer of ghost nodes filled from the per-edge policy before each
step. Row blocks of the update run on a thread pool; every node is computed
by the same elementwise formula, so results do not depend on the partition.
"""

import logging
import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from errors import CFLError, DomainError, EvolutionError, GeometryError
from nonlinearity import Nonlinearity

logger = logging.getLogger(__name__)

CFL_SAFETY = 0.9
FLAB_MAGIC = b"FLAB1"

EDGES_1D = ("left", "right")
EDGES_2D = ("left", "right", "bottom", "top")


# ============================================================================
# FIELDS
# ============================================================================

@dataclass
class ScalarField:
    """Node values of u(t, .) on a uniform grid; origin is the first node."""
    values: np.ndarray
    h: float
    origin: Tuple[float, ...]
    t: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.origin = tuple(float(o) for o in np.atleast_1d(self.origin))
        if self.values.ndim not in (1, 2):
            raise DomainError(f"only 1D and 2D grids are supported, got ndim={self.values.ndim}")
        if len(self.origin) != self.values.ndim:
            raise DomainError("origin length must match the grid dimension")
        if self.h <= 0:
            raise DomainError(f"spacing must be positive, got {self.h}")

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.values.shape

    def axis(self, k: int) -> np.ndarray:
        return self.origin[k] + self.h * np.arange(self.shape[k])

    def axes(self) -> List[np.ndarray]:
        return [self.axis(k) for k in range(self.dim)]

    def coords(self) -> Tuple[np.ndarray, ...]:
        """Node coordinates, one array per axis, indexing 'ij'."""
        return tuple(np.meshgrid(*self.axes(), indexing="ij"))

    def extent(self) -> Tuple[Tuple[float, float], ...]:
        return tuple((a[0], a[-1]) for a in self.axes())

    def with_values(self, values: np.ndarray, t: Optional[float] = None) -> "ScalarField":
        return ScalarField(values=values, h=self.h, origin=self.origin,
                           t=self.t if t is None else t)

    def copy(self) -> "ScalarField":
        return self.with_values(self.values.copy())

    def same_grid(self, other: "ScalarField") -> bool:
        return (self.shape == other.shape and math.isclose(self.h, other.h)
                and np.allclose(self.origin, other.origin, atol=1e-12 * max(1.0, self.h)))


def make_grid(shape: Sequence[int], h: float, origin: Sequence[float], t: float = 0.0,
              fill: float = 0.0) -> ScalarField:
    return ScalarField(values=np.full(tuple(int(n) for n in shape), float(fill)), h=h,
                       origin=tuple(origin), t=t)


# ============================================================================
# BOUNDARY POLICY
# ============================================================================

Trace = Union[np.ndarray, Callable[[float, np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class EdgePolicy:
    """
    One edge condition.

    neumann_zero mirrors about the edge node. dirichlet_farfield holds the
    ghost at a constant limit. dirichlet_profile takes the ghost from a trace:
    a frozen array, a callable trace(t, ghost_coords), or None (frozen from
    the initial field's edge values).
    """
    kind: str
    limit: float = 0.0
    trace: Optional[Trace] = field(default=None, compare=False)

    @classmethod
    def neumann_zero(cls) -> "EdgePolicy":
        return cls("neumann_zero")

    @classmethod
    def dirichlet_farfield(cls, limit: float) -> "EdgePolicy":
        if limit not in (0.0, 1.0):
            raise DomainError(f"far-field limit must be 0 or 1, got {limit}")
        return cls("dirichlet_farfield", limit=float(limit))

    @classmethod
    def dirichlet_profile(cls, trace: Optional[Trace] = None) -> "EdgePolicy":
        return cls("dirichlet_profile", trace=trace)


@dataclass
class BoundaryPolicy:
    left: EdgePolicy = field(default_factory=EdgePolicy.neumann_zero)
    right: EdgePolicy = field(default_factory=EdgePolicy.neumann_zero)
    bottom: EdgePolicy = field(default_factory=EdgePolicy.neumann_zero)
    top: EdgePolicy = field(default_factory=EdgePolicy.neumann_zero)

    @classmethod
    def uniform(cls, policy: EdgePolicy) -> "BoundaryPolicy":
        return cls(left=policy, right=policy, bottom=policy, top=policy)

    def edge(self, name: str) -> EdgePolicy:
        return getattr(self, name)


@dataclass
class EvolveOptions:
    dt: Optional[float] = None
    t_end: float = 1.0
    drift: float = 0.0
    snapshot_every: Optional[float] = None
    snapshot_times: Optional[Sequence[float]] = None
    clamp: bool = True
    workers: Optional[int] = None
    keep_snapshots: bool = True
    on_snapshot: Optional[Callable[[ScalarField], None]] = field(default=None, repr=False)


def cfl_limit(h: float, dim: int, f: Nonlinearity, drift: float = 0.0) -> float:
    """Largest monotone explicit step: 0.9 h^2 / (2 dim + |c| h + h^2 max|f'|)."""
    return CFL_SAFETY * h * h / (2.0 * dim + abs(drift) * h + h * h * f.max_abs_deriv)


# ============================================================================
# STEPPER
# ============================================================================

class _Stepper:
    """Double-buffered explicit Euler update on a padded array."""

    def __init__(self, u0: ScalarField, f: Nonlinearity, bc: BoundaryPolicy,
                 drift: float, clamp: bool, workers: int):
        self.grid = u0
        self.f = f
        self.bc = bc
        self.drift = float(drift)
        self.clamp = clamp
        self.dim = u0.dim
        self.h = u0.h
        self.inv_h2 = 1.0 / (u0.h * u0.h)
        self.padded = np.zeros(tuple(n + 2 for n in u0.shape))
        self.workers = max(1, int(workers))
        self.blocks = self._row_blocks(u0.shape[0], self.workers)
        self.pool = ThreadPoolExecutor(max_workers=self.workers) if self.workers > 1 else None

        self.edges = EDGES_1D if self.dim == 1 else EDGES_2D
        self.ghost_coords: Dict[str, np.ndarray] = {e: self._ghost_coords(e) for e in self.edges}
        self.frozen: Dict[str, np.ndarray] = {e: self._edge_values(u0.values, e).copy()
                                              for e in self.edges}

    @staticmethod
    def _row_blocks(n: int, workers: int) -> List[Tuple[int, int]]:
        bounds = np.linspace(0, n, min(workers, n) + 1).astype(int)
        return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]

    def close(self):
        if self.pool is not None:
            self.pool.shutdown(wait=True)

    # -- ghosts -------------------------------------------------------------

    @staticmethod
    def _edge_values(values: np.ndarray, edge: str) -> np.ndarray:
        return {"left": values[0], "right": values[-1],
                "bottom": values[:, 0] if values.ndim == 2 else None,
                "top": values[:, -1] if values.ndim == 2 else None}[edge]

    def _ghost_coords(self, edge: str) -> np.ndarray:
        axes = self.grid.axes()
        h = self.h
        if self.dim == 1:
            x = axes[0][0] - h if edge == "left" else axes[0][-1] + h
            return np.array([[x]])
        if edge in ("left", "right"):
            x1 = axes[0][0] - h if edge == "left" else axes[0][-1] + h
            return np.column_stack([np.full_like(axes[1], x1), axes[1]])
        x2 = axes[1][0] - h if edge == "bottom" else axes[1][-1] + h
        return np.column_stack([axes[0], np.full_like(axes[0], x2)])

    def _ghost_values(self, edge: str, t: float, interior: np.ndarray) -> np.ndarray:
        policy = self.bc.edge(edge)
        if policy.kind == "neumann_zero":
            return {"left": interior[1], "right": interior[-2],
                    "bottom": interior[:, 1] if self.dim == 2 else None,
                    "top": interior[:, -2] if self.dim == 2 else None}[edge]
        if policy.kind == "dirichlet_farfield":
            return policy.limit
        if policy.kind == "dirichlet_profile":
            if policy.trace is None:
                return self.frozen[edge]
            if callable(policy.trace):
                coords = self.ghost_coords[edge]
                values = np.asarray(policy.trace(t, coords), dtype=float)
                return values.reshape(-1)[0] if self.dim == 1 else values
            return np.asarray(policy.trace, dtype=float)
        raise DomainError(f"unknown boundary policy {policy.kind!r} on edge {edge}")

    def fill_ghosts(self, values: np.ndarray, t: float):
        p = self.padded
        if self.dim == 1:
            p[1:-1] = values
            p[0] = self._ghost_values("left", t, values)
            p[-1] = self._ghost_values("right", t, values)
            return
        p[1:-1, 1:-1] = values
        p[0, 1:-1] = self._ghost_values("left", t, values)
        p[-1, 1:-1] = self._ghost_values("right", t, values)
        p[1:-1, 0] = self._ghost_values("bottom", t, values)
        p[1:-1, -1] = self._ghost_values("top", t, values)

    # -- update -------------------------------------------------------------

    def _update_block(self, out: np.ndarray, values: np.ndarray, dt: float, i0: int, i1: int):
        p = self.padded
        c = self.drift
        if self.dim == 1:
            centre = p[i0 + 1:i1 + 1]
            plus, minus = p[i0 + 2:i1 + 2], p[i0:i1]
            lap = (plus + minus - 2.0 * centre) * self.inv_h2
            upwind = plus - centre if c > 0 else centre - minus
        else:
            centre = p[i0 + 1:i1 + 1, 1:-1]
            lap = (p[i0 + 2:i1 + 2, 1:-1] + p[i0:i1, 1:-1]
                   + p[i0 + 1:i1 + 1, 2:] + p[i0 + 1:i1 + 1, :-2]
                   - 4.0 * centre) * self.inv_h2
            if c > 0:
                upwind = p[i0 + 1:i1 + 1, 2:] - centre
            else:
                upwind = centre - p[i0 + 1:i1 + 1, :-2]
        rate = lap + self.f(values[i0:i1])
        if c != 0.0:
            rate = rate + (c / self.h) * upwind
        block = values[i0:i1] + dt * rate
        if self.clamp:
            np.clip(block, 0.0, 1.0, out=block)
        out[i0:i1] = block

    def step(self, values: np.ndarray, t: float, dt: float) -> np.ndarray:
        self.fill_ghosts(values, t)
        out = np.empty_like(values)
        if self.pool is None:
            self._update_block(out, values, dt, 0, values.shape[0])
        else:
            futures = [self.pool.submit(self._update_block, out, values, dt, a, b)
                       for a, b in self.blocks]
            for fut in futures:
                fut.result()
        return out


def _snapshot_schedule(t0: float, opts: EvolveOptions) -> List[float]:
    if opts.t_end < t0:
        raise DomainError(f"t_end={opts.t_end} precedes the initial time {t0}")
    times = set()
    if opts.snapshot_times is not None:
        times.update(float(s) for s in opts.snapshot_times if t0 < s < opts.t_end)
    elif opts.snapshot_every:
        k = 1
        while t0 + k * opts.snapshot_every < opts.t_end - 1e-12:
            times.add(t0 + k * opts.snapshot_every)
            k += 1
    times.add(float(opts.t_end))
    return sorted(times)


def _default_workers() -> int:
    from lab_config import get_settings
    return get_settings().threads


def evolve(u0: ScalarField, f: Nonlinearity, bc: BoundaryPolicy,
           opts: EvolveOptions) -> List[ScalarField]:
    """
    Integrate from u0 to opts.t_end.

    Returns the initial field followed by one snapshot per requested time and
    the final state. Each interval between snapshot times is split into equal
    steps no longer than opts.dt, so snapshots land exactly on their times.

    Raises:
        CFLError: opts.dt above cfl_limit (checked before any step)
        EvolutionError: a non-finite value appeared
    """
    limit = cfl_limit(u0.h, u0.dim, f, opts.drift)
    dt = limit if opts.dt is None else float(opts.dt)
    if dt <= 0 or dt > limit * (1.0 + 1e-12):
        raise CFLError(dt, limit)

    workers = opts.workers if opts.workers is not None else _default_workers()
    stepper = _Stepper(u0, f, bc, opts.drift, opts.clamp, workers)
    schedule = _snapshot_schedule(u0.t, opts)

    snapshots: List[ScalarField] = []

    def emit(field_: ScalarField):
        if opts.keep_snapshots:
            snapshots.append(field_)
        if opts.on_snapshot is not None:
            opts.on_snapshot(field_)

    emit(u0.copy())
    values = u0.values.copy()
    t = u0.t
    total_steps = 0
    try:
        for target in schedule:
            if target <= t:
                continue
            span = target - t
            n_steps = max(1, int(math.ceil(span / dt - 1e-9))) if span > 0 else 0
            step_dt = span / n_steps if n_steps else 0.0
            for k in range(n_steps):
                values = stepper.step(values, t, step_dt)
                t = target if k == n_steps - 1 else t + step_dt
                if not np.isfinite(values).all():
                    bad = np.unravel_index(int(np.argmax(~np.isfinite(values))), values.shape)
                    position = [u0.axis(a)[i] for a, i in enumerate(bad)]
                    raise EvolutionError(bad, position, t)
            total_steps += n_steps
            emit(u0.with_values(values.copy(), t=target))
    finally:
        stepper.close()

    logger.debug(f"[ENGINE] {u0.dim}D {u0.shape} h={u0.h:g} dt<={dt:.3e} drift={opts.drift:.6g}: "
                 f"{total_steps} steps to t={t:.4g} with {stepper.workers} worker(s)")
    return snapshots


def evolve_half_plane(u0: ScalarField, f: Nonlinearity, opts: EvolveOptions,
                      bc: Optional[BoundaryPolicy] = None) -> List[ScalarField]:
    """
    Evolve on {x1 <= 0} with a zero-flux condition on x1 = 0.

    The right edge of u0 must be the line x1 = 0. Other edges follow `bc`
    (frozen Dirichlet traces by default).
    """
    if u0.dim != 2:
        raise DomainError("half-plane evolution needs a 2D field")
    right = u0.axis(0)[-1]
    if abs(right) > 1e-9 * max(1.0, u0.h):
        raise DomainError(f"right edge must be x1 = 0, got x1 = {right:.6g}")
    frozen = EdgePolicy.dirichlet_profile()
    bc = replace(bc) if bc is not None else BoundaryPolicy(left=frozen, bottom=frozen, top=frozen)
    bc.right = EdgePolicy.neumann_zero()
    return evolve(u0, f, bc, opts)


# ============================================================================
# RESIDUAL
# ============================================================================

def pde_residual(history: Sequence[ScalarField], f: Nonlinearity, drift: float = 0.0) -> ScalarField:
    """
    Residual u_t - Lap(u) - c d_{x2} u - f(u) at interior nodes of the middle
    snapshot, all derivatives centered. The returned field lives on the interior
    grid (origin shifted one cell inward).
    """
    if len(history) != 3:
        raise DomainError("pde_residual needs exactly three snapshots")
    u0, u1, u2 = history
    if not (u0.same_grid(u1) and u1.same_grid(u2)):
        raise GeometryError("snapshots are not on the same grid")
    dt_a, dt_b = u1.t - u0.t, u2.t - u1.t
    if dt_a <= 0 or not math.isclose(dt_a, dt_b, rel_tol=1e-9, abs_tol=1e-14):
        raise DomainError(f"snapshots must be equally spaced in time (got {dt_a:g}, {dt_b:g})")

    h2 = u1.h * u1.h
    v = u1.values
    if u1.dim == 1:
        inner = (slice(1, -1),)
        u_t = (u2.values[1:-1] - u0.values[1:-1]) / (2.0 * dt_a)
        lap = (v[2:] + v[:-2] - 2.0 * v[1:-1]) / h2
        drift_term = (v[2:] - v[:-2]) / (2.0 * u1.h)
    else:
        inner = (slice(1, -1), slice(1, -1))
        u_t = (u2.values[inner] - u0.values[inner]) / (2.0 * dt_a)
        lap = (v[2:, 1:-1] + v[:-2, 1:-1] + v[1:-1, 2:] + v[1:-1, :-2] - 4.0 * v[1:-1, 1:-1]) / h2
        drift_term = (v[1:-1, 2:] - v[1:-1, :-2]) / (2.0 * u1.h)
    residual = u_t - lap - drift * drift_term - f.eval(v[inner])
    origin = tuple(o + u1.h for o in u1.origin)
    return ScalarField(values=residual, h=u1.h, origin=origin, t=u1.t)


# ============================================================================
# PERSISTENCE
# ============================================================================

def save_field(u: ScalarField, path: Union[str, Path]) -> Path:
    """FLAB1 binary: magic, dim, shape, h, origin, t, then little-endian float64 nodes."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = FLAB_MAGIC + struct.pack("<B", u.dim) + struct.pack(f"<{u.dim}q", *u.shape)
    header += struct.pack("<d", u.h) + struct.pack(f"<{u.dim}d", *u.origin) + struct.pack("<d", u.t)
    with open(path, "wb") as handle:
        handle.write(header)
        handle.write(np.ascontiguousarray(u.values, dtype="<f8").tobytes())
    return path


def load_field(path: Union[str, Path]) -> ScalarField:
    data = Path(path).read_bytes()
    if not data.startswith(FLAB_MAGIC):
        raise DomainError(f"{path}: not a FLAB1 snapshot")
    pos = len(FLAB_MAGIC)
    (dim,) = struct.unpack_from("<B", data, pos)
    pos += 1
    shape = struct.unpack_from(f"<{dim}q", data, pos)
    pos += 8 * dim
    (h,) = struct.unpack_from("<d", data, pos)
    pos += 8
    origin = struct.unpack_from(f"<{dim}d", data, pos)
    pos += 8 * dim
    (t,) = struct.unpack_from("<d", data, pos)
    pos += 8
    values = np.frombuffer(data, dtype="<f8", offset=pos).reshape(shape).astype(float)
    return ScalarField(values=values, h=h, origin=origin, t=t)


def load_snapshot_dir(directory: Union[str, Path]) -> List[ScalarField]:
    """All *.flab files of a directory, sorted by time."""
    fields = [load_field(p) for p in sorted(Path(directory).glob("*.flab"))]
    return sorted(fields, key=lambda u: u.t)


def write_snapshots(snapshots: Sequence[ScalarField], directory: Union[str, Path]) -> List[Path]:
    directory = Path(directory)
    return [save_field(u, directory / f"snap_{k:05d}.flab") for k, u in enumerate(snapshots)]


def field_to_csv(u: ScalarField, path: Union[str, Path]) -> Path:
    """1D export: header `# t=<v> h=<v>`, columns x, u."""
    if u.dim != 1:
        raise DomainError("CSV export is for 1D fields")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(f"# t={u.t:.12g} h={u.h:.12g}\n")
        pd.DataFrame({"x": u.axis(0), "u": u.values}).to_csv(handle, index=False, float_format="%.15g")
    return path
