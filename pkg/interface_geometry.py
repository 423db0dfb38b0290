"""
Level sets, set distances, mean speed and transition-front checks.

Interfaces are point sets with optional polyline connectivity. Distances are
computed on the discrete point sets with a KD-tree; reference polylines are
measured exactly segment by segment.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import optimize
from scipy.spatial import cKDTree

from errors import DomainError, GeometryError
from rd_engine import ScalarField

logger = logging.getLogger(__name__)

DISTANCE_KINDS = ("inf", "tilde", "hausdorff")
EXACT_SEGMENT_LIMIT = 64
MERGE_ANGLE_DEG = 12.0
MIN_PIECE_FRACTION = 0.10


# ============================================================================
# INTERFACE SET
# ============================================================================

@dataclass
class InterfaceSet:
    t: float
    level: float
    points: np.ndarray
    polylines: List[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        self.points = pts

    @property
    def dim(self) -> int:
        return self.points.shape[1] if self.points.size else (2 if self.polylines else 1)

    @property
    def empty(self) -> bool:
        return self.points.shape[0] == 0

    def __len__(self) -> int:
        return self.points.shape[0]

    def translated(self, offset: Sequence[float]) -> "InterfaceSet":
        offset = np.asarray(offset, dtype=float)
        return InterfaceSet(t=self.t, level=self.level, points=self.points + offset,
                            polylines=[p + offset for p in self.polylines])

    def longest_polyline(self) -> np.ndarray:
        if not self.polylines:
            raise GeometryError("interface has no polyline connectivity")
        return max(self.polylines, key=polyline_length)


def polyline_length(poly: np.ndarray) -> float:
    return float(np.sum(np.linalg.norm(np.diff(poly, axis=0), axis=1))) if len(poly) > 1 else 0.0


def polyline_from_vertices(vertices: Sequence[Sequence[float]], t: float = 0.0,
                           level: float = 0.5, spacing: Optional[float] = None) -> InterfaceSet:
    """InterfaceSet from polyline vertices, optionally resampled at `spacing`."""
    vertices = np.asarray(vertices, dtype=float)
    if spacing is None:
        pts = vertices
    else:
        pieces = []
        for a, b in zip(vertices[:-1], vertices[1:]):
            n = max(1, int(math.ceil(np.linalg.norm(b - a) / spacing)))
            s = np.linspace(0.0, 1.0, n + 1)[:-1, None]
            pieces.append(a + s * (b - a))
        pieces.append(vertices[-1:])
        pts = np.vstack(pieces)
    return InterfaceSet(t=t, level=level, points=pts, polylines=[vertices])


# ============================================================================
# LEVEL-SET EXTRACTION
# ============================================================================

def extract_level_set(u: ScalarField, level: float = 0.5) -> InterfaceSet:
    """
    Sub-cell crossing points of u = level.

    1D: linear interpolation at every sign change (plus exact node zeros).
    2D: marching squares with linear edge interpolation; saddle cells are
    resolved by the cell-centre average. Empty when u - level keeps one sign.
    """
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must lie in (0, 1), got {level}")
    if u.dim == 1:
        return _extract_1d(u, level)
    return _extract_2d(u, level)


def _extract_1d(u: ScalarField, level: float) -> InterfaceSet:
    d = u.values - level
    x = u.axis(0)
    exact = x[d == 0.0]
    idx = np.nonzero(d[:-1] * d[1:] < 0.0)[0]
    frac = d[idx] / (d[idx] - d[idx + 1])
    crossings = x[idx] + u.h * frac
    pts = np.sort(np.concatenate([exact, crossings]))
    return InterfaceSet(t=u.t, level=level, points=pts.reshape(-1, 1))


def _extract_2d(u: ScalarField, level: float) -> InterfaceSet:
    d = u.values - level
    n1, n2 = d.shape
    x1, x2 = u.axis(0), u.axis(1)
    pos = d > 0.0

    # edges along axis 0: (i, j)-(i+1, j); along axis 1: (i, j)-(i, j+1)
    cross_a = pos[:-1, :] != pos[1:, :]
    cross_b = pos[:, :-1] != pos[:, 1:]
    with np.errstate(divide="ignore", invalid="ignore"):
        ta = np.where(cross_a, d[:-1, :] / (d[:-1, :] - d[1:, :]), 0.0)
        tb = np.where(cross_b, d[:, :-1] / (d[:, :-1] - d[:, 1:]), 0.0)
    ia, ja = np.nonzero(cross_a)
    ib, jb = np.nonzero(cross_b)
    offset_b = (n1 - 1) * n2
    n_edges = offset_b + n1 * (n2 - 1)

    edge_points = np.full((n_edges, 2), np.nan)
    edge_points[ia * n2 + ja] = np.column_stack([x1[ia] + u.h * ta[ia, ja], x2[ja]])
    edge_points[offset_b + ib * (n2 - 1) + jb] = np.column_stack([x1[ib], x2[jb] + u.h * tb[ib, jb]])

    if n1 < 2 or n2 < 2:
        pts = edge_points[~np.isnan(edge_points[:, 0])]
        return InterfaceSet(t=u.t, level=level, points=pts)

    ci, cj = np.meshgrid(np.arange(n1 - 1), np.arange(n2 - 1), indexing="ij")
    # cell edges: bottom (i,j)-(i+1,j), right (i+1,j)-(i+1,j+1), top (i,j+1)-(i+1,j+1), left (i,j)-(i,j+1)
    ids = {
        "bottom": ci * n2 + cj,
        "right": offset_b + (ci + 1) * (n2 - 1) + cj,
        "top": ci * n2 + cj + 1,
        "left": offset_b + ci * (n2 - 1) + cj,
    }
    flags = {
        "bottom": cross_a[:, :-1],
        "right": cross_b[1:, :],
        "top": cross_a[:, 1:],
        "left": cross_b[:-1, :],
    }
    count = sum(flag.astype(int) for flag in flags.values())

    pairs: List[np.ndarray] = []
    order = ("bottom", "right", "top", "left")
    two = count == 2
    for k, first in enumerate(order):
        for second in order[k + 1:]:
            mask = two & flags[first] & flags[second]
            if mask.any():
                pairs.append(np.column_stack([ids[first][mask], ids[second][mask]]))

    four = count == 4
    if four.any():
        centre = 0.25 * (d[:-1, :-1] + d[1:, :-1] + d[1:, 1:] + d[:-1, 1:])
        joined = four & ((centre > 0.0) == pos[:-1, :-1])
        split = four & ~joined
        for mask, links in ((joined, (("bottom", "right"), ("top", "left"))),
                            (split, (("bottom", "left"), ("right", "top")))):
            if mask.any():
                for a, b in links:
                    pairs.append(np.column_stack([ids[a][mask], ids[b][mask]]))

    segments = np.vstack(pairs) if pairs else np.empty((0, 2), dtype=int)
    polylines = _link_segments(segments, edge_points)
    used = np.unique(segments.ravel()) if segments.size else np.empty(0, dtype=int)
    pts = edge_points[used]
    return InterfaceSet(t=u.t, level=level, points=pts, polylines=polylines)


def _link_segments(segments: np.ndarray, edge_points: np.ndarray) -> List[np.ndarray]:
    """Chain segments sharing an edge crossing into polylines (open ones first)."""
    if segments.size == 0:
        return []
    segments = segments[np.lexsort((segments[:, 1], segments[:, 0]))]
    incident: Dict[int, List[int]] = {}
    for s, (a, b) in enumerate(segments):
        incident.setdefault(int(a), []).append(s)
        incident.setdefault(int(b), []).append(s)

    used = np.zeros(len(segments), dtype=bool)
    polylines: List[np.ndarray] = []
    ends = sorted(node for node, segs in incident.items() if len(segs) == 1)
    starts = ends + sorted(int(n) for n in segments[:, 0])

    for start in starts:
        if all(used[s] for s in incident[start]):
            continue
        chain = [start]
        node = start
        while True:
            nxt = next((s for s in incident[node] if not used[s]), None)
            if nxt is None:
                break
            used[nxt] = True
            a, b = segments[nxt]
            node = int(b) if int(a) == node else int(a)
            chain.append(node)
            if node == start:
                break
        polylines.append(edge_points[chain])
    return polylines


def interface_positions(u: ScalarField, level: float = 0.5) -> np.ndarray:
    """Sorted crossing abscissae of a 1D field."""
    if u.dim != 1:
        raise DomainError("interface_positions is for 1D fields")
    return extract_level_set(u, level).points[:, 0]


# ============================================================================
# DISTANCES
# ============================================================================

def _require_points(a: InterfaceSet, b: InterfaceSet):
    if a.empty or b.empty:
        raise GeometryError("distance between interface sets needs two nonempty sets")
    if a.points.shape[1] != b.points.shape[1]:
        raise GeometryError("interface sets live in different dimensions")


def _one_sided(a: InterfaceSet, b: InterfaceSet, workers: int = 1) -> np.ndarray:
    """d(x, B) for every x in A."""
    dist, _ = cKDTree(b.points).query(a.points, k=1, workers=workers)
    return np.asarray(dist, dtype=float)


def dist_inf(a: InterfaceSet, b: InterfaceSet) -> float:
    """inf over pairs of |x - y|."""
    _require_points(a, b)
    return float(_one_sided(a, b).min())


def dist_tilde(a: InterfaceSet, b: InterfaceSet) -> float:
    """min(sup_A d(x, B), sup_B d(y, A))."""
    _require_points(a, b)
    return float(min(_one_sided(a, b).max(), _one_sided(b, a).max()))


def dist_hausdorff(a: InterfaceSet, b: InterfaceSet) -> float:
    """max(sup_A d(x, B), sup_B d(y, A))."""
    _require_points(a, b)
    return float(max(_one_sided(a, b).max(), _one_sided(b, a).max()))


DISTANCES: Dict[str, Callable[[InterfaceSet, InterfaceSet], float]] = {
    "inf": dist_inf,
    "tilde": dist_tilde,
    "hausdorff": dist_hausdorff,
}


def clip_interface(gamma: InterfaceSet, half_width: float) -> InterfaceSet:
    """Points with |x1| <= half_width (polylines dropped)."""
    keep = np.abs(gamma.points[:, 0]) <= half_width
    return InterfaceSet(t=gamma.t, level=gamma.level, points=gamma.points[keep])


def windowed_distance(kind: str, a: InterfaceSet, b: InterfaceSet, core: float) -> float:
    """
    Distance between sets cut off by a window: one-sided terms run over the
    source points with |x1| <= core against the whole target set.
    """
    _require_points(a, b)
    ac, bc = clip_interface(a, core), clip_interface(b, core)
    if ac.empty or bc.empty:
        raise GeometryError(f"no interface points within |x1| <= {core:g}")
    ab, ba = _one_sided(ac, b), _one_sided(bc, a)
    if kind == "inf":
        return float(min(ab.min(), ba.min()))
    if kind == "tilde":
        return float(min(ab.max(), ba.max()))
    if kind == "hausdorff":
        return float(max(ab.max(), ba.max()))
    raise DomainError(f"unknown distance kind {kind!r}; use one of {DISTANCE_KINDS}")


def point_to_polyline_distance(points: np.ndarray, polyline: np.ndarray) -> np.ndarray:
    """Exact Euclidean distance from each point to a polyline."""
    points = np.asarray(points, dtype=float)
    polyline = np.asarray(polyline, dtype=float)
    if len(polyline) == 1:
        return np.linalg.norm(points - polyline[0], axis=1)
    best = np.full(points.shape[0], np.inf)
    for a, b in zip(polyline[:-1], polyline[1:]):
        ab = b - a
        denom = float(ab @ ab)
        rel = points - a
        s = np.clip(rel @ ab / denom, 0.0, 1.0) if denom > 0 else np.zeros(points.shape[0])
        np.minimum(best, np.linalg.norm(rel - s[:, None] * ab, axis=1), out=best)
    return best


def distance_to_interface(points: np.ndarray, gamma: InterfaceSet, h: float) -> np.ndarray:
    """
    Distance from points to an interface. Polylines with few segments are
    measured exactly; long ones through a KD-tree on an h/4 resampling.
    """
    points = np.asarray(points, dtype=float)
    if gamma.polylines and sum(len(p) - 1 for p in gamma.polylines) <= EXACT_SEGMENT_LIMIT:
        return np.min([point_to_polyline_distance(points, p) for p in gamma.polylines], axis=0)
    if gamma.polylines:
        dense = np.vstack([polyline_from_vertices(p, spacing=h / 4.0).points for p in gamma.polylines])
    else:
        dense = gamma.points
    if dense.shape[0] == 0:
        raise GeometryError("reference interface is empty")
    dist, _ = cKDTree(dense).query(points, k=1)
    return np.asarray(dist, dtype=float)


# ============================================================================
# MEAN SPEED
# ============================================================================

@dataclass
class SpeedEstimate:
    gamma_hat: float
    distance_kind: str
    window: Tuple[float, float]
    fit_residual: float
    slope: float = 0.0
    intercept: float = 0.0
    tau: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)
    distance: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)

    def table(self) -> pd.DataFrame:
        return pd.DataFrame({"tau": self.tau, "distance": self.distance})

    def to_csv(self, path: Union[str, Path]) -> Path:
        """Columns tau, distance; first line `# gamma_hat=<v> residual=<v>`."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(f"# gamma_hat={self.gamma_hat:.12g} residual={self.fit_residual:.12g}\n")
            self.table().to_csv(handle, index=False, float_format="%.15g")
        return path


def mean_speed(interfaces: Sequence[InterfaceSet], kind: str = "inf",
               core: Optional[float] = None) -> SpeedEstimate:
    """
    Least-squares slope of D(tau) = dist(Gamma_t0, Gamma_{t0 + tau}).

    Anchors are the snapshots in the first third of the window; only the
    largest half of the tau values enters the fit. With `core`, sets cut by
    a window |x1| <= W are compared through windowed_distance.
    """
    if kind not in DISTANCES:
        raise DomainError(f"unknown distance kind {kind!r}; use one of {DISTANCE_KINDS}")
    ordered = sorted(interfaces, key=lambda g: g.t)
    if len(ordered) < 5:
        raise DomainError(f"mean_speed needs at least 5 snapshots, got {len(ordered)}")
    t_min, t_max = ordered[0].t, ordered[-1].t
    if t_max - t_min < 10.0:
        raise DomainError(f"mean_speed needs a window of at least 10 time units, got {t_max - t_min:g}")

    if core is None:
        distance = DISTANCES[kind]
    else:
        def distance(a, b):
            return windowed_distance(kind, a, b, core)
    anchor_limit = t_min + (t_max - t_min) / 3.0
    taus, dists = [], []
    for i, anchor in enumerate(ordered):
        if anchor.t > anchor_limit:
            break
        for later in ordered[i + 1:]:
            if later.t > anchor.t:
                taus.append(later.t - anchor.t)
                dists.append(distance(anchor, later))
    tau = np.asarray(taus)
    dist = np.asarray(dists)
    keep = tau >= np.median(tau)
    tau, dist = tau[keep], dist[keep]

    if np.ptp(tau) > 0:
        slope, intercept = np.polyfit(tau, dist, 1)
    else:
        slope, intercept = float(np.mean(dist / tau)), 0.0
    residual = float(np.max(np.abs(dist - (slope * tau + intercept)) / tau))
    estimate = SpeedEstimate(gamma_hat=max(float(slope), 0.0), distance_kind=kind,
                             window=(t_min, t_max), fit_residual=residual,
                             slope=float(slope), intercept=float(intercept), tau=tau, distance=dist)
    logger.info(f"[GEOMETRY] mean speed ({kind}) over [{t_min:g}, {t_max:g}]: "
                f"{estimate.gamma_hat:.6f} (residual {residual:.2e}, {len(tau)} pairs)")
    return estimate


def tip_speed(interfaces: Sequence[InterfaceSet], x1: float = 0.0) -> float:
    """Slope in t of the lowest level-set ordinate on the vertical line through x1."""
    times, heights = [], []
    for gamma in interfaces:
        crossings = []
        for poly in gamma.polylines:
            for a, b in zip(poly[:-1], poly[1:]):
                if (a[0] - x1) * (b[0] - x1) <= 0.0 and a[0] != b[0]:
                    s = (x1 - a[0]) / (b[0] - a[0])
                    crossings.append(a[1] + s * (b[1] - a[1]))
        if crossings:
            times.append(gamma.t)
            heights.append(min(crossings))
    if len(times) < 2:
        raise GeometryError("tip not found on enough snapshots")
    slope, _ = np.polyfit(times, heights, 1)
    return float(slope)


# ============================================================================
# PLANARITY
# ============================================================================

@dataclass
class PlanarFit:
    normal: np.ndarray
    xi: float
    residual: float


def planarity(gamma: InterfaceSet, u: Optional[ScalarField] = None) -> PlanarFit:
    """
    Total-least-squares hyperplane {x . e = xi}.

    With a field, e is oriented so that {x . e < xi} is where u > 1/2
    (fronts decrease along e). Without one, the last nonzero component of e
    is made positive.
    """
    pts = gamma.points
    if pts.shape[0] == 0:
        raise GeometryError("planarity of an empty interface")
    centroid = pts.mean(axis=0)
    if pts.shape[1] == 1:
        normal = np.array([1.0])
    elif pts.shape[0] < 2:
        normal = np.array([0.0, 1.0])
    else:
        _, _, vt = np.linalg.svd(pts - centroid, full_matrices=False)
        normal = vt[-1]
    nz = normal[np.abs(normal) > 1e-12]
    if nz.size and nz[-1] < 0:
        normal = -normal
    xi = float(normal @ centroid)

    if u is not None:
        coords = np.column_stack([c.ravel() for c in u.coords()])
        side = coords @ normal - xi
        high = u.values.ravel() > 0.5
        if np.sum(side[high] > 0) > np.sum(side[high] < 0):
            normal, xi = -normal, -xi
    residual = float(np.max(np.abs(pts @ normal - xi)))
    return PlanarFit(normal=normal, xi=xi, residual=residual)


# ============================================================================
# TRANSITION-FRONT CHECK
# ============================================================================

@dataclass
class TransitionTable:
    eps: List[float]
    M: List[float]

    @property
    def finite(self) -> bool:
        return all(math.isfinite(m) for m in self.M)

    def value(self, eps: float) -> float:
        return self.M[self.eps.index(eps)]

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame({"eps": self.eps, "M": self.M})


def _sides(u: ScalarField, gamma: InterfaceSet, rule: str, coords: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    values = u.values.ravel()
    if rule == "level":
        return values > 0.5, values < 0.5
    if rule == "graph":
        if u.dim == 1:
            edge = float(gamma.points[:, 0].min())
            return coords[:, 0] < edge, coords[:, 0] > edge
        poly = gamma.longest_polyline()
        order = np.argsort(poly[:, 0])
        psi = np.interp(coords[:, 0], poly[order, 0], poly[order, 1])
        return coords[:, 1] < psi, coords[:, 1] > psi
    raise DomainError(f"unknown side rule {rule!r}; use 'level' or 'graph'")


def verify_transition(history: Sequence[ScalarField],
                      refs: Union[Sequence[InterfaceSet], Callable[[float], InterfaceSet]],
                      eps_grid: Sequence[float], side_rule: str = "level") -> TransitionTable:
    """
    Smallest grid-measurable M(eps) such that, over all snapshots, u >= 1 - eps
    on Omega+ nodes and u <= eps on Omega- nodes at distance >= M from Gamma_t.

    M is the largest violator distance plus one cell (0 without violators)
    and +inf when no node of the domain lies beyond it. Never raises for a
    failed check.
    """
    eps_list = [float(e) for e in eps_grid]
    worst = [0.0] * len(eps_list)
    for k, u in enumerate(history):
        gamma = refs(u.t) if callable(refs) else refs[k]
        coords = np.column_stack([c.ravel() for c in u.coords()])
        dist = distance_to_interface(coords, gamma, u.h)
        plus, minus = _sides(u, gamma, side_rule, coords)
        values = u.values.ravel()
        far = float(dist.max())
        for e_idx, eps in enumerate(eps_list):
            bad = (plus & (values < 1.0 - eps)) | (minus & (values > eps))
            if not bad.any():
                continue
            m = float(dist[bad].max()) + u.h
            if m > far:
                m = math.inf
            worst[e_idx] = max(worst[e_idx], m)
    table = TransitionTable(eps=eps_list, M=worst)
    logger.info(f"[GEOMETRY] transition check over {len(history)} snapshots: "
                + ", ".join(f"M({e:g})={m:.3g}" for e, m in zip(table.eps, table.M)))
    return table


# ============================================================================
# SHAPE DIAGNOSTICS
# ============================================================================

def simplify_polyline(poly: np.ndarray, tol: float) -> np.ndarray:
    """Douglas-Peucker: keep vertices farther than tol from the current chord."""
    poly = np.asarray(poly, dtype=float)
    if len(poly) < 3:
        return poly
    keep = np.zeros(len(poly), dtype=bool)
    keep[[0, -1]] = True
    stack = [(0, len(poly) - 1)]
    while stack:
        i, j = stack.pop()
        if j <= i + 1:
            continue
        dist = point_to_polyline_distance(poly[i + 1:j], poly[[i, j]])
        k = int(np.argmax(dist))
        if dist[k] > tol:
            keep[i + 1 + k] = True
            stack.append((i, i + 1 + k))
            stack.append((i + 1 + k, j))
    return poly[keep]


def _merge_by_angle(pieces: List[Tuple[np.ndarray, np.ndarray]], max_angle: float):
    merged: List[Tuple[np.ndarray, np.ndarray]] = []
    for start, end in pieces:
        if merged:
            m_start, m_end = merged[-1]
            u, v = m_end - m_start, end - start
            cos = float(u @ v) / (np.linalg.norm(u) * np.linalg.norm(v) + 1e-300)
            if math.degrees(math.acos(max(-1.0, min(1.0, cos)))) < max_angle:
                merged[-1] = (m_start, end)
                continue
        merged.append((start, end))
    return merged


def count_linear_pieces(gamma: Union[InterfaceSet, np.ndarray], tol: float,
                        max_angle: float = MERGE_ANGLE_DEG,
                        min_fraction: float = MIN_PIECE_FRACTION) -> int:
    """Maximal straight pieces of the (longest) polyline after simplification."""
    poly = gamma.longest_polyline() if isinstance(gamma, InterfaceSet) else np.asarray(gamma)
    simple = simplify_polyline(poly, tol)
    if len(simple) < 2:
        return 0
    pieces = _merge_by_angle(list(zip(simple[:-1], simple[1:])), max_angle)
    total = sum(float(np.linalg.norm(b - a)) for a, b in pieces)
    pieces = [(a, b) for a, b in pieces if np.linalg.norm(b - a) >= min_fraction * total]
    return len(_merge_by_angle(pieces, max_angle))


def min_shift_distance(u: ScalarField, reference: Callable[..., np.ndarray], axis: int = 0,
                       bracket: Tuple[float, float] = (-20.0, 20.0),
                       mask: Optional[np.ndarray] = None) -> Tuple[float, float]:
    """
    min over s of sup |u(x) - reference(x - s e_axis)| on the (masked) nodes.

    Returns (distance, best shift). A coarse scan picks the basin, a bounded
    scalar minimization refines it.
    """
    coords = [c.ravel() for c in u.coords()]
    values = u.values.ravel()
    if mask is not None:
        keep = np.asarray(mask).ravel()
        coords = [c[keep] for c in coords]
        values = values[keep]
    if values.size == 0:
        raise GeometryError("no nodes to compare")

    def sup_distance(shift: float) -> float:
        shifted = list(coords)
        shifted[axis] = shifted[axis] - shift
        return float(np.max(np.abs(values - reference(*shifted))))

    scan = np.linspace(bracket[0], bracket[1], 81)
    scores = [sup_distance(s) for s in scan]
    k = int(np.argmin(scores))
    lo, hi = scan[max(k - 1, 0)], scan[min(k + 1, len(scan) - 1)]
    result = optimize.minimize_scalar(sup_distance, bounds=(lo, hi), method="bounded",
                                      options={"xatol": 1e-6})
    best = min((float(result.fun), float(result.x)), (scores[k], float(scan[k])))
    return best
