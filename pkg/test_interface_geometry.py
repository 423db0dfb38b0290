"""
Tests for level sets, set distances and shape diagnostics.
Run with pytest or directly: python test_interface_geometry.py
"""

import math

import numpy as np
import pytest

from errors import DomainError, GeometryError
from interface_geometry import (InterfaceSet, count_linear_pieces, dist_hausdorff, dist_inf, dist_tilde,
                                extract_level_set, interface_positions, mean_speed, min_shift_distance,
                                planarity, point_to_polyline_distance, polyline_from_vertices,
                                simplify_polyline, tip_speed, verify_transition, windowed_distance)
from nonlinearity import make_cubic
from rd_engine import make_grid
from wave_profile import eval_profile, solve_profile

ALPHA = math.pi / 3


def _line(height: float, t: float = 0.0, half_width: float = 10.0) -> InterfaceSet:
    return polyline_from_vertices([(-half_width, height), (half_width, height)], t=t, spacing=0.05)


def _v(apex: float, t: float = 0.0, half_width: float = 10.0, alpha: float = ALPHA) -> InterfaceSet:
    slope = 1.0 / math.tan(alpha)
    return polyline_from_vertices([(-half_width, apex + slope * half_width), (0.0, apex),
                                   (half_width, apex + slope * half_width)], t=t, spacing=0.01)


def test_1d_crossings_are_interpolated():
    grid = make_grid((11,), 1.0, (0.0,))
    u = grid.with_values(np.array([1, 1, 1, 0.75, 0.25, 0, 0, 0.5, 0.9, 0.2, 0], dtype=float))
    assert np.allclose(interface_positions(u), [3.5, 7.0, 8.0 + 4.0 / 7.0])
    assert extract_level_set(grid.with_values(np.full(11, 0.8))).empty
    with pytest.raises(DomainError):
        extract_level_set(u, level=1.0)


def test_2d_circle():
    grid = make_grid((81, 81), 0.25, (-10.0, -10.0))
    x1, x2 = grid.coords()
    r = np.hypot(x1, x2)
    gamma = extract_level_set(grid.with_values(1.0 / (1.0 + np.exp(r - 6.0))))
    radii = np.hypot(gamma.points[:, 0], gamma.points[:, 1])
    assert np.max(np.abs(radii - 6.0)) < 0.05
    assert len(gamma.polylines) == 1
    ring = gamma.polylines[0]
    assert np.allclose(ring[0], ring[-1])


def test_2d_straight_front():
    grid = make_grid((41, 41), 0.5, (-10.0, -10.0))
    _, x2 = grid.coords()
    u = grid.with_values(0.5 - 0.01 * (x2 - 1.2))
    gamma = extract_level_set(u)
    assert np.allclose(gamma.points[:, 1], 1.2, atol=1e-9)
    assert count_linear_pieces(gamma, tol=0.1) == 1
    fit = planarity(gamma, u)
    assert np.allclose(fit.normal, [0.0, 1.0], atol=1e-9)
    assert abs(fit.xi - 1.2) < 1e-9 and fit.residual < 1e-9


def test_distances_between_parallel_lines():
    a, b = _line(0.0), _line(3.0)
    assert math.isclose(dist_inf(a, b), 3.0, abs_tol=1e-12)
    assert math.isclose(dist_tilde(a, b), 3.0, abs_tol=1e-12)
    assert math.isclose(dist_hausdorff(a, b), 3.0, abs_tol=1e-12)
    with pytest.raises(GeometryError):
        dist_inf(a, InterfaceSet(t=0.0, level=0.5, points=np.empty((0, 2))))


def test_windowed_distances_of_a_translated_v():
    shift = 2.0
    a, b = _v(0.0, half_width=20.0), _v(shift, half_width=20.0)
    core = 12.0
    assert abs(windowed_distance("inf", a, b, core) - shift * math.sin(ALPHA)) < 0.02
    assert abs(windowed_distance("tilde", a, b, core) - shift * math.sin(ALPHA)) < 0.02
    assert abs(windowed_distance("hausdorff", a, b, core) - shift) < 0.02
    with pytest.raises(DomainError):
        windowed_distance("mean", a, b, core)


def test_mean_speed_of_translating_lines():
    sets = [_line(0.5 * t, t=t) for t in np.arange(0.0, 21.0, 2.0)]
    estimate = mean_speed(sets, kind="inf")
    assert abs(estimate.gamma_hat - 0.5) < 1e-9
    assert estimate.fit_residual < 1e-9
    assert list(estimate.table().columns) == ["tau", "distance"]
    with pytest.raises(DomainError):
        mean_speed(sets[:4])
    with pytest.raises(DomainError):
        mean_speed([_line(0.5 * t, t=t) for t in range(6)])


def test_tip_speed_of_a_rising_v():
    sets = [_v(0.7 * t, t=t) for t in range(0, 12, 2)]
    assert abs(tip_speed(sets) - 0.7) < 1e-9
    with pytest.raises(GeometryError):
        tip_speed(sets[:1])


def test_transition_check_on_a_planar_front():
    f = make_cubic(0.3)
    p = solve_profile(f)
    grid = make_grid((21, 61), 0.5, (-5.0, -15.0))
    _, x2 = grid.coords()
    u = grid.with_values(eval_profile(p, x2))
    table = verify_transition([u], [_line(0.0)], [0.05, 0.2, 0.5])
    depth = -p.xi[np.argmin(np.abs(p.phi - 0.95))]
    assert table.finite
    assert table.value(0.05) <= depth + 1.0
    assert table.value(0.2) <= table.value(0.05)
    assert table.value(0.5) == 0.0
    assert list(table.frame().columns) == ["eps", "M"]


def test_piece_counts():
    v = np.array([(-10.0, 10.0), (0.0, 0.0), (10.0, 10.0)])
    trapezoid = np.array([(-10.0, 10.0), (-3.0, 0.0), (3.0, 0.0), (10.0, 10.0)])
    wiggle = np.column_stack([np.linspace(-10, 10, 201), 0.01 * np.sin(np.linspace(0, 40, 201))])
    assert count_linear_pieces(v, tol=0.2) == 2
    assert count_linear_pieces(trapezoid, tol=0.2) == 3
    assert count_linear_pieces(wiggle, tol=0.2) == 1


def test_simplify_and_point_distance():
    collinear = np.column_stack([np.linspace(0, 4, 9), np.zeros(9)])
    assert np.array_equal(simplify_polyline(collinear, 1e-6), collinear[[0, -1]])
    d = point_to_polyline_distance(np.array([[2.0, 3.0], [-4.0, 0.0]]), collinear)
    assert np.allclose(d, [3.0, 4.0])


def test_min_shift_distance_finds_the_translation():
    f = make_cubic(0.3)
    p = solve_profile(f)
    grid = make_grid((401,), 0.1, (-20.0,))
    u = grid.with_values(eval_profile(p, grid.axis(0) - 2.3))
    distance, shift = min_shift_distance(u, lambda x: eval_profile(p, x))
    assert abs(shift - 2.3) < 1e-4 and distance < 1e-4


def test_dist_inf_equals_brute_force():
    rng = np.random.default_rng(31)
    for _ in range(50):
        pa = rng.uniform(-5.0, 5.0, size=(rng.integers(1, 40), 2))
        pb = rng.uniform(-5.0, 5.0, size=(rng.integers(1, 40), 2))
        brute = np.sqrt(((pa[:, None, :] - pb[None, :, :]) ** 2).sum(axis=-1)).min()
        a = InterfaceSet(t=0.0, level=0.5, points=pa)
        b = InterfaceSet(t=0.0, level=0.5, points=pb)
        assert math.isclose(dist_inf(a, b), brute, rel_tol=0.0, abs_tol=1e-12)
        assert dist_inf(a, b) <= dist_tilde(a, b) <= dist_hausdorff(a, b)
        assert dist_inf(a, a) == 0.0


def test_distances_of_a_point_and_a_pair():
    a = InterfaceSet(t=0.0, level=0.5, points=np.array([(0.0, 0.0), (10.0, 0.0)]))
    b = InterfaceSet(t=0.0, level=0.5, points=np.array([(0.0, 1.0)]))
    assert dist_inf(a, b) == 1.0
    assert dist_tilde(a, b) == 1.0
    assert math.isclose(dist_hausdorff(a, b), math.sqrt(101.0), rel_tol=1e-15)


def test_mean_speed_of_random_linear_motions():
    rng = np.random.default_rng(32)
    s = np.linspace(-10.0, 10.0, 201)
    for speed, angle in zip(rng.uniform(0.1, 2.0, 20), rng.uniform(0.0, 2.0 * math.pi, 20)):
        normal = np.array([math.cos(angle), math.sin(angle)])
        tangent = np.array([-normal[1], normal[0]])
        base = s[:, None] * tangent
        sets = [InterfaceSet(t=t, level=0.5, points=base + speed * t * normal)
                for t in np.arange(0.0, 21.0, 2.0)]
        for kind in ("inf", "tilde", "hausdorff"):
            assert abs(mean_speed(sets, kind=kind).gamma_hat - speed) <= 1e-12


if __name__ == "__main__":
    tests = [
        test_1d_crossings_are_interpolated,
        test_2d_circle,
        test_2d_straight_front,
        test_distances_between_parallel_lines,
        test_windowed_distances_of_a_translated_v,
        test_mean_speed_of_translating_lines,
        test_tip_speed_of_a_rising_v,
        test_transition_check_on_a_planar_front,
        test_piece_counts,
        test_simplify_and_point_distance,
        test_min_shift_distance_finds_the_translation,
        test_dist_inf_equals_brute_force,
        test_distances_of_a_point_and_a_pair,
        test_mean_speed_of_random_linear_motions,
    ]
    print("=" * 60)
    print("TEST: INTERFACE GEOMETRY")
    print("=" * 60)
    for test in tests:
        print(f"[TEST] {test.__name__}")
        test()
        print("  [OK]")
    print(f"\n[OK] {len(tests)} tests passed")
