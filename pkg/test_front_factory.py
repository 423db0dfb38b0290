"""
Tests for initial data, conical fronts, sub/supersolutions and the
non-standard front builder. Grids are coarse to keep the run short.
Run with pytest or directly: python test_front_factory.py
"""

import math

import numpy as np
import pytest

from errors import DomainError
from front_factory import (SupersolutionReport, ball_field, build_nonstandard, check_supersolution, conical_front,
                           conical_grid, lower_planar_bound, planar_field, planar_max, reference_interfaces,
                           rotated_v, rotated_v_at, step_field, supersolution_field, supersolution_grid,
                           supersolution_values)
from nonlinearity import make_cubic
from rd_engine import make_grid
from wave_profile import eval_profile, solve_profile

ALPHA = math.pi / 3
F = make_cubic(0.3)
P = solve_profile(F)
_CONICAL = {}


def _conical():
    if "cf" not in _CONICAL:
        _CONICAL["cf"] = conical_front(P, ALPHA, conical_grid(ALPHA, 8.0, 0.5), F, relax_time=800.0, workers=1)
    return _CONICAL["cf"]


def test_planar_field():
    grid = make_grid((9, 9), 0.5, (-2.0, -2.0))
    u = planar_field(P, [0.6, 0.8], 1.0, grid)
    x1, x2 = grid.coords()
    assert np.allclose(u.values, eval_profile(P, 0.6 * x1 + 0.8 * x2 + 1.0))
    with pytest.raises(DomainError):
        planar_field(P, [1.0, 1.0], 0.0, grid)


def test_step_and_ball_data():
    line = make_grid((11,), 1.0, (-5.0,))
    lower = step_field(0.4, "lower", line).values
    upper = step_field(0.4, "upper", line).values
    assert list(lower[:6]) == [0.4] * 6 and list(lower[6:]) == [0.0] * 5
    assert list(upper[:6]) == [1.0] * 6 and list(upper[6:]) == [0.4] * 5
    with pytest.raises(DomainError):
        step_field(0.4, "middle", line)
    with pytest.raises(DomainError):
        step_field(0.4, "lower", make_grid((3, 3), 1.0, (0.0, 0.0)))

    square = make_grid((21, 21), 0.5, (-5.0, -5.0))
    ball = ball_field(0.9, 0.1, 2.0, square)
    assert ball.values[10, 10] == 0.9 and ball.values[0, 0] == 0.1
    with pytest.raises(DomainError):
        ball_field(0.9, 0.0, 0.5, square)


def test_planar_max_and_lower_bound_are_even_in_x1():
    y1 = np.linspace(-6, 6, 13)
    y2 = np.full_like(y1, 1.5)
    assert np.array_equal(planar_max(P, ALPHA, y1, y2), planar_max(P, ALPHA, -y1, y2))
    bound = lower_planar_bound(P, ALPHA, -10.0, y1, y2)
    assert np.array_equal(bound, bound[::-1])
    assert np.all(bound >= eval_profile(P, y2 - P.speed * -10.0))


def test_reference_interfaces():
    c = P.speed / math.sin(ALPHA)
    before = reference_interfaces(-10.0, ALPHA, P.speed, half_width=20.0)
    poly = before.polylines[0]
    assert len(poly) == 4
    assert np.allclose(poly[1], [-10.0 * c * math.cos(ALPHA), -10.0 * P.speed])
    assert np.allclose(poly[2], [10.0 * c * math.cos(ALPHA), -10.0 * P.speed])
    after = reference_interfaces(10.0, ALPHA, P.speed, half_width=20.0)
    assert np.allclose(after.polylines[0][1], [0.0, 10.0 * P.speed / abs(math.cos(2 * ALPHA))])
    assert len(reference_interfaces(0.0, ALPHA, P.speed).polylines[0]) == 3
    with pytest.raises(DomainError):
        reference_interfaces(1.0, 0.5, P.speed)


def test_conical_front_relaxes():
    cf = _conical()
    assert math.isclose(cf.speed, P.speed / math.sin(ALPHA), rel_tol=1e-12)
    assert cf.steady_residual < 0.05
    centre = cf.shape_offset[len(cf.shape_offset) // 2]
    assert centre[0] == 0.0 and centre[1] >= -0.5
    values = cf(np.array([0.0, 0.0, 0.0]), np.array([-30.0, 0.0, 60.0]))
    assert values[0] > 0.99 and values[2] < 0.01
    with pytest.raises(DomainError):
        conical_front(solve_profile(make_cubic(0.7)), ALPHA, conical_grid(ALPHA, 8.0, 0.5), make_cubic(0.7))


def test_supersolution_lies_above_the_rotated_front():
    cf = _conical()
    x1, x2 = np.meshgrid(np.linspace(-20, 0, 41), np.linspace(-15, 15, 61), indexing="ij")
    below = rotated_v_at(cf, -20.0, x1, x2)
    above = supersolution_values(cf, 4.0, 0.1, -20.0, x1, x2)
    assert np.all(above >= below - 1e-3)
    assert np.all(above <= 1.0)


def test_supersolution_check_arguments():
    cf = _conical()
    grid = supersolution_grid(cf, -20.0, 1.0, half_width=10.0)
    assert grid.axis(0)[-1] == 0.0
    with pytest.raises(DomainError):
        check_supersolution(cf, 4.0, 0.1, 1.0, grid, [-20.0], F)
    with pytest.raises(DomainError):
        check_supersolution(cf, -1.0, 0.1, -20.0, grid, [-20.0], F)
    report = check_supersolution(cf, 4.0, 0.1, -20.0, grid, [-25.0, 0.0], F)
    assert report.interior_nodes > 0 and report.T == -20.0


def test_supersolution_fields_on_the_check_grid():
    cf = _conical()
    grid = supersolution_grid(cf, -20.0, 1.0, half_width=10.0)
    v = rotated_v(cf, -20.0, grid)
    w = supersolution_field(cf, 4.0, 0.1, -20.0, grid)
    assert v.same_grid(grid) and w.same_grid(grid)
    assert v.t == w.t == -20.0
    assert np.all(w.values >= v.values - 1e-3)
    assert w.values.max() <= 1.0


def test_refined_check_may_not_lose_ground():
    coarse = SupersolutionReport(sigma=4.0, delta=0.1, T=-20.0, min_interior=-0.02, min_boundary=0.3,
                                 tol=0.1, interior_nodes=10, boundary_nodes=5, h=1.0, dt=0.25)
    fine = SupersolutionReport(sigma=4.0, delta=0.1, T=-20.0, min_interior=-0.03, min_boundary=0.2,
                               tol=0.025, interior_nodes=40, boundary_nodes=10, h=0.5, dt=0.0625)
    interior_floor, boundary_floor = fine.refinement_bounds(coarse)
    assert interior_floor == pytest.approx(-0.045)
    assert boundary_floor == pytest.approx(-0.025)
    assert fine.min_interior >= interior_floor and fine.min_boundary >= boundary_floor
    assert not -0.05 >= interior_floor


def test_nonstandard_launch_checks():
    with pytest.raises(DomainError):
        build_nonstandard(F, 0.5, 60.0, 10.0, profile=P)
    with pytest.raises(DomainError):
        build_nonstandard(F, ALPHA, 5.0, 10.0, profile=P)
    with pytest.raises(DomainError):
        build_nonstandard(F, ALPHA, 60.0, -70.0, profile=P)


def test_short_nonstandard_run():
    run = build_nonstandard(F, ALPHA, 40.0, 5.0, h=0.5, half_width=12.0, margin=10.0,
                            min_clearance=5.0, profile=P, conical=_conical(), guard_cells=4, workers=1)
    times = [u.t for u in run.snapshots]
    assert times[0] == -40.0 and times[-1] == 5.0
    assert times == sorted(times)
    assert len(run.level_sets) == len(run.refs) == len(run.snapshots)
    assert run.cumulative_shift > 0.0
    assert all(0.0 <= u.values.min() and u.values.max() <= 1.0 for u in run.snapshots)
    assert run.sandwich_excess is None


if __name__ == "__main__":
    tests = [
        test_planar_field,
        test_step_and_ball_data,
        test_planar_max_and_lower_bound_are_even_in_x1,
        test_reference_interfaces,
        test_conical_front_relaxes,
        test_supersolution_lies_above_the_rotated_front,
        test_supersolution_check_arguments,
        test_supersolution_fields_on_the_check_grid,
        test_refined_check_may_not_lose_ground,
        test_nonstandard_launch_checks,
        test_short_nonstandard_run,
    ]
    print("=" * 60)
    print("TEST: FRONT FACTORY")
    print("=" * 60)
    for test in tests:
        print(f"[TEST] {test.__name__}")
        test()
        print("  [OK]")
    print(f"\n[OK] {len(tests)} tests passed")
