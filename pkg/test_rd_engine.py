"""
Tests for the explicit reaction-diffusion stepper.
Run with pytest or directly: python test_rd_engine.py
"""

import tempfile
from pathlib import Path

import numpy as np
import pytest

from errors import CFLError, DomainError
from interface_geometry import interface_positions
from nonlinearity import make_cubic
from rd_engine import (BoundaryPolicy, EdgePolicy, EvolveOptions, ScalarField, cfl_limit, evolve,
                       evolve_half_plane, field_to_csv, load_field, load_snapshot_dir, make_grid,
                       pde_residual, save_field, write_snapshots)
from wave_profile import solve_profile

F = make_cubic(0.3)


def test_grid_layout():
    grid = make_grid((5, 3), 0.5, (-1.0, 2.0))
    assert grid.dim == 2 and grid.shape == (5, 3)
    assert np.allclose(grid.axis(0), [-1.0, -0.5, 0.0, 0.5, 1.0])
    x1, x2 = grid.coords()
    assert x1.shape == (5, 3) and x1[1, 0] == -0.5 and x2[0, 2] == 3.0
    with pytest.raises(DomainError):
        ScalarField(values=np.zeros((2, 2, 2)), h=0.1, origin=(0.0, 0.0, 0.0))
    with pytest.raises(DomainError):
        make_grid((4,), 0.0, (0.0,))


def test_cfl_limit_and_rejection():
    limit = cfl_limit(0.1, 2, F, drift=0.5)
    assert np.isclose(limit, 0.9 * 0.01 / (4 + 0.05 + 0.01 * F.max_abs_deriv))
    grid = make_grid((11,), 0.1, (0.0,), fill=0.5)
    with pytest.raises(CFLError):
        evolve(grid, F, BoundaryPolicy(), EvolveOptions(dt=2 * cfl_limit(0.1, 1, F), t_end=1.0))


def test_farfield_limit_must_be_a_stable_state():
    with pytest.raises(DomainError):
        EdgePolicy.dirichlet_farfield(0.5)


def test_equilibria_are_kept():
    for level in (0.0, 1.0):
        u0 = make_grid((12, 9), 0.25, (0.0, 0.0), fill=level)
        final = evolve(u0, F, BoundaryPolicy(), EvolveOptions(t_end=2.0, workers=1))[-1]
        assert np.all(final.values == level)


def test_snapshot_times_are_exact():
    u0 = make_grid((21,), 0.2, (-2.0,), fill=0.6)
    out = evolve(u0, F, BoundaryPolicy(), EvolveOptions(t_end=2.0, snapshot_every=0.5, workers=1))
    assert [u.t for u in out] == [0.0, 0.5, 1.0, 1.5, 2.0]
    out = evolve(u0, F, BoundaryPolicy(), EvolveOptions(t_end=1.0, snapshot_times=[0.3, 5.0], workers=1))
    assert [u.t for u in out] == [0.0, 0.3, 1.0]


def test_symmetric_data_stays_symmetric():
    grid = make_grid((41,), 0.25, (-5.0,))
    u0 = grid.with_values(np.exp(-grid.axis(0) ** 2))
    final = evolve(u0, F, BoundaryPolicy(), EvolveOptions(t_end=3.0, workers=1))[-1]
    assert np.array_equal(final.values, final.values[::-1])
    assert final.values.min() >= 0.0 and final.values.max() <= 1.0


def test_half_plane_matches_even_extension():
    m = 8
    grid = make_grid((2 * m + 1, 15), 0.5, (-m * 0.5, -3.5))
    x1, x2 = grid.coords()
    full0 = grid.with_values(1.0 / (1.0 + np.exp(x2 - 0.3 * x1 ** 2 / 4.0)))
    opts = EvolveOptions(t_end=2.0, workers=1)
    full = evolve(full0, F, BoundaryPolicy(), opts)[-1]
    half0 = ScalarField(values=full0.values[: m + 1].copy(), h=0.5, origin=(-m * 0.5, -3.5))
    half = evolve_half_plane(half0, F, opts, bc=BoundaryPolicy())[-1]
    assert np.allclose(half.values, full.values[: m + 1], atol=1e-13)
    with pytest.raises(DomainError):
        evolve_half_plane(full0, F, opts)


def test_workers_do_not_change_the_result():
    rng = np.random.default_rng(3)
    u0 = make_grid((30, 25), 0.3, (0.0, 0.0)).with_values(rng.random((30, 25)))
    bc = BoundaryPolicy(bottom=EdgePolicy.dirichlet_farfield(1.0), top=EdgePolicy.dirichlet_farfield(0.0))
    one = evolve(u0, F, bc, EvolveOptions(t_end=1.0, drift=0.4, workers=1))[-1]
    four = evolve(u0, F, bc, EvolveOptions(t_end=1.0, drift=0.4, workers=4))[-1]
    assert np.array_equal(one.values, four.values)


def test_comoving_frame_holds_a_travelling_wave():
    p = solve_profile(F)
    grid = make_grid((401,), 0.1, (-20.0,))
    u0 = grid.with_values(p(grid.axis(0)))
    bc = BoundaryPolicy(left=EdgePolicy.dirichlet_farfield(1.0), right=EdgePolicy.dirichlet_farfield(0.0))
    final = evolve(u0, F, bc, EvolveOptions(t_end=10.0, drift=p.speed, workers=1))[-1]
    assert abs(interface_positions(final)[0]) < 0.05
    still = evolve(u0, F, bc, EvolveOptions(t_end=10.0, workers=1))[-1]
    assert abs(interface_positions(still)[0] - 10.0 * p.speed) < 0.1


def test_profile_trace_follows_time():
    grid = make_grid((11, 11), 0.2, (0.0, 0.0), fill=0.0)
    trace = EdgePolicy.dirichlet_profile(lambda t, xy: np.full(xy.shape[0], 1.0 if t > 0 else 0.0))
    final = evolve(grid, F, BoundaryPolicy.uniform(trace), EvolveOptions(t_end=0.5, workers=1))[-1]
    assert final.values[0, 5] > 0.0 and final.values[5, 5] >= 0.0


def test_residual_of_a_travelling_wave():
    p = solve_profile(F)
    grid = make_grid((301,), 0.05, (-7.5,))
    x, dt = grid.axis(0), 0.01
    history = [grid.with_values(p(x - p.speed * t), t=t) for t in (-dt, 0.0, dt)]
    assert np.max(np.abs(pde_residual(history, F).values)) < 1e-2
    with pytest.raises(DomainError):
        pde_residual(history[:2], F)


def test_snapshot_files():
    grid = make_grid((6, 4), 0.5, (-1.0, 2.0), t=3.25)
    u = grid.with_values(np.arange(24, dtype=float).reshape(6, 4) / 24.0)
    line = make_grid((5,), 0.5, (0.0,)).with_values(np.linspace(1.0, 0.0, 5))
    with tempfile.TemporaryDirectory() as tmp:
        back = load_field(save_field(u, Path(tmp) / "u.flab"))
        assert back.same_grid(u) and back.t == 3.25 and np.array_equal(back.values, u.values)
        files = write_snapshots([u.with_values(u.values, t=1.0), u], Path(tmp) / "snaps")
        assert [p.name for p in files] == ["snap_00000.flab", "snap_00001.flab"]
        assert [s.t for s in load_snapshot_dir(Path(tmp) / "snaps")] == [1.0, 3.25]
        text = field_to_csv(line, Path(tmp) / "u.csv").read_text().splitlines()
        assert text[0] == "# t=0 h=0.5" and text[1] == "x,u"
        with pytest.raises(DomainError):
            field_to_csv(u, Path(tmp) / "bad.csv")


def test_ordered_data_stay_ordered():
    rng = np.random.default_rng(21)
    grid = make_grid((16, 12), 0.4, (0.0, 0.0))
    bc = BoundaryPolicy(bottom=EdgePolicy.dirichlet_farfield(1.0), top=EdgePolicy.dirichlet_farfield(0.0))
    opts = EvolveOptions(t_end=1.0, snapshot_every=0.25, drift=0.3, workers=1)
    for _ in range(20):
        lower = rng.random(grid.shape)
        upper = np.minimum(lower + rng.random(grid.shape) * 0.3, 1.0)
        us = evolve(grid.with_values(lower), F, bc, opts)
        vs = evolve(grid.with_values(upper), F, bc, opts)
        for u, v in zip(us, vs):
            assert np.all(u.values <= v.values + 1e-12)


def test_shifted_data_give_shifted_solutions():
    grid = make_grid((301,), 0.2, (-30.0,))
    x = grid.axis(0)
    shift = 40
    u0 = grid.with_values(np.where(np.abs(x) <= 2.0, 0.9, 0.0))
    v0 = grid.with_values(np.roll(u0.values, shift))
    opts = EvolveOptions(t_end=0.5, workers=1)
    u = evolve(u0, F, BoundaryPolicy(), opts)[-1]
    v = evolve(v0, F, BoundaryPolicy(), opts)[-1]
    assert np.array_equal(v.values[shift:], u.values[:-shift])
    moved = evolve(make_grid((301,), 0.2, (-22.0,)).with_values(u0.values), F, BoundaryPolicy(), opts)[-1]
    assert np.array_equal(moved.values, u.values) and moved.origin == (-22.0,)


if __name__ == "__main__":
    tests = [
        test_grid_layout,
        test_cfl_limit_and_rejection,
        test_farfield_limit_must_be_a_stable_state,
        test_equilibria_are_kept,
        test_snapshot_times_are_exact,
        test_symmetric_data_stays_symmetric,
        test_half_plane_matches_even_extension,
        test_workers_do_not_change_the_result,
        test_comoving_frame_holds_a_travelling_wave,
        test_profile_trace_follows_time,
        test_residual_of_a_travelling_wave,
        test_snapshot_files,
        test_ordered_data_stay_ordered,
        test_shifted_data_give_shifted_solutions,
    ]
    print("=" * 60)
    print("TEST: RD ENGINE")
    print("=" * 60)
    for test in tests:
        print(f"[TEST] {test.__name__}")
        test()
        print("  [OK]")
    print(f"\n[OK] {len(tests)} tests passed")
