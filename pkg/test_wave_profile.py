"""
Tests for front speeds and profiles.
Run with pytest or directly: python test_wave_profile.py
"""

import math
import tempfile
from pathlib import Path

import numpy as np
import pytest

from errors import DomainError
from nonlinearity import make_cubic, make_quintic, reflect
from wave_profile import (cubic_closed_form, decay_rates, eval_profile, invert_profile, ode_flow,
                          profile_residual, read_profile_csv, solve_profile, subfront_speeds,
                          write_profile_csv)

F = make_cubic(0.3)
P = solve_profile(F)


def test_cubic_speed_matches_closed_form():
    exact, phi = cubic_closed_form(0.3)
    assert abs(P.speed - exact) < 1e-6
    assert np.max(np.abs(P.phi - phi(P.xi))) < 1e-5


def test_profile_shape():
    assert P.phi[len(P.phi) // 2] == 0.5
    assert np.all(np.diff(P.phi) <= 0.0)
    assert P.phi[0] > 1 - 1e-6 and P.phi[-1] < 1e-6


def test_profile_residual_down_to_the_tail():
    for theta in (0.1, 0.3, 0.45, 0.49):
        f = make_cubic(theta)
        profile = P if theta == 0.3 else solve_profile(f)
        assert profile_residual(profile, f) <= 1e-6, theta


def test_tails_stay_in_open_interval():
    far = np.array([-1e4, -200.0, 0.0, 200.0, 1e4])
    values = eval_profile(P, far)
    assert np.all(values > 0.0) and np.all(values < 1.0)
    assert np.all(np.diff(values) <= 0.0)
    assert P(0.0) == 0.5


def test_invert_profile():
    assert abs(invert_profile(P, 0.5)) < 1e-9
    for level in (0.05, 0.3, 0.9):
        assert abs(eval_profile(P, invert_profile(P, level)) - level) < 1e-8
    with pytest.raises(DomainError):
        invert_profile(P, 1.0)


def test_decay_rates_of_the_cubic():
    lam, mu = decay_rates(F, P.speed)
    assert abs(lam - 1 / math.sqrt(2)) < 1e-6
    assert abs(mu - 1 / math.sqrt(2)) < 1e-6
    assert (lam, mu) == (P.lam, P.mu)


def test_speed_sign_follows_the_integral():
    assert solve_profile(make_cubic(0.7)).speed < 0 < P.speed
    assert abs(solve_profile(make_cubic(0.5)).speed) < 1e-6


def test_multistable_terms_are_refused():
    with pytest.raises(DomainError):
        solve_profile(make_quintic(0.1, 0.9, 8.0))


def test_terrace_ladder():
    ladder = subfront_speeds(make_quintic(0.1, 0.9, 8.0))
    assert ladder.intervals == [(0.0, 0.5), (0.5, 1.0)]
    assert ladder.speeds[0] > 0.0 > ladder.speeds[1]
    assert ladder.terrace and not ladder.single_front_possible


def test_ode_flow():
    assert ode_flow(F, 0.9, 0.0) == 0.9
    later = ode_flow(F, 0.9, [1.0, 5.0, 20.0])
    assert np.all(np.diff(later) > 0.0) and later[-1] > 0.999
    assert ode_flow(F, 0.2, 20.0) < 0.01
    with pytest.raises(DomainError):
        ode_flow(F, 0.5, -1.0)


def test_profile_csv():
    with tempfile.TemporaryDirectory() as tmp:
        path = write_profile_csv(P, Path(tmp) / "profile.csv")
        assert path.read_text().startswith("# c_f=")
        back = read_profile_csv(path)
    assert math.isclose(back.speed, P.speed, rel_tol=1e-11)
    assert np.allclose(back.phi, P.phi, atol=1e-14)


def test_speed_decreases_with_theta():
    speeds = [solve_profile(make_cubic(theta)).speed for theta in np.arange(1, 10) / 10.0]
    assert np.all(np.diff(speeds) < 0.0)


def test_reflection_reverses_the_speed():
    tol = 1e-10
    for g in (reflect(F), make_cubic(0.7)):
        assert abs(solve_profile(g, tol).speed + P.speed) <= 2 * tol, str(g)


def test_symmetric_quintic_has_opposite_subfront_speeds():
    ladder = subfront_speeds(make_quintic(0.25, 0.75, 6.0))
    low, high = ladder.speeds
    assert high > 0.0 > low
    assert abs(low + high) <= 1e-9


if __name__ == "__main__":
    tests = [
        test_cubic_speed_matches_closed_form,
        test_profile_shape,
        test_profile_residual_down_to_the_tail,
        test_tails_stay_in_open_interval,
        test_invert_profile,
        test_decay_rates_of_the_cubic,
        test_speed_sign_follows_the_integral,
        test_multistable_terms_are_refused,
        test_terrace_ladder,
        test_ode_flow,
        test_profile_csv,
        test_speed_decreases_with_theta,
        test_reflection_reverses_the_speed,
        test_symmetric_quintic_has_opposite_subfront_speeds,
    ]
    print("=" * 60)
    print("TEST: WAVE PROFILE")
    print("=" * 60)
    for test in tests:
        print(f"[TEST] {test.__name__}")
        test()
        print("  [OK]")
    print(f"\n[OK] {len(tests)} tests passed")
