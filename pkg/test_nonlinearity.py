"""
Tests for reaction terms: construction, parsing, derived terms, analysis.
Run with pytest or directly: python test_nonlinearity.py
"""

import math

import numpy as np
import pytest

from errors import DomainError
from nonlinearity import (analyze, locate_zeros, make_cubic, make_custom, make_quintic,
                          parse_nonlinearity, reflect, restrict, stable_zeros)


def test_cubic_constants():
    f = make_cubic(0.3)
    assert f.zeros == (0.0, 0.3, 1.0)
    assert math.isclose(f.integral01, (1 - 2 * 0.3) / 12, rel_tol=1e-12)
    assert math.isclose(f.fprime0, -0.3, rel_tol=1e-12)
    assert math.isclose(f.fprime1, -0.7, rel_tol=1e-12)
    assert f.eval(0.3) == 0.0
    assert f.theta_minus == f.theta_plus == 0.3
    assert f.max_abs_deriv >= 0.7


def test_cubic_rejects_theta_outside_unit_interval():
    for theta in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(DomainError):
            make_cubic(theta)
    # DomainError is also a ValueError
    with pytest.raises(ValueError):
        make_cubic(2.0)


def test_call_clamps_to_unit_interval():
    f = make_cubic(0.3)
    assert f(1.5) == f.eval(1.0) == 0.0
    assert f(-0.5) == 0.0
    assert np.allclose(f(np.array([0.5, 2.0])), [f.eval(0.5), 0.0])


def test_quintic_zeros_and_stability():
    f = make_quintic(0.1, 0.9, 8.0)
    assert f.zeros == (0.0, 0.1, 0.5, 0.9, 1.0)
    assert stable_zeros(f) == [0.0, 0.5, 1.0]
    with pytest.raises(DomainError):
        make_quintic(0.6, 0.9, 8.0)
    with pytest.raises(DomainError):
        make_quintic(0.1, 0.9, -1.0)


def test_parse_nonlinearity():
    assert parse_nonlinearity("cubic(0.3)").params == (0.3,)
    assert parse_nonlinearity(" quintic(0.2, 0.8, 8.0) ").params == (0.2, 0.8, 8.0)
    for bad in ("cubic()", "cubic(0.2, 0.3)", "sine(1)", "quintic(0.2, 0.8)", "cubic(x)", ""):
        with pytest.raises(DomainError):
            parse_nonlinearity(bad)


def test_reflect_mirrors_zeros_and_integral():
    f = make_cubic(0.3)
    g = reflect(f)
    assert any(abs(z - 0.7) < 1e-9 for z in g.zeros)
    assert math.isclose(g.integral01, -f.integral01, rel_tol=1e-9)
    s = np.linspace(0.0, 1.0, 11)
    assert np.allclose(g.eval(s), -f.eval(1.0 - s))


def test_restrict_rescales_a_piece():
    f = make_quintic(0.1, 0.9, 8.0)
    low = restrict(f, 0.0, 0.5)
    assert low.eval(0.0) == 0.0
    assert abs(low.eval(1.0)) < 1e-15
    interior = [z for z in low.zeros if 0.0 < z < 1.0]
    assert len(interior) == 1 and abs(interior[0] - 0.2) < 1e-9
    assert analyze(low).is_bistable
    with pytest.raises(DomainError):
        restrict(f, 0.5, 0.5)


def test_analyze_flags():
    assert analyze(make_cubic(0.3)).is_bistable
    quintic = analyze(make_quintic(0.1, 0.9, 8.0))
    assert quintic.is_hypothesis_f and not quintic.is_bistable
    monostable = analyze(make_custom(lambda s: s * (1.0 - s), label="kpp"))
    assert not monostable.is_hypothesis_f
    assert monostable.zeros[0] == 0.0 and monostable.zeros[-1] == 1.0


def test_locate_zeros_bisects_sign_changes():
    zeros = locate_zeros(lambda s: (s - 1.0 / 3.0) * (s - 0.75))
    assert len(zeros) == 2
    assert abs(zeros[0] - 1.0 / 3.0) < 1e-11 and abs(zeros[1] - 0.75) < 1e-11


def test_custom_derivative_by_differences():
    f = make_custom(lambda s: np.sin(np.pi * s) * (s - 0.4))
    assert abs(f.deriv(0.5) - (np.pi * np.cos(np.pi * 0.5) * 0.1 + np.sin(np.pi * 0.5))) < 1e-6


def test_derivatives_match_centered_differences():
    s = np.linspace(0.0, 1.0, 101)
    step = 1e-5
    terms = [make_cubic(0.3), make_quintic(0.2, 0.8, 8.0), reflect(make_cubic(0.3)),
             restrict(make_quintic(0.1, 0.9, 8.0), 0.5, 1.0)]
    for f in terms:
        difference = (f.eval(s + step) - f.eval(s - step)) / (2.0 * step)
        assert np.max(np.abs(f.deriv(s) - difference)) <= 1e-6, str(f)


def test_analyze_recovers_random_cubic_thresholds():
    rng = np.random.default_rng(11)
    for theta in rng.uniform(0.01, 0.99, size=50):
        report = analyze(make_cubic(theta))
        assert report.is_bistable
        assert abs(report.theta_minus - theta) <= 1e-10
        assert abs(report.theta_plus - theta) <= 1e-10


def test_quintic_sign_pattern_on_random_parameters():
    rng = np.random.default_rng(12)
    for theta1, theta2, k in zip(rng.uniform(0.01, 0.49, 50), rng.uniform(0.51, 0.99, 50),
                                 rng.uniform(0.5, 10.0, 50)):
        f = make_quintic(theta1, theta2, k)
        edges = [0.0, theta1, 0.5, theta2, 1.0]
        midpoints = 0.5 * (np.array(edges[:-1]) + np.array(edges[1:]))
        assert list(np.sign(f.eval(midpoints))) == [-1.0, 1.0, -1.0, 1.0]


if __name__ == "__main__":
    tests = [
        test_cubic_constants,
        test_cubic_rejects_theta_outside_unit_interval,
        test_call_clamps_to_unit_interval,
        test_quintic_zeros_and_stability,
        test_parse_nonlinearity,
        test_reflect_mirrors_zeros_and_integral,
        test_restrict_rescales_a_piece,
        test_analyze_flags,
        test_locate_zeros_bisects_sign_changes,
        test_custom_derivative_by_differences,
        test_derivatives_match_centered_differences,
        test_analyze_recovers_random_cubic_thresholds,
        test_quintic_sign_pattern_on_random_parameters,
    ]
    print("=" * 60)
    print("TEST: NONLINEARITY")
    print("=" * 60)
    for test in tests:
        print(f"[TEST] {test.__name__}")
        test()
        print("  [OK]")
    print(f"\n[OK] {len(tests)} tests passed")
