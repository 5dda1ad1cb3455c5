import numpy as np
import pytest

from debond import (
    DomainError,
    MonotoneMap,
    RangeError,
    SampledFunction,
    constant,
    definite_integral,
    derivative,
    evaluate,
    from_callable,
    invert,
)


def test_evaluate_constant():
    fn = constant(2.0, 0.0, 1.0)
    assert evaluate(fn, 0.5) == 2.0


def test_evaluate_identity_interpolation():
    fn = SampledFunction([0.0, 1.0], [0.0, 1.0])
    assert evaluate(fn, 0.25) == 0.25


def test_evaluate_midpoint_of_segment():
    fn = SampledFunction([0.0, 2.0], [0.0, 4.0])
    assert evaluate(fn, 1.0) == 2.0


def test_evaluate_rejects_extrapolation():
    fn = constant(1.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        evaluate(fn, 1.5)
    with pytest.raises(DomainError):
        evaluate(fn, -0.5)


def test_evaluate_exact_at_sample_points():
    xs = np.array([0.0, 0.3, 0.7, 1.0])
    vs = np.array([1.0, -2.0, 5.0, 0.5])
    fn = SampledFunction(xs, vs)
    for x, v in zip(xs, vs):
        assert evaluate(fn, x) == v


def test_invariant_rejects_bad_spacing():
    with pytest.raises(ValueError):
        SampledFunction([0.0, 0.0, 1.0], [0.0, 0.0, 1.0])
    with pytest.raises(ValueError):
        SampledFunction([0.0], [1.0])
    with pytest.raises(ValueError):
        SampledFunction([1.0, 0.0], [0.0, 1.0])


def test_definite_integral_constant():
    fn = constant(2.0, 0.0, 1.0)
    assert definite_integral(fn, 0.0, 1.0) == pytest.approx(2.0, abs=1e-15)


def test_definite_integral_antisymmetric():
    fn = constant(2.0, 0.0, 1.0)
    assert definite_integral(fn, 1.0, 0.0) == pytest.approx(-2.0, abs=1e-15)


def test_definite_integral_triangle():
    fn = SampledFunction([0.0, 2.0], [0.0, 4.0])
    assert definite_integral(fn, 0.0, 2.0) == pytest.approx(4.0, abs=1e-15)


def test_definite_integral_partial_segments():
    # |2x - 1| polyline: two triangles of area 1/16 each over [0.25, 0.75]
    fn = SampledFunction([0.0, 0.5, 1.0], [1.0, 0.0, 1.0])
    assert definite_integral(fn, 0.25, 0.75) == pytest.approx(0.125, abs=1e-15)
    with pytest.raises(DomainError):
        definite_integral(fn, -0.1, 0.5)


def test_invert_identity():
    m = MonotoneMap.from_samples([0.0, 1.0], [0.0, 1.0])
    assert invert(m, 0.7) == pytest.approx(0.7, abs=1e-15)


def test_invert_unit_shift():
    # tau_plus for a static unit front: t -> t + 1
    m = MonotoneMap.from_samples([0.0, 5.0], [1.0, 6.0])
    assert invert(m, 3.0) == pytest.approx(2.0, abs=1e-12)


def test_invert_moving_front_tau_minus():
    # tau_minus for ell(t) = 1 + 0.6 t: t -> 0.4 t - 1; hand-solve 0.4 t - 1 = 0
    t = np.linspace(0.0, 5.0, 11)
    m = MonotoneMap.from_samples(t, 0.4 * t - 1.0)
    assert invert(m, 0.0) == pytest.approx(2.5, abs=1e-12)


def test_invert_rejects_out_of_range():
    m = MonotoneMap.from_samples([0.0, 1.0], [0.0, 1.0])
    with pytest.raises(RangeError):
        invert(m, 2.0)


def test_monotone_map_rejects_nonincreasing_values():
    with pytest.raises(ValueError):
        MonotoneMap.from_samples([0.0, 1.0, 2.0], [0.0, 1.0, 1.0])


def test_derivative_constant_is_zero():
    fn = constant(3.0, 0.0, 2.0)
    d = derivative(fn)
    assert d(1.3) == 0.0


def test_derivative_single_segment():
    fn = SampledFunction([0.0, 1.0], [0.0, 2.0])
    d = derivative(fn)
    assert d(0.0) == 2.0 and d(1.0) == 2.0 and d(0.4) == 2.0


def test_derivative_of_square_against_analytic():
    fn = from_callable(lambda x: x * x, 0.0, 1.0, 1000)
    d = derivative(fn)
    assert d(0.5) == pytest.approx(1.0, abs=1e-3)


def test_roundtrip_inversion_property():
    rng = np.random.default_rng(7)
    for _ in range(10):
        n = rng.integers(5, 40)
        xs = np.sort(rng.uniform(-3.0, 3.0, n))
        xs = np.unique(xs)
        if xs.size < 2:
            continue
        vs = np.cumsum(rng.uniform(0.1, 2.0, xs.size))
        m = MonotoneMap.from_samples(xs, vs)
        t = rng.uniform(xs[0], xs[-1], 1000)
        span = xs[-1] - xs[0]
        back = m.invert(m(t))
        assert np.max(np.abs(back - t)) <= 1e-10 * max(span, 1.0)


def test_integral_of_derivative_recovers_increments():
    rng = np.random.default_rng(3)
    h = 1e-3
    fn = from_callable(np.sin, 0.0, 3.0, int(3.0 / h))
    d = derivative(fn)
    for _ in range(50):
        a, b = np.sort(rng.uniform(0.0, 3.0, 2))
        assert definite_integral(d, a, b) == pytest.approx(fn(b) - fn(a), abs=20 * h)


def test_evaluate_monotone_between_samples():
    rng = np.random.default_rng(11)
    xs = np.linspace(0.0, 1.0, 17)
    vs = np.cumsum(rng.uniform(0.0, 1.0, 17))
    fn = SampledFunction(xs, vs)
    q = np.sort(rng.uniform(0.0, 1.0, 200))
    out = fn(q)
    assert np.all(np.diff(out) >= -1e-14)
