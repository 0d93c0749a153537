import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swarmdrift import splines
from swarmdrift.errors import (
    DomainMismatch,
    InsufficientKnots,
    InvalidKnots,
    NonFiniteInput,
    NoRefinementNeeded,
    OutOfDomain,
)
from swarmdrift.splines import (
    DERIVATIVE_MATCHED,
    NATURAL,
    NOT_A_KNOT,
    KnotVector,
    build_spline,
    l2_distance,
    refine_knots,
)


def test_linear_data_reproduces_line():
    s = build_spline([0, 1, 2, 3], [0, 1, 2, 3], NATURAL)
    for x in np.linspace(0, 3, 50):
        assert s.eval(x) == pytest.approx(x, abs=1e-12)


def test_constant_data_any_boundary():
    for boundary in (NATURAL, DERIVATIVE_MATCHED):
        s = build_spline([0, 1, 2, 3], [5, 5, 5, 5], boundary)
        assert s.eval(1.5) == pytest.approx(5.0, abs=1e-12)


def test_sine_derivative_matched():
    knots = np.linspace(0, 2 * math.pi, 9)
    s = build_spline(knots, np.sin(knots), DERIVATIVE_MATCHED)
    assert abs(s.eval(math.pi / 8) - math.sin(math.pi / 8)) < 2e-3
    assert abs(s.eval(math.pi / 2) - 1.0) < 2e-3


def test_build_errors():
    with pytest.raises(InsufficientKnots):
        build_spline([0, 1, 2], [0, 0, 0])
    with pytest.raises(InvalidKnots):
        build_spline([0, 2, 1, 3], [0, 0, 0, 0])
    with pytest.raises(InvalidKnots):
        build_spline([0, 1, 1, 3], [0, 0, 0, 0])
    with pytest.raises(NonFiniteInput):
        build_spline([0, 1, 2, 3], [0, math.nan, 0, 0])
    with pytest.raises(InvalidKnots):
        build_spline([0, 1, 2, math.inf], [0, 0, 0, 0])


def test_eval_out_of_domain():
    s = build_spline([0, 1, 2, 3], [0, 1, 2, 3])
    with pytest.raises(OutOfDomain):
        s.eval(-0.001)
    with pytest.raises(OutOfDomain):
        s.eval(3.001)
    with pytest.raises(OutOfDomain):
        s.integral(-1, 2)


def test_integral_constant_and_linear():
    const = build_spline([0, 0.5, 1, 1.5, 2], [5] * 5)
    assert const.integral(0, 2) == pytest.approx(10.0, abs=1e-12)
    line = build_spline([0, 1, 2, 3], [0, 1, 2, 3])
    assert line.integral(0, 3) == pytest.approx(4.5, abs=1e-12)


def test_integral_cubic_exact():
    # antiderivative oracle: integral of x^3 over [0,1] is x^4/4 -> 0.25;
    # exact reproduction of a generic cubic needs the not-a-knot closure
    # (natural would impose zero end curvature, which x^3 does not have)
    knots = np.linspace(0, 1, 20)
    s = build_spline(knots, knots**3, NOT_A_KNOT)
    assert s.integral(0, 1) == pytest.approx(0.25, abs=1e-12)


def test_cubic_polynomial_exactness(rng):
    # cubic data is reproduced exactly (values and integrals, 1e-10 relative)
    coeffs = rng.normal(size=4)

    def poly(x):
        return ((coeffs[3] * x + coeffs[2]) * x + coeffs[1]) * x + coeffs[0]

    def poly_int(a, b):
        def anti(x):
            return (((coeffs[3] / 4 * x + coeffs[2] / 3) * x + coeffs[1] / 2) * x
                    + coeffs[0]) * x
        return anti(b) - anti(a)

    knots = np.sort(rng.uniform(-2, 2, 17))
    knots[0], knots[-1] = -2.0, 2.0
    s = build_spline(knots, poly(knots), NOT_A_KNOT)
    probes = rng.uniform(-2, 2, 40)
    scale = max(1.0, np.abs(poly(probes)).max())
    assert np.allclose(s.eval(probes), poly(probes), atol=1e-10 * scale)
    ref = poly_int(-1.3, 1.7)
    assert s.integral(-1.3, 1.7) == pytest.approx(ref, rel=1e-10, abs=1e-10)


@given(values=st.lists(st.floats(-50, 50), min_size=5, max_size=24))
@settings(max_examples=80, deadline=None)
def test_interpolation_at_knots(values):
    knots = np.arange(len(values), dtype=float)
    for boundary in (NATURAL, DERIVATIVE_MATCHED):
        s = build_spline(knots, values, boundary)
        for k, v in zip(knots, values):
            assert abs(s.eval(k) - v) <= 1e-12 * max(1.0, abs(v))


def test_c2_continuity_at_interior_knots(rng):
    knots = np.sort(rng.uniform(0, 10, 12))
    knots[0], knots[-1] = 0.0, 10.0
    values = rng.normal(size=12)
    for boundary in (NATURAL, DERIVATIVE_MATCHED):
        s = build_spline(knots, values, boundary)
        eps = 1e-7
        for k in knots[1:-1]:
            for f in (s.eval, s.derivative, s.second_derivative):
                left, right = f(k - eps), f(k + eps)
                scale = max(1.0, abs(left), abs(right))
                # C2: one-sided probes agree up to the probe offset itself
                assert abs(left - right) <= 1e-5 * scale


def test_natural_boundary_second_derivative_zero(rng):
    knots = np.linspace(0, 1, 9)
    s = build_spline(knots, rng.normal(size=9), NATURAL)
    assert abs(s.second_derivative(0.0)) < 1e-10
    assert abs(s.second_derivative(1.0)) < 1e-10


def test_derivative_matched_boundary(rng):
    knots = np.linspace(0, 1, 9)
    s = build_spline(knots, rng.normal(size=9), DERIVATIVE_MATCHED)
    assert s.derivative(0.0) == pytest.approx(s.derivative(1.0), abs=1e-9)
    assert s.second_derivative(0.0) == pytest.approx(s.second_derivative(1.0), abs=1e-9)


@given(
    values=st.lists(st.floats(-10, 10), min_size=6, max_size=12),
    cuts=st.tuples(st.floats(0.01, 0.99), st.floats(0.01, 0.99)),
)
@settings(max_examples=60, deadline=None)
def test_integral_additivity(values, cuts):
    knots = np.arange(len(values), dtype=float)
    s = build_spline(knots, values)
    hi = knots[-1]
    a, b = sorted((cuts[0] * hi, cuts[1] * hi))
    total = s.integral(0.0, a) + s.integral(a, b) + s.integral(b, hi)
    scale = max(1.0, abs(total))
    assert abs(total - s.integral(0.0, hi)) <= 1e-12 * scale


def test_refine_constant_doubles_equidistantly():
    s = build_spline([0, 1, 2, 3], [5, 5, 5, 5])
    refined = refine_knots(s, 7)  # double the interval count
    assert np.allclose(refined.positions, np.arange(0, 3.5, 0.5))


def test_refine_count_contract():
    s = build_spline([0, 1, 2, 3], [0, 1, 2, 3])
    refined = refine_knots(s, 5)
    assert len(refined) == 5
    assert set(np.round(s.knots, 12)) <= set(np.round(refined.positions, 12))


def test_refine_kink_locality():
    # single curvature spike at a knot; the third-derivative jump of an
    # interpolated kink spreads one knot outward, so insertions must land
    # within two intervals of the spike and hit both straddling intervals
    knots = np.linspace(0, 1, 8)
    kink = knots[3]
    s = build_spline(knots, np.abs(knots - kink))
    refined = refine_knots(s, 12)
    fresh = np.setdiff1d(refined.positions, knots)
    assert len(fresh) == 4
    assert np.all(fresh >= knots[1]) and np.all(fresh <= knots[5])
    assert np.any((fresh > knots[2]) & (fresh < kink))
    assert np.any((fresh > kink) & (fresh < knots[4]))


def test_refine_rejects_non_growth():
    s = build_spline([0, 1, 2, 3], [0, 1, 2, 3])
    with pytest.raises(NoRefinementNeeded):
        refine_knots(s, 4)


@given(values=st.lists(st.floats(-5, 5), min_size=4, max_size=10),
       extra=st.integers(1, 12))
@settings(max_examples=60, deadline=None)
def test_refine_superset_strictly_increasing(values, extra):
    knots = np.arange(len(values), dtype=float)
    s = build_spline(knots, values)
    refined = refine_knots(s, len(values) + extra).positions
    assert len(refined) == len(values) + extra
    assert np.all(np.diff(refined) > 0)
    assert np.all(np.isin(knots, refined))


def test_l2_identical_is_zero():
    s = build_spline([0, 1, 2, 3], [0, 1, 4, 2])
    assert l2_distance(s, s) == 0.0


def test_l2_constant_offset():
    a = build_spline(np.linspace(0, 1, 5), np.zeros(5))
    b = build_spline(np.linspace(0, 1, 5), np.full(5, 2.0))
    assert l2_distance(a, b) == pytest.approx(2.0, abs=1e-12)


def test_l2_identity_vs_zero():
    # oracle: integral of x^2 over [0,1] is 1/3
    grid = np.linspace(0, 1, 6)
    a = build_spline(grid, np.zeros(6))
    b = build_spline(grid, grid)
    assert l2_distance(a, b) == pytest.approx(1.0 / math.sqrt(3.0), abs=1e-12)


def test_l2_domain_mismatch():
    a = build_spline([0, 1, 2, 3], [0, 0, 0, 0])
    b = build_spline([0, 1, 2, 4], [0, 0, 0, 0])
    with pytest.raises(DomainMismatch):
        l2_distance(a, b)


def test_l2_symmetry_and_triangle(rng):
    grid = np.linspace(0, 2, 9)
    for _ in range(25):
        a, b, c = (build_spline(grid, rng.normal(size=9)) for _ in range(3))
        assert l2_distance(a, b) == pytest.approx(l2_distance(b, a), abs=1e-14)
        assert l2_distance(a, c) <= l2_distance(a, b) + l2_distance(b, c) + 1e-10


def test_json_roundtrip():
    s = build_spline([0, 1, 2, 3], [0.5, -1.0, 2.0, 0.0], DERIVATIVE_MATCHED)
    doc = json.loads(s.to_json())
    assert doc["boundary"] == "derivative_matched"
    clone = splines.spline_from_json(s.to_json())
    probes = np.linspace(0, 3, 20)
    assert np.allclose(clone.eval(probes), s.eval(probes), atol=1e-14)


def test_knot_vector_invariants():
    with pytest.raises(InsufficientKnots):
        KnotVector(np.array([0.0, 1.0, 2.0]))
    kv = KnotVector(np.array([0.0, 0.5, 1.5, 2.0]))
    assert kv.domain == (0.0, 2.0)
    assert len(kv) == 4
