import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plap_limit.piecewise import (IntervalSet, PiecewisePoly, antiderivative, integrate_product,
                                  level_sets, maximum, parse_real, positive_part,
                                  sublevel_measure)


def tent() -> PiecewisePoly:
    """0 -> 1 -> 0 on [0, 2]."""
    return PiecewisePoly.linear_interpolant([0, 1, 2], [0, 1, 0])


class TestConstruction:
    def test_evaluation_takes_right_piece_at_breaks(self):
        f = PiecewisePoly.step([0, 1, 2], [3, 5])
        assert f(0.5) == 3 and f(1.0) == 5 and f(2.0) == 5
        assert f.left_limit(1.0) == 3

    def test_rejects_bad_breaks(self):
        with pytest.raises(ValueError):
            PiecewisePoly([0, 0], [[1]])
        with pytest.raises(ValueError):
            PiecewisePoly([0, 1, 2], [[1]])
        with pytest.raises(ValueError):
            PiecewisePoly([0, 1], [[math.nan]])

    def test_polynomial_in_global_variable(self):
        f = PiecewisePoly.polynomial([1, 0, -1], -2, 2)
        assert f(0.5) == pytest.approx(0.75)
        assert f.degree == 2

    def test_parse_real(self):
        assert parse_real("3/2") == 1.5
        assert parse_real(-2) == -2.0
        with pytest.raises(ValueError):
            parse_real(True)
        with pytest.raises(ValueError):
            parse_real(None)

    def test_json_roundtrip_and_interior_breaks(self):
        f = PiecewisePoly.step([0, 1, 1.5, 2, 3], [0, 1, -1, 0])
        assert PiecewisePoly.from_json(f.to_json()) == f
        g = PiecewisePoly.from_json({"domain": ["0", "3"], "breaks": ["3/2"],
                                     "coeffs": [[1], [0, 1]]})
        assert g.breaks.tolist() == [0, 1.5, 3]
        assert g(2.0) == 2.0
        with pytest.raises(ValueError):
            PiecewisePoly.from_json({"breaks": [0, 1]})


class TestCalculus:
    def test_antiderivative_of_step(self):
        f = PiecewisePoly.step([0, 1, 1.5, 2, 3], [0, 1, -1, 0])
        F = antiderivative(f, 0.0)
        assert F.is_continuous()
        assert F(1.5) == pytest.approx(0.5, abs=1e-15)
        assert F(3.0) == pytest.approx(0.0, abs=1e-15)
        G = antiderivative(f, 3.0)
        assert G(3.0) == 0.0

    def test_antiderivative_base_outside(self):
        with pytest.raises(ValueError):
            antiderivative(tent(), 5.0)

    def test_integral_and_product(self):
        f = tent()
        assert f.integral() == pytest.approx(1.0, abs=1e-15)
        assert integrate_product(f, f) == pytest.approx(2 / 3, abs=1e-15)

    def test_extrema_interior_critical_point(self):
        f = PiecewisePoly.polynomial([0, 1, -1], 0, 1)  # x - x^2
        lo, hi = f.extrema()
        assert lo == pytest.approx(0.0) and hi == pytest.approx(0.25)

    def test_roots_and_level_sets(self):
        F = tent()
        assert np.allclose(F.roots(0.5), [0.5, 1.5])
        below, above, equal = level_sets(F, 0.5)
        assert below.isclose(IntervalSet([(0, 0.5), (1.5, 2)]), 1e-15)
        assert above.isclose(IntervalSet([(0.5, 1.5)]), 1e-15)
        assert sublevel_measure(F, 0.5) == pytest.approx(1.0)

    def test_plateau_goes_to_equal_set(self):
        F = PiecewisePoly.linear_interpolant([0, 1, 2, 3], [0, 1, 1, 0])
        below, above, equal = level_sets(F, 1.0)
        assert equal.regular().isclose(IntervalSet([(1, 2)]), 1e-15)
        assert sublevel_measure(F, 1.0) == pytest.approx(2.0)
        assert sublevel_measure(F, 1.0, strict=False) == pytest.approx(3.0)

    def test_cubic_roots(self):
        f = PiecewisePoly.polynomial([0, -1, 0, 1], -2, 2)  # x^3 - x
        assert np.allclose(f.roots(), [-1, 0, 1], atol=1e-13)

    def test_maximum_splits_at_crossings(self):
        f = PiecewisePoly.polynomial([-0.5, 1], 0, 1)
        g = positive_part(f)
        assert 0.5 in g.breaks
        assert g(0.25) == 0 and g(0.75) == pytest.approx(0.25)
        h = maximum(f, PiecewisePoly.constant(0.1, 0, 1))
        assert h(0.0) == pytest.approx(0.1)

    def test_restrict_and_monomial(self):
        f = tent().restrict(0.5, 1.5)
        assert f.domain == (0.5, 1.5)
        assert f(1.0) == pytest.approx(1.0)
        g = PiecewisePoly.constant(2.0, 0, 1).times_monomial(2)
        assert g(0.5) == pytest.approx(0.5)


class TestIntervalSet:
    def test_merge_and_measure(self):
        S = IntervalSet([(2, 3), (0, 1), (1, 1.5)])
        assert S.to_list() == [[0, 1.5], [2, 3]]
        assert S.measure == pytest.approx(2.5)

    def test_set_operations(self):
        S = IntervalSet([(0, 1), (2, 3)])
        T = IntervalSet([(0.5, 2.5)])
        assert S.intersection(T).to_list() == [[0.5, 1], [2, 2.5]]
        assert S.union(T).to_list() == [[0, 3]]
        assert S.complement(0, 4).to_list() == [[1, 2], [3, 4]]
        assert IntervalSet([(0.5, 0.7)]).subset_of(S)
        assert not T.subset_of(S)
        assert IntervalSet.empty().is_empty()

    def test_rejects_reversed(self):
        with pytest.raises(ValueError):
            IntervalSet([(1, 0)])

    def test_regular_drops_points(self):
        assert IntervalSet([(0, 0), (1, 2)]).regular().to_list() == [[1, 2]]


# -- properties ---------------------------------------------------------------

values = st.floats(-5, 5, allow_nan=False)


@st.composite
def pl_functions(draw):
    n = draw(st.integers(1, 6))
    gaps = draw(st.lists(st.floats(0.05, 1.0), min_size=n, max_size=n))
    x = np.concatenate([[0.0], np.cumsum(gaps)])
    y = draw(st.lists(values, min_size=n + 1, max_size=n + 1))
    return PiecewisePoly.linear_interpolant(x, y)


@settings(max_examples=60, deadline=None)
@given(pl_functions(), values)
def test_level_sets_partition_the_domain(F, r):
    below, above, equal = level_sets(F, r)
    total = below.measure + above.measure + equal.measure
    assert total == pytest.approx(F.length, rel=1e-12, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(pl_functions(), values, values)
def test_sublevel_measure_is_monotone(F, r, s):
    lo, hi = min(r, s), max(r, s)
    assert sublevel_measure(F, lo) <= sublevel_measure(F, hi) + 1e-12


@settings(max_examples=60, deadline=None)
@given(pl_functions())
def test_antiderivative_differentiates_back(f):
    F = antiderivative(f, f.lo)
    d = F.derivative()
    x = np.linspace(f.lo, f.hi, 41)
    assert np.allclose(d(x), f(x), atol=1e-9)
    assert F.is_continuous(1e-9)


@settings(max_examples=60, deadline=None)
@given(pl_functions())
def test_positive_part_is_pointwise_max(f):
    g = positive_part(f)
    x = np.linspace(f.lo, f.hi, 101)
    assert np.allclose(g(x), np.maximum(f(x), 0.0), atol=1e-12)
