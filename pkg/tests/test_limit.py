import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plap_limit import oracles
from plap_limit.limit import (Component, InfeasibleComponentError, LimitFunction, affine_limit,
                              ball_core_limit, beta_star, component_limit, dirichlet_limit,
                              k_coefficient, obstacle_limit, radial_limit)
from plap_limit.piecewise import IntervalSet, PiecewisePoly, antiderivative


def ex1_data():
    return oracles.example_data(1)


class TestBuildingBlocks:
    def test_beta_star_tent(self):
        F = PiecewisePoly.linear_interpolant([0, 1, 2], [0, 1, 0])
        # mu{F < r} = 2r, so the threshold for target 1 is r = 1/2
        assert beta_star(F, 1.0) == pytest.approx(0.5, abs=1e-12)

    def test_beta_star_infinite_when_target_is_the_length(self):
        F = PiecewisePoly.linear_interpolant([0, 1], [0, 1])
        assert math.isinf(beta_star(F, 1.0))

    def test_beta_star_snaps_to_plateau(self):
        F = PiecewisePoly.linear_interpolant([0, 1, 2, 3], [0, 1, 1, 2])
        assert beta_star(F, 1.5) == 1.0

    def test_beta_star_rejects_negative_target(self):
        F = PiecewisePoly.linear_interpolant([0, 1], [0, 1])
        with pytest.raises(InfeasibleComponentError):
            beta_star(F, -0.5)

    def test_k_coefficient(self):
        e = IntervalSet.empty()
        assert k_coefficient(IntervalSet([(0, 1)]), e, IntervalSet([(1, 3)]), 0.0) == -0.5
        assert k_coefficient(e, e, e, 0.3) == 0.0


class TestDirichlet:
    def test_example1_limit(self):
        f, _ = ex1_data()
        U = dirichlet_limit(f, 0.0, 3.0, 0.0, 0.0)
        x = np.linspace(0, 3, 601)
        assert np.allclose(U(x), oracles.dirichlet_limit_closed_form(1, x), atol=1e-12)
        assert U.k_values == [pytest.approx(0.5)]

    def test_example2_data_without_obstacle(self):
        f, _ = oracles.example_data(2)
        U = dirichlet_limit(f, 0.0, 3.0, 0.0, 0.0)
        x = np.linspace(0, 3, 601)
        assert np.allclose(U(x), oracles.dirichlet_limit_closed_form(2, x), atol=1e-12)

    def test_positive_datum_gives_distance(self):
        f = PiecewisePoly.constant(1.0, 0, 2)
        U = dirichlet_limit(f, 0.0, 2.0, 0.0, 0.0)
        x = np.linspace(0, 2, 101)
        assert np.allclose(U(x), np.minimum(x, 2 - x), atol=1e-12)

    def test_steep_data_rejected_and_affine_fallback(self):
        f = PiecewisePoly.constant(1.0, 0, 1)
        with pytest.raises(InfeasibleComponentError):
            dirichlet_limit(f, 0.0, 1.0, 0.0, 2.0)
        U = affine_limit(0.0, 1.0, 0.0, 2.0)
        assert U(0.5) == pytest.approx(1.0)

    def test_zero_datum_uses_plateau_slope(self):
        f = PiecewisePoly.constant(0.0, 0, 2)
        U = dirichlet_limit(f, 0.0, 2.0, 0.0, 1.0)
        assert U(1.0) == pytest.approx(0.5)

    def test_evaluation_outside_domain(self):
        U = dirichlet_limit(PiecewisePoly.constant(1.0, 0, 1), 0.0, 1.0, 0.0, 0.0)
        with pytest.raises(ValueError):
            U(1.5)


@pytest.mark.parametrize("example", range(1, 8))
def test_example_limits_match_closed_form(example):
    f, phi = oracles.example_data(example)
    gamma = oracles.example_gamma_infty(example)
    if example >= 6:
        U = radial_limit(f, phi, 2, 0.0, 2.0, gamma)
    else:
        U = obstacle_limit(f, phi, gamma)
    lo, hi = oracles.DOMAINS[example]
    x = np.linspace(lo, hi, 1201)
    assert np.allclose(U(x), oracles.closed_form_limit(example, x), atol=1e-12)
    assert U.continuity_defect() <= 1e-12
    assert U.lipschitz_constant() <= 1 + 1e-12
    assert U.obstacle_gap() >= -1e-12


def test_radial_limit_independent_of_dimension():
    f, phi = oracles.example_data(7)
    gamma = oracles.example_gamma_infty(7)
    x = np.linspace(0, 2, 401)
    a = radial_limit(f, phi, 2, 0.0, 2.0, gamma)(x)
    b = radial_limit(f, phi, 3, 0.0, 2.0, gamma)(x)
    assert np.allclose(a, b, atol=1e-12)


def test_ball_core():
    g = PiecewisePoly.constant(-1.0, 0, 1)
    U = ball_core_limit(g, 2, 0.5, 0.75)
    assert U(0.5) == pytest.approx(0.75)
    with pytest.raises(ValueError):
        ball_core_limit(g, 2, 0.0, 1.0)


def test_gamma_outside_domain():
    f, phi = ex1_data()
    with pytest.raises(ValueError):
        obstacle_limit(f, phi, IntervalSet([(2.0, 4.0)]))


def test_serialization():
    f, phi = ex1_data()
    U = obstacle_limit(f, phi, oracles.example_gamma_infty(1))
    obj = json.loads(U.dumps())
    assert obj["domain"] == [0.0, 3.0]
    assert [p["kind"] for p in obj["pieces"]][-1] == "obstacle"
    lines = U.to_csv(31).splitlines()
    assert lines[0] == "x,U"
    assert len(lines) >= 32
    P = U.to_piecewise()
    assert P(1.0) == pytest.approx(1.0)


# -- properties ---------------------------------------------------------------

@st.composite
def components(draw):
    lo = draw(st.floats(-3, 3))
    L = draw(st.floats(0.1, 4))
    hi = lo + L
    k = draw(st.integers(1, 5))
    cuts = sorted(draw(st.lists(st.floats(0.01, 0.99), min_size=k - 1, max_size=k - 1,
                                unique=True)))
    br = [lo] + [lo + c * L for c in cuts] + [hi]
    if np.any(np.diff(br) <= 1e-9):
        br = list(np.linspace(lo, hi, k + 1))
    # zero or O(1) values: nearly flat antiderivatives make mu{F < r} jump by
    # more than the boundary tolerance within one ulp of r
    level = st.one_of(st.just(0.0), st.floats(1e-3, 3), st.floats(-3, -1e-3))
    vals = draw(st.lists(level, min_size=k, max_size=k))
    A = draw(st.floats(-2, 2))
    B = A + draw(st.floats(-1, 1)) * L
    kind = draw(st.sampled_from(["dirichlet", "interior", "left", "right"]))
    return PiecewisePoly.step(br, vals), Component(kind, lo, hi, A, B)


@settings(max_examples=150, deadline=None)
@given(components())
def test_component_limits_are_lipschitz_and_hit_boundary_values(data):
    f, comp = data
    pieces, rep = component_limit(f, comp)
    U = LimitFunction((comp.lo, comp.hi), tuple(pieces), reports=(rep,))
    assert abs(rep.k) <= 1
    assert U.lipschitz_constant() <= 1 + 1e-9
    assert U.continuity_defect() <= 1e-9
    assert U(comp.lo) == pytest.approx(comp.left_value, abs=1e-9)
    assert U(comp.hi) == pytest.approx(comp.right_value, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(components())
def test_sets_partition_the_component(data):
    f, comp = data
    _, rep = component_limit(f, comp)
    total = rep.o_minus.measure + rep.o_plus.measure + rep.o_zero.measure
    if not rep.affine:
        assert total == pytest.approx(comp.length, rel=1e-9)
    F = antiderivative(f.restrict(comp.lo, comp.hi), comp.base)
    assert abs(F(comp.base)) <= 1e-12


@pytest.mark.parametrize("scale", [1e-150, 1e-6, 1e6, 1e150])
def test_limit_is_invariant_under_scaling_the_datum(scale):
    f = PiecewisePoly.step([0, 0.25, 1.5, 2, 3], [0, 1, -1, 0.5])
    x = np.linspace(0, 3, 301)
    base = dirichlet_limit(f, 0.0, 3.0, 0.0, 0.2)(x)
    scaled = dirichlet_limit(PiecewisePoly(f.breaks, f.coeffs * scale), 0.0, 3.0, 0.0, 0.2)(x)
    assert np.allclose(scaled, base, atol=1e-12)
