import numpy as np
import pytest

from plap_limit import oracles
from plap_limit.limit import obstacle_limit
from plap_limit.oracles import ExampleId
from plap_limit.piecewise import IntervalSet, PiecewisePoly
from plap_limit.psolver import GridFunction, ProblemSpec, obstacle_solve
from plap_limit.radial import RadialSpec, limit_for, reduce, signed_profile


def spec7(n=2, p=8.0):
    g, Phi = oracles.example_data(7)
    return RadialSpec(n, 0.0, 2.0, g, Phi, p)


class TestRadialSpec:
    @pytest.mark.parametrize("args", [(0, 0.0, 1.0), (1.5, 0.0, 1.0), (2, -1.0, 1.0),
                                      (2, 1.0, 1.0)])
    def test_rejects(self, args):
        g = PiecewisePoly.constant(0.0, 0, 2)
        with pytest.raises(ValueError):
            RadialSpec(*args, g, None, 4.0)

    def test_alpha_and_with_p(self):
        s = spec7(3, 5.0)
        assert s.alpha == pytest.approx(0.5)
        assert s.with_p(9.0).alpha == pytest.approx(0.25)
        assert s.is_ball


def test_reduce_ball_has_natural_centre():
    flat = reduce(spec7())
    assert flat.A is None and flat.B == 0.0
    assert flat.weight_exponent == 1


def test_reduce_annulus_is_dirichlet():
    g = PiecewisePoly.constant(1.0, 1, 2)
    flat = reduce(RadialSpec(3, 1.0, 2.0, g, None, 4.0))
    assert flat.A == 0.0 and flat.weight_exponent == 2


@pytest.mark.parametrize("n", [1, 2, 3])
def test_radial_solver_matches_closed_form(n):
    s = spec7(n, 8.0)
    u = obstacle_solve(reduce(s), n_nodes=1001)
    cf = oracles.closed_form_up(ExampleId(7, 8.0, n), u.x)
    assert np.max(np.abs(u.values - cf)) <= 2e-3


def test_n1_annulus_is_bitwise_flat():
    g = PiecewisePoly.step([0.5, 1.0, 2.0], [1.0, -1.0])
    Phi = PiecewisePoly.polynomial([-0.45, 1.0, -0.4], 0.5, 2.0)
    ur = obstacle_solve(reduce(RadialSpec(1, 0.5, 2.0, g, Phi, 6.0)), n_nodes=401)
    uf = obstacle_solve(ProblemSpec((0.5, 2.0), g, Phi, (0.0, 0.0), 6.0), n_nodes=401)
    assert np.array_equal(ur.values, uf.values)
    gamma = IntervalSet([(1.1, 1.4)])
    Ur = limit_for(RadialSpec(1, 0.5, 2.0, g, Phi, 6.0), gamma)
    assert Ur.pieces == obstacle_limit(g, Phi, gamma).pieces


def test_limit_for_requires_obstacle():
    g = PiecewisePoly.constant(1.0, 0, 1)
    with pytest.raises(ValueError):
        limit_for(RadialSpec(2, 0.0, 1.0, g, None, 4.0), IntervalSet.empty())


def test_signed_profile_mirrors():
    t = np.linspace(0, 1, 5)
    s, v = signed_profile(GridFunction(t, 1 - t))
    assert s.tolist() == [-1, -0.75, -0.5, -0.25, 0, 0.25, 0.5, 0.75, 1]
    assert np.allclose(v, 1 - np.abs(s))
    s2, _ = signed_profile(GridFunction(t + 1, t))
    assert s2.size == 10 and s2[0] == -2
