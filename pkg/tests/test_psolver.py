import numpy as np
import pytest

from conftest import flat_spec
from plap_limit import oracles
from plap_limit.oracles import ExampleId
from plap_limit.piecewise import IntervalSet, PiecewisePoly
from plap_limit.psolver import (MAX_VI_P, ConvergenceError, GridFunction, ProblemSpec,
                                coincidence_set, default_p_chain, dirichlet_shoot, discretize,
                                energy, gamma_infty_estimate, gradient, lewy_stampacchia_check,
                                obstacle_solve, psi, solution_table, solve_sweep)


def const(v, a=0.0, b=1.0):
    return PiecewisePoly.constant(v, a, b)


class TestProblemSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            ProblemSpec((1, 0), const(1), None, (0, 0), 4.0)
        with pytest.raises(ValueError):
            ProblemSpec((0, 1), const(1), None, (0, 0), 1.0)
        with pytest.raises(ValueError):
            ProblemSpec((0, 1), const(1), const(1), (0, 0), 4.0)  # obstacle above data
        with pytest.raises(ValueError):
            ProblemSpec((-1, 1), const(1, -1, 1), None, (0, 0), 4.0, weight_exponent=1)

    def test_with_p(self):
        s = flat_spec(1, 4)
        assert s.with_p(8).p == 8 and s.with_p(8).f is s.f


class TestScalars:
    @pytest.mark.parametrize("p", [1.5, 2, 4, 80])
    def test_psi_inverts_the_flux_map(self, p):
        s = np.array([-3.0, -0.2, 0.0, 0.7, 5.0])
        q = np.sign(s) * np.abs(s) ** (p - 1)
        assert np.allclose(psi(p, q), s, rtol=1e-12)

    def test_psi_tends_to_sign(self):
        assert np.allclose(psi(1e6, np.array([-2.0, 0.5])), [-1, 1], atol=1e-5)

    def test_default_chain_doubles(self):
        assert default_p_chain(20) == [2.0, 4.0, 8.0, 16.0, 20.0]
        assert default_p_chain(1.5) == [1.5]


class TestDiscretization:
    def test_gradient_is_energy_derivative(self):
        spec = flat_spec(1, 4)
        d = discretize(spec, 41)
        rng = np.random.default_rng(1)
        u = np.where(d.fixed, d.u_fixed, rng.normal(size=41) * 0.1)
        g = gradient(d, u, 4.0)
        e = np.zeros(41)
        e[7] = 1e-6
        fd = (energy(d, u + e, 4.0) - energy(d, u - e, 4.0)) / 2e-6
        assert fd == pytest.approx(g[7], rel=1e-6, abs=1e-10)

    def test_too_few_nodes(self):
        with pytest.raises(ValueError):
            discretize(flat_spec(1, 4), 2)


class TestDirichletShoot:
    def test_example1_data(self):
        f, _ = oracles.example_data(1)
        spec = ProblemSpec((0, 3), f, None, (0.0, 0.0), 4.0)
        u, beta = dirichlet_shoot(spec, 2001)
        cf, _ = oracles.dirichlet_closed_form_ex1(4.0, u.x)
        assert np.max(np.abs(u.values - cf)) <= 1e-12

    def test_zero_datum_is_linear(self):
        spec = ProblemSpec((0, 1), const(0.0), None, (0.0, 0.5), 7.0)
        u, beta = dirichlet_shoot(spec, 101)
        assert np.allclose(u.values, u.x / 2, atol=1e-13)
        assert beta == pytest.approx(0.5 ** 6, rel=1e-12)

    def test_constant_datum(self):
        p = 10.0
        spec = ProblemSpec((0, 1), const(1.0), None, (0.0, 0.0), p)
        u, beta = dirichlet_shoot(spec, 101)
        g = 1 / (p - 1)
        exact = (0.5 ** (g + 1) - np.abs(0.5 - u.x) ** (g + 1)) / (g + 1)
        assert np.max(np.abs(u.values - exact)) <= 1e-12
        assert beta == pytest.approx(0.5)

    def test_rejects_obstacle_and_missing_data(self):
        with pytest.raises(ValueError):
            dirichlet_shoot(flat_spec(1, 4), 101)
        with pytest.raises(ValueError):
            dirichlet_shoot(ProblemSpec((0, 1), const(1.0), None, (None, 0.0), 4.0), 101)

    def test_huge_p_reports_failure(self):
        f, _ = oracles.example_data(1)
        spec = ProblemSpec((0, 3), f, None, (0.0, 0.0), 1024.0)
        with pytest.raises(ConvergenceError):
            dirichlet_shoot(spec, 401)


class TestObstacleSolve:
    def test_matches_closed_form_small_grid(self):
        u = obstacle_solve(flat_spec(1, 4), n_nodes=1001)
        cf = oracles.closed_form_up(ExampleId(1, 4), u.x)
        assert np.max(np.abs(u.values - cf)) <= 2e-3
        assert u.info.residual <= u.info.tol
        assert np.all(u.values >= 0.0)

    def test_energy_history_is_monotone(self):
        u = obstacle_solve(flat_spec(4, 8), n_nodes=801)
        E = np.array(u.info.energy_history)
        assert np.all(np.diff(E) <= 1e-12 * np.max(np.abs(E)))

    def test_inactive_obstacle_gives_dirichlet_solution(self):
        p = 6.0
        spec = ProblemSpec((0, 1), const(1.0), const(-10.0), (0.0, 0.0), p)
        u = obstacle_solve(spec, n_nodes=801)
        v, _ = dirichlet_shoot(ProblemSpec((0, 1), const(1.0), None, (0.0, 0.0), p), 801)
        assert np.max(np.abs(u.values - v.values)) <= 1e-3

    def test_warm_start_and_sweep(self):
        spec = flat_spec(5, 10)
        sols = solve_sweep(spec, (10, 20), n_nodes=801)
        assert [s.info.p for s in sols] == [10, 20]
        cold = obstacle_solve(spec.with_p(20), n_nodes=801)
        assert np.max(np.abs(cold.values - sols[1].values)) <= 1e-6

    def test_warm_start_grid_mismatch(self):
        spec = flat_spec(1, 4)
        u = obstacle_solve(spec, n_nodes=201)
        with pytest.raises(ValueError):
            obstacle_solve(spec, n_nodes=301, warm_start=u)

    def test_limits(self):
        with pytest.raises(ValueError):
            obstacle_solve(flat_spec(1, 4), tol=0.0)
        with pytest.raises(ValueError):
            obstacle_solve(flat_spec(1, MAX_VI_P * 2), n_nodes=101)

    def test_weighted_ball(self):
        spec = flat_spec(6, 8)
        u = obstacle_solve(spec, n_nodes=1001)
        cf = oracles.closed_form_up(ExampleId(6, 8), u.x)
        assert np.max(np.abs(u.values - cf)) <= 2e-3


@pytest.fixture(scope="module")
def ex1():
    spec = flat_spec(1, 8)
    return spec, obstacle_solve(spec, n_nodes=1501)


class TestChecks:
    def test_coincidence_set(self, ex1):
        spec, u = ex1
        gamma = coincidence_set(u, spec.phi)
        assert len(gamma) == 1 and gamma[0][1] == 3.0
        c = oracles.solve_constant(ExampleId(1, 8)).c
        assert abs(gamma[0][0] - (2 - c)) <= 3 * u.h

    def test_lewy_stampacchia(self, ex1):
        spec, u = ex1
        rep = lewy_stampacchia_check(u, spec, 1e-7)
        assert rep.ok
        bumped = GridFunction(u.x, u.values + 1e-3 * np.sin(np.pi * u.x / 3) ** 2, u.info)
        assert not lewy_stampacchia_check(bumped, spec, 1e-7).ok

    def test_solution_table(self, ex1):
        spec, u = ex1
        lines = solution_table(u, spec).splitlines()
        assert lines[0] == "x,u,phi,u_minus_phi,neg_plap_u"
        assert len(lines) == u.n_nodes + 1
        x, uu, ph, gap, _ = map(float, lines[500].split(","))
        assert gap == pytest.approx(uu - ph, abs=1e-11)

    def test_solution_table_without_obstacle(self):
        spec = ProblemSpec((0, 1), const(1.0), None, (0.0, 0.0), 4.0)
        u, _ = dirichlet_shoot(spec, 5)
        row = solution_table(u, spec).splitlines()[2].split(",")
        assert row[2:4] == ["", ""]

    def test_gamma_estimate_example3(self):
        specs = [flat_spec(3, p) for p in (10, 20, 40, 80)]
        est = gamma_infty_estimate(specs, n_nodes=1201)
        assert est.lambda_ok
        assert est.limit.isclose(IntervalSet([(2, 3)]), 3 * 3 / 1200)
        assert len(est.sets) == 4 and est.p_values == (10, 20, 40, 80)
        assert est.lower.subset_of(est.upper)

    def test_gamma_estimate_needs_increasing_p(self):
        with pytest.raises(ValueError):
            gamma_infty_estimate([flat_spec(1, 20), flat_spec(1, 10)], n_nodes=201)
