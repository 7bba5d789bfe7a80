"""p-Laplacian obstacle problems in 1D and radial form, and their p -> infinity limits.

Modules:
    piecewise  exact piecewise-polynomial calculus, level sets, interval sets
    limit      explicit limit functions built from the datum's distribution function
    psolver    finite-p solvers (shooting, variational inequality) and checks
    radial     reduction of radial problems to weighted 1D problems
    oracles    closed-form reference solutions for seven worked examples
    cli        the ``plap-limit`` command line runner
"""
from .limit import (InfeasibleComponentError, LimitFunction, affine_limit, ball_core_limit,
                    beta_star, dirichlet_limit, k_coefficient, obstacle_limit, radial_limit)
from .piecewise import (IntervalSet, PiecewisePoly, antiderivative, integrate_product,
                        level_sets, sublevel_measure)
from .psolver import (ConvergenceError, GammaEstimate, GridFunction, ProblemSpec,
                      coincidence_set, dirichlet_shoot, gamma_infty_estimate,
                      lewy_stampacchia_check, obstacle_solve, psi, solve_sweep)
from .radial import RadialSpec, reduce

__version__ = "0.1.0"

__all__ = [
    "IntervalSet", "PiecewisePoly", "antiderivative", "integrate_product", "level_sets",
    "sublevel_measure",
    "InfeasibleComponentError", "LimitFunction", "affine_limit", "ball_core_limit", "beta_star",
    "dirichlet_limit", "k_coefficient", "obstacle_limit", "radial_limit",
    "ConvergenceError", "GammaEstimate", "GridFunction", "ProblemSpec", "coincidence_set",
    "dirichlet_shoot", "gamma_infty_estimate", "lewy_stampacchia_check", "obstacle_solve", "psi",
    "solve_sweep",
    "RadialSpec", "reduce",
]
