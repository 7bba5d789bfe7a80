"""Closed-form reference solutions for seven model problems.

Examples 1-5 are 1D obstacle problems, 6-7 radial obstacle problems on the
ball of radius 2.  For each one the finite-p solution is explicit up to one
scalar constant (c_p, and h_p for Example 7) that solves a monotone scalar
equation; the p -> infinity limit is explicit.

Powers are evaluated through substitutions that stay representable for very
large p: e.g. Example 1 is solved for s = c^beta rather than c, since c
itself tends to 0 like s^(p-1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.optimize import brentq

from .piecewise import IntervalSet, PiecewisePoly
from .psolver import ProblemSpec, pow_abs
from .radial import RadialSpec

_RTOL = 4 * np.finfo(float).eps
SQRT3, SQRT7 = math.sqrt(3.0), math.sqrt(7.0)


@dataclass(frozen=True)
class ExampleId:
    example: int
    p: float
    n: int | None = None

    def __post_init__(self):
        if self.example not in range(1, 8):
            raise ValueError(f"unknown example {self.example}")
        if not self.p > 1:
            raise ValueError("p must exceed 1")
        if self.n is None:
            object.__setattr__(self, "n", 2 if self.example >= 6 else 1)
        if self.n < 1:
            raise ValueError("dimension must be positive")
        if self.example <= 5 and self.n != 1:
            raise ValueError("examples 1-5 are one-dimensional")
        if self.example == 6 and not self.p > self.n:
            raise ValueError("example 6 needs p > n")

    @property
    def beta(self) -> float:
        return 1.0 / (self.p - 1.0)


@dataclass(frozen=True)
class Constants:
    example: int
    p: float
    n: int
    c: float
    h: float | None = None
    residual: float = 0.0
    derived: dict = field(default_factory=dict)


def _pw(x, e):
    return float(pow_abs(x, e)) if np.ndim(x) == 0 else pow_abs(x, e)


def _root(fn, lo, hi):
    return brentq(fn, lo, hi, xtol=1e-300, rtol=_RTOL, maxiter=1000)


# -- scalar equations --------------------------------------------------------

def _ex1(p):
    b = 1 / (p - 1)
    # s = c^beta, c = s^(p-1)
    R = lambda s: s + _pw(s, p) / (b + 1) - 2 * _pw(0.5 - _pw(s, p - 1), b + 1) / (b + 1)
    s = _root(R, 0.0, _pw(0.5, b))
    c = _pw(s, p - 1)
    res = _pw(c, b) + _pw(c, b + 1) / (b + 1) - 2 * _pw(0.5 - c, b + 1) / (b + 1)
    return Constants(1, p, 1, c, residual=abs(res), derived={"c_beta": s})


def _ex1_dirichlet(p):
    b = 1 / (p - 1)
    R = lambda s: s + _pw(s, p) / (b + 1) - _pw(0.5 - _pw(s, p - 1), b + 1) / (b + 1)
    s = _root(R, 0.0, _pw(0.5, b))
    return _pw(s, p - 1), s


def _ex2(p):
    b = 1 / (p - 1)
    # s = (1-c)^beta; the equation 1/2 = 2 s + (1-c)^(beta+1)/(beta+1)
    R = lambda s: 2 * s + _pw(s, p) / (b + 1) - 0.5
    s = _root(R, 0.0, 0.25)
    y = _pw(s, p - 1)
    x0 = ((b + 1) / 2) ** (1 / (b + 1))
    res = R(s)  # in the substituted variable; y itself underflows for huge p
    return Constants(2, p, 1, 1 - y, residual=abs(res),
                     derived={"one_minus_c_beta": s, "one_minus_c": y, "x0": x0})


def _ex3(p):
    b = 1 / (p - 1)
    # s = (1-c)^beta, 1 - c = s^(p-1)
    R = lambda s: -s + _pw(1 - _pw(s, p - 1), b + 1) / (b + 1) - 2 * _pw(s, p) / (b + 1)
    s = _root(R, 0.0, 1.0)
    y = _pw(s, p - 1)
    c = 1 - y
    res = -_pw(y, b) + _pw(c, b + 1) / (b + 1) - 2 * _pw(y, b + 1) / (b + 1)
    return Constants(3, p, 1, c, residual=abs(res),
                     derived={"one_minus_c_beta": s, "one_minus_c": y})


def _ex4(p):
    b = 1 / (p - 1)
    R = lambda c: c * c + 1 - 3 * c - (_pw(0.5 + _pw(2 * c, p - 1), b + 1) - _pw(2 * c, p)) / (b + 1)
    c = _root(R, 0.0, 0.5)
    return Constants(4, p, 1, c, residual=abs(R(c)), derived={"q": _pw(2 * c, p - 1)})


def _ex5_parts(c, p):
    b = 1 / (p - 1)
    K = _pw(1.5 * c, p - 1) - c
    m = _pw(1 / 3 + K, b)
    return b, K, m


def _ex5(p):
    def R(c):
        b, K, m = _ex5_parts(c, p)
        return 0.75 * (c * c - 1) - (_pw(1.5 * c, p) - m * (1 + K + 2 * b / 3)) / (b + 1)
    if R(0.0) < 0:
        c = 0.0        # no contact: the free solution stays above the obstacle
    else:
        c = _root(R, 0.0, 1 / 3)
    _, K, m = _ex5_parts(c, p)
    return Constants(5, p, 1, c, residual=0.0 if c == 0 else abs(R(c)),
                     derived={"K": K, "m": m, "contact": c > 0})


def _ex6(p, n):
    a = (n - 1) / (p - 1)
    R = lambda c: (1 + a) * c * c - 2 ** (2 - a) * _pw(c, 1 + a) + 1 - a
    c = _root(R, 0.0, 1.0)
    return Constants(6, p, n, c, residual=abs(R(c)), derived={"alpha": a})


def _ex7_one_dim(p):
    # unknown w = (p-1) log(2h), as in the radial case
    b = 1 / (p - 1)
    h_of = lambda w: 0.5 * math.exp(w * b)
    c_of = lambda w: h_of(w) + math.exp(w)
    R = lambda w: math.exp(w * p * b) - _pw(max(2 - c_of(w), 0.0), b + 1) \
        - (b + 1) * (1 - h_of(w) ** 2)
    w_lo = (p - 1) * math.log(2e-9)
    w_max = _root(lambda w: c_of(w) - 2, w_lo, (p - 1) * math.log(2.0))
    w = _root(R, w_lo, w_max)
    h, c = h_of(w), c_of(w)
    # residuals of the two matching conditions
    r1 = abs(_pw(c - h, b) - 2 * h)
    r2 = abs(((c - h) ** (b + 1) - _pw(2 - c, b + 1)) / (b + 1) - (1 - h * h))
    return h, c, max(r1, r2)


def _ex7_flux(p, n, h, logs=None):
    """Flux constant K and the free-boundary radius c = (nK)^(1/n).

    `logs` = (p-1) log(2h) may be passed instead of being recomputed; it is
    the well-conditioned unknown for large p.
    """
    if logs is None:
        logs = (p - 1) * math.log(2 * h)
    K = h ** n / n + h ** (n - 1) * math.exp(logs)
    return K, (n * K) ** (1 / n)


def _ex7_smooth(p, n, c):
    """|sigma(t) / (t - c)|^(1/(p-1)) with sigma = (t^n - c^n) / (n t^(n-1)).

    The quotient by t - c is a polynomial, so the cusp of u' at c factors
    out exactly.
    """
    g = 1 / (p - 1)

    def fn(t):
        t = np.asarray(t, dtype=float)
        S = sum(t ** j * c ** (n - 1 - j) for j in range(n)) / (n * t ** (n - 1))
        return pow_abs(S, g)
    return fn


def _ex7_slope_integral(p, n, c, a, b):
    """int_a^b u'(t) dt on the free part.

    |u'| = S^g |t-c|^g is split as (S^g - 1)|t-c|^g + |t-c|^g: the first
    part goes through algebraic-weight quadrature, the second is exact.  For
    large p both are small corrections to a slope of one.
    """
    g = 1 / (p - 1)
    if a < c < b:
        return _ex7_slope_integral(p, n, c, a, c) + _ex7_slope_integral(p, n, c, c, b)
    if a >= c:
        sign, wvar, L = 1.0, (g, 0.0), b - c
        far = a - c
    else:
        sign, wvar, L = -1.0, (0.0, g), c - a
        far = c - b

    def dev(t):
        S = sum(t ** j * c ** (n - 1 - j) for j in range(n)) / (n * t ** (n - 1))
        return math.expm1(g * math.log(S))

    def pow_int(x):  # int_0^x s^g ds - x
        return x * (math.expm1(g * math.log(x)) - g) / (g + 1) if x > 0 else 0.0

    opts = dict(epsabs=1e-17, epsrel=1e-13, limit=200)
    if far == 0:
        part = integrate.quad(dev, a, b, weight="alg", wvar=wvar, **opts)[0]
    else:
        part = integrate.quad(lambda t: dev(t) * abs(t - c) ** g, a, b, **opts)[0]
    return sign * ((b - a) + part + pow_int(L) - pow_int(far))


def ex7_residual_quadrature(p: float, n: int, h: float, logs: float | None = None) -> float:
    """phi(h) + int_h^2 u'(t) dt for the free solution leaving the obstacle at h."""
    _, c = _ex7_flux(p, n, h, logs)
    return (1 - h * h) + _ex7_slope_integral(p, n, c, h, 2.0)


def _ex7(p, n):
    if n == 1:
        h, c, res = _ex7_one_dim(p)
    else:
        # unknown w = (p-1) log(2h): h(w) is flat for large p, so the residual
        # is well conditioned in w; c = (nK)^(1/n) is kept at most 4
        h_of = lambda w: 0.5 * math.exp(w / (p - 1))
        logc = lambda w: np.logaddexp(n * math.log(h_of(w)) - math.log(n),
                                      (n - 1) * math.log(h_of(w)) + w) / n + math.log(n) / n
        w_lo = (p - 1) * math.log(2e-9)
        w_hi = _root(lambda w: logc(w) - math.log(4.0), w_lo, (p - 1) * math.log(2.0))
        R = lambda w: ex7_residual_quadrature(p, n, h_of(w), w)
        w = _root(R, w_lo, w_hi)
        h = h_of(w)
        _, c = _ex7_flux(p, n, h, w)
        res = abs(R(w))
    return Constants(7, p, n, c, h=h, residual=res)


def solve_constant(ex: ExampleId) -> Constants:
    """Root-found constants for one example at one p."""
    p = float(ex.p)
    return {1: lambda: _ex1(p), 2: lambda: _ex2(p), 3: lambda: _ex3(p), 4: lambda: _ex4(p),
            5: lambda: _ex5(p), 6: lambda: _ex6(p, ex.n), 7: lambda: _ex7(p, ex.n)}[ex.example]()


# -- domains and data --------------------------------------------------------

DOMAINS = {1: (0.0, 3.0), 2: (0.0, 3.0), 3: (0.0, 3.0), 4: (-2.0, 2.0), 5: (-1.0, 1.0),
           6: (0.0, 2.0), 7: (0.0, 2.0)}


def _check_x(example: int, x):
    x = np.asarray(x, dtype=float)
    lo, hi = DOMAINS[example]
    if x.size and (x.min() < lo - 1e-12 or x.max() > hi + 1e-12):
        raise ValueError(f"x outside the domain [{lo}, {hi}] of example {example}")
    return x


def example_data(example: int) -> tuple[PiecewisePoly, PiecewisePoly]:
    """(datum, obstacle) on the example's domain (radial profiles for 6-7)."""
    if example == 1:
        return (PiecewisePoly.step([0, 1, 1.5, 2, 3], [0, 1, -1, 0]),
                PiecewisePoly.constant(0.0, 0, 3))
    if example == 2:
        return PiecewisePoly.step([0, 1, 3], [-1, 0]), PiecewisePoly.constant(-0.5, 0, 3)
    if example == 3:
        return PiecewisePoly.step([0, 1, 2, 3], [1, 0, -1]), PiecewisePoly.constant(0.0, 0, 3)
    if example == 4:
        return (PiecewisePoly.step([-2, -1.5, 1.5, 2], [1, 0, 1]),
                PiecewisePoly.polynomial([1, 0, -1], -2, 2))
    if example == 5:
        return (PiecewisePoly.step([-1, -1 / 3, 1 / 3, 1], [0, -1, 0]),
                PiecewisePoly.polynomial([-0.75, 0, 0.75], -1, 1))
    if example in (6, 7):
        g = 0.0 if example == 6 else -1.0
        return PiecewisePoly.constant(g, 0, 2), PiecewisePoly.polynomial([1, 0, -1], 0, 2)
    raise ValueError(f"unknown example {example}")


def example_problem(ex: ExampleId) -> ProblemSpec | RadialSpec:
    f, phi = example_data(ex.example)
    if ex.example >= 6:
        return RadialSpec(ex.n, 0.0, 2.0, f, phi, float(ex.p))
    return ProblemSpec(DOMAINS[ex.example], f, phi, (0.0, 0.0), float(ex.p))


def example_gamma_infty(example: int) -> IntervalSet:
    """Limiting coincidence set of each example."""
    c4 = (3 - SQRT7) / 2
    return {1: IntervalSet([(2, 3)]), 2: IntervalSet([(0.5, 1)]), 3: IntervalSet([(2, 3)]),
            4: IntervalSet([(-c4, c4)]), 5: IntervalSet([(-1 / 3, 1 / 3)]),
            6: IntervalSet([(0, 2 - SQRT3)]), 7: IntervalSet([(0, 0.5)])}[example]


# -- finite-p closed forms ---------------------------------------------------

def closed_form_up(ex: ExampleId, x) -> np.ndarray:
    """The explicit finite-p solution (radial profile for Examples 6-7)."""
    x = _check_x(ex.example, x)
    k = solve_constant(ex)
    b = ex.beta
    P = lambda y: pow_abs(np.maximum(y, 0.0), b + 1) / (b + 1)
    c = k.c
    if ex.example == 1:
        s = k.derived["c_beta"]
        K = s + c * s / (b + 1)
        out = np.select(
            [x <= 1, x <= c + 1, x <= 1.5, x <= 2 - c],
            [s * x, K - P(c + 1 - x), K - P(x - c - 1), P(2 - c - x)], 0.0)
    elif ex.example == 2:
        s, x0 = k.derived["one_minus_c_beta"], k.derived["x0"]
        out = np.select(
            [x <= x0, x <= c, x <= 1],
            [P(x0 - x) - 0.5, np.full(x.shape, -0.5), -0.5 + P(x - c)], s * (x - 3))
    elif ex.example == 3:
        s, y = k.derived["one_minus_c_beta"], k.derived["one_minus_c"]
        top = P(np.float64(c))
        out = np.select(
            [x <= c, x <= 1, x <= 2, x <= 3 - c],
            [top - P(c - x), top - P(x - c), (1 - x) * s + top - P(np.float64(y)), P(3 - x - c)],
            0.0)
    elif ex.example == 4:
        q = k.derived["q"]
        ax = np.abs(x)
        out = np.select(
            [ax <= c, ax <= 1.5],
            [1 - x * x, -2 * c * ax + 1 + c * c],
            (pow_abs(0.5 + q, b + 1) - pow_abs(ax - 1.5 + q, b + 1)) / (b + 1))
    elif ex.example == 5:
        K, m = k.derived["K"], k.derived["m"]
        ax = np.abs(x)
        inner = 0.75 * (x * x - 1) if c > 0 else np.full(x.shape, np.nan)
        out = np.select(
            [ax < c, ax <= 1 / 3],
            [inner, (pow_abs(ax + K, b + 1) - m * (1 + K + 2 * b / 3)) / (b + 1)],
            m * (ax - 1))
    elif ex.example == 6:
        a = k.derived["alpha"]
        out = np.where(x <= c, 1 - x * x,
                       -2 * c ** (1 + a) / (1 - a) * (pow_abs(x, 1 - a) - 2 ** (1 - a)))
    else:
        out = _ex7_profile(ex, k, x)
    return out if out.ndim else float(out)


def _ex7_profile(ex: ExampleId, k: Constants, x: np.ndarray) -> np.ndarray:
    h, c, p, b = k.h, k.c, float(ex.p), ex.beta
    if ex.n == 1:
        P = lambda y: pow_abs(y, b + 1) / (b + 1)
        tail = P(max(2 - c, 0.0))
        return np.select([x <= h, x <= c], [1 - x * x, P(c - x) - tail], P(x - c) - tail)
    c = _ex7_flux(p, ex.n, h)[1]
    out = 1 - x * x
    outer = x > h
    if outer.any():
        pts = np.unique(np.concatenate([x[outer], [2.0], [c] if h < c < 2 else []]))
        a, bb = pts[:-1], pts[1:]
        gap = np.median(np.diff(pts)) if pts.size > 2 else 1.0
        near = (np.abs(a - c) < 3 * gap) | (np.abs(bb - c) < 3 * gap)
        pieces = np.empty(a.size)
        xi, wq = np.polynomial.legendre.leggauss(20)
        sm = _ex7_smooth(p, ex.n, c)
        far = np.flatnonzero(~near)
        if far.size:
            t = 0.5 * (a[far] + bb[far])[:, None] + 0.5 * (bb[far] - a[far])[:, None] * xi
            vals = np.sign(t - c) * sm(t) * pow_abs(t - c, b)
            pieces[far] = 0.5 * (bb[far] - a[far]) * (vals @ wq)
        for i in np.flatnonzero(near):
            pieces[i] = _ex7_slope_integral(p, ex.n, c, a[i], bb[i])
        # u(t) = -int_t^2 u'
        from_right = -np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]])
        out = np.where(outer, np.interp(x, pts, from_right), out)
    return out


def dirichlet_closed_form_ex1(p: float, x) -> tuple[np.ndarray, float]:
    """Example 1 data without obstacle: (u_p(x), flux constant c)."""
    x = _check_x(1, x)
    b = 1 / (p - 1)
    c, s = _ex1_dirichlet(p)
    P = lambda y: pow_abs(np.maximum(y, 0.0), b + 1) / (b + 1)
    K = s + c * s / (b + 1)
    u = np.select(
        [x <= 1, x <= c + 1, x <= 1.5, x <= 2 - c, x <= 2],
        [s * x, K - P(c + 1 - x), K - P(x - c - 1), P(2 - c - x) - K, P(x + c - 2) - K],
        s * (x - 3))
    return u, c


# -- limits ------------------------------------------------------------------

def closed_form_limit(ex: ExampleId | int, x) -> np.ndarray:
    """The p -> infinity limit U (independent of n for the radial examples)."""
    e = ex.example if isinstance(ex, ExampleId) else int(ex)
    x = _check_x(e, x)
    ax = np.abs(x)
    if e in (1, 3):
        out = np.select([x <= 1, x <= 2], [x, 2 - x], 0.0)
    elif e == 2:
        out = np.select([x <= 0.5, x <= 1], [-x, np.full(x.shape, -0.5)], (x - 3) / 4)
    elif e == 4:
        c = (3 - SQRT7) / 2
        out = np.select([ax <= c, ax <= 1.5],
                        [1 - x * x, -(3 - SQRT7) * ax + 1 + (8 - 3 * SQRT7) / 2], 2 - ax)
    elif e == 5:
        out = np.where(ax <= 1 / 3, 0.75 * (x * x - 1), ax - 1)
    elif e == 6:
        h = 2 - SQRT3
        out = np.where(x <= h, 1 - x * x, 2 * h * (2 - x))
    else:
        out = np.select([x <= 0.5, x <= 13 / 8], [1 - x * x, 5 / 4 - x], x - 2)
    return out if out.ndim else float(out)


def limit_breakpoints(example: int) -> tuple[list[float], list[float | None]]:
    """Breakpoints of U and the slope on each piece (None where U = obstacle)."""
    c4, h6 = (3 - SQRT7) / 2, 2 - SQRT3
    return {
        1: ([0, 1, 2, 3], [1, -1, None]),
        2: ([0, 0.5, 1, 3], [-1, None, 0.25]),
        3: ([0, 1, 2, 3], [1, -1, None]),
        4: ([-2, -1.5, -c4, c4, 1.5, 2], [1, 3 - SQRT7, None, -(3 - SQRT7), -1]),
        5: ([-1, -1 / 3, 1 / 3, 1], [-1, None, 1]),
        6: ([0, h6, 2], [None, -2 * h6]),
        7: ([0, 0.5, 13 / 8, 2], [None, -1, 1]),
    }[example]


def dirichlet_limit_closed_form(example: int, x) -> np.ndarray:
    """Limit of the obstacle-free problems with zero boundary data (Examples 1-2)."""
    x = _check_x(example, x)
    if example == 1:
        return np.select([x <= 1, x <= 2], [x / 2, 1.5 - x], x / 2 - 1.5)
    if example == 2:
        return np.where(x <= 1, -x, (x - 3) / 2)
    raise ValueError("only examples 1 and 2 have a stated Dirichlet limit")


def ex6_second_maximizer(x) -> np.ndarray:
    """Another Lipschitz-1 function above the obstacle of Example 6 with the
    same (zero) functional value; the p-limit does not select it."""
    x = _check_x(6, x)
    return np.select([x <= 0.5, x <= 1.25], [1 - x * x, 1.25 - x], 0.0)


def ex1_other_limit(x) -> np.ndarray:
    """A further competitor for Example 1: x, 2-x, x-2, 3-x."""
    x = _check_x(1, x)
    return np.select([x <= 1, x <= 2, x <= 2.5], [x, 2 - x, x - 2], 3 - x)
