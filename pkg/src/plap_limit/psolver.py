"""Finite-p solvers for 1D (optionally weighted) p-Laplacian problems.

`dirichlet_shoot` integrates u' = psi_p((beta - F)/t^k) and matches beta to
the right boundary value.  `obstacle_solve` minimizes the P1 energy

    E(u) = h * sum_e W_e |s_e|^p / p - sum_i b_i u_i,   s_e = (u_{e+1} - u_e)/h,

over nodal vectors above the obstacle, where W_e = (1/h) int_e t^k dt and
b_i = int f t^k hat_i dt are computed exactly.  The discrete operator is
(-Delta_p^h u)_i = (q_{i-1/2} - q_{i+1/2}) / m_i with fluxes q = W |s|^{p-2} s
and lumped mass m_i = int t^k hat_i dt, so the KKT test and the
Lewy-Stampacchia check use exactly the gradient of E.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import integrate, optimize
from scipy.linalg import solve_banded

from .piecewise import IntervalSet, PiecewisePoly, antiderivative

DEFAULT_P_SWEEP = (10.0, 20.0, 40.0, 80.0)
MAX_VI_P = 128.0
_NEWTON_WARMUP = 40


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual


# -- problem data ------------------------------------------------------------

@dataclass(frozen=True)
class ProblemSpec:
    """Obstacle or Dirichlet problem on `interval`.

    boundary = (A, B); A may be None for a natural (zero-flux) condition at
    the left end, which is how the centre of a ball is treated (for n = 1
    this is the symmetric half of (-b, b)).  phi=None
    means no obstacle.  weight_exponent k multiplies both energy terms by t^k.
    """

    interval: tuple[float, float]
    f: PiecewisePoly
    phi: PiecewisePoly | None
    boundary: tuple[float | None, float]
    p: float
    weight_exponent: int = 0

    def __post_init__(self):
        a, b = map(float, self.interval)
        if not a < b:
            raise ValueError(f"empty interval ({a}, {b})")
        if not self.p > 1:
            raise ValueError(f"p must exceed 1, got {self.p}")
        if self.weight_exponent < 0 or int(self.weight_exponent) != self.weight_exponent:
            raise ValueError("weight_exponent must be a non-negative integer")
        if self.weight_exponent > 0 and a < 0:
            raise ValueError("weighted problems need a >= 0")
        A, B = self.boundary
        object.__setattr__(self, "interval", (a, b))
        object.__setattr__(self, "f", _cover(self.f, a, b, "f"))
        if self.phi is not None:
            phi = _cover(self.phi, a, b, "phi")
            object.__setattr__(self, "phi", phi)
            tol = 1e-12 * max(1.0, abs(A or 0.0), abs(B))
            if A is not None and phi(a) > A + tol or phi(b) > B + tol:
                raise ValueError("obstacle exceeds the boundary data")

    @property
    def a(self) -> float:
        return self.interval[0]

    @property
    def b(self) -> float:
        return self.interval[1]

    @property
    def A(self) -> float | None:
        return self.boundary[0]

    @property
    def B(self) -> float:
        return self.boundary[1]

    def with_p(self, p: float) -> "ProblemSpec":
        return replace(self, p=float(p))


def _cover(g: PiecewisePoly, a: float, b: float, name: str) -> PiecewisePoly:
    tol = 1e-12 * max(1.0, abs(a), abs(b))
    if g.lo > a + tol or g.hi < b - tol:
        raise ValueError(f"{name} is defined on {g.domain}, which does not cover [{a}, {b}]")
    if abs(g.lo - a) <= tol and abs(g.hi - b) <= tol:
        return g
    return g.restrict(max(a, g.lo), min(b, g.hi))


@dataclass(frozen=True)
class SolveInfo:
    p: float
    newton_iterations: int
    active_set_iterations: int
    residual: float
    energy_history: tuple[float, ...]
    tol: float


@dataclass(frozen=True)
class GridFunction:
    """Nodal values on a uniform grid including both endpoints."""

    x: np.ndarray
    values: np.ndarray
    info: SolveInfo | None = field(default=None, compare=False)

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        v = np.array(self.values, dtype=float)
        if x.shape != v.shape or x.ndim != 1 or x.size < 2:
            raise ValueError("x and values must be 1D arrays of equal length >= 2")
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite nodal values")
        x.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", v)

    @property
    def n_nodes(self) -> int:
        return self.x.size

    @property
    def h(self) -> float:
        return float(self.x[1] - self.x[0])

    def max_slope(self) -> float:
        return float(np.max(np.abs(np.diff(self.values))) / self.h)


# -- scalar helpers ----------------------------------------------------------

def pow_abs(s, e: float) -> np.ndarray:
    """|s|**e in the log domain; 0**e = 0 for e > 0, underflow goes to 0."""
    a = np.abs(np.asarray(s, dtype=float))
    if e == 0:
        return np.ones_like(a)
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        out = np.where(a > 0, np.exp(e * np.log(np.where(a > 0, a, 1.0))), 0.0)
    if np.any(np.isinf(out)):
        raise FloatingPointError(f"overflow evaluating |s|^{e}")
    return out


def psi(p: float, s):
    """Inverse of s -> |s|^{p-2} s, i.e. sign(s)|s|^{1/(p-1)}."""
    if not p > 1:
        raise ValueError("p must exceed 1")
    s = np.asarray(s, dtype=float)
    out = s.copy() if p == 2 else np.sign(s) * pow_abs(s, 1.0 / (p - 1.0))
    return out if out.ndim else float(out)


def _jp(s: np.ndarray, p: float) -> np.ndarray:
    return np.sign(s) * pow_abs(s, p - 1.0)


# -- discretization ----------------------------------------------------------

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss(n: int):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


@dataclass(frozen=True)
class Discretization:
    x: np.ndarray
    h: float
    W: np.ndarray        # edge weights (1/h) int_e t^k
    m: np.ndarray        # lumped nodal mass int t^k hat_i
    b: np.ndarray        # load int f t^k hat_i
    phi: np.ndarray      # obstacle at nodes (-inf if none)
    fixed: np.ndarray    # Dirichlet nodes
    u_fixed: np.ndarray  # their values (0 elsewhere)


def _hat_integrals(x: np.ndarray, k: int, f: PiecewisePoly | None) -> np.ndarray:
    """int g(t) t^k hat_i(t) dt for every node, exact for polynomial g."""
    h = x[1] - x[0]
    cuts = x if f is None else np.union1d(x, f.breaks[(f.breaks > x[0]) & (f.breaks < x[-1])])
    lo, hi = cuts[:-1], cuts[1:]
    keep = hi - lo > 1e-14 * h
    lo, hi = lo[keep], hi[keep]
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    deg = (0 if f is None else f.degree) + k + 1
    xi, wq = _gauss(deg // 2 + 1)
    t = mid[:, None] + half[:, None] * xi[None, :]
    w = half[:, None] * wq[None, :] * (t ** k if k else 1.0)
    if f is not None:
        w = w * f(t)
    cell = np.clip(np.searchsorted(x, mid, side="right") - 1, 0, x.size - 2)
    lam = (t - x[cell][:, None]) / h
    out = np.zeros(x.size)
    np.add.at(out, cell, np.sum(w * (1 - lam), axis=1))
    np.add.at(out, cell + 1, np.sum(w * lam, axis=1))
    return out


def discretize(spec: ProblemSpec, n_nodes: int) -> Discretization:
    if n_nodes < 3:
        raise ValueError("need at least 3 nodes")
    x = np.linspace(spec.a, spec.b, n_nodes)
    h = (spec.b - spec.a) / (n_nodes - 1)
    k = spec.weight_exponent
    if k == 0:
        W = np.ones(n_nodes - 1)
        m = np.full(n_nodes, h)
        m[[0, -1]] = 0.5 * h
    else:
        W = (x[1:] ** (k + 1) - x[:-1] ** (k + 1)) / ((k + 1) * h)
        m = _hat_integrals(x, k, None)
    b = _hat_integrals(x, k, spec.f)
    phi = np.full(n_nodes, -np.inf) if spec.phi is None else spec.phi(x)
    fixed = np.zeros(n_nodes, dtype=bool)
    u_fixed = np.zeros(n_nodes)
    if spec.A is not None:
        fixed[0], u_fixed[0] = True, spec.A
    fixed[-1], u_fixed[-1] = True, spec.B
    for arr in (x, W, m, b, phi, fixed, u_fixed):
        arr.flags.writeable = False
    return Discretization(x, h, W, m, b, phi, fixed, u_fixed)


def energy(d: Discretization, u: np.ndarray, p: float) -> float:
    s = np.diff(u) / d.h
    return float(d.h * np.sum(d.W * pow_abs(s, p)) / p - d.b @ u)


def fluxes(d: Discretization, u: np.ndarray, p: float) -> np.ndarray:
    return d.W * _jp(np.diff(u) / d.h, p)


def gradient(d: Discretization, u: np.ndarray, p: float) -> np.ndarray:
    q = fluxes(d, u, p)
    g = -d.b.copy()
    g[1:] += q
    g[:-1] -= q
    return g


def discrete_plap(d: Discretization, u: np.ndarray, p: float) -> np.ndarray:
    """(-Delta_p^h u)_i at every node (one-sided at the ends)."""
    q = fluxes(d, u, p)
    out = np.zeros(u.size)
    out[1:] += q
    out[:-1] -= q
    return out / d.m


# -- VI solver ---------------------------------------------------------------

def rounding_floor(d: Discretization, u: np.ndarray, p: float) -> np.ndarray:
    """Nodal gradient noise from storing u in double precision, in units of f.

    Perturbing u by one ulp changes g_i by about H_ii * ulp(|u|), where H_ii
    is the Hessian diagonal; residuals below this are not resolvable.
    """
    s = np.diff(u) / d.h
    He = d.W * (p - 1) * pow_abs(s, p - 2) / d.h
    diag = np.zeros(u.size)
    diag[1:] += He
    diag[:-1] += He
    q = np.abs(d.W * _jp(s, p))
    flux = np.abs(d.b).copy()
    flux[1:] += q
    flux[:-1] += q
    eps = np.finfo(float).eps
    return 8 * eps * (diag * float(np.max(np.abs(u))) + flux) / d.m


def _kkt(d: Discretization, u, g, contact, p: float) -> float:
    """Largest violation of stationarity, sign of the multiplier, or u >= phi,
    net of the rounding floor."""
    free = ~d.fixed
    r = np.where(free & ~contact, np.abs(g), 0.0)
    r = np.maximum(r, np.where(free & contact, np.maximum(-g, 0.0), 0.0))
    r = np.maximum(r / d.m - rounding_floor(d, u, p), 0.0)
    gap = np.where(free, np.maximum(d.phi - u, 0.0), 0.0)
    return float(max(r.max(), gap.max() / max(d.h, 1e-300)))


def _newton_phase(d, u, p, tol, max_iter):
    """Projected Newton with Levenberg-Marquardt damping and Armijo acceptance.

    The first step treats every node as free, so a warm start can leave the
    old contact set in one move instead of one node per iteration.
    """
    free = ~d.fixed
    h = d.h
    E = energy(d, u, p)
    g = gradient(d, u, p)
    history = [E]
    mu = 1e-3 / h
    active = np.zeros(u.size, dtype=bool)
    it = 0
    for it in range(1, max_iter + 1):
        if _kkt(d, u, g, free & (u <= d.phi) & (g > 0), p) <= tol:
            break
        s = np.diff(u) / h
        He = d.W * (p - 1) * pow_abs(s, p - 2) / h
        F = free & ~active
        diag = np.zeros(u.size)
        diag[1:] += He
        diag[:-1] += He
        scale = diag.max() + 1e-300
        diag = np.where(F, diag * (1 + 1e-12) + mu * d.m + 1e-13 * scale, 1.0)
        off = np.where(F[:-1] & F[1:], -He, 0.0)
        ab = np.zeros((3, u.size))
        ab[0, 1:] = off
        ab[1] = diag
        ab[2, :-1] = off
        step = solve_banded((1, 1), ab, np.where(F, -g, 0.0))
        un = np.where(free, np.maximum(u + step, d.phi), u)
        try:
            En = energy(d, un, p)
        except FloatingPointError:    # trial slopes too steep: reject
            En = math.inf
        if En <= E + 1e-4 * float(g @ (un - u)):
            u, E = un, En
            g = gradient(d, u, p)
            history.append(E)
            active = free & (u <= d.phi) & (g > 0)
            mu = max(mu / 3, 1e-14 / h)
        else:
            mu *= 4
            if mu > 1e30 / h:
                break
    return u, history, it


def _shoot_run(d, u, p, lo, hi):
    """Exact discrete solution on free nodes lo..hi (inclusive).

    Node equilibrium gives q_{i+1/2} = q_{i-1/2} - b_i along the run, so
    one flux determines all others; it is matched to the value at the fixed
    node hi+1 by a bracketed root find.  The unknown is the slope on the
    edge where the current flux is smallest: at large p fluxes span many
    orders of magnitude and measuring them from an O(1) inlet flux would
    lose the small ones to cancellation.  A run starting at node 0 with a
    natural condition has no unknown at all.
    """
    h, W = d.h, d.W
    r = hi + 1
    if lo == 0 and not d.fixed[0]:
        q = -np.cumsum(d.b[0:r])                 # edges 0..r-1
        s = psi(p, q / W[0:r])
        u[0:r] = u[r] - h * np.cumsum(s[::-1])[::-1]
        return
    l = lo - 1
    We = W[l:r]                                  # edges l..r-1
    k = int(np.argmin(np.abs(fluxes(d, u, p)[l:r])))
    bb = d.b[lo:r]                               # nodes l+1..r-1
    # offsets q_e - q_anchor, summed outward from the anchor edge
    D = np.zeros(r - l)
    D[k + 1:] = -np.cumsum(bb[k:])
    D[:k] = np.cumsum(bb[:k][::-1])[::-1]
    target = u[r] - u[l]

    def slopes(sig):
        return np.atleast_1d(psi(p, (We[k] * _jp(np.float64(sig), p) + D) / We))

    def mismatch(sig):
        return h * np.sum(slopes(sig)) - target

    s0 = float((u[l + k + 1] - u[l + k]) / h)
    scale = max(float(np.max(np.abs(np.diff(u[l:r + 1])))) / h, abs(target) / (h * (r - l)))
    span = 1e-3 * (scale if scale > 0 else 1.0)
    lo_s, hi_s = s0 - span, s0 + span
    flo, fhi = mismatch(lo_s), mismatch(hi_s)
    while flo > 0:
        span *= 2
        lo_s -= span
        flo = mismatch(lo_s)
    while fhi < 0:
        span *= 2
        hi_s += span
        fhi = mismatch(hi_s)
    if flo == 0:
        sig = lo_s
    elif fhi == 0:
        sig = hi_s
    else:
        sig = optimize.brentq(mismatch, lo_s, hi_s, xtol=1e-300, rtol=4 * np.finfo(float).eps,
                              maxiter=2000)
    u[lo:r] = u[l] + h * np.cumsum(slopes(sig))[:-1]


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return []
    splits = np.flatnonzero(np.diff(idx) > 1)
    starts = np.concatenate([[idx[0]], idx[splits + 1]])
    ends = np.concatenate([idx[splits], [idx[-1]]])
    return list(zip(starts.tolist(), ends.tolist()))


def _polish(d, u, p, contact, steps=3):
    """Newton corrections on the free nodes with the contact set frozen.

    Shooting accumulates rounding along a run (a cumulative sum), which
    shows up as a gradient spike next to the fixed end; a couple of exact
    Newton steps push it back to the single-ulp level.
    """
    F = ~d.fixed & ~contact
    if not F.any():
        return u
    best = u
    best_r = np.max(np.abs(np.where(F, gradient(d, u, p), 0.0)) / d.m)
    for _ in range(steps):
        s = np.diff(u) / d.h
        He = d.W * (p - 1) * pow_abs(s, p - 2) / d.h
        diag = np.zeros(u.size)
        diag[1:] += He
        diag[:-1] += He
        diag = np.where(F, diag + 1e-14 * (diag.max() + 1e-300), 1.0)
        off = np.where(F[:-1] & F[1:], -He, 0.0)
        ab = np.zeros((3, u.size))
        ab[0, 1:] = off
        ab[1] = diag
        ab[2, :-1] = off
        step = solve_banded((1, 1), ab, np.where(F, -gradient(d, u, p), 0.0))
        # only rounding-sized corrections; a large step means the Hessian
        # is near-singular (flat runs at large p) and is not trusted
        if not np.max(np.abs(step)) <= 1e-9 * (1.0 + float(np.max(np.abs(u)))):
            break
        u = u + step
        r = np.max(np.abs(np.where(F, gradient(d, u, p), 0.0)) / d.m)
        if not r < best_r:
            break
        best, best_r = u, r
    return best


def _active_set_phase(d, u, p, max_iter=None):
    """Primal-dual active set iteration with exact solves on every free run."""
    free = ~d.fixed
    contact = free & (u <= d.phi)
    u = u.copy()
    seen = set()
    scale_u = max(1.0, float(np.max(np.abs(np.where(np.isfinite(d.phi), d.phi, 0.0)))))
    # a degenerate multiplier (zero datum on the contact set) lets the set
    # shrink by one node per end and iteration, so allow a full sweep
    max_iter = 2 * u.size + 10 if max_iter is None else max_iter
    it = 0
    for it in range(1, max_iter + 1):
        u[contact] = d.phi[contact]
        for lo, hi in _runs(free & ~contact):
            _shoot_run(d, u, p, lo, hi)
        g = gradient(d, u, p)
        q = np.abs(fluxes(d, u, p))
        noise = np.abs(d.b).copy()
        noise[1:] += q
        noise[:-1] += q
        add = free & ~contact & (u < d.phi - 1e-12 * scale_u)
        release = contact & (g < -1e-10 * noise)
        if not add.any() and not release.any():
            break
        key = (contact & ~release | add).tobytes()
        if key in seen:
            break
        seen.add(key)
        contact = (contact & ~release) | add
    return _polish(d, u, p, contact), contact, it


def default_p_chain(p: float, start: float = 2.0) -> list[float]:
    """Continuation values from `start` to p, each step at most doubling."""
    if p <= start:
        return [float(p)]
    chain = [start]
    while chain[-1] * 2 < p:
        chain.append(chain[-1] * 2)
    chain.append(float(p))
    return chain


def _initial_guess(d: Discretization) -> np.ndarray:
    A = d.u_fixed[0] if d.fixed[0] else d.u_fixed[-1]
    u = A + (d.u_fixed[-1] - A) * (d.x - d.x[0]) / (d.x[-1] - d.x[0])
    return np.where(d.fixed, d.u_fixed, np.maximum(u, d.phi))


def obstacle_solve(spec: ProblemSpec, n_nodes: int = 2001, tol: float = 1e-8,
                   warm_start: GridFunction | None = None, p_chain=None,
                   max_newton: int = 500, allow_large_p: bool = False) -> GridFunction:
    """Discrete minimizer of the p-energy above the obstacle.

    Without a warm start the solve runs through a continuation chain in p
    starting from the quadratic case.  Raises ConvergenceError if the final
    KKT residual (in units of f) exceeds `tol`.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if spec.p > MAX_VI_P and not allow_large_p:
        raise ValueError(f"p = {spec.p} exceeds {MAX_VI_P}; pass allow_large_p=True to force")
    d = discretize(spec, n_nodes)
    if warm_start is not None:
        if warm_start.n_nodes != n_nodes:
            raise ValueError("warm start lives on a different grid")
        u = np.where(d.fixed, d.u_fixed, np.maximum(warm_start.values, d.phi))
        chain = [spec.p] if p_chain is None else list(p_chain)
    else:
        u = _initial_guess(d)
        chain = default_p_chain(spec.p) if p_chain is None else list(p_chain)
    history: list[float] = []
    newton_its = pdas_its = 0
    for p in chain:
        # a short Newton run as a smoother; the active-set phase finishes
        # and Newton continues only if that fails
        u, hist, newton_its = _newton_phase(d, u, p, tol, min(_NEWTON_WARMUP, max_newton))
        trial, _, pdas_its = _active_set_phase(d, u, p)
        trial = np.where(d.fixed, d.u_fixed, np.maximum(trial, d.phi))
        if _kkt(d, trial, gradient(d, trial, p), ~d.fixed & (trial <= d.phi), p) > tol \
                and max_newton > _NEWTON_WARMUP:
            u, more, extra = _newton_phase(d, u, p, tol, max_newton - _NEWTON_WARMUP)
            hist, newton_its = hist + more[1:], newton_its + extra
            trial, _, pdas_its = _active_set_phase(d, u, p)
            trial = np.where(d.fixed, d.u_fixed, np.maximum(trial, d.phi))
        E = energy(d, trial, p)
        # the active-set result is kept only if it does not raise the energy
        if E <= hist[-1] + 1e-13 * max(1.0, abs(hist[-1])):
            u = trial
            hist = hist + [E]
        history = hist
    u = np.where(d.fixed, d.u_fixed, np.maximum(u, d.phi))
    g = gradient(d, u, spec.p)
    res = _kkt(d, u, g, ~d.fixed & (u <= d.phi), spec.p)
    info = SolveInfo(spec.p, newton_its, pdas_its, res, tuple(history), tol)
    if not res <= tol:
        raise ConvergenceError(f"obstacle solve at p={spec.p} did not converge", res)
    return GridFunction(d.x, u, info)


def solve_sweep(spec: ProblemSpec, p_values, n_nodes: int = 2001, tol: float = 1e-8
                ) -> list[GridFunction]:
    """Solutions for increasing p, each warm-started from the previous one."""
    out = []
    prev = None
    last_p = None
    for p in p_values:
        if last_p is not None and p <= last_p:
            raise ValueError("p values must increase")
        chain = None if prev is None else default_p_chain(p, start=last_p)[1:]
        prev = obstacle_solve(spec.with_p(p), n_nodes, tol, warm_start=prev, p_chain=chain)
        out.append(prev)
        last_p = p
    return out


# -- shooting for Dirichlet problems ------------------------------------------

def _shoot_integrand(F: PiecewisePoly, k: int, p: float, beta: float):
    def fn(t):
        w = t ** k if k else 1.0
        return psi(p, (beta - F(t)) / w)
    return fn


_QUAD = dict(epsabs=1e-15, epsrel=1e-13, limit=200)


def _cusp_integral(F, k, p, beta, a, b, root, side):
    """int_a^b psi_p((beta - F)/t^k) with beta = F(root) at one end.

    beta - F(t) = (t - root) Q(t - root) exactly, so the |t - root|^g
    factor goes into the algebraic quadrature weight and the remaining
    integrand is smooth.
    """
    g = 1.0 / (p - 1.0)
    i = int(np.clip(F.piece_index(0.5 * (a + b)), 0, F.n_pieces - 1))
    P = np.polynomial.Polynomial(F.coeffs[i])
    taylor = [-(P.deriv(j)(root)) / math.factorial(j) for j in range(1, P.degree() + 1)]
    if not any(taylor):
        # flat piece: the root belongs to a neighbouring piece (F is continuous)
        return integrate.quad(_shoot_integrand(F, k, p, beta), a, b, **_QUAD)[0]
    Q = np.polynomial.Polynomial(taylor)
    sgn = 1.0 if side == "left" else -1.0

    def smooth(t):
        qv = Q(t - root) / (t ** k if k else 1.0)
        return sgn * np.sign(qv) * pow_abs(qv, g)
    wvar = (g, 0.0) if side == "left" else (0.0, g)
    return integrate.quad(smooth, a, b, weight="alg", wvar=wvar, **_QUAD)[0]


def _integral(F, k, p, beta, lo, hi, roots):
    """int_lo^hi psi_p((beta - F)/t^k), split at breaks and at roots of beta - F."""
    fn = _shoot_integrand(F, k, p, beta)
    scale = max(1.0, abs(hi), abs(lo))
    near_break = lambda t: np.min(np.abs(F.breaks - t)) <= 1e-13 * scale
    pts = np.union1d(F.breaks, [r for r in roots if not near_break(r)])
    inner = pts[(pts > lo + 1e-13 * scale) & (pts < hi - 1e-13 * scale)]
    edges = np.concatenate([[lo], inner, [hi]])
    is_root = lambda t: roots.size and np.min(np.abs(roots - t)) <= 1e-13 * scale
    total = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b in zip(edges[:-1], edges[1:]):
            ra, rb = is_root(a), is_root(b)
            if ra and rb:
                m = 0.5 * (a + b)
                total += _cusp_integral(F, k, p, beta, a, m, a, "left")
                total += _cusp_integral(F, k, p, beta, m, b, b, "right")
            elif ra:
                total += _cusp_integral(F, k, p, beta, a, b, a, "left")
            elif rb:
                total += _cusp_integral(F, k, p, beta, a, b, b, "right")
            else:
                total += integrate.quad(fn, a, b, **_QUAD)[0]
    return total


def dirichlet_shoot(spec: ProblemSpec, n_nodes: int = 2001) -> tuple[GridFunction, float]:
    """Exact Dirichlet solution via the flux constant beta.

    The weighted flux t^k |u'|^{p-2} u' equals beta - F with F the
    antiderivative of f t^k from a, so u' = psi_p((beta - F)/t^k).  beta is
    found by bracketing and Brent iteration on the right boundary mismatch.
    """
    if spec.phi is not None:
        raise ValueError("dirichlet_shoot does not handle obstacles")
    if spec.A is None:
        raise ValueError("dirichlet_shoot needs Dirichlet data at both ends")
    k, p = spec.weight_exponent, spec.p
    if k > 0 and spec.a <= 0:
        raise ValueError("weighted shooting needs a > 0")
    F = antiderivative(spec.f.times_monomial(k), spec.a)
    A, B = spec.A, spec.B

    def G(beta):
        val = A + _integral(F, k, p, beta, spec.a, spec.b, F.roots(beta))
        if not math.isfinite(val):
            raise FloatingPointError("p too large for shooting")
        return val - B

    fmin, fmax = F.extrema()
    lo, hi = fmin - 1.0, fmax + 1.0
    width = hi - lo
    while G(lo) > 0:
        lo -= width
        width *= 2
    while G(hi) < 0:
        hi += width
        width *= 2
    try:
        beta = optimize.brentq(G, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    except RuntimeError:
        beta = None
    if beta is None or abs(G(beta)) > 1e-12:
        # typically beta - F sits below the smallest double (beta ~ s^(p-1))
        res = math.inf if beta is None else abs(G(beta))
        raise ConvergenceError(f"p too large for shooting at p={p}: boundary value not reached",
                               res)
    x = np.linspace(spec.a, spec.b, n_nodes)
    roots = F.roots(beta)
    pts = np.union1d(F.breaks, roots)
    h = x[1] - x[0]
    near = np.zeros(n_nodes - 1, dtype=bool)
    for t in pts:
        c = int(np.clip(np.floor((t - spec.a) / h), 0, n_nodes - 2))
        near[max(c - 1, 0): c + 2] = True
    fn = _shoot_integrand(F, k, p, beta)
    xi, wq = _gauss(20)
    incr = np.empty(n_nodes - 1)
    smooth = np.flatnonzero(~near)
    if smooth.size:
        mid = 0.5 * (x[smooth] + x[smooth + 1])
        t = mid[:, None] + 0.5 * h * xi[None, :]
        incr[smooth] = 0.5 * h * (np.asarray(fn(t.ravel())).reshape(t.shape) @ wq)
    for c in np.flatnonzero(near):
        incr[c] = _integral(F, k, p, beta, x[c], x[c + 1], roots)
    u = A + np.concatenate([[0.0], np.cumsum(incr)])
    u[-1] = B
    return GridFunction(x, u), float(beta)


# -- diagnostics -------------------------------------------------------------

def _contact_runs(u: GridFunction, phi_vals: np.ndarray, gap_tol: float
                  ) -> list[tuple[int, int]]:
    touch = (u.values - phi_vals) <= gap_tol
    merged: list[list[int]] = []
    for lo, hi in _runs(touch):
        if merged and lo - merged[-1][1] <= 2:
            merged[-1][1] = hi
        else:
            merged.append([lo, hi])
    last = u.n_nodes - 1
    # an end node that merely meets the obstacle is not contact
    return [(lo, hi) for lo, hi in merged if not (lo == hi and lo in (0, last))]


def coincidence_set(u: GridFunction, phi: PiecewisePoly, gap_tol: float | None = None
                    ) -> IntervalSet:
    """Node runs with u - phi <= gap_tol, bridged across single-node gaps.

    Default gap_tol is 10 tol (tol from the solve, else 1e-8).  A boundary
    node on its own is dropped: touching the obstacle only through the
    boundary data is not contact.
    """
    if gap_tol is None:
        gap_tol = 10 * (u.info.tol if u.info is not None else 1e-8)
    runs = _contact_runs(u, phi(u.x), gap_tol)
    return IntervalSet([(u.x[lo], u.x[hi]) for lo, hi in runs], tol=0.0)


@dataclass(frozen=True)
class LewyStampacchiaReport:
    lower_violation: float   # max of f - (-Delta_p u), clipped at 0
    upper_violation: float   # max of (-Delta_p u) - max(-Delta_p phi, f), clipped at 0
    tol: float

    @property
    def ok(self) -> bool:
        return self.lower_violation <= self.tol and self.upper_violation <= self.tol


def lewy_stampacchia_check(u: GridFunction, spec: ProblemSpec, tol: float) -> LewyStampacchiaReport:
    """Nodewise f <= -Delta_p^h u <= max(-Delta_p^h phi, f) at non-Dirichlet nodes.

    f is the nodal average b_i / m_i, the quantity the discrete operator is
    balanced against.  Violations are net of the rounding floor of u (and of
    phi for the upper bound), as for the KKT residual: with slopes above 1
    and large p the fluxes are so large that double precision cannot
    resolve the bounds any closer.
    """
    d = discretize(spec, u.n_nodes)
    lap_u = discrete_plap(d, u.values, spec.p)
    floor_u = rounding_floor(d, u.values, spec.p)
    fbar = d.b / d.m
    nodes = ~d.fixed
    lower = np.max(np.where(nodes, fbar - lap_u - floor_u, -np.inf))
    if spec.phi is None:
        upper_ref = fbar
        floor_ref = floor_u
    else:
        upper_ref = np.maximum(discrete_plap(d, d.phi, spec.p), fbar)
        floor_ref = floor_u + rounding_floor(d, d.phi, spec.p)
    upper = np.max(np.where(nodes, lap_u - upper_ref - floor_ref, -np.inf))
    return LewyStampacchiaReport(max(float(lower), 0.0), max(float(upper), 0.0), tol)


def solution_table(u: GridFunction, spec: ProblemSpec) -> str:
    """CSV with columns x,u,phi,u_minus_phi,neg_plap_u."""
    d = discretize(spec, u.n_nodes)
    lap = discrete_plap(d, u.values, spec.p)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "u", "phi", "u_minus_phi", "neg_plap_u"])
    for xi, ui, pi, li in zip(u.x, u.values, d.phi, lap):
        obst = ["", ""] if spec.phi is None else [f"{pi:.12g}", f"{ui - pi:.12g}"]
        w.writerow([f"{xi:.12g}", f"{ui:.12g}", *obst, f"{li:.12g}"])
    return buf.getvalue()


# -- coincidence set limit ---------------------------------------------------

@dataclass(frozen=True)
class GammaEstimate:
    lower: IntervalSet          # intersection over the tail
    upper: IntervalSet          # union over the tail
    limit: IntervalSet          # endpoints extrapolated to p = infinity
    lambda_ok: bool
    sets: tuple[IntervalSet, ...]
    p_values: tuple[float, ...]


def _extrapolate(p: np.ndarray, e: np.ndarray, cell: float) -> float:
    """Limit of an endpoint sequence e(p).

    Free boundaries approach their limit like delta * p ~ a * log(b / delta),
    the log coming from |s|^{1/(p-1)} = exp(log|s| / (p-1)).  The three
    parameters (limit, a, log b) are fitted by least squares.
    """
    if np.ptp(e) <= 0.5 * cell:
        return float(e[-1])
    sgn = 1.0 if e[-1] > e[0] else -1.0

    def resid(theta):
        lim = e[-1] + sgn * math.exp(theta[0])
        delta = sgn * (lim - e)
        return (delta * (p - 1) - theta[1] * (theta[2] - np.log(delta))) / np.max(p)

    guess = [math.log(max(abs(e[-1] - e[0]), cell)), 1.0, 0.0]
    try:
        fit = optimize.least_squares(resid, guess, method="lm", max_nfev=2000)
        lim = e[-1] + sgn * math.exp(fit.x[0])
        if fit.success and math.isfinite(lim):
            return float(lim)
    except (ValueError, OverflowError):
        pass
    A = np.column_stack([np.ones_like(p), np.log(p) / p, 1 / p])
    return float(np.linalg.lstsq(A, e, rcond=None)[0][0])


def _subcell_edge(u: GridFunction, gap: np.ndarray, idx: int, direction: int) -> float:
    """Free-boundary position past contact node idx, to a fraction of a cell.

    The gap u - phi at the next three free nodes is fitted by
    C (d + j h)^gamma, j = 0, 1, 2; d is the offset of the free boundary
    from the first free node.  Falls back to the contact node itself.
    """
    h = u.h
    js = idx + direction * np.arange(1, 4)
    if js.min() < 0 or js.max() >= u.n_nodes:
        return float(u.x[idx])
    w = gap[js]
    if not np.all(w > 0) or not (w[0] < w[1] < w[2]):
        return float(u.x[idx])
    r1, r2 = math.log(w[1] / w[0]), math.log(w[2] / w[1])

    def mismatch(t):
        return r1 / math.log((t + 1) / t) * math.log((t + 2) / (t + 1)) - r2

    try:
        t = optimize.brentq(mismatch, 1e-6, 1.0)
    except ValueError:
        return float(u.x[idx])
    return float(u.x[js[0]] - direction * t * h)


def gamma_infty_estimate(specs, n_nodes: int = 2001, gap_tol: float | None = None,
                         tol: float = 1e-8) -> GammaEstimate:
    """Estimate the limiting coincidence set from solves at increasing p.

    `lower` and `upper` are the intersection and union of the computed sets.
    `limit` extrapolates every free-boundary endpoint to p = infinity; ends
    lying on the boundary of the interval stay put.  lambda_ok holds when
    every solve has the same number of contact intervals and each endpoint
    moves monotonically (up to one grid cell): the sets then converge, so
    their lim inf and lim sup agree.
    """
    specs = list(specs)
    if len(specs) < 3:
        raise ValueError("need at least three values of p")
    ps = np.array([s.p for s in specs])
    if np.any(np.diff(ps) <= 0):
        raise ValueError("p values must increase")
    if any(s.phi is None for s in specs):
        raise ValueError("every spec needs an obstacle")
    same_data = all(replace(s, p=specs[0].p) == specs[0] for s in specs)
    sols = solve_sweep(specs[0], ps, n_nodes, tol) if same_data else [
        obstacle_solve(s, n_nodes, tol) for s in specs]
    if gap_tol is None:
        gap_tol = 10 * tol
    runs = []
    for u, s in zip(sols, specs):
        runs.append(_contact_runs(u, s.phi(u.x), gap_tol))
    sets = [IntervalSet([(u.x[lo], u.x[hi]) for lo, hi in R], tol=0.0) for u, R in zip(sols, runs)]
    lower, upper = sets[0], sets[0]
    for S in sets[1:]:
        lower = lower.intersection(S)
        upper = upper.union(S)
    cell = sols[0].h
    lambda_ok = len({len(R) for R in runs}) == 1
    limit = lower
    if lambda_ok and runs[0]:
        last = n_nodes - 1
        ends = []
        for u, s, R in zip(sols, specs, runs):
            gap = u.values - s.phi(u.x)
            row = []
            for lo, hi in R:
                row.append(u.x[0] if lo == 0 else _subcell_edge(u, gap, lo, -1))
                row.append(u.x[-1] if hi == last else _subcell_edge(u, gap, hi, +1))
            ends.append(row)
        ends = np.array(ends)
        for col in ends.T:
            steps = np.diff(col)
            if np.any(steps > cell) and np.any(steps < -cell):
                lambda_ok = False
        if lambda_ok:
            a, b = specs[0].interval
            lim = [min(max(_extrapolate(ps, col, cell), a), b) for col in ends.T]
            limit = IntervalSet(list(zip(lim[0::2], lim[1::2])))
    elif lambda_ok:
        limit = IntervalSet.empty()
    return GammaEstimate(lower, upper, limit, lambda_ok, tuple(sets), tuple(ps.tolist()))
