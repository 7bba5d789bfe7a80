"""Explicit p -> infinity limits of 1D Dirichlet and obstacle problems.

On a component (lo, hi) with boundary values (left, right) and datum f, let
F be an antiderivative of f and h(r) = mu{F < r}.  With

    beta* = sup{r : h(r) <= (hi - lo - left + right) / 2}

the limit has slope +1 on {F < beta*}, -1 on {F > beta*} and a constant
slope k on the plateau {F = beta*}, where k is fixed by the boundary values.
Obstacle problems apply this on every component of the complement of the
limiting coincidence set and copy the obstacle on the set itself.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .piecewise import IntervalSet, PiecewisePoly, antiderivative, level_sets, sublevel_measure

INFINITE_BETA = math.inf
_SLOPE_TOL = 1e-12


class InfeasibleComponentError(ValueError):
    """Boundary data on a component rise faster than slope 1."""


class InconsistentLimitError(RuntimeError):
    """A computed plateau slope left [-1, 1]; beta* must have been wrong."""


@dataclass(frozen=True)
class Component:
    """One connected piece of the domain on which a limit formula applies.

    kind is one of "dirichlet", "interior", "left", "right", "ball_core".
    F vanishes at `base` (the right end only for "right" components) and U
    is anchored at `anchor` (the right end for "right" and "ball_core").
    """

    kind: str
    lo: float
    hi: float
    left_value: float | None
    right_value: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"component endpoints not ordered: {self.lo}, {self.hi}")
        vals = [self.right_value] + ([] if self.left_value is None else [self.left_value])
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("component boundary values must be finite")
        if self.kind not in ("dirichlet", "interior", "left", "right", "ball_core"):
            raise ValueError(f"unknown component kind {self.kind!r}")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def base(self) -> float:
        return self.hi if self.kind == "right" else self.lo

    @property
    def anchor(self) -> float:
        return self.hi if self.kind in ("right", "ball_core") else self.lo

    @property
    def rise(self) -> float:
        return self.right_value - self.left_value

    @property
    def target(self) -> float:
        return 0.5 * (self.length - self.left_value + self.right_value)


@dataclass(frozen=True)
class LimitPiece:
    """U on [lo, hi]: either the obstacle, or value_lo + slope * (x - lo)."""

    lo: float
    hi: float
    kind: str  # "obstacle" or "slope"
    slope: float = 0.0
    value_lo: float = 0.0
    label: str = ""  # which set produced a slope piece: minus, plus, zero, affine


@dataclass(frozen=True)
class ComponentReport:
    component: Component
    beta_star: float | None
    k: float
    o_minus: IntervalSet
    o_plus: IntervalSet
    o_zero: IntervalSet
    affine: bool = False


@dataclass(frozen=True)
class LimitFunction:
    """Assembled limit U on `domain`."""

    domain: tuple[float, float]
    pieces: tuple[LimitPiece, ...]
    phi: PiecewisePoly | None = None
    reports: tuple[ComponentReport, ...] = field(default=())

    @property
    def k_values(self) -> list[float]:
        return [r.k for r in self.reports]

    @property
    def breakpoints(self) -> np.ndarray:
        return np.array([self.pieces[0].lo] + [p.hi for p in self.pieces])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.domain
        tol = 1e-12 * max(1.0, abs(lo), abs(hi))
        if x.size and (x.min() < lo - tol or x.max() > hi + tol):
            raise ValueError(f"evaluation point outside domain {self.domain}")
        out = np.full(x.shape, np.nan)
        for pc in self.pieces:
            m = (x >= pc.lo) & (x <= pc.hi)
            if not m.any():
                continue
            if pc.kind == "obstacle":
                out[m] = self.phi(x[m])
            else:
                out[m] = pc.value_lo + pc.slope * (x[m] - pc.lo)
        return out if out.ndim else float(out)

    def to_piecewise(self) -> PiecewisePoly:
        rows, br = [], [self.pieces[0].lo]
        for pc in self.pieces:
            if pc.kind == "obstacle":
                sub = self.phi.restrict(pc.lo, pc.hi)
                for i in range(sub.n_pieces):
                    rows.append(sub.coeffs[i])
                    br.append(sub.breaks[i + 1])
            else:
                rows.append([pc.value_lo - pc.slope * pc.lo, pc.slope])
                br.append(pc.hi)
        return PiecewisePoly(br, rows)

    # -- checks -------------------------------------------------------------
    def continuity_defect(self) -> float:
        """Largest jump between consecutive pieces."""
        worst = 0.0
        for a, b in zip(self.pieces[:-1], self.pieces[1:]):
            va = self.phi(a.hi) if a.kind == "obstacle" else a.value_lo + a.slope * (a.hi - a.lo)
            vb = self.phi(b.lo) if b.kind == "obstacle" else b.value_lo
            worst = max(worst, abs(va - vb))
        return worst

    def lipschitz_constant(self) -> float:
        """max |U'| over all pieces, computed exactly from the polynomials."""
        lo, hi = self.to_piecewise().derivative().extrema()
        return max(abs(lo), abs(hi))

    def obstacle_gap(self) -> float:
        """min (U - phi); +inf when there is no obstacle."""
        if self.phi is None:
            return math.inf
        d = self.to_piecewise() - self.phi.restrict(*self.domain)
        return d.extrema()[0]

    # -- serialization ------------------------------------------------------
    def to_json(self) -> dict:
        pieces = []
        for pc in self.pieces:
            item = {"interval": [pc.lo, pc.hi], "kind": pc.kind}
            if pc.kind == "slope":
                item.update(slope=pc.slope, anchor=pc.value_lo, label=pc.label)
            pieces.append(item)
        comps = [{"kind": r.component.kind,
                  "interval": [r.component.lo, r.component.hi],
                  "beta_star": (None if r.beta_star is None
                                else ("inf" if math.isinf(r.beta_star) else r.beta_star)),
                  "k": r.k, "affine": r.affine} for r in self.reports]
        out = {"domain": list(self.domain), "pieces": pieces, "components": comps}
        if self.phi is not None:
            out["phi"] = self.phi.to_json()
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    def to_csv(self, n_samples: int = 1001) -> str:
        """Samples of U as CSV text with columns x,U."""
        x = np.unique(np.concatenate([np.linspace(*self.domain, n_samples), self.breakpoints]))
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "U"])
        for xi, ui in zip(x, self(x)):
            w.writerow([f"{xi:.12g}", f"{ui:.12g}"])
        return buf.getvalue()


# -- scalar building blocks --------------------------------------------------

def beta_star(F: PiecewisePoly, target: float, iterations: int = 200) -> float:
    """sup{r : mu{F < r} <= target}; +inf when target reaches the length."""
    L = F.length
    if target < 0:
        if target < -_SLOPE_TOL * max(1.0, L):
            raise InfeasibleComponentError(
                f"target {target} < 0: boundary data are steeper than slope 1")
        target = 0.0
    if target >= L:
        return INFINITE_BETA
    fmin, fmax = F.extrema()
    spread = fmax - fmin
    if spread <= 0.0:
        return fmin
    # h(r) = 0 up to min F and = L above max F, so the threshold lies in
    # [min F, max F]; work relative to the spread so any scale of f resolves
    lo, hi = fmin, fmax
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if sublevel_measure(F, mid) <= target:
            lo = mid
        else:
            hi = mid
    # the supremum sits exactly on a plateau value or an extreme value when
    # h jumps there; snap to it so the plateau is detected as {F = beta*}
    cands = [fmin, fmax] + _plateau_values(F)
    for v in sorted(cands, key=lambda v: abs(v - lo)):
        if abs(v - lo) <= 1e-9 * spread and sublevel_measure(F, v) <= target + 1e-12 * L:
            return v
    return lo


def _plateau_values(F: PiecewisePoly) -> list[float]:
    out = []
    for i in range(F.n_pieces):
        c = F.coeffs[i]
        if np.all(c[1:] == 0) or np.abs(c[1:]).sum() <= 1e-14 * np.abs(c).sum():
            out.append(float(F(0.5 * (F.breaks[i] + F.breaks[i + 1]))))
    return out


def k_coefficient(o_minus: IntervalSet, o_plus: IntervalSet, o_zero: IntervalSet,
                  rise: float) -> float:
    """Plateau slope (mu(O+) - mu(O-) + rise) / mu(O0); 0 on a null plateau."""
    m0 = o_zero.measure
    total = o_minus.measure + o_plus.measure + m0
    if m0 <= 1e-12 * max(1.0, total):
        return 0.0
    k = (o_plus.measure - o_minus.measure + rise) / m0
    if abs(k) > 1 + 1e-9:
        raise InconsistentLimitError(f"plateau slope {k} outside [-1, 1]")
    return float(np.clip(k, -1.0, 1.0))


# -- component assembly ------------------------------------------------------

def _slope_pieces(o_minus, o_plus, o_zero, k, comp: Component, anchor_value: float
                  ) -> list[LimitPiece]:
    parts = ([(a, b, 1.0, "minus") for a, b in o_minus]
             + [(a, b, -1.0, "plus") for a, b in o_plus]
             + [(a, b, k, "zero") for a, b in o_zero])
    parts = sorted((p for p in parts if p[1] - p[0] > 1e-13), key=lambda p: p[0])
    # tile [lo, hi] exactly and merge neighbours with equal slope
    tiles: list[list] = []
    cur = comp.lo
    for idx, (a, b, s, lab) in enumerate(parts):
        b = comp.hi if idx == len(parts) - 1 else b
        if tiles and tiles[-1][2] == s:
            tiles[-1][1] = b
        else:
            tiles.append([cur, b, s, lab])
        cur = b
    if not tiles:
        tiles = [[comp.lo, comp.hi, 0.0, "zero"]]
    tiles[-1][1] = comp.hi
    rises = np.array([s * (b - a) for a, b, s, _ in tiles])
    if comp.anchor == comp.lo:
        starts = anchor_value + np.concatenate([[0.0], np.cumsum(rises)[:-1]])
    else:
        ends = anchor_value - np.concatenate([np.cumsum(rises[::-1])[::-1][1:], [0.0]])
        starts = ends - rises
    return [LimitPiece(a, b, "slope", s, float(v), lab)
            for (a, b, s, lab), v in zip(tiles, starts)]


def _affine_piece(comp: Component) -> LimitPiece:
    s = comp.rise / comp.length
    return LimitPiece(comp.lo, comp.hi, "slope", s, comp.left_value, "affine")


def component_limit(datum: PiecewisePoly, comp: Component
                    ) -> tuple[list[LimitPiece], ComponentReport]:
    """Limit on one component; `datum` is the (possibly weighted) load."""
    d = datum.restrict(comp.lo, comp.hi)
    F = antiderivative(d, comp.base)
    if comp.kind == "ball_core":
        o_minus, o_plus, o_zero = level_sets(F, 0.0)
        pieces = _slope_pieces(o_minus, o_plus, o_zero, 0.0, comp, comp.right_value)
        return pieces, ComponentReport(comp, 0.0, 0.0, o_minus, o_plus, o_zero)
    if abs(comp.rise) > comp.length * (1 + _SLOPE_TOL):
        e = IntervalSet.empty()
        return [_affine_piece(comp)], ComponentReport(comp, None, 0.0, e, e, e, affine=True)
    b = beta_star(F, comp.target)
    if math.isinf(b):
        o_minus, o_plus, o_zero = IntervalSet([(comp.lo, comp.hi)]), IntervalSet.empty(), IntervalSet.empty()
    else:
        o_minus, o_plus, o_zero = level_sets(F, b)
    k = k_coefficient(o_minus, o_plus, o_zero, comp.rise)
    anchor = comp.left_value if comp.anchor == comp.lo else comp.right_value
    pieces = _slope_pieces(o_minus, o_plus, o_zero, k, comp, anchor)
    return pieces, ComponentReport(comp, b, k, o_minus, o_plus, o_zero)


# -- public constructors -----------------------------------------------------

def affine_limit(a: float, b: float, A: float, B: float) -> LimitFunction:
    """Straight line through (a, A) and (b, B); used when |B - A| >= b - a."""
    comp = Component("dirichlet", float(a), float(b), float(A), float(B))
    e = IntervalSet.empty()
    return LimitFunction((comp.lo, comp.hi), (_affine_piece(comp),),
                         reports=(ComponentReport(comp, None, 0.0, e, e, e, affine=True),))


def dirichlet_limit(f: PiecewisePoly, a: float, b: float, A: float, B: float) -> LimitFunction:
    """Limit of the Dirichlet problems with datum f and u(a)=A, u(b)=B."""
    comp = Component("dirichlet", float(a), float(b), float(A), float(B))
    if abs(B - A) > (b - a) * (1 + _SLOPE_TOL):
        raise InfeasibleComponentError(
            f"|B - A| / (b - a) = {abs(B - A) / (b - a):.6g} > 1; use affine_limit")
    pieces, rep = component_limit(f, comp)
    return LimitFunction((comp.lo, comp.hi), tuple(pieces), reports=(rep,))


def _assemble(datum: PiecewisePoly, phi: PiecewisePoly, gamma: IntervalSet,
              a: float, b: float, A: float, B: float, ball: bool) -> LimitFunction:
    if not gamma.is_empty() and (gamma[0][0] < a - 1e-12 or gamma[-1][1] > b + 1e-12):
        raise ValueError(f"coincidence set {gamma} not inside [{a}, {b}]")
    pieces: list[LimitPiece] = []
    reports = []
    for lo, hi in gamma:
        if hi > lo:
            pieces.append(LimitPiece(lo, hi, "obstacle"))
    for lo, hi in gamma.complement(a, b):
        left_in = bool(gamma.contains(lo))
        right_in = bool(gamma.contains(hi))
        right_val = float(phi(hi)) if right_in else B
        if ball and lo == a and not left_in:
            comp = Component("ball_core", lo, hi, None, right_val)
        else:
            left_val = float(phi(lo)) if left_in else A
            kind = {(True, True): "interior", (False, True): "left",
                    (True, False): "right", (False, False): "dirichlet"}[(left_in, right_in)]
            comp = Component(kind, lo, hi, left_val, right_val)
        cp, rep = component_limit(datum, comp)
        pieces.extend(cp)
        reports.append(rep)
    pieces.sort(key=lambda p: p.lo)
    reports.sort(key=lambda r: r.component.lo)
    return LimitFunction((a, b), tuple(pieces), phi=phi, reports=tuple(reports))


def obstacle_limit(f: PiecewisePoly, phi: PiecewisePoly, gamma: IntervalSet,
                   A: float = 0.0, B: float = 0.0) -> LimitFunction:
    """Limit of the obstacle problems, given the limiting coincidence set.

    U = phi on `gamma`; every complementary component gets the component
    formula with boundary values taken from phi (contact ends) or A, B.
    """
    a, b = f.domain
    return _assemble(f, phi.restrict(a, b), gamma, a, b, A, B, ball=False)


def radial_limit(g: PiecewisePoly, Phi: PiecewisePoly, n: int, r1: float, r2: float,
                 gamma: IntervalSet) -> LimitFunction:
    """Radial profile of the limit on the annulus r1 < |x| < r2 (ball if r1 = 0).

    The load is t**(n-1) g(t); sets are measured in the radial variable t.
    A component touching the centre of a ball is anchored at its outer end
    and uses the sign of the load's antiderivative from 0.
    """
    if n < 1 or r1 < 0 or not r1 < r2:
        raise ValueError(f"invalid radial domain n={n}, r1={r1}, r2={r2}")
    datum = g.restrict(r1, r2).times_monomial(n - 1)
    return _assemble(datum, Phi.restrict(r1, r2), gamma, r1, r2, 0.0, 0.0, ball=(r1 == 0))


def ball_core_limit(g: PiecewisePoly, n: int, c: float, Phi_c: float) -> LimitFunction:
    """Limit on the central ball [0, c] anchored at U(c) = Phi_c."""
    if not c > 0:
        raise ValueError("core radius must be positive")
    datum = g.restrict(0.0, c).times_monomial(n - 1)
    comp = Component("ball_core", 0.0, c, None, Phi_c)
    pieces, rep = component_limit(datum, comp)
    return LimitFunction((0.0, c), tuple(pieces), reports=(rep,))
