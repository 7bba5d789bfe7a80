"""Exact calculus on piecewise-polynomial functions of one variable.

`PiecewisePoly` stores one polynomial per sub-interval in the global
monomial basis (ascending powers of x).  `IntervalSet` is a finite union
of closed intervals, used for sublevel sets and coincidence sets.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

MERGE_TOL = 1e-12


def parse_real(value) -> float:
    """Accept a number or a string such as "3/2" or "-0.25"."""
    if isinstance(value, bool):
        raise ValueError(f"expected a real number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        return float(Fraction(value.strip()))
    raise ValueError(f"expected a real number, got {value!r}")


class IntervalSet:
    """Finite union of closed intervals [lo, hi] (degenerate points allowed).

    Intervals are sorted and merged on construction whenever they overlap or
    are separated by a gap of at most `tol`.
    """

    __slots__ = ("_iv",)

    def __init__(self, intervals: Iterable[Sequence[float]] = (), tol: float = MERGE_TOL):
        ivs = sorted((float(a), float(b)) for a, b in intervals)
        merged: list[list[float]] = []
        for a, b in ivs:
            if b < a:
                raise ValueError(f"interval with hi < lo: ({a}, {b})")
            if merged and a <= merged[-1][1] + tol:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        self._iv = tuple((a, b) for a, b in merged)

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls(())

    @property
    def intervals(self) -> tuple[tuple[float, float], ...]:
        return self._iv

    @property
    def measure(self) -> float:
        return float(sum(b - a for a, b in self._iv))

    def is_empty(self) -> bool:
        return not self._iv

    def __len__(self) -> int:
        return len(self._iv)

    def __iter__(self):
        return iter(self._iv)

    def __getitem__(self, i):
        return self._iv[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, IntervalSet) and self._iv == other._iv

    def __hash__(self):
        return hash(self._iv)

    def __repr__(self) -> str:
        if not self._iv:
            return "IntervalSet(∅)"
        body = " ∪ ".join(f"[{a:.12g}, {b:.12g}]" for a, b in self._iv)
        return f"IntervalSet({body})"

    def isclose(self, other: "IntervalSet", atol: float) -> bool:
        """Same number of intervals and all endpoints within `atol`."""
        if len(self) != len(other):
            return False
        return all(abs(a - c) <= atol and abs(b - d) <= atol
                   for (a, b), (c, d) in zip(self._iv, other._iv))

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=bool)
        for a, b in self._iv:
            out |= (x >= a) & (x <= b)
        return out

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(self._iv + other._iv)

    def intersection(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        i = j = 0
        A, B = self._iv, other._iv
        while i < len(A) and j < len(B):
            lo = max(A[i][0], B[j][0])
            hi = min(A[i][1], B[j][1])
            if lo <= hi:
                out.append((lo, hi))
            if A[i][1] < B[j][1]:
                i += 1
            else:
                j += 1
        return IntervalSet(out)

    def complement(self, lo: float, hi: float) -> "IntervalSet":
        """Closures of the components of [lo, hi] minus this set."""
        out = []
        cur = lo
        for a, b in self._iv:
            if a > cur:
                out.append((cur, min(a, hi)))
            cur = max(cur, b)
            if cur >= hi:
                break
        if cur < hi:
            out.append((cur, hi))
        return IntervalSet([(a, b) for a, b in out if b > a], tol=0.0)

    def regular(self, min_length: float = 0.0) -> "IntervalSet":
        """Closure of the interior: drop intervals no longer than `min_length`."""
        return IntervalSet([(a, b) for a, b in self._iv if b - a > min_length])

    def dilate(self, eps: float, lo: float | None = None, hi: float | None = None) -> "IntervalSet":
        ivs = []
        for a, b in self._iv:
            a, b = a - eps, b + eps
            if lo is not None:
                a = max(a, lo)
            if hi is not None:
                b = min(b, hi)
            ivs.append((a, b))
        return IntervalSet(ivs)

    def subset_of(self, other: "IntervalSet") -> bool:
        return all(any(c <= a and b <= d for c, d in other) for a, b in self._iv)

    def to_list(self) -> list[list[float]]:
        return [[a, b] for a, b in self._iv]


def _local_coeffs(c: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Coefficients of t -> P(mid + half*t), so the piece lives on t in [-1, 1]."""
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    out = np.zeros(len(c))
    # Horner in polynomial arithmetic: ((c_m)(mid+half t) + c_{m-1})...
    lin = np.array([mid, half])
    for ck in c[::-1]:
        out = npoly.polyadd(npoly.polymul(out, lin), [ck])
    res = np.zeros(len(c))
    res[: min(len(out), len(c))] = out[: len(c)]
    return res


def _is_flat(local: np.ndarray) -> bool:
    scale = np.abs(local).sum()
    return scale == 0.0 or np.abs(local[1:]).sum() <= 1e-14 * scale


def _real_roots_unit(local: np.ndarray) -> np.ndarray:
    """Real roots in [-1, 1] of a polynomial given by ascending coefficients."""
    c = np.array(local, dtype=float)
    scale = np.abs(c).max() if c.size else 0.0
    if scale == 0.0:
        return np.empty(0)
    # trim negligible leading terms
    while len(c) > 1 and abs(c[-1]) <= 1e-15 * scale:
        c = c[:-1]
    deg = len(c) - 1
    if deg == 0:
        return np.empty(0)
    if deg == 1:
        roots = np.array([-c[0] / c[1]])
    elif deg == 2:
        a, b, cc = c[2], c[1], c[0]
        disc = b * b - 4 * a * cc
        if disc < -1e-14 * max(b * b, abs(4 * a * cc)):
            roots = np.empty(0)
        else:
            sq = math.sqrt(max(disc, 0.0))
            q = -0.5 * (b + math.copysign(sq, b))
            if q == 0.0:
                roots = np.array([0.0])
            else:
                roots = np.array([q / a, cc / q])
    else:
        r = npoly.polyroots(c)
        roots = r[np.abs(r.imag) <= 1e-7 * (1 + np.abs(r.real))].real
        d = npoly.polyder(c)
        for _ in range(3):
            dv = npoly.polyval(roots, d)
            step = np.where(dv != 0, npoly.polyval(roots, c) / np.where(dv != 0, dv, 1), 0.0)
            roots = roots - step
    roots = roots[(roots > -1 - 1e-12) & (roots < 1 + 1e-12)]
    return np.unique(np.clip(roots, -1.0, 1.0))


class PiecewisePoly:
    """Polynomial on each sub-interval [breaks[i], breaks[i+1]].

    `coeffs[i, k]` multiplies x**k on piece i.  At an interior breakpoint the
    value is taken from the piece on the right; `left_limit` gives the other
    side.  Instances are immutable.
    """

    __slots__ = ("_breaks", "_coeffs")

    def __init__(self, breaks: Sequence[float], coeffs):
        br = np.array(breaks, dtype=float)
        if br.ndim != 1 or br.size < 2:
            raise ValueError("need at least two breakpoints")
        if not np.all(np.isfinite(br)) or np.any(np.diff(br) <= 0):
            raise ValueError("breakpoints must be finite and strictly increasing")
        rows = [np.atleast_1d(np.asarray(c, dtype=float)) for c in coeffs]
        if len(rows) != br.size - 1:
            raise ValueError(f"{br.size - 1} pieces expected, got {len(rows)} coefficient rows")
        width = max(len(r) for r in rows)
        C = np.zeros((len(rows), width))
        for i, r in enumerate(rows):
            C[i, : len(r)] = r
        if not np.all(np.isfinite(C)):
            raise ValueError("coefficients must be finite")
        br.flags.writeable = False
        C.flags.writeable = False
        self._breaks = br
        self._coeffs = C

    # -- constructors -------------------------------------------------------
    @classmethod
    def constant(cls, value: float, lo: float, hi: float) -> "PiecewisePoly":
        return cls([lo, hi], [[value]])

    @classmethod
    def polynomial(cls, coeffs: Sequence[float], lo: float, hi: float) -> "PiecewisePoly":
        return cls([lo, hi], [list(coeffs)])

    @classmethod
    def step(cls, breaks: Sequence[float], values: Sequence[float]) -> "PiecewisePoly":
        """Piecewise-constant function taking values[i] on piece i."""
        return cls(breaks, [[v] for v in values])

    @classmethod
    def linear_interpolant(cls, x: Sequence[float], y: Sequence[float]) -> "PiecewisePoly":
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        s = np.diff(y) / np.diff(x)
        return cls(x, np.column_stack([y[:-1] - s * x[:-1], s]))

    # -- basic attributes ---------------------------------------------------
    @property
    def breaks(self) -> np.ndarray:
        return self._breaks

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def domain(self) -> tuple[float, float]:
        return float(self._breaks[0]), float(self._breaks[-1])

    @property
    def lo(self) -> float:
        return float(self._breaks[0])

    @property
    def hi(self) -> float:
        return float(self._breaks[-1])

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def n_pieces(self) -> int:
        return self._coeffs.shape[0]

    @property
    def degree(self) -> int:
        nz = np.nonzero(np.any(self._coeffs != 0, axis=0))[0]
        return int(nz[-1]) if nz.size else 0

    def __repr__(self) -> str:
        return f"PiecewisePoly(breaks={self._breaks.tolist()}, coeffs={self._coeffs.tolist()})"

    def __eq__(self, other) -> bool:
        return (isinstance(other, PiecewisePoly)
                and np.array_equal(self._breaks, other._breaks)
                and np.array_equal(self._coeffs, other._coeffs))

    __hash__ = None

    # -- evaluation ---------------------------------------------------------
    def _check_domain(self, x: np.ndarray) -> None:
        tol = 1e-12 * max(1.0, abs(self.lo), abs(self.hi))
        if x.size and (np.nanmin(x) < self.lo - tol or np.nanmax(x) > self.hi + tol):
            raise ValueError(f"evaluation point outside domain [{self.lo}, {self.hi}]")

    def _eval_pieces(self, x: np.ndarray, idx: np.ndarray) -> np.ndarray:
        C = self._coeffs
        vals = C[idx, -1].copy()
        for k in range(C.shape[1] - 2, -1, -1):
            vals = vals * x + C[idx, k]
        return vals

    def piece_index(self, x, side: str = "right") -> np.ndarray:
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self._breaks, x, side=side) - 1
        return np.clip(idx, 0, self.n_pieces - 1)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        self._check_domain(x)
        out = self._eval_pieces(x, self.piece_index(x))
        return out if out.ndim else float(out)

    def left_limit(self, x):
        """Value approached from the left (uses piece i-1 at breakpoint i)."""
        x = np.asarray(x, dtype=float)
        self._check_domain(x)
        out = self._eval_pieces(x, self.piece_index(x, side="left"))
        return out if out.ndim else float(out)

    def jumps(self) -> np.ndarray:
        """Right minus left value at each interior breakpoint."""
        inner = self._breaks[1:-1]
        if inner.size == 0:
            return np.empty(0)
        i = np.arange(1, self.n_pieces)
        return self._eval_pieces(inner, i) - self._eval_pieces(inner, i - 1)

    def is_continuous(self, tol: float = 1e-10) -> bool:
        j = self.jumps()
        scale = max(1.0, float(np.abs(self._coeffs).max()))
        return bool(np.all(np.abs(j) <= tol * scale))

    # -- calculus -----------------------------------------------------------
    def derivative(self) -> "PiecewisePoly":
        C = self._coeffs
        if C.shape[1] == 1:
            return PiecewisePoly(self._breaks, np.zeros((self.n_pieces, 1)))
        k = np.arange(1, C.shape[1])
        return PiecewisePoly(self._breaks, C[:, 1:] * k)

    def _piece_integrals(self) -> np.ndarray:
        """Integral over each piece, computed from the raw antiderivatives."""
        C = self._coeffs
        k = np.arange(1, C.shape[1] + 1)
        I = np.zeros((self.n_pieces, C.shape[1] + 1))
        I[:, 1:] = C / k
        idx = np.arange(self.n_pieces)
        raw = PiecewisePoly.__new__(PiecewisePoly)
        raw._breaks, raw._coeffs = self._breaks, I
        return (raw._eval_pieces(self._breaks[1:], idx)
                - raw._eval_pieces(self._breaks[:-1], idx))

    def antiderivative(self, base: float | None = None) -> "PiecewisePoly":
        return antiderivative(self, self.lo if base is None else base)

    def integral(self, lo: float | None = None, hi: float | None = None) -> float:
        f = self if lo is None and hi is None else self.restrict(
            self.lo if lo is None else lo, self.hi if hi is None else hi)
        return float(np.sum(f._piece_integrals()))

    # -- algebra ------------------------------------------------------------
    def _same_domain(self, other: "PiecewisePoly") -> None:
        tol = 1e-12 * max(1.0, abs(self.lo), abs(self.hi))
        if abs(self.lo - other.lo) > tol or abs(self.hi - other.hi) > tol:
            raise ValueError(f"domain mismatch: {self.domain} vs {other.domain}")

    def refine(self, points: Iterable[float]) -> "PiecewisePoly":
        """Same function with additional breakpoints inserted."""
        pts = np.asarray(list(points), dtype=float)
        tol = MERGE_TOL * max(1.0, abs(self.lo), abs(self.hi))
        pts = pts[(pts > self.lo + tol) & (pts < self.hi - tol)]
        br = np.union1d(self._breaks, pts)
        keep = np.concatenate([[True], np.diff(br) > tol])
        br = br[keep]
        br[-1] = self.hi
        mids = 0.5 * (br[:-1] + br[1:])
        return PiecewisePoly(br, self._coeffs[self.piece_index(mids)])

    def restrict(self, lo: float, hi: float) -> "PiecewisePoly":
        if lo < self.lo - MERGE_TOL or hi > self.hi + MERGE_TOL or hi <= lo:
            raise ValueError(f"[{lo}, {hi}] is not a sub-interval of {self.domain}")
        inner = self._breaks[(self._breaks > lo) & (self._breaks < hi)]
        br = np.concatenate([[lo], inner, [hi]])
        mids = 0.5 * (br[:-1] + br[1:])
        return PiecewisePoly(br, self._coeffs[self.piece_index(mids)])

    def _binary(self, other, op) -> "PiecewisePoly":
        if not isinstance(other, PiecewisePoly):
            other = PiecewisePoly.constant(float(other), self.lo, self.hi)
        self._same_domain(other)
        a = self.refine(other._breaks)
        b = other._resample(a._breaks)
        rows = [op(a._coeffs[i], b._coeffs[i]) for i in range(a.n_pieces)]
        return PiecewisePoly(a._breaks, rows)

    def _resample(self, br: np.ndarray) -> "PiecewisePoly":
        mids = 0.5 * (br[:-1] + br[1:])
        return PiecewisePoly(br, self._coeffs[self.piece_index(mids)])

    def __add__(self, other):
        return self._binary(other, npoly.polyadd)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, npoly.polysub)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, PiecewisePoly):
            return self._binary(other, npoly.polymul)
        return PiecewisePoly(self._breaks, self._coeffs * float(other))

    __rmul__ = __mul__

    def __neg__(self):
        return PiecewisePoly(self._breaks, -self._coeffs)

    def times_monomial(self, k: int) -> "PiecewisePoly":
        """Multiply by x**k."""
        if k < 0:
            raise ValueError("monomial power must be non-negative")
        if k == 0:
            return self
        C = np.zeros((self.n_pieces, self._coeffs.shape[1] + k))
        C[:, k:] = self._coeffs
        return PiecewisePoly(self._breaks, C)

    # -- extrema and roots --------------------------------------------------
    def extrema(self) -> tuple[float, float]:
        """(min, max) over the closed domain, including one-sided values at breaks."""
        cand = [self(self._breaks), self.left_limit(self._breaks[1:])]
        D = self.derivative()
        for i in range(self.n_pieces):
            lo, hi = self._breaks[i], self._breaks[i + 1]
            local = _local_coeffs(D._coeffs[i], lo, hi)
            if _is_flat(local) and abs(local[0]) == 0:
                continue
            t = _real_roots_unit(local)
            if t.size:
                x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * t
                cand.append(self._eval_pieces(x, np.full(x.shape, i)))
        v = np.concatenate([np.atleast_1d(c) for c in cand])
        return float(v.min()), float(v.max())

    def roots(self, value: float = 0.0) -> np.ndarray:
        """Points where a non-constant piece crosses or touches `value`."""
        out = []
        for i in range(self.n_pieces):
            lo, hi = self._breaks[i], self._breaks[i + 1]
            local = _local_coeffs(self._coeffs[i], lo, hi)
            local[0] -= value
            if _is_flat(local):
                continue
            t = _real_roots_unit(local)
            out.extend(0.5 * (lo + hi) + 0.5 * (hi - lo) * t)
        if not out:
            return np.empty(0)
        r = np.sort(np.asarray(out))
        keep = np.concatenate([[True], np.diff(r) > MERGE_TOL])
        return r[keep]

    # -- serialization ------------------------------------------------------
    def to_json(self) -> dict:
        return {"domain": [self.lo, self.hi],
                "breaks": self._breaks.tolist(),
                "coeffs": [list(map(float, np.trim_zeros(row, "b"))) or [0.0]
                           for row in self._coeffs]}

    @classmethod
    def from_json(cls, obj) -> "PiecewisePoly":
        """Inverse of `to_json`.

        `breaks` may list every breakpoint or only the interior ones; numbers
        may be given as strings like "3/2".
        """
        if not isinstance(obj, dict):
            raise ValueError("piecewise function must be an object with domain/breaks/coeffs")
        missing = {"domain", "coeffs"} - set(obj)
        if missing:
            raise ValueError(f"piecewise function is missing {sorted(missing)}")
        lo, hi = (parse_real(v) for v in obj["domain"])
        br = [parse_real(v) for v in obj.get("breaks", [])]
        if not br or br[0] != lo:
            br = [lo] + br
        if br[-1] != hi:
            br = br + [hi]
        coeffs = [[parse_real(v) for v in row] for row in obj["coeffs"]]
        return cls(br, coeffs)


# -- module-level operations ------------------------------------------------

def antiderivative(f: PiecewisePoly, base: float) -> PiecewisePoly:
    """Continuous F with F(base) = 0 and F' = f on every piece."""
    tol = 1e-12 * max(1.0, abs(f.lo), abs(f.hi))
    if not (f.lo - tol <= base <= f.hi + tol):
        raise ValueError(f"base {base} outside domain {f.domain}")
    C = f.coeffs
    k = np.arange(1, C.shape[1] + 1)
    I = np.zeros((f.n_pieces, C.shape[1] + 1))
    I[:, 1:] = C / k
    br = f.breaks
    idx = np.arange(f.n_pieces)
    raw = PiecewisePoly(br, I)
    start = raw._eval_pieces(br[:-1], idx)
    seg = raw._eval_pieces(br[1:], idx) - start
    left_vals = np.concatenate([[0.0], np.cumsum(seg)[:-1]])
    I[:, 0] += left_vals - start
    F = PiecewisePoly(br, I)
    shift = F(min(max(base, f.lo), f.hi))
    I[:, 0] -= shift
    return PiecewisePoly(br, I)


def level_sets(F: PiecewisePoly, r: float, value_tol: float | None = None
               ) -> tuple[IntervalSet, IntervalSet, IntervalSet]:
    """({F < r}, {F > r}, {F = r}) as interval sets.

    Constant pieces within `value_tol` of r go into the third set; isolated
    solutions appear there as degenerate intervals.  The default tolerance
    scales with the spread of F, so the sets do not depend on units.
    """
    if value_tol is None:
        fmin, fmax = F.extrema()
        value_tol = 1e-12 * max(fmax - fmin, abs(r))
    minus, plus, zero = [], [], []
    br = F.breaks
    for i in range(F.n_pieces):
        lo, hi = br[i], br[i + 1]
        local = _local_coeffs(F.coeffs[i], lo, hi)
        local[0] -= r
        # flat relative to itself, or varying by less than the tolerance
        if _is_flat(local) or np.abs(local[1:]).sum() <= value_tol:
            v = local[0]
            target = zero if abs(v) <= value_tol else (minus if v < 0 else plus)
            target.append((lo, hi))
            continue
        t = _real_roots_unit(local)
        pts = np.concatenate([[-1.0], t, [1.0]])
        for ta, tb in zip(pts[:-1], pts[1:]):
            if tb <= ta:
                continue
            v = npoly.polyval(0.5 * (ta + tb), local)
            a = 0.5 * (lo + hi) + 0.5 * (hi - lo) * ta
            b = 0.5 * (lo + hi) + 0.5 * (hi - lo) * tb
            if v < 0:
                minus.append((a, b))
            else:
                plus.append((a, b))
        for tt in t:
            x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * tt
            zero.append((x, x))
    # the degenerate root points must not swallow neighbouring open sets
    return IntervalSet(minus), IntervalSet(plus), IntervalSet(zero)


def sublevel_measure(F: PiecewisePoly, r: float, strict: bool = True) -> float:
    """mu{F < r} (strict) or mu{F <= r}."""
    o_minus, _, o_zero = level_sets(F, r)
    return o_minus.measure if strict else o_minus.measure + o_zero.measure


def integrate_product(f: PiecewisePoly, w: PiecewisePoly) -> float:
    """Exact integral of f*w over the common domain."""
    f._same_domain(w)
    return (f * w).integral()


def maximum(f: PiecewisePoly, g) -> PiecewisePoly:
    """Pointwise maximum, split exactly at crossing points."""
    if not isinstance(g, PiecewisePoly):
        g = PiecewisePoly.constant(float(g), f.lo, f.hi)
    d = f - g
    cuts = d.roots(0.0)
    d = d.refine(cuts)
    a = f._resample(d.breaks)
    b = g._resample(d.breaks)
    mids = 0.5 * (d.breaks[:-1] + d.breaks[1:])
    use_f = d(mids) >= 0
    w = max(a.coeffs.shape[1], b.coeffs.shape[1])
    rows = []
    for i in range(d.n_pieces):
        row = np.zeros(w)
        src = a.coeffs[i] if use_f[i] else b.coeffs[i]
        row[: len(src)] = src
        rows.append(row)
    return PiecewisePoly(d.breaks, rows)


def positive_part(f: PiecewisePoly) -> PiecewisePoly:
    return maximum(f, 0.0)
