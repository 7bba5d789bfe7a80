"""Radially symmetric problems on annuli and balls in R^n.

A radial profile u(t), t = |x|, minimizes the weighted 1D energy
int t^{n-1} (|u'|^p / p - g u) dt, so every radial problem is a flat
problem with weight exponent n - 1.  At the centre of a ball the weight
vanishes and the boundary condition is natural.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .limit import LimitFunction, ball_core_limit, radial_limit
from .piecewise import IntervalSet, PiecewisePoly
from .psolver import GridFunction, ProblemSpec

__all__ = ["RadialSpec", "reduce", "ball_core_limit", "radial_limit", "signed_profile",
           "limit_for"]


@dataclass(frozen=True)
class RadialSpec:
    n: int
    r1: float
    r2: float
    g: PiecewisePoly
    Phi: PiecewisePoly | None
    p: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.n}")
        if self.r1 < 0:
            raise ValueError("inner radius must be non-negative")
        if not self.r1 < self.r2:
            raise ValueError(f"degenerate annulus r1={self.r1}, r2={self.r2}")
        if not self.p > 1:
            raise ValueError("p must exceed 1")

    @property
    def is_ball(self) -> bool:
        return self.r1 == 0

    @property
    def alpha(self) -> float:
        return (self.n - 1) / (self.p - 1)

    def with_p(self, p: float) -> "RadialSpec":
        return RadialSpec(self.n, self.r1, self.r2, self.g, self.Phi, float(p))


def reduce(spec: RadialSpec) -> ProblemSpec:
    """Weighted flat problem on (r1, r2); zero-flux at the centre of a ball."""
    left = None if spec.is_ball else 0.0
    return ProblemSpec((spec.r1, spec.r2), spec.g, spec.Phi, (left, 0.0), spec.p,
                       weight_exponent=spec.n - 1)


def limit_for(spec: RadialSpec, gamma: IntervalSet) -> LimitFunction:
    """Radial limit profile for the data of `spec` and a coincidence set."""
    if spec.Phi is None:
        raise ValueError("radial limit needs an obstacle (use a very negative one if inactive)")
    return radial_limit(spec.g, spec.Phi, spec.n, spec.r1, spec.r2, gamma)


def signed_profile(u: GridFunction) -> tuple[np.ndarray, np.ndarray]:
    """Cross-section through the centre: coordinates -t..t with mirrored values."""
    t, v = u.x, u.values
    if t[0] == 0:
        return np.concatenate([-t[:0:-1], t]), np.concatenate([v[:0:-1], v])
    return np.concatenate([-t[::-1], t]), np.concatenate([v[::-1], v])
