"""Closed-form solutions and their limits.

Each worked example has an explicit finite-p solution determined by one or
two constants.  This script solves for the constants along p = 8..1024,
shows where they are heading, and measures how fast the explicit u_p
approach the limit U.

    python demos/01_closed_forms.py
"""
import math

import numpy as np

from plap_limit import oracles
from plap_limit.oracles import ExampleId

PS = [8, 16, 32, 64, 128, 256, 512, 1024]
TARGETS = {
    1: ("c_p^(1/(p-1))", lambda k: k.derived["c_beta"], 1.0),
    2: ("(1-c_p)^(1/(p-1))", lambda k: k.derived["one_minus_c_beta"], 0.25),
    4: ("c_p", lambda k: k.c, (3 - math.sqrt(7)) / 2),
    5: ("c_p", lambda k: k.c, 1 / 3),
    6: ("c_p (n=2)", lambda k: k.c, 2 - math.sqrt(3)),
    7: ("h_p (n=2)", lambda k: k.h, 0.5),
}

print("Constants along the p sweep, with their limits")
print(f"{'example':>8} {'quantity':>18} " + " ".join(f"{p:>9}" for p in PS) + "     limit")
for ex, (name, get, lim) in TARGETS.items():
    vals = [get(oracles.solve_constant(ExampleId(ex, p))) for p in PS]
    print(f"{ex:>8} {name:>18} " + " ".join(f"{v:9.6f}" for v in vals) + f"  {lim:8.6f}")

print("\nExample 5 is the slow one: its error shrinks like log(p)/p, so at p = 1024")
k5 = oracles.solve_constant(ExampleId(5, 1024))
print(f"c_p is still {1 / 3 - k5.c:.2e} below 1/3.")

print("\nsup |u_p - U| for the explicit solutions")
print(f"{'example':>8} " + " ".join(f"{p:>8}" for p in (16, 64, 256)))
for ex in range(1, 8):
    lo, hi = oracles.DOMAINS[ex]
    x = np.linspace(lo, hi, 4001)
    U = oracles.closed_form_limit(ex, x)
    d = [np.max(np.abs(oracles.closed_form_up(ExampleId(ex, p), x) - U)) for p in (16, 64, 256)]
    print(f"{ex:>8} " + " ".join(f"{v:8.4f}" for v in d))
