"""The discrete solver against the explicit solutions.

First at moderate p, where the closed forms are the reference, then along
the sweep p = 10, 20, 40, 80 where the distance to the limit U must shrink.

    python demos/02_solver_vs_closed_form.py
"""
import time

import numpy as np

from plap_limit import oracles
from plap_limit.oracles import ExampleId
from plap_limit.psolver import obstacle_solve, solve_sweep
from plap_limit.radial import RadialSpec, reduce


def flat(ex: int, p: float):
    prob = oracles.example_problem(ExampleId(ex, p))
    return reduce(prob) if isinstance(prob, RadialSpec) else prob


print("sup |u_h - u_p| on 4001 nodes")
for ex in range(1, 8):
    row = []
    for p in (4, 8):
        t0 = time.perf_counter()
        u = obstacle_solve(flat(ex, p), n_nodes=4001)
        err = np.max(np.abs(u.values - oracles.closed_form_up(ExampleId(ex, p), u.x)))
        row.append(f"p={p}: {err:.1e} ({time.perf_counter() - t0:.2f}s, "
                   f"{u.info.newton_iterations} Newton / {u.info.active_set_iterations} active-set)")
    print(f"  example {ex}: " + "; ".join(row))

print("\nsup |u_p - U| along the sweep (warm-started)")
for ex in range(1, 8):
    sols = solve_sweep(flat(ex, 10), (10, 20, 40, 80), n_nodes=4001)
    U = oracles.closed_form_limit(ex, sols[0].x)
    d = [np.max(np.abs(u.values - U)) for u in sols]
    slopes = [u.max_slope() for u in sols]
    print(f"  example {ex}: " + "  ".join(f"{v:.4f}" for v in d)
          + "   max slope " + " ".join(f"{s:.3f}" for s in slopes))
