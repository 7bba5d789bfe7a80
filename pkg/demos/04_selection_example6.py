"""Which maximizer does the limit pick?

In Example 6 (n = 2, zero load) every 1-Lipschitz function above the
obstacle is a maximizer of the limiting problem.  The p-solutions converge
to one particular member, U, and stay away from the competitor v*.  The
script writes an SVG of the profiles to out/example6.svg.

    python demos/04_selection_example6.py
"""
from pathlib import Path

import numpy as np

from plap_limit import oracles
from plap_limit.cli import SVG_COLORS, svg_plot
from plap_limit.oracles import ExampleId
from plap_limit.psolver import solve_sweep
from plap_limit.radial import reduce

PS = (10, 20, 40, 80)
spec = reduce(oracles.example_problem(ExampleId(6, PS[0])))
sols = solve_sweep(spec, PS, n_nodes=4001)
x = sols[0].x
U = oracles.closed_form_limit(6, x)
v = oracles.ex6_second_maximizer(x)

print(f"{'p':>4} {'sup|u_p - U|':>14} {'sup|u_p - v*|':>14}")
for p, u in zip(PS, sols):
    print(f"{p:>4} {np.max(np.abs(u.values - U)):14.4f} {np.max(np.abs(u.values - v)):14.4f}")

series = [dict(x=x, y=u.values, label=f"u_p, p={p}", color=SVG_COLORS[i], width=1.0)
          for i, (p, u) in enumerate(zip(PS, sols))]
series += [dict(x=x, y=spec.phi(x), label="obstacle", color="#999999", dash="5,3"),
           dict(x=x, y=v, label="v*", color="#1f77b4", dash="2,2"),
           dict(x=x, y=U, label="U (limit)", color="#d62728", width=2.0)]
out = Path("out")
out.mkdir(exist_ok=True)
(out / "example6.svg").write_text(svg_plot(series, "Example 6: radial profiles"))
print(f"wrote {out / 'example6.svg'}")
