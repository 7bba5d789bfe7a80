"""Estimating the limiting coincidence set from finite p.

The contact set of u_p moves with p.  Its free endpoints are located to
sub-cell accuracy at every p and then extrapolated to p = infinity.

    python demos/03_coincidence_sets.py
"""
from plap_limit import oracles
from plap_limit.oracles import ExampleId
from plap_limit.psolver import gamma_infty_estimate
from plap_limit.radial import RadialSpec, reduce

PS = (10, 20, 40, 80)
N = 2001

for ex in range(1, 8):
    specs = []
    for p in PS:
        prob = oracles.example_problem(ExampleId(ex, p))
        specs.append(reduce(prob) if isinstance(prob, RadialSpec) else prob)
    est = gamma_infty_estimate(specs, n_nodes=N)
    cell = (specs[0].b - specs[0].a) / (N - 1)
    true = oracles.example_gamma_infty(ex)
    print(f"example {ex}")
    for p, S in zip(PS, est.sets):
        print(f"  p={p:<3} contact {S}")
    err = max(abs(a - b) for g, t in zip(est.limit, true) for a, b in zip(g, t)) / cell
    print(f"  extrapolated {est.limit}  exact {true}  ({err:.2f} cells, "
          f"sets nest consistently: {est.lambda_ok})")
