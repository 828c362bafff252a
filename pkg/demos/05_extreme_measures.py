"""Extreme Gibbs measures give every tail event mass 0 or 1."""
import numpy as np

from compstat.corpus import BIT
from compstat.gibbs import solve_gibbs
from compstat.poset import build_poset
from compstat.spec import identity_spec
from compstat.tail import enumerate_lim_sigma, zero_one_extremality_test

spec = identity_spec(build_poset(["a", "b", "c"], [("a", "b"), ("b", "c")]), BIT)
print("event sections:")
for A in enumerate_lim_sigma(spec):
    print("  ", A.labels(spec))

verts = solve_gibbs(spec).vertices
for v in verts:
    print("vertex", {a: v[a].tolist() for a in spec.elements}, "extreme:", zero_one_extremality_test(spec, v).extreme)

mid = {a: 0.5 * (verts[0][a] + verts[1][a]) for a in spec.elements}
r = zero_one_extremality_test(spec, mid)
print("midpoint extreme:", r.extreme)
print("  witness", r.witness.labels(spec), "has mass", r.weight)
print("  splits into", [{a: np.round(p[a], 3).tolist() for a in spec.elements} for p in r.parts])
