"""Gibbs sets of projective specifications: a simplex over the minimum,
or nothing at all when there is no minimum to carry it."""
import numpy as np

from compstat.corpus import BIT
from compstat.gibbs import solve_gibbs
from compstat.oracle import brute_force_sections
from compstat.prob import FiniteSpace
from compstat.spec import independent_glue, projective_spec_chain, projective_spec_V

# %% Chain a0 <= a1 with G(a1) = X x Y and F(.|x) = delta_x (x) q.
q = np.array([0.25, 0.75])
spec = projective_spec_chain(FiniteSpace.range(3), BIT, q)
rep = solve_gibbs(spec)
print(f"chain: dimension {rep.affine_dimension}, exact arithmetic {rep.exact}")
for v in rep.vertices_exact:
    print("  vertex", [str(t) for t in v])

# %% The V b <= a >= c with glue that contradicts itself: empty, with a proof.
V = projective_spec_V(BIT, BIT)
rep = solve_gibbs(V)
print(f"V: feasible={rep.feasible}, certificate valid={rep.verify_certificate()}")
print("  certificate z =", np.round(rep.certificate, 4))
print("  A^T z >= 0:", bool((rep.polytope.A.T @ rep.certificate >= -1e-12).all()), " b.z =", rep.polytope.rhs @ rep.certificate)

# %% A grid search at resolution 64 agrees.
print("grid points on the contradictory V:", len(brute_force_sections(V, 64)))
ind = projective_spec_V(BIT, BIT, *independent_glue(BIT, BIT))
print("independent glue: Gibbs set is a point:", solve_gibbs(ind).affine_dimension == 0)
print("grid points near it:", len(brute_force_sections(ind, 64)))
