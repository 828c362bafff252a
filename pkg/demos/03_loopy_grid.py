"""On a loop GBP still lands on a critical point of the Bethe functional,
but its beliefs are no longer the true marginals."""
import numpy as np

from compstat.corpus import load_example
from compstat.free_energy import criticality_report
from compstat.gbp import GbpOptions, run_gbp
from compstat.oracle import JointModel, exact_log_partition, exact_marginals

doc = load_example("grid2x2")
model, H = doc.model, doc.hamiltonians
res = run_gbp(model, H, GbpOptions())
print(f"converged={res.converged} after {res.iterations} sweeps")
print(f"criticality residual {res.criticality:.1e}")

joint = JointModel.from_region_model(model, doc.terms, H.beta)
exact = exact_marginals(joint, model.regions)
for a in ("p", "p-q"):
    print(a, "GBP", np.round(res.beliefs[a], 5), "exact", np.round(exact[a], 5))
print(f"F_Bethe {res.free_energy:.6f} vs -ln Z {exact_log_partition(joint):.6f}")

# %% Nudge one belief: the family leaves the constraint set and the residual jumps.
Q = {a: v.copy() for a, v in res.beliefs.items()}
Q["p"][0] *= 1.1
Q["p"] /= Q["p"].sum()
print(f"perturbed residual {criticality_report(model, Q, H).residual:.1e}")

# %% The last few rows of the trace: (sweep, change, F_Bethe).
for row in res.trace[-3:]:
    print(row)
