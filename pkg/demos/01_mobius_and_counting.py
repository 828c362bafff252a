"""Möbius inversion on a small region poset and the Bethe counting numbers."""
import numpy as np

from compstat.poset import build_poset, graph_poset, mobius_transform, zeta_transform

# %% The diamond: a bottom element, two atoms and a top.
P = build_poset(["o", "x", "y", "xy"], [("o", "x"), ("o", "y"), ("x", "xy"), ("y", "xy")])
print("zeta matrix (rows a, columns b <= a):")
print(P.zeta_matrix)
print("mobius matrix:")
print(P.mobius.mu)
print("Z @ M is the identity:", np.array_equal(P.zeta_matrix @ P.mobius.mu, np.eye(4, dtype=int)))

# %% Zeta sums a function over everything below; Möbius undoes it.
f = np.array([1, 2, 3, 4])
F = zeta_transform(P, f)
print("zeta(f) =", F, " mobius(zeta(f)) =", mobius_transform(P, F))

# %% Counting numbers c(a) = sum_{b >= a} mu(b, a).
# On the vertex-edge poset of a tree, edges get 1 and a vertex of degree d gets 1 - d.
G = graph_poset(["a", "b", "c", "d"], [("a", "b"), ("b", "c"), ("b", "d")])
for e, c in G.counting.as_dict().items():
    print(f"  c({e}) = {c}")
