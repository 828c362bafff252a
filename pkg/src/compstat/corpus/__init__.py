"""Shipped example specifications.

The JSON files next to this module are generated by :func:`write_corpus`
from the builders below; ``load_example(name)`` reads them back.
"""
from __future__ import annotations

from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from ..fileio import SpecDocument, dumps_spec, load_spec
from ..free_energy import HamiltonianFamily
from ..poset import build_poset, graph_poset
from ..prob import FiniteSpace
from ..spec import (
    conditional_spec_from_joint,
    contradictory_glue,
    identity_spec,
    marginalization_model,
    projective_spec_chain,
    projective_spec_V,
)

SPIN = FiniteSpace(("-1", "+1"))
BIT = FiniteSpace(("0", "1"))


def ising_region_model(vertices, edges, J, h, beta: float = 1.0):
    """Vertex–edge region model of a binary Ising model.

    Energy ``-sum_e J_e s_u s_v - sum_v h_v s_v``; the edge terms live on the
    edge regions and the field terms on the vertex regions.  Returns the
    model, its :class:`HamiltonianFamily` and the local terms.
    """
    variables = {v: SPIN for v in vertices}
    regions = {v: [v] for v in vertices}
    for u, w in edges:
        regions[f"{u}-{w}"] = [u, w]
    model = marginalization_model(variables, regions, graph_poset(vertices, edges))
    s = np.array([-1.0, 1.0])
    terms = {v: -float(h[i]) * s for i, v in enumerate(vertices)}
    for k, (u, w) in enumerate(edges):
        t = -float(J[k]) * np.outer(s, s)
        # region variables follow the vertex order
        if list(vertices).index(u) > list(vertices).index(w):
            t = t.T
        terms[f"{u}-{w}"] = t.ravel()
    return model, HamiltonianFamily.from_local_terms(model, terms, beta), terms


def identity_chain() -> SpecDocument:
    spec = identity_spec(build_poset(["a0", "a1"], [("a0", "a1")]), BIT)
    return SpecDocument(spec, name="identity-chain", description="two-element chain, identity legs on {0,1}")


def projective_chain() -> SpecDocument:
    spec = projective_spec_chain(BIT, FiniteSpace(("u", "v")), [0.25, 0.75])
    return SpecDocument(
        spec,
        name="projective-chain",
        description="a0 <= a1, G(a1) = X x Y, F(.|x) = delta_x (x) q with q = (1/4, 3/4)",
    )


def projective_v() -> SpecDocument:
    spec = projective_spec_V(BIT, BIT, *contradictory_glue(BIT, BIT))
    return SpecDocument(
        spec,
        name="projective-V",
        description="b <= a >= c with contradictory glue; no minimum, empty Gibbs set",
    )


def diamond() -> SpecDocument:
    joint = np.array([Fraction(1, 10), Fraction(2, 10), Fraction(3, 10), Fraction(4, 10)], dtype=float)
    poset = build_poset(["o", "x", "y", "xy"], [("o", "x"), ("o", "y"), ("x", "xy"), ("y", "xy")])
    spec = conditional_spec_from_joint(joint, {"x": BIT, "y": BIT}, {"o": [], "x": ["x"], "y": ["y"], "xy": ["x", "y"]}, poset)
    return SpecDocument(
        spec,
        name="diamond",
        description="conditionals of the joint (1,2,3,4)/10 on the diamond {} < {x},{y} < {x,y}",
    )


def _ising_doc(name, description, vertices, edges, J, h, beta) -> SpecDocument:
    model, H, terms = ising_region_model(vertices, edges, J, h, beta)
    return SpecDocument(model, H, terms, "local", name, description)


def ising_chain3() -> SpecDocument:
    return _ising_doc("ising-chain-3", "3-spin open chain, couplings +1/-1, beta 0.5",
                      ["x", "y", "z"], [("x", "y"), ("y", "z")], [1, -1], [0.2, -0.1, 0.3], 0.5)


def star() -> SpecDocument:
    return _ising_doc("star", "star graph with centre c and three leaves, beta 1",
                      ["c", "l1", "l2", "l3"], [("c", "l1"), ("c", "l2"), ("c", "l3")],
                      [1, 0.5, -0.75], [0.1, 0, -0.2, 0.3], 1.0)


def grid2x2() -> SpecDocument:
    return _ising_doc("grid-2x2", "2x2 grid (a 4-cycle), loopy, beta 0.5",
                      ["p", "q", "r", "s"], [("p", "q"), ("q", "s"), ("r", "s"), ("p", "r")],
                      [1, 1, 1, 1], [0.1, 0.1, 0.1, 0.1], 0.5)


BUILDERS = {
    "identity_chain": identity_chain,
    "projective_chain": projective_chain,
    "projective_v": projective_v,
    "diamond": diamond,
    "ising_chain3": ising_chain3,
    "star": star,
    "grid2x2": grid2x2,
}


def example_path(name: str) -> Path:
    return Path(str(resources.files(__name__).joinpath(f"{name}.json")))


def load_example(name: str) -> SpecDocument:
    return load_spec(example_path(name))


def write_corpus(directory=None) -> list[Path]:
    directory = Path(directory) if directory is not None else Path(__file__).parent
    out = []
    for name, build in BUILDERS.items():
        p = directory / f"{name}.json"
        p.write_text(dumps_spec(build()), encoding="utf-8")
        out.append(p)
    return out
