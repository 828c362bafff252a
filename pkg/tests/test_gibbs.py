import itertools
import warnings

import numpy as np
import pytest

from compstat.errors import CheckFailed
from compstat.gibbs import assemble_polytope, is_section, projective_classification_check, solve_gibbs
from compstat.oracle import brute_force_sections
from compstat.poset import build_poset
from compstat.prob import FiniteSpace
from compstat.spec import (
    conditional_spec_from_joint,
    disjoint_union,
    identity_spec,
    independent_glue,
    marginal_family,
    projective_spec_chain,
    projective_spec_V,
)

from conftest import random_simplex

B = FiniteSpace(("0", "1"))
T = FiniteSpace(("0", "1", "2"))


def vertex_set(report, order):
    return {tuple(np.round(np.concatenate([v[a] for a in order]), 9)) for v in report.vertices}


def test_assemble_counts():
    P = assemble_polytope(identity_spec(build_poset(["a"]), B))
    assert P.A.shape == (1, 2)
    P = assemble_polytope(projective_spec_chain(B, B, [0.5, 0.5]))
    assert P.n_section_rows == 4 and P.A.shape[0] == 6 and P.n_variables == 6


def test_non_cover_pairs_add_no_rows():
    P3 = build_poset(["a", "b", "c"], [("a", "b"), ("b", "c")])
    poly = assemble_polytope(identity_spec(P3, B))
    assert poly.n_section_rows == 2 * 2


def test_identity_chain():
    spec = identity_spec(build_poset(["a", "b"], [("a", "b")]), B)
    rep = solve_gibbs(spec)
    assert rep.feasible and rep.exact and rep.affine_dimension == 1
    assert vertex_set(rep, ["a", "b"]) == {(1, 0, 1, 0), (0, 1, 0, 1)}


def test_projective_chain_vertices():
    q = np.array([0.25, 0.25, 0.5])
    spec = projective_spec_chain(T, T, q)
    rep = solve_gibbs(spec)
    assert rep.affine_dimension == 2
    want = set()
    for x in range(3):
        d = np.eye(3)[x]
        want.add(tuple(np.round(np.concatenate([d, np.kron(d, q)]), 9)))
    assert vertex_set(rep, ["a0", "a1"]) == want
    assert projective_classification_check(spec, rep)


def test_projective_v_empty_with_certificate():
    spec = projective_spec_V(B, B)
    rep = solve_gibbs(spec)
    assert not rep.feasible and rep.affine_dimension == -1
    assert rep.verify_certificate()
    z = rep.certificate
    P = rep.polytope
    assert (P.A.T @ z >= -1e-12).all() and P.rhs @ z == pytest.approx(-1.0)
    assert projective_classification_check(spec, rep)


def test_independent_v_is_feasible():
    rep = solve_gibbs(projective_spec_V(B, B, *independent_glue(B, B)))
    assert rep.feasible and rep.affine_dimension == 0 and len(rep.vertices) == 1
    assert np.allclose(rep.vertices[0]["a"], 0.25)


def test_two_chains_product_of_simplices():
    spec = disjoint_union(projective_spec_chain(B, B, [0.5, 0.5]), projective_spec_chain(T, B, [0.2, 0.8]))
    rep = solve_gibbs(spec)
    assert rep.affine_dimension == 1 + 2 and len(rep.vertices) == 6
    assert projective_classification_check(spec, rep)


def test_classification_detects_wrong_report():
    spec = projective_spec_chain(B, B, [0.5, 0.5])
    rep = solve_gibbs(spec)
    rep.affine_dimension = 3
    with pytest.raises(CheckFailed, match="dimension"):
        projective_classification_check(spec, rep)
    with pytest.raises(CheckFailed):
        projective_classification_check(identity_spec(build_poset(["a"]), B))


def test_conditional_spec_marginals_feasible(rng):
    regions = {"x": ["x"], "xy": ["x", "y"], "xyz": ["x", "y", "z"]}
    for _ in range(5):
        p = random_simplex(rng, 8)
        spec = conditional_spec_from_joint(p, {"x": B, "y": B, "z": B}, regions)
        rep = solve_gibbs(spec)
        assert not rep.exact  # float conditionals fall back to float arithmetic
        assert rep.affine_dimension == 1
        assert is_section(spec, marginal_family(spec, p))


def test_vertices_feasible_convex_and_coherent():
    specs = [
        identity_spec(build_poset(["a", "b", "c"], [("a", "b"), ("a", "c")]), T),
        projective_spec_chain(T, B, [0.5, 0.5]),
        disjoint_union(identity_spec(build_poset(["a"]), B), projective_spec_chain(B, B, [0.3, 0.7])),
    ]
    for spec in specs:
        rep = solve_gibbs(spec)
        for v in rep.vertices:
            assert is_section(spec, v, 1e-10)
            assert spec.pushforward_residual(v) < 1e-10
        for v, w in itertools.combinations(rep.vertices, 2):
            for lam in (0.25, 0.5, 0.75):
                mix = {a: lam * v[a] + (1 - lam) * w[a] for a in spec.elements}
                assert rep.polytope.residual(spec.flatten(mix)) < 1e-10


def test_exact_and_float_agree():
    spec = projective_spec_chain(T, B, [0.5, 0.5])
    ex, fl = solve_gibbs(spec, exact=True), solve_gibbs(spec, exact=False)
    assert ex.affine_dimension == fl.affine_dimension
    order = spec.elements
    assert vertex_set(ex, order) == vertex_set(fl, order)


def test_exact_mode_unavailable_for_irrational_entries():
    spec = projective_spec_chain(B, B, [1 / 3 + 1e-13, 2 / 3 - 1e-13])
    with pytest.raises(ValueError):
        solve_gibbs(spec, exact=True)


def test_brute_force_agrees_on_small_specs():
    specs = [
        identity_spec(build_poset(["a", "b"], [("a", "b")]), B),
        projective_spec_chain(B, B, [0.25, 0.75]),
        projective_spec_V(B, B),
        projective_spec_V(B, B, *independent_glue(B, B)),
    ]
    for spec in specs:
        rep = solve_gibbs(spec)
        pts = brute_force_sections(spec, 64)
        assert bool(pts) == rep.feasible
        for v in rep.vertices:
            x = spec.flatten(v)
            assert min(np.abs(spec.flatten(p) - x).max() for p in pts) <= 2 / 64


def test_no_rank_warning_on_clean_instances():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        solve_gibbs(projective_spec_chain(T, T, [0.2, 0.3, 0.5]), exact=False)
