import numpy as np
import pytest

from compstat.errors import PositivityRequired
from compstat.gibbs import solve_gibbs
from compstat.poset import build_poset
from compstat.prob import FiniteSpace
from compstat.spec import (
    ASpecification,
    conditional_spec_from_joint,
    identity_spec,
    marginal_family,
    projective_spec_chain,
)
from compstat.tail import (
    enumerate_lim_sigma,
    invariant_observables,
    is_event_section,
    lim_i_subset_lim_pi_check,
    support_section,
    zero_one_extremality_test,
)

from conftest import random_simplex

B = FiniteSpace(("0", "1"))


def chain2():
    return identity_spec(build_poset(["a", "b"], [("a", "b")]), B)


def keys(sections, order):
    return {A.key(order) for A in sections}


def test_identity_chain_four_sections():
    secs = enumerate_lim_sigma(chain2())
    assert keys(secs, ["a", "b"]) == {((), ()), ((0,), (0,)), ((1,), (1,)), ((0, 1), (0, 1))}


def test_two_to_one_chain_sections_are_pullbacks():
    P = build_poset(["a", "b"], [("a", "b")])
    g = np.array([0, 0, 1, 1])
    F = np.array([[0.5, 0.5, 0, 0], [0, 0, 0.5, 0.5]])
    spec = ASpecification(P, {"a": B, "b": FiniteSpace.range(4)}, {("a", "b"): g}, F={("a", "b"): F})
    got = keys(enumerate_lim_sigma(spec), ["a", "b"])
    assert got == {((), ()), ((0,), (0, 1)), ((1,), (2, 3)), ((0, 1), (0, 1, 2, 3))}


def test_complement_closure_and_event_property():
    spec = conditional_spec_from_joint(np.arange(1, 9) / 36, {v: B for v in "xyz"},
                                       {"x": ["x"], "z": ["z"], "xy": ["x", "y"], "xz": ["x", "z"], "xyz": ["x", "y", "z"]})
    secs = enumerate_lim_sigma(spec)
    ks = keys(secs, spec.elements)
    for A in secs:
        assert is_event_section(spec, A.sets)
        assert A.complement().key(spec.elements) in ks
    full = tuple(tuple(range(spec.size(a))) for a in spec.elements)
    assert full in ks and tuple(() for _ in spec.elements) in ks


def test_non_surjective_leg_branches():
    # G(a) has an outcome outside the image of the leg: both choices are sections
    P = build_poset(["a", "b"], [("a", "b")])
    spec = ASpecification(P, {"a": FiniteSpace.range(3), "b": B}, {("a", "b"): np.array([0, 1])},
                          F={("a", "b"): np.array([[1.0, 0], [0, 1.0], [0.5, 0.5]])})
    assert len(enumerate_lim_sigma(spec)) == 8


def test_invariant_observables_dimensions():
    assert invariant_observables(chain2()).dimension == 2
    spec = conditional_spec_from_joint(np.full(4, 0.25), {"x": B, "y": B}, {"o": [], "x": ["x"], "xy": ["x", "y"]})
    assert invariant_observables(spec).dimension == 1
    # indicators of event sections lie in lim i
    basis = invariant_observables(chain2())
    for A in enumerate_lim_sigma(chain2()):
        assert basis.contains({a: A.sets[a].astype(float) for a in ("a", "b")})


def test_lim_i_inside_lim_pi(rng):
    assert lim_i_subset_lim_pi_check(chain2())
    assert lim_i_subset_lim_pi_check(projective_spec_chain(B, B, [0.3, 0.7]))
    for _ in range(10):
        p = random_simplex(rng, 8)
        spec = conditional_spec_from_joint(p, {v: B for v in "xyz"}, {"x": ["x"], "xy": ["x", "y"], "xyz": ["x", "y", "z"]})
        assert lim_i_subset_lim_pi_check(spec)


def test_support_sections():
    spec = chain2()
    assert support_section(spec, {"a": np.array([0.5, 0.5]), "b": np.array([0.5, 0.5])}).key(["a", "b"]) == ((0, 1), (0, 1))
    assert support_section(spec, {"a": np.array([1.0, 0]), "b": np.array([1.0, 0])}).key(["a", "b"]) == ((0,), (0,))
    pc = projective_spec_chain(B, B, [0.3, 0.7])
    mu = {"a0": np.array([0, 1.0]), "a1": np.array([0, 0, 0.3, 0.7])}
    S = support_section(pc, mu)
    assert S.key(["a0", "a1"]) == ((1,), (2, 3)) and is_event_section(pc, S.sets)


def test_support_requires_positivity():
    P = build_poset(["a", "b"], [("a", "b")])
    spec = ASpecification(P, {"a": B, "b": FiniteSpace.range(4)}, {("a", "b"): np.array([0, 0, 1, 1])},
                          F={("a", "b"): np.array([[1.0, 0, 0, 0], [0, 0, 0.5, 0.5]])})
    assert not spec.strictly_positive()
    with pytest.raises(PositivityRequired):
        support_section(spec, {"a": np.array([1.0, 0]), "b": np.array([1.0, 0, 0, 0])})
    with pytest.raises(PositivityRequired):
        zero_one_extremality_test(spec, {"a": np.array([1.0, 0]), "b": np.array([1.0, 0, 0, 0])}, strict=True)
    assert zero_one_extremality_test(spec, {"a": np.array([1.0, 0]), "b": np.array([1.0, 0, 0, 0])}).heuristic


def test_extremality_examples():
    spec = chain2()
    d0 = {"a": np.array([1.0, 0]), "b": np.array([1.0, 0])}
    r = zero_one_extremality_test(spec, d0)
    assert r.extreme and not r.heuristic
    u = {"a": np.array([0.5, 0.5]), "b": np.array([0.5, 0.5])}
    r = zero_one_extremality_test(spec, u)
    assert not r.extreme
    assert r.witness.key(["a", "b"]) in {((0,), (0,)), ((1,), (1,))}
    assert r.weight == pytest.approx(0.5)
    inside, outside = r.parts
    assert {tuple(inside["a"]), tuple(outside["a"])} == {(1.0, 0.0), (0.0, 1.0)}
    for a in spec.elements:
        assert np.allclose(r.weight * inside[a] + (1 - r.weight) * outside[a], u[a])


def test_component_remark_equal_weights():
    spec = conditional_spec_from_joint(np.arange(1, 9) / 36, {v: B for v in "xyz"},
                                       {"x": ["x"], "xy": ["x", "y"], "xyz": ["x", "y", "z"]})
    rep = solve_gibbs(spec)
    mid = {a: 0.5 * (rep.vertices[0][a] + rep.vertices[1][a]) for a in spec.elements}
    for A in enumerate_lim_sigma(spec):
        w = [float(mid[a][A.sets[a]].sum()) for a in spec.elements]
        assert max(w) - min(w) < 1e-12


def test_restriction_determinacy(rng):
    spec = projective_spec_chain(B, FiniteSpace.range(3), [0.2, 0.3, 0.5])
    basis = invariant_observables(spec)
    for _ in range(10):
        p = random_simplex(rng, 2)
        mu = {"a0": p, "a1": spec.forward("a0", "a1", p)}
        # the lim i observables at a0 recover p, hence the whole section
        fam = [basis.family(k) for k in range(basis.dimension)]
        vals = np.array([mu["a0"] @ f["a0"] for f in fam])
        M = np.array([f["a0"] for f in fam])
        rec = np.linalg.lstsq(M, vals, rcond=None)[0]
        assert np.abs(rec - p).max() < 1e-8
        assert np.abs(spec.forward("a0", "a1", rec) - mu["a1"]).max() < 1e-8
