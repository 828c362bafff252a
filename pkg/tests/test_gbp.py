import numpy as np
import pytest

from compstat.corpus import ising_region_model, load_example
from compstat.free_energy import HamiltonianFamily
from compstat.gbp import (
    GbpOptions,
    MessageState,
    fixed_point_verify,
    gbp_beliefs,
    gbp_bottom_up,
    gbp_update,
    initial_state,
    run_gbp,
)
from compstat.oracle import JointModel, exact_log_partition, exact_marginals
from compstat.poset import build_poset
from compstat.prob import FiniteSpace
from compstat.spec import identity_spec, marginalization_model

B = FiniteSpace(("0", "1"))


def two_var_chain():
    m = marginalization_model({"x": B, "y": B}, {"x": ["x"], "y": ["y"], "xy": ["x", "y"]})
    terms = {"x": np.array([0.0, 1.0]), "y": np.array([0.5, 0.0]), "xy": np.array([0.0, 1.0, 1.0, 0.0])}
    return m, HamiltonianFamily.from_local_terms(m, terms, 1.0)


def test_bottom_up_empty_products():
    m, H = two_var_chain()
    n = gbp_bottom_up(m, initial_state(m))
    # nothing sits above xy, so every message into xy is the empty product
    for b in ("x", "y", "xy"):
        assert np.array_equal(n[(b, "xy")], np.zeros(4))
    # n_{x -> x} collects m_{xy -> x}, which starts at 1
    assert np.array_equal(n[("x", "x")], np.zeros(2))


def test_bottom_up_pulls_back_along_g():
    m, H = two_var_chain()
    s = initial_state(m)
    s.log_m[("x", "xy")] = np.array([0.0, -2.0])
    n = gbp_bottom_up(m, s)
    assert np.allclose(n[("x", "x")], [0.0, -2.0])
    P = build_poset(["x", "y", "z", "xy", "yz"], [("x", "xy"), ("y", "xy"), ("y", "yz"), ("z", "yz")])
    m5 = marginalization_model({v: B for v in "xyz"},
                               {"x": ["x"], "y": ["y"], "z": ["z"], "xy": ["x", "y"], "yz": ["y", "z"]}, P)
    s5 = initial_state(m5)
    s5.log_m[("y", "yz")] = np.array([-1.0, 0.0])
    n5 = gbp_bottom_up(m5, s5)
    # y <= xy, yz is not below xy: the message from yz reaches xy through y, pulled back to G(xy)
    assert np.allclose(n5[("y", "xy")], [-1.0, 0.0, -1.0, 0.0])
    assert np.allclose(n5[("y", "yz")], 0.0)


def test_beliefs_with_unit_messages():
    m, H = two_var_chain()
    b = gbp_beliefs(m, initial_state(m), H)
    for a in m.elements:
        w = np.exp(-H.H[a])
        assert np.allclose(b[a], w / w.sum())
    b0 = gbp_beliefs(m, initial_state(m), HamiltonianFamily.zero(m))
    assert all(np.allclose(b0[a], 1 / m.size(a)) for a in m.elements)


def test_one_sweep_by_hand():
    m, H = two_var_chain()
    # region energies: H_x = (0, 1), H_y = (0.5, 0), H_xy = h_xy + h_x + h_y
    Hxy = np.array([[0.5, 1.0], [2.5, 1.0]])
    bxy = np.exp(-Hxy) / np.exp(-Hxy).sum()
    bx = np.exp(-np.array([0.0, 1.0]))
    bx /= bx.sum()
    lam = 0.5
    lm_x = lam * (np.log(bxy.sum(axis=1)) - np.log(bx))
    lm_x -= lm_x.max()
    by = np.exp(-np.array([0.5, 0.0]))
    by /= by.sum()
    lm_y = lam * (np.log(bxy.sum(axis=0)) - np.log(by))
    lm_y -= lm_y.max()
    s, change = gbp_update(m, initial_state(m, GbpOptions(damping=lam)), H)
    assert np.allclose(s.log_m[("x", "xy")], lm_x, atol=1e-14)
    assert np.allclose(s.log_m[("y", "xy")], lm_y, atol=1e-14)
    assert change == pytest.approx(max(np.abs(lm_x).max(), np.abs(lm_y).max()))
    assert s.iteration == 1


def test_undamped_sweep_is_exact_on_one_edge():
    m, H = two_var_chain()
    s, _ = gbp_update(m, initial_state(m, GbpOptions(damping=1.0)), H)
    b = gbp_beliefs(m, s, H)
    assert np.allclose(b["x"], m.push("x", "xy", b["xy"]), atol=1e-14)


def test_fixed_point_is_stationary():
    m, H = two_var_chain()
    r = run_gbp(m, H, GbpOptions(tol=1e-13))
    _, change = gbp_update(m, r.state, H)
    assert change <= 1e-12


def test_zero_hamiltonian_uniform_messages_fixed():
    m, _, _ = ising_region_model(["a", "b", "c"], [("a", "b"), ("b", "c"), ("a", "c")], [0, 0, 0], [0, 0, 0])
    H0 = HamiltonianFamily.zero(m)
    s, change = gbp_update(m, initial_state(m), H0)
    assert change == 0.0


def test_single_region_one_iteration():
    m = identity_spec(build_poset(["a"]), FiniteSpace.range(3))
    H = HamiltonianFamily(m, {"a": np.array([0.0, 1.0, 2.0])}, 1.0)
    r = run_gbp(m, H)
    w = np.exp(-H.H["a"])
    assert r.converged and r.iterations == 1
    assert np.allclose(r.beliefs["a"], w / w.sum())


def test_three_spin_chain_exact():
    m, H, terms = ising_region_model(["x", "y", "z"], [("x", "y"), ("y", "z")], [1, -1], [0, 0, 0], 0.5)
    r = run_gbp(m, H)
    joint = JointModel.from_region_model(m, terms, 0.5)
    ex = exact_marginals(joint, m.regions)
    assert r.converged
    assert max(np.abs(r.beliefs[a] - ex[a]).max() for a in m.elements) < 1e-7
    assert r.free_energy == pytest.approx(exact_log_partition(joint), abs=1e-6)
    assert r.criticality <= 1e-9


def test_loopy_grid_critical_but_not_exact():
    doc = load_example("grid2x2")
    m, H = doc.model, doc.hamiltonians
    r = run_gbp(m, H)
    assert r.converged and r.criticality <= 1e-9
    ex = exact_marginals(JointModel.from_region_model(m, doc.terms, H.beta), m.regions)
    gap = max(np.abs(r.beliefs[a] - ex[a]).max() for a in m.elements)
    assert gap > 1e-6  # the Bethe approximation is not exact on a loop


def test_scale_invariance_of_initial_messages():
    doc = load_example("star")
    m, H = doc.model, doc.hamiltonians
    s1 = initial_state(m, GbpOptions(init="lognormal", seed=4))
    s2 = s1.copy()
    for k in s2.log_m:
        s2.log_m[k] = s2.log_m[k] + 3.7
    for _ in range(15):
        b1, b2 = gbp_beliefs(m, s1, H), gbp_beliefs(m, s2, H)
        assert max(np.abs(b1[a] - b2[a]).max() for a in m.elements) <= 1e-12
        s1, _ = gbp_update(m, s1, H)
        s2, _ = gbp_update(m, s2, H)


def test_seeded_init_deterministic_and_same_fixed_point():
    doc = load_example("ising_chain3")
    m, H = doc.model, doc.hamiltonians
    a = run_gbp(m, H, GbpOptions(init="lognormal", seed=7))
    b = run_gbp(m, H, GbpOptions(init="lognormal", seed=7))
    c = run_gbp(m, H)
    assert a.trace == b.trace
    assert max(np.abs(a.beliefs[x] - c.beliefs[x]).max() for x in m.elements) < 1e-8


def test_non_convergence_is_flagged():
    doc = load_example("grid2x2")
    r = run_gbp(doc.model, doc.hamiltonians, GbpOptions(max_iters=3))
    assert not r.converged and r.iterations == 3 and len(r.trace) == 3


def test_trace_rows():
    doc = load_example("ising_chain3")
    r = run_gbp(doc.model, doc.hamiltonians)
    its = [t[0] for t in r.trace]
    assert its == list(range(1, r.iterations + 1))
    assert r.trace[-1][1] == r.sup_change and r.trace[-1][2] == pytest.approx(r.free_energy)


def test_fixed_point_verify():
    doc = load_example("ising_chain3")
    m, H = doc.model, doc.hamiltonians
    r = run_gbp(m, H)
    rep = fixed_point_verify(m, H, r.beliefs)
    assert rep.passes(1e-6)
    ex = exact_marginals(JointModel.from_region_model(m, doc.terms, H.beta), m.regions)
    assert fixed_point_verify(m, H, ex).passes(1e-6)
    bad = {a: v.copy() for a, v in r.beliefs.items()}
    bad["x-y"][0] *= 1.1
    bad["x-y"] /= bad["x-y"].sum()
    assert fixed_point_verify(m, H, bad).criticality > 1e-3


def test_specification_mode_reports_section_residual():
    doc = load_example("diamond")
    m = doc.model
    rng = np.random.default_rng(1)
    H = HamiltonianFamily.from_local_terms(m, {a: rng.normal(size=m.size(a)) for a in m.elements}, 1.0)
    r = run_gbp(m, H)
    assert r.converged
    assert r.pushforward_residual <= 1e-9
    assert r.marginal_criticality <= 1e-9
    assert r.section_residual is not None and np.isfinite(r.section_residual)


def test_literal_variant_runs_and_needs_f():
    doc = load_example("diamond")
    H = HamiltonianFamily.zero(doc.model)
    r = run_gbp(doc.model, H, GbpOptions(variant="literal-F", max_iters=50))
    assert all(np.isclose(v.sum(), 1) for v in r.beliefs.values())
    assert r.state.log_m[("o", "xy")].shape == (4,)
    m, H2, _ = ising_region_model(["a", "b"], [("a", "b")], [1], [0, 0])
    with pytest.raises(ValueError):
        run_gbp(m, H2, GbpOptions(variant="literal-F"))


def test_options_validated():
    for bad in ({"tol": 0}, {"max_iters": 0}, {"damping": 0}, {"damping": 1.5}, {"variant": "x"}):
        with pytest.raises(ValueError):
            GbpOptions(**bad)
    assert isinstance(initial_state(two_var_chain()[0]), MessageState)
