import math

import numpy as np
import pytest

from compstat.errors import PartitionMismatch, SpaceMismatch
from compstat.prob import (
    Dist,
    FiniteSpace,
    Hamiltonian,
    Kernel,
    boltzmann,
    compose_kernels,
    entropy,
    gibbs_free_energy,
    kernel_from_map,
    log_partition,
    product_space,
    proper_kernel_check,
    pushforward,
)

from conftest import random_simplex

B = FiniteSpace(("0", "1"))


def random_kernel(rng, n, m):
    k = rng.random((n, m)) + 0.01
    return Kernel(FiniteSpace.range(n), FiniteSpace.range(m), k / k.sum(axis=1, keepdims=True))


def test_compose_examples():
    k1 = Kernel(B, B, [[0.3, 0.7], [0.6, 0.4]])
    assert np.allclose(compose_kernels(Kernel.identity(B), k1).k, k1.k)
    assert np.allclose(compose_kernels(Kernel(B, B, [[0.5, 0.5]] * 2), Kernel.identity(B)).k, 0.5)
    out = compose_kernels(Kernel(B, B, [[1, 0], [0.5, 0.5]]), Kernel(B, B, [[0, 1], [1, 0]]))
    assert np.allclose(out.k, [[0, 1], [0.5, 0.5]])


def test_compose_space_mismatch():
    with pytest.raises(SpaceMismatch):
        compose_kernels(Kernel.identity(B), Kernel.identity(FiniteSpace.range(3)))


def test_kernel_rows_checked():
    with pytest.raises(ValueError):
        Kernel(B, B, [[0.5, 0.6], [1, 0]])
    assert np.allclose(Kernel(B, B, [[0.5, 0.5 + 1e-10], [1, 0]]).renormalized().k.sum(axis=1), 1)


def test_kernel_from_map():
    assert np.array_equal(kernel_from_map(B, B, lambda o: o).k, np.eye(2))
    assert np.array_equal(kernel_from_map(B, B, lambda o: "0").k, [[1, 0], [1, 0]])
    pairs = product_space(B, B)
    k = kernel_from_map(pairs, B, lambda o: o.split(",")[0])
    assert np.array_equal(k.k, [[1, 0], [1, 0], [0, 1], [0, 1]])


def test_pushforward_examples():
    d = Dist(B, [0.25, 0.75])
    assert np.allclose(pushforward(Kernel.identity(B), d).p, d.p)
    assert np.allclose(pushforward(Kernel(B, B, [[1, 0], [0.5, 0.5]]), d).p, [0.625, 0.375])
    u = Dist.uniform(product_space(B, B))
    assert np.allclose(pushforward([0, 0, 1, 1], u, B).p, [0.5, 0.5])
    with pytest.raises(SpaceMismatch):
        pushforward(Kernel.identity(FiniteSpace.range(3)), d)


def test_kernel_laws(rng):
    for _ in range(20):
        k, k1, k2 = random_kernel(rng, 3, 4), random_kernel(rng, 4, 2), random_kernel(rng, 2, 5)
        left = compose_kernels(compose_kernels(k, k1), k2).k
        right = compose_kernels(k, compose_kernels(k1, k2)).k
        assert np.abs(left - right).max() < 1e-12
        d = Dist(k.source, random_simplex(rng, 3))
        a = pushforward(compose_kernels(k, k1), d).p
        b = pushforward(k1, pushforward(k, d)).p
        assert np.abs(a - b).max() < 1e-12


def test_proper_kernel_check():
    assert proper_kernel_check(Kernel.identity(B), [["0"], ["1"]])
    spread = Kernel(B, FiniteSpace.range(4), [[0.5, 0, 0.5, 0], [0, 0.5, 0, 0.5]])
    assert not proper_kernel_check(spread, [["0", "1"], ["2", "3"]])
    with pytest.raises(PartitionMismatch):
        proper_kernel_check(spread, [["0", "1"], ["2"]])


def test_entropy_examples():
    assert entropy(Dist.point_mass(B, "0")) == 0.0
    assert entropy(Dist.uniform(FiniteSpace.range(4))) == pytest.approx(1.386294, abs=1e-6)
    assert entropy(np.array([2 / 3, 1 / 3])) == pytest.approx(0.636514, abs=1e-6)


def test_entropy_concave(rng):
    for _ in range(50):
        p, q, lam = random_simplex(rng, 5, 0), random_simplex(rng, 5, 0), rng.random()
        assert entropy(lam * p + (1 - lam) * q) >= lam * entropy(p) + (1 - lam) * entropy(q) - 1e-12


def test_boltzmann_examples():
    assert np.allclose(boltzmann(Hamiltonian(B, [0, 0])).p, [0.5, 0.5])
    assert np.allclose(boltzmann(Hamiltonian(B, [0, math.log(2)])).p, [2 / 3, 1 / 3])
    assert np.allclose(boltzmann(Hamiltonian(B, [3, -7], beta=0)).p, [0.5, 0.5])
    # large beta stays finite
    p = boltzmann(Hamiltonian(FiniteSpace.range(3), [0, 100, 200], beta=20)).p
    assert p[0] == pytest.approx(1.0) and np.isfinite(p).all()


def test_free_energy_examples():
    h = Hamiltonian(B, [0, 0])
    assert gibbs_free_energy(Dist(B, [0.5, 0.5]), h) == pytest.approx(-math.log(2), abs=1e-12)
    assert log_partition(h) == pytest.approx(-math.log(2), abs=1e-12)
    assert gibbs_free_energy(Dist(B, [1, 0]), h) == 0.0
    assert log_partition(Hamiltonian(B, [0, math.log(2)])) == pytest.approx(-0.405465, abs=1e-6)


def test_maxent_variational_principle(rng):
    for _ in range(100):
        n = int(rng.integers(1, 9))
        h = Hamiltonian(FiniteSpace.range(n), rng.normal(size=n) * 2, beta=float(rng.uniform(0.1, 3)))
        lz = log_partition(h)
        assert gibbs_free_energy(boltzmann(h), h) == pytest.approx(lz, abs=1e-10)
        for _ in range(5):
            q = Dist(h.space, random_simplex(rng, n, 0.0))
            assert gibbs_free_energy(q, h) >= lz - 1e-12


def test_dist_validation():
    with pytest.raises(ValueError):
        Dist(B, [0.6, 0.6])
    with pytest.raises(SpaceMismatch):
        Dist(B, [1.0])
    assert product_space().outcomes == ("*",)
