"""Brute-force reference computations.

Everything here is deliberately naive and shares no numerics with the
solvers: joints are enumerated configuration by configuration, sections are
found by grid search, gradients by central differences.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import TooLarge

MAX_CONFIGURATIONS = 2**20
MAX_GRID_DIMENSIONS = 6
MAX_GRID_POINTS = 5_000_000


@dataclass
class JointModel:
    """A product space with a global energy ``sum_a h_a(x restricted to a)``.

    ``sizes`` maps variable -> number of outcomes; ``factors`` maps a factor
    name to ``(variables, table)`` with the table flattened row-major over
    the listed variables.
    """

    sizes: dict
    factors: dict = field(default_factory=dict)
    beta: float = 1.0

    def __post_init__(self):
        self.sizes = {v: int(n) for v, n in self.sizes.items()}
        fixed = {}
        for name, (vs, table) in self.factors.items():
            vs = tuple(vs)
            t = np.asarray(table, dtype=float).reshape(-1)
            need = math.prod(self.sizes[v] for v in vs)
            if t.size != need:
                raise ValueError(f"factor {name!r} has {t.size} entries, expected {need}")
            fixed[name] = (vs, t)
        self.factors = fixed

    @property
    def n_configurations(self) -> int:
        return math.prod(self.sizes.values())

    @classmethod
    def from_region_model(cls, model, terms: Mapping, beta: float = 1.0) -> "JointModel":
        """Joint model of a marginalization region model with local terms per region."""
        sizes = {v: len(s) for v, s in model.variables.items()}
        factors = {a: (model.regions[a], terms[a]) for a in model.elements if a in terms}
        return cls(sizes, factors, beta)

    def configurations(self):
        return itertools.product(*(range(n) for n in self.sizes.values()))

    def energy(self, config) -> float:
        where = dict(zip(self.sizes, config))
        e = 0.0
        for vs, t in self.factors.values():
            idx = 0
            for v in vs:
                idx = idx * self.sizes[v] + where[v]
            e += t[idx]
        return e


def _check_size(model: JointModel):
    if model.n_configurations > MAX_CONFIGURATIONS:
        raise TooLarge(f"{model.n_configurations} configurations exceed 2^20")


def _log_weights(model: JointModel) -> list[float]:
    _check_size(model)
    return [-model.beta * model.energy(c) for c in model.configurations()]


def _logsumexp(xs) -> float:
    m = max(xs)
    return m + math.log(math.fsum(math.exp(x - m) for x in xs))


def exact_log_partition(model: JointModel) -> float:
    """``-ln Z`` by full enumeration."""
    return -_logsumexp(_log_weights(model))


def exact_joint(model: JointModel) -> np.ndarray:
    lw = _log_weights(model)
    lz = _logsumexp(lw)
    return np.array([math.exp(x - lz) for x in lw])


def exact_marginals(model: JointModel, regions: Mapping) -> dict:
    """Boltzmann joint pushed forward to each region (variables listed in
    region order, flattened row-major)."""
    p = exact_joint(model)
    names = list(model.sizes)
    out = {}
    for a, vs in regions.items():
        vs = tuple(vs)
        m = np.zeros(math.prod(model.sizes[v] for v in vs))
        for w, c in zip(p, model.configurations()):
            idx = 0
            for v in vs:
                idx = idx * model.sizes[v] + c[names.index(v)]
            m[idx] += w
        out[a] = m
    return out


# -- grid search for sections ---------------------------------------------


def _simplex_grid(n: int, res: int):
    """Integer vectors of length ``n`` with entries >= 0 summing to ``res``."""
    if n == 1:
        yield (res,)
        return
    for k in range(res + 1):
        for rest in _simplex_grid(n - 1, res - k):
            yield (k,) + rest


def _near_grid(target: np.ndarray, res: int, radius: int):
    """Grid points of the simplex within ``radius / res`` of ``target`` in sup-norm."""
    centre = np.rint(target * res).astype(int)
    ranges = [range(max(0, c - radius), min(res, c + radius) + 1) for c in centre]
    for pt in itertools.product(*ranges[:-1]):
        last = res - sum(pt)
        if last in ranges[-1]:
            v = np.array(pt + (last,)) / res
            if np.abs(v - target).max() <= radius / res + 1e-12:
                yield v


def brute_force_sections(spec, resolution: int = 64) -> list[dict]:
    """Grid points (denominator ``resolution``) whose section residual
    ``max |F^T p_b - p_a|`` is at most ``2 / resolution``.

    Elements are assigned bottom-up.  A minimal element ranges over its full
    simplex grid; any other element only over grid points near the image of
    an already assigned lower element, which is exactly where admissible
    points can lie.
    """
    res = int(resolution)
    tol = 2.0 / res
    elements = list(spec.elements)
    dims = sum(len(spec.spaces[a]) - 1 for a in elements)
    if dims > MAX_GRID_DIMENSIONS:
        raise TooLarge(f"{dims} grid dimensions exceed {MAX_GRID_DIMENSIONS}")
    below = {a: [b for b in elements if b != a and (b, a) in spec.F] for a in elements}
    order = []
    while len(order) < len(elements):
        for a in elements:
            if a not in order and all(b in order for b in below[a]):
                order.append(a)
    free = [a for a in order if not below[a]]
    budget = 1
    for a in free:
        budget *= math.comb(res + len(spec.spaces[a]) - 1, len(spec.spaces[a]) - 1)
    if budget > MAX_GRID_POINTS:
        raise TooLarge(f"{budget} grid points on minimal elements")
    F = {k: np.asarray(v, dtype=float) for k, v in spec.F.items()}

    found = []

    def ok(assigned, a):
        for b in below[a]:
            if np.abs(F[(b, a)].T @ assigned[b] - assigned[a]).max() > tol + 1e-12:
                return False
        return True

    def go(i, assigned):
        if i == len(order):
            found.append(dict(assigned))
            return
        a = order[i]
        if below[a]:
            cands = _near_grid(F[(below[a][0], a)].T @ assigned[below[a][0]], res, 2)
        else:
            cands = (np.array(pt) / res for pt in _simplex_grid(len(spec.spaces[a]), res))
        for v in cands:
            assigned[a] = v
            if ok(assigned, a):
                go(i + 1, assigned)
        assigned.pop(a, None)

    go(0, {})
    return found


# -- finite differences -----------------------------------------------------


def finite_diff_gradient(functional: Callable, Q, step: float = 1e-6):
    """Central differences per coordinate.  ``Q`` is an array or a mapping of
    arrays; the gradient has the same shape."""
    if isinstance(Q, Mapping):
        keys = list(Q)
        flat = np.concatenate([np.asarray(Q[k], dtype=float).ravel() for k in keys])
        cuts = np.cumsum([0] + [np.size(Q[k]) for k in keys])

        def unpack(x):
            return {k: x[cuts[i] : cuts[i + 1]].copy() for i, k in enumerate(keys)}

        g = _central(lambda x: functional(unpack(x)), flat, step)
        return unpack(g)
    x = np.asarray(Q, dtype=float)
    return _central(lambda y: functional(y.reshape(x.shape)), x.ravel(), step).reshape(x.shape)


def _central(f, x, h):
    g = np.empty_like(x)
    for i in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2 * h)
    return g


# -- transfer matrix cross-check -------------------------------------------


def ising_chain_log_partition(J, h, beta: float) -> float:
    """``-ln Z`` of an open spin chain with energy
    ``-sum J_i s_i s_{i+1} - sum h_i s_i`` via 2x2 transfer matrices."""
    s = np.array([-1.0, 1.0])
    v = np.exp(beta * h[0] * s)
    for i, j in enumerate(J):
        T = np.exp(beta * (j * np.outer(s, s) + h[i + 1] * s[None, :]))
        v = v @ T
    return -math.log(v.sum())
