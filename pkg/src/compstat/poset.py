"""Finite posets and their incidence algebra (zeta transform, Möbius inversion).

Convention: a pair ``(b, a)`` always means ``b <= a``.  Matrices indexed by
element pairs put the larger element first, so ``zeta[a, b] = 1`` iff
``b <= a`` and ``mu[a, b]`` is the Möbius coefficient of the interval [b, a].
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Sequence

import numpy as np

from .errors import CycleError, DuplicateElement, UnknownElement

Element = Hashable


class FinitePoset:
    """A finite partial order stored as a dense boolean relation matrix.

    ``leq[i, j]`` is True iff ``elements[i] <= elements[j]``.  Instances are
    treated as immutable.
    """

    def __init__(self, elements: Sequence[Element], leq: np.ndarray):
        self.elements = tuple(elements)
        if len(set(self.elements)) != len(self.elements):
            raise DuplicateElement("element ids must be unique")
        leq = np.array(leq, dtype=bool)
        n = len(self.elements)
        if leq.shape != (n, n):
            raise ValueError(f"relation matrix must be {n}x{n}, got {leq.shape}")
        leq.setflags(write=False)
        self.leq = leq
        self._index = {e: i for i, e in enumerate(self.elements)}

    def __repr__(self):
        return f"FinitePoset({list(self.elements)!r}, covers={self.covers()!r})"

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, e):
        return e in self._index

    def __eq__(self, other):
        if not isinstance(other, FinitePoset):
            return NotImplemented
        return self.elements == other.elements and np.array_equal(self.leq, other.leq)

    def __hash__(self):
        return hash((self.elements, self.leq.tobytes()))

    def index(self, e: Element) -> int:
        try:
            return self._index[e]
        except KeyError:
            raise UnknownElement(f"unknown poset element {e!r}") from None

    def le(self, b: Element, a: Element) -> bool:
        """True iff ``b <= a``."""
        return bool(self.leq[self.index(b), self.index(a)])

    def lt(self, b: Element, a: Element) -> bool:
        return b != a and self.le(b, a)

    def below(self, a: Element) -> list[Element]:
        """Elements ``b`` with ``b <= a`` (``a`` included), in stored order."""
        j = self.index(a)
        return [e for i, e in enumerate(self.elements) if self.leq[i, j]]

    def above(self, b: Element) -> list[Element]:
        """Elements ``a`` with ``a >= b`` (``b`` included), in stored order."""
        i = self.index(b)
        return [e for j, e in enumerate(self.elements) if self.leq[i, j]]

    def pairs(self) -> list[tuple[Element, Element]]:
        """All strict pairs ``(b, a)`` with ``b < a``, ordered by (a, b) position
        in the linear extension."""
        order = self.linear_extension()
        pos = {e: k for k, e in enumerate(order)}
        out = [
            (b, a)
            for a in order
            for b in order
            if b != a and self.leq[self.index(b), self.index(a)]
        ]
        out.sort(key=lambda p: (pos[p[1]], pos[p[0]]))
        return out

    def covers(self) -> list[tuple[Element, Element]]:
        """Covering pairs ``(b, a)``: ``b < a`` with nothing strictly between."""
        strict = self.leq & ~np.eye(len(self), dtype=bool)
        # b < c < a exists iff (strict @ strict)[b, a]
        two_step = (strict.astype(np.int64) @ strict.astype(np.int64)) > 0
        cov = strict & ~two_step
        return [(b, a) for (b, a) in self.pairs() if cov[self.index(b), self.index(a)]]

    def linear_extension(self) -> list[Element]:
        """Stable topological order: among available minimal elements the one
        appearing first in ``elements`` is emitted first."""
        n = len(self)
        strict = self.leq & ~np.eye(n, dtype=bool)
        remaining = list(range(n))
        done = np.zeros(n, dtype=bool)
        order = []
        while remaining:
            for k, i in enumerate(remaining):
                preds = np.flatnonzero(strict[:, i])
                if done[preds].all():
                    order.append(i)
                    done[i] = True
                    del remaining[k]
                    break
        return [self.elements[i] for i in order]

    def opposite(self) -> "FinitePoset":
        return FinitePoset(self.elements, self.leq.T)

    def subposet(self, elements: Iterable[Element]) -> "FinitePoset":
        keep = [self.index(e) for e in elements]
        return FinitePoset([self.elements[i] for i in keep], self.leq[np.ix_(keep, keep)])

    # -- incidence algebra -------------------------------------------------

    @cached_property
    def zeta_matrix(self) -> np.ndarray:
        """Integer matrix with ``Z[a, b] = 1`` iff ``b <= a``."""
        z = self.leq.T.astype(np.int64)
        z.setflags(write=False)
        return z

    @cached_property
    def mobius(self) -> "MobiusTable":
        return mobius_table(self)

    @cached_property
    def counting(self) -> "CountingCoefficients":
        return counting_coefficients(self)

    def connected_components(self) -> list[list[Element]]:
        return connected_components(self)

    def minimum_elements(self) -> "MinimumElements":
        return minimum_elements(self)


def build_poset(elements: Sequence[Element], pairs: Iterable[tuple[Element, Element]] = ()) -> FinitePoset:
    """Reflexive-transitive closure of ``pairs`` (each ``(b, a)`` read as ``b <= a``)."""
    elements = list(elements)
    if len(set(elements)) != len(elements):
        seen = set()
        dup = next(e for e in elements if e in seen or seen.add(e))
        raise DuplicateElement(f"duplicate element {dup!r}")
    index = {e: i for i, e in enumerate(elements)}
    n = len(elements)
    rel = np.eye(n, dtype=bool)
    for b, a in pairs:
        if b not in index or a not in index:
            missing = b if b not in index else a
            raise UnknownElement(f"relation references unknown element {missing!r}")
        rel[index[b], index[a]] = True
    for k in range(n):  # Warshall
        rel |= np.outer(rel[:, k], rel[k, :])
    both = rel & rel.T & ~np.eye(n, dtype=bool)
    if both.any():
        i, j = np.argwhere(both)[0]
        raise CycleError(f"{elements[i]!r} <= {elements[j]!r} <= {elements[i]!r} violates antisymmetry")
    return FinitePoset(elements, rel)


def poset_from_subsets(regions: Sequence[Iterable[Hashable]], names: Sequence[Element] | None = None) -> FinitePoset:
    """Poset of subsets ordered by inclusion (``b <= a`` iff ``b ⊆ a``)."""
    sets = [frozenset(r) for r in regions]
    names = list(names) if names is not None else sets
    if len(set(sets)) != len(sets):
        raise DuplicateElement("regions must be distinct subsets")
    n = len(sets)
    rel = np.array([[sets[i] <= sets[j] for j in range(n)] for i in range(n)], dtype=bool)
    return FinitePoset(names, rel)


def zeta_transform(poset: FinitePoset, values) -> np.ndarray:
    """``result[a] = sum_{b <= a} values[b]``; values indexed by stored order.

    Integer and object (Fraction) inputs stay exact.
    """
    v = _as_vector(poset, values)
    return _matvec(poset.zeta_matrix, v)


def mobius_transform(poset: FinitePoset, values) -> np.ndarray:
    """Inverse of :func:`zeta_transform`: ``result[a] = sum_{b <= a} mu(a, b) values[b]``."""
    v = _as_vector(poset, values)
    return _matvec(poset.mobius.mu, v)


def _as_vector(poset, values):
    if isinstance(values, dict):
        values = [values[e] for e in poset.elements]
    v = np.asarray(values)
    if v.shape[0] != len(poset):
        raise ValueError(f"expected {len(poset)} values, got {v.shape[0]}")
    return v


def _matvec(m, v):
    if v.dtype == object:
        return np.array([sum(int(m[i, j]) * v[j] for j in range(len(v)) if m[i, j]) for i in range(len(v))], dtype=object)
    return m @ v


@dataclass(frozen=True)
class MobiusTable:
    """Möbius coefficients ``mu[a, b]`` for ``b <= a``, zero elsewhere (exact ints)."""

    poset: FinitePoset
    mu: np.ndarray = field(repr=False)

    def __getitem__(self, key):
        a, b = key
        return int(self.mu[self.poset.index(a), self.poset.index(b)])

    def check_identities(self) -> bool:
        """Both Rota identities: sums of mu(a, c) and of mu(c, b) over [b, a] give 1[b = a]."""
        P = self.poset.leq.T.astype(np.int64)  # P[a, c] = c <= a
        n = len(self.poset)
        for ia in range(n):
            for ib in range(n):
                if not P[ia, ib]:
                    continue
                interval = P[ia, :] & P[:, ib]  # b <= c <= a
                expected = int(ia == ib)
                if int(self.mu[ia, interval.astype(bool)].sum()) != expected:
                    return False
                if int(self.mu[interval.astype(bool), ib].sum()) != expected:
                    return False
        return True


def mobius_table(poset: FinitePoset) -> MobiusTable:
    """Exact Möbius coefficients by the recursion mu(a,b) = -sum_{b < c <= a} mu(a,c)."""
    n = len(poset)
    order = [poset.index(e) for e in poset.linear_extension()]
    leq = poset.leq
    mu = np.zeros((n, n), dtype=np.int64)
    for ia in order:
        mu[ia, ia] = 1
        # b below a, visited from the top of the interval down
        for ib in reversed(order):
            if ib == ia or not leq[ib, ia]:
                continue
            s = 0
            for ic in range(n):
                if ic != ib and leq[ib, ic] and leq[ic, ia]:
                    s += mu[ia, ic]
            mu[ia, ib] = -s
    mu.setflags(write=False)
    return MobiusTable(poset, mu)


@dataclass(frozen=True)
class CountingCoefficients:
    """Inclusion–exclusion weights ``c(a) = sum_{b >= a} mu(b, a)``."""

    poset: FinitePoset
    c: np.ndarray = field(repr=False)

    def __getitem__(self, a):
        return int(self.c[self.poset.index(a)])

    def as_dict(self):
        return {e: int(x) for e, x in zip(self.poset.elements, self.c)}


def counting_coefficients(poset: FinitePoset) -> CountingCoefficients:
    c = poset.mobius.mu.sum(axis=0)
    c.setflags(write=False)
    return CountingCoefficients(poset, c)


def connected_components(poset: FinitePoset) -> list[list[Element]]:
    """Connected components of the comparability graph, each in stored order,
    components ordered by their first element."""
    n = len(poset)
    comp = poset.leq | poset.leq.T
    label = [-1] * n
    out = []
    for start in range(n):
        if label[start] >= 0:
            continue
        stack, members = [start], []
        label[start] = len(out)
        while stack:
            i = stack.pop()
            members.append(i)
            for j in np.flatnonzero(comp[i]):
                if label[j] < 0:
                    label[j] = len(out)
                    stack.append(j)
        out.append([poset.elements[i] for i in sorted(members)])
    return out


@dataclass(frozen=True)
class MinimumElements:
    """One minimum per component, or ``no_minimum`` when some component lacks one
    (then ``elements`` is empty)."""

    elements: tuple
    no_minimum: bool
    components: tuple

    def __bool__(self):
        return not self.no_minimum


def minimum_elements(poset: FinitePoset) -> MinimumElements:
    comps = connected_components(poset)
    mins = []
    for comp in comps:
        m = [c for c in comp if all(poset.le(c, b) for b in comp)]
        if not m:
            return MinimumElements((), True, tuple(map(tuple, comps)))
        mins.append(m[0])
    return MinimumElements(tuple(mins), False, tuple(map(tuple, comps)))


def random_poset(n: int, rng: np.random.Generator, edge_prob: float = 0.3) -> FinitePoset:
    """Random poset from a random DAG on a shuffled vertex order."""
    perm = rng.permutation(n)
    pairs = [
        (f"e{perm[i]}", f"e{perm[j]}")
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < edge_prob
    ]
    return build_poset([f"e{k}" for k in range(n)], pairs)


def graph_poset(vertices: Sequence[Element], edges: Sequence[tuple[Element, Element]]) -> FinitePoset:
    """Vertex–edge poset of a graph: ``v <= e`` iff ``v`` is an endpoint of ``e``.

    Edges are named ``"u-v"``.
    """
    names = [str(e[0]) + "-" + str(e[1]) for e in edges]
    return build_poset(
        list(vertices) + names,
        [(v, name) for name, e in zip(names, edges) for v in e],
    )
