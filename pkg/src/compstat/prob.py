"""Finite probability: spaces, distributions, Markov kernels, entropy, Boltzmann."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import PartitionMismatch, SpaceMismatch

ROW_TOL = 1e-9


@dataclass(frozen=True)
class FiniteSpace:
    outcomes: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "outcomes", tuple(str(o) for o in self.outcomes))
        if not self.outcomes:
            raise ValueError("a finite space needs at least one outcome")
        if len(set(self.outcomes)) != len(self.outcomes):
            raise ValueError("outcome labels must be unique")

    def __len__(self):
        return len(self.outcomes)

    def __iter__(self):
        return iter(self.outcomes)

    def index(self, label) -> int:
        return self.outcomes.index(str(label))

    @classmethod
    def range(cls, n: int) -> "FiniteSpace":
        return cls(tuple(str(i) for i in range(n)))

    @classmethod
    def point(cls) -> "FiniteSpace":
        return cls(("*",))


def product_space(*spaces: FiniteSpace) -> FiniteSpace:
    """Cartesian product in row-major order; labels joined with ``,``.

    The empty product is the one-point space.
    """
    if not spaces:
        return FiniteSpace.point()
    if len(spaces) == 1:
        return spaces[0]
    return FiniteSpace(tuple(",".join(t) for t in itertools.product(*(s.outcomes for s in spaces))))


@dataclass(frozen=True)
class Dist:
    space: FiniteSpace
    p: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.shape != (len(self.space),):
            raise SpaceMismatch(f"probability vector has shape {p.shape}, space has {len(self.space)} outcomes")
        if (p < 0).any():
            raise ValueError("probabilities must be nonnegative")
        s = p.sum()
        if abs(s - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {s}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @classmethod
    def normalized(cls, space: FiniteSpace, weights) -> "Dist":
        w = np.asarray(weights, dtype=float)
        return cls(space, w / w.sum())

    @classmethod
    def uniform(cls, space: FiniteSpace) -> "Dist":
        return cls(space, np.full(len(space), 1.0 / len(space)))

    @classmethod
    def point_mass(cls, space: FiniteSpace, outcome) -> "Dist":
        p = np.zeros(len(space))
        p[outcome if isinstance(outcome, (int, np.integer)) else space.index(outcome)] = 1.0
        return cls(space, p)


@dataclass(frozen=True)
class Kernel:
    """Markov kernel as a row-stochastic matrix ``k[source, target]``."""

    source: FiniteSpace
    target: FiniteSpace
    k: np.ndarray = field(repr=False)

    def __post_init__(self):
        k = np.array(self.k, dtype=float)
        if k.shape != (len(self.source), len(self.target)):
            raise SpaceMismatch(
                f"kernel matrix has shape {k.shape}, expected {(len(self.source), len(self.target))}"
            )
        if (k < 0).any():
            raise ValueError("kernel entries must be nonnegative")
        rows = k.sum(axis=1)
        if np.abs(rows - 1.0).max() > ROW_TOL:
            bad = int(np.abs(rows - 1.0).argmax())
            raise ValueError(f"kernel row {self.source.outcomes[bad]!r} sums to {rows[bad]}")
        k.setflags(write=False)
        object.__setattr__(self, "k", k)

    @classmethod
    def identity(cls, space: FiniteSpace) -> "Kernel":
        return cls(space, space, np.eye(len(space)))

    def renormalized(self) -> "Kernel":
        return Kernel(self.source, self.target, self.k / self.k.sum(axis=1, keepdims=True))


def compose_kernels(k: Kernel, k1: Kernel) -> Kernel:
    """``k1 ∘ k``: first ``k`` (E -> E1), then ``k1`` (E1 -> E2)."""
    if k.target != k1.source:
        raise SpaceMismatch("target of the first kernel differs from source of the second")
    return Kernel(k.source, k1.target, k.k @ k1.k)


def kernel_from_map(source: FiniteSpace, target: FiniteSpace, f: Callable | Sequence[int]) -> Kernel:
    """Deterministic kernel of a map.  ``f`` is either an index array or a callable
    from source labels to target labels."""
    idx = map_indices(source, target, f)
    m = np.zeros((len(source), len(target)))
    m[np.arange(len(source)), idx] = 1.0
    return Kernel(source, target, m)


def map_indices(source: FiniteSpace, target: FiniteSpace, f) -> np.ndarray:
    if callable(f):
        idx = np.array([target.index(f(o)) for o in source.outcomes], dtype=np.int64)
    else:
        idx = np.asarray(f, dtype=np.int64)
    if idx.shape != (len(source),) or (idx < 0).any() or (idx >= len(target)).any():
        raise SpaceMismatch("map must send every source outcome to a target index")
    return idx


def pushforward(k: Kernel | np.ndarray, d: Dist, target: FiniteSpace | None = None) -> Dist:
    """``d^T k``.  ``k`` may be an index array (a map), then ``target`` is required."""
    if isinstance(k, Kernel):
        if d.space != k.source:
            raise SpaceMismatch("distribution lives on a different space than the kernel source")
        return Dist(k.target, d.p @ k.k)
    idx = np.asarray(k)
    if target is None:
        raise ValueError("target space required when pushing forward along a map")
    if idx.shape != d.p.shape:
        raise SpaceMismatch("map and distribution sizes differ")
    return Dist(target, np.bincount(idx, weights=d.p, minlength=len(target)))


def proper_kernel_check(k: Kernel, blocks: Sequence[Sequence[str]]) -> bool:
    """Finite properness: row ``i`` of ``k`` is supported in ``blocks[i]``.

    ``blocks`` partitions the target outcomes and is matched to source
    outcomes by position.
    """
    if len(blocks) != len(k.source):
        raise PartitionMismatch("need one block per source outcome")
    flat = [o for blk in blocks for o in blk]
    if sorted(flat) != sorted(k.target.outcomes) or len(set(flat)) != len(flat):
        raise PartitionMismatch("blocks must partition the target outcomes")
    for i, blk in enumerate(blocks):
        inside = np.zeros(len(k.target), dtype=bool)
        inside[[k.target.index(o) for o in blk]] = True
        if k.k[i, ~inside].sum() > ROW_TOL:
            return False
    return True


def entropy(d: Dist | np.ndarray) -> float:
    """Shannon entropy in nats with 0 ln 0 = 0."""
    p = d.p if isinstance(d, Dist) else np.asarray(d, dtype=float)
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum())


@dataclass(frozen=True)
class Hamiltonian:
    space: FiniteSpace
    H: np.ndarray = field(repr=False)
    beta: float = 1.0

    def __post_init__(self):
        H = np.array(self.H, dtype=float)
        if H.shape != (len(self.space),):
            raise SpaceMismatch("energy vector does not match the space")
        if not np.isfinite(H).all():
            raise ValueError("energies must be finite")
        if not self.beta >= 0:
            raise ValueError("beta must be nonnegative")
        H.setflags(write=False)
        object.__setattr__(self, "H", H)


@dataclass(frozen=True)
class ObservableVector:
    space: FiniteSpace
    f: np.ndarray = field(repr=False)

    def __post_init__(self):
        f = np.array(self.f, dtype=float)
        if f.shape != (len(self.space),) or not np.isfinite(f).all():
            raise ValueError("observable must be a finite vector on the space")
        f.setflags(write=False)
        object.__setattr__(self, "f", f)

    def expectation(self, d: Dist) -> float:
        if d.space != self.space:
            raise SpaceMismatch("observable and distribution live on different spaces")
        return float(d.p @ self.f)


def boltzmann(h: Hamiltonian) -> Dist:
    logw = -h.beta * h.H
    return Dist(h.space, np.exp(logw - logsumexp(logw)))


def log_partition(h: Hamiltonian) -> float:
    """``-ln sum exp(-beta H)`` (the minimum of the Gibbs free energy)."""
    return float(-logsumexp(-h.beta * h.H))


def gibbs_free_energy(d: Dist, h: Hamiltonian) -> float:
    """``E_d[beta H] - S(d)``."""
    if d.space != h.space:
        raise SpaceMismatch("distribution and Hamiltonian live on different spaces")
    return float(h.beta * (d.p @ h.H)) - entropy(d)
