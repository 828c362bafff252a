"""Tail-like structure lim σ(G), invariant observables lim i, and the zero–one
extremality test for Gibbs measures."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import PositivityRequired, TooLarge
from .spec import ASpecification, RegionModel, Section

ZERO_ONE_TOL = 1e-9
MAX_EVENT_SECTIONS = 2**16


@dataclass(frozen=True)
class EventSection:
    """One subset per element, as boolean masks, closed under preimages along G."""

    sets: dict = field(hash=False)

    def key(self, order):
        return tuple(tuple(np.flatnonzero(self.sets[a]).tolist()) for a in order)

    def complement(self) -> "EventSection":
        return EventSection({a: ~m for a, m in self.sets.items()})

    def labels(self, model: RegionModel) -> dict:
        return {a: [model.spaces[a].outcomes[i] for i in np.flatnonzero(m)] for a, m in self.sets.items()}


def is_event_section(model: RegionModel, sets: dict) -> bool:
    return all(np.array_equal(sets[a], sets[b][model.g(b, a)]) for b, a in model.poset.pairs())


def _propagate(model: RegionModel, comp, anchor, anchor_set):
    """All event sections on one component extending ``anchor_set`` at ``anchor``.

    Upward steps are forced (preimage); a downward step fixes the image of
    the upper set and branches over outcomes outside the image of the leg.
    """
    P = model.poset
    adj = {a: [x for x in comp if x != a and (P.le(a, x) or P.le(x, a))] for a in comp}
    results = []

    def extend(assigned):
        frontier = [(a, x) for a in assigned for x in adj[a] if x not in assigned]
        if not frontier:
            if all(np.array_equal(assigned[a], assigned[b][model.g(b, a)]) for b, a in P.pairs() if a in assigned):
                results.append(dict(assigned))
            return
        a, x = frontier[0]
        if P.le(a, x):  # x above a: preimage is forced
            cand = [assigned[a][model.g(a, x)]]
        else:  # x below a
            g = model.g(x, a)
            img = np.zeros(model.size(x), dtype=bool)
            img[g] = True
            forced = np.zeros(model.size(x), dtype=bool)
            forced[g[assigned[a]]] = True
            if not np.array_equal(forced[g], assigned[a]):
                return  # upper set is not saturated for this leg
            free = np.flatnonzero(~img)
            cand = []
            for bits in itertools.product([False, True], repeat=len(free)):
                m = forced.copy()
                m[free] = bits
                cand.append(m)
        for m in cand:
            # consistency against everything already assigned
            ok = True
            for y, s in assigned.items():
                if P.le(y, x) and not np.array_equal(m, s[model.g(y, x)]):
                    ok = False
                    break
                if P.le(x, y) and not np.array_equal(s, m[model.g(x, y)]):
                    ok = False
                    break
            if ok:
                assigned[x] = m
                extend(assigned)
                del assigned[x]

    extend({anchor: anchor_set})
    return results


def enumerate_lim_sigma(model: RegionModel) -> list[EventSection]:
    """Every family ``(A_a)`` with ``A_a = (G^a_b)^{-1} A_b`` for all ``b <= a``."""
    comps = model.components()
    anchors = [min(comp, key=lambda a: (model.size(a), model.poset.index(a))) for comp in comps]
    budget = 1
    for a in anchors:
        budget *= 2 ** model.size(a)
    if budget > MAX_EVENT_SECTIONS:
        raise TooLarge(f"{budget} anchor subsets exceed the enumeration budget")
    per_comp = []
    for comp, anchor in zip(comps, anchors):
        found = []
        for bits in itertools.product([False, True], repeat=model.size(anchor)):
            found += _propagate(model, comp, anchor, np.array(bits, dtype=bool))
        per_comp.append(found)
    out = []
    for combo in itertools.product(*per_comp):
        sets = {}
        for part in combo:
            sets.update(part)
        out.append(EventSection({a: sets[a] for a in model.elements}))
    return out


@dataclass
class InvariantObservableBasis:
    """Columns of ``basis`` are concatenated families ``(f_a)`` with
    ``f_a = f_b ∘ G^a_b`` for all ``b <= a``."""

    model: RegionModel
    basis: np.ndarray = field(repr=False)

    @property
    def dimension(self) -> int:
        return self.basis.shape[1]

    def family(self, k: int) -> dict:
        return self.model.unflatten(self.basis[:, k])

    def contains(self, f: dict, tol: float = 1e-8) -> bool:
        x = self.model.flatten(f)
        coef, *_ = np.linalg.lstsq(self.basis, x, rcond=None)
        return float(np.abs(self.basis @ coef - x).max()) <= tol


def invariant_observables(model: RegionModel) -> InvariantObservableBasis:
    lay = model.layout()
    n = model.total_size()
    rows = []
    for b, a in model.poset.pairs():
        g = model.g(b, a)
        for wa in range(model.size(a)):
            r = np.zeros(n)
            r[lay[a].start + wa] += 1.0
            r[lay[b].start + g[wa]] -= 1.0
            rows.append(r)
    M = np.array(rows).reshape(-1, n)
    basis = scipy.linalg.null_space(M) if M.shape[0] else np.eye(n)
    return InvariantObservableBasis(model, basis)


def lim_i_subset_lim_pi_check(spec: ASpecification, tol: float = 1e-10) -> bool:
    """Every invariant observable is also F-harmonic: ``pi^a_b f_a = f_b``."""
    lim_i = invariant_observables(spec)
    for k in range(lim_i.dimension):
        f = lim_i.family(k)
        for b, a in spec.poset.pairs():
            if np.abs(spec.expect(b, a, f[a]) - f[b]).max() > tol:
                return False
    return True


def support_section(spec: ASpecification, mu: Section, tol: float = ZERO_ONE_TOL, strict: bool = True) -> EventSection:
    """Supports of a Gibbs measure; an event section whenever ``F > 0``."""
    if strict and not spec.strictly_positive():
        raise PositivityRequired("support_section needs F > 0")
    return EventSection({a: np.asarray(mu[a]) > tol for a in spec.elements})


@dataclass
class ExtremalityResult:
    extreme: bool
    heuristic: bool = False
    witness: EventSection | None = None
    weight: float | None = None  # mu_a(A_a) on the witnessing component
    parts: tuple | None = None  # (conditioned on A, conditioned on complement)

    def __bool__(self):
        return self.extreme


def zero_one_extremality_test(spec: ASpecification, mu: Section, strict: bool = False, tol: float = ZERO_ONE_TOL) -> ExtremalityResult:
    """A Gibbs measure is extreme iff it gives every event section mass 0 or 1.

    Without ``F > 0`` the verdict is labelled heuristic, or
    :class:`PositivityRequired` is raised when ``strict``.  A non-extreme
    verdict carries the witness and the two conditioned sections.
    """
    positive = spec.strictly_positive()
    if strict and not positive:
        raise PositivityRequired("the zero-one characterization assumes F > 0")
    comps = spec.components()
    comp_of = {a: k for k, comp in enumerate(comps) for a in comp}
    for A in enumerate_lim_sigma(spec):
        for a in spec.elements:
            w = float(np.asarray(mu[a])[A.sets[a]].sum())
            if tol < w < 1 - tol:
                comp = set(comps[comp_of[a]])
                inside, outside = {}, {}
                for x in spec.elements:
                    m = np.asarray(mu[x], dtype=float)
                    if x in comp:
                        mask = A.sets[x]
                        wx = m[mask].sum()
                        inside[x] = np.where(mask, m, 0.0) / wx
                        outside[x] = np.where(mask, 0.0, m) / (1.0 - wx)
                    else:
                        inside[x] = outside[x] = m
                return ExtremalityResult(False, not positive, A, w, (inside, outside))
    return ExtremalityResult(True, not positive)
