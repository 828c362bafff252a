"""A-specifications (G, F) over a finite poset, and constructors.

Conventions used throughout the package:

* ``b <= a`` means ``G(b)`` is the coarser space.
* ``G[(b, a)]`` is the map ``G(a) -> G(b)`` stored as an index array of
  length ``|G(a)|``.
* ``F[(b, a)]`` is the kernel ``G(b) -> G(a)`` stored as a row-stochastic
  matrix of shape ``(|G(b)|, |G(a)|)``.
* A section is a dict ``{a: probability vector on G(a)}`` with
  ``F[(b, a)].T @ Q[b] == Q[a]`` for every ``b <= a``.

Only strict pairs are stored; identity legs are implicit.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np
import scipy.linalg

from .errors import InvalidRegion, NonPositiveJoint, RegionNotNested, SpaceMismatch
from .poset import FinitePoset, build_poset, minimum_elements, poset_from_subsets
from .prob import Dist, FiniteSpace, Kernel, product_space

Section = dict

SPEC_TOL = 1e-9


@dataclass(eq=False)
class RegionModel:
    """A presheaf of finite sets over a poset: spaces ``G(a)`` and maps ``G^a_b``.

    When built from variables, ``regions[a]`` lists the variables of region
    ``a`` and the maps are coordinate projections.  On its own this is the
    marginalization constraint family: ``(G^a_b)_* Q_a = Q_b``.
    """

    poset: FinitePoset
    spaces: dict
    G: dict = field(repr=False)
    variables: dict | None = None
    regions: dict | None = None

    def __post_init__(self):
        missing = [a for a in self.poset if a not in self.spaces]
        if missing:
            raise SpaceMismatch(f"no space given for {missing!r}")
        self.G = {k: np.asarray(v, dtype=np.int64) for k, v in self.G.items()}
        for b, a in self.poset.pairs():
            if (b, a) not in self.G:
                raise SpaceMismatch(f"missing G leg for {b!r} <= {a!r}")

    @property
    def elements(self):
        return self.poset.elements

    def size(self, a) -> int:
        return len(self.spaces[a])

    def g(self, b, a) -> np.ndarray:
        if b == a:
            return np.arange(self.size(a))
        return self.G[(b, a)]

    def push(self, b, a, v: np.ndarray) -> np.ndarray:
        """Pushforward of a measure on G(a) to G(b) along ``G^a_b``."""
        return np.bincount(self.g(b, a), weights=v, minlength=self.size(b))

    def pull(self, b, a, f: np.ndarray) -> np.ndarray:
        """Precomposition of a function on G(b) with ``G^a_b``."""
        return np.asarray(f)[self.g(b, a)]

    def constraint_pairs(self) -> list:
        """Covering pairs; marginal consistency on covers implies it on all pairs."""
        return self.poset.covers()

    def layout(self) -> dict:
        """Offsets of each element's block in the concatenated variable vector."""
        out, off = {}, 0
        for a in self.elements:
            out[a] = slice(off, off + self.size(a))
            off += self.size(a)
        return out

    def total_size(self) -> int:
        return sum(self.size(a) for a in self.elements)

    def constraint_system(self) -> tuple[np.ndarray, np.ndarray]:
        """Linear equalities ``A x = rhs`` cutting out the compatible families
        (before nonnegativity): per cover ``(G^a_b)_* x_a - x_b = 0`` and one
        normalization per element."""
        lay = self.layout()
        rows, rhs = [], []
        n = self.total_size()
        for b, a in self.constraint_pairs():
            g = self.g(b, a)
            for wb in range(self.size(b)):
                r = np.zeros(n)
                r[lay[a]] = (g == wb).astype(float)
                r[lay[b].start + wb] -= 1.0
                rows.append(r)
                rhs.append(0.0)
        for a in self.elements:
            r = np.zeros(n)
            r[lay[a]] = 1.0
            rows.append(r)
            rhs.append(1.0)
        return np.array(rows).reshape(-1, n), np.array(rhs)

    def flatten(self, Q: Mapping) -> np.ndarray:
        return np.concatenate([np.asarray(Q[a], dtype=float) for a in self.elements])

    def unflatten(self, x: np.ndarray) -> Section:
        return {a: np.asarray(x[s]) for a, s in self.layout().items()}

    def pushforward_residual(self, Q: Mapping) -> float:
        """``max |(G^a_b)_* Q_a - Q_b|`` over all strict pairs."""
        worst = 0.0
        for b, a in self.poset.pairs():
            worst = max(worst, float(np.abs(self.push(b, a, Q[a]) - Q[b]).max()))
        return worst

    def components(self):
        return self.poset.connected_components()


@dataclass(eq=False)
class ASpecification(RegionModel):
    """A pair (G, F) with ``G^a_b F^b_a = id``.  See module docstring."""

    F: dict = field(default_factory=dict, repr=False)
    decomposition: "ProjectiveDecomposition | None" = None

    def __post_init__(self):
        super().__post_init__()
        self.F = {k: np.asarray(v, dtype=float) for k, v in self.F.items()}
        for b, a in self.poset.pairs():
            if (b, a) not in self.F:
                raise SpaceMismatch(f"missing F leg for {b!r} <= {a!r}")

    def f(self, b, a) -> np.ndarray:
        if b == a:
            return np.eye(self.size(a))
        return self.F[(b, a)]

    def kernel(self, b, a) -> Kernel:
        return Kernel(self.spaces[b], self.spaces[a], self.f(b, a))

    def expect(self, b, a, f: np.ndarray) -> np.ndarray:
        """``pi^a_b``: conditional expectation of a function on G(a) under F^b_a."""
        return self.f(b, a) @ f

    def forward(self, b, a, p: np.ndarray) -> np.ndarray:
        """``F^b_a p``: push a measure on G(b) up to G(a)."""
        return self.f(b, a).T @ p

    def section_system(self) -> tuple[np.ndarray, np.ndarray]:
        """``A x = rhs`` for sections: per cover ``F^b_a x_b - x_a = 0`` plus
        per-element normalization."""
        lay = self.layout()
        n = self.total_size()
        rows, rhs = [], []
        for b, a in self.constraint_pairs():
            Fm = self.f(b, a)
            for wa in range(self.size(a)):
                r = np.zeros(n)
                r[lay[b]] = Fm[:, wa]
                r[lay[a].start + wa] -= 1.0
                rows.append(r)
                rhs.append(0.0)
        for a in self.elements:
            r = np.zeros(n)
            r[lay[a]] = 1.0
            rows.append(r)
            rhs.append(1.0)
        return np.array(rows).reshape(-1, n), np.array(rhs)

    def section_residual(self, Q: Mapping) -> float:
        """``max |F^b_a Q_b - Q_a|`` over all strict pairs, and normalization defects."""
        worst = max(abs(float(np.sum(Q[a])) - 1.0) for a in self.elements)
        for b, a in self.poset.pairs():
            worst = max(worst, float(np.abs(self.forward(b, a, Q[b]) - Q[a]).max()))
        return worst

    def strictly_positive(self) -> bool:
        """The ``F > 0`` flag: every outcome in the fiber of ``w_b`` has positive mass."""
        for (b, a), Fm in self.F.items():
            g = self.g(b, a)
            if (Fm[g, np.arange(self.size(a))] <= 0).any():
                return False
        return True


# -- validation -------------------------------------------------------------


@dataclass
class Violation:
    axiom: str
    where: tuple
    detail: str

    def as_dict(self):
        return {"axiom": self.axiom, "where": [str(w) for w in self.where], "detail": self.detail}


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "valid"
        return "; ".join(f"{v.axiom} at {v.where}: {v.detail}" for v in self.violations)


def validate_specification(spec: RegionModel, tol: float = SPEC_TOL) -> ValidationReport:
    """Check presheaf/functor laws, stochasticity and ``G ∘ F = id``.

    Region models (no F) only get the G checks.  Non-surjective G legs are
    reported as warnings, not violations.
    """
    rep = ValidationReport()
    P = spec.poset
    pairs = P.pairs()
    for b, a in pairs:
        g = spec.g(b, a)
        if g.shape != (spec.size(a),) or (g < 0).any() or (g >= spec.size(b)).any():
            rep.violations.append(Violation("G-map", (b, a), "not a total map G(a) -> G(b)"))
            return rep
        missing = np.setdiff1d(np.arange(spec.size(b)), g)
        if missing.size:
            rep.warnings.append(
                Violation("G-surjective", (b, a), f"outcomes {[spec.spaces[b].outcomes[i] for i in missing]} not hit")
            )
    # G^b_c ∘ G^a_b = G^a_c for c <= b <= a
    for c, b in pairs:
        for a in P.above(b):
            if a == b:
                continue
            composed = spec.g(c, b)[spec.g(b, a)]
            bad = np.flatnonzero(composed != spec.g(c, a))
            if bad.size:
                rep.violations.append(
                    Violation("G-functoriality", (c, b, a), f"outcome {spec.spaces[a].outcomes[bad[0]]!r}")
                )
    if not isinstance(spec, ASpecification):
        return rep
    for b, a in pairs:
        Fm = spec.f(b, a)
        if Fm.shape != (spec.size(b), spec.size(a)):
            rep.violations.append(Violation("F-shape", (b, a), f"shape {Fm.shape}"))
            return rep
        if (Fm < -tol).any():
            rep.violations.append(Violation("F-nonnegative", (b, a), "negative entry"))
        rows = np.abs(Fm.sum(axis=1) - 1.0)
        if rows.max() > tol:
            i = int(rows.argmax())
            rep.violations.append(
                Violation("F-stochastic", (b, a), f"row {spec.spaces[b].outcomes[i]!r} sums to {Fm[i].sum()!r}")
            )
        # G^a_b F^b_a = id: each row pushed down along G is the point mass
        onehot = np.zeros((spec.size(a), spec.size(b)))
        onehot[np.arange(spec.size(a)), spec.g(b, a)] = 1.0
        err = np.abs(Fm @ onehot - np.eye(spec.size(b)))
        if err.max() > tol:
            i = int(err.max(axis=1).argmax())
            rep.violations.append(
                Violation(
                    "section-axiom",
                    (b, a),
                    f"row {spec.spaces[b].outcomes[i]!r} puts mass {1 - (Fm @ onehot)[i, i]:.3g} off its fiber",
                )
            )
    # F^b_c = F^a_c ∘ F^b_a for b <= a <= c
    for b, a in pairs:
        for c in P.above(a):
            if c == a:
                continue
            err = np.abs(spec.f(b, a) @ spec.f(a, c) - spec.f(b, c)).max()
            if err > tol:
                rep.violations.append(Violation("F-functoriality", (b, a, c), f"max deviation {err:.3g}"))
    return rep


# -- completion helpers -----------------------------------------------------


def complete_legs(poset: FinitePoset, G_covers: Mapping, F_covers: Mapping | None = None):
    """Fill non-cover pairs by composing along covers.

    Explicitly given non-cover legs are kept as given (validation will compare
    them with the composite).
    """
    G = dict(G_covers)
    F = dict(F_covers) if F_covers is not None else None
    covers = poset.covers()
    for b, a in poset.pairs():
        if (b, a) in G and (F is None or (b, a) in F):
            continue
        # any cover (c, a) with b < c; (b, c) was filled earlier in pair order
        c = next(c for (c, top) in covers if top == a and c != b and poset.le(b, c))
        if (b, a) not in G:
            G[(b, a)] = np.asarray(G[(b, c)])[np.asarray(G[(c, a)])]
        if F is not None and (b, a) not in F:
            F[(b, a)] = np.asarray(F[(b, c)]) @ np.asarray(F[(c, a)])
    return G, F


def _projection(variables: Mapping, vars_a: Sequence, vars_b: Sequence) -> np.ndarray:
    """Index array of the coordinate projection E_a -> E_b."""
    sizes_a = [len(variables[v]) for v in vars_a]
    sizes_b = [len(variables[v]) for v in vars_b]
    pos = [list(vars_a).index(v) for v in vars_b]
    if not vars_a:
        return np.zeros(1, dtype=np.int64)
    grid = np.indices(sizes_a).reshape(len(vars_a), -1)
    if not vars_b:
        return np.zeros(grid.shape[1], dtype=np.int64)
    return np.ravel_multi_index(tuple(grid[p] for p in pos), sizes_b).astype(np.int64)


def _region_setup(variables: Mapping, regions, poset: FinitePoset | None):
    variables = {v: (s if isinstance(s, FiniteSpace) else FiniteSpace(tuple(s))) for v, s in variables.items()}
    order = list(variables)
    if not isinstance(regions, Mapping):
        regions = list(regions)
        names = [",".join(map(str, sorted(r, key=order.index))) if r else "∅" for r in regions]
        regions = dict(zip(names, regions))
    norm = {}
    for name, r in regions.items():
        r = set(r)
        if not r <= set(order):
            raise InvalidRegion(f"region {name!r} uses unknown variables {sorted(map(str, r - set(order)))}")
        norm[name] = tuple(v for v in order if v in r)
    if poset is None:
        poset = poset_from_subsets([norm[n] for n in norm], names=list(norm))
    else:
        for b, a in poset.pairs():
            if not set(norm[b]) <= set(norm[a]):
                raise RegionNotNested(f"{b!r} <= {a!r} but its variables are not a subset")
    spaces = {a: product_space(*(variables[v] for v in norm[a])) for a in poset}
    G = {(b, a): _projection(variables, norm[a], norm[b]) for b, a in poset.pairs()}
    return variables, norm, poset, spaces, G


def marginalization_model(variables: Mapping, regions, poset: FinitePoset | None = None) -> RegionModel:
    """Regions of a product space ordered by inclusion, with projection legs.

    ``regions`` is a mapping name -> variables, or a list of variable
    collections (named by their comma-joined variables).
    """
    variables, norm, poset, spaces, G = _region_setup(variables, regions, poset)
    return RegionModel(poset, spaces, G, variables=variables, regions=norm)


def joint_space(model: RegionModel) -> FiniteSpace:
    return product_space(*model.variables.values())


def marginal_family(model: RegionModel, joint: np.ndarray) -> Section:
    """Marginals of a joint vector (row-major over ``model.variables``) on each region."""
    order = list(model.variables)
    out = {}
    for a in model.elements:
        g = _projection(model.variables, order, model.regions[a])
        out[a] = np.bincount(g, weights=joint, minlength=model.size(a))
    return out


def conditional_spec_from_joint(joint: Dist | np.ndarray, variables: Mapping, regions, poset: FinitePoset | None = None) -> ASpecification:
    """Specification whose F legs are the conditionals of a strictly positive joint:
    ``F^b_a(w_a | w_b) = P_a(w_a) 1[G^a_b(w_a) = w_b] / P_b(w_b)``."""
    variables, norm, poset, spaces, G = _region_setup(variables, regions, poset)
    p = joint.p if isinstance(joint, Dist) else np.asarray(joint, dtype=float)
    n = int(np.prod([len(s) for s in variables.values()]))
    if p.shape != (n,):
        raise SpaceMismatch(f"joint has {p.size} entries, product space has {n}")
    if (p <= 0).any():
        raise NonPositiveJoint("joint distribution must be strictly positive")
    p = p / p.sum()
    model = RegionModel(poset, spaces, G, variables=variables, regions=norm)
    marg = marginal_family(model, p)
    F = {}
    for b, a in poset.pairs():
        g = G[(b, a)]
        m = np.zeros((len(spaces[b]), len(spaces[a])))
        m[g, np.arange(len(spaces[a]))] = marg[a] / marg[b][g]
        F[(b, a)] = m
    return ASpecification(poset, spaces, G, variables=variables, regions=norm, F=F)


def identity_spec(poset: FinitePoset, space: FiniteSpace) -> ASpecification:
    """Every G(a) equal to ``space``; all legs identities."""
    n = len(space)
    pairs = poset.pairs()
    return ASpecification(
        poset,
        {a: space for a in poset},
        {p: np.arange(n) for p in pairs},
        F={p: np.eye(n) for p in pairs},
    )


# -- projective specifications ----------------------------------------------


@dataclass
class ProjectiveDecomposition:
    """``L^inf ∘ F ≅ ⊕_c S_c``.

    ``embeddings[(c, a)]`` is a ``|G(a)| x dim S_c`` matrix whose columns are
    the basis of ``S_c(a)`` inside functions on ``G(a)``, for every ``c <= a``
    (``c == a`` included).
    """

    dims: dict
    embeddings: dict = field(repr=False)


def check_decomposition(spec: ASpecification, dec: ProjectiveDecomposition, tol: float = 1e-9) -> list[str]:
    """Problems with a claimed decomposition (empty list when it holds)."""
    problems = []
    P = spec.poset
    for a in P:
        below = P.below(a)
        total = sum(dec.dims[c] for c in below)
        if total != spec.size(a):
            problems.append(f"dims below {a!r} sum to {total}, |G(a)| = {spec.size(a)}")
            continue
        basis = np.hstack([dec.embeddings[(c, a)] for c in below]) if total else np.zeros((spec.size(a), 0))
        if np.linalg.matrix_rank(basis) != spec.size(a):
            problems.append(f"summands at {a!r} do not span")
    for b, a in P.pairs():
        for c in P.below(a):
            img = spec.expect(b, a, dec.embeddings[(c, a)])
            want = dec.embeddings[(c, b)] if P.le(c, b) else np.zeros_like(img)
            if img.size and np.abs(img - want).max() > tol:
                problems.append(f"pi^{a!r}_{b!r} does not act as identity/zero on S_{c!r}")
    return problems


def projective_spec_chain(X: FiniteSpace, Y: FiniteSpace, q: Dist | np.ndarray, names=("a0", "a1")) -> ASpecification:
    """Chain ``a0 <= a1`` with G(a0)=X, G(a1)=X×Y, first-coordinate projection and
    ``F(· | x) = δ_x ⊗ q``."""
    qv = q.p if isinstance(q, Dist) else np.asarray(q, dtype=float)
    a0, a1 = names
    poset = build_poset([a0, a1], [(a0, a1)])
    XY = product_space(X, Y)
    nx, ny = len(X), len(Y)
    g = np.repeat(np.arange(nx), ny)
    F = np.kron(np.eye(nx), qv.reshape(1, -1))
    lift = np.zeros((nx * ny, nx))
    lift[np.arange(nx * ny), g] = 1.0
    dec = ProjectiveDecomposition(
        dims={a0: nx, a1: nx * (ny - 1)},
        embeddings={
            (a0, a0): np.eye(nx),
            (a0, a1): lift,
            (a1, a1): scipy.linalg.null_space(F),
        },
    )
    return ASpecification(poset, {a0: X, a1: XY}, {(a0, a1): g}, F={(a0, a1): F}, decomposition=dec)


def contradictory_glue(X_b: FiniteSpace, X_c: FiniteSpace) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic glue maps with disjoint graphs: ``x -> x`` and ``y -> y + 1 (mod n)``."""
    n = len(X_b)
    if len(X_c) != n or n < 2:
        raise ValueError("contradictory glue needs two spaces of equal size >= 2")
    gb = np.eye(n)
    gc = np.roll(np.eye(n), 1, axis=1)
    return gb, gc


def independent_glue(X_b: FiniteSpace, X_c: FiniteSpace, q_c=None, q_b=None) -> tuple[np.ndarray, np.ndarray]:
    """Product glue: each row is a fixed distribution (uniform by default)."""
    q_c = np.full(len(X_c), 1 / len(X_c)) if q_c is None else np.asarray(q_c, float)
    q_b = np.full(len(X_b), 1 / len(X_b)) if q_b is None else np.asarray(q_b, float)
    return np.tile(q_c, (len(X_b), 1)), np.tile(q_b, (len(X_c), 1))


def projective_spec_V(
    X_b: FiniteSpace,
    X_c: FiniteSpace,
    glue_b: np.ndarray | None = None,
    glue_c: np.ndarray | None = None,
    names=("b", "c", "a"),
) -> ASpecification:
    """V-poset ``b <= a >= c`` with G(a) = X_b × X_c and the two projections.

    ``F^b_a(x, y | x') = δ_{x x'} glue_b[x, y]`` and
    ``F^c_a(x, y | y') = glue_c[y, x] δ_{y y'}``.  Default glue is
    :func:`contradictory_glue`.  When the supports of the two F legs are
    disjoint the specification is projective and a decomposition is attached.
    """
    if glue_b is None and glue_c is None:
        glue_b, glue_c = contradictory_glue(X_b, X_c)
    glue_b = np.asarray(glue_b, float)
    glue_c = np.asarray(glue_c, float)
    b, c, a = names
    nb, nc = len(X_b), len(X_c)
    poset = build_poset([b, c, a], [(b, a), (c, a)])
    Ga_b = np.repeat(np.arange(nb), nc)
    Ga_c = np.tile(np.arange(nc), nb)
    Fb = np.zeros((nb, nb * nc))
    Fc = np.zeros((nc, nb * nc))
    for x in range(nb):
        for y in range(nc):
            Fb[x, x * nc + y] = glue_b[x, y]
            Fc[y, x * nc + y] = glue_c[y, x]
    spec = ASpecification(
        poset,
        {b: X_b, c: X_c, a: product_space(X_b, X_c)},
        {(b, a): Ga_b, (c, a): Ga_c},
        F={(b, a): Fb, (c, a): Fc},
    )
    supp_b = (Fb > 0).any(axis=0)
    supp_c = (Fc > 0).any(axis=0)
    if not (supp_b & supp_c).any():
        emb_b = (Fb > 0).T.astype(float)
        emb_c = (Fc > 0).T.astype(float)
        spec.decomposition = ProjectiveDecomposition(
            dims={b: nb, c: nc, a: nb * nc - nb - nc},
            embeddings={
                (b, b): np.eye(nb),
                (c, c): np.eye(nc),
                (b, a): emb_b,
                (c, a): emb_c,
                (a, a): scipy.linalg.null_space(np.vstack([Fb, Fc])),
            },
        )
    return spec


def disjoint_union(*specs: ASpecification, prefixes: Sequence[str] | None = None) -> ASpecification:
    """Side-by-side union; element ``e`` of the k-th spec becomes ``f"{prefix_k}{e}"``."""
    prefixes = list(prefixes) if prefixes is not None else [f"s{k}." for k in range(len(specs))]
    elements, rel_pairs, spaces, G, F = [], [], {}, {}, {}
    dims, emb = {}, {}
    all_dec = all(s.decomposition is not None for s in specs)
    for pre, s in zip(prefixes, specs):
        ren = {e: f"{pre}{e}" for e in s.elements}
        elements += [ren[e] for e in s.elements]
        rel_pairs += [(ren[b], ren[a]) for b, a in s.poset.pairs()]
        spaces.update({ren[e]: s.spaces[e] for e in s.elements})
        G.update({(ren[b], ren[a]): v for (b, a), v in s.G.items()})
        F.update({(ren[b], ren[a]): v for (b, a), v in s.F.items()})
        if all_dec:
            dims.update({ren[e]: d for e, d in s.decomposition.dims.items()})
            emb.update({(ren[c], ren[a]): m for (c, a), m in s.decomposition.embeddings.items()})
    poset = build_poset(elements, rel_pairs)
    dec = ProjectiveDecomposition(dims, emb) if all_dec else None
    return ASpecification(poset, spaces, G, F=F, decomposition=dec)


def point_mass_sections_at_minimums(spec: ASpecification) -> list[Section]:
    """For a spec with a minimum per component, the sections generated by point
    masses at the minimums (pushed up along F)."""
    mins = minimum_elements(spec.poset)
    if mins.no_minimum:
        return []
    comps = spec.components()
    out = []
    for choice in itertools.product(*(range(spec.size(m)) for m in mins.elements)):
        Q = {}
        for m, w, comp in zip(mins.elements, choice, comps):
            base = np.zeros(spec.size(m))
            base[w] = 1.0
            for a in comp:
                Q[a] = spec.forward(m, a, base)
        out.append(Q)
    return out
