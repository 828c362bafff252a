"""Exact Gibbs sets: the polytope of sections of F, its vertices and dimension."""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _lp
from .errors import CheckFailed, NumericalRankWarning
from .poset import minimum_elements
from .spec import ASpecification, Section

FLOAT_TOL = 1e-9
MAX_DENOMINATOR = 10**6


@dataclass
class SectionPolytope:
    """``{x >= 0 : A x = rhs}`` with one block of ``x`` per poset element.

    Rows: ``F^b_a x_b - x_a = 0`` for each cover ``b <⋅ a``, then one
    normalization row per element.  ``A_exact`` holds rational copies of the
    rows when every entry is a short rational; the exact path is used then.
    """

    spec: ASpecification
    A: np.ndarray = field(repr=False)
    rhs: np.ndarray = field(repr=False)
    layout: dict = field(repr=False)
    A_exact: list | None = field(default=None, repr=False)
    rhs_exact: list | None = field(default=None, repr=False)

    @property
    def n_variables(self) -> int:
        return self.A.shape[1]

    @property
    def n_section_rows(self) -> int:
        return self.A.shape[0] - len(self.layout)

    @property
    def exact(self) -> bool:
        return self.A_exact is not None

    def residual(self, x: np.ndarray) -> float:
        return float(np.abs(self.A @ x - self.rhs).max()) if self.A.size else 0.0


def _short_rational(x: float) -> Fraction | None:
    f = Fraction(x).limit_denominator(MAX_DENOMINATOR)
    return f if float(f) == x else None


def assemble_polytope(spec: ASpecification) -> SectionPolytope:
    A, rhs = spec.section_system()
    exact_rows = []
    for row in A:
        conv = [_short_rational(float(v)) for v in row]
        if any(v is None for v in conv):
            exact_rows = None
            break
        exact_rows.append(conv)
    rhs_exact = [Fraction(int(v)) for v in rhs] if exact_rows is not None else None
    return SectionPolytope(spec, A, rhs, spec.layout(), exact_rows, rhs_exact)


@dataclass
class GibbsSetReport:
    feasible: bool
    affine_dimension: int
    vertices: list = field(default_factory=list)
    certificate: np.ndarray | None = None
    exact: bool = False
    polytope: SectionPolytope | None = field(default=None, repr=False)
    vertices_exact: list | None = field(default=None, repr=False)

    def verify_certificate(self, tol: float = 1e-9) -> bool:
        """``A^T z >= 0`` and ``rhs . z < 0``: no nonnegative solution can exist."""
        if self.certificate is None or self.polytope is None:
            return False
        z = self.certificate
        P = self.polytope
        if P.exact and self.exact:
            zf = [Fraction(v) for v in z]
            ok_cols = all(
                sum(P.A_exact[i][j] * zf[i] for i in range(len(zf))) >= 0 for j in range(P.n_variables)
            )
            return ok_cols and sum(P.rhs_exact[i] * zf[i] for i in range(len(zf))) < 0
        return bool((P.A.T @ z >= -tol).all() and P.rhs @ z < -tol)


def solve_gibbs(spec_or_polytope, exact: bool | None = None) -> GibbsSetReport:
    """Feasibility, vertices and affine dimension of the Gibbs set.

    ``exact=None`` picks rational arithmetic whenever every constraint entry is
    a short rational (denominator <= 10^6), floats with tolerance 1e-9
    otherwise.
    """
    P = spec_or_polytope if isinstance(spec_or_polytope, SectionPolytope) else assemble_polytope(spec_or_polytope)
    use_exact = P.exact if exact is None else exact
    if use_exact and not P.exact:
        raise ValueError("constraint entries are not short rationals; exact mode unavailable")
    if use_exact:
        A, b, tol = P.A_exact, P.rhs_exact, 0
    else:
        A, b, tol = P.A.tolist(), P.rhs.tolist(), FLOAT_TOL

    res = _lp.phase1(A, b, tol)
    if not res.feasible:
        z = np.array([float(v) for v in res.certificate])
        scale = -float(P.rhs @ z)
        if scale > 0:
            z = z / scale
        return GibbsSetReport(False, -1, [], z, use_exact, P)

    verts = _lp.enumerate_vertices(res.tableau, res.basis, tol)
    vf = [np.array([float(v) for v in x]) for x in verts]
    if use_exact:
        diffs = [[xi - x0i for xi, x0i in zip(x, verts[0])] for x in verts[1:]]
        dim = _lp.rank(diffs, 0)
    else:
        dim = _float_rank([x - vf[0] for x in vf[1:]])
    sections = [P.spec.unflatten(x) for x in vf]
    return GibbsSetReport(True, dim, sections, None, use_exact, P, verts if use_exact else None)


def _float_rank(rows) -> int:
    if not rows:
        return 0
    s = np.linalg.svd(np.array(rows), compute_uv=False)
    ambiguous = s[(s > 1e-10) & (s < 1e-7)]
    if ambiguous.size:
        warnings.warn(
            f"singular values {ambiguous.tolist()} close to the rank threshold",
            NumericalRankWarning,
            stacklevel=3,
        )
    return int((s > 1e-8).sum())


def is_section(spec: ASpecification, Q: Section, tol: float = 1e-9) -> bool:
    return all((np.asarray(Q[a]) >= -tol).all() for a in spec.elements) and spec.section_residual(Q) <= tol


def projective_classification_check(spec: ASpecification, report: GibbsSetReport | None = None) -> bool:
    """Check the Gibbs set of a projective spec against the product-of-simplices
    description.  Raises :class:`CheckFailed` naming the violated clause."""
    from .spec import check_decomposition

    if spec.decomposition is None:
        raise CheckFailed("specification carries no projective decomposition")
    problems = check_decomposition(spec, spec.decomposition)
    if problems:
        raise CheckFailed("decomposition: " + "; ".join(problems))
    report = report or solve_gibbs(spec)
    mins = minimum_elements(spec.poset)
    if mins.no_minimum:
        if report.feasible:
            raise CheckFailed("a component has no minimum but the Gibbs set is non-empty")
        if not report.verify_certificate():
            raise CheckFailed("empty Gibbs set reported without a valid Farkas certificate")
        return True
    if not report.feasible:
        raise CheckFailed("every component has a minimum but the Gibbs set is empty")
    expected_dim = sum(spec.size(m) - 1 for m in mins.elements)
    if report.affine_dimension != expected_dim:
        raise CheckFailed(f"affine dimension {report.affine_dimension}, expected {expected_dim}")
    # restriction to the minimums maps vertices bijectively onto tuples of point masses
    restricted = set()
    for v in report.vertices:
        tup = []
        for m in mins.elements:
            p = v[m]
            k = int(np.argmax(p))
            if abs(p[k] - 1.0) > 1e-9:
                raise CheckFailed(f"vertex restricted to minimum {m!r} is not a point mass")
            tup.append(k)
        restricted.add(tuple(tup))
    want = set(itertools.product(*(range(spec.size(m)) for m in mins.elements)))
    if restricted != want or len(report.vertices) != len(want):
        raise CheckFailed("restriction to minimums is not a bijection onto the product of simplices")
    return True
