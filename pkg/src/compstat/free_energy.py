"""Generalized Bethe free energy, its gradient, functor-level zeta/Möbius
transforms, and the constrained criticality residual."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, InfeasibleInput, NonPositiveBelief, SpaceMismatch
from .poset import CountingCoefficients
from .prob import entropy
from .spec import ASpecification, RegionModel

LOG_FLOOR = 1e-300


@dataclass
class HamiltonianFamily:
    """Region Hamiltonians ``H_a`` on ``G(a)`` with a shared inverse temperature."""

    model: RegionModel
    H: dict = field(repr=False)
    beta: float = 1.0

    def __post_init__(self):
        self.H = {a: np.asarray(self.H[a], dtype=float) for a in self.model.elements}
        for a, h in self.H.items():
            if h.shape != (self.model.size(a),):
                raise SpaceMismatch(f"Hamiltonian for {a!r} has shape {h.shape}")

    @classmethod
    def from_local_terms(cls, model: RegionModel, terms: Mapping, beta: float = 1.0) -> "HamiltonianFamily":
        """Region energies as sums of the local terms of all subregions:
        ``H_a = sum_{b <= a} h_b ∘ G^a_b`` (missing terms count as zero)."""
        h = {a: np.asarray(terms.get(a, np.zeros(model.size(a))), dtype=float) for a in model.elements}
        return cls(model, mobius_functor_transform(model, h, "zeta", "G_up"), beta)

    def local_terms(self) -> dict:
        return mobius_functor_transform(self.model, self.H, "mobius", "G_up")

    @classmethod
    def zero(cls, model: RegionModel, beta: float = 1.0) -> "HamiltonianFamily":
        return cls(model, {a: np.zeros(model.size(a)) for a in model.elements}, beta)


class BeliefFamily(dict):
    """Mapping element -> probability vector, with a positivity flag."""

    @property
    def positive(self) -> bool:
        return all((np.asarray(v) > 0).all() for v in self.values())


def _check_spaces(Q, H: HamiltonianFamily):
    for a in H.model.elements:
        if a not in Q or np.shape(Q[a]) != H.H[a].shape:
            raise SpaceMismatch(f"belief for {a!r} does not match G({a!r})")


def fe_vector(Q: Mapping, H: HamiltonianFamily) -> dict:
    """Per-element Gibbs free energy ``E_{Q_a}[beta H_a] - S(Q_a)``."""
    _check_spaces(Q, H)
    return {a: H.beta * float(np.dot(Q[a], H.H[a])) - entropy(np.asarray(Q[a])) for a in H.model.elements}


def _coefficients(H: HamiltonianFamily, c):
    if c is None:
        return H.model.poset.counting.as_dict()
    if isinstance(c, CountingCoefficients):
        return c.as_dict()
    return dict(c)


def generalized_bethe(Q: Mapping, H: HamiltonianFamily, c=None) -> float:
    """``sum_a c(a) (E_{Q_a}[beta H_a] - S(Q_a))``."""
    fe = fe_vector(Q, H)
    cc = _coefficients(H, c)
    return float(sum(cc[a] * fe[a] for a in H.model.elements))


def gb_entropy(Q: Mapping, c) -> float:
    cc = c.as_dict() if isinstance(c, CountingCoefficients) else dict(c)
    return float(sum(cc[a] * entropy(np.asarray(Q[a])) for a in cc))


def _safe_log(p: np.ndarray, zero_tol: float) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if (p <= zero_tol).any():
        raise NonPositiveBelief("log of a non-positive belief entry")
    return np.log(np.maximum(p, LOG_FLOOR))


def fe_gradient(Q: Mapping, H: HamiltonianFamily, zero_tol: float = 0.0) -> dict:
    """``d FE_a / d Q_a = beta H_a + ln Q_a + 1`` (raw coordinates, no simplex projection)."""
    _check_spaces(Q, H)
    return {a: H.beta * H.H[a] + _safe_log(Q[a], zero_tol) + 1.0 for a in H.model.elements}


def bethe_gradient(Q: Mapping, H: HamiltonianFamily, c=None, zero_tol: float = 0.0) -> dict:
    cc = _coefficients(H, c)
    d = fe_gradient(Q, H, zero_tol)
    return {a: cc[a] * d[a] for a in H.model.elements}


def mobius_functor_transform(model: RegionModel, v: Mapping, direction: str = "mobius", variance: str = "G_up") -> dict:
    """Zeta / Möbius transforms twisted by the G legs.

    ``G_up`` acts on functions: ``result[a] = sum_{b <= a} coeff(a, b) v_b ∘ G^a_b``.
    ``G_dual_down`` acts on measures: ``result[b] = sum_{a >= b} coeff(a, b) (G^a_b)_* v_a``.
    ``coeff`` is 1 for ``zeta`` and ``mu(a, b)`` for ``mobius``.  The two
    variances are adjoint under the pairing ``sum_a <lambda_a, v_a>``.
    """
    P = model.poset
    for a in model.elements:
        if np.shape(v[a]) != (model.size(a),):
            raise DimensionMismatch(f"vector for {a!r} has shape {np.shape(v[a])}, expected ({model.size(a)},)")
    if direction == "zeta":
        coeff = lambda a, b: 1  # noqa: E731
    elif direction == "mobius":
        mu = P.mobius
        coeff = lambda a, b: mu[a, b]  # noqa: E731
    else:
        raise ValueError(f"unknown direction {direction!r}")
    out = {}
    if variance == "G_up":
        for a in model.elements:
            acc = np.zeros(model.size(a))
            for b in P.below(a):
                k = coeff(a, b)
                if k:
                    acc += k * model.pull(b, a, v[b])
            out[a] = acc
    elif variance == "G_dual_down":
        for b in model.elements:
            acc = np.zeros(model.size(b))
            for a in P.above(b):
                k = coeff(a, b)
                if k:
                    acc += k * model.push(b, a, np.asarray(v[a], dtype=float))
            out[b] = acc
    else:
        raise ValueError(f"unknown variance {variance!r}")
    return out


def constraint_system(model: RegionModel, kind: str | None = None):
    """``section`` for F-sections (default for specifications), ``marginal`` for
    pushforward compatibility (default for region models)."""
    kind = kind or ("section" if isinstance(model, ASpecification) else "marginal")
    if kind == "section":
        return model.section_system()
    if kind == "marginal":
        return model.constraint_system()
    raise ValueError(f"unknown constraint kind {kind!r}")


@dataclass
class CriticalityReport:
    residual: float  # max(stationarity, feasibility)
    stationarity: float  # |P_T grad F_Bethe|_inf
    feasibility: float  # |A Q - rhs|_inf
    mobius_stationarity: float  # same projection of the Möbius-transformed differential
    tangent_dimension: int


def criticality_report(model: RegionModel, Q: Mapping, H: HamiltonianFamily, c=None, kind: str | None = None) -> CriticalityReport:
    A, rhs = constraint_system(model, kind)
    x = model.flatten(Q)
    feas = float(np.abs(A @ x - rhs).max()) if A.size else 0.0
    g = model.flatten(bethe_gradient(Q, H, c))
    d = fe_gradient(Q, H)
    g_mob = model.flatten(mobius_functor_transform(model, d, "mobius", "G_up"))
    N = scipy.linalg.null_space(A) if A.size else np.eye(len(x))
    stat = float(np.abs(N @ (N.T @ g)).max()) if N.size else 0.0
    stat_mob = float(np.abs(N @ (N.T @ g_mob)).max()) if N.size else 0.0
    return CriticalityReport(max(stat, feas), stat, feas, stat_mob, N.shape[1])


def criticality_residual(
    model: RegionModel,
    Q: Mapping,
    H: HamiltonianFamily,
    c=None,
    kind: str | None = None,
    require_feasible: bool = True,
    feasibility_tol: float = 1e-8,
) -> float:
    """KKT residual of F_Bethe on the constraint set: the sup-norm of the gradient
    projected on the tangent space, or the constraint defect if larger."""
    rep = criticality_report(model, Q, H, c, kind)
    if require_feasible and rep.feasibility > feasibility_tol:
        raise InfeasibleInput(f"beliefs violate the constraints by {rep.feasibility:.3g}")
    return rep.residual
