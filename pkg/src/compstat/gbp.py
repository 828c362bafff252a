"""Generalized belief propagation on region posets and its A-specification variant.

Messages live in log space.  ``m[(b, a)]`` is the top-down message from
``a`` to ``b`` (``b < a``).  In the default ``pushdown`` variant it is a
vector on ``G(b)``; in the experimental ``literal-F`` variant it is a vector
on ``G(a)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import DegenerateBelief
from .free_energy import (
    BeliefFamily,
    CriticalityReport,
    HamiltonianFamily,
    criticality_report,
    generalized_bethe,
)
from .spec import ASpecification, RegionModel

VARIANTS = ("pushdown", "literal-F")


@dataclass
class GbpOptions:
    max_iters: int = 10_000
    tol: float = 1e-10
    damping: float = 0.5
    variant: str = "pushdown"
    init: str = "ones"  # or "lognormal"
    seed: int | None = None
    init_scale: float = 0.5
    record_trace: bool = True

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.init not in ("ones", "lognormal"):
            raise ValueError("init must be 'ones' or 'lognormal'")


@dataclass
class MessageState:
    log_m: dict = field(repr=False)
    iteration: int = 0
    damping: float = 0.5
    variant: str = "pushdown"

    def messages(self) -> dict:
        return {k: np.exp(v) for k, v in self.log_m.items()}

    def copy(self) -> "MessageState":
        return MessageState({k: v.copy() for k, v in self.log_m.items()}, self.iteration, self.damping, self.variant)


def _message_space(model, b, a, variant):
    return model.size(b) if variant == "pushdown" else model.size(a)


def initial_state(model: RegionModel, opts: GbpOptions | None = None) -> MessageState:
    opts = opts or GbpOptions()
    if opts.variant == "literal-F" and not isinstance(model, ASpecification):
        raise ValueError("the literal-F variant needs F legs")
    rng = np.random.default_rng(opts.seed)
    log_m = {}
    for b, a in model.poset.pairs():
        n = _message_space(model, b, a, opts.variant)
        if opts.init == "lognormal":
            v = opts.init_scale * rng.standard_normal(n)
            log_m[(b, a)] = v - v.max()
        else:
            log_m[(b, a)] = np.zeros(n)
    return MessageState(log_m, 0, opts.damping, opts.variant)


def _n_terms(model: RegionModel, b, a):
    """Senders ``c`` with ``b < c`` and ``c`` not below ``a``."""
    P = model.poset
    return [c for c in P.above(b) if c != b and not P.le(c, a)]


def _log_n(model: RegionModel, state: MessageState, b, a) -> np.ndarray:
    acc = np.zeros(model.size(a))
    for c in _n_terms(model, b, a):
        lm = state.log_m[(b, c)]
        if state.variant == "literal-F":
            # function on G(c) -> conditional expectation on G(b)
            lm = logsumexp(np.log(np.maximum(model.f(b, c), 1e-300)) + lm[None, :], axis=1)
        acc += model.pull(b, a, lm)
    return acc


def gbp_bottom_up(model: RegionModel, state: MessageState) -> dict:
    """Log bottom-up messages ``n[(b, a)]`` on ``G(a)`` for every ``b <= a``
    (``b == a`` included)."""
    return {(b, a): _log_n(model, state, b, a) for a in model.elements for b in model.poset.below(a)}


def _log_belief(model, state, H: HamiltonianFamily, a) -> np.ndarray:
    lb = -H.beta * H.H[a]
    for b in model.poset.below(a):
        lb = lb + _log_n(model, state, b, a)
    z = logsumexp(lb)
    if not np.isfinite(z):
        raise DegenerateBelief(f"belief at {a!r} cannot be normalized")
    return lb - z


def gbp_beliefs(model: RegionModel, state: MessageState, H: HamiltonianFamily) -> BeliefFamily:
    return BeliefFamily({a: np.exp(_log_belief(model, state, H, a)) for a in model.elements})


def _log_ratio(model, state, H, b, a):
    lb_a = _log_belief(model, state, H, a)
    lb_b = _log_belief(model, state, H, b)
    if state.variant == "pushdown":
        with np.errstate(divide="ignore"):
            num = np.log(model.push(b, a, np.exp(lb_a)))
        den = lb_b
    else:
        with np.errstate(divide="ignore"):
            num = np.log(model.forward(b, a, np.exp(lb_b)))
        den = lb_a
    r = num - den
    if not np.isfinite(r).all():
        raise DegenerateBelief(f"zero mass in the update for {b!r} <= {a!r}")
    return r


def gbp_update(model: RegionModel, state: MessageState, H: HamiltonianFamily) -> tuple[MessageState, float]:
    """One sweep over all pairs in the fixed order, each update using the
    freshest messages.  Returns the new state and the sup-norm change of the
    (max-normalized) log messages."""
    new = state.copy()
    change = 0.0
    for b, a in model.poset.pairs():
        r = _log_ratio(model, new, H, b, a)
        old = new.log_m[(b, a)]
        lm = old + new.damping * r
        lm = lm - lm.max()
        change = max(change, float(np.abs(lm - (old - old.max())).max()))
        new.log_m[(b, a)] = lm
    new.iteration += 1
    return new, change


@dataclass
class GbpResult:
    converged: bool
    iterations: int
    beliefs: BeliefFamily = field(repr=False)
    sup_change: float
    criticality: float
    report: CriticalityReport = field(repr=False)
    pushforward_residual: float
    section_residual: float | None
    state: MessageState = field(repr=False)
    trace: list = field(default_factory=list, repr=False)
    free_energy: float = float("nan")
    # criticality on the pushforward-compatible family; equals ``criticality``
    # for region models, differs for specifications whose beliefs are not F-sections
    marginal_criticality: float = float("nan")


def run_gbp(model: RegionModel, H: HamiltonianFamily, opts: GbpOptions | None = None, state: MessageState | None = None) -> GbpResult:
    """Iterate :func:`gbp_update` until the log-message change drops below
    ``opts.tol`` or ``opts.max_iters`` sweeps have run.  Non-convergence is
    flagged in the result, not raised."""
    opts = opts or GbpOptions()
    state = state.copy() if state is not None else initial_state(model, opts)
    state.damping, state.variant = opts.damping, opts.variant
    trace = []
    change = float("inf")
    converged = False
    while state.iteration < opts.max_iters:
        state, change = gbp_update(model, state, H)
        if opts.record_trace:
            fb = generalized_bethe(gbp_beliefs(model, state, H), H)
            trace.append((state.iteration, change, fb))
        if change < opts.tol:
            converged = True
            break
    beliefs = gbp_beliefs(model, state, H)
    rep = criticality_report(model, beliefs, H)
    if isinstance(model, ASpecification):
        section_res = model.section_residual(beliefs)
        marg_crit = criticality_report(model, beliefs, H, kind="marginal").residual
    else:
        section_res, marg_crit = None, rep.residual
    return GbpResult(
        converged=converged,
        iterations=state.iteration,
        beliefs=beliefs,
        sup_change=change,
        criticality=rep.residual,
        report=rep,
        pushforward_residual=model.pushforward_residual(beliefs),
        section_residual=section_res,
        state=state,
        trace=trace,
        free_energy=generalized_bethe(beliefs, H),
        marginal_criticality=marg_crit,
    )


@dataclass
class FixedPointReport:
    fixed_point_residual: float
    constraint_residual: float
    criticality: float

    def passes(self, tol: float = 1e-6) -> bool:
        return max(self.fixed_point_residual, self.constraint_residual, self.criticality) <= tol


def fixed_point_verify(model: RegionModel, H: HamiltonianFamily, beliefs, variant: str = "pushdown") -> FixedPointReport:
    """Residuals of a belief family: (i) the multiplicative update factor of the
    message equations, (ii) the constraint defect, (iii) the criticality residual."""
    worst = 0.0
    for b, a in model.poset.pairs():
        with np.errstate(divide="ignore"):
            if variant == "pushdown":
                r = np.log(model.push(b, a, beliefs[a])) - np.log(beliefs[b])
            else:
                r = np.log(model.forward(b, a, beliefs[b])) - np.log(beliefs[a])
        worst = max(worst, float(np.abs(r).max()) if np.isfinite(r).all() else float("inf"))
    if isinstance(model, ASpecification):
        cons = model.section_residual(beliefs)
    else:
        cons = model.pushforward_residual(beliefs)
    rep = criticality_report(model, beliefs, H)
    return FixedPointReport(worst, cons, rep.residual)
