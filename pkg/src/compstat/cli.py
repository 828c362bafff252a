"""Command-line interface: ``compstat <command> FILE [options]``.

Every command prints one JSON report on stdout.  Exit codes: 0 success,
1 validation failure, 2 solver non-convergence, 3 I/O or parse error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .errors import CompstatError, ParseError, PositivityRequired, TooLarge
from .fileio import SpecDocument, load_section, load_spec
from .free_energy import criticality_report, fe_vector, generalized_bethe
from .gbp import GbpOptions, run_gbp
from .gibbs import solve_gibbs
from .oracle import JointModel, brute_force_sections, exact_log_partition, exact_marginals
from .poset import minimum_elements
from .spec import ASpecification, validate_specification
from .tail import zero_one_extremality_test

EXIT_OK, EXIT_INVALID, EXIT_NOT_CONVERGED, EXIT_IO = 0, 1, 2, 3


class _Fail(Exception):
    def __init__(self, code: int, kind: str, message: str, location: str | None = None, payload=None):
        super().__init__(message)
        self.code, self.kind, self.location, self.payload = code, kind, location, payload


def _clean(x):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


def _family(model, family) -> dict:
    """Per-element probability lists, in the outcome order of ``_outcomes``."""
    return {a: np.asarray(family[a], dtype=float).tolist() for a in model.elements}


def _outcomes(model) -> dict:
    return {a: list(model.spaces[a].outcomes) for a in model.elements}


def _load(path: str) -> tuple[SpecDocument, str]:
    p = Path(path)
    try:
        digest = hashlib.sha256(p.read_bytes()).hexdigest()
    except OSError as exc:
        raise _Fail(EXIT_IO, "IOError", f"cannot read {path}: {exc.strerror}") from exc
    return load_spec(p), digest


def _validated(doc: SpecDocument):
    rep = validate_specification(doc.model)
    if not rep.ok:
        raise _Fail(EXIT_INVALID, "ValidationError", str(rep), payload={"violations": [v.as_dict() for v in rep.violations]})
    return rep


def _need_spec(doc: SpecDocument) -> ASpecification:
    if not isinstance(doc.model, ASpecification):
        raise _Fail(EXIT_IO, "ParseError", "this command needs a specification with F legs", "$.F")
    return doc.model


def _need_hamiltonians(doc: SpecDocument):
    if doc.hamiltonians is None:
        raise _Fail(EXIT_IO, "ParseError", "this command needs a 'hamiltonians' block", "$.hamiltonians")
    return doc.hamiltonians


# -- commands ---------------------------------------------------------------


def cmd_validate(doc: SpecDocument, args):
    rep = validate_specification(doc.model)
    result = {
        "valid": rep.ok,
        "kind": "specification" if isinstance(doc.model, ASpecification) else "region-model",
        "violations": [v.as_dict() for v in rep.violations],
        "warnings": [v.as_dict() for v in rep.warnings],
    }
    if isinstance(doc.model, ASpecification) and rep.ok:
        result["strictly_positive"] = doc.model.strictly_positive()
    return result, {}, EXIT_OK if rep.ok else EXIT_INVALID


def cmd_gibbs(doc: SpecDocument, args):
    spec = _need_spec(doc)
    _validated(doc)
    rep = solve_gibbs(spec)
    result = {"feasible": rep.feasible, "exact": rep.exact, "affine_dimension": rep.affine_dimension}
    residuals = {}
    if rep.feasible:
        result["outcomes"] = _outcomes(spec)
        result["vertices"] = [_family(spec, v) for v in rep.vertices]
        if rep.vertices_exact is not None:
            lay = spec.layout()
            result["vertices_exact"] = [
                {a: [str(v) for v in x[lay[a]]] for a in spec.elements} for x in rep.vertices_exact
            ]
        residuals["section"] = max((spec.section_residual(v) for v in rep.vertices), default=0.0)
    else:
        result["certificate"] = rep.certificate
        result["certificate_valid"] = rep.verify_certificate()
        residuals["certificate_rhs"] = float(rep.polytope.rhs @ rep.certificate)
    return result, residuals, EXIT_OK


def cmd_extreme(doc: SpecDocument, args):
    spec = _need_spec(doc)
    _validated(doc)
    mu = load_section(args.section, spec)
    res_sec = spec.section_residual(mu)
    try:
        r = zero_one_extremality_test(spec, mu, strict=args.strict)
    except (PositivityRequired, TooLarge) as exc:
        raise _Fail(EXIT_INVALID, type(exc).__name__, str(exc)) from exc
    result = {"extreme": r.extreme, "heuristic": r.heuristic, "is_section": res_sec <= 1e-9}
    if r.witness is not None:
        result["witness"] = r.witness.labels(spec)
        result["weight"] = r.weight
        result["parts"] = [_family(spec, p) for p in r.parts]
        result["outcomes"] = _outcomes(spec)
    return result, {"section": res_sec}, EXIT_OK


def cmd_bethe(doc: SpecDocument, args):
    H = _need_hamiltonians(doc)
    _validated(doc)
    Q = load_section(args.beliefs, doc.model)
    try:
        rep = criticality_report(doc.model, Q, H)
        fe = fe_vector(Q, H)
    except CompstatError as exc:
        raise _Fail(EXIT_INVALID, type(exc).__name__, str(exc)) from exc
    result = {
        "F_bethe": generalized_bethe(Q, H),
        "fe": fe,
        "counting": doc.model.poset.counting.as_dict(),
        "criticality": rep.residual,
    }
    residuals = {
        "stationarity": rep.stationarity,
        "feasibility": rep.feasibility,
        "mobius_stationarity": rep.mobius_stationarity,
    }
    return result, residuals, EXIT_OK


def cmd_gbp(doc: SpecDocument, args):
    H = _need_hamiltonians(doc)
    _validated(doc)
    opts = GbpOptions(
        max_iters=args.max_iters,
        tol=args.tol,
        damping=args.damping,
        variant=args.variant,
        init="lognormal" if args.seed is not None else "ones",
        seed=args.seed,
    )
    if opts.variant == "literal-F":
        _need_spec(doc)
    try:
        r = run_gbp(doc.model, H, opts)
    except CompstatError as exc:
        raise _Fail(EXIT_NOT_CONVERGED, type(exc).__name__, str(exc)) from exc
    if args.trace:
        try:
            with open(args.trace, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["iteration", "sup_change", "F_bethe"])
                for it, ch, fb in r.trace:
                    w.writerow([it, repr(float(ch)), repr(float(fb))])
        except OSError as exc:
            raise _Fail(EXIT_IO, "IOError", f"cannot write trace: {exc.strerror}") from exc
    result = {
        "converged": r.converged,
        "iterations": r.iterations,
        "sup_change": r.sup_change,
        "F_bethe": r.free_energy,
        "beliefs": _family(doc.model, r.beliefs),
        "outcomes": _outcomes(doc.model),
        "options": {"max_iters": opts.max_iters, "tol": opts.tol, "damping": opts.damping,
                    "variant": opts.variant, "seed": opts.seed},
    }
    residuals = {"criticality": r.criticality, "pushforward": r.pushforward_residual}
    if r.section_residual is not None:
        residuals["section"] = r.section_residual
        residuals["marginal_criticality"] = r.marginal_criticality
    return result, residuals, EXIT_OK if r.converged else EXIT_NOT_CONVERGED


def cmd_mobius(doc: SpecDocument, args):
    P = doc.model.poset
    mu = P.mobius
    mins = minimum_elements(P)
    result = {
        "elements": list(P.elements),
        "mobius": {a: {b: int(mu[a, b]) for b in P.below(a)} for a in P},
        "counting": {a: int(c) for a, c in P.counting.as_dict().items()},
        "components": [list(c) for c in mins.components],
        "minimums": None if mins.no_minimum else list(mins.elements),
    }
    return result, {"rota_identities": mu.check_identities()}, EXIT_OK


def cmd_oracle(doc: SpecDocument, args):
    m = doc.model
    which = args.which
    if which == "sections":
        spec = _need_spec(doc)
        try:
            pts = brute_force_sections(spec, args.resolution)
        except TooLarge as exc:
            raise _Fail(EXIT_INVALID, "TooLarge", str(exc)) from exc
        return {"resolution": args.resolution, "count": len(pts), "outcomes": _outcomes(spec),
                "points": [_family(spec, p) for p in pts]}, {}, EXIT_OK
    H = _need_hamiltonians(doc)
    if m.regions is None:
        raise _Fail(EXIT_IO, "ParseError", "the joint oracle needs 'variables' and 'regions'", "$.regions")
    terms = H.local_terms()
    joint = JointModel.from_region_model(m, terms, H.beta)
    try:
        if which == "log-partition":
            return {"minus_log_Z": exact_log_partition(joint)}, {}, EXIT_OK
        marg = exact_marginals(joint, m.regions)
    except TooLarge as exc:
        raise _Fail(EXIT_INVALID, "TooLarge", str(exc)) from exc
    return {"marginals": _family(m, marg), "outcomes": _outcomes(m), "minus_log_Z": exact_log_partition(joint)}, {}, EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "gibbs": cmd_gibbs,
    "extreme": cmd_extreme,
    "bethe": cmd_bethe,
    "gbp": cmd_gbp,
    "mobius": cmd_mobius,
    "oracle": cmd_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="compstat", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"compstat {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("file", help="specification file (JSON)")
        p.add_argument("--timing", action="store_true", help="include wall time (reports are then not byte-stable)")
        return p

    add("validate", "check the specification axioms")
    add("gibbs", "Gibbs polytope: feasibility, vertices, dimension")
    p = add("extreme", "zero-one extremality test of a section")
    p.add_argument("section", help="JSON file with one probability vector per element")
    p.add_argument("--strict", action="store_true", help="refuse specifications without F > 0")
    p = add("bethe", "generalized Bethe free energy and criticality of beliefs")
    p.add_argument("beliefs", help="JSON file with one probability vector per element")
    p = add("gbp", "run generalized belief propagation")
    p.add_argument("--max-iters", type=int, default=10_000)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--damping", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=None, help="seeded log-normal message initialization")
    p.add_argument("--variant", choices=["pushdown", "literal-F"], default="pushdown")
    p.add_argument("--trace", default=None, help="CSV path for the per-iteration trace")
    add("mobius", "Möbius function, counting coefficients, components")
    p = add("oracle", "brute-force reference values")
    p.add_argument("which", choices=["log-partition", "marginals", "sections"])
    p.add_argument("--resolution", type=int, default=64)
    return ap


def _command_echo(args) -> dict:
    d = {k: v for k, v in vars(args).items() if k not in ("timing",)}
    return d


def run(argv=None) -> tuple[int, dict]:
    ap = build_parser()
    args = ap.parse_args(argv)
    t0 = time.perf_counter()
    report = {"command": _command_echo(args), "version": __version__}
    try:
        doc, digest = _load(args.file)
        report["input_sha256"] = digest
        result, residuals, code = COMMANDS[args.command](doc, args)
        report["result"] = result
        report["residuals"] = residuals
    except _Fail as f:
        code = f.code
        report["error"] = {"type": f.kind, "message": str(f), "location": f.location}
        if f.payload is not None:
            report["error"]["details"] = f.payload
    except ParseError as exc:
        code = EXIT_IO
        report["error"] = {"type": "ParseError", "message": exc.args[0], "location": exc.location}
    except ValueError as exc:
        code = EXIT_IO
        report["error"] = {"type": "ValueError", "message": str(exc), "location": None}
    report["exit_code"] = code
    if args.timing:
        report["wall_time"] = time.perf_counter() - t0
    return code, _clean(report)


def main(argv=None) -> int:
    code, report = run(argv)
    sys.stdout.write(json.dumps(report, sort_keys=True, indent=1, ensure_ascii=False) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
