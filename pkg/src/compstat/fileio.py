"""JSON specification files.

A document has the blocks ``poset`` (``elements``, ``covers``), ``spaces``
(outcome labels per element), ``G`` and ``F`` keyed ``"b<a"`` on cover
pairs, and optionally ``variables``/``regions`` (projection legs are then
derived), ``hamiltonians`` and ``decomposition``.  A document without ``F``
describes a region model.  Numbers may be written as JSON numbers or as
strings such as ``"1/3"``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from .errors import CompstatError, ParseError
from .free_energy import HamiltonianFamily
from .poset import build_poset
from .prob import FiniteSpace
from .spec import (
    ASpecification,
    ProjectiveDecomposition,
    RegionModel,
    _region_setup,
    complete_legs,
)

FORMAT = "compstat-spec/1"


@dataclass
class SpecDocument:
    model: RegionModel
    hamiltonians: HamiltonianFamily | None = None
    terms: dict | None = None  # as written in the file
    hamiltonian_kind: str = "local"
    name: str | None = None
    description: str | None = None


def _pair_key(b, a) -> str:
    return f"{b}<{a}"


def _split_key(key: str, loc: str, sep: str = "<"):
    parts = key.split(sep)
    if len(parts) != 2 or not all(parts):
        raise ParseError(f"expected a key of the form 'b{sep}a', got {key!r}", loc)
    return parts[0], parts[1]


def _number(x, loc: str) -> float:
    if isinstance(x, bool):
        raise ParseError("boolean where a number was expected", loc)
    if isinstance(x, (int, float)):
        return float(x)
    if isinstance(x, str):
        try:
            return float(Fraction(x.strip()))
        except (ValueError, ZeroDivisionError):
            pass
    raise ParseError(f"not a number: {x!r}", loc)


def _vector(x, loc: str) -> np.ndarray:
    if not isinstance(x, list):
        raise ParseError("expected a list of numbers", loc)
    return np.array([_number(v, f"{loc}[{i}]") for i, v in enumerate(x)], dtype=float)


def _matrix(x, loc: str) -> np.ndarray:
    if not isinstance(x, list) or not x:
        raise ParseError("expected a non-empty list of rows", loc)
    rows = [_vector(r, f"{loc}[{i}]") for i, r in enumerate(x)]
    if len({r.size for r in rows}) != 1:
        raise ParseError("rows have different lengths", loc)
    return np.vstack(rows)


def _index_array(x, loc: str) -> np.ndarray:
    if not isinstance(x, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in x):
        raise ParseError("expected a list of integer indices", loc)
    return np.array(x, dtype=np.int64)


def _get(d: dict, key: str, loc: str, kind=None):
    if key not in d:
        raise ParseError(f"missing block {key!r}", loc)
    v = d[key]
    if kind is not None and not isinstance(v, kind):
        raise ParseError(f"block {key!r} has the wrong type", f"{loc}.{key}")
    return v


def parse_spec(doc: Any) -> SpecDocument:
    """Build a model from a decoded JSON document.  Structural errors raise
    :class:`ParseError` with a JSON-path location; axiom violations are left
    to :func:`~compstat.spec.validate_specification`."""
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object", "$")
    pos = _get(doc, "poset", "$", dict)
    elements = _get(pos, "elements", "$.poset", list)
    for i, e in enumerate(elements):
        if not isinstance(e, str) or not e or "<" in e:
            raise ParseError("element names must be non-empty strings without '<'", f"$.poset.elements[{i}]")
    covers = pos.get("covers", [])
    pairs = []
    for i, c in enumerate(covers):
        if not (isinstance(c, list) and len(c) == 2):
            raise ParseError("a cover is a pair [lower, upper]", f"$.poset.covers[{i}]")
        pairs.append(tuple(c))
    try:
        poset = build_poset(elements, pairs)
    except CompstatError as exc:
        raise ParseError(str(exc), "$.poset") from exc

    variables = regions = None
    if "regions" in doc:
        vraw = _get(doc, "variables", "$", dict)
        rraw = _get(doc, "regions", "$", dict)
        try:
            variables, regions, poset, spaces, G_all = _region_setup(
                {v: tuple(map(str, o)) for v, o in vraw.items()}, {a: rraw[a] for a in elements}, poset
            )
        except KeyError as exc:
            raise ParseError(f"no region listed for {exc.args[0]!r}", "$.regions") from exc
        except CompstatError as exc:
            raise ParseError(str(exc), "$.regions") from exc
        G = {}
    else:
        sraw = _get(doc, "spaces", "$", dict)
        spaces = {}
        for a in elements:
            if a not in sraw:
                raise ParseError(f"no space for element {a!r}", "$.spaces")
            spaces[a] = FiniteSpace(tuple(map(str, sraw[a])))
        G_all = None
        G = {}
        graw = doc.get("G", {})
        if not isinstance(graw, dict):
            raise ParseError("block 'G' has the wrong type", "$.G")
        for key, v in graw.items():
            loc = f"$.G[{key!r}]"
            b, a = _split_key(key, loc)
            if not (b in poset and a in poset and poset.lt(b, a)):
                raise ParseError(f"{key!r} is not a strict pair of the poset", loc)
            G[(b, a)] = _index_array(v, loc)

    F = None
    if "F" in doc:
        F = {}
        if not isinstance(doc["F"], dict):
            raise ParseError("block 'F' has the wrong type", "$.F")
        for key, v in doc["F"].items():
            loc = f"$.F[{key!r}]"
            b, a = _split_key(key, loc)
            if not (b in poset and a in poset and poset.lt(b, a)):
                raise ParseError(f"{key!r} is not a strict pair of the poset", loc)
            F[(b, a)] = _matrix(v, loc)

    try:
        if G_all is None:
            missing = [c for c in poset.covers() if c not in G]
            if missing:
                raise ParseError(f"no G leg for cover {_pair_key(*missing[0])!r}", "$.G")
            G_all, F_all = complete_legs(poset, G, F)
        else:
            F_all = complete_legs(poset, G_all, F)[1] if F is not None else None
        if F is not None:
            missing = [c for c in poset.covers() if c not in F]
            if missing:
                raise ParseError(f"no F leg for cover {_pair_key(*missing[0])!r}", "$.F")
            model = ASpecification(poset, spaces, G_all, variables=variables, regions=regions, F=F_all)
        else:
            model = RegionModel(poset, spaces, G_all, variables=variables, regions=regions)
    except ParseError:
        raise
    except (CompstatError, ValueError, IndexError) as exc:
        raise ParseError(str(exc), "$") from exc

    if "decomposition" in doc:
        if not isinstance(model, ASpecification):
            raise ParseError("a decomposition needs F legs", "$.decomposition")
        model.decomposition = _parse_decomposition(doc["decomposition"], poset)

    ham = terms = None
    kind = "local"
    if "hamiltonians" in doc:
        hraw = _get(doc, "hamiltonians", "$", dict)
        beta = _number(hraw.get("beta", 1.0), "$.hamiltonians.beta")
        kind = hraw.get("kind", "local")
        if kind not in ("local", "region"):
            raise ParseError("kind must be 'local' or 'region'", "$.hamiltonians.kind")
        traw = _get(hraw, "terms", "$.hamiltonians", dict)
        terms = {}
        for a, v in traw.items():
            loc = f"$.hamiltonians.terms[{a!r}]"
            if a not in poset:
                raise ParseError(f"unknown element {a!r}", loc)
            terms[a] = _vector(v, loc)
            if terms[a].size != model.size(a):
                raise ParseError(f"expected {model.size(a)} entries, got {terms[a].size}", loc)
        if kind == "local":
            ham = HamiltonianFamily.from_local_terms(model, terms, beta)
        else:
            full = {a: terms.get(a, np.zeros(model.size(a))) for a in model.elements}
            ham = HamiltonianFamily(model, full, beta)
    return SpecDocument(model, ham, terms, kind, doc.get("name"), doc.get("description"))


def _parse_decomposition(raw, poset) -> ProjectiveDecomposition:
    if not isinstance(raw, dict):
        raise ParseError("decomposition must be an object", "$.decomposition")
    dims = {}
    for a, d in _get(raw, "dims", "$.decomposition", dict).items():
        if a not in poset or not isinstance(d, int):
            raise ParseError(f"bad dimension entry for {a!r}", f"$.decomposition.dims[{a!r}]")
        dims[a] = d
    emb = {}
    for key, v in _get(raw, "embeddings", "$.decomposition", dict).items():
        loc = f"$.decomposition.embeddings[{key!r}]"
        c, a = _split_key(key, loc, "<=")
        if not (c in poset and a in poset and poset.le(c, a)):
            raise ParseError(f"{key!r} is not a pair of the poset", loc)
        emb[(c, a)] = _matrix(v, loc)
    for a in poset:
        for c in poset.below(a):
            if (c, a) not in emb:
                raise ParseError(f"missing embedding {c}<={a}", "$.decomposition.embeddings")
    return ProjectiveDecomposition(dims, emb)


def _num_out(x: float):
    x = float(x)
    return int(x) if x.is_integer() and abs(x) < 2**53 else x


def dump_spec(sd: SpecDocument | RegionModel) -> dict:
    """Canonical document: covers only, fixed block order, exact float repr."""
    if isinstance(sd, RegionModel):
        sd = SpecDocument(sd)
    m = sd.model
    P = m.poset
    covers = P.covers()
    out = {"format": FORMAT}
    if sd.name:
        out["name"] = sd.name
    if sd.description:
        out["description"] = sd.description
    out["poset"] = {"elements": list(P.elements), "covers": [[b, a] for b, a in covers]}
    if m.regions is not None:
        out["variables"] = {v: list(s.outcomes) for v, s in m.variables.items()}
        out["regions"] = {a: list(m.regions[a]) for a in P}
    else:
        out["spaces"] = {a: list(m.spaces[a].outcomes) for a in P}
        out["G"] = {_pair_key(b, a): m.g(b, a).tolist() for b, a in covers}
    if isinstance(m, ASpecification):
        out["F"] = {_pair_key(b, a): [[_num_out(v) for v in row] for row in m.f(b, a)] for b, a in covers}
        if m.decomposition is not None:
            dec = m.decomposition
            out["decomposition"] = {
                "dims": {a: int(dec.dims[a]) for a in P},
                "embeddings": {
                    f"{c}<={a}": [[_num_out(v) for v in row] for row in dec.embeddings[(c, a)]]
                    for a in P
                    for c in P.below(a)
                },
            }
    if sd.hamiltonians is not None:
        H = sd.hamiltonians
        if sd.terms is not None:
            terms = sd.terms
        elif sd.hamiltonian_kind == "local":
            terms = H.local_terms()
        else:
            terms = H.H
        out["hamiltonians"] = {
            "beta": _num_out(H.beta),
            "kind": sd.hamiltonian_kind,
            "terms": {a: [_num_out(v) for v in terms[a]] for a in P if a in terms},
        }
    return out


def _compact(obj, indent: int = 0) -> str:
    """Pretty JSON with lists of scalars kept on one line."""
    pad = " " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad} {json.dumps(k, ensure_ascii=False)}: {_compact(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, list) and any(isinstance(v, (list, dict)) for v in obj):
        items = [pad + " " + _compact(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return json.dumps(obj, ensure_ascii=False, separators=(", ", ": "))


def dumps_spec(sd) -> str:
    return _compact(dump_spec(sd)) + "\n"


def load_spec(path) -> SpecDocument:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {p}: {exc.strerror}", str(p)) from exc
    return loads_spec(text)


def loads_spec(text: str) -> SpecDocument:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from exc
    return parse_spec(doc)


def load_section(path, model: RegionModel) -> dict:
    """A belief family or section: ``{"element": [p, ...], ...}``, optionally
    wrapped in a ``"section"``, ``"beliefs"`` or ``"marginals"`` block.  CLI
    reports of ``gbp`` and ``oracle marginals`` are accepted as they are."""
    p = Path(path)
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(f"cannot read {p}: {exc.strerror}", str(p)) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from exc
    if isinstance(doc, dict) and isinstance(doc.get("result"), dict):
        doc = doc["result"]
    if isinstance(doc, dict):
        for k in ("section", "beliefs", "marginals"):
            if k in doc and isinstance(doc[k], dict):
                doc = doc[k]
                break
    if not isinstance(doc, dict):
        raise ParseError("expected an object of per-element vectors", "$")
    out = {}
    for a in model.elements:
        if a not in doc:
            raise ParseError(f"no entry for element {a!r}", "$")
        v = _vector(doc[a], f"$[{a!r}]")
        if v.size != model.size(a):
            raise ParseError(f"expected {model.size(a)} entries, got {v.size}", f"$[{a!r}]")
        out[a] = v
    return out
