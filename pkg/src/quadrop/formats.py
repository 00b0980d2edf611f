"""JSON formats for algebras, maps and operation-table fixtures.

Rationals are always written as strings "p/q" (or "p" for integers).
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from .exactlin import LinMap, Scalar, Vec, scalar
from .moduli import standard_model
from .operad import HyperComData, PAlgebraData, SuperSpace, cohomology_basis
from .qa_core import QuadraticAlgebra


class ParseError(ValueError):
    pass


def q(x: Scalar) -> str:
    return str(scalar(x))


def parse_q(x: Any, where: str) -> Scalar:
    if isinstance(x, bool) or isinstance(x, float):
        raise ParseError(f"{where}: expected a rational string, got {x!r}")
    try:
        return scalar(x)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ParseError(f"{where}: bad rational {x!r} ({exc})") from None


# ------------------------------------------------------------- algebras


def algebra_to_json(A: QuadraticAlgebra) -> dict:
    n = A.dim1
    rels = []
    for r in A.relations.basis:
        terms = []
        for flat, c in sorted(r.data.items()):
            i, j = divmod(flat, n)
            terms.append([q(c), A.names[i], A.names[j]])
        rels.append(terms)
    return {"field": "Q", "dim1": n, "names": list(A.names), "relations": rels}


_ALGEBRA_SCHEMA = {
    "type": "object",
    "required": ["dim1", "relations"],
    "properties": {
        "field": {"const": "Q"},
        "dim1": {"type": "integer", "minimum": 0},
        "names": {"type": "array", "items": {"type": "string"}},
        "relations": {
            "type": "array",
            "items": {
                "type": "array",
                "items": {"type": "array", "minItems": 3, "maxItems": 3},
            },
        },
    },
}


def _validate(doc: Any, schema: dict, what: str) -> None:
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ParseError(f"{what} at {path}: {exc.message}") from None


def algebra_from_json(doc: Any) -> QuadraticAlgebra:
    _validate(doc, _ALGEBRA_SCHEMA, "algebra")
    n = doc["dim1"]
    names = doc.get("names") or [f"x{i}" for i in range(n)]
    if len(names) != n:
        raise ParseError(f"names: {len(names)} names for dim1 = {n}")
    pos = {s: i for i, s in enumerate(names)}
    rels = []
    for r, terms in enumerate(doc["relations"]):
        data: dict[int, Scalar] = {}
        for t, (c, a, b) in enumerate(terms):
            where = f"relations[{r}][{t}]"
            ij = []
            for g in (a, b):
                if isinstance(g, str) and g in pos:
                    ij.append(pos[g])
                elif isinstance(g, int) and not isinstance(g, bool) and 0 <= g < n:
                    ij.append(g)
                else:
                    raise ParseError(f"{where}: unknown generator {g!r}")
            k = ij[0] * n + ij[1]
            data[k] = data.get(k, 0) + parse_q(c, where)
        rels.append(Vec(n * n, data))
    try:
        return QuadraticAlgebra.from_relations(n, rels, names)
    except ValueError as exc:
        raise ParseError(f"algebra: {exc}") from None


# ----------------------------------------------------------------- maps


def matrix_to_json(f: LinMap) -> list[list[str]]:
    """Row per source basis vector, dense, rational strings."""
    return [[q(x) for x in row] for row in f.dense()]


def matrix_from_json(doc: Any, dst_dim: int | None = None) -> LinMap:
    if not isinstance(doc, list) or any(not isinstance(r, list) for r in doc):
        raise ParseError("map: expected a list of rows")
    widths = {len(r) for r in doc}
    if len(widths) > 1:
        raise ParseError("map: rows have different lengths")
    width = widths.pop() if widths else (dst_dim or 0)
    if dst_dim is not None and width != dst_dim:
        raise ParseError(f"map: rows have length {width}, expected {dst_dim}")
    rows = [[parse_q(x, f"map[{i}][{j}]") for j, x in enumerate(r)] for i, r in enumerate(doc)]
    return LinMap(len(rows), width, [Vec.from_dense(r) for r in rows])


# ------------------------------------------------------------- fixtures


_SPACE_PROPS = {
    "field": {"const": "Q"},
    "dim": {"type": "integer", "minimum": 1},
    "names": {"type": "array", "items": {"type": "string"}},
    "parity": {"type": "array", "items": {"enum": [0, 1]}},
    "h": {"type": "array", "items": {"type": "array", "items": {"type": ["string", "integer"]}}},
}

_VALUE = {"type": "object", "additionalProperties": {"type": ["string", "integer"]}}

_HYPERCOM_SCHEMA = {
    "type": "object",
    "required": ["kind", "dim", "parity", "h", "ops"],
    "properties": {
        **_SPACE_PROPS,
        "kind": {"const": "hypercom"},
        "unit": {"oneOf": [{"type": "null"}, _VALUE]},
        "ops": {
            "type": "object",
            "additionalProperties": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["args", "value"],
                    "properties": {"args": {"type": "array", "items": {"type": "integer"}}, "value": _VALUE},
                },
            },
        },
    },
}

_PALGEBRA_SCHEMA = {
    "type": "object",
    "required": ["kind", "dim", "parity", "h", "tables"],
    "properties": {
        **_SPACE_PROPS,
        "kind": {"const": "palgebra"},
        "tables": {
            "type": "object",
            "additionalProperties": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["class", "args", "value"],
                    "properties": {
                        "class": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
                        "args": {"type": "array", "items": {"type": "integer"}},
                        "value": _VALUE,
                    },
                },
            },
        },
    },
}


def _vec_to_json(v) -> dict[str, str]:
    return {str(k): q(x) for k, x in sorted(v.items()) if x}


def _vec_from_json(doc: dict, where: str) -> dict[int, Scalar]:
    out = {}
    for k, x in doc.items():
        try:
            i = int(k)
        except ValueError:
            raise ParseError(f"{where}: bad basis index {k!r}") from None
        c = parse_q(x, f"{where}/{k}")
        if c:
            out[i] = c
    return out


def _space_to_json(L: SuperSpace) -> dict:
    return {
        "field": "Q",
        "dim": L.dim,
        "names": list(L.names),
        "parity": list(L.parity),
        "h": [[q(x) for x in r] for r in L.h],
    }


def _space_from_json(doc: dict) -> SuperSpace:
    h = [[parse_q(x, f"h[{i}][{j}]") for j, x in enumerate(r)] for i, r in enumerate(doc["h"])]
    try:
        return SuperSpace(doc["dim"], tuple(doc["parity"]), tuple(tuple(r) for r in h), tuple(doc.get("names", ())))
    except ValueError as exc:
        raise ParseError(f"space: {exc}") from None


def _arity(key: str, where: str) -> int:
    try:
        return int(key)
    except ValueError:
        raise ParseError(f"{where}: arity key {key!r} is not an integer") from None


def hypercom_to_json(data: HyperComData) -> dict:
    ops = {}
    for n in sorted(data.ops):
        ops[str(n)] = [
            {"args": list(args), "value": _vec_to_json(v)}
            for args, v in sorted(data.ops[n].items())
            if any(v.values())
        ]
    doc = {"kind": "hypercom", **_space_to_json(data.space), "ops": ops}
    doc["unit"] = _vec_to_json(data.unit) if data.unit is not None else None
    return doc


def hypercom_from_json(doc: Any) -> HyperComData:
    _validate(doc, _HYPERCOM_SCHEMA, "hypercom fixture")
    L = _space_from_json(doc)
    ops = {}
    for key, entries in doc["ops"].items():
        n = _arity(key, "ops")
        table = {}
        for e, entry in enumerate(entries):
            table[tuple(entry["args"])] = _vec_from_json(entry["value"], f"ops/{key}/{e}/value")
        ops[n] = table
    unit = doc.get("unit")
    try:
        return HyperComData(L, ops, _vec_from_json(unit, "unit") if unit is not None else None)
    except ValueError as exc:
        raise ParseError(f"hypercom fixture: {exc}") from None


def palgebra_to_json(data: PAlgebraData) -> dict:
    tables = {}
    for n in sorted(data.tables):
        basis = cohomology_basis(standard_model(n + 1))
        tables[str(n)] = [
            {"class": list(basis[b]), "args": list(args), "value": _vec_to_json(v)}
            for (b, args), v in sorted(data.tables[n].items())
            if any(v.values())
        ]
    return {"kind": "palgebra", **_space_to_json(data.space), "tables": tables}


def palgebra_from_json(doc: Any) -> PAlgebraData:
    _validate(doc, _PALGEBRA_SCHEMA, "palgebra fixture")
    L = _space_from_json(doc)
    tables = {}
    for key, entries in doc["tables"].items():
        n = _arity(key, "tables")
        if n < 2:
            raise ParseError(f"tables/{key}: arity below 2")
        basis = {c: i for i, c in enumerate(cohomology_basis(standard_model(n + 1)))}
        table = {}
        for e, entry in enumerate(entries):
            cls = tuple(entry["class"])
            if cls not in basis:
                raise ParseError(f"tables/{key}/{e}/class: no class {list(cls)} for arity {n}")
            table[(basis[cls], tuple(entry["args"]))] = _vec_from_json(entry["value"], f"tables/{key}/{e}/value")
        tables[n] = table
    try:
        return PAlgebraData(L, tables)
    except ValueError as exc:
        raise ParseError(f"palgebra fixture: {exc}") from None


# ------------------------------------------------------------------ files


def dumps(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def load_json(path: str | Path) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def resolve_fixture(name: str) -> Path:
    """A path as given if it exists, else a file of that name among the bundled fixtures."""
    p = Path(name)
    if p.exists():
        return p
    bundled = resources.files("quadrop") / "fixtures" / name
    if bundled.is_file():
        return Path(str(bundled))
    raise ParseError(f"{name}: no such file or bundled fixture")


def load_fixture(name: str) -> HyperComData | PAlgebraData:
    doc = load_json(resolve_fixture(name))
    kind = doc.get("kind") if isinstance(doc, dict) else None
    if kind == "hypercom":
        return hypercom_from_json(doc)
    if kind == "palgebra":
        return palgebra_from_json(doc)
    raise ParseError(f"{name}: 'kind' must be 'hypercom' or 'palgebra'")
