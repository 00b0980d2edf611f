"""Command-line front end: every command prints one JSON document on stdout.

Exit codes: 0 success, 1 a check failed, 2 usage or parse error, 3 resource
bound exceeded.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import re
import sys
from itertools import permutations
from typing import Any, Sequence

from . import __version__
from .exactlin import DimensionError, LinMap, Vec
from .formats import (
    ParseError,
    algebra_from_json,
    algebra_to_json,
    dumps,
    load_fixture,
    load_json,
    matrix_from_json,
    matrix_to_json,
    parse_q,
    q,
    resolve_fixture,
)
from .moduli import (
    ModuliError,
    component_algebra,
    delta_reduce,
    keel_presentation,
    model_for,
    one_edge_pullback,
    psi_class,
    sn_relabel,
    tree_comult,
)
from .operad import (
    HyperComData,
    PAlgebraData,
    check_hypercom,
    check_m1_identity,
    check_p_algebra,
    validate_tree,
)
from .qa_core import (
    QuadraticAlgebra,
    black,
    dual,
    free_algebra,
    free_product,
    image_of_relation,
    initial,
    is_morphism,
    polynomial_algebra,
    tensor_commuting,
    unit_black,
    unit_white,
    white,
)
from .qa_enrich import (
    ResourceBoundExceeded,
    adjoint_mate,
    composition_map,
    counit_e,
    hom_object,
    quantised_action_space,
    unit_j,
)
from .qa_series import degree_dims, forced_dual_dims, koszul_numeric_check
from .trees import StableTree, TreeError, tree_from_splits

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BOUND = 0, 1, 2, 3


class UsageError(ValueError):
    pass


# -------------------------------------------------------------- inputs


_REF = re.compile(r"^(keel:m=(\d+)|free:(\d+)|poly:(\d+)|P:(\d+)|unit-black|unit-white|initial)$")


def resolve_algebra(ref: str, digest: list[bytes], max_marks: int | None = None) -> QuadraticAlgebra:
    """Built-in reference or path to an algebra JSON file."""
    m = _REF.match(ref)
    digest.append(ref.encode())
    if m:
        if m.group(2):
            return keel_presentation(int(m.group(2)), max_marks=max_marks)[1]
        if m.group(3):
            return free_algebra(int(m.group(3)))
        if m.group(4):
            return polynomial_algebra(int(m.group(4)))
        if m.group(5):
            return component_algebra(int(m.group(5)))
        return {"unit-black": unit_black, "unit-white": unit_white, "initial": initial}[ref]()
    doc = load_json(ref)
    digest.append(dumps(doc).encode())
    return algebra_from_json(doc)


def parse_json_arg(text: str, what: str, digest: list[bytes]) -> Any:
    """Inline JSON, or @path to read it from a file."""
    if text.startswith("@"):
        doc = load_json(text[1:])
    else:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{what}: column {exc.colno}: {exc.msg}") from None
    digest.append(dumps(doc).encode())
    return doc


def parse_int_list(text: str, what: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise ParseError(f"{what}: expected comma-separated integers, got {text!r}") from None


def labels_for(args, m: int) -> tuple[int, ...]:
    if args.labels is None:
        return tuple(range(m))
    labels = tuple(parse_int_list(args.labels, "--labels"))
    if len(labels) != m or len(set(labels)) != m:
        raise UsageError(f"--labels must list {m} distinct labels")
    return labels


def _model(args):
    if not 4 <= args.m <= (args.max_marks or 7):
        raise ModuliError(f"m={args.m} outside the supported range 4..{args.max_marks or 7}")
    return model_for(tuple(sorted(labels_for(args, args.m))))


def _set(s) -> list[int]:
    return sorted(s)


def _first_bad_relation(f: LinMap, A: QuadraticAlgebra, B: QuadraticAlgebra) -> dict | None:
    for i, r in enumerate(A.relations.basis):
        img = image_of_relation(f, r, A.dim1)
        if not B.relations.contains(img):
            return {"relation_index": i, "image": {str(k): q(x) for k, x in sorted(img.data.items())}}
    return None


def _vec_json(v: Vec) -> dict[str, str]:
    return {str(k): q(x) for k, x in sorted(v.data.items())}


# ------------------------------------------------------------ commands


def cmd_qa(args, digest) -> tuple[dict, int]:
    op = args.qa_cmd
    mm = args.max_marks
    if op == "dual":
        return {"algebra": algebra_to_json(dual(resolve_algebra(args.algebra, digest, mm)))}, EXIT_OK
    if op in ("black", "white", "tensor", "freeprod"):
        A = resolve_algebra(args.left, digest, mm)
        B = resolve_algebra(args.right, digest, mm)
        if op == "black":
            out = black(A, B)
        elif op == "white":
            out = white(A, B)
        elif op == "freeprod":
            out = free_product(A, B)
        else:
            out = tensor_commuting(A, B, args.sign)
        return {"algebra": algebra_to_json(out)}, EXIT_OK
    if op == "hom":
        H = hom_object(resolve_algebra(args.source, digest, mm), resolve_algebra(args.target, digest, mm))
        return {"algebra": algebra_to_json(H.algebra), "index": list(H.index.factor_dims)}, EXIT_OK
    if op == "dims":
        A = resolve_algebra(args.algebra, digest, mm)
        dd = degree_dims(A, args.max_degree, method=args.method)
        return {"dims": list(dd.dims)}, EXIT_OK
    if op == "koszul":
        A = resolve_algebra(args.algebra, digest, mm)
        rep = koszul_numeric_check(A, args.max_degree, method=args.method)
        return {
            "dims": list(rep.dims),
            "dual_dims": list(rep.dual_dims),
            "residual": list(rep.coefficients),
            "forced_dual_dims": list(forced_dual_dims(rep.dims)),
            "consistent": rep.consistent,
        }, EXIT_OK
    if op == "is-morphism":
        A = resolve_algebra(args.source, digest, mm)
        B = resolve_algebra(args.target, digest, mm)
        f = matrix_from_json(parse_json_arg(args.map, "--map", digest), B.dim1)
        if f.src_dim != A.dim1:
            raise UsageError(f"--map has {f.src_dim} rows, source has dim1 = {A.dim1}")
        ok = is_morphism(f, A, B)
        out = {"is_morphism": ok}
        if not ok:
            out["witness"] = _first_bad_relation(f, A, B)
        return out, EXIT_OK if ok else EXIT_FAIL
    if op == "mate":
        A = resolve_algebra(args.a, digest, mm)
        B = resolve_algebra(args.b, digest, mm)
        C = resolve_algebra(args.c, digest, mm)
        f = matrix_from_json(parse_json_arg(args.map, "--map", digest), C.dim1)
        g = adjoint_mate(f, A.dim1, B.dim1, C.dim1)
        left = is_morphism(f, black(A, B), C)
        right = is_morphism(g, A, hom_object(B, C).algebra)
        return {
            "mate": matrix_to_json(g),
            "is_morphism_black_source": left,
            "is_morphism_hom_target": right,
            "agree": left == right,
        }, EXIT_OK if left == right else EXIT_FAIL
    raise UsageError(f"unknown qa command {op}")


def _class_json(model, coords: Vec) -> list[list[str]]:
    names = model.h2_basis_names()
    return [[q(c), names[i]] for i, c in sorted(coords.data.items())]


def _parse_delta_expr(doc, where: str) -> list[tuple[Any, list[int]]]:
    if not isinstance(doc, list):
        raise ParseError(f"{where}: expected a list of [coefficient, subset] pairs")
    out = []
    for i, t in enumerate(doc):
        if not (isinstance(t, list) and len(t) == 2 and isinstance(t[1], list)):
            raise ParseError(f"{where}[{i}]: expected [coefficient, [labels...]]")
        out.append((parse_q(t[0], f"{where}[{i}][0]"), t[1]))
    return out


def _ring_terms(pb, d: int, row: Vec) -> list[list[Any]]:
    keys = pb.ring_map.target.basis(d)
    out = []
    for j, c in sorted(row.data.items()):
        (d1, i1), (d2, i2) = keys[j]
        out.append([q(c), [d1, i1], [d2, i2]])
    return out


def cmd_moduli(args, digest) -> tuple[dict, int]:
    op = args.moduli_cmd
    digest.append(repr(sorted(vars(args).items(), key=lambda kv: kv[0])).encode())
    if op == "present":
        model, A = keel_presentation(args.m, labels_for(args, args.m), max_marks=args.max_marks)
        return {
            "m": args.m,
            "n": args.m - 1,
            "dim1": A.dim1,
            "num_relations": A.num_relations,
            "graded_dims": list(model.graded_dims()),
            "algebra": algebra_to_json(A),
        }, EXIT_OK
    if op == "reduce":
        model = _model(args)
        expr = _parse_delta_expr(parse_json_arg(args.expr, "--expr", digest), "--expr")
        cls = delta_reduce(model, expr)
        return {"coordinates": _vec_json(cls.coords), "class": _class_json(model, cls.coords)}, EXIT_OK
    if op == "psi":
        model = _model(args)
        cls = psi_class(model, args.i, args.j, args.k)
        return {"coordinates": _vec_json(cls.coords), "class": _class_json(model, cls.coords)}, EXIT_OK
    if op == "pullback":
        model = _model(args)
        S0 = parse_int_list(args.subset, "--subset")
        pb = one_edge_pullback(model, S0, args.bullet, args.star)
        images = []
        for i, T in enumerate(model.delta_index):
            img = pb.ring_map.generator_images[i]
            keys = sorted(img)
            images.append(
                {"delta": _set(T), "image": [[q(img[k]), list(k[0]), list(k[1])] for k in keys]}
            )
        out = {
            "subset": _set(pb.subset),
            "bullet": pb.bullet,
            "star": pb.star,
            "left_labels": list(pb.left.labels),
            "right_labels": list(pb.right.labels),
            "left_h2_basis": list(pb.left.h2_basis_names()) if pb.left.m > 3 else [],
            "right_h2_basis": list(pb.right.h2_basis_names()) if pb.right.m > 3 else [],
            "delta_images": images,
            "matrices": [matrix_to_json(mat) for mat in pb.ring_map.matrices],
            "kills_linear_relations": pb.kills_linear_relations,
            "kills_crossing_products": pb.kills_crossing_products,
        }
        return out, EXIT_OK if pb.well_defined else EXIT_FAIL
    if op == "comult":
        splits = parse_json_arg(args.splits, "--splits", digest)
        tree = tree_from_splits(range(args.n + 1), splits)
        order = parse_int_list(args.edge_order, "--edge-order") if args.edge_order else None
        c = tree_comult(args.n, tree, order)
        out = {
            "n": args.n,
            "tree": _tree_json(tree),
            "factor_arities": [f.m - 1 for f in c.factors],
            "target_dim1": c.target.dim1,
            "matrix": matrix_to_json(c.map),
            "is_morphism": c.is_morphism,
        }
        ok = out["is_morphism"]
        if args.check_orders:
            maps = {tree_comult(args.n, tree, o).map for o in permutations([e.id for e in tree.edges])}
            out["order_independent"] = len(maps) == 1
            ok = ok and out["order_independent"]
        return out, EXIT_OK if ok else EXIT_FAIL
    if op == "relabel":
        model = _model(args)
        perm = parse_int_list(args.perm, "--perm")
        mor = sn_relabel(model, perm, fix_output=not args.any_label)
        sq = mor.map.compose(mor.map)
        power, acc = 1, mor.map
        while acc != LinMap.identity(acc.src_dim) and power < 5040:
            acc = acc.compose(mor.map)
            power += 1
        return {"matrix": matrix_to_json(mor.map), "is_morphism": True, "order": power,
                "square_is_identity": sq == LinMap.identity(sq.src_dim)}, EXIT_OK
    raise UsageError(f"unknown moduli command {op}")


def _tree_json(t: StableTree) -> dict:
    return {
        "vertices": list(t.vertices),
        "edges": [[e.u, e.v] for e in t.edges],
        "tails": {str(lab): v for lab, v in t.tails},
    }


def _tree_from_json(doc) -> StableTree:
    if not isinstance(doc, dict) or not {"vertices", "edges", "tails"} <= set(doc):
        raise ParseError("--tree: expected an object with vertices, edges and tails")
    try:
        return StableTree.build(
            [int(v) for v in doc["vertices"]],
            [(int(u), int(v)) for u, v in doc["edges"]],
            {int(k): int(v) for k, v in doc["tails"].items()},
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(f"--tree: {exc}") from None


def cmd_check(args, digest) -> tuple[dict, int]:
    op = args.check_cmd
    if op == "tree":
        tree = _tree_from_json(parse_json_arg(args.tree, "--tree", digest))
        ok, diags = validate_tree(tree)
        return {"valid": ok, "diagnostics": diags}, EXIT_OK if ok else EXIT_FAIL
    path = resolve_fixture(args.fixture)
    digest.append(path.name.encode())
    digest.append(dumps(load_json(path)).encode())
    data = load_fixture(args.fixture)
    if op == "hypercom":
        if not isinstance(data, HyperComData):
            raise UsageError("fixture is not a hypercom fixture")
        rep = check_hypercom(data, args.n_max)
        out = rep.to_json()
        if 2 in data.ops and 3 in data.ops:
            out["m1_identity"] = check_m1_identity(data)
            ok = rep.ok and out["m1_identity"]
        else:
            ok = rep.ok
        return out, EXIT_OK if ok else EXIT_FAIL
    if op == "palgebra":
        if not isinstance(data, PAlgebraData):
            raise UsageError("fixture is not a palgebra fixture")
        rep = check_p_algebra(data, args.n_max)
        return rep.to_json(), EXIT_OK if rep.ok else EXIT_FAIL
    raise UsageError(f"unknown check command {op}")


def cmd_enrich(args, digest) -> tuple[dict, int]:
    op = args.enrich_cmd
    mm = args.max_marks
    if op == "j":
        A = resolve_algebra(args.algebra, digest, mm)
        elem, mor = unit_j(A)
        return {"element": _vec_json(elem.d), "valid": elem.valid, "is_morphism": True}, EXIT_OK if elem.valid else EXIT_FAIL
    if op == "mu":
        A = resolve_algebra(args.a, digest, mm)
        B = resolve_algebra(args.b, digest, mm)
        C = resolve_algebra(args.c, digest, mm)
        hab, hbc, hac = hom_object(A, B).algebra, hom_object(B, C).algebra, hom_object(A, C).algebra
        src = black(hbc, hab) if args.order == "BC,AB" else black(hab, hbc)
        f = composition_map(A.dim1, B.dim1, C.dim1, args.order)
        ok = is_morphism(f, src, hac)
        return {"matrix": matrix_to_json(f), "order": args.order, "is_morphism": ok}, EXIT_OK if ok else EXIT_FAIL
    if op == "e":
        B = resolve_algebra(args.source, digest, mm)
        C = resolve_algebra(args.target, digest, mm)
        e = counit_e(B, C)
        return {"matrix": matrix_to_json(e.map), "is_morphism": True}, EXIT_OK
    if op == "action-space":
        Pn = resolve_algebra(args.pn, digest, mm)
        Q = resolve_algebra(args.q, digest, mm)
        S = quantised_action_space(Pn, Q, args.n)
        out = {"dim1": S.dim1, "num_relations": S.num_relations}
        if args.full:
            out["algebra"] = algebra_to_json(S)
        return out, EXIT_OK
    raise UsageError(f"unknown enrich command {op}")


# -------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="quadrop", description="Quadratic algebras and the genus-zero moduli cooperad.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--max-marks", type=int, default=None, help="raise the m <= 7 bound on moduli computations")
    top = p.add_subparsers(dest="group", required=True, parser_class=_Parser)

    qa = top.add_parser("qa", help="quadratic algebra operations")
    qs = qa.add_subparsers(dest="qa_cmd", required=True, parser_class=_Parser)
    s = qs.add_parser("dual")
    s.add_argument("--algebra", required=True)
    for name in ("black", "white", "tensor", "freeprod"):
        s = qs.add_parser(name)
        s.add_argument("--left", required=True)
        s.add_argument("--right", required=True)
        if name == "tensor":
            s.add_argument("--sign", type=int, choices=(1, -1), default=1)
    s = qs.add_parser("hom")
    s.add_argument("--source", required=True)
    s.add_argument("--target", required=True)
    for name in ("dims", "koszul"):
        s = qs.add_parser(name)
        s.add_argument("--algebra", required=True)
        s.add_argument("--max-degree", type=int, required=True)
        s.add_argument("--method", choices=("quotient", "tensor"), default="quotient")
    s = qs.add_parser("is-morphism")
    s.add_argument("--source", required=True)
    s.add_argument("--target", required=True)
    s.add_argument("--map", required=True, help="JSON rows (one per source generator) or @file")
    s = qs.add_parser("mate")
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.add_argument("--c", required=True)
    s.add_argument("--map", required=True, help="JSON rows for A(x)B -> C, row index a*dim(B)+b")

    mo = top.add_parser("moduli", help="Keel rings and the cooperad maps")
    ms = mo.add_subparsers(dest="moduli_cmd", required=True, parser_class=_Parser)
    for name in ("present", "reduce", "psi", "pullback", "relabel"):
        s = ms.add_parser(name)
        s.add_argument("--m", type=int, required=True)
        s.add_argument("--labels", default=None, help="comma-separated mark labels (default 0..m-1)")
        if name == "reduce":
            s.add_argument("--expr", required=True, help='JSON [[coeff, [labels]], ...] or @file')
        if name == "psi":
            s.add_argument("--i", type=int, required=True)
            s.add_argument("--j", type=int, required=True)
            s.add_argument("--k", type=int, required=True)
        if name == "pullback":
            s.add_argument("--subset", required=True)
            s.add_argument("--bullet", type=int, default=None)
            s.add_argument("--star", type=int, default=None)
        if name == "relabel":
            s.add_argument("--perm", required=True, help="image of each label, in label order")
            s.add_argument("--any-label", action="store_true", help="allow moving the output label")
    s = ms.add_parser("comult")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--splits", required=True, help="JSON list of input blocks, e.g. [[1,2],[3,4,5]]")
    s.add_argument("--edge-order", default=None)
    s.add_argument("--check-orders", action="store_true")

    ch = top.add_parser("check", help="axiom checkers")
    cs = ch.add_subparsers(dest="check_cmd", required=True, parser_class=_Parser)
    for name in ("hypercom", "palgebra"):
        s = cs.add_parser(name)
        s.add_argument("--fixture", required=True)
        s.add_argument("--n-max", type=int, default=None)
    s = cs.add_parser("tree")
    s.add_argument("--tree", required=True, help='JSON {"vertices":..,"edges":..,"tails":{label: vertex}} or @file')

    en = top.add_parser("enrich", help="enrichment data")
    es = en.add_subparsers(dest="enrich_cmd", required=True, parser_class=_Parser)
    s = es.add_parser("j")
    s.add_argument("--algebra", required=True)
    s = es.add_parser("mu")
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.add_argument("--c", required=True)
    s.add_argument("--order", choices=("BC,AB", "AB,BC"), default="BC,AB")
    s = es.add_parser("e")
    s.add_argument("--source", required=True)
    s.add_argument("--target", required=True)
    s = es.add_parser("action-space")
    s.add_argument("--pn", required=True)
    s.add_argument("--q", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--full", action="store_true", help="include the relation subspace")
    return p


_DISPATCH = {"qa": cmd_qa, "moduli": cmd_moduli, "check": cmd_check, "enrich": cmd_enrich}


def run(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    argv = list(sys.argv[1:] if argv is None else argv)
    digest: list[bytes] = [dumps(argv).encode()]
    try:
        args = build_parser().parse_args(argv)
        result, code = _DISPATCH[args.group](args, digest)
    except ResourceBoundExceeded as exc:
        result, code = {"error": "resource bound exceeded", "detail": str(exc)}, EXIT_BOUND
    except (UsageError, ParseError, ModuliError, TreeError, DimensionError, ValueError) as exc:
        result, code = {"error": type(exc).__name__, "detail": str(exc)}, EXIT_USAGE
    doc = {
        **result,
        "command": argv[:2],
        "engine_version": __version__,
        "input_digest": hashlib.sha256(b"\0".join(digest)).hexdigest(),
        "exit_code": code,
    }
    out.write(dumps(doc) + "\n")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
