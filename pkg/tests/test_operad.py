import itertools
import json
import random
from importlib import resources

import pytest
import sympy

from quadrop.exactlin import TensorIndex
from quadrop.formats import hypercom_to_json, palgebra_to_json
from quadrop.moduli import standard_model
from quadrop.operad import (
    HyperComData,
    MalformedData,
    PAlgebraData,
    StableTree,
    SuperSpace,
    TreeError,
    associativity_sides,
    check_hypercom,
    check_m1_identity,
    check_p_algebra,
    cohomology_basis,
    contract_edge,
    frobenius_fixture,
    graft,
    is_isomorphic,
    koszul_sign,
    mutate_hypercom,
    opend_space,
    palgebra_from_hypercom,
    quantum_fixture,
    trivial_p_algebra,
)
from quadrop.trees import validate_tree


def two_vertex_tree():
    return StableTree.build([0, 1], [(0, 1)], {0: 0, 1: 0, 2: 1, 3: 1})


def chain3():
    return StableTree.build([0, 1, 2], [(0, 1), (1, 2)], {0: 0, 1: 0, 2: 1, 3: 2, 4: 2})


# ------------------------------------------------------------------ trees


def test_validate_tree_examples():
    assert validate_tree(StableTree.corolla([0, 1, 2]))[0]
    assert validate_tree(two_vertex_tree())[0]
    ok, diags = validate_tree(StableTree.build([0, 1], [(0, 1)], {0: 0, 1: 0, 2: 0, 3: 1}))
    assert not ok and any("valence" in d for d in diags)
    ok, diags = validate_tree(StableTree.build([0, 1], [], {0: 0, 1: 0, 2: 0, 3: 1, 4: 1, 5: 1}))
    assert not ok


def test_graft_examples():
    a = StableTree.corolla([0, 1, 9])
    b = StableTree.corolla([8, 2, 3])
    t = graft(a, b, 9, 8)
    assert is_isomorphic(t, two_vertex_tree())
    with pytest.raises(TreeError):
        graft(StableTree.build([0, 1], [(0, 1)], {0: 0, 1: 0, 2: 0, 3: 1}), b, 0, 8)


def test_graft_associative_in_disjoint_tails():
    a = StableTree.corolla([0, 1, 8, 9])
    b = StableTree.corolla([20, 2, 3])
    c = StableTree.corolla([21, 4, 5])
    t1 = graft(graft(a, b, 8, 20), c, 9, 21)
    t2 = graft(graft(a, c, 9, 21), b, 8, 20)
    assert is_isomorphic(t1, t2)


# ----------------------------------------------------------------- OpEnd


def test_opend_dims():
    L = SuperSpace(2, (0, 0), ((0, 1), (1, 0)))
    assert opend_space(L, StableTree.corolla([0, 1, 2])).size == 8
    assert opend_space(L, two_vertex_tree()).size == 64
    t = chain3()
    assert opend_space(L, t).size == 2 ** sum(t.valence(v) for v in t.vertices)


def test_contract_scalar():
    L = SuperSpace(1, (0,), ((1,),))
    f, small = contract_edge(L, two_vertex_tree(), 0)
    assert f.dense() == [[1]]
    assert len(small.vertices) == 1


def test_contract_chain_order_independent():
    L = SuperSpace(2, (0, 0), ((2, 1), (1, 3)))
    t = chain3()
    ids = [e.id for e in t.edges]
    f1, t1 = contract_edge(L, t, ids[0])
    g1, _ = contract_edge(L, t1, ids[1])
    f2, t2 = contract_edge(L, t, ids[1])
    g2, _ = contract_edge(L, t2, ids[0])
    assert g1.compose(f1) == g2.compose(f2)


def test_contract_matches_trace_pairing():
    h = sympy.Matrix([[2, 1], [1, 3]])
    hinv = h.inv()
    L = SuperSpace(2, (0, 0), ((2, 1), (1, 3)))
    t = two_vertex_tree()
    f, small = contract_edge(L, t, 0)
    flags = t.flags()
    idx = TensorIndex([2] * len(flags))
    keys = []
    for fl in flags:
        keys.append(("t", fl.tail) if fl.tail is not None else ("e", fl.vertex))
    tails_small = [fl.tail for fl in small.flags()]
    out_idx = TensorIndex([2] * len(tails_small))
    e_u, e_v = t.edges[0].u, t.edges[0].v
    for flat in range(idx.size):
        m = idx.unflat(flat)
        val = dict(zip(keys, m))
        coeff = hinv[val[("e", e_u)], val[("e", e_v)]]
        want = {out_idx.flat([val[("t", lab)] for lab in tails_small]): coeff} if coeff else {}
        got = {k: sympy.Rational(int(v.numerator), int(v.denominator)) for k, v in f.rows[flat].data.items()}
        assert got == want


def test_contract_rejects_degenerate():
    L = SuperSpace(2, (0, 0), ((1, 1), (1, 1)))
    with pytest.raises(ValueError):
        contract_edge(L, two_vertex_tree(), 0)


def test_koszul_sign():
    assert koszul_sign([1, 1], [1, 0]) == -1
    assert koszul_sign([1, 0], [1, 0]) == 1
    assert koszul_sign([1, 1, 1], [2, 0, 1]) == 1
    assert koszul_sign([1, 1, 1], [2, 1, 0]) == -1


# -------------------------------------------------------------- hyperCom


def test_frobenius_passes():
    rep = check_hypercom(frobenius_fixture())
    assert rep.ok, rep.to_json()
    assert "identity" in rep.checked
    assert {"associativity m=0", "associativity m=1", "associativity m=2", "associativity m=3"} <= set(rep.checked)


def test_quantum_passes():
    data = quantum_fixture(5)
    rep = check_hypercom(data)
    assert rep.ok, rep.to_json()
    assert check_m1_identity(data)


def _potential_correlators(max_args):
    x, y = sympy.symbols("x y")
    phi = x ** 2 * y / 2 + sympy.exp(y)
    var = {0: x, 1: y}
    out = {}
    for k in range(3, max_args + 1):
        for args in itertools.product((0, 1), repeat=k):
            expr = phi
            for a in args:
                expr = sympy.diff(expr, var[a])
            out[args] = expr.subs({x: 0, y: 0})
    return out


def test_quantum_matches_potential():
    data = quantum_fixture(5)
    corr = _potential_correlators(6)
    for args, want in corr.items():
        assert data.correlator(args) == int(want)


def test_quantum_binary_products():
    data = quantum_fixture(3)
    assert data.apply([{1: 1}, {1: 1}]) == {0: 1}
    assert data.apply([{1: 1}, {1: 1}, {1: 1}]) == {0: 1}
    assert data.apply([{0: 1}, {1: 1}]) == {1: 1}


def test_degenerate_form_reported():
    base = frobenius_fixture(3)
    L = SuperSpace(2, (0, 0), ((0, 1), (0, 0)))
    rep = check_hypercom(HyperComData(L, base.ops, base.unit))
    assert not rep.ok
    assert rep.violations[0].axiom == "form"
    props = {v.witness["property"] for v in rep.violations if v.axiom == "form"}
    assert props


def test_malformed_tables():
    L = SuperSpace(2, (0, 1), ((1, 0), (0, 1)))
    with pytest.raises(MalformedData):
        HyperComData(L, {2: {(0, 1): {0: 1}}})
    with pytest.raises(MalformedData):
        HyperComData(L, {1: {}})
    with pytest.raises(MalformedData):
        HyperComData(L, {2: {(0, 5): {}}})
    with pytest.raises(MalformedData):
        SuperSpace(2, (0,), ((1, 0), (0, 1)))


def test_m1_identity_detects_perturbation():
    data = quantum_fixture(4)
    ops = {n: {a: dict(v) for a, v in t.items()} for n, t in data.ops.items()}
    ops[3][(0, 1, 1)] = {1: 1}
    assert not check_m1_identity(HyperComData(data.space, ops, data.unit))


def test_associativity_m1_agrees_with_identity():
    data = quantum_fixture(4)
    for args in itertools.product(range(2), repeat=4):
        lhs, rhs = associativity_sides(data, args, 1)
        assert lhs == rhs


@pytest.mark.parametrize("builder", [frobenius_fixture, quantum_fixture])
def test_mutations_are_caught(builder):
    rng = random.Random(7)
    base = builder(5)
    for _ in range(10):
        bad, desc = mutate_hypercom(base, rng)
        rep = check_hypercom(bad)
        assert not rep.ok, desc
        assert rep.violations[0].witness


def test_partial_tables_are_not_checked():
    data = frobenius_fixture(3)
    rep = check_hypercom(data, n_max=5)
    assert rep.ok
    assert any("associativity" in s for s in rep.not_checked)


def test_report_json_is_plain():
    rep = check_hypercom(frobenius_fixture(3))
    json.dumps(rep.to_json())


# ------------------------------------------------------------ P-algebras


def test_trivial_palgebra_passes():
    rep = check_p_algebra(trivial_p_algebra(4))
    assert rep.ok, rep.to_json()
    assert "gluing n=4" in rep.checked and "equivariance n=4" in rep.checked


def test_quantum_induced_palgebra_passes():
    data = palgebra_from_hypercom(quantum_fixture(4), 4)
    rep = check_p_algebra(data)
    assert rep.ok, rep.to_json()
    # the coefficient of the top-degree class is the hyperCom operation itself
    q = quantum_fixture(4)
    top = len(cohomology_basis(standard_model(4))) - 1
    for args in itertools.product(range(2), repeat=3):
        assert data.mu(3, top, args) == {k: v for k, v in q.ops[3].get(args, {}).items() if v}


def test_broken_gluing_reported():
    base = trivial_p_algebra(4)
    tables = {n: dict(t) for n, t in base.tables.items()}
    tables[3][(0, (0, 0, 0))] = {0: 2}
    rep = check_p_algebra(PAlgebraData(base.space, tables))
    assert not rep.ok
    v = rep.violations[0]
    assert v.axiom == "gluing" and {"classes", "pulled_back", "glued"} <= set(v.witness)


def test_broken_equivariance_has_permutation():
    data = palgebra_from_hypercom(quantum_fixture(3), 3)
    tables = {n: dict(t) for n, t in data.tables.items()}
    key = next(k for k in sorted(tables[3]) if len(set(k[1])) > 1)
    b, args = key
    swapped = (b, (args[1], args[0], args[2]))
    tables[3][key], tables[3][swapped] = tables[3].get(swapped, {}), dict(tables[3][key])
    tables[3][key] = {k: v + 1 for k, v in tables[3][key].items()} or {0: 1}
    rep = check_p_algebra(PAlgebraData(data.space, tables))
    assert not rep.ok
    v = rep.violations[0]
    assert v.axiom == "equivariance" and "permutation" in v.witness


def test_palgebra_validation():
    L = SuperSpace(1, (0,), ((1,),))
    with pytest.raises(MalformedData):
        PAlgebraData(L, {3: {(99, (0, 0, 0)): {0: 1}}})


# ------------------------------------------------------------- fixtures


def _bundled(name):
    return json.loads((resources.files("quadrop") / "fixtures" / name).read_text())


def test_bundled_fixtures_match_builders():
    assert _bundled("frobenius_p1.json") == hypercom_to_json(frobenius_fixture(5))
    assert _bundled("quantum_p1.json") == hypercom_to_json(quantum_fixture(5))
    assert _bundled("trivial_palgebra.json") == palgebra_to_json(trivial_p_algebra(4))
    assert _bundled("quantum_p1_palgebra.json") == palgebra_to_json(palgebra_from_hypercom(quantum_fixture(4), 4))
