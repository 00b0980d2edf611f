"""OpEnd spaces, cyclic hyperCom algebras and gluing-compatible P-algebras.

Super signs follow the Koszul rule: moving homogeneous items past each other
contributes (-1)^(|a||b|) per transposed pair.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Iterable, Mapping, Sequence

from .exactlin import ONE, ZERO, LinMap, Scalar, TensorIndex, Vec, _axpy, scalar, solve_combination
from .moduli import KeelModel, model_for, one_edge_pullback, relabel_map, standard_model
from .trees import (  # noqa: F401  re-exported
    Edge,
    Flag,
    StableTree,
    TreeError,
    compatible_split_sets,
    contract,
    graft,
    is_isomorphic,
    require_valid,
    tree_from_splits,
    two_level_trees,
    validate_tree,
)

SparseVec = dict[int, Scalar]


class MalformedData(ValueError):
    pass


class DegenerateForm(ValueError):
    pass


def koszul_sign(parities: Sequence[int], order: Sequence[int]) -> int:
    """Sign of listing items ``order`` (a permutation of positions) given their parities."""
    s = 0
    for x in range(len(order)):
        px = parities[order[x]]
        if not px:
            continue
        for y in range(x + 1, len(order)):
            if order[y] < order[x] and parities[order[y]]:
                s ^= 1
    return -1 if s else 1


def _invert(rows: Sequence[Sequence[Scalar]]) -> list[list[Scalar]] | None:
    n = len(rows)
    gens = [Vec(n, {j: x for j, x in enumerate(r)}) for r in rows]
    out = []
    for j in range(n):
        c = solve_combination(gens, Vec.basis(n, j))
        if c is None:
            return None
        out.append(c)
    return out


# ---------------------------------------------------------------- spaces


@dataclass(frozen=True)
class SuperSpace:
    """Basis e_0..e_{dim-1} with parities and a scalar product matrix h."""

    dim: int
    parity: tuple[int, ...]
    h: tuple[tuple[Scalar, ...], ...]
    names: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "parity", tuple(int(p) for p in self.parity))
        object.__setattr__(self, "h", tuple(tuple(scalar(x) for x in r) for r in self.h))
        if not self.names:
            object.__setattr__(self, "names", tuple(f"e{i}" for i in range(self.dim)))
        if len(self.parity) != self.dim or len(self.h) != self.dim or any(len(r) != self.dim for r in self.h):
            raise MalformedData("parity/h sizes do not match dim")
        if any(p not in (0, 1) for p in self.parity):
            raise MalformedData("parities must be 0 or 1")

    def form_problems(self) -> list[dict]:
        """Evenness, super-symmetry and non-degeneracy of h, as a list of witnesses."""
        out = []
        for a in range(self.dim):
            for b in range(self.dim):
                x = self.h[a][b]
                if x and self.parity[a] != self.parity[b]:
                    out.append({"property": "even", "entry": [a, b], "value": str(x)})
                sign = -1 if self.parity[a] and self.parity[b] else 1
                if x != sign * self.h[b][a]:
                    out.append({"property": "super-symmetric", "entry": [a, b], "value": str(x)})
        if self.inverse() is None:
            out.append({"property": "non-degenerate", "entry": None, "value": "singular"})
        return out

    def inverse(self) -> list[list[Scalar]] | None:
        return _invert(self.h)

    def ginv(self) -> list[list[Scalar]]:
        g = self.inverse()
        if g is None:
            raise DegenerateForm("scalar product is degenerate")
        return g

    def pair(self, x: Mapping[int, Scalar], y: Mapping[int, Scalar]) -> Scalar:
        s = ZERO
        for a, u in x.items():
            for b, v in y.items():
                s += u * v * self.h[a][b]
        return s

    @property
    def purely_even(self) -> bool:
        return not any(self.parity)


def opend_space(L: SuperSpace, tree: StableTree) -> TensorIndex:
    """L^(x)F_tau with one factor per flag, in the tree's canonical flag order."""
    require_valid(tree)
    return TensorIndex([L.dim] * len(tree.flags()))


def _flag_key(tree: StableTree, f: Flag):
    if f.tail is not None:
        return ("t", f.tail)
    return ("e", f.edge, f.vertex == tree.edge(f.edge).u)


def contract_edge(L: SuperSpace, tree: StableTree, eid: int) -> tuple[LinMap, StableTree]:
    """L^(x)F_tau -> L^(x)F_{tau/e}: pair the two flags of ``eid`` with h^{-1}."""
    g = L.ginv()
    flags = tree.flags()
    small = contract(tree, eid)
    keys = [_flag_key(tree, f) for f in flags]
    e_pos = [i for i, f in enumerate(flags) if f.edge == eid]
    p, q = e_pos
    small_keys = [_flag_key(small, f) for f in small.flags()]
    where = {k: i for i, k in enumerate(keys)}
    rest = [where[k] for k in small_keys]
    order = [p, q] + rest
    src = TensorIndex([L.dim] * len(flags))
    dst = TensorIndex([L.dim] * len(rest))
    rows = []
    for flat in range(src.size):
        idx = src.unflat(flat)
        c = g[idx[p]][idx[q]]
        if not c:
            rows.append(Vec._raw(dst.size, {}))
            continue
        sign = koszul_sign([L.parity[i] for i in idx], order)
        rows.append(Vec(dst.size, {dst.flat([idx[r] for r in rest]): c * sign}))
    return LinMap(src.size, dst.size, rows), small


# ------------------------------------------------------------- hyperCom


OpTable = dict[tuple[int, ...], SparseVec]


@dataclass
class HyperComData:
    space: SuperSpace
    ops: dict[int, OpTable]
    unit: SparseVec | None = None

    def __post_init__(self):
        L = self.space
        for n, table in self.ops.items():
            if n < 2:
                raise MalformedData(f"operation arity {n} < 2")
            for args, val in table.items():
                if len(args) != n or any(not 0 <= a < L.dim for a in args):
                    raise MalformedData(f"bad argument tuple {args} in arity {n}")
                for k in val:
                    if not 0 <= k < L.dim:
                        raise MalformedData(f"output index {k} out of range")
                    if L.parity[k] != sum(L.parity[a] for a in args) % 2:
                        raise MalformedData(f"entry {args} -> e{k} is not parity-homogeneous")
        if self.unit is not None and any(L.parity[k] for k in self.unit):
            raise MalformedData("identity element must be even")

    @property
    def n_max(self) -> int:
        return max(self.ops, default=1)

    def apply(self, args: Sequence[Mapping[int, Scalar]]) -> SparseVec:
        table = self.ops.get(len(args))
        if table is None:
            raise KeyError(len(args))
        out: SparseVec = {}
        for combo in product(*[list(a.items()) for a in args]):
            idx = tuple(i for i, _ in combo)
            val = table.get(idx)
            if not val:
                continue
            c = ONE
            for _, x in combo:
                c *= x
            _axpy(out, c, val)
        return out

    def correlator(self, args: Sequence[int]) -> Scalar:
        """h((g_1, ..., g_n), g_{n+1}) on basis indices."""
        return self.space.pair(self.ops.get(len(args) - 1, {}).get(tuple(args[:-1]), {}), {args[-1]: ONE})


@dataclass
class Violation:
    axiom: str
    witness: dict

    def to_json(self) -> dict:
        return {"axiom": self.axiom, "witness": self.witness}


@dataclass
class CheckReport:
    violations: list[Violation] = field(default_factory=list)
    checked: list[str] = field(default_factory=list)
    not_checked: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [v.to_json() for v in self.violations],
            "checked": self.checked,
            "not_checked": self.not_checked,
        }


def _vec_json(v: Mapping[int, Scalar]) -> dict[str, str]:
    return {str(k): str(x) for k, x in sorted(v.items()) if x}


def _clean(v: Mapping[int, Scalar]) -> SparseVec:
    return {k: x for k, x in v.items() if x}


def _e(i: int) -> SparseVec:
    return {i: ONE}


def check_hypercom(data: HyperComData, n_max: int | None = None, unit_law: bool = True) -> CheckReport:
    """Form, commutativity, cyclicity, associativity and identity checks; first failing instance per axiom."""
    L = data.space
    n_max = data.n_max if n_max is None else n_max
    rep = CheckReport()
    for p in L.form_problems():
        rep.violations.append(Violation("form", p))
        break
    rep.checked.append("form")
    arities = [n for n in range(2, n_max + 1) if n in data.ops]
    for n in range(2, n_max + 1):
        if n not in data.ops:
            rep.not_checked.append(f"arity {n}: no table")

    # symmetry of each operation under adjacent transpositions
    first = _first_symmetry_failure(data, arities, correlator=False)
    if first:
        rep.violations.append(Violation("commutativity", first))
    rep.checked.append("commutativity")

    # symmetry of the correlators h((g_1..g_n), g_{n+1})
    first = _first_symmetry_failure(data, arities, correlator=True)
    if first:
        rep.violations.append(Violation("cyclicity", first))
    rep.checked.append("cyclicity")

    # associativity for every m whose terms stay inside the available arities
    for m in range(0, max(n_max - 1, 0)):
        if not set(range(2, m + 3)) <= set(arities):
            rep.not_checked.append(f"associativity m={m}")
            continue
        w = _first_associativity_failure(data, m)
        rep.checked.append(f"associativity m={m}")
        if w:
            rep.violations.append(Violation("associativity", w))
            break

    # identity element
    if data.unit is not None and unit_law:
        w = _first_unit_failure(data, arities)
        rep.checked.append("identity")
        if w:
            rep.violations.append(Violation("identity", w))
    elif unit_law:
        rep.not_checked.append("identity: no element supplied")
    return rep


def _first_symmetry_failure(data: HyperComData, arities: Iterable[int], correlator: bool) -> dict | None:
    L = data.space
    for n in arities:
        slots = n + 1 if correlator else n
        for args in product(range(L.dim), repeat=slots):
            for k in range(slots - 1):
                if args[k] == args[k + 1]:
                    continue
                sw = list(args)
                sw[k], sw[k + 1] = sw[k + 1], sw[k]
                sign = -1 if L.parity[args[k]] and L.parity[args[k + 1]] else 1
                if correlator:
                    a, b = data.correlator(args), data.correlator(sw)
                    if b != sign * a:
                        return {"arity": n, "args": list(args), "swap": [k, k + 1], "value": str(a), "swapped": str(b)}
                else:
                    table = data.ops[n]
                    a = _clean(table.get(tuple(args), {}))
                    b = _clean(table.get(tuple(sw), {}))
                    if b != {i: sign * x for i, x in a.items()}:
                        return {
                            "arity": n,
                            "args": list(args),
                            "swap": [k, k + 1],
                            "value": _vec_json(a),
                            "swapped": _vec_json(b),
                        }
    return None


def associativity_sides(data: HyperComData, args: Sequence[int], m: int) -> tuple[SparseVec, SparseVec]:
    """Both sides of the associativity identity for (alpha, beta, gamma, delta_1..delta_m) = args."""
    par = [data.space.parity[a] for a in args]
    al, be, ga = 0, 1, 2
    ds = list(range(3, 3 + m))
    lhs: SparseVec = {}
    rhs: SparseVec = {}
    for r in range(m + 1):
        for S1 in combinations(ds, r):
            S2 = [d for d in ds if d not in S1]
            order = [al, be, *S1, ga, *S2]
            inner = data.apply([_e(args[i]) for i in (al, be, *S1)])
            if inner:
                val = data.apply([inner, _e(args[ga])] + [_e(args[i]) for i in S2])
                _axpy(lhs, scalar(koszul_sign(par, order)), val)
            order = [al, *S1, be, ga, *S2]
            inner = data.apply([_e(args[i]) for i in (be, ga, *S2)])
            if inner:
                val = data.apply([_e(args[al])] + [_e(args[i]) for i in S1] + [inner])
                _axpy(rhs, scalar(koszul_sign(par, order)), val)
    return lhs, rhs


def _first_associativity_failure(data: HyperComData, m: int) -> dict | None:
    for args in product(range(data.space.dim), repeat=3 + m):
        lhs, rhs = associativity_sides(data, args, m)
        if lhs != rhs:
            return {"m": m, "args": list(args), "lhs": _vec_json(lhs), "rhs": _vec_json(rhs)}
    return None


def _first_unit_failure(data: HyperComData, arities: Sequence[int]) -> dict | None:
    L = data.space
    e = data.unit
    for n in arities:
        for rest in product(range(L.dim), repeat=n - 1):
            got = data.apply([e] + [_e(i) for i in rest])
            want = _e(rest[0]) if n == 2 else {}
            if got != want:
                return {"arity": n, "args": ["e", *rest], "value": _vec_json(got), "expected": _vec_json(want)}
    return None


def check_m1_identity(data: HyperComData) -> bool:
    """((a,b),c,d) + ((a,b,d),c) = (a,(b,c,d)) + (a,d,(b,c)) on all basis quadruples."""
    L = data.space
    p = L.parity
    for a, b, c, d in product(range(L.dim), repeat=4):
        A, B, C, D = _e(a), _e(b), _e(c), _e(d)
        lhs: SparseVec = {}
        _axpy(lhs, ONE, data.apply([data.apply([A, B]), C, D]))
        _axpy(lhs, scalar(-1 if p[c] and p[d] else 1), data.apply([data.apply([A, B, D]), C]))
        rhs: SparseVec = {}
        _axpy(rhs, ONE, data.apply([A, data.apply([B, C, D])]))
        _axpy(rhs, scalar(-1 if p[d] and (p[b] + p[c]) % 2 else 1), data.apply([A, D, data.apply([B, C])]))
        if lhs != rhs:
            return False
    return True


# -------------------------------------------------------------- fixtures


def _p1_space() -> SuperSpace:
    return SuperSpace(2, (0, 0), ((0, 1), (1, 0)), ("1", "w"))


def frobenius_fixture(n_max: int = 5) -> HyperComData:
    """H*(P^1) with cup product; all higher operations vanish."""
    ops: dict[int, OpTable] = {2: {(0, 0): {0: ONE}, (0, 1): {1: ONE}, (1, 0): {1: ONE}}}
    for n in range(3, n_max + 1):
        ops[n] = {}
    return HyperComData(_p1_space(), ops, {0: ONE})


def p1_quantum_correlator(args: Sequence[int]) -> Scalar:
    """Derivatives at 0 of x^2 y / 2 + e^y, with e_0 <-> x and e_1 <-> y (k >= 3 arguments)."""
    nx = sum(1 for a in args if a == 0)
    ny = len(args) - nx
    if nx == 2 and ny == 1:
        return ONE
    if nx == 0 and ny >= 3:
        return ONE
    return ZERO


def hypercom_from_correlators(L: SuperSpace, corr, n_max: int, unit: SparseVec | None = None) -> HyperComData:
    """(g_1..g_n) = sum_{a,b} corr(g_1..g_n, e_a) h^{ab} e_b."""
    g = L.ginv()
    ops: dict[int, OpTable] = {}
    for n in range(2, n_max + 1):
        table: OpTable = {}
        for args in product(range(L.dim), repeat=n):
            out: SparseVec = {}
            for a in range(L.dim):
                c = corr(tuple(args) + (a,))
                if c:
                    for b in range(L.dim):
                        if g[a][b]:
                            out[b] = out.get(b, ZERO) + c * g[a][b]
            out = _clean(out)
            if out:
                table[tuple(args)] = out
        ops[n] = table
    return HyperComData(L, ops, unit)


def quantum_fixture(n_max: int = 5) -> HyperComData:
    return hypercom_from_correlators(_p1_space(), p1_quantum_correlator, n_max, {0: ONE})


def mutable_entries(data: HyperComData) -> list[tuple[int, tuple[int, ...]]]:
    """(arity, args) with non-constant args: changing one of these alone breaks symmetry.

    Constant tuples such as (w, ..., w) are genuine free parameters of the
    structure, so single-entry changes there need not violate anything.
    """
    out = []
    for n in sorted(data.ops):
        for args in product(range(data.space.dim), repeat=n):
            if len(set(args)) > 1:
                out.append((n, args))
    return out


def mutate_hypercom(data: HyperComData, rng: random.Random) -> tuple[HyperComData, dict]:
    """Copy of ``data`` with one non-constant table entry shifted by a nonzero rational."""
    n, args = rng.choice(mutable_entries(data))
    L = data.space
    want = sum(L.parity[a] for a in args) % 2
    outs = [k for k in range(L.dim) if L.parity[k] == want]
    k = rng.choice(outs)
    delta = scalar(rng.choice([-3, -2, -1, 1, 2, 3]))
    ops = {m: {a: dict(v) for a, v in t.items()} for m, t in data.ops.items()}
    entry = ops[n].setdefault(args, {})
    entry[k] = entry.get(k, ZERO) + delta
    ops[n][args] = _clean(entry)
    return HyperComData(L, ops, data.unit), {"arity": n, "args": list(args), "output": k, "delta": str(delta)}


# ------------------------------------------------------------ P-algebras


def cohomology_basis(model: KeelModel) -> list[tuple[int, int]]:
    """All-degree basis of H*(M_{0,m}) as (degree, index) pairs, degree-major."""
    return [(d, k) for d in range(model.top_degree + 1) for k in range(model.component(d).dim)]


PTable = dict[tuple[int, tuple[int, ...]], SparseVec]


@dataclass
class PAlgebraData:
    """mu_n(b; g_1..g_n) in L for every all-degree class b of H*(M_{0,n+1}) (marks 0..n)."""

    space: SuperSpace
    tables: dict[int, PTable]

    def __post_init__(self):
        L = self.space
        for n, table in self.tables.items():
            if n < 2:
                raise MalformedData(f"arity {n} < 2")
            nb = len(cohomology_basis(standard_model(n + 1)))
            for (b, args), val in table.items():
                if not 0 <= b < nb:
                    raise MalformedData(f"class index {b} out of range for arity {n}")
                if len(args) != n or any(not 0 <= a < L.dim for a in args):
                    raise MalformedData(f"bad argument tuple {args} in arity {n}")
                if any(not 0 <= k < L.dim for k in val):
                    raise MalformedData("output index out of range")

    @property
    def n_max(self) -> int:
        return max(self.tables, default=1)

    def mu(self, n: int, b: int, args: Sequence[int]) -> SparseVec:
        return self.tables[n].get((b, tuple(args)), {})

    def corr(self, n: int, b: int, full: Sequence[int]) -> Scalar:
        """h(mu_n(b; g_1..g_n), g_0) for full = (g_0, ..., g_n)."""
        return self.space.pair(self.mu(n, b, full[1:]), {full[0]: ONE})


def _degree_blocks(model: KeelModel) -> list[int]:
    offs = []
    t = 0
    for d in range(model.top_degree + 1):
        offs.append(t)
        t += model.component(d).dim
    return offs


def check_p_algebra(data: PAlgebraData, n_max: int | None = None) -> CheckReport:
    """S_n-equivariance of each mu_n and the one-edge gluing identity for 3 <= n <= n_max."""
    n_max = data.n_max if n_max is None else n_max
    rep = CheckReport()
    for p in data.space.form_problems():
        rep.violations.append(Violation("form", p))
        return rep
    for n in range(2, n_max + 1):
        if n not in data.tables:
            rep.not_checked.append(f"arity {n}: no table")
            continue
        w = _first_equivariance_failure(data, n)
        rep.checked.append(f"equivariance n={n}")
        if w:
            rep.violations.append(Violation("equivariance", w))
            break
    for n in range(3, n_max + 1):
        if n not in data.tables:
            continue
        missing = [k for k in range(2, n) if k not in data.tables]
        if missing:
            rep.not_checked.append(f"gluing n={n}: missing arities {missing}")
            continue
        w = _first_gluing_failure(data, n)
        rep.checked.append(f"gluing n={n}")
        if w:
            rep.violations.append(Violation("gluing", w))
            break
    return rep


def _first_equivariance_failure(data: PAlgebraData, n: int) -> dict | None:
    L = data.space
    M = standard_model(n + 1)
    basis = cohomology_basis(M)
    offs = _degree_blocks(M)
    for i in range(1, n):
        mapping = {x: x for x in M.labels}
        mapping[i], mapping[i + 1] = i + 1, i
        rho = [relabel_map(M, M, mapping, d) for d in range(M.top_degree + 1)]
        for args in product(range(L.dim), repeat=n):
            sw = list(args)
            sw[i - 1], sw[i] = sw[i], sw[i - 1]
            sign = -1 if L.parity[args[i - 1]] and L.parity[args[i]] else 1
            want: dict[int, SparseVec] = {}
            for b, (d, k) in enumerate(basis):
                v = data.mu(n, b, args)
                if not v:
                    continue
                for j, c in rho[d].rows[k].data.items():
                    acc = want.setdefault(offs[d] + j, {})
                    _axpy(acc, c * sign, v)
            for b in range(len(basis)):
                got = _clean(data.mu(n, b, sw))
                exp = _clean(want.get(b, {}))
                if got != exp:
                    perm = list(range(n + 1))
                    perm[i], perm[i + 1] = i + 1, i
                    return {
                        "arity": n,
                        "permutation": perm,
                        "args": list(args),
                        "class": list(basis[b]),
                        "value": _vec_json(got),
                        "expected": _vec_json(exp),
                    }
    return None


def gluing_transport(n: int, S: Sequence[int]):
    """Pullback of every class of H*(M_{0,n+1}) to root (x) up, in standard bases.

    The root factor carries 0, the inputs outside S in order and the new mark
    last; the upper factor carries the new mark as 0 and S in order as 1..|S|.
    """
    S = tuple(sorted(S))
    M = standard_model(n + 1)
    S0 = frozenset(M.labels) - frozenset(S)
    bullet, star = n + 1, n + 2
    pb = one_edge_pullback(M, S0, bullet, star)
    rest = sorted(S0 - {0})
    root_map = {0: 0, bullet: len(rest) + 1}
    root_map.update({x: i + 1 for i, x in enumerate(rest)})
    up_map = {star: 0}
    up_map.update({x: i + 1 for i, x in enumerate(S)})
    Xs = standard_model(len(rest) + 2)
    Ys = standard_model(len(S) + 1)
    xo, yo = _degree_blocks(Xs), _degree_blocks(Ys)
    rx = [relabel_map(pb.left, Xs, root_map, d) for d in range(Xs.top_degree + 1)]
    ry = [relabel_map(pb.right, Ys, up_map, d) for d in range(Ys.top_degree + 1)]
    ring = pb.ring_map.target
    out = []
    for d, k in cohomology_basis(M):
        keys = ring.basis(d)
        acc: dict[tuple[int, int], Scalar] = {}
        for j, c in pb.ring_map.matrices[d].rows[k].data.items():
            (d1, i1), (d2, i2) = keys[j]
            for u, x in rx[d1].rows[i1].data.items():
                for v, y in ry[d2].rows[i2].data.items():
                    key = (xo[d1] + u, yo[d2] + v)
                    w = acc.get(key, ZERO) + c * x * y
                    if w:
                        acc[key] = w
                    else:
                        acc.pop(key, None)
        out.append(acc)
    return out, rest, list(S), Xs, Ys


def _first_gluing_failure(data: PAlgebraData, n: int) -> dict | None:
    L = data.space
    g = L.ginv()
    inputs = list(range(1, n + 1))
    for r in range(2, n):
        for S in combinations(inputs, r):
            trans, rest, S_, Xs, Ys = gluing_transport(n, S)
            nr, nu = len(rest) + 1, len(S_)
            nbx = len(cohomology_basis(Xs))
            nby = len(cohomology_basis(Ys))
            order = [0] + rest + S_
            for full in product(range(L.dim), repeat=n + 1):
                lhs: dict[tuple[int, int], Scalar] = {}
                for b, t in enumerate(trans):
                    if not t:
                        continue
                    c = data.corr(n, b, full)
                    if c:
                        for key, x in t.items():
                            lhs[key] = lhs.get(key, ZERO) + c * x
                sign = koszul_sign([L.parity[a] for a in full], order)
                root_args = [full[0]] + [full[i] for i in rest]
                up_args = [full[i] for i in S_]
                R = [[data.corr(nr, B1, root_args + [a]) for a in range(L.dim)] for B1 in range(nbx)]
                U = [[data.corr(nu, B2, [c] + up_args) for c in range(L.dim)] for B2 in range(nby)]
                for B1 in range(nbx):
                    for B2 in range(nby):
                        rhs = ZERO
                        for a in range(L.dim):
                            if not R[B1][a]:
                                continue
                            for c in range(L.dim):
                                if g[a][c] and U[B2][c]:
                                    rhs += R[B1][a] * g[a][c] * U[B2][c]
                        rhs *= sign
                        got = lhs.get((B1, B2), ZERO)
                        if got != rhs:
                            return {
                                "arity": n,
                                "upper_block": list(S_),
                                "args": list(full),
                                "classes": [B1, B2],
                                "pulled_back": str(got),
                                "glued": str(rhs),
                            }
    return None


def trivial_p_algebra(n_max: int = 4) -> PAlgebraData:
    """L = K, h = (1): the unit class acts by 1, every positive-degree class by 0."""
    L = SuperSpace(1, (0,), ((1,),), ("1",))
    tables = {n: {(0, (0,) * n): {0: ONE}} for n in range(2, n_max + 1)}
    return PAlgebraData(L, tables)


def _stratum_integral(data: HyperComData, tree: StableTree, full: Sequence[int], g) -> Scalar:
    """Contraction over the edges of tree of the vertex correlators, tails carrying ``full``."""
    L = data.space
    edge_ids = [e.id for e in tree.edges]
    total = ZERO
    for ends in product(range(L.dim), repeat=2 * len(edge_ids)):
        w = ONE
        for i, eid in enumerate(edge_ids):
            w *= g[ends[2 * i]][ends[2 * i + 1]]
            if not w:
                break
        if not w:
            continue
        for v in tree.vertices:
            vals = []
            for f in tree.flags(v):
                if f.tail is not None:
                    vals.append(full[f.tail])
                else:
                    i = edge_ids.index(f.edge)
                    vals.append(ends[2 * i] if v == tree.edge(f.edge).u else ends[2 * i + 1])
            w *= data.correlator(vals[1:] + vals[:1])
            if not w:
                break
        total += w
    return total


def palgebra_from_hypercom(data: HyperComData, n_max: int) -> PAlgebraData:
    """Classes determined by their integrals over boundary strata (purely even L only).

    The integral of the degree-d part over the stratum of a tree with n-2-d
    edges is the edge contraction of the vertex correlators.
    """
    L = data.space
    if not L.purely_even:
        raise NotImplementedError("odd parity not supported by this builder")
    g = L.ginv()
    tables: dict[int, PTable] = {}
    for n in range(2, n_max + 1):
        M = standard_model(n + 1)
        labels = list(range(n + 1))
        top = M.top_degree
        top_mono = _maximal_monomial(M)
        (tc,) = M.normal_form(top_mono).values()
        offs = _degree_blocks(M)
        table: PTable = {}
        for d in range(top + 1):
            k = top - d
            trees = [s for s in compatible_split_sets(labels, k) if len(s) == k]
            monos = [tuple(sorted(M.delta_position(S) for S in s)) for s in trees]
            dim = M.component(d).dim
            basis = M.component(d).basis
            gens = []
            for j in range(dim):
                row = {}
                for t, mono in enumerate(monos):
                    nf = M.normal_form(basis[j] + mono)
                    if nf:
                        row[t] = nf.get(0, ZERO) / tc
                gens.append(Vec(len(monos), row))
            tree_objs = [tree_from_splits(labels, s) for s in trees]
            for full in product(range(L.dim), repeat=n + 1):
                rhs = Vec(len(monos), {t: _stratum_integral(data, tr, full, g) for t, tr in enumerate(tree_objs)})
                c = solve_combination(gens, rhs)
                if c is None:
                    raise ValueError(f"stratum integrals inconsistent at arity {n}, degree {d}")
                for j, cj in enumerate(c):
                    if not cj:
                        continue
                    # h(mu, g_0) = cj  =>  mu = cj * row g_0 of h^{-1}
                    key = (offs[d] + j, tuple(full[1:]))
                    acc = table.setdefault(key, {})
                    _axpy(acc, cj, {b: x for b, x in enumerate(g[full[0]]) if x})
        tables[n] = {k: _clean(v) for k, v in table.items() if _clean(v)}
    return PAlgebraData(L, tables)


def _maximal_monomial(M: KeelModel) -> tuple[int, ...]:
    labels = list(M.labels)
    # caterpillar: {l0,l1}, {l0,l1,l2}, ...
    return tuple(sorted(M.delta_position(labels[: k + 2]) for k in range(M.top_degree)))


__all__ = [
    "CheckReport",
    "DegenerateForm",
    "Edge",
    "Flag",
    "HyperComData",
    "MalformedData",
    "PAlgebraData",
    "StableTree",
    "SuperSpace",
    "TreeError",
    "Violation",
    "associativity_sides",
    "check_hypercom",
    "check_m1_identity",
    "check_p_algebra",
    "cohomology_basis",
    "contract",
    "contract_edge",
    "frobenius_fixture",
    "graft",
    "hypercom_from_correlators",
    "is_isomorphic",
    "koszul_sign",
    "mutate_hypercom",
    "mutable_entries",
    "opend_space",
    "p1_quantum_correlator",
    "palgebra_from_hypercom",
    "quantum_fixture",
    "trivial_p_algebra",
    "two_level_trees",
    "validate_tree",
]
