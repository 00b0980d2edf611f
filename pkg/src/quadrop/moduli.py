"""Keel presentation of H*(M_{0,m}) and the genus-zero cooperad structure.

Boundary classes delta_S are indexed by subsets S of the mark labels with
2 <= |S| <= m-2, identified with their complements and stored as the side
containing the smallest label.  The ring is Q[delta_S] modulo the linear
four-point relations and the products delta_S delta_T of crossing pairs.
Degree-d components are computed as the span of crossing-free monomials
modulo (linear relations) x (crossing-free monomials of degree d-1).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, permutations
from typing import Iterable, Mapping, Sequence

from .exactlin import (
    ONE,
    ZERO,
    Echelon,
    LinMap,
    QuotientSection,
    Subspace,
    Vec,
    _axpy,
    canonicalize,
    kernel,
    quotient_section,
    scalar,
)
from .qa_core import QAMorphism, QuadraticAlgebra, initial, is_morphism
from .qa_enrich import tensor_fold
from .trees import StableTree, TreeError, validate_tree

DEFAULT_MAX_MARKS = 7


class ModuliError(ValueError):
    pass


Monomial = tuple[int, ...]


def _fmt(S: Iterable[int]) -> str:
    return "{" + ",".join(str(x) for x in sorted(S)) + "}"


@dataclass(frozen=True)
class GradedComponent:
    degree: int
    monomials: tuple[Monomial, ...]
    section: QuotientSection

    @property
    def dim(self) -> int:
        return self.section.dim

    @property
    def basis(self) -> tuple[Monomial, ...]:
        return tuple(self.monomials[j] for j in self.section.complement)


class KeelModel:
    """Degree-graded presentation of H*(M_{0,labels}).

    Immutable after construction; graded components are computed lazily and
    cached under a lock.
    """

    def __init__(self, labels: Iterable[int]):
        labels = tuple(sorted(labels))
        if len(set(labels)) != len(labels):
            raise ModuliError("mark labels must be distinct")
        if len(labels) < 3:
            raise ModuliError("need at least three marks")
        self.labels = labels
        self.m = len(labels)
        self.full = frozenset(labels)
        rest = labels[1:]
        sets = [frozenset((labels[0],) + c) for k in range(1, self.m - 2) for c in combinations(rest, k)]
        self.delta_index: tuple[frozenset[int], ...] = tuple(sorted(sets, key=lambda s: tuple(sorted(s))))
        self._pos = {s: i for i, s in enumerate(self.delta_index)}
        N = len(self.delta_index)
        self._compat = [
            frozenset(j for j in range(N) if not self._crossing(self.delta_index[i], self.delta_index[j]))
            for i in range(N)
        ]
        self.crossing_pairs = tuple(
            (i, j) for i in range(N) for j in range(i + 1, N) if j not in self._compat[i]
        )
        self.linear_relations = canonicalize(self._keel_relations(), N)
        self._components: dict[int, GradedComponent] = {}
        self._lock = threading.RLock()
        self._qa: QuadraticAlgebra | None = None

    # ------------------------------------------------------------ basics

    @property
    def num_deltas(self) -> int:
        return len(self.delta_index)

    @property
    def top_degree(self) -> int:
        return self.m - 3

    def __repr__(self) -> str:
        return f"KeelModel(labels={list(self.labels)})"

    def normalize(self, S: Iterable[int]) -> frozenset[int]:
        S = frozenset(S)
        if not S <= self.full:
            raise ModuliError(f"subset {_fmt(S)} contains unknown labels")
        if not 2 <= len(S) <= self.m - 2:
            raise ModuliError(f"subset {_fmt(S)} is not a boundary class for m={self.m}")
        return S if self.labels[0] in S else self.full - S

    def delta_position(self, S: Iterable[int]) -> int:
        return self._pos[self.normalize(S)]

    def _crossing(self, S: frozenset, T: frozenset) -> bool:
        return bool(S & T and S - T and T - S and self.full - (S | T))

    def crosses(self, S: Iterable[int], T: Iterable[int]) -> bool:
        return self._crossing(self.normalize(S), self.normalize(T))

    def delta_name(self, i: int) -> str:
        return "d" + _fmt(self.delta_index[i])

    def _side_sum(self, a: int, b: int, c: int, d: int) -> dict[int, object]:
        """sum of delta_S over S containing a, b and avoiding c, d."""
        others = [x for x in self.labels if x not in (a, b, c, d)]
        out: dict[int, object] = {}
        for k in range(len(others) + 1):
            for extra in combinations(others, k):
                S = frozenset((a, b) + extra)
                i = self.delta_position(S)
                out[i] = out.get(i, 0) + 1
        return out

    def _keel_relations(self) -> list[Vec]:
        N = self.num_deltas
        rels = []
        for i, j, k, l in combinations(self.labels, 4):
            base = self._side_sum(i, j, k, l)
            for other in (self._side_sum(i, k, j, l), self._side_sum(i, l, j, k)):
                data = dict(base)
                for x, c in other.items():
                    data[x] = data.get(x, 0) - c
                rels.append(Vec(N, data))
        return rels

    # -------------------------------------------------------- components

    def component(self, d: int) -> GradedComponent:
        if d < 0:
            raise ModuliError("negative degree")
        with self._lock:
            if d not in self._components:
                prev = self.component(d - 1) if d > 0 else None
                self._components[d] = self._build_component(d, prev)
            return self._components[d]

    def _build_component(self, d: int, prev: GradedComponent | None) -> GradedComponent:
        if d == 0:
            return GradedComponent(0, ((),), quotient_section(1, Subspace.zero(1)))
        assert prev is not None
        monos = []
        for mu in prev.monomials:
            start = mu[-1] if mu else 0
            for k in range(start, self.num_deltas):
                if all(k in self._compat[x] for x in mu):
                    monos.append(mu + (k,))
        monos.sort()
        pos = {mu: i for i, mu in enumerate(monos)}
        ech = Echelon(len(monos))
        for rel in self.linear_relations.basis:
            for mu in prev.monomials:
                acc: dict = {}
                for s, c in rel.data.items():
                    if all(s in self._compat[x] for x in mu):
                        key = pos[tuple(sorted(mu + (s,)))]
                        w = acc.get(key, ZERO) + c
                        if w:
                            acc[key] = w
                        else:
                            acc.pop(key, None)
                if acc:
                    ech.add(acc)
        return GradedComponent(d, tuple(monos), quotient_section(len(monos), ech.subspace()))

    def graded_dims(self, upto: int | None = None) -> tuple[int, ...]:
        upto = self.top_degree if upto is None else upto
        return tuple(self.component(d).dim for d in range(upto + 1))

    def monomial_position(self, d: int, mono: Sequence[int]) -> int | None:
        mono = tuple(sorted(mono))
        for a, b in combinations(set(mono), 2):
            if b not in self._compat[a]:
                return None
        comp = self.component(d)
        # monomials are sorted, so bisect keeps this O(log n)
        from bisect import bisect_left

        i = bisect_left(comp.monomials, mono)
        if i < len(comp.monomials) and comp.monomials[i] == mono:
            return i
        raise ModuliError(f"monomial {mono} not found in degree {d}")

    def normal_form(self, mono: Sequence[int]) -> dict[int, object]:
        """Coordinates of a delta monomial in the degree-|mono| basis; crossing products are 0."""
        d = len(mono)
        i = self.monomial_position(d, mono)
        if i is None:
            return {}
        return self.component(d).section.coords.rows[i].data

    @lru_cache(maxsize=None)
    def multiply_basis(self, d1: int, i: int, d2: int, j: int) -> Mapping[int, object]:
        a = self.component(d1).basis[i]
        b = self.component(d2).basis[j]
        return self.normal_form(a + b)

    # ------------------------------------------------------ degree one

    @property
    def h2(self) -> GradedComponent:
        return self.component(1)

    def delta_vector(self, S: Iterable[int]) -> Vec:
        """H^2 coordinates of delta_S."""
        return Vec._raw(self.h2.dim, dict(self.h2.section.coords.rows[self.delta_position(S)].data))

    def reduce_delta_sum(self, terms: Iterable[tuple[object, Iterable[int]]]) -> Vec:
        acc: dict = {}
        for c, S in terms:
            _axpy(acc, scalar(c), self.delta_vector(S).data)
        return Vec._raw(self.h2.dim, acc)

    def psi_vector(self, i: int, j: int, k: int) -> Vec:
        if len({i, j, k}) != 3 or not {i, j, k} <= self.full:
            raise ModuliError("psi needs three distinct existing labels")
        others = [x for x in self.labels if x not in (i, j, k)]
        acc: dict = {}
        for r in range(1, len(others) + 1):
            for extra in combinations(others, r):
                S = (i,) + extra
                if len(S) <= self.m - 2:
                    _axpy(acc, ONE, self.delta_vector(S).data)
        return Vec._raw(self.h2.dim, acc)

    def h2_basis_names(self) -> tuple[str, ...]:
        return tuple(self.delta_name(b[0]) for b in self.h2.basis)

    def quadratic_algebra(self) -> QuadraticAlgebra:
        """(H^2, ker(H^2 (x) H^2 -> H^4)); the initial algebra K when m = 3."""
        with self._lock:
            if self._qa is None:
                if self.m == 3:
                    self._qa = initial()
                else:
                    self._qa = self._build_qa()
            return self._qa

    def multiplication_map(self) -> LinMap:
        h = self.h2.dim
        basis = self.h2.basis
        h4 = self.component(2).dim
        rows = []
        for a in range(h):
            for b in range(h):
                rows.append(Vec._raw(h4, dict(self.normal_form(basis[a] + basis[b]))))
        return LinMap(h * h, h4, rows)

    def _build_qa(self) -> QuadraticAlgebra:
        return QuadraticAlgebra(self.h2.dim, kernel(self.multiplication_map()), self.h2_basis_names())


@lru_cache(maxsize=None)
def model_for(labels: tuple[int, ...]) -> KeelModel:
    return KeelModel(labels)


def standard_model(m: int) -> KeelModel:
    return model_for(tuple(range(m)))


def _check_m(m: int, max_marks: int | None) -> None:
    bound = DEFAULT_MAX_MARKS if max_marks is None else max_marks
    if not 4 <= m <= bound:
        raise ModuliError(f"m={m} outside the supported range 4..{bound}")


def keel_presentation(m: int, labels: Sequence[int] | None = None, max_marks: int | None = None):
    """(KeelModel, QuadraticAlgebra) for M_{0,m}; P(n) with n = m - 1."""
    _check_m(m, max_marks)
    labels = tuple(range(m)) if labels is None else tuple(labels)
    if len(labels) != m:
        raise ModuliError("label count differs from m")
    model = model_for(tuple(sorted(labels)))
    return model, model.quadratic_algebra()


def h2_dimension_formula(n: int) -> int:
    return 2 ** n - n * (n + 1) // 2 - 1


def component_algebra(n: int) -> QuadraticAlgebra:
    """P(n) as a quadratic algebra; P(1), P(2) are the scalar algebra."""
    if n <= 2:
        return initial()
    return standard_model(n + 1).quadratic_algebra()


# ---------------------------------------------------------------- classes


@dataclass(frozen=True)
class H2Class:
    model: KeelModel
    coords: Vec

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, H2Class):
            return NotImplemented
        return self.model.labels == other.model.labels and self.coords == other.coords

    def __hash__(self) -> int:
        return hash((self.model.labels, self.coords))

    def expression(self) -> list[tuple[str, str]]:
        basis = self.model.h2.basis
        return [(str(c), self.model.delta_name(basis[i][0])) for i, c in sorted(self.coords.data.items())]


def delta_reduce(model: KeelModel, terms: Iterable[tuple[object, Iterable[int]]]) -> H2Class:
    return H2Class(model, model.reduce_delta_sum(terms))


def psi_class(model: KeelModel, i: int, j: int, k: int) -> H2Class:
    if model.m < 4:
        raise ModuliError("psi classes need m >= 4")
    return H2Class(model, model.psi_vector(i, j, k))


def graded_component(model: KeelModel, d: int) -> GradedComponent:
    if not 0 <= d <= model.top_degree:
        raise ModuliError(f"degree {d} outside 0..{model.top_degree}")
    return model.component(d)


# ----------------------------------------------------------- product rings

Key = tuple[tuple[int, int], ...]


class ProductRing:
    """H*(X_1) (x) ... (x) H*(X_r) with keys ((deg_1, idx_1), ..., (deg_r, idx_r))."""

    def __init__(self, factors: Sequence[KeelModel]):
        self.factors = tuple(factors)
        self._basis: dict[int, tuple[Key, ...]] = {}

    @property
    def top_degree(self) -> int:
        return sum(f.top_degree for f in self.factors)

    def basis(self, d: int) -> tuple[Key, ...]:
        if d not in self._basis:
            keys: list[Key] = []

            def rec(i: int, left: int, acc: list):
                if i == len(self.factors):
                    if left == 0:
                        keys.append(tuple(acc))
                    return
                f = self.factors[i]
                for e in range(0, min(left, f.top_degree) + 1):
                    for k in range(f.component(e).dim):
                        rec(i + 1, left - e, acc + [(e, k)])

            rec(0, d, [])
            self._basis[d] = tuple(keys)
        return self._basis[d]

    def one(self) -> dict[Key, object]:
        return {tuple((0, 0) for _ in self.factors): ONE}

    def embed(self, pos: int, degree: int, coords: Mapping[int, object]) -> dict[Key, object]:
        base = [(0, 0)] * len(self.factors)
        out = {}
        for k, c in coords.items():
            key = list(base)
            key[pos] = (degree, k)
            out[tuple(key)] = c
        return out

    def multiply(self, x: Mapping[Key, object], y: Mapping[Key, object]) -> dict[Key, object]:
        out: dict[Key, object] = {}
        for kx, cx in x.items():
            for ky, cy in y.items():
                terms: dict[Key, object] = {(): cx * cy}
                for f, (d1, i1), (d2, i2) in zip(self.factors, kx, ky):
                    if d1 + d2 > f.top_degree:
                        # beyond the top degree the component vanishes; checked in tests
                        terms = {}
                        break
                    prod = f.multiply_basis(d1, i1, d2, i2)
                    nxt = {}
                    for pre, c in terms.items():
                        for k, v in prod.items():
                            nxt[pre + ((d1 + d2, k),)] = c * v
                    terms = nxt
                    if not terms:
                        break
                for key, c in terms.items():
                    w = out.get(key, ZERO) + c
                    if w:
                        out[key] = w
                    else:
                        out.pop(key, None)
        return out

    def to_vec(self, d: int, x: Mapping[Key, object]) -> Vec:
        idx = {k: i for i, k in enumerate(self.basis(d))}
        return Vec(len(idx), {idx[k]: c for k, c in x.items()})


@dataclass(frozen=True, eq=False)
class GradedRingMap:
    source: KeelModel
    target: ProductRing
    matrices: tuple[LinMap, ...]  # degree d: H^{2d}(source) -> target degree d
    generator_images: tuple[dict, ...] = field(repr=False)

    def degree_map(self, d: int) -> LinMap:
        return self.matrices[d]


@dataclass(frozen=True, eq=False)
class Pullback:
    ring_map: GradedRingMap
    subset: frozenset[int]
    bullet: int
    star: int
    left: KeelModel
    right: KeelModel
    kills_linear_relations: bool
    kills_crossing_products: bool

    @property
    def well_defined(self) -> bool:
        return self.kills_linear_relations and self.kills_crossing_products


def _factor_delta(model: KeelModel, S: Iterable[int]) -> dict:
    return dict(model.delta_vector(S).data)


def _psi_or_zero(model: KeelModel, i: int, j: int, k: int) -> dict:
    if model.m == 3:
        return {}
    return dict(model.psi_vector(i, j, k).data)


def delta_pullback_images(
    model: KeelModel, S0: frozenset, bullet: int, star: int, ring: ProductRing
) -> list[dict]:
    """Image of every delta_T under the gluing X x Y -> M, X = M_{0,S0+bullet}, Y = M_{0,S0^c+star}."""
    X, Y = ring.factors
    comp = model.full - S0
    out = []
    for T in model.delta_index:
        if T == S0 or T == comp:
            a, b = sorted(S0)[:2]
            c, d = sorted(comp)[:2]
            img = ring.embed(0, 1, {k: -v for k, v in _psi_or_zero(X, bullet, a, b).items()})
            for key, v in ring.embed(1, 1, _psi_or_zero(Y, star, c, d)).items():
                img[key] = img.get(key, ZERO) - v
            img = {k: v for k, v in img.items() if v}
        elif T < S0:
            img = ring.embed(0, 1, _factor_delta(X, T))
        elif S0 < T:
            img = ring.embed(1, 1, _factor_delta(Y, model.full - T))
        elif not T & S0:
            img = ring.embed(1, 1, _factor_delta(Y, T))
        elif T | S0 == model.full:
            img = ring.embed(0, 1, _factor_delta(X, model.full - T))
        else:
            img = {}
        out.append(img)
    return out


def _gluing_labels(model: KeelModel, bullet: int | None, star: int | None) -> tuple[int, int]:
    top = max(model.labels)
    bullet = top + 1 if bullet is None else bullet
    star = (max(top, bullet) + 1) if star is None else star
    if bullet in model.full or star in model.full or bullet == star:
        raise ModuliError("gluing labels must be new and distinct")
    return bullet, star


def one_edge_pullback(
    model: KeelModel,
    S0: Iterable[int],
    bullet: int | None = None,
    star: int | None = None,
    max_degree: int | None = None,
) -> Pullback:
    """Graded ring map H*(M_{0,m}) -> H*(M_{0,S0+bullet}) (x) H*(M_{0,S0^c+star})."""
    S0 = frozenset(S0)
    model.normalize(S0)  # validates
    bullet, star = _gluing_labels(model, bullet, star)
    X = model_for(tuple(sorted(S0 | {bullet})))
    Y = model_for(tuple(sorted((model.full - S0) | {star})))
    ring = ProductRing((X, Y))
    images = delta_pullback_images(model, S0, bullet, star, ring)

    def image_of(mono: Sequence[int]) -> dict:
        acc = ring.one()
        for t in mono:
            acc = ring.multiply(acc, images[t])
            if not acc:
                break
        return acc

    top = model.top_degree if max_degree is None else min(max_degree, model.top_degree)
    matrices = []
    for d in range(top + 1):
        comp = model.component(d)
        tdim = len(ring.basis(d))
        rows = [ring.to_vec(d, image_of(mono)) if tdim else Vec.zero(0) for mono in comp.basis]
        matrices.append(LinMap(comp.dim, tdim, rows))

    lin_ok = True
    for rel in model.linear_relations.basis:
        acc: dict = {}
        for t, c in rel.data.items():
            for key, v in images[t].items():
                w = acc.get(key, ZERO) + c * v
                if w:
                    acc[key] = w
                else:
                    acc.pop(key, None)
        if acc:
            lin_ok = False
            break
    cross_ok = all(not ring.multiply(images[s], images[t]) for s, t in model.crossing_pairs)
    gm = GradedRingMap(model, ring, tuple(matrices), tuple(images))
    return Pullback(gm, S0, bullet, star, X, Y, lin_ok, cross_ok)


def multiplicativity_failures(pb: Pullback, d1: int = 1, d2: int = 1) -> list[tuple[int, int]]:
    """Pairs (x, y) of basis classes of degrees d1, d2 with pullback(x*y) != pullback(x)*pullback(y)."""
    model = pb.ring_map.source
    ring = pb.ring_map.target
    d = d1 + d2
    if d > model.top_degree:
        return []
    mat = pb.ring_map.matrices
    bad = []
    for i in range(model.component(d1).dim):
        xi = _ring_elem(ring, d1, mat[d1].rows[i])
        for j in range(model.component(d2).dim):
            yj = _ring_elem(ring, d2, mat[d2].rows[j])
            lhs = mat[d].apply(Vec._raw(model.component(d).dim, dict(model.multiply_basis(d1, i, d2, j))))
            rhs = ring.to_vec(d, ring.multiply(xi, yj))
            if lhs != rhs:
                bad.append((i, j))
    return bad


def _ring_elem(ring: ProductRing, d: int, v: Vec) -> dict:
    keys = ring.basis(d)
    return {keys[i]: c for i, c in v.data.items()}


# ------------------------------------------------------------- relabelling


def relabel_map(src: KeelModel, dst: KeelModel, mapping: Mapping[int, int], d: int) -> LinMap:
    """H^{2d}(src) -> H^{2d}(dst) induced by delta_S -> delta_{mapping(S)}."""
    if set(mapping) != set(src.labels) or set(mapping.values()) != set(dst.labels):
        raise ModuliError("mapping must be a bijection between the label sets")
    comp = src.component(d)
    target = dst.component(d)
    dpos = [dst.delta_position(frozenset(mapping[x] for x in S)) for S in src.delta_index]
    rows = []
    for mono in comp.basis:
        rows.append(Vec._raw(target.dim, dict(dst.normal_form(tuple(dpos[t] for t in mono)))))
    return LinMap(comp.dim, target.dim, rows)


def _perm_dict(model: KeelModel, perm: Sequence[int] | Mapping[int, int]) -> dict[int, int]:
    if isinstance(perm, Mapping):
        mapping = dict(perm)
    else:
        if len(perm) != model.m:
            raise ModuliError("permutation length differs from m")
        mapping = {model.labels[i]: perm[i] for i in range(model.m)}
    if sorted(mapping) != sorted(model.labels) or sorted(mapping.values()) != sorted(model.labels):
        raise ModuliError("invalid permutation of the labels")
    return mapping


def sn_relabel(model: KeelModel, perm: Sequence[int] | Mapping[int, int], fix_output: bool = True) -> QAMorphism:
    """Automorphism of P(n) induced by permuting labels; perm[i] is the image of label i."""
    mapping = _perm_dict(model, perm)
    if fix_output and mapping[model.labels[0]] != model.labels[0]:
        raise ModuliError("permutation must fix the output label")
    A = model.quadratic_algebra()
    return QAMorphism(A, A, relabel_map(model, model, mapping, 1))


# -------------------------------------------------------- comultiplication


@dataclass(frozen=True, eq=False)
class Comultiplication:
    tree: StableTree
    source: QuadraticAlgebra
    target: QuadraticAlgebra
    map: LinMap
    factors: tuple[KeelModel, ...]  # one per vertex, in vertex order
    edge_order: tuple[int, ...]

    @property
    def is_morphism(self) -> bool:
        return is_morphism(self.map, self.source, self.target)

    def morphism(self) -> QAMorphism:
        return QAMorphism(self.source, self.target, self.map)


def flag_label(n: int, tree: StableTree, eid: int, vertex: int) -> int:
    pos = [e.id for e in tree.edges].index(eid)
    e = tree.edges[pos]
    return n + 1 + 2 * pos + (0 if vertex == e.u else 1)


def _vertex_marks(tree: StableTree, n: int, v: int, cut: set[int]) -> set[int]:
    marks = set(tree.tails_at(v))
    for e in tree.edges:
        if e.id in cut and v in (e.u, e.v):
            marks.add(flag_label(n, tree, e.id, v))
    return marks


def pullback_generators(model: KeelModel, S0: frozenset, bullet: int, star: int):
    """Degree-one part of the one-edge pullback: (X, Y, images of the H^2 basis as (x, y) coordinate pairs)."""
    X = model_for(tuple(sorted(S0 | {bullet})))
    Y = model_for(tuple(sorted((model.full - S0) | {star})))
    ring = ProductRing((X, Y))
    images = delta_pullback_images(model, frozenset(S0), bullet, star, ring)
    out = []
    for (t,) in model.h2.basis:
        x: dict = {}
        y: dict = {}
        for key, c in images[t].items():
            (dx, ix), (dy, iy) = key
            if dx == 1:
                x[ix] = c
            else:
                y[iy] = c
        out.append((x, y))
    return X, Y, out


def tree_comult(n: int, tree: StableTree, edge_order: Sequence[int] | None = None) -> Comultiplication:
    """P(n) -> (x)_v P(|F(v)| - 1) obtained by cutting the edges of ``tree`` one at a time."""
    ok, diags = validate_tree(tree)
    if not ok:
        raise TreeError("; ".join(diags))
    if sorted(tree.tail_labels) != list(range(n + 1)):
        raise TreeError(f"tails must be labelled 0..{n}")
    if n < 3:
        raise ModuliError("comultiplication needs n >= 3")
    order = tuple(e.id for e in tree.edges) if edge_order is None else tuple(edge_order)
    if sorted(order) != sorted(e.id for e in tree.edges):
        raise TreeError("edge order must list every edge once")
    source_model = standard_model(n + 1)
    h = source_model.h2.dim
    # pieces: (vertex set, model); images[b][piece] = coordinate dict in that piece's H^2
    pieces: list[tuple[frozenset[int], KeelModel]] = [(frozenset(tree.vertices), source_model)]
    images: list[list[dict]] = [[{b: ONE}] for b in range(h)]
    cut: set[int] = set()
    for eid in order:
        e = tree.edge(eid)
        pi = next(i for i, (vs, _) in enumerate(pieces) if e.u in vs)
        vs, model = pieces[pi]
        side_w = {x for x in tree.side(eid, e.v) if x in vs}
        S0 = frozenset().union(*(_vertex_marks(tree, n, x, cut) for x in side_w))
        bullet = flag_label(n, tree, eid, e.v)
        star = flag_label(n, tree, eid, e.u)
        X, Y, gens = pullback_generators(model, S0, bullet, star)
        new_pieces = pieces[:pi] + [(frozenset(side_w), X), (vs - side_w, Y)] + pieces[pi + 1:]
        for b in range(h):
            old = images[b][pi]
            x: dict = {}
            y: dict = {}
            for k, c in old.items():
                _axpy(x, c, gens[k][0])
                _axpy(y, c, gens[k][1])
            images[b] = images[b][:pi] + [x, y] + images[b][pi + 1:]
        pieces = new_pieces
        cut.add(eid)
    by_vertex = {}
    for i, (vs, model) in enumerate(pieces):
        (v,) = vs
        if set(model.labels) != _vertex_marks(tree, n, v, cut):
            raise AssertionError("piece marks do not match the vertex flags")
        by_vertex[v] = i
    vorder = [by_vertex[v] for v in tree.vertices]
    factors = tuple(pieces[i][1] for i in vorder)
    offsets = []
    total = 0
    for f in factors:
        offsets.append(total)
        total += f.h2.dim if f.m > 3 else 0
    rows = []
    for b in range(h):
        data = {}
        for slot, i in enumerate(vorder):
            for k, c in images[b][i].items():
                data[offsets[slot] + k] = c
        rows.append(Vec(total, data))
    target = tensor_fold([f.quadratic_algebra() for f in factors])
    return Comultiplication(tree, source_model.quadratic_algebra(), target, LinMap(h, total, rows), factors, order)


def comult_order_independent(n: int, tree: StableTree) -> bool:
    maps = {tree_comult(n, tree, order).map for order in permutations([e.id for e in tree.edges])}
    return len(maps) == 1
