"""Internal homs and the enrichment of quadratic algebras over (QA, black).

The hom-object [B, C] is dual(B) white C, with generator (b, c) <-> e_b* (x) e_c
at flat index b*dim1(C) + c.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Sequence

from .exactlin import (
    ONE,
    DimensionError,
    LinMap,
    Subspace,
    TensorIndex,
    Vec,
    shuffle_s23_vec,
    subspace_sum,
    tensor_of_subspaces,
)
from .qa_core import (
    QAMorphism,
    QuadraticAlgebra,
    black,
    dual,
    initial,
    is_morphism,
    tensor_commuting,
    tensor_power,
    unit_black,
    white,
)


class ResourceBoundExceeded(RuntimeError):
    pass


DEFAULT_MAX_AMBIENT = 2_000_000


def max_ambient() -> int:
    raw = os.environ.get("QUADROP_MAX_AMBIENT")
    return int(raw) if raw else DEFAULT_MAX_AMBIENT


@dataclass(frozen=True, eq=False)
class HomObject:
    B: QuadraticAlgebra
    C: QuadraticAlgebra
    algebra: QuadraticAlgebra

    @property
    def index(self) -> TensorIndex:
        return TensorIndex((self.B.dim1, self.C.dim1))


def hom_object(B: QuadraticAlgebra, C: QuadraticAlgebra) -> HomObject:
    return HomObject(B, C, white(dual(B), C))


# ------------------------------------------------------------------ adjunction


def adjoint_mate(f: LinMap, dim_a: int, dim_b: int, dim_c: int) -> LinMap:
    """f: A_1 (x) B_1 -> C_1  |->  g: A_1 -> B_1* (x) C_1 with g(a)[b, c] = f(a (x) b)[c]."""
    if f.src_dim != dim_a * dim_b or f.dst_dim != dim_c:
        raise DimensionError("map does not have shape A(x)B -> C")
    rows = []
    for a in range(dim_a):
        data = {}
        for b in range(dim_b):
            for c, x in f.rows[a * dim_b + b].data.items():
                data[b * dim_c + c] = x
        rows.append(Vec(dim_b * dim_c, data))
    return LinMap(dim_a, dim_b * dim_c, rows)


def adjoint_unmate(g: LinMap, dim_b: int, dim_c: int) -> LinMap:
    """Inverse of adjoint_mate."""
    if g.dst_dim != dim_b * dim_c:
        raise DimensionError("map does not have shape A -> B*(x)C")
    dim_a = g.src_dim
    rows: list[dict] = [dict() for _ in range(dim_a * dim_b)]
    for a in range(dim_a):
        for flat, x in g.rows[a].data.items():
            b, c = divmod(flat, dim_c)
            rows[a * dim_b + b][c] = x
    return LinMap(dim_a * dim_b, dim_c, [Vec(dim_c, r) for r in rows])


def adjunction_holds(f: LinMap, A: QuadraticAlgebra, B: QuadraticAlgebra, C: QuadraticAlgebra) -> tuple[bool, bool]:
    """(f is a morphism A.B -> C, mate(f) is a morphism A -> [B, C]), computed independently."""
    left = is_morphism(f, black(A, B), C)
    g = adjoint_mate(f, A.dim1, B.dim1, C.dim1)
    right = is_morphism(g, A, hom_object(B, C).algebra)
    return left, right


# ---------------------------------------------------------- element criterion


@dataclass(frozen=True, eq=False)
class EnrichmentElement:
    d: Vec
    B: QuadraticAlgebra
    C: QuadraticAlgebra
    valid: bool


def element_relation_space(B: QuadraticAlgebra, C: QuadraticAlgebra) -> Subspace:
    """R(B)^perp (x) C_1^2 + (B_1*)^2 (x) R(C) inside (B*)^2 (x) C^2."""
    nb, nc = B.dim1, C.dim1
    left = tensor_of_subspaces(dual(B).relations, Subspace.full(nc * nc))
    right = tensor_of_subspaces(Subspace.full(nb * nb), C.relations)
    return subspace_sum(left, right)


def element_is_morphism(d: Vec, B: QuadraticAlgebra, C: QuadraticAlgebra, _space: Subspace | None = None) -> bool:
    """Membership S23(d (x) d) in R(B)^perp (x) C_1^2 + (B_1*)^2 (x) R(C)."""
    nb, nc = B.dim1, C.dim1
    if d.dim != nb * nc:
        raise DimensionError("element does not live in B_1* (x) C_1")
    space = _space if _space is not None else element_relation_space(B, C)
    x = shuffle_s23_vec(d.kron(d), TensorIndex((nb, nc, nb, nc)))
    return space.contains(x)


def element_to_map(d: Vec, dim_b: int, dim_c: int) -> LinMap:
    """d in B_1* (x) C_1 read as the map e_b -> sum_c d[b, c] e_c."""
    rows = []
    for b in range(dim_b):
        rows.append(Vec(dim_c, {c: d[b * dim_c + c] for c in range(dim_c)}))
    return LinMap(dim_b, dim_c, rows)


def map_to_element(f: LinMap) -> Vec:
    nc = f.dst_dim
    return Vec(f.src_dim * nc, {b * nc + c: x for b, r in enumerate(f.rows) for c, x in r.data.items()})


def morphism_to_element(f: QAMorphism) -> EnrichmentElement:
    d = map_to_element(f.map)
    return EnrichmentElement(d, f.src, f.dst, element_is_morphism(d, f.src, f.dst))


def coevaluation(n: int) -> Vec:
    return Vec(n * n, {i * n + i: ONE for i in range(n)})


# ------------------------------------------------------------- Kelly data


def composition_map(na: int, nb: int, nc: int, order: str = "BC,AB") -> LinMap:
    """Generator-level composition (phi (x) c) (x) (psi (x) b) -> phi(b) psi (x) c.

    order "BC,AB" has source [B,C]_1 (x) [A,B]_1; "AB,BC" swaps the factors.
    """
    if order not in ("BC,AB", "AB,BC"):
        raise ValueError("order must be 'BC,AB' or 'AB,BC'")
    dim_bc, dim_ab = nb * nc, na * nb
    rows = []
    for first in range(dim_bc if order == "BC,AB" else dim_ab):
        for second in range(dim_ab if order == "BC,AB" else dim_bc):
            bc, ab = (first, second) if order == "BC,AB" else (second, first)
            b, c = divmod(bc, nc)
            a, b2 = divmod(ab, nb)
            rows.append(Vec(na * nc, {a * nc + c: ONE} if b == b2 else {}))
    return LinMap(dim_bc * dim_ab, na * nc, rows)


def composition_mu(A: QuadraticAlgebra, B: QuadraticAlgebra, C: QuadraticAlgebra, order: str = "BC,AB") -> QAMorphism:
    hab, hbc, hac = hom_object(A, B).algebra, hom_object(B, C).algebra, hom_object(A, C).algebra
    src = black(hbc, hab) if order == "BC,AB" else black(hab, hbc)
    return QAMorphism(src, hac, composition_map(A.dim1, B.dim1, C.dim1, order))


def unit_j(A: QuadraticAlgebra) -> tuple[EnrichmentElement, QAMorphism]:
    """j_A(t) = sum_i e_i* (x) e_i, as an element and as a morphism K[t]/(t^2) -> [A, A]."""
    n = A.dim1
    j = coevaluation(n)
    elem = EnrichmentElement(j, A, A, element_is_morphism(j, A, A))
    mor = QAMorphism(unit_black(), hom_object(A, A).algebra, LinMap(1, n * n, [j]))
    return elem, mor


def evaluation_map(nb: int, nc: int) -> LinMap:
    """(e_b* (x) e_c) (x) e_b' -> delta_{b b'} e_c."""
    rows = []
    for bc in range(nb * nc):
        b, c = divmod(bc, nc)
        for b2 in range(nb):
            rows.append(Vec(nc, {c: ONE} if b == b2 else {}))
    return LinMap(nb * nc * nb, nc, rows)


def counit_e(B: QuadraticAlgebra, C: QuadraticAlgebra) -> QAMorphism:
    return QAMorphism(black(hom_object(B, C).algebra, B), C, evaluation_map(B.dim1, C.dim1))


# ----------------------------------------------------- operadic enrichment


def tensor_fold(components: Sequence[QuadraticAlgebra], sign: int = 1) -> QuadraticAlgebra:
    out = initial()
    for A in components:
        out = tensor_commuting(out, A, sign)
    return out


def operad_enrichment_space(components: Sequence[QuadraticAlgebra], target: QuadraticAlgebra) -> HomObject:
    """[P(k) (x) P(m_1) (x) ... (x) P(m_k), P(m_1 + ... + m_k)]."""
    return hom_object(tensor_fold(components), target)


def quantised_action_space(
    Pn: QuadraticAlgebra, Q: QuadraticAlgebra, n: int, bound: int | None = None
) -> QuadraticAlgebra:
    """dual(P(n)) white [Q^(x)n, Q^(x)n]."""
    if n < 1:
        raise ValueError("n must be at least 1")
    bound = max_ambient() if bound is None else bound
    qn = n * Q.dim1
    dim1 = Pn.dim1 * qn * qn
    if dim1 * dim1 > bound or (qn * qn) ** 2 > bound:
        raise ResourceBoundExceeded(f"relation ambient {dim1 ** 2} exceeds bound {bound}")
    Qn = tensor_power(Q, n)
    return white(dual(Pn), hom_object(Qn, Qn).algebra)


def validate_action_element(d: Vec, Pn: QuadraticAlgebra, target: QuadraticAlgebra) -> bool:
    """A candidate action element in P(n)_1* (x) target_1 is valid iff it defines a QA morphism."""
    return element_is_morphism(d, Pn, target)
