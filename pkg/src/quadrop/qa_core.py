"""The category of quadratic algebras: objects, morphisms, duality, products."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .exactlin import (
    ONE,
    DimensionError,
    LinMap,
    Subspace,
    TensorIndex,
    Vec,
    annihilator,
    canonicalize,
    embed,
    shuffle_s23,
    subspace_sum,
    tensor_of_subspaces,
)


class NotAMorphism(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class QuadraticAlgebra:
    """A = (A_1, R(A)) with R(A) a subspace of A_1 (x) A_1, pair (i, j) at flat index i*dim1 + j."""

    dim1: int
    relations: Subspace
    names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        names = tuple(self.names) if self.names else tuple(f"x{i}" for i in range(self.dim1))
        object.__setattr__(self, "names", names)
        if len(names) != self.dim1:
            raise ValueError(f"{len(names)} names for {self.dim1} generators")
        if len(set(names)) != len(names):
            raise ValueError("generator names must be distinct")
        if self.relations.ambient_dim != self.dim1 * self.dim1:
            raise DimensionError(f"relations live in dim {self.relations.ambient_dim}, expected {self.dim1 ** 2}")

    @classmethod
    def from_relations(cls, dim1: int, relations: Sequence[Vec], names: Sequence[str] = ()) -> "QuadraticAlgebra":
        return cls(dim1, canonicalize(relations, dim1 * dim1), tuple(names))

    @property
    def pair_index(self) -> TensorIndex:
        return TensorIndex((self.dim1, self.dim1))

    @property
    def num_relations(self) -> int:
        return self.relations.rank

    def same_presentation(self, other: "QuadraticAlgebra") -> bool:
        """Equality of (dim1, canonical relation subspace); names are ignored."""
        return self.dim1 == other.dim1 and self.relations == other.relations

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QuadraticAlgebra):
            return NotImplemented
        return self.same_presentation(other)

    def __hash__(self) -> int:
        return hash((self.dim1, self.relations))

    def __repr__(self) -> str:
        return f"QuadraticAlgebra(dim1={self.dim1}, relations={self.relations.rank})"


def pair_vec(n: int, terms: dict[tuple[int, int], object]) -> Vec:
    """Element of K^n (x) K^n from {(i, j): coefficient}."""
    return Vec(n * n, {i * n + j: c for (i, j), c in terms.items()})


# ----------------------------------------------------------------- constants


def unit_black() -> QuadraticAlgebra:
    """K[t]/(t^2): one generator, R = span{t (x) t}."""
    return QuadraticAlgebra(1, Subspace.full(1), ("t",))


def unit_white() -> QuadraticAlgebra:
    """Free algebra K<x> on one generator."""
    return QuadraticAlgebra(1, Subspace.zero(1), ("x",))


def initial() -> QuadraticAlgebra:
    """The ground field K, with no generators."""
    return QuadraticAlgebra(0, Subspace.zero(0), ())


def free_algebra(n: int) -> QuadraticAlgebra:
    return QuadraticAlgebra(n, Subspace.zero(n * n), tuple(f"x{i}" for i in range(n)))


def polynomial_algebra(n: int) -> QuadraticAlgebra:
    """Commutative polynomial ring: relations x_i x_j - x_j x_i."""
    rels = [pair_vec(n, {(i, j): 1, (j, i): -1}) for i in range(n) for j in range(i + 1, n)]
    return QuadraticAlgebra.from_relations(n, rels, tuple(f"x{i}" for i in range(n)))


# ------------------------------------------------------------------ duality


def dual(A: QuadraticAlgebra) -> QuadraticAlgebra:
    """(A_1^*, R(A)^perp), pairing <e_i* (x) e_j*, e_k (x) e_l> = delta_ik delta_jl."""
    return QuadraticAlgebra(A.dim1, annihilator(A.relations), tuple(_dual_name(s) for s in A.names))


def _dual_name(s: str) -> str:
    return s[:-1] if s.endswith("*") else s + "*"


# ----------------------------------------------------------------- products


def _product_names(A: QuadraticAlgebra, B: QuadraticAlgebra) -> tuple[str, ...]:
    return tuple(f"{a}.{b}" for a in A.names for b in B.names)


def black(A: QuadraticAlgebra, B: QuadraticAlgebra) -> QuadraticAlgebra:
    """Black product: generators A_1 (x) B_1, relations S23(R(A) (x) R(B))."""
    idx = TensorIndex((A.dim1, A.dim1, B.dim1, B.dim1))
    rel = shuffle_s23(tensor_of_subspaces(A.relations, B.relations), idx)
    return QuadraticAlgebra(A.dim1 * B.dim1, rel, _product_names(A, B))


def white(A: QuadraticAlgebra, B: QuadraticAlgebra) -> QuadraticAlgebra:
    """White product: relations S23(R(A) (x) B_1^2 + A_1^2 (x) R(B))."""
    na, nb = A.dim1, B.dim1
    idx = TensorIndex((na, na, nb, nb))
    left = tensor_of_subspaces(A.relations, Subspace.full(nb * nb))
    right = tensor_of_subspaces(Subspace.full(na * na), B.relations)
    rel = shuffle_s23(subspace_sum(left, right), idx)
    return QuadraticAlgebra(na * nb, rel, _product_names(A, B))


def _direct_sum_embeddings(na: int, nb: int) -> tuple[list[int], list[int]]:
    n = na + nb
    ea = [i * n + j for i in range(na) for j in range(na)]
    eb = [(na + i) * n + (na + j) for i in range(nb) for j in range(nb)]
    return ea, eb


def _disjoint_names(A: QuadraticAlgebra, B: QuadraticAlgebra) -> tuple[str, ...]:
    names = A.names + B.names
    if len(set(names)) == len(names):
        return names
    return tuple(f"a.{s}" for s in A.names) + tuple(f"b.{s}" for s in B.names)


def free_product(A: QuadraticAlgebra, B: QuadraticAlgebra) -> QuadraticAlgebra:
    """Coproduct: (A_1 + B_1, R(A) + R(B)) with no cross terms."""
    n = A.dim1 + B.dim1
    ea, eb = _direct_sum_embeddings(A.dim1, B.dim1)
    rel = subspace_sum(embed(A.relations, n * n, ea), embed(B.relations, n * n, eb))
    return QuadraticAlgebra(n, rel, _disjoint_names(A, B))


def tensor_commuting(A: QuadraticAlgebra, B: QuadraticAlgebra, sign: int = 1) -> QuadraticAlgebra:
    """Relations R(A) + span{a(x)b - sign*b(x)a} + R(B) on A_1 + B_1.

    sign=+1 gives the commuting tensor product; sign=-1 is the skew variant,
    which is experimental.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    na, nb = A.dim1, B.dim1
    n = na + nb
    ea, eb = _direct_sum_embeddings(na, nb)
    cross = [
        Vec(n * n, {a * n + (na + b): ONE, (na + b) * n + a: -sign})
        for a in range(na)
        for b in range(nb)
    ]
    rel = canonicalize(
        list(embed(A.relations, n * n, ea).basis) + cross + list(embed(B.relations, n * n, eb).basis),
        n * n,
    )
    return QuadraticAlgebra(n, rel, _disjoint_names(A, B))


def tensor_power(A: QuadraticAlgebra, n: int, sign: int = 1) -> QuadraticAlgebra:
    out = initial()
    for _ in range(n):
        out = tensor_commuting(out, A, sign)
    return out


# ---------------------------------------------------------------- morphisms


def image_of_relation(f: LinMap, r: Vec, src_dim: int) -> Vec:
    """(f (x) f)(r) for r in src (x) src."""
    m = f.dst_dim
    acc: dict = {}
    for flat, c in r.data.items():
        i, j = divmod(flat, src_dim)
        for a, x in f.rows[i].data.items():
            cx = c * x
            for b, y in f.rows[j].data.items():
                k = a * m + b
                w = acc.get(k, 0) + cx * y
                if w:
                    acc[k] = w
                else:
                    acc.pop(k, None)
    return Vec(m * m, acc)


def is_morphism(f: LinMap, A: QuadraticAlgebra, B: QuadraticAlgebra) -> bool:
    if f.src_dim != A.dim1 or f.dst_dim != B.dim1:
        raise DimensionError(f"map {f.src_dim}->{f.dst_dim} does not fit {A.dim1}->{B.dim1}")
    return all(B.relations.contains(image_of_relation(f, r, A.dim1)) for r in A.relations.basis)


@dataclass(frozen=True, eq=False)
class QAMorphism:
    src: QuadraticAlgebra
    dst: QuadraticAlgebra
    map: LinMap

    def __post_init__(self):
        if not is_morphism(self.map, self.src, self.dst):
            raise NotAMorphism("(f (x) f)(R(src)) is not contained in R(dst)")

    def compose(self, first: "QAMorphism") -> "QAMorphism":
        """self after first."""
        if not first.dst.same_presentation(self.src):
            raise ValueError("morphisms are not composable")
        return QAMorphism(first.src, self.dst, self.map.compose(first.map))

    @classmethod
    def identity(cls, A: QuadraticAlgebra) -> "QAMorphism":
        return cls(A, A, LinMap.identity(A.dim1))


def permutation_map(perm: Sequence[int]) -> LinMap:
    n = len(perm)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"not a permutation of 0..{n - 1}: {list(perm)}")
    return LinMap(n, n, [Vec.basis(n, perm[i]) for i in range(n)])


def relabel(A: QuadraticAlgebra, perm: Sequence[int]) -> QuadraticAlgebra:
    """Algebra whose generator perm[i] is A's generator i."""
    n = A.dim1
    pmap = [perm[i] * n + perm[j] for i in range(n) for j in range(n)]
    names = [""] * n
    for i, p in enumerate(perm):
        names[p] = A.names[i]
    return QuadraticAlgebra(n, embed(A.relations, n * n, pmap), tuple(names))


def permute_generators(A: QuadraticAlgebra, perm: Sequence[int]) -> QAMorphism:
    """Isomorphism e_i -> e_perm[i] from A onto its relabelled copy."""
    if len(perm) != A.dim1:
        raise ValueError("permutation size differs from dim1")
    return QAMorphism(A, relabel(A, perm), permutation_map(perm))
