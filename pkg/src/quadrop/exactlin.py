"""Exact linear algebra over the rationals.

Vectors are sparse (index -> mpq), subspaces are stored in reduced row-echelon
form so that equal subspaces have identical representations.  Linear maps use
the row-per-source-basis-element convention: ``f.rows[i]`` is the image of
``e_i``.
"""

from __future__ import annotations

import heapq
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from gmpy2 import mpq

Scalar = mpq

ZERO = mpq(0)
ONE = mpq(1)


def scalar(x) -> mpq:
    """Coerce an int, Fraction, mpq or ``"p/q"`` string to an exact rational."""
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, float):
        raise TypeError("floating-point values are not accepted; use 'p/q' strings")
    return mpq(x)


class DimensionError(ValueError):
    pass


class Cancelled(RuntimeError):
    pass


def _check_cancel(token: threading.Event | None) -> None:
    if token is not None and token.is_set():
        raise Cancelled("computation cancelled")


class Vec:
    """Immutable sparse rational vector."""

    __slots__ = ("dim", "data")

    def __init__(self, dim: int, entries: Mapping[int, object] | None = None, *, _trusted: bool = False):
        self.dim = dim
        if _trusted:
            self.data = entries  # type: ignore[assignment]
            return
        data: dict[int, mpq] = {}
        if entries:
            for i, c in entries.items():
                if not 0 <= i < dim:
                    raise DimensionError(f"index {i} out of range for dimension {dim}")
                c = scalar(c)
                if c:
                    data[i] = c
        self.data = data

    @classmethod
    def _raw(cls, dim: int, data: dict[int, mpq]) -> "Vec":
        return cls(dim, data, _trusted=True)

    @classmethod
    def from_dense(cls, values: Sequence[object]) -> "Vec":
        return cls(len(values), {i: c for i, c in enumerate(values)})

    @classmethod
    def basis(cls, dim: int, i: int) -> "Vec":
        return cls(dim, {i: 1})

    @classmethod
    def zero(cls, dim: int) -> "Vec":
        return cls._raw(dim, {})

    def dense(self) -> list[mpq]:
        out = [ZERO] * self.dim
        for i, c in self.data.items():
            out[i] = c
        return out

    def __getitem__(self, i: int) -> mpq:
        return self.data.get(i, ZERO)

    def __bool__(self) -> bool:
        return bool(self.data)

    def is_zero(self) -> bool:
        return not self.data

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Vec):
            return NotImplemented
        return self.dim == other.dim and self.data == other.data

    def __hash__(self) -> int:
        return hash((self.dim, frozenset(self.data.items())))

    def __add__(self, other: "Vec") -> "Vec":
        _same_dim(self, other)
        return Vec._raw(self.dim, _axpy(dict(self.data), ONE, other.data))

    def __sub__(self, other: "Vec") -> "Vec":
        _same_dim(self, other)
        return Vec._raw(self.dim, _axpy(dict(self.data), -ONE, other.data))

    def __neg__(self) -> "Vec":
        return Vec._raw(self.dim, {i: -c for i, c in self.data.items()})

    def __mul__(self, c) -> "Vec":
        c = scalar(c)
        if not c:
            return Vec.zero(self.dim)
        return Vec._raw(self.dim, {i: c * v for i, v in self.data.items()})

    __rmul__ = __mul__

    def dot(self, other: "Vec") -> mpq:
        _same_dim(self, other)
        a, b = (self.data, other.data) if len(self.data) <= len(other.data) else (other.data, self.data)
        return sum((c * b[i] for i, c in a.items() if i in b), ZERO)

    def kron(self, other: "Vec") -> "Vec":
        n = other.dim
        return Vec._raw(
            self.dim * n,
            {i * n + j: a * b for i, a in self.data.items() for j, b in other.data.items()},
        )

    def leading(self) -> int:
        return min(self.data)

    def __repr__(self) -> str:
        items = ", ".join(f"{i}: {c}" for i, c in sorted(self.data.items()))
        return f"Vec({self.dim}, {{{items}}})"


def _same_dim(a: Vec, b: Vec) -> None:
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")


def _axpy(acc: dict[int, mpq], c: mpq, x: Mapping[int, mpq]) -> dict[int, mpq]:
    """acc += c*x in place, dropping zeros."""
    for i, v in x.items():
        w = acc.get(i)
        if w is None:
            acc[i] = c * v
        else:
            w = w + c * v
            if w:
                acc[i] = w
            else:
                del acc[i]
    return acc


@dataclass(frozen=True)
class TensorIndex:
    """Row-major (leftmost factor most significant) multi-index flattening."""

    factor_dims: tuple[int, ...]

    def __init__(self, factor_dims: Iterable[int]):
        object.__setattr__(self, "factor_dims", tuple(factor_dims))

    @property
    def size(self) -> int:
        out = 1
        for d in self.factor_dims:
            out *= d
        return out

    def flat(self, multi: Sequence[int]) -> int:
        if len(multi) != len(self.factor_dims):
            raise DimensionError("multi-index has wrong length")
        out = 0
        for i, d in zip(multi, self.factor_dims):
            if not 0 <= i < d:
                raise DimensionError(f"index {i} out of range for factor of dim {d}")
            out = out * d + i
        return out

    def unflat(self, i: int) -> tuple[int, ...]:
        if not 0 <= i < self.size:
            raise DimensionError(f"flat index {i} out of range")
        out = []
        for d in reversed(self.factor_dims):
            i, r = divmod(i, d)
            out.append(r)
        return tuple(reversed(out))


class LinMap:
    """Linear map with ``rows[i]`` the image of source basis vector i."""

    __slots__ = ("src_dim", "dst_dim", "rows")

    def __init__(self, src_dim: int, dst_dim: int, rows: Sequence[Vec]):
        if len(rows) != src_dim:
            raise DimensionError(f"expected {src_dim} rows, got {len(rows)}")
        for r in rows:
            if r.dim != dst_dim:
                raise DimensionError(f"row of dim {r.dim}, expected {dst_dim}")
        self.src_dim = src_dim
        self.dst_dim = dst_dim
        self.rows = tuple(rows)

    @classmethod
    def from_dense(cls, matrix: Sequence[Sequence[object]], dst_dim: int | None = None) -> "LinMap":
        if dst_dim is None:
            dst_dim = len(matrix[0]) if matrix else 0
        rows = [Vec.from_dense(r) if len(r) else Vec.zero(dst_dim) for r in matrix]
        return cls(len(matrix), dst_dim, rows)

    @classmethod
    def identity(cls, n: int) -> "LinMap":
        return cls(n, n, [Vec.basis(n, i) for i in range(n)])

    @classmethod
    def zero(cls, src_dim: int, dst_dim: int) -> "LinMap":
        return cls(src_dim, dst_dim, [Vec.zero(dst_dim)] * src_dim)

    def apply(self, v: Vec) -> Vec:
        if v.dim != self.src_dim:
            raise DimensionError(f"vector of dim {v.dim}, map expects {self.src_dim}")
        acc: dict[int, mpq] = {}
        for i, c in v.data.items():
            _axpy(acc, c, self.rows[i].data)
        return Vec._raw(self.dst_dim, acc)

    __call__ = apply

    def compose(self, first: "LinMap") -> "LinMap":
        """``self ∘ first``: apply ``first``, then ``self``."""
        if first.dst_dim != self.src_dim:
            raise DimensionError("cannot compose: inner target does not match outer source")
        return LinMap(first.src_dim, self.dst_dim, [self.apply(r) for r in first.rows])

    def tensor(self, other: "LinMap") -> "LinMap":
        """Kronecker product acting on row-major flattened tensors."""
        rows = [a.kron(b) for a in self.rows for b in other.rows]
        return LinMap(self.src_dim * other.src_dim, self.dst_dim * other.dst_dim, rows)

    def transpose(self) -> "LinMap":
        cols: list[dict[int, mpq]] = [{} for _ in range(self.dst_dim)]
        for i, r in enumerate(self.rows):
            for j, c in r.data.items():
                cols[j][i] = c
        return LinMap(self.dst_dim, self.src_dim, [Vec._raw(self.src_dim, c) for c in cols])

    def dense(self) -> list[list[mpq]]:
        return [r.dense() for r in self.rows]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LinMap):
            return NotImplemented
        return self.src_dim == other.src_dim and self.dst_dim == other.dst_dim and self.rows == other.rows

    def __hash__(self) -> int:
        return hash((self.src_dim, self.dst_dim, self.rows))

    def __add__(self, other: "LinMap") -> "LinMap":
        if (self.src_dim, self.dst_dim) != (other.src_dim, other.dst_dim):
            raise DimensionError("shape mismatch")
        return LinMap(self.src_dim, self.dst_dim, [a + b for a, b in zip(self.rows, other.rows)])

    def __neg__(self) -> "LinMap":
        return LinMap(self.src_dim, self.dst_dim, [-r for r in self.rows])

    def __repr__(self) -> str:
        return f"LinMap({self.src_dim} -> {self.dst_dim})"


# ---------------------------------------------------------------- elimination


class Echelon:
    """Incremental semi-echelon basis; rows normalized to leading coefficient 1.

    ``add`` reduces an incoming vector against the stored rows and keeps the
    remainder if nonzero.  ``subspace`` back-substitutes into canonical RREF.
    """

    def __init__(self, dim: int, cancel: threading.Event | None = None):
        self.dim = dim
        self.rows: dict[int, dict[int, mpq]] = {}
        self._cancel = cancel

    def reduce(self, data: Mapping[int, mpq]) -> dict[int, mpq]:
        v = dict(data)
        rows = self.rows
        heap = [i for i in v if i in rows]
        heapq.heapify(heap)
        seen = set()
        while heap:
            p = heapq.heappop(heap)
            if p in seen:
                continue
            seen.add(p)
            c = v.get(p)
            if c is None:
                continue
            row = rows[p]
            for i, r in row.items():
                w = v.get(i)
                if w is None:
                    v[i] = -c * r
                    if i in rows and i not in seen:
                        heapq.heappush(heap, i)
                else:
                    w = w - c * r
                    if w:
                        v[i] = w
                    else:
                        del v[i]
        return v

    def add(self, data: Mapping[int, mpq]) -> bool:
        _check_cancel(self._cancel)
        v = self.reduce(data)
        if not v:
            return False
        p = min(v)
        inv = 1 / v[p]
        if inv != 1:
            v = {i: c * inv for i, c in v.items()}
        self.rows[p] = v
        return True

    @property
    def rank(self) -> int:
        return len(self.rows)

    def subspace(self) -> "Subspace":
        # back-substitution from the last pivot makes every row reduced
        pivots = sorted(self.rows)
        done: dict[int, dict[int, mpq]] = {}
        for p in reversed(pivots):
            row = dict(self.rows[p])
            for q in [i for i in row if i != p and i in done]:
                c = row.get(q)
                if c:
                    _axpy(row, -c, done[q])
            done[p] = row
        basis = tuple(Vec._raw(self.dim, done[p]) for p in pivots)
        return Subspace._raw(self.dim, basis, tuple(pivots))


# ------------------------------------------------------------------ subspaces


class Subspace:
    """Subspace of ``Q^ambient_dim`` held in canonical RREF."""

    __slots__ = ("ambient_dim", "basis", "pivots", "_pivot_row")

    def __init__(self, ambient_dim: int, basis: tuple[Vec, ...], pivots: tuple[int, ...]):
        self.ambient_dim = ambient_dim
        self.basis = basis
        self.pivots = pivots
        self._pivot_row = {p: i for i, p in enumerate(pivots)}

    @classmethod
    def _raw(cls, ambient_dim: int, basis: tuple[Vec, ...], pivots: tuple[int, ...]) -> "Subspace":
        return cls(ambient_dim, basis, pivots)

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, (), ())

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, tuple(Vec.basis(ambient_dim, i) for i in range(ambient_dim)), tuple(range(ambient_dim)))

    @property
    def rank(self) -> int:
        return len(self.basis)

    dim = rank

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self.pivots == other.pivots and self.basis == other.basis

    def __hash__(self) -> int:
        return hash((self.ambient_dim, self.pivots, self.basis))

    def __repr__(self) -> str:
        return f"Subspace(rank {self.rank} in dim {self.ambient_dim})"

    def residue(self, v: Vec) -> dict[int, mpq]:
        """``v`` minus its component along the pivots; zero iff v is in the subspace."""
        acc = dict(v.data)
        for p in [i for i in v.data if i in self._pivot_row]:
            c = acc.get(p)
            if c:
                _axpy(acc, -c, self.basis[self._pivot_row[p]].data)
        return acc

    def contains(self, v: Vec) -> bool:
        if v.dim != self.ambient_dim:
            raise DimensionError(f"vector of dim {v.dim} vs ambient {self.ambient_dim}")
        return not self.residue(v)

    __contains__ = contains

    def coordinates(self, v: Vec) -> list[mpq]:
        """Coefficients of v in the RREF basis; raises if v is not a member."""
        if not self.contains(v):
            raise ValueError("vector is not in the subspace")
        return [v[p] for p in self.pivots]

    def issubspace(self, other: "Subspace") -> bool:
        return all(other.contains(b) for b in self.basis)


def canonicalize(vectors: Iterable[Vec], ambient_dim: int, cancel: threading.Event | None = None) -> Subspace:
    ech = Echelon(ambient_dim, cancel)
    for v in vectors:
        if v.dim != ambient_dim:
            raise DimensionError(f"vector of dim {v.dim} in ambient {ambient_dim}")
        if v.data:
            ech.add(v.data)
    return ech.subspace()


def rank_of(vectors: Iterable[Vec], ambient_dim: int, cancel: threading.Event | None = None) -> int:
    ech = Echelon(ambient_dim, cancel)
    for v in vectors:
        if v.data:
            ech.add(v.data)
    return ech.rank


def _same_ambient(S: Subspace, T: Subspace) -> None:
    if S.ambient_dim != T.ambient_dim:
        raise DimensionError(f"ambient mismatch: {S.ambient_dim} vs {T.ambient_dim}")


def subspace_sum(S: Subspace, T: Subspace) -> Subspace:
    _same_ambient(S, T)
    return canonicalize(S.basis + T.basis, S.ambient_dim)


def annihilator(S: Subspace) -> Subspace:
    """Annihilator under the dual-basis pairing, i.e. the kernel of x -> (s_i . x)."""
    n = S.ambient_dim
    pivset = set(S.pivots)
    free = [j for j in range(n) if j not in pivset]
    # for RREF rows s_p, the vectors e_f - sum_p s_p[f] e_p are already canonical
    basis = []
    for f in free:
        data = {f: ONE}
        for p, row in zip(S.pivots, S.basis):
            c = row.data.get(f)
            if c:
                data[p] = -c
        basis.append(Vec._raw(n, data))
    return canonicalize(basis, n)


def intersect(S: Subspace, T: Subspace) -> Subspace:
    _same_ambient(S, T)
    return annihilator(subspace_sum(annihilator(S), annihilator(T)))


def image(f: LinMap) -> Subspace:
    return canonicalize(f.rows, f.dst_dim)


def kernel(f: LinMap) -> Subspace:
    """{x : sum_i x_i f.rows[i] = 0} computed as the annihilator of the column space."""
    return annihilator(canonicalize(f.transpose().rows, f.src_dim))


def member(v: Vec, S: Subspace) -> bool:
    return S.contains(v)


def solve_combination(gens: Sequence[Vec], v: Vec) -> list[mpq] | None:
    """Coefficients c with sum c_i gens[i] = v, or None if v is not in their span."""
    n = v.dim
    k = len(gens)
    ech = Echelon(n + k)
    for i, g in enumerate(gens):
        if g.dim != n:
            raise DimensionError("generator dimension mismatch")
        data = dict(g.data)
        data[n + i] = ONE
        # tag columns sit after the ambient ones, so pivots stay in the ambient block
        # unless the ambient part is dependent
        ech.add(data)
    res = ech.reduce(v.data)
    if any(i < n for i in res):
        return None
    # v - sum(c_k row_k) = (0 | tags): tags record -coefficients of the generators
    return [-res.get(n + i, ZERO) for i in range(k)]


def decompose(v: Vec, S: Subspace, T: Subspace) -> tuple[Vec, Vec]:
    """Split v = s + t with s in S and t in T; raises ValueError if v is not in S+T."""
    _same_ambient(S, T)
    if v.dim != S.ambient_dim:
        raise DimensionError("vector/ambient mismatch")
    coeffs = solve_combination(S.basis + T.basis, v)
    if coeffs is None:
        raise ValueError("vector is not in S + T")
    s = Vec.zero(v.dim)
    acc: dict[int, mpq] = {}
    for c, b in zip(coeffs[: S.rank], S.basis):
        if c:
            _axpy(acc, c, b.data)
    s = Vec._raw(v.dim, acc)
    return s, v - s


@dataclass(frozen=True)
class QuotientSection:
    """Complement spanned by the non-pivot coordinates of S, with projections.

    ``projection`` is the idempotent endomorphism of the ambient space with
    kernel S; ``coords`` sends a vector to its coordinates in the complement.
    """

    ambient_dim: int
    complement: tuple[int, ...]
    coords: LinMap
    projection: LinMap

    @property
    def dim(self) -> int:
        return len(self.complement)


def quotient_section(ambient_dim: int, S: Subspace) -> QuotientSection:
    if S.ambient_dim != ambient_dim:
        raise DimensionError("ambient mismatch")
    pivset = set(S.pivots)
    complement = tuple(j for j in range(ambient_dim) if j not in pivset)
    pos = {j: k for k, j in enumerate(complement)}
    q = len(complement)
    coord_rows: list[Vec | None] = [None] * ambient_dim
    proj_rows: list[Vec | None] = [None] * ambient_dim
    for j in complement:
        coord_rows[j] = Vec._raw(q, {pos[j]: ONE})
        proj_rows[j] = Vec._raw(ambient_dim, {j: ONE})
    for p, row in zip(S.pivots, S.basis):
        # e_p = row - (row - e_p) with row in S, so e_p == -(sum over free f of row[f] e_f)
        coord_rows[p] = Vec._raw(q, {pos[f]: -c for f, c in row.data.items() if f != p})
        proj_rows[p] = Vec._raw(ambient_dim, {f: -c for f, c in row.data.items() if f != p})
    return QuotientSection(
        ambient_dim,
        complement,
        LinMap(ambient_dim, q, coord_rows),  # type: ignore[arg-type]
        LinMap(ambient_dim, ambient_dim, proj_rows),  # type: ignore[arg-type]
    )


# ---------------------------------------------------------------- tensor calculus


def shuffle_s23_vec(x: Vec, index: TensorIndex) -> Vec:
    """e_{i,j,k,l} over (d1,d2,d3,d4) -> e_{i,k,j,l} over (d1,d3,d2,d4)."""
    if len(index.factor_dims) != 4:
        raise DimensionError("S23 needs exactly four tensor factors")
    if x.dim != index.size:
        raise DimensionError("vector does not match the tensor index")
    d1, d2, d3, d4 = index.factor_dims
    out = {}
    for f, c in x.data.items():
        rest, l = divmod(f, d4)
        rest, k = divmod(rest, d3)
        i, j = divmod(rest, d2)
        out[((i * d3 + k) * d2 + j) * d4 + l] = c
    return Vec._raw(x.dim, out)


def shuffle_s23(S: Subspace, index: TensorIndex) -> Subspace:
    return canonicalize((shuffle_s23_vec(b, index) for b in S.basis), S.ambient_dim)


def swap_middle(index: TensorIndex) -> TensorIndex:
    d1, d2, d3, d4 = index.factor_dims
    return TensorIndex((d1, d3, d2, d4))


def tensor_of_subspaces(S: Subspace, T: Subspace) -> Subspace:
    # kron of two RREF bases is RREF once rows are sorted by pivot
    n = T.ambient_dim
    rows = sorted(
        ((p * n + q, a.kron(b)) for p, a in zip(S.pivots, S.basis) for q, b in zip(T.pivots, T.basis)),
        key=lambda t: t[0],
    )
    return Subspace._raw(S.ambient_dim * n, tuple(r for _, r in rows), tuple(p for p, _ in rows))


def embed(S: Subspace, ambient_dim: int, index_map: Sequence[int]) -> Subspace:
    """Transport S along an injective coordinate map old index -> new index."""
    vecs = (Vec._raw(ambient_dim, {index_map[i]: c for i, c in b.data.items()}) for b in S.basis)
    return canonicalize(vecs, ambient_dim)
