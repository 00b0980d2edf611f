"""Truncated Hilbert series and the numerical Koszulity residual."""

from __future__ import annotations

import threading
from dataclasses import dataclass

from .exactlin import Echelon, Vec, quotient_section, _check_cancel
from .qa_core import QuadraticAlgebra, dual
from .qa_enrich import ResourceBoundExceeded, max_ambient


@dataclass(frozen=True)
class DegreeDims:
    algebra: QuadraticAlgebra
    dims: tuple[int, ...]


def _check_bound(A: QuadraticAlgebra, D: int, bound: int | None) -> None:
    bound = max_ambient() if bound is None else bound
    if D >= 1 and A.dim1 ** D > bound:
        raise ResourceBoundExceeded(f"dim1^D = {A.dim1}^{D} exceeds the ambient bound {bound}")


def degree_dims(
    A: QuadraticAlgebra,
    D: int,
    *,
    method: str = "quotient",
    bound: int | None = None,
    cancel: threading.Event | None = None,
) -> DegreeDims:
    """dim A_d for d = 0..D.

    ``method="tensor"`` ranks sum_{i+k=d-2} A_1^i (x) R (x) A_1^k directly in
    A_1^{(x)d}.  ``method="quotient"`` (default) computes the same quotient one
    degree at a time as (A_{d-1} (x) A_1) / image(A_{d-2} (x) R), which keeps
    the ambient at dim A_{d-1} * dim1.
    """
    if D < 0:
        raise ValueError("D must be non-negative")
    _check_bound(A, D, bound)
    if method == "tensor":
        dims = _dims_tensor(A, D, cancel)
    elif method == "quotient":
        dims = _dims_quotient(A, D, cancel)
    else:
        raise ValueError(f"unknown method {method!r}")
    return DegreeDims(A, tuple(dims[: D + 1]))


def relation_ideal_rank(A: QuadraticAlgebra, d: int, cancel: threading.Event | None = None) -> int:
    """rank of sum_{i+k=d-2} A_1^{(x)i} (x) R (x) A_1^{(x)k} in A_1^{(x)d}."""
    n = A.dim1
    if d < 2:
        return 0
    ech = Echelon(n ** d, cancel)
    rel = [(r.data) for r in A.relations.basis]
    for i in range(d - 1):
        k = d - 2 - i
        left, right = n ** i, n ** k
        for u in range(left):
            for r in rel:
                for w in range(right):
                    ech.add({(u * n * n + f) * right + w: c for f, c in r.items()})
    return ech.rank


def _dims_tensor(A: QuadraticAlgebra, D: int, cancel) -> list[int]:
    n = A.dim1
    dims = [1]
    for d in range(1, D + 1):
        dims.append(n ** d - relation_ideal_rank(A, d, cancel))
    return dims


def _dims_quotient(A: QuadraticAlgebra, D: int, cancel) -> list[int]:
    n = A.dim1
    dims = [1]
    if D == 0:
        return dims
    dims.append(n)
    # mult[d][(u, i)] = coordinates of (basis u of A_{d-1}) * e_i in A_d
    prev_mult: list[dict] | None = None  # A_{d-2} (x) A_1 -> A_{d-1}
    prev_dim, prev2_dim = n, 1
    rel = [r.data for r in A.relations.basis]
    for d in range(2, D + 1):
        _check_cancel(cancel)
        amb = prev_dim * n
        ech = Echelon(amb, cancel)
        for u in range(prev2_dim):
            for r in rel:
                acc: dict = {}
                for f, c in r.items():
                    i, j = divmod(f, n)
                    if prev_mult is None:
                        prod = {i: 1}
                    else:
                        prod = prev_mult[u * n + i]
                    for v, x in prod.items():
                        k = v * n + j
                        w = acc.get(k, 0) + c * x
                        if w:
                            acc[k] = w
                        else:
                            acc.pop(k, None)
                if acc:
                    ech.add(acc)
        sec = quotient_section(amb, ech.subspace())
        prev_mult = [row.data for row in sec.coords.rows]
        prev2_dim, prev_dim = prev_dim, sec.dim
        dims.append(sec.dim)
        if sec.dim == 0:
            dims.extend([0] * (D - d))
            break
    return dims


@dataclass(frozen=True)
class KoszulReport:
    dims: tuple[int, ...]
    dual_dims: tuple[int, ...]
    coefficients: tuple[int, ...]

    @property
    def consistent(self) -> bool:
        """True iff every coefficient past the constant term vanishes (necessary condition only)."""
        return self.coefficients[0] == 1 and not any(self.coefficients[1:])


def series_product_alternating(a, b) -> tuple[int, ...]:
    """Coefficients of a(t) * b(-t), truncated to min(len)."""
    D = min(len(a), len(b))
    return tuple(sum(a[i] * b[k - i] * (-1) ** (k - i) for i in range(k + 1)) for k in range(D))


def koszul_numeric_check(
    A: QuadraticAlgebra,
    D: int,
    *,
    method: str = "quotient",
    bound: int | None = None,
    cancel: threading.Event | None = None,
) -> KoszulReport:
    a = degree_dims(A, D, method=method, bound=bound, cancel=cancel).dims
    b = degree_dims(dual(A), D, method=method, bound=bound, cancel=cancel).dims
    return KoszulReport(a, b, series_product_alternating(a, b))


def forced_dual_dims(dims) -> tuple[int, ...]:
    """Coefficients b with a(t) b(-t) = 1, i.e. what Koszulity would force for the dual."""
    b = [1]
    for k in range(1, len(dims)):
        # sum_{i} a_i b_{k-i} (-1)^{k-i} = 0, solve for b_k (coefficient a_0 = 1)
        s = sum(dims[i] * b[k - i] * (-1) ** (k - i) for i in range(1, k + 1))
        b.append(-s * (-1) ** k)
    return tuple(b)
