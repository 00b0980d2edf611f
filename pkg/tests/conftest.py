import random

import pytest
import sympy
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

from quadrop.exactlin import Vec, canonicalize, scalar
from quadrop.qa_core import QuadraticAlgebra


def sympy_rank(vectors, dim):
    """Rank computed by sympy's exact domain matrices, independent of quadrop's elimination."""
    vectors = list(vectors)
    if not vectors or dim == 0:
        return 0
    rows = [[QQ(int(x.numerator), int(x.denominator)) for x in v.dense()] for v in vectors]
    return DomainMatrix(rows, (len(rows), dim), QQ).rank()


def random_vec(rng, dim, density=0.5, lo=-3, hi=3):
    return Vec(dim, {i: rng.randint(lo, hi) for i in range(dim) if rng.random() < density})


def random_subspace(rng, dim, k=None, density=0.5):
    k = rng.randint(0, dim) if k is None else k
    return canonicalize([random_vec(rng, dim, density) for _ in range(k)], dim)


def random_algebra(rng, max_dim=3, density=0.4):
    n = rng.randint(1, max_dim)
    k = rng.randint(0, n * n)
    return QuadraticAlgebra.from_relations(n, [random_vec(rng, n * n, density, -2, 2) for _ in range(k)])


def to_sympy(v):
    return sympy.Matrix([[sympy.Rational(int(x.numerator), int(x.denominator)) for x in v.dense()]])


@pytest.fixture
def rng():
    return random.Random(20240611)


__all__ = ["random_algebra", "random_subspace", "random_vec", "scalar", "sympy_rank", "to_sympy"]
