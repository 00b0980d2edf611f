import itertools
import threading

import pytest

from conftest import random_algebra
from quadrop.exactlin import Cancelled, Vec
from quadrop.moduli import component_algebra
from quadrop.qa_core import QuadraticAlgebra, dual, free_algebra, polynomial_algebra, unit_black, unit_white
from quadrop.qa_enrich import ResourceBoundExceeded
from quadrop.qa_series import (
    degree_dims,
    forced_dual_dims,
    koszul_numeric_check,
    relation_ideal_rank,
    series_product_alternating,
)


def monomial_algebra(n, forbidden):
    return QuadraticAlgebra.from_relations(n, [Vec.basis(n * n, i * n + j) for i, j in forbidden])


def count_words(n, forbidden, d):
    bad = set(forbidden)
    return sum(
        1 for w in itertools.product(range(n), repeat=d) if all((w[k], w[k + 1]) not in bad for k in range(d - 1))
    )


def test_free_and_polynomial():
    assert degree_dims(free_algebra(2), 3).dims == (1, 2, 4, 8)
    assert degree_dims(polynomial_algebra(2), 3).dims == (1, 2, 3, 4)
    assert degree_dims(polynomial_algebra(3), 4).dims == (1, 3, 6, 10, 15)
    assert degree_dims(dual(polynomial_algebra(3)), 4).dims == (1, 3, 3, 1, 0)


def test_units_and_degenerate_cases():
    assert degree_dims(unit_black(), 3).dims == (1, 1, 0, 0)
    assert degree_dims(unit_white(), 3).dims == (1, 1, 1, 1)
    assert degree_dims(free_algebra(3), 0).dims == (1,)
    with pytest.raises(ValueError):
        degree_dims(free_algebra(1), -1)
    with pytest.raises(ValueError):
        degree_dims(free_algebra(1), 2, method="magic")


def test_keel_component_small():
    assert degree_dims(component_algebra(4), 3).dims == (1, 5, 1, 0)
    assert degree_dims(component_algebra(3), 3).dims == (1, 1, 0, 0)


def test_monomial_oracle(rng):
    for _ in range(25):
        n = rng.randint(1, 3)
        pairs = [(i, j) for i in range(n) for j in range(n)]
        forbidden = rng.sample(pairs, rng.randint(0, len(pairs)))
        A = monomial_algebra(n, forbidden)
        want = tuple(count_words(n, forbidden, d) for d in range(5))
        assert degree_dims(A, 4).dims == want
        assert degree_dims(A, 4, method="tensor").dims == want


def test_methods_agree(rng):
    for _ in range(30):
        A = random_algebra(rng)
        assert degree_dims(A, 4).dims == degree_dims(A, 4, method="tensor").dims


def test_degree_two_and_submultiplicativity(rng):
    for _ in range(30):
        A = random_algebra(rng)
        dims = degree_dims(A, 4).dims
        assert dims[2] == A.dim1 ** 2 - A.num_relations
        for i in range(5):
            for k in range(5 - i):
                assert dims[i + k] <= dims[i] * dims[k]


def test_relation_ideal_rank_matches():
    A = polynomial_algebra(2)
    assert relation_ideal_rank(A, 1) == 0
    assert relation_ideal_rank(A, 2) == 1
    assert relation_ideal_rank(A, 3) == 8 - 4


def test_resource_bound():
    with pytest.raises(ResourceBoundExceeded):
        degree_dims(free_algebra(5), 8, bound=1000)


def test_cancellation():
    ev = threading.Event()
    ev.set()
    with pytest.raises(Cancelled):
        degree_dims(free_algebra(3), 4, cancel=ev)


def test_series_product_and_forced_dims():
    assert series_product_alternating((1, 2, 3), (1, 2, 1)) == (1, 0, 0)
    assert forced_dual_dims((1, 2, 3, 4)) == (1, 2, 1, 0)
    assert forced_dual_dims((1, 2, 4, 8)) == (1, 2, 0, 0)


def test_residual_first_coefficient_always_zero(rng):
    for _ in range(40):
        A = random_algebra(rng)
        rep = koszul_numeric_check(A, 3)
        assert rep.coefficients[0] == 1
        assert rep.coefficients[1] == 0
        # the degree-two coefficient vanishes because dim R + dim R^perp = n^2
        assert rep.coefficients[2] == 0


def test_koszul_residual_examples():
    for A in (polynomial_algebra(3), free_algebra(2), unit_black(), component_algebra(4)):
        assert koszul_numeric_check(A, 4).consistent
    # x^2 = 0, xy = 0 in two variables: a monomial algebra, hence Koszul
    assert koszul_numeric_check(monomial_algebra(2, [(0, 0), (0, 1)]), 4).consistent
