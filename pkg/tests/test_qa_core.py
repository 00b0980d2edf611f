import pytest

from conftest import random_algebra, random_vec
from quadrop.exactlin import DimensionError, LinMap, Subspace, TensorIndex, Vec, embed
from quadrop.qa_core import (
    NotAMorphism,
    QAMorphism,
    QuadraticAlgebra,
    black,
    dual,
    free_algebra,
    free_product,
    initial,
    is_morphism,
    pair_vec,
    permute_generators,
    polynomial_algebra,
    relabel,
    tensor_commuting,
    unit_black,
    unit_white,
    white,
)


def transport(S: Subspace, dims_from, perm) -> Subspace:
    """Image of S under the permutation of tensor factors ``perm`` (new factor k = old factor perm[k])."""
    src = TensorIndex(dims_from)
    dst = TensorIndex([dims_from[p] for p in perm])
    mp = []
    for i in range(src.size):
        m = src.unflat(i)
        mp.append(dst.flat([m[p] for p in perm]))
    return embed(S, dst.size, mp)


def black_commuted(A, B):
    """black(B, A) rewritten in A_1 (x) B_1 coordinates."""
    BA = black(B, A)
    # generators (b, a) -> (a, b); pairs ((b, a), (b', a')) with factors (b, a, b', a')
    return transport(BA.relations, (B.dim1, A.dim1, B.dim1, A.dim1), (1, 0, 3, 2))


# ------------------------------------------------------------- algebras


def test_construction_validates():
    with pytest.raises(DimensionError):
        QuadraticAlgebra(2, Subspace.zero(3))
    with pytest.raises(ValueError):
        QuadraticAlgebra(2, Subspace.zero(4), ("x", "x"))
    A = QuadraticAlgebra(2, Subspace.zero(4))
    assert A.names == ("x0", "x1")


def test_units_and_initial():
    assert (unit_black().dim1, unit_black().num_relations) == (1, 1)
    assert (unit_white().dim1, unit_white().num_relations) == (1, 0)
    assert initial().dim1 == 0


# ----------------------------------------------------------------- dual


def test_dual_of_unit_black_is_free():
    assert dual(unit_black()) == unit_white()


def test_dual_of_polynomial_ring():
    D = dual(polynomial_algebra(2))
    assert D.num_relations == 3
    # exterior-type: x*x, y*y and the symmetric xy + yx
    for r in (pair_vec(2, {(0, 0): 1}), pair_vec(2, {(1, 1): 1}), pair_vec(2, {(0, 1): 1, (1, 0): 1})):
        assert D.relations.contains(r)


def test_dual_involution(rng):
    for _ in range(100):
        A = random_algebra(rng, 4)
        assert dual(dual(A)).relations == A.relations


# ------------------------------------------------------- black and white


def test_black_unit_law(rng):
    for _ in range(20):
        A = random_algebra(rng)
        assert black(A, unit_black()).relations == A.relations
        assert black(unit_black(), A).relations == A.relations


def test_black_of_units():
    assert black(unit_black(), unit_black()) == unit_black()


def test_black_rank_multiplicative(rng):
    for _ in range(30):
        A, B = random_algebra(rng), random_algebra(rng)
        assert black(A, B).num_relations == A.num_relations * B.num_relations


def test_white_unit_law(rng):
    for _ in range(20):
        A = random_algebra(rng)
        assert white(A, unit_white()).relations == A.relations
        assert white(unit_white(), A).relations == A.relations


def test_white_of_free():
    assert white(unit_white(), unit_white()) == unit_white()


def test_duality_exchanges_products(rng):
    for _ in range(50):
        A, B = random_algebra(rng), random_algebra(rng)
        assert dual(black(A, B)).relations == white(dual(A), dual(B)).relations
        assert dual(white(A, B)).relations == black(dual(A), dual(B)).relations


def test_black_white_commutative(rng):
    for _ in range(20):
        A, B = random_algebra(rng), random_algebra(rng)
        assert black_commuted(A, B) == black(A, B).relations
        WB = white(B, A).relations
        assert transport(WB, (B.dim1, A.dim1, B.dim1, A.dim1), (1, 0, 3, 2)) == white(A, B).relations


def test_black_associative(rng):
    for _ in range(15):
        A, B, C = (random_algebra(rng, 2) for _ in range(3))
        left = black(black(A, B), C)
        right = black(A, black(B, C))
        # flat generator index (a*nb + b)*nc + c is the same on both sides
        assert left.relations == right.relations
        assert white(white(A, B), C).relations == white(A, white(B, C)).relations


# ----------------------------------------------------------------- tensor


def test_tensor_with_initial():
    A = polynomial_algebra(2)
    assert tensor_commuting(initial(), A) == A
    assert tensor_commuting(A, initial()) == A


def test_tensor_dimension_count(rng):
    for _ in range(30):
        A, B = random_algebra(rng), random_algebra(rng)
        for sign in (1, -1):
            T = tensor_commuting(A, B, sign)
            assert T.dim1 == A.dim1 + B.dim1
            assert T.num_relations == A.num_relations + A.dim1 * B.dim1 + B.num_relations


def test_tensor_of_dual_numbers():
    T = tensor_commuting(unit_black(), unit_black())
    assert (T.dim1, T.num_relations) == (2, 3)
    assert T.relations.contains(pair_vec(2, {(0, 1): 1, (1, 0): -1}))
    S = tensor_commuting(unit_black(), unit_black(), -1)
    assert S.relations.contains(pair_vec(2, {(0, 1): 1, (1, 0): 1}))


def test_tensor_sign_validated():
    with pytest.raises(ValueError):
        tensor_commuting(unit_black(), unit_black(), 2)


# ------------------------------------------------------------ coproduct


def test_free_product_with_initial_and_ranks(rng):
    A = polynomial_algebra(2)
    assert free_product(initial(), A) == A
    for _ in range(20):
        B, C = random_algebra(rng), random_algebra(rng)
        assert free_product(B, C).num_relations == B.num_relations + C.num_relations


def _inclusions(A, B):
    n = A.dim1 + B.dim1
    ia = LinMap(A.dim1, n, [Vec.basis(n, i) for i in range(A.dim1)])
    ib = LinMap(B.dim1, n, [Vec.basis(n, A.dim1 + i) for i in range(B.dim1)])
    return ia, ib


def test_free_product_retracts(rng):
    for _ in range(20):
        A, B = random_algebra(rng), random_algebra(rng)
        P = free_product(A, B)
        ia, ib = _inclusions(A, B)
        assert is_morphism(ia, A, P) and is_morphism(ib, B, P)
        ra = LinMap(P.dim1, A.dim1, [Vec.basis(A.dim1, i) for i in range(A.dim1)] + [Vec.zero(A.dim1)] * B.dim1)
        assert is_morphism(ra, P, A)


def test_free_product_universal_property(rng):
    found = 0
    for _ in range(300):
        A, B, C = random_algebra(rng, 2), random_algebra(rng, 2), random_algebra(rng, 2)
        f = LinMap(A.dim1, C.dim1, [random_vec(rng, C.dim1, 0.6, -1, 1) for _ in range(A.dim1)])
        g = LinMap(B.dim1, C.dim1, [random_vec(rng, C.dim1, 0.6, -1, 1) for _ in range(B.dim1)])
        if not (is_morphism(f, A, C) and is_morphism(g, B, C)):
            continue
        found += 1
        combined = LinMap(A.dim1 + B.dim1, C.dim1, list(f.rows) + list(g.rows))
        assert is_morphism(combined, free_product(A, B), C)
    assert found >= 20


def test_distributivity_over_coproduct(rng):
    for _ in range(30):
        A, B, C = random_algebra(rng, 2), random_algebra(rng, 2), random_algebra(rng, 2)
        left = black(A, free_product(B, C))
        right = free_product(black(A, B), black(A, C))
        na, nb, nc = A.dim1, B.dim1, C.dim1
        # generator (a, x) of the left side -> its slot on the right side
        perm = []
        for a in range(na):
            for x in range(nb + nc):
                perm.append(a * nb + x if x < nb else na * nb + a * nc + (x - nb))
        assert relabel(left, perm) == right


# ------------------------------------------------------------- morphisms


def test_is_morphism_examples(rng):
    A = random_algebra(rng)
    assert is_morphism(LinMap.identity(A.dim1), A, A)
    B = random_algebra(rng)
    assert is_morphism(LinMap.zero(A.dim1, B.dim1), A, B)
    assert not is_morphism(LinMap.identity(1), unit_black(), unit_white())
    with pytest.raises(DimensionError):
        is_morphism(LinMap.identity(2), unit_black(), unit_white())


def test_qamorphism_validates_and_composes():
    with pytest.raises(NotAMorphism):
        QAMorphism(unit_black(), unit_white(), LinMap.identity(1))
    f = QAMorphism(unit_white(), unit_black(), LinMap.identity(1))
    idb = QAMorphism.identity(unit_black())
    assert idb.compose(f).map == f.map


def test_permute_generators():
    T = tensor_commuting(unit_black(), unit_black())
    ident = permute_generators(T, [0, 1])
    assert ident.map == LinMap.identity(2) and ident.dst == T
    swap = permute_generators(T, [1, 0])
    assert swap.dst == T  # symmetric presentation
    with pytest.raises(ValueError):
        permute_generators(T, [0, 0])


def test_permutations_compose(rng):
    A = random_algebra(rng, 3)
    while A.dim1 < 3:
        A = random_algebra(rng, 3)
    p, q = [1, 2, 0], [0, 2, 1]
    f = permute_generators(A, p)
    g = permute_generators(f.dst, q)
    pq = [q[p[i]] for i in range(3)]
    h = permute_generators(A, pq)
    assert g.compose(f).map == h.map
    assert g.dst == h.dst
