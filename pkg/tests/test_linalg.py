"""Tests for exact rational and polynomial linear algebra."""

import random
from fractions import Fraction

from hk.linalg import (
    PMat,
    SpanReducer,
    bareiss_det,
    congruence_diagonalize,
    cramer_solve_poly,
    dense_to_sparse,
    det_fraction,
    inv_fraction,
    is_positive_definite,
    leading_principal_minors,
    mat_commutator,
    mat_mul,
    nullspace_fraction,
    rank_fraction,
    rref_fraction,
    solve_fraction,
    sparse_to_dense,
)
from hk.poly import Poly, parse_poly

V = ("x", "y")


def rand_mat(rng, n, m=None):
    m = n if m is None else m
    return [[Fraction(rng.randrange(-6, 7), rng.randrange(1, 4)) for _ in range(m)]
            for _ in range(n)]


def test_rref_shape_and_pivots():
    rows = [[Fraction(v) for v in row] for row in ((1, 2, 3), (2, 4, 6), (0, 1, 1))]
    red, pivots = rref_fraction(rows)
    assert pivots == [0, 1]
    assert red[0][:2] == [Fraction(1), Fraction(0)]
    assert red[1][:2] == [Fraction(0), Fraction(1)]
    assert rank_fraction(rows) == 2


def test_nullspace_annihilates():
    rng = random.Random(0)
    for _ in range(20):
        a = rand_mat(rng, 3, 5)
        null = nullspace_fraction(a, 5)
        assert len(null) == 5 - rank_fraction(a)
        for vec in null:
            for row in a:
                assert sum(r * v for r, v in zip(row, vec)) == 0
    assert nullspace_fraction([], 3) == [
        [Fraction(1), Fraction(0), Fraction(0)],
        [Fraction(0), Fraction(1), Fraction(0)],
        [Fraction(0), Fraction(0), Fraction(1)],
    ]


def test_solve_and_inverse():
    rng = random.Random(1)
    solved = 0
    for _ in range(30):
        a = rand_mat(rng, 3)
        if det_fraction(a) == 0:
            continue
        solved += 1
        x_true = [Fraction(rng.randrange(-4, 5)) for _ in range(3)]
        rhs = [sum(r * v for r, v in zip(row, x_true)) for row in a]
        assert solve_fraction(a, rhs) == x_true
        inv = inv_fraction(a)
        prod = mat_mul(a, inv)
        assert prod == [[Fraction(int(i == j)) for j in range(3)] for i in range(3)]
    assert solved > 10
    assert solve_fraction([[Fraction(1), Fraction(1)], [Fraction(1), Fraction(1)]],
                          [Fraction(0), Fraction(1)]) is None


def test_det_multiplicative():
    rng = random.Random(2)
    for _ in range(20):
        a, b = rand_mat(rng, 3), rand_mat(rng, 3)
        assert det_fraction(mat_mul(a, b)) == det_fraction(a) * det_fraction(b)
    assert det_fraction([[Fraction(3)]]) == 3
    assert det_fraction([]) == 1


def test_positive_definite():
    rng = random.Random(3)
    eye = [[Fraction(int(i == j)) for j in range(3)] for i in range(3)]
    assert is_positive_definite(eye)
    assert leading_principal_minors(eye) == [Fraction(1)] * 3
    assert not is_positive_definite([[Fraction(0), Fraction(1)], [Fraction(1), Fraction(0)]])
    assert not is_positive_definite([[Fraction(-1)]])
    for _ in range(15):
        g = rand_mat(rng, 3)
        if det_fraction(g) == 0:
            continue
        # congruence transform of the identity stays positive definite
        gtg = mat_mul([list(col) for col in zip(*g)], g)
        assert is_positive_definite(gtg)
        assert all(m > 0 for m in leading_principal_minors(gtg))


def test_congruence_diagonalize():
    rng = random.Random(4)
    for _ in range(25):
        a = rand_mat(rng, 4)
        sym = [[a[i][j] + a[j][i] for j in range(4)] for i in range(4)]
        columns, diagonal = congruence_diagonalize(sym)
        p = [list(col) for col in zip(*columns)]
        pt = [list(row) for row in columns]
        prod = mat_mul(pt, mat_mul(sym, p))
        for i in range(4):
            for j in range(4):
                assert prod[i][j] == (diagonal[i] if i == j else 0)
    # hyperbolic case: zero diagonal throughout
    columns, diagonal = congruence_diagonalize(
        [[Fraction(0), Fraction(1)], [Fraction(1), Fraction(0)]])
    assert sorted(d > 0 for d in diagonal) == [False, True]


def test_span_reducer():
    rng = random.Random(5)
    red = SpanReducer()
    assert red.rank == 0
    assert not red.contains({"a": Fraction(1)})
    assert red.add({"a": Fraction(2)})
    assert not red.add({"a": Fraction(-7)})
    assert red.add({"a": Fraction(1), "b": Fraction(1)})
    assert red.contains({"b": Fraction(5)})
    assert red.rank == 2
    vecs = [{k: Fraction(rng.randrange(-3, 4)) for k in ("p", "q", "r")} for _ in range(8)]
    red2 = SpanReducer()
    for v in vecs:
        red2.add(dict(v))
    assert red2.rank <= 3
    for v in vecs:
        assert red2.contains(dict(v))
    combo = {}
    for v in vecs[:3]:
        for k, c in v.items():
            combo[k] = combo.get(k, Fraction(0)) + 2 * c
    assert red2.contains(combo)


def test_matrix_helpers():
    a = [[Fraction(1), Fraction(2)], [Fraction(0), Fraction(1)]]
    b = [[Fraction(0), Fraction(1)], [Fraction(1), Fraction(0)]]
    comm = mat_commutator(a, b)
    neg = mat_commutator(b, a)
    assert comm == [[-v for v in row] for row in neg]
    assert dense_to_sparse(a) == {(0, 0): 1, (0, 1): 2, (1, 1): 1}
    assert sparse_to_dense(dense_to_sparse(a), 2) == a


def test_bareiss_det_matches_fraction_det():
    rng = random.Random(6)
    for _ in range(15):
        a = rand_mat(rng, 3)
        mat = [[Poly.constant(V, v) for v in row] for row in a]
        assert bareiss_det(mat).constant_value() == det_fraction(a)
    x = Poly.variable(V, 0)
    y = Poly.variable(V, 1)
    one = Poly.constant(V, 1)
    mat = [[one, x], [y, x * y + one]]
    assert bareiss_det(mat) == x * y + one - x * y == one


def test_cramer_solve_poly():
    x = Poly.variable(V, 0)
    y = Poly.variable(V, 1)
    one = Poly.constant(V, 1)
    # system: [[1, x], [0, 1]] * sol = [x*y + 1, y] has solution (1, y)
    mat = [[one, x], [Poly.zero(V), one]]
    rhs = [x * y + one, y]
    sol = cramer_solve_poly(mat, rhs)
    assert sol == [one, y]


def test_pmat_ring_and_vector():
    rng = random.Random(7)
    x = Poly.variable(V, 0)
    a = PMat(2, V, {(0, 0): x, (0, 1): Poly.constant(V, 2)})
    b = PMat(2, V, {(1, 0): x * x, (1, 1): Poly.constant(V, -1)})
    c = PMat.identity(2, V)
    assert (a @ c) == a
    assert ((a @ b) @ a) == (a @ (b @ a))
    assert a.commutator(b) == -(b.commutator(a))
    assert (a - a).is_zero()
    assert PMat.zero(2, V).is_zero()
    vec = a.to_vector()
    assert all(isinstance(k, tuple) and len(k) == 3 for k in vec)
    pt = (Fraction(1, 2), Fraction(3))
    dense = a.evaluate_dense(pt)
    assert dense[0][0] == Fraction(1, 2)
    assert dense[0][1] == 2
    assert dense[1] == [0, 0]
    frac = rand_mat(rng, 2)
    assert PMat.from_fractions(frac, V).evaluate_dense(pt) == [
        [Fraction(v) for v in row] for row in frac
    ]
