"""Shared model builders for the test suite."""

from fractions import Fraction

from hk.exterior import FrameModel
from hk.holonomy import HolonomyAlgebra, sym2_action
from hk.liegroups import LieAlgebraSpec
from hk.poly import parse_poly

X3 = ("x", "y", "z")


def chart_model(coords, columns, d, v, base=None):
    """Chart model from per-field coordinate component strings."""
    fields = [[parse_poly(s, coords) for s in col] for col in columns]
    n = len(coords)
    matrix = [[fields[j][i] for j in range(n)] for i in range(n)]
    if base is None:
        base = [Fraction(0)] * n
    return FrameModel.chart(coords, matrix, d, v, base)


def heisenberg_model():
    """D = span{d/dx, d/dy + x d/dz} inside R^3."""
    return chart_model(X3, (("1", "0", "0"), ("0", "1", "x"), ("0", "0", "1")), [0, 1], [2])


def x2_model():
    """Singular variant d/dy + x^2 d/dz; the growth vector jumps at x = 0."""
    return chart_model(X3, (("1", "0", "0"), ("0", "1", "x^2"), ("0", "0", "1")), [0, 1], [2])


def ex51_model(phi1="0", phi2="0"):
    """Symmetric bracket frame with a twisted complement field.

    X = d/dx - y/2 d/dz, Y = d/dy + x/2 d/dz, Z = d/dz + phi1 X + phi2 Y,
    D = span{X, Y}, V = span{Z}.
    """
    p1 = parse_poly(phi1, X3)
    p2 = parse_poly(phi2, X3)
    cols = [
        [parse_poly(s, X3) for s in col]
        for col in (("1", "0", "-1/2*y"), ("0", "1", "1/2*x"), ("0", "0", "1"))
    ]
    zcol = [cols[2][i] + p1 * cols[0][i] + p2 * cols[1][i] for i in range(3)]
    matrix = [[cols[0][i], cols[1][i], zcol[i]] for i in range(3)]
    return FrameModel.chart(X3, matrix, [0, 1], [2], [Fraction(0)] * 3)


def contact5_model(twist="0"):
    """Contact structure on R^5 with an optional twist of the Reeb field.

    X_i = d/dx_i - y_i/2 d/dz, Y_i = d/dy_i + x_i/2 d/dz for i = 1, 2 and
    Z = d/dz + twist * X_1; D = span{X_1, Y_1, X_2, Y_2}, V = span{Z}.
    """
    coords = ("x1", "y1", "x2", "y2", "z")
    t = parse_poly(twist, coords)
    cols = [
        [parse_poly(s, coords) for s in comps]
        for comps in (
            ("1", "0", "0", "0", "-1/2*y1"),
            ("0", "1", "0", "0", "1/2*x1"),
            ("0", "0", "1", "0", "-1/2*y2"),
            ("0", "0", "0", "1", "1/2*x2"),
            ("0", "0", "0", "0", "1"),
        )
    ]
    zcol = [cols[4][i] + t * cols[0][i] for i in range(5)]
    matrix = [[cols[j][i] for j in range(4)] + [zcol[i]] for i in range(5)]
    return FrameModel.chart(coords, matrix, [0, 1, 2, 3], [4], [Fraction(0)] * 5)


def heis3_spec():
    """[e1, e2] = e3 on a named three-dimensional basis."""
    spec = LieAlgebraSpec(3, ["e1", "e2", "e3"], {(0, 1): {2: Fraction(1)}},
                          grading=[[0, 1], [2]])
    spec.validate()
    return spec


def so3_spec():
    """[e1, e2] = e3, [e1, e3] = -e2, [e2, e3] = e1."""
    spec = LieAlgebraSpec(
        3,
        ["e1", "e2", "e3"],
        {(0, 1): {2: Fraction(1)}, (0, 2): {1: Fraction(-1)}, (1, 2): {0: Fraction(1)}},
    )
    spec.validate()
    return spec


def sl2_spec():
    """[h, e] = 2e, [h, f] = -2f, [e, f] = h."""
    spec = LieAlgebraSpec(
        3,
        ["h", "e", "f"],
        {(0, 1): {1: Fraction(2)}, (0, 2): {2: Fraction(-2)}, (1, 2): {0: Fraction(1)}},
    )
    spec.validate()
    return spec


def ideal4_spec():
    """[e1, e2] = e3, [e1, e3] = e4; span{e3, e4} is an ideal."""
    spec = LieAlgebraSpec(
        4,
        ["e1", "e2", "e3", "e4"],
        {(0, 1): {2: Fraction(1)}, (0, 2): {3: Fraction(1)}},
    )
    spec.validate()
    return spec


def perturbed_heis_spec(d1, d2, d3, d4, d5, d6):
    """Six-parameter unimodular perturbation family around [e1, e2] = e3.

    Brackets come from a symmetric matrix M via [e_i, e_j] = sum_k eps_ijl
    M[l][k] e_k, which satisfies the Jacobi identity for every symmetric M.
    Here M = [[d1, d2, d3], [d2, d4, d5], [d3, d5, 1 + d6]]; d = 0 recovers
    the exact bracket relation of the unperturbed model, and the e3 component
    of [e1, e2] stays 1 + d6, so small draws remain bracket generating.
    """
    m11, m12, m13 = Fraction(d1), Fraction(d2), Fraction(d3)
    m22, m23, m33 = Fraction(d4), Fraction(d5), 1 + Fraction(d6)
    rows = {
        (0, 1): {0: m13, 1: m23, 2: m33},
        (1, 2): {0: m11, 1: m12, 2: m13},
        (0, 2): {0: -m12, 1: -m22, 2: -m23},
    }
    brackets = {}
    for key, row in rows.items():
        entries = {k: c for k, c in row.items() if c != 0}
        if entries:
            brackets[key] = entries
    spec = LieAlgebraSpec(3, ["e1", "e2", "e3"], brackets)
    spec.validate()
    return spec


def synthetic_holonomy(mats, nu, stabilized=True, reason="synthetic"):
    """Holonomy span with a prescribed basis, for exercising the decision paths."""
    basis = [[[Fraction(x) for x in row] for row in mat] for mat in mats]
    return HolonomyAlgebra(
        model=heisenberg_model(),
        nu=nu,
        basis=basis,
        sym2_basis=[sym2_action(b) for b in basis],
        depth_used=0,
        stabilized=stabilized,
        reason=reason,
        rank_history=[len(basis)],
        words_kept=len(basis),
    )
