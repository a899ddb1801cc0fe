"""Exact linear algebra over Q and over polynomial rings.

Dense routines (RREF, nullspace, determinants, congruence
diagonalization, principal minors) work on lists of Fractions.  The
incremental :class:`SpanReducer` accumulates a reduced echelon basis of
sparse vectors keyed by arbitrary orderable keys; it backs every span
computation in the engine (module generators, holonomy values, symbolic
word matrices).  Polynomial matrices get fraction-free Bareiss
elimination and Cramer solves with exact division.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Hashable, Mapping, Sequence

from .errors import ExactDivisionError
from .poly import Poly

F0 = Fraction(0)
F1 = Fraction(1)


# -- dense exact routines over Q ------------------------------------------------


def rref_fraction(rows: Sequence[Sequence[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form; returns (rows, pivot column indices)."""
    mat = [list(map(Fraction, row)) for row in rows]
    if not mat:
        return [], []
    ncols = len(mat[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot_row = None
        for i in range(r, len(mat)):
            if mat[i][c] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        mat[r], mat[pivot_row] = mat[pivot_row], mat[r]
        scale = mat[r][c]
        mat[r] = [v / scale for v in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                factor = mat[i][c]
                mat[i] = [a - factor * b for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    return mat[:r], pivots


def nullspace_fraction(rows: Sequence[Sequence[Fraction]], ncols: int) -> list[list[Fraction]]:
    """Basis of the right nullspace of the matrix with the given column count."""
    red, pivots = rref_fraction(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis: list[list[Fraction]] = []
    for f in free:
        vec = [F0] * ncols
        vec[f] = F1
        for row, p in zip(red, pivots):
            vec[p] = -row[f]
        basis.append(vec)
    return basis


def rank_fraction(rows: Sequence[Sequence[Fraction]]) -> int:
    red, _ = rref_fraction(rows)
    return len(red)


def solve_fraction(
    matrix: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]
) -> list[Fraction] | None:
    """One exact solution of matrix * x = rhs, or None if inconsistent."""
    if not matrix:
        return None if any(v != 0 for v in rhs) else []
    ncols = len(matrix[0])
    aug = [list(map(Fraction, row)) + [Fraction(b)] for row, b in zip(matrix, rhs)]
    red, pivots = rref_fraction(aug)
    for row in red:
        if all(v == 0 for v in row[:ncols]) and row[ncols] != 0:
            return None
    x = [F0] * ncols
    for row, p in zip(red, pivots):
        if p == ncols:
            return None
        x[p] = row[ncols]
    return x


def det_fraction(matrix: Sequence[Sequence[Fraction]]) -> Fraction:
    mat = [list(map(Fraction, row)) for row in matrix]
    n = len(mat)
    det = F1
    for c in range(n):
        pivot_row = None
        for i in range(c, n):
            if mat[i][c] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            return F0
        if pivot_row != c:
            mat[c], mat[pivot_row] = mat[pivot_row], mat[c]
            det = -det
        det *= mat[c][c]
        inv = F1 / mat[c][c]
        for i in range(c + 1, n):
            if mat[i][c] != 0:
                factor = mat[i][c] * inv
                mat[i] = [a - factor * b for a, b in zip(mat[i], mat[c])]
    return det


def inv_fraction(matrix: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    n = len(matrix)
    aug = [list(map(Fraction, row)) + [F1 if i == j else F0 for j in range(n)]
           for i, row in enumerate(matrix)]
    red, pivots = rref_fraction(aug)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in red[:n]]


def leading_principal_minors(sym: Sequence[Sequence[Fraction]]) -> list[Fraction]:
    n = len(sym)
    return [det_fraction([row[: k + 1] for row in sym[: k + 1]]) for k in range(n)]


def is_positive_definite(sym: Sequence[Sequence[Fraction]]) -> bool:
    """Sylvester criterion with exact arithmetic; input must be symmetric."""
    return all(m > 0 for m in leading_principal_minors(sym))


def congruence_diagonalize(
    sym: Sequence[Sequence[Fraction]],
) -> tuple[list[list[Fraction]], list[Fraction]]:
    """Rational P with P^T S P diagonal; returns (columns of P, diagonal).

    Works for any symmetric rational matrix (Lagrange reduction with the
    hyperbolic-pair fix when every usable diagonal entry vanishes).
    """
    n = len(sym)
    s = [list(map(Fraction, row)) for row in sym]
    p = [[F1 if i == j else F0 for j in range(n)] for i in range(n)]

    def add_col(dst: int, src: int, factor: Fraction) -> None:
        # column op on S (both sides) and on P
        for i in range(n):
            s[i][dst] += factor * s[i][src]
        for j in range(n):
            s[dst][j] += factor * s[src][j]
        for i in range(n):
            p[i][dst] += factor * p[i][src]

    def swap_col(a: int, b: int) -> None:
        for i in range(n):
            s[i][a], s[i][b] = s[i][b], s[i][a]
        for j in range(n):
            s[a][j], s[b][j] = s[b][j], s[a][j]
        for i in range(n):
            p[i][a], p[i][b] = p[i][b], p[i][a]

    for k in range(n):
        pivot = next((i for i in range(k, n) if s[i][i] != 0), None)
        if pivot is None:
            pair = next(
                ((i, j) for i in range(k, n) for j in range(i + 1, n) if s[i][j] != 0),
                None,
            )
            if pair is None:
                break
            add_col(pair[0], pair[1], F1)
            pivot = pair[0]
        if pivot != k:
            swap_col(k, pivot)
        for j in range(k + 1, n):
            if s[k][j] != 0:
                add_col(j, k, -s[k][j] / s[k][k])
    cols = [[p[i][j] for i in range(n)] for j in range(n)]
    diag = [s[i][i] for i in range(n)]
    return cols, diag


def mat_mul(a, b):
    n, m, k = len(a), len(b[0]), len(b)
    return [
        [sum((a[i][t] * b[t][j] for t in range(k)), F0) for j in range(m)]
        for i in range(n)
    ]


def mat_commutator(a, b):
    ab = mat_mul(a, b)
    ba = mat_mul(b, a)
    return [[x - y for x, y in zip(r1, r2)] for r1, r2 in zip(ab, ba)]


def mat_is_zero(a) -> bool:
    return all(v == 0 for row in a for v in row)


# -- incremental span accumulation ----------------------------------------------


class SpanReducer:
    """Reduced echelon basis of sparse vectors with orderable keys.

    add() returns True when the vector enlarges the span.  Rows are kept
    mutually reduced with unit pivots, so membership tests and basis
    extraction are deterministic for a given insertion order.
    """

    __slots__ = ("rows",)

    def __init__(self) -> None:
        self.rows: dict[Hashable, dict[Hashable, Fraction]] = {}

    def reduce(self, vec: Mapping[Hashable, Fraction]) -> dict[Hashable, Fraction]:
        v = {k: Fraction(c) for k, c in vec.items() if c != 0}
        for key in sorted(v.keys()):
            if key not in v:
                continue
            row = self.rows.get(key)
            if row is None:
                continue
            coeff = v[key]
            for kk, cc in row.items():
                acc = v.get(kk, F0) - coeff * cc
                if acc == 0:
                    v.pop(kk, None)
                else:
                    v[kk] = acc
        return v

    def contains(self, vec: Mapping[Hashable, Fraction]) -> bool:
        return not self.reduce(vec)

    def add(self, vec: Mapping[Hashable, Fraction]) -> bool:
        residue = self.reduce(vec)
        if not residue:
            return False
        pivot = min(residue.keys())
        scale = residue[pivot]
        normalized = {k: c / scale for k, c in residue.items()}
        for row in self.rows.values():
            if pivot in row:
                coeff = row[pivot]
                for kk, cc in normalized.items():
                    acc = row.get(kk, F0) - coeff * cc
                    if acc == 0:
                        row.pop(kk, None)
                    else:
                        row[kk] = acc
        self.rows[pivot] = normalized
        return True

    @property
    def rank(self) -> int:
        return len(self.rows)

    def basis(self) -> list[dict[Hashable, Fraction]]:
        return [dict(self.rows[k]) for k in sorted(self.rows.keys())]


# -- polynomial matrices ---------------------------------------------------------


def bareiss_det(matrix: Sequence[Sequence[Poly]]) -> Poly:
    """Fraction-free determinant of a square polynomial matrix."""
    n = len(matrix)
    if n == 0:
        raise ValueError("empty matrix")
    variables = matrix[0][0].variables
    mat = [list(row) for row in matrix]
    sign = 1
    prev = Poly.constant(variables, 1)
    for k in range(n - 1):
        if mat[k][k].is_zero():
            pivot_row = next((i for i in range(k + 1, n) if not mat[i][k].is_zero()), None)
            if pivot_row is None:
                return Poly.zero(variables)
            mat[k], mat[pivot_row] = mat[pivot_row], mat[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = mat[i][j] * mat[k][k] - mat[i][k] * mat[k][j]
                mat[i][j] = num.div_exact(prev)
            mat[i][k] = Poly.zero(variables)
        prev = mat[k][k]
    det = mat[n - 1][n - 1]
    return det if sign > 0 else -det


def cramer_solve_poly(
    matrix: Sequence[Sequence[Poly]], rhs: Sequence[Poly]
) -> list[Poly]:
    """Exact polynomial solution of matrix * x = rhs via Cramer.

    Raises ExactDivisionError when the solution does not stay in the
    polynomial ring (or the determinant vanishes identically).
    """
    n = len(matrix)
    det = bareiss_det(matrix)
    if det.is_zero():
        raise ExactDivisionError("singular polynomial system")
    out: list[Poly] = []
    for col in range(n):
        modified = [
            [rhs[i] if j == col else matrix[i][j] for j in range(n)] for i in range(n)
        ]
        out.append(bareiss_det(modified).div_exact(det))
    return out


class PMat:
    """Sparse square matrix with polynomial entries (zeros omitted)."""

    __slots__ = ("n", "variables", "entries")

    def __init__(self, n: int, variables: Sequence[str], entries: Mapping[tuple[int, int], Poly] | None = None):
        self.n = n
        self.variables = tuple(variables)
        self.entries: dict[tuple[int, int], Poly] = {}
        if entries:
            for key, poly in entries.items():
                if not poly.is_zero():
                    self.entries[key] = poly

    @classmethod
    def zero(cls, n: int, variables: Sequence[str]) -> "PMat":
        return cls(n, variables)

    @classmethod
    def identity(cls, n: int, variables: Sequence[str]) -> "PMat":
        one = Poly.constant(variables, 1)
        return cls(n, variables, {(i, i): one for i in range(n)})

    @classmethod
    def from_fractions(cls, rows: Sequence[Sequence[Fraction]], variables: Sequence[str]) -> "PMat":
        entries = {}
        for i, row in enumerate(rows):
            for j, value in enumerate(row):
                if value != 0:
                    entries[(i, j)] = Poly.constant(variables, value)
        return cls(len(rows), variables, entries)

    def is_zero(self) -> bool:
        return not self.entries

    def __add__(self, other: "PMat") -> "PMat":
        entries = dict(self.entries)
        for key, poly in other.entries.items():
            acc = entries.get(key)
            acc = poly if acc is None else acc + poly
            if acc.is_zero():
                entries.pop(key, None)
            else:
                entries[key] = acc
        return PMat(self.n, self.variables, entries)

    def __neg__(self) -> "PMat":
        return PMat(self.n, self.variables, {k: -p for k, p in self.entries.items()})

    def __sub__(self, other: "PMat") -> "PMat":
        return self + (-other)

    def scale(self, factor) -> "PMat":
        if isinstance(factor, Poly):
            if factor.is_zero():
                return PMat.zero(self.n, self.variables)
            return PMat(self.n, self.variables, {k: p * factor for k, p in self.entries.items()})
        factor = Fraction(factor)
        if factor == 0:
            return PMat.zero(self.n, self.variables)
        return PMat(self.n, self.variables, {k: p * factor for k, p in self.entries.items()})

    def __matmul__(self, other: "PMat") -> "PMat":
        by_row: dict[int, list[tuple[int, Poly]]] = {}
        for (i, k), poly in self.entries.items():
            by_row.setdefault(i, []).append((k, poly))
        other_rows: dict[int, list[tuple[int, Poly]]] = {}
        for (k, j), poly in other.entries.items():
            other_rows.setdefault(k, []).append((j, poly))
        entries: dict[tuple[int, int], Poly] = {}
        for i, left in by_row.items():
            for k, pik in left:
                right = other_rows.get(k)
                if not right:
                    continue
                for j, pkj in right:
                    key = (i, j)
                    prod = pik * pkj
                    acc = entries.get(key)
                    acc = prod if acc is None else acc + prod
                    if acc.is_zero():
                        entries.pop(key, None)
                    else:
                        entries[key] = acc
        return PMat(self.n, self.variables, entries)

    def commutator(self, other: "PMat") -> "PMat":
        return (self @ other) - (other @ self)

    def map_entries(self, fn) -> "PMat":
        return PMat(self.n, self.variables, {k: fn(p) for k, p in self.entries.items()})

    def evaluate(self, point) -> dict[tuple[int, int], Fraction]:
        out: dict[tuple[int, int], Fraction] = {}
        for key, poly in self.entries.items():
            value = poly.evaluate(point)
            if value != 0:
                out[key] = value
        return out

    def evaluate_dense(self, point) -> list[list[Fraction]]:
        dense = [[F0] * self.n for _ in range(self.n)]
        for (i, j), poly in self.entries.items():
            dense[i][j] = poly.evaluate(point)
        return dense

    def to_vector(self) -> dict[tuple[int, int, tuple], Fraction]:
        """Flatten to a sparse vector keyed by (row, col, monomial)."""
        vec: dict[tuple[int, int, tuple], Fraction] = {}
        for (i, j), poly in self.entries.items():
            for mono, coeff in poly.terms.items():
                vec[(i, j, mono)] = coeff
        return vec

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PMat)
            and self.n == other.n
            and self.entries == other.entries
        )

    def __hash__(self):
        raise TypeError("PMat is mutable in spirit; do not hash")

    def __repr__(self) -> str:
        return f"PMat(n={self.n}, nnz={len(self.entries)})"


def dense_to_sparse(rows: Sequence[Sequence[Fraction]]) -> dict[tuple[int, int], Fraction]:
    out = {}
    for i, row in enumerate(rows):
        for j, value in enumerate(row):
            if value != 0:
                out[(i, j)] = value
    return out


def sparse_to_dense(entries: Mapping[tuple[int, int], Fraction], n: int) -> list[list[Fraction]]:
    dense = [[F0] * n for _ in range(n)]
    for (i, j), value in entries.items():
        dense[i][j] = value
    return dense
