"""Frame calculus: models, vector fields, alternating tables, d and Lie ops.

A model is a global polynomial frame E_1..E_n on a chart (or an abstract
left-invariant frame on a Lie group, where coordinate derivatives are
zero).  Vector fields and multivectors carry coefficients in the frame
basis; forms carry coefficients in the dual coframe t^1..t^n.  All
coefficients are exact rational polynomials in the chart coordinates.

Structure functions c^k_ij are defined by [E_i, E_j] = sum_k c^k_ij E_k
and are recomputed from the coordinate expressions for chart models, so
the stored table is consistent by construction (and re-checkable).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

from . import linalg
from .errors import ExactDivisionError, MismatchedModels, ModelError
from .poly import Poly

IndexTuple = tuple[int, ...]


def sort_with_sign(indices: Sequence[int]) -> tuple[IndexTuple | None, int]:
    """Sort an index tuple, returning (sorted tuple, permutation sign).

    Returns (None, 0) when an index repeats.
    """
    idx = list(indices)
    sign = 1
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    for a, b in zip(idx, idx[1:]):
        if a == b:
            return None, 0
    return tuple(idx), sign


class FrameModel:
    """Global frame on a chart, or an abstract left-invariant frame."""

    __slots__ = (
        "coords",
        "frame_matrix",
        "D_indices",
        "V_indices",
        "base_point",
        "abstract",
        "structure",
        "_frame_det_at_base",
    )

    def __init__(
        self,
        coords: Sequence[str],
        frame_matrix: Sequence[Sequence[Poly]],
        D_indices: Sequence[int],
        V_indices: Sequence[int],
        base_point: Sequence[Fraction],
        abstract: bool,
        structure: Mapping[tuple[int, int], Mapping[int, Poly]] | None,
    ):
        self.coords = tuple(coords)
        n = len(self.coords)
        if len(frame_matrix) != n or any(len(row) != n for row in frame_matrix):
            raise ModelError("frame matrix must be square of chart dimension")
        self.frame_matrix = tuple(tuple(row) for row in frame_matrix)
        self.D_indices = tuple(sorted(D_indices))
        self.V_indices = tuple(sorted(V_indices))
        if sorted(self.D_indices + self.V_indices) != list(range(n)):
            raise ModelError("D and V indices must partition the frame indices")
        if len(base_point) != n:
            raise ModelError("base point arity does not match chart dimension")
        self.base_point = tuple(Fraction(v) for v in base_point)
        self.abstract = bool(abstract)
        if structure is None:
            structure = self._structure_from_frame()
        self.structure = {
            key: {k: p for k, p in val.items() if not p.is_zero()}
            for key, val in structure.items()
        }
        self.structure = {key: val for key, val in self.structure.items() if val}
        det = linalg.det_fraction(
            [[p.evaluate(self.base_point) for p in row] for row in self.frame_matrix]
        )
        if det == 0:
            raise ModelError("frame is degenerate at the base point")
        self._frame_det_at_base = det

    # -- constructors -------------------------------------------------------

    @classmethod
    def chart(
        cls,
        coords: Sequence[str],
        frame_matrix: Sequence[Sequence[Poly]],
        D_indices: Sequence[int],
        V_indices: Sequence[int],
        base_point: Sequence[Fraction],
    ) -> "FrameModel":
        return cls(coords, frame_matrix, D_indices, V_indices, base_point, False, None)

    @classmethod
    def abstract_frame(
        cls,
        names: Sequence[str],
        structure: Mapping[tuple[int, int], Mapping[int, Fraction]],
        D_indices: Sequence[int],
        V_indices: Sequence[int],
    ) -> "FrameModel":
        n = len(names)
        one = Poly.constant(names, 1)
        zero = Poly.zero(names)
        identity = [[one if i == j else zero for j in range(n)] for i in range(n)]
        table: dict[tuple[int, int], dict[int, Poly]] = {}
        for (i, j), row in structure.items():
            if not (0 <= i < j < n):
                raise ModelError("structure constants must be keyed by i < j")
            table[(i, j)] = {
                k: Poly.constant(names, c) for k, c in row.items() if Fraction(c) != 0
            }
        model = cls(
            names,
            identity,
            D_indices,
            V_indices,
            [Fraction(0)] * n,
            True,
            table,
        )
        model.validate_jacobi()
        return model

    # -- basic accessors -----------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def variables(self) -> tuple[str, ...]:
        return self.coords

    def zero_poly(self) -> Poly:
        return Poly.zero(self.coords)

    def one_poly(self) -> Poly:
        return Poly.constant(self.coords, 1)

    def frame_field(self, index: int) -> "FrameField":
        coeffs = [self.zero_poly()] * self.n
        coeffs[index] = self.one_poly()
        return FrameField(self, coeffs)

    def coframe_form(self, index: int) -> "KForm":
        return KForm(self, 1, {(index,): self.one_poly()})

    def structure_poly(self, i: int, j: int, k: int) -> Poly:
        if i == j:
            return self.zero_poly()
        if i < j:
            return self.structure.get((i, j), {}).get(k, self.zero_poly())
        return -self.structure.get((j, i), {}).get(k, self.zero_poly())

    def structure_row(self, i: int, j: int) -> dict[int, Poly]:
        """Components of [E_i, E_j]; respects antisymmetry."""
        if i == j:
            return {}
        if i < j:
            return dict(self.structure.get((i, j), {}))
        return {k: -p for k, p in self.structure.get((j, i), {}).items()}

    def derive(self, frame_index: int, f: Poly) -> Poly:
        """Directional derivative E_i(f); zero on abstract models."""
        if self.abstract:
            return self.zero_poly()
        acc = self.zero_poly()
        for coord in range(self.n):
            a = self.frame_matrix[coord][frame_index]
            if a.is_zero():
                continue
            df = f.partial(coord)
            if not df.is_zero():
                acc = acc + a * df
        return acc

    def is_constant_coefficient(self) -> bool:
        if self.abstract:
            return True
        if any(not p.is_constant() for row in self.frame_matrix for p in row):
            return False
        return all(
            p.is_constant() for row in self.structure.values() for p in row.values()
        )

    # -- structure recomputation and validation --------------------------------

    def _structure_from_frame(self) -> dict[tuple[int, int], dict[int, Poly]]:
        if self.abstract:
            raise ModelError("abstract models must supply structure constants")
        n = self.n
        table: dict[tuple[int, int], dict[int, Poly]] = {}
        columns = [[self.frame_matrix[coord][j] for coord in range(n)] for j in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                bracket_coords = []
                for coord in range(n):
                    acc = Poly.zero(self.coords)
                    for t in range(n):
                        ai = columns[i][t]
                        aj = columns[j][t]
                        dj = columns[j][coord].partial(t)
                        di = columns[i][coord].partial(t)
                        if not ai.is_zero() and not dj.is_zero():
                            acc = acc + ai * dj
                        if not aj.is_zero() and not di.is_zero():
                            acc = acc - aj * di
                    bracket_coords.append(acc)
                matrix = [[columns[k][coord] for k in range(n)] for coord in range(n)]
                try:
                    comps = linalg.cramer_solve_poly(matrix, bracket_coords)
                except ExactDivisionError as exc:
                    raise ModelError(
                        "frame brackets have non-polynomial structure functions"
                    ) from exc
                row = {k: p for k, p in enumerate(comps) if not p.is_zero()}
                if row:
                    table[(i, j)] = row
        return table

    def recomputed_structure_matches(self) -> bool:
        if self.abstract:
            return True
        fresh = self._structure_from_frame()
        return fresh == self.structure

    def validate_jacobi(self) -> None:
        """Exact Jacobi check over all basis triples (raises ModelError)."""
        n = self.n
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    acc: dict[int, Poly] = {}

                    def absorb(sign: int, a: int, row: Mapping[int, Poly]) -> None:
                        # sign * [E_a, row]
                        for m, cm in row.items():
                            inner = self.structure_row(a, m)
                            for t, ct in inner.items():
                                term = cm * ct * sign
                                cur = acc.get(t)
                                cur = term if cur is None else cur + term
                                if cur.is_zero():
                                    acc.pop(t, None)
                                else:
                                    acc[t] = cur
                            if not self.abstract:
                                # derivative of the structure function
                                dm = self.derive(a, cm) * sign
                                if not dm.is_zero():
                                    cur = acc.get(m)
                                    cur = dm if cur is None else cur + dm
                                    if cur.is_zero():
                                        acc.pop(m, None)
                                    else:
                                        acc[m] = cur

                    absorb(1, i, self.structure_row(j, k))
                    absorb(1, j, self.structure_row(k, i))
                    absorb(1, k, self.structure_row(i, j))
                    if acc:
                        raise ModelError(
                            f"Jacobi identity fails on basis triple ({i}, {j}, {k})"
                        )

    def check_same(self, other: "FrameModel") -> None:
        if self is not other:
            raise MismatchedModels("objects built over different models")

    def frame_matrix_at(self, point: Sequence[Fraction]) -> list[list[Fraction]]:
        return [[p.evaluate(point) for p in row] for row in self.frame_matrix]

    def frame_matrix_at_float(self, point: Sequence[float]) -> list[list[float]]:
        return [[p.evaluate_float(point) for p in row] for row in self.frame_matrix]

    def coordinate_differential(self, coord: int) -> "KForm":
        """dx_coord expanded in the coframe: sum_i A[coord][i] t^i."""
        coeffs = {}
        for i in range(self.n):
            a = self.frame_matrix[coord][i]
            if not a.is_zero():
                coeffs[(i,)] = a
        return KForm(self, 1, coeffs)

    def vector_from_coordinates(self, comps: Sequence[Poly]) -> "FrameField":
        """Express a coordinate vector field in the frame (exact solve)."""
        matrix = [
            [self.frame_matrix[coord][j] for j in range(self.n)]
            for coord in range(self.n)
        ]
        try:
            coeffs = linalg.cramer_solve_poly(matrix, list(comps))
        except ExactDivisionError as exc:
            raise ModelError(
                "vector field has non-polynomial frame coefficients"
            ) from exc
        return FrameField(self, coeffs)

    def __repr__(self) -> str:
        kind = "abstract" if self.abstract else "chart"
        return f"FrameModel({kind}, n={self.n}, D={self.D_indices}, V={self.V_indices})"


class FrameField:
    """Vector field with polynomial coefficients in the frame basis."""

    __slots__ = ("model", "coeffs")

    def __init__(self, model: FrameModel, coeffs: Sequence[Poly]):
        if len(coeffs) != model.n:
            raise ModelError("frame field arity mismatch")
        self.model = model
        self.coeffs = tuple(coeffs)

    def __add__(self, other: "FrameField") -> "FrameField":
        self.model.check_same(other.model)
        return FrameField(self.model, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self) -> "FrameField":
        return FrameField(self.model, [-a for a in self.coeffs])

    def __sub__(self, other: "FrameField") -> "FrameField":
        return self + (-other)

    def scale(self, factor) -> "FrameField":
        if isinstance(factor, Poly):
            return FrameField(self.model, [a * factor for a in self.coeffs])
        return FrameField(self.model, [a * Fraction(factor) for a in self.coeffs])

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def apply(self, f: Poly) -> Poly:
        """Derivation on functions: X(f) = sum_i X^i E_i(f)."""
        acc = self.model.zero_poly()
        for i, xi in enumerate(self.coeffs):
            if xi.is_zero():
                continue
            df = self.model.derive(i, f)
            if not df.is_zero():
                acc = acc + xi * df
        return acc

    def evaluate(self, point: Sequence[Fraction]) -> list[Fraction]:
        return [c.evaluate(point) for c in self.coeffs]

    def coordinate_components(self) -> list[Poly]:
        """Components in the coordinate basis (frame matrix times coeffs)."""
        n = self.model.n
        out = []
        for coord in range(n):
            acc = self.model.zero_poly()
            for j in range(n):
                a = self.model.frame_matrix[coord][j]
                if not a.is_zero() and not self.coeffs[j].is_zero():
                    acc = acc + a * self.coeffs[j]
            out.append(acc)
        return out

    def __repr__(self) -> str:
        return "FrameField(" + ", ".join(str(c) for c in self.coeffs) + ")"


def bracket(x: FrameField, y: FrameField) -> FrameField:
    """Lie bracket [X, Y] in frame coefficients.

    [X, Y]^k = sum_ij X^i Y^j c^k_ij + X(Y^k) - Y(X^k).
    """
    x.model.check_same(y.model)
    model = x.model
    acc: dict[int, Poly] = {}

    def put(k: int, p: Poly) -> None:
        if p.is_zero():
            return
        cur = acc.get(k)
        cur = p if cur is None else cur + p
        if cur.is_zero():
            acc.pop(k, None)
        else:
            acc[k] = cur

    for i, xi in enumerate(x.coeffs):
        if xi.is_zero():
            continue
        for j, yj in enumerate(y.coeffs):
            if yj.is_zero() or i == j:
                continue
            for k, c in model.structure_row(i, j).items():
                put(k, xi * yj * c)
    if not model.abstract:
        for k in range(model.n):
            put(k, x.apply(y.coeffs[k]))
            put(k, -y.apply(x.coeffs[k]))
    coeffs = [acc.get(k, model.zero_poly()) for k in range(model.n)]
    return FrameField(model, coeffs)


class _AltTable:
    """Shared machinery for alternating coefficient tables."""

    __slots__ = ("model", "degree", "coeffs")

    def __init__(self, model: FrameModel, degree: int, coeffs: Mapping[IndexTuple, Poly]):
        self.model = model
        self.degree = degree
        clean: dict[IndexTuple, Poly] = {}
        for idx, poly in coeffs.items():
            if len(idx) != degree:
                raise ModelError("coefficient key arity does not match degree")
            if any(a >= b for a, b in zip(idx, idx[1:])):
                raise ModelError("coefficient keys must be strictly increasing")
            if not poly.is_zero():
                clean[tuple(idx)] = poly
        self.coeffs = clean

    def component(self, indices: Sequence[int]) -> Poly:
        """Coefficient on an arbitrary index tuple (signed, 0 on repeats)."""
        key, sign = sort_with_sign(indices)
        if key is None:
            return self.model.zero_poly()
        poly = self.coeffs.get(key)
        if poly is None:
            return self.model.zero_poly()
        return poly if sign > 0 else -poly

    def is_zero(self) -> bool:
        return not self.coeffs

    def _combine(self, other, sign: int):
        self.model.check_same(other.model)
        if self.degree != other.degree:
            raise ModelError("degree mismatch")
        coeffs = dict(self.coeffs)
        for idx, poly in other.coeffs.items():
            cur = coeffs.get(idx)
            term = poly if sign > 0 else -poly
            cur = term if cur is None else cur + term
            if cur.is_zero():
                coeffs.pop(idx, None)
            else:
                coeffs[idx] = cur
        return type(self)(self.model, self.degree, coeffs)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return type(self)(
            self.model, self.degree, {k: -p for k, p in self.coeffs.items()}
        )

    def scale(self, factor):
        if isinstance(factor, Poly):
            table = {k: p * factor for k, p in self.coeffs.items()}
        else:
            table = {k: p * Fraction(factor) for k, p in self.coeffs.items()}
        return type(self)(self.model, self.degree, table)

    def evaluate(self, point: Sequence[Fraction]) -> dict[IndexTuple, Fraction]:
        out = {}
        for idx, poly in self.coeffs.items():
            value = poly.evaluate(point)
            if value != 0:
                out[idx] = value
        return out

    def __eq__(self, other) -> bool:
        return (
            type(self) is type(other)
            and self.model is other.model
            and self.degree == other.degree
            and self.coeffs == other.coeffs
        )

    def __repr__(self) -> str:
        body = ", ".join(f"{idx}: {p}" for idx, p in sorted(self.coeffs.items()))
        return f"{type(self).__name__}(deg={self.degree}, {{{body}}})"


class KForm(_AltTable):
    """Alternating k-form in coframe coefficients."""

    def wedge(self, other: "KForm") -> "KForm":
        self.model.check_same(other.model)
        out_degree = self.degree + other.degree
        coeffs: dict[IndexTuple, Poly] = {}
        for idx1, p1 in self.coeffs.items():
            for idx2, p2 in other.coeffs.items():
                key, sign = sort_with_sign(idx1 + idx2)
                if key is None:
                    continue
                term = p1 * p2 * sign
                cur = coeffs.get(key)
                cur = term if cur is None else cur + term
                if cur.is_zero():
                    coeffs.pop(key, None)
                else:
                    coeffs[key] = cur
        return KForm(self.model, out_degree, coeffs)

    def pair_kvector(self, kv: "KVector") -> Poly:
        """Full pairing of a k-form with a k-vector."""
        self.model.check_same(kv.model)
        if self.degree != kv.degree:
            raise ModelError("degree mismatch in pairing")
        acc = self.model.zero_poly()
        small, large = (self.coeffs, kv.coeffs) if len(self.coeffs) <= len(kv.coeffs) else (kv.coeffs, self.coeffs)
        for idx, p in small.items():
            q = large.get(idx)
            if q is not None:
                acc = acc + p * q
        return acc

    def apply(self, fields: Sequence[FrameField]) -> Poly:
        """Evaluate on k vector fields (multilinear, alternating)."""
        if len(fields) != self.degree:
            raise ModelError("wrong number of arguments")
        acc = self.model.zero_poly()
        for idx, poly in self.coeffs.items():
            minor = [[fields[a].coeffs[i] for a in range(self.degree)] for i in idx]
            acc = acc + poly * _poly_det(minor, self.model)
        return acc


def _poly_det(matrix: Sequence[Sequence[Poly]], model: FrameModel) -> Poly:
    n = len(matrix)
    if n == 0:
        return model.one_poly()
    if n == 1:
        return matrix[0][0]
    if n == 2:
        return matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0]
    acc = model.zero_poly()
    for j in range(n):
        if matrix[0][j].is_zero():
            continue
        minor = [row[:j] + row[j + 1 :] for row in matrix[1:]]
        term = matrix[0][j] * _poly_det(minor, model)
        acc = acc + term if j % 2 == 0 else acc - term
    return acc


class KVector(_AltTable):
    """Alternating k-vector in frame coefficients."""

    def wedge(self, other: "KVector") -> "KVector":
        self.model.check_same(other.model)
        out_degree = self.degree + other.degree
        coeffs: dict[IndexTuple, Poly] = {}
        for idx1, p1 in self.coeffs.items():
            for idx2, p2 in other.coeffs.items():
                key, sign = sort_with_sign(idx1 + idx2)
                if key is None:
                    continue
                term = p1 * p2 * sign
                cur = coeffs.get(key)
                cur = term if cur is None else cur + term
                if cur.is_zero():
                    coeffs.pop(key, None)
                else:
                    coeffs[key] = cur
        return KVector(self.model, out_degree, coeffs)


def frame_fields_wedge(x: FrameField, y: FrameField) -> KVector:
    model = x.model
    coeffs: dict[IndexTuple, Poly] = {}
    for i, xi in enumerate(x.coeffs):
        if xi.is_zero():
            continue
        for j, yj in enumerate(y.coeffs):
            if yj.is_zero() or i == j:
                continue
            key = (i, j) if i < j else (j, i)
            term = xi * yj if i < j else -(xi * yj)
            cur = coeffs.get(key)
            cur = term if cur is None else cur + term
            if cur.is_zero():
                coeffs.pop(key, None)
            else:
                coeffs[key] = cur
    return KVector(model, 2, coeffs)


def ext_d(form: KForm) -> KForm:
    """Exterior derivative via the frame formula.

    d w(E_i0..E_ik) = sum_a (-1)^a E_ia(w(.. hat a ..))
                    + sum_{a<b} (-1)^(a+b) w([E_ia, E_ib], .. hat a hat b ..).
    """
    model = form.model
    k = form.degree
    out: dict[IndexTuple, Poly] = {}

    def put(key: IndexTuple, p: Poly) -> None:
        if p.is_zero():
            return
        cur = out.get(key)
        cur = p if cur is None else cur + p
        if cur.is_zero():
            out.pop(key, None)
        else:
            out[key] = cur

    if k == 0:
        f = form.coeffs.get((), model.zero_poly())
        for i in range(model.n):
            put((i,), model.derive(i, f))
        return KForm(model, 1, out)

    # derivative terms: iterate existing coefficients and insert one index
    if not model.abstract:
        for idx, poly in form.coeffs.items():
            for i in range(model.n):
                if i in idx:
                    continue
                df = model.derive(i, poly)
                if df.is_zero():
                    continue
                key, sign = sort_with_sign((i,) + idx)
                put(key, df * sign)

    # structure terms, enumerated sparsely: for an output key K with the
    # bracket pair (i, j) = (K_a, K_b) at positions a < b, the summand is
    # (-1)^(a+b) c^m_ij w(E_m, K minus {i, j}).  Removing two entries from a
    # sorted tuple gives (-1)^(a+b) = -sign(sort of (i, j) + rest), and
    # w(E_m, rest) = (-1)^(position of m) w_idx with idx = sort of (m) + rest,
    # so iterating over structure entries and coefficient keys covers every
    # nonzero stencil once.
    for (i, j), row in model.structure.items():
        for m, c in row.items():
            for idx, poly in form.coeffs.items():
                if m not in idx:
                    continue
                pos_m = idx.index(m)
                rest = idx[:pos_m] + idx[pos_m + 1 :]
                if i in rest or j in rest:
                    continue
                key, key_sign = sort_with_sign((i, j) + rest)
                if key is None:
                    continue
                inner_sign = -1 if pos_m % 2 else 1
                put(key, c * poly * (-key_sign * inner_sign))
    return KForm(model, k + 1, out)


def interior_product(x: FrameField, form: KForm) -> KForm:
    """Contraction i_X w."""
    model = form.model
    model.check_same(x.model)
    if form.degree == 0:
        raise ModelError("cannot contract a 0-form")
    out: dict[IndexTuple, Poly] = {}
    for idx, poly in form.coeffs.items():
        for pos, i in enumerate(idx):
            xi = x.coeffs[i]
            if xi.is_zero():
                continue
            rest = idx[:pos] + idx[pos + 1 :]
            sign = -1 if pos % 2 else 1
            term = xi * poly * sign
            cur = out.get(rest)
            cur = term if cur is None else cur + term
            if cur.is_zero():
                out.pop(rest, None)
            else:
                out[rest] = cur
    return KForm(model, form.degree - 1, out)


def lie_derivative(x: FrameField, form: KForm) -> KForm:
    """Cartan formula: L_X w = i_X dw + d i_X w."""
    first = interior_product(x, ext_d(form))
    if form.degree == 0:
        return KForm(form.model, 0, {(): x.apply(form.coeffs.get((), form.model.zero_poly()))})
    second = ext_d(interior_product(x, form))
    return first + second


def contract(columns: Mapping[int, KVector], eta: KForm) -> KForm:
    """Contraction of a bivector-valued column table into a 2-form.

    columns maps a frame index m to a degree-2 KVector; the result is the
    1-form v -> eta(columns applied to v), i.e. coefficient on t^m equals
    the full pairing of eta with columns[m].
    """
    if eta.degree != 2:
        raise ModelError("contraction expects a 2-form")
    model = eta.model
    out: dict[IndexTuple, Poly] = {}
    for m, bivec in columns.items():
        value = eta.pair_kvector(bivec)
        if not value.is_zero():
            out[(m,)] = value
    return KForm(model, 1, out)


def evaluate(obj, point: Sequence[Fraction]):
    """Evaluate a Poly, FrameField, or alternating table at a point."""
    if isinstance(obj, Poly):
        return obj.evaluate(point)
    if isinstance(obj, FrameField):
        return obj.evaluate(point)
    if isinstance(obj, _AltTable):
        return obj.evaluate(point)
    raise TypeError(f"cannot evaluate object of type {type(obj).__name__}")
