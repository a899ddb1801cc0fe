"""Structure-constant backends: nilpotent Lie algebras and graded splits.

A Lie algebra is given by exact rational structure constants on a named
basis, optionally graded.  Free nilpotent algebras are built on a Hall
basis with structure constants obtained by Jacobi-driven rewriting to
Hall normal form; the basis order is degree first, creation order
second, which keeps golden tests deterministic.

For a stratified (Carnot) algebra of step r the even layers split at
floor(r/2) into a low part and a high part; together with the odd
part this yields a distribution-complement pair whose bracket relation
table is verified exactly rather than assumed.  The high even part is
the candidate fiber; whether it brackets to zero against the low even
part is the exact obstruction test exposed here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from . import linalg
from .errors import ModelError, NotCarnot
from .exterior import FrameModel

BracketTable = dict[tuple[int, int], dict[int, Fraction]]


@dataclass
class LieAlgebraSpec:
    """Exact structure constants on a named basis, optionally graded."""

    dimension: int
    names: list[str]
    brackets: BracketTable
    grading: list[list[int]] | None = None
    meta: dict = field(default_factory=dict)

    def bracket(self, i: int, j: int) -> dict[int, Fraction]:
        """Components of [e_i, e_j]; antisymmetric in (i, j)."""
        if i == j:
            return {}
        if i < j:
            return dict(self.brackets.get((i, j), {}))
        row = self.brackets.get((j, i), {})
        return {k: -c for k, c in row.items()}

    def bracket_combo(
        self, left: Mapping[int, Fraction], right: Mapping[int, Fraction]
    ) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        for i, a in left.items():
            if a == 0:
                continue
            for j, b in right.items():
                coeff = a * b
                if coeff == 0:
                    continue
                for k, c in self.bracket(i, j).items():
                    cur = out.get(k, Fraction(0)) + coeff * c
                    if cur == 0:
                        out.pop(k, None)
                    else:
                        out[k] = cur
        return out

    def degree_of(self, index: int) -> int | None:
        if self.grading is None:
            return None
        for d, layer in enumerate(self.grading, start=1):
            if index in layer:
                return d
        return None

    def validate(self) -> None:
        """Exact antisymmetry/key hygiene and the Jacobi identity."""
        n = self.dimension
        if len(self.names) != n:
            raise ModelError("basis name count does not match dimension")
        for (i, j), row in self.brackets.items():
            if not (0 <= i < j < n):
                raise ModelError("bracket keys must satisfy 0 <= i < j < dim")
            for k, c in row.items():
                if not (0 <= k < n):
                    raise ModelError("bracket component index out of range")
                if not isinstance(c, Fraction):
                    raise ModelError("structure constants must be Fractions")
        if self.grading is not None:
            seen = sorted(i for layer in self.grading for i in layer)
            if seen != list(range(n)):
                raise ModelError("grading must partition the basis indices")
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    total: dict[int, Fraction] = {}
                    for left, mid in ((i, j), (j, k), (k, i)):
                        inner = self.bracket(left, mid)
                        other = k if (left, mid) == (i, j) else (
                            i if (left, mid) == (j, k) else j
                        )
                        for m, c in inner.items():
                            for t, d in self.bracket(m, other).items():
                                cur = total.get(t, Fraction(0)) + c * d
                                if cur == 0:
                                    total.pop(t, None)
                                else:
                                    total[t] = cur
                    if total:
                        raise ModelError(
                            f"Jacobi identity fails on basis triple ({i},{j},{k})"
                        )


# -- free nilpotent algebras on Hall bases ---------------------------------------


@dataclass(frozen=True)
class HallElement:
    index: int
    degree: int
    left: int | None
    right: int | None
    name: str


def hall_basis(n_generators: int, step: int) -> list[HallElement]:
    """Hall basis of the free Lie algebra, truncated at the given degree.

    An element is a generator or a bracket [u, v] of basis elements
    with u < v in the basis order; when v = [a, b] the additional
    condition a <= u applies.  The order is degree first, creation
    order second.
    """
    if n_generators < 2 or step < 1:
        raise ModelError("need at least 2 generators and step >= 1")
    elems: list[HallElement] = [
        HallElement(i, 1, None, None, f"x{i + 1}") for i in range(n_generators)
    ]
    for degree in range(2, step + 1):
        candidates: list[tuple[int, int]] = []
        for u in range(len(elems)):
            for v in range(u + 1, len(elems)):
                if elems[u].degree + elems[v].degree != degree:
                    continue
                right = elems[v]
                if right.left is not None and right.left > u:
                    continue
                candidates.append((u, v))
        for u, v in sorted(candidates):
            name = f"[{elems[u].name},{elems[v].name}]"
            elems.append(HallElement(len(elems), degree, u, v, name))
    return elems


def _hall_structure(
    elems: Sequence[HallElement], step: int
) -> BracketTable:
    hall_pair = {
        (e.left, e.right): e.index for e in elems if e.left is not None
    }
    memo: dict[tuple[int, int], dict[int, Fraction]] = {}

    def expand(u: int, v: int) -> dict[int, Fraction]:
        if u == v:
            return {}
        if u > v:
            return {k: -c for k, c in expand(v, u).items()}
        key = (u, v)
        cached = memo.get(key)
        if cached is not None:
            return cached
        if elems[u].degree + elems[v].degree > step:
            memo[key] = {}
            return {}
        direct = hall_pair.get(key)
        if direct is not None:
            memo[key] = {direct: Fraction(1)}
            return memo[key]
        # v = [a, b] with a > u; Jacobi: [u, [a, b]] = [[u, a], b] + [a, [u, b]]
        a, b = elems[v].left, elems[v].right
        out: dict[int, Fraction] = {}
        for h, c in expand(u, a).items():
            for k, d in expand(h, b).items():
                cur = out.get(k, Fraction(0)) + c * d
                if cur == 0:
                    out.pop(k, None)
                else:
                    out[k] = cur
        for h, c in expand(u, b).items():
            for k, d in expand(a, h).items():
                cur = out.get(k, Fraction(0)) + c * d
                if cur == 0:
                    out.pop(k, None)
                else:
                    out[k] = cur
        memo[key] = out
        return out

    table: BracketTable = {}
    for u in range(len(elems)):
        for v in range(u + 1, len(elems)):
            row = expand(u, v)
            if row:
                table[(u, v)] = row
    return table


def free_nilpotent(n_generators: int, step: int) -> LieAlgebraSpec:
    """Free nilpotent algebra with exact Hall structure constants; graded."""
    elems = hall_basis(n_generators, step)
    table = _hall_structure(elems, step)
    grading: list[list[int]] = [[] for _ in range(step)]
    for e in elems:
        grading[e.degree - 1].append(e.index)
    spec = LieAlgebraSpec(
        dimension=len(elems),
        names=[e.name for e in elems],
        brackets=table,
        grading=grading,
        meta={"free_nilpotent": {"generators": n_generators, "step": step}},
    )
    spec.validate()
    return spec


def witt_dimension(n_generators: int, degree: int) -> int:
    """Number of degree-k basis elements of the free Lie algebra."""

    def mobius(m: int) -> int:
        result = 1
        d = 2
        while d * d <= m:
            if m % d == 0:
                m //= d
                if m % d == 0:
                    return 0
                result = -result
            d += 1
        if m > 1:
            result = -result
        return result

    total = 0
    for d in range(1, degree + 1):
        if degree % d == 0:
            total += mobius(d) * n_generators ** (degree // d)
    assert total % degree == 0
    return total // degree


# -- graded splits ---------------------------------------------------------------


@dataclass
class CarnotSplit:
    odd_part: list[int]
    low_even_part: list[int]
    high_even_part: list[int]
    step: int
    relations: dict[str, bool]


def carnot_split(spec: LieAlgebraSpec) -> CarnotSplit:
    """Split layers into odd, low even, high even; verify bracket table.

    The split puts odd layers in one part, even layers up to half the
    step in a second, and the remaining even layers in a third.  All
    six bracket relations between the parts are checked exactly: the
    odd part brackets onto exactly the even parts, even-low stays in
    the distribution side, the high part is abelian, and so on.
    """
    if spec.grading is None:
        raise NotCarnot("spec carries no grading")
    grading = spec.grading
    r = len(grading)
    if not grading[0]:
        raise NotCarnot("first layer is empty")
    # exact Carnot conditions: [g_1, g_k] = g_{k+1}, [g_i, g_j] in g_{i+j}
    for i in range(1, r + 1):
        for j in range(i, r + 1):
            for a in grading[i - 1]:
                for b in grading[j - 1]:
                    row = spec.bracket(a, b)
                    for k in row:
                        d = spec.degree_of(k)
                        if i + j > r or d != i + j:
                            raise NotCarnot(
                                f"bracket of layers {i},{j} leaves layer {i + j}"
                            )
    for k in range(1, r):
        reducer = linalg.SpanReducer()
        for a in grading[0]:
            for b in grading[k - 1]:
                row = spec.bracket(a, b)
                if row:
                    reducer.add(row)
        if reducer.rank != len(grading[k]):
            raise NotCarnot(
                f"layer {k + 1} is not generated by brackets of the first layer"
            )

    half = r // 2
    odd = sorted(i for d in range(1, r + 1, 2) for i in grading[d - 1])
    low = sorted(
        i for d in range(2, half + 1, 2) for i in grading[d - 1]
    )
    high = sorted(
        i for d in range(2, r + 1, 2) if d > half for i in grading[d - 1]
    )

    relations = _verify_split_relations(spec, odd, low, high)
    for name, ok in relations.items():
        if not ok:
            raise NotCarnot(f"split bracket relation failed: {name}")
    return CarnotSplit(odd, low, high, r, relations)


def _verify_split_relations(
    spec: LieAlgebraSpec,
    odd: Sequence[int],
    low: Sequence[int],
    high: Sequence[int],
) -> dict[str, bool]:
    odd_set, low_set, high_set = set(odd), set(low), set(high)
    even_set = low_set | high_set

    def lands_in(part_a, part_b, allowed) -> bool:
        for a in part_a:
            for b in part_b:
                if any(k not in allowed for k in spec.bracket(a, b)):
                    return False
        return True

    def spans(part_a, part_b, target: Sequence[int]) -> bool:
        reducer = linalg.SpanReducer()
        for a in part_a:
            for b in part_b:
                row = spec.bracket(a, b)
                if row:
                    reducer.add(row)
        return reducer.rank == len(target)

    def is_zero(part_a, part_b) -> bool:
        return all(
            not spec.bracket(a, b) for a in part_a for b in part_b
        )

    return {
        "odd_odd_spans_even": lands_in(odd, odd, even_set)
        and spans(odd, odd, sorted(even_set)),
        "odd_low_in_odd": lands_in(odd, low, odd_set),
        "odd_high_in_odd": lands_in(odd, high, odd_set),
        "low_low_in_even": lands_in(low, low, even_set),
        "low_high_in_high": lands_in(low, high, high_set),
        "high_high_zero": is_zero(high, high),
    }


def bracket_condition_p2k(
    spec: LieAlgebraSpec, split: CarnotSplit
) -> tuple[bool, dict | None]:
    """Exact test whether the low even part annihilates the high part."""
    for a in split.low_even_part:
        for c in split.high_even_part:
            row = spec.bracket(a, c)
            if row:
                witness = {
                    "left_index": a,
                    "left_name": spec.names[a],
                    "right_index": c,
                    "right_name": spec.names[c],
                    "bracket": {k: v for k, v in sorted(row.items())},
                }
                return False, witness
    return True, None


def to_frame_model(
    spec: LieAlgebraSpec,
    D_indices: Sequence[int],
    V_indices: Sequence[int],
) -> FrameModel:
    """Left-invariant frame model on the abstract backend."""
    return FrameModel.abstract_frame(
        spec.names, spec.brackets, D_indices, V_indices
    )


def split_frame_model(spec: LieAlgebraSpec) -> tuple[FrameModel, CarnotSplit]:
    """Frame model whose distribution is the odd plus low even parts."""
    split = carnot_split(spec)
    d_indices = sorted(split.odd_part + split.low_even_part)
    v_indices = list(split.high_even_part)
    return to_frame_model(spec, d_indices, v_indices), split
