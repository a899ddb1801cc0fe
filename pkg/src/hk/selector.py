"""Selectors: bivector-valued correctors attached to an equiregular flag.

A selector chi assigns to each frame direction of flag level L >= 2 a
degree-2 multivector built from strictly lower levels, normalized so
that for every one-form a annihilating flag level k and every field v in
level k+1, a(v) = -da(chi(v)).  Selectors let one-forms prescribed on
the distribution extend canonically, and twist the exterior derivative
into an operator that only sees the restriction to the distribution.

The constructive route mirrors the flag: on each level the bracket map
from candidate bivectors onto the next level is assembled from the
structure functions, and the minimum-norm preimage in the
frame-orthonormal metric is solved exactly.  An optional bivector
filter restricts the candidate pairs (used by the graded Lie-group
builders); the minimum-norm solution is blockwise, so the filtered and
unfiltered constructions both satisfy the axioms whenever they solve.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Mapping, Sequence

from . import linalg
from .distribution import Flag
from .errors import ExactDivisionError, NoAdaptedFrame
from .exterior import FrameModel, KForm, KVector, contract, ext_d
from .poly import Poly

BivectorFilter = Callable[[int, int], bool]


@dataclass
class Selector:
    """Columns of the selector over the model frame (levels >= 2 only)."""

    model: FrameModel
    flag: Flag
    columns: dict[int, KVector]
    evidence: dict = field(default_factory=dict)

    @property
    def step(self) -> int:
        return self.flag.step

    def column(self, m: int) -> KVector:
        col = self.columns.get(m)
        if col is None:
            return KVector(self.model, 2, {})
        return col

    def iota(self, eta: KForm) -> KForm:
        """Contraction (i_chi eta)(v) = eta(chi(v)) for a 2-form eta."""
        return contract(self.columns, eta)

    def id_plus_iota_d(self, beta: KForm, times: int = 1) -> KForm:
        """(id + i_chi d)^times applied to a 1-form."""
        out = beta
        for _ in range(times):
            out = out + self.iota(ext_d(out))
        return out


def build_selector(
    flag: Flag, bivector_filter: BivectorFilter | None = None
) -> Selector:
    """Construct the minimum-norm selector adapted to the flag.

    For each level k in 1..r-1 the bracket map Phi sends candidate
    bivectors E_a ^ E_b (a in level 1, b in level k; both in level 1
    when k = 1) to the level-(k+1) components of [E_a, E_b].  Each
    level-(k+1) frame direction gets the minimum-norm exact preimage,
    chi(E_m) = Phi^T (Phi Phi^T)^{-1} e_m.  Raises NoAdaptedFrame when
    the flag carries no adapted frame or the solve leaves the
    polynomial ring.
    """
    model = flag.model
    if not flag.equiregular:
        raise NoAdaptedFrame("flag is not equiregular at the base point")
    if flag.step == 1:
        # No directions of level two or higher exist, so there is nothing
        # to select; the empty column map satisfies both axioms vacuously.
        selector = Selector(model=model, flag=flag, columns={})
        selector.evidence = verify_selector(selector)
        return selector
    if not flag.bracket_generating:
        raise NoAdaptedFrame("flag is not bracket generating")
    if flag.frame_levels is None:
        raise NoAdaptedFrame("no adapted frame of model fields exists")
    lev = flag.frame_levels
    r = flag.step
    by_level: dict[int, list[int]] = {}
    for m, L in lev.items():
        by_level.setdefault(L, []).append(m)
    for L in by_level:
        by_level[L].sort()

    columns: dict[int, KVector] = {}
    for k in range(1, r):
        targets = by_level.get(k + 1, [])
        if not targets:
            continue
        if k == 1:
            pairs = list(combinations(by_level.get(1, []), 2))
        else:
            pairs = []
            for a in by_level.get(1, []):
                for b in by_level.get(k, []):
                    pairs.append((a, b) if a < b else (b, a))
            pairs = sorted(set(pairs))
        if bivector_filter is not None:
            pairs = [p for p in pairs if bivector_filter(*p)]
        if not pairs:
            raise NoAdaptedFrame(f"no candidate bivectors reach level {k + 1}")
        # Phi: rows = targets, cols = pairs
        phi = [
            [model.structure_poly(a, b, m) for (a, b) in pairs] for m in targets
        ]
        gram = [
            [
                _dot(phi[i], phi[j], model)
                for j in range(len(targets))
            ]
            for i in range(len(targets))
        ]
        solved = _solve_min_norm(gram, phi, targets, pairs, model)
        columns.update(solved)

    selector = Selector(model=model, flag=flag, columns=columns)
    report = verify_selector(selector)
    if not report["ok"]:
        raise NoAdaptedFrame(
            f"constructed selector fails its axioms: {report['violations'][:1]}"
        )
    selector.evidence = report
    return selector


def _dot(row1: Sequence[Poly], row2: Sequence[Poly], model: FrameModel) -> Poly:
    acc = model.zero_poly()
    for p, q in zip(row1, row2):
        if not p.is_zero() and not q.is_zero():
            acc = acc + p * q
    return acc


def _solve_min_norm(
    gram: list[list[Poly]],
    phi: list[list[Poly]],
    targets: list[int],
    pairs: list[tuple[int, int]],
    model: FrameModel,
) -> dict[int, KVector]:
    t = len(targets)
    out: dict[int, KVector] = {}
    if all(p.is_constant() for row in gram for p in row) and all(
        p.is_constant() for row in phi for p in row
    ):
        dense_gram = [[p.constant_value() for p in row] for row in gram]
        try:
            inv = linalg.inv_fraction(dense_gram)
        except ZeroDivisionError as exc:
            raise NoAdaptedFrame("level bracket map is not surjective") from exc
        dense_phi = [[p.constant_value() for p in row] for row in phi]
        for col_idx, m in enumerate(targets):
            y = [inv[i][col_idx] for i in range(t)]
            coeffs = {}
            for j, pair in enumerate(pairs):
                xi = sum((y[i] * dense_phi[i][j] for i in range(t)), Fraction(0))
                if xi != 0:
                    coeffs[pair] = Poly.constant(model.coords, xi)
            out[m] = KVector(model, 2, coeffs)
        return out
    for col_idx, m in enumerate(targets):
        rhs = [
            Poly.constant(model.coords, 1 if i == col_idx else 0) for i in range(t)
        ]
        try:
            y = linalg.cramer_solve_poly(gram, rhs)
        except ExactDivisionError as exc:
            raise NoAdaptedFrame(
                "minimum-norm selector solve left the polynomial ring"
            ) from exc
        coeffs = {}
        for j, pair in enumerate(pairs):
            xi = model.zero_poly()
            for i in range(t):
                if not y[i].is_zero() and not phi[i][j].is_zero():
                    xi = xi + y[i] * phi[i][j]
            if not xi.is_zero():
                coeffs[pair] = xi
        out[m] = KVector(model, 2, coeffs)
    return out


def verify_selector(selector: Selector) -> dict:
    """Exact check of both selector axioms; returns {ok, violations}.

    Axiom (I): the column of a level-L direction uses only pairs from
    levels < L, and distribution directions have zero column.
    Axiom (II): for k = 1..r-1, every coframe direction m beyond level k
    and every frame direction a within level k+1 satisfy
    delta_(m,a) + d t^m (chi(E_a)) = 0 identically.
    """
    flag = selector.flag
    model = selector.model
    lev = flag.frame_levels
    violations: list[dict] = []
    if flag.step == 1 and not selector.columns:
        # nothing above level one exists; both axioms are vacuous
        return {"ok": True, "violations": []}
    if lev is None:
        return {"ok": False, "violations": [{"kind": "no-adapted-frame"}]}
    r = flag.step

    for m, col in selector.columns.items():
        bound = lev[m] - 1
        if lev[m] == 1 and not col.is_zero():
            violations.append({"kind": "axiom-I", "column": m, "detail": "nonzero on distribution"})
            continue
        for (i, j) in col.coeffs:
            if lev[i] > bound or lev[j] > bound:
                violations.append(
                    {"kind": "axiom-I", "column": m, "pair": (i, j), "bound": bound}
                )

    d_coframe = {m: ext_d(model.coframe_form(m)) for m in range(model.n)}
    for k in range(1, r):
        ann = [m for m in range(model.n) if lev[m] > k]
        inside = [a for a in range(model.n) if lev[a] <= k + 1]
        for m in ann:
            for a in inside:
                residual = d_coframe[m].pair_kvector(selector.column(a))
                if m == a:
                    residual = residual + model.one_poly()
                if not residual.is_zero():
                    violations.append(
                        {
                            "kind": "axiom-II",
                            "k": k,
                            "coframe": m,
                            "field": a,
                            "residual": str(residual),
                        }
                    )
    return {"ok": not violations, "violations": violations}


def extend_one_form(selector: Selector, beta: KForm, eta: KForm) -> KForm:
    """The unique 1-form agreeing with beta on D whose twisted residual is eta.

    alpha = (id + i_chi d)^(r-1) beta
          - i_chi sum_j C(r-1, j+1) (d i_chi)^j eta,   j = 0..r-2.
    The result alpha satisfies alpha|_D = beta|_D and
    (i_chi d alpha) = i_chi eta.
    """
    model = selector.model
    model.check_same(beta.model)
    model.check_same(eta.model)
    r = selector.step
    alpha = selector.id_plus_iota_d(beta, r - 1)
    current = eta
    from math import comb

    for j in range(0, r - 1):
        coeff = comb(r - 1, j + 1)
        alpha = alpha - selector.iota(current).scale(Fraction(coeff))
        if j < r - 2:
            current = ext_d(selector.iota(current))
    return alpha


def d_chi(selector: Selector, beta: KForm) -> KForm:
    """Twisted differential d (id + i_chi d)^(r-1) beta.

    Depends only on the restriction of beta to the distribution, and
    vanishes exactly when some closed form agrees with beta there.
    """
    return ext_d(selector.id_plus_iota_d(beta, selector.step - 1))
