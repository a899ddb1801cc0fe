"""Bracket flags of a distribution: growth vectors, regularity, adapted frames.

The flag is iterated at module level: new generators are brackets of
distribution frame fields with current generators, deduplicated over Q
as polynomial coefficient vectors (lossless for the generated module).
Pointwise ranks at the base point alone do not drive the iteration,
since a rank plateau at a point does not mean the module stopped
growing; iteration stops on an exact criterion (full rank, or no new
generator even symbolically) or on sampled evidence of stabilization.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from . import config as cfg
from . import linalg
from .errors import NotStabilized
from .exterior import FrameField, FrameModel, bracket

_MINOR_BUDGET = 5000


class PointClass(Enum):
    REGULAR = "Regular"
    SINGULAR = "Singular"
    UNDETERMINED = "Undetermined"


@dataclass
class Flag:
    """Result of the flag iteration at a base point."""

    model: FrameModel
    growth_vector: tuple[int, ...]
    step: int
    bracket_generating: bool
    equiregular: bool
    generators: list[list[FrameField]]
    frame_levels: dict[int, int] | None
    adapted_order: tuple[int, ...] | None
    evidence: dict = field(default_factory=dict)

    @property
    def rank(self) -> int:
        return self.growth_vector[0]


def _sample_points(
    model: FrameModel, seed: int, count: int, radius: Fraction, denominator: int
) -> list[tuple[Fraction, ...]]:
    rng = random.Random(seed)
    span = int(radius * denominator)
    points = []
    for _ in range(count):
        offset = [Fraction(rng.randint(-span, span), denominator) for _ in model.coords]
        points.append(tuple(b + o for b, o in zip(model.base_point, offset)))
    return points


def _rank_at(gens: Sequence[FrameField], point) -> int:
    rows = [g.evaluate(point) for g in gens]
    return linalg.rank_fraction(rows)


def _field_vector(g: FrameField) -> dict:
    vec = {}
    for i, poly in enumerate(g.coeffs):
        for mono, coeff in poly.terms.items():
            vec[(i, mono)] = coeff
    return vec


class _Iteration:
    """Shared generator iteration for compute_flag and growth_vector_at."""

    def __init__(self, model: FrameModel, max_step: int):
        self.model = model
        self.max_step = max_step
        self.reducer = linalg.SpanReducer()
        first = [model.frame_field(i) for i in model.D_indices]
        self.levels: list[list[FrameField]] = [[]]
        for g in first:
            if self.reducer.add(_field_vector(g)):
                self.levels[0].append(g)
        self.cumulative: list[FrameField] = list(self.levels[0])
        self.stabilized_exactly = False

    def extend(self) -> bool:
        """Add one level; returns False when no new generator appeared."""
        if self.stabilized_exactly:
            return False
        fresh: list[FrameField] = []
        basis_fields = [self.model.frame_field(i) for i in self.model.D_indices]
        for g in self.levels[-1]:
            for e in basis_fields:
                candidate = bracket(e, g)
                if candidate.is_zero():
                    continue
                if self.reducer.add(_field_vector(candidate)):
                    fresh.append(candidate)
        self.levels.append(fresh)
        self.cumulative.extend(fresh)
        if not fresh:
            self.stabilized_exactly = True
        return bool(fresh)

    def cumulative_through(self, level: int) -> list[FrameField]:
        out: list[FrameField] = []
        for lv in self.levels[:level]:
            out.extend(lv)
        return out

    def all_constant(self) -> bool:
        return all(c.is_constant() for g in self.cumulative for c in g.coeffs)


def _truncate_growth(ranks: Sequence[int]) -> tuple[int, ...]:
    """Drop the trailing plateau, keeping interior plateaus and >= 1 entry."""
    last = 0
    for i in range(1, len(ranks)):
        if ranks[i] > ranks[i - 1]:
            last = i
    return tuple(ranks[: last + 1])


def growth_vector_at(
    model: FrameModel,
    point: Sequence[Fraction],
    max_step: int = cfg.MAX_FLAG_STEP,
) -> tuple[int, ...]:
    """Pointwise growth vector, trailing plateau removed."""
    point = tuple(Fraction(v) for v in point)
    it = _Iteration(model, max_step)
    ranks = [_rank_at(it.cumulative, point)]
    while ranks[-1] < model.n:
        grew = it.extend()
        ranks.append(_rank_at(it.cumulative, point))
        if not grew:
            break
        if len(it.levels) > max_step:
            if ranks[-1] == ranks[-2]:
                break
            raise NotStabilized(
                f"flag did not stabilize within {max_step} steps at {point}"
            )
    return _truncate_growth(ranks)


def compute_flag(
    model: FrameModel,
    seed: int = cfg.DEFAULT_SEED,
    sample_count: int = cfg.SAMPLE_COUNT,
    max_step: int = cfg.MAX_FLAG_STEP,
) -> Flag:
    """Iterate the flag at the model base point and assemble the evidence."""
    base = model.base_point
    it = _Iteration(model, max_step)
    ranks = [_rank_at(it.cumulative, base)]

    constant = it.all_constant()
    samples: list[tuple[Fraction, ...]] = []

    def ensure_samples() -> None:
        nonlocal samples
        if not samples:
            samples = _sample_points(
                model, seed, sample_count, cfg.SAMPLE_BOX_RADIUS, cfg.SAMPLE_DENOMINATOR
            )

    if not constant:
        ensure_samples()
    sample_ranks: list[list[int]] = [[_rank_at(it.cumulative, p) for p in samples]]

    plateau_run = 0
    while True:
        if ranks[-1] == model.n and all(r == model.n for r in sample_ranks[-1]):
            break
        grew = it.extend()
        if not it.all_constant() and constant:
            constant = False
            ensure_samples()
            # backfill sample ranks for earlier (constant) levels
            sample_ranks = [
                [_rank_at(it.cumulative_through(lv + 1), p) for p in samples]
                for lv in range(len(ranks))
            ]
        ranks.append(_rank_at(it.cumulative, base))
        sample_ranks.append([_rank_at(it.cumulative, p) for p in samples])
        if not grew:
            break
        plateau = ranks[-1] == ranks[-2] and sample_ranks[-1] == sample_ranks[-2]
        plateau_run = plateau_run + 1 if plateau else 0
        if plateau_run >= 2 and ranks[-1] < model.n:
            # sampled evidence that the module stopped adding rank
            break
        if len(it.levels) > max_step:
            raise NotStabilized(f"flag did not stabilize within {max_step} steps")

    growth = _truncate_growth(ranks)
    step = len(growth)
    bracket_generating = growth[-1] == model.n

    # equiregularity: each level's rank must be locally constant
    evidence: dict = {"mode": "constant" if constant else "sampled"}
    equiregular = True
    if constant:
        evidence["detail"] = "all generator coefficients are constant"
    else:
        witness = None
        for level in range(step):
            base_rank = ranks[level]
            for p, r in zip(samples, sample_ranks[level]):
                if r != base_rank:
                    witness = {"level": level + 1, "point": p, "rank": r, "base_rank": base_rank}
                    break
            if witness:
                break
        if witness is not None:
            equiregular = False
            evidence["witness"] = witness
        else:
            evidence["samples"] = len(samples)
            certified = _minor_certificates(it, ranks, step, model)
            if certified:
                evidence["minor_certified_levels"] = certified
                if len(certified) == step:
                    evidence["mode"] = "sampled+minors"

    generators = []
    for level in range(step):
        cums = it.cumulative_through(level + 1)
        generators.append(_prune_at_point(cums, base))

    frame_levels, adapted_order = _adapted_frame(model, it, ranks, step, equiregular)

    return Flag(
        model=model,
        growth_vector=growth,
        step=step,
        bracket_generating=bracket_generating,
        equiregular=equiregular,
        generators=generators,
        frame_levels=frame_levels,
        adapted_order=adapted_order,
        evidence=evidence,
    )


def _prune_at_point(gens: list[FrameField], point) -> list[FrameField]:
    reducer = linalg.SpanReducer()
    kept = []
    for g in gens:
        row = {(i,): v for i, v in enumerate(g.evaluate(point)) if v != 0}
        if row and reducer.add(row):
            kept.append(g)
    return kept


def _minor_certificates(
    it: _Iteration, ranks: list[int], step: int, model: FrameModel
) -> list[int]:
    """Levels whose rank bound is certified by vanishing minors."""
    certified = []
    for level in range(step):
        gens = it.cumulative_through(level + 1)
        r = ranks[level]
        if r >= model.n or r >= len(gens):
            # full column rank cannot exceed bounds; square case is exact
            if r == len(gens) or r == model.n:
                certified.append(level + 1)
            continue
        count = _ncomb(len(gens), r + 1) * _ncomb(model.n, r + 1)
        if count > _MINOR_BUDGET:
            continue
        rows = [g.coeffs for g in gens]
        ok = True
        for row_sel in combinations(range(len(gens)), r + 1):
            for col_sel in combinations(range(model.n), r + 1):
                minor = [[rows[i][j] for j in col_sel] for i in row_sel]
                if not linalg.bareiss_det(minor).is_zero():
                    ok = False
                    break
            if not ok:
                break
        if ok:
            certified.append(level + 1)
    return certified


def _ncomb(n: int, k: int) -> int:
    from math import comb

    return comb(n, k)


def _adapted_frame(
    model: FrameModel,
    it: _Iteration,
    ranks: list[int],
    step: int,
    equiregular: bool,
) -> tuple[dict[int, int] | None, tuple[int, ...] | None]:
    """Permutation of the model frame adapted to the flag, when one exists.

    Membership of a frame field in a flag level is established exactly:
    by constant linear algebra when the generators are constant, or by
    vanishing of all (rank+1)-minors of the generator matrix extended by
    the candidate (which bounds the rank near the base point).
    """
    if not equiregular:
        return None, None
    levels: dict[int, int] = {}
    chosen: list[int] = []
    reducer = linalg.SpanReducer()
    base = model.base_point
    for level in range(1, step + 1):
        gens = it.cumulative_through(level)
        target = ranks[level - 1]
        candidates = [m for m in range(model.n) if m not in levels]
        for m in sorted(candidates):
            if len(chosen) >= target:
                break
            em = model.frame_field(m)
            if not _field_in_span(gens, em, ranks[level - 1], model):
                continue
            row = {(i,): v for i, v in enumerate(em.evaluate(base)) if v != 0}
            if reducer.add(row):
                levels[m] = level
                chosen.append(m)
        if len(chosen) != target:
            return None, None
    order = tuple(sorted(levels.keys(), key=lambda m: (levels[m], m)))
    return levels, order


def _field_in_span(
    gens: list[FrameField], candidate: FrameField, rank: int, model: FrameModel
) -> bool:
    rows = [g.coeffs for g in gens] + [candidate.coeffs]
    if all(p.is_constant() for row in rows for p in row):
        dense = [[p.constant_value() for p in row] for row in rows]
        return linalg.rank_fraction(dense) == rank
    count = _ncomb(len(rows), rank + 1) * _ncomb(model.n, rank + 1)
    if count > _MINOR_BUDGET:
        return False
    for row_sel in combinations(range(len(rows)), rank + 1):
        if len(rows) - 1 not in row_sel:
            continue
        for col_sel in combinations(range(model.n), rank + 1):
            minor = [[rows[i][j] for j in col_sel] for i in row_sel]
            if not linalg.bareiss_det(minor).is_zero():
                return False
    return True


def classify_point(
    model: FrameModel,
    point: Sequence[Fraction],
    samples: int = cfg.SAMPLE_COUNT,
    seed: int = cfg.DEFAULT_SEED,
    max_step: int = cfg.MAX_FLAG_STEP,
) -> PointClass:
    """Regular / Singular / Undetermined by comparing nearby growth vectors.

    Evidence-based: the point is compared against seeded rational
    perturbations in a small box.  With samples = 0 no evidence exists
    and the verdict is Undetermined (never a guess).
    """
    if samples <= 0:
        return PointClass.UNDETERMINED
    point = tuple(Fraction(v) for v in point)
    here = growth_vector_at(model, point, max_step)
    rng = random.Random(seed)
    den = cfg.SAMPLE_DENOMINATOR ** 2
    span = cfg.SAMPLE_DENOMINATOR
    for _ in range(samples):
        offset = [Fraction(rng.randint(-span, span), den) for _ in model.coords]
        nearby = tuple(p + o for p, o in zip(point, offset))
        if growth_vector_at(model, nearby, max_step) != here:
            return PointClass.SINGULAR
    return PointClass.REGULAR
