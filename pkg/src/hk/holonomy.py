"""Holonomy algebra enumeration and the numeric transport cross-check.

The infinitesimal holonomy of the modified curvature is the span of the
curvature values together with their iterated covariant derivatives
along distribution directions, evaluated at the base point.  Words are
enumerated breadth-first; a word matrix that is a rational linear
combination of kept word matrices *as a polynomial matrix* is pruned,
which is lossless because derivation is linear over constant
coefficients.  The value span is accumulated exactly; enumeration stops
when the rank has been stable for the configured margin and the span is
closed under commutators (or exactly, when no symbolically new word
exists at all).

The numeric oracle integrates frame transport around small coordinate
squares with fixed-step RK4 and compares matrix logarithms against the
algebraic answer; it is advisory (floating point) and refuses abstract
models, which have no chart to integrate in.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import config as cfg
from . import linalg
from .connection import VerticalConnection, modified_curvature
from .errors import OracleUnavailable, StepTooCoarse
from .exterior import FrameModel
from .linalg import PMat
from .selector import Selector

Word = tuple


@dataclass
class HolonomyAlgebra:
    """Exact basis of the enumerated holonomy span at the base point."""

    model: FrameModel
    nu: int
    basis: list[list[list[Fraction]]]
    sym2_basis: list[list[list[Fraction]]]
    depth_used: int
    stabilized: bool
    reason: str
    rank_history: list[int]
    words_kept: int
    evidence: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.basis)


def sym2_pairs(nu: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(nu) for j in range(i, nu)]


def sym2_action(matrix: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    """Matrix of A acting on symmetric forms by (A.e)(v,w) = -e(Av,w) - e(v,Aw).

    Basis of symmetric forms: e_ij for i <= j in lexicographic order,
    where e_ij has matrix E_ij + E_ji (i < j) or E_ii.  The action on
    the form with matrix S is -A^T S - S A, which stays symmetric.
    """
    nu = len(matrix)
    pairs = sym2_pairs(nu)
    index = {p: k for k, p in enumerate(pairs)}
    out = [[Fraction(0)] * len(pairs) for _ in range(len(pairs))]
    for col, (p, q) in enumerate(pairs):
        t = [[Fraction(0)] * nu for _ in range(nu)]
        # T = -A^T S - S A with S = E_pq + E_qp (or E_pp when p == q)
        for k in range(nu):
            for l in range(nu):
                acc = Fraction(0)
                # (A^T S)_{kl} = sum_m A_mk S_ml
                if l == q:
                    acc += matrix[p][k]
                if l == p and p != q:
                    acc += matrix[q][k]
                # (S A)_{kl} = sum_m S_km A_ml
                if k == p:
                    acc += matrix[q][l]
                if k == q and p != q:
                    acc += matrix[p][l]
                t[k][l] = -acc
        for (k, l) in pairs:
            out[index[(k, l)]][col] = t[k][l]
    return out


def ozeki_algebra(
    conn: VerticalConnection,
    selector: Selector,
    depth_bound: int | None = None,
    stability_margin: int = cfg.STABILITY_MARGIN,
) -> HolonomyAlgebra:
    """Enumerate curvature words and their exact value span at the base."""
    model = conn.model
    base = model.base_point
    nu = conn.nu
    if depth_bound is None:
        depth_bound = 2 * model.n

    r_chi = modified_curvature(conn, selector)
    sym_reducer = linalg.SpanReducer()
    val_reducer = linalg.SpanReducer()

    frontier: list[PMat] = []
    kept_words = 0
    for key in sorted(r_chi.coeffs.keys()):
        mat = r_chi.coeffs[key]
        if sym_reducer.add(mat.to_vector()):
            frontier.append(mat)
            kept_words += 1
            val_reducer.add(mat.evaluate(base))

    ranks = [val_reducer.rank]
    depth_used = 0
    stabilized = False
    reason = ""

    def closure_ok() -> bool:
        dense = [linalg.sparse_to_dense(row, nu) for row in val_reducer.basis()]
        for i in range(len(dense)):
            for j in range(i + 1, len(dense)):
                comm = linalg.mat_commutator(dense[i], dense[j])
                vec = linalg.dense_to_sparse(comm)
                if vec and not val_reducer.contains(vec):
                    return False
        return True

    if not frontier:
        stabilized = True
        reason = "no nonzero curvature words"
    while not stabilized:
        if depth_used >= depth_bound:
            reason = "depth_exceeded"
            break
        new_frontier: list[PMat] = []
        for mat in frontier:
            for i in model.D_indices:
                derived = conn.derive_matrix(i, mat)
                if derived.is_zero():
                    continue
                if sym_reducer.add(derived.to_vector()):
                    new_frontier.append(derived)
                    kept_words += 1
                    val_reducer.add(derived.evaluate(base))
        depth_used += 1
        frontier = new_frontier
        ranks.append(val_reducer.rank)
        if not new_frontier:
            # enumeration is symbolically complete; the span is final
            stabilized = closure_ok()
            reason = (
                "enumeration complete"
                if stabilized
                else "span not closed under commutators"
            )
            break
        margin_ok = len(ranks) > stability_margin and all(
            ranks[-1] == ranks[-1 - k] for k in range(1, stability_margin + 1)
        )
        if margin_ok and closure_ok():
            stabilized = True
            reason = f"rank stable for {stability_margin} depths and bracket closed"
            break

    basis = [linalg.sparse_to_dense(row, nu) for row in val_reducer.basis()]
    sym2 = [sym2_action(b) for b in basis]
    return HolonomyAlgebra(
        model=model,
        nu=nu,
        basis=basis,
        sym2_basis=sym2,
        depth_used=depth_used,
        stabilized=stabilized,
        reason=reason,
        rank_history=ranks,
        words_kept=kept_words,
        evidence={"depth_bound": depth_bound, "stability_margin": stability_margin},
    )


# -- numeric transport oracle ----------------------------------------------------


@dataclass
class TransportResult:
    loops: list[tuple[int, int]]
    eps: float
    steps_per_loop: int
    transports: list[np.ndarray]
    logs: list[np.ndarray]
    rank: int


def _gamma_float(conn: VerticalConnection, point: Sequence[float]) -> list[np.ndarray]:
    nu = conn.nu
    out = []
    for i in range(conn.model.n):
        g = conn.gamma.get(i)
        mat = np.zeros((nu, nu))
        if g is not None:
            for (r, c), poly in g.entries.items():
                mat[r, c] = poly.evaluate_float(point)
        out.append(mat)
    return out


def _transport_around_loop(
    conn: VerticalConnection,
    corner: Sequence[float],
    plane: tuple[int, int],
    eps: float,
    steps_per_side: int,
) -> np.ndarray:
    model = conn.model
    n = model.n
    nu = conn.nu
    i, j = plane
    sides = [(i, 1.0), (j, 1.0), (i, -1.0), (j, -1.0)]
    transport = np.eye(nu)
    position = np.array([float(v) for v in corner])
    offsets = {i: 0.0, j: 0.0}
    h = 1.0 / steps_per_side

    def rhs(p: np.ndarray, m: np.ndarray, coord: int, sign: float) -> np.ndarray:
        frame = np.array(model.frame_matrix_at_float(p))
        velocity = np.zeros(n)
        velocity[coord] = sign * eps
        u = np.linalg.solve(frame, velocity)
        gammas = _gamma_float(conn, p)
        total = np.zeros((nu, nu))
        for k in range(n):
            if u[k] != 0.0:
                total += u[k] * gammas[k]
        return -total @ m

    for coord, sign in sides:
        for s in range(steps_per_side):
            t0 = s * h
            p = lambda t: position + _unit(n, coord) * (sign * eps * t)
            k1 = rhs(p(t0), transport, coord, sign)
            k2 = rhs(p(t0 + h / 2), transport + (h / 2) * k1, coord, sign)
            k3 = rhs(p(t0 + h / 2), transport + (h / 2) * k2, coord, sign)
            k4 = rhs(p(t0 + h), transport + h * k3, coord, sign)
            transport = transport + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        position = position + _unit(n, coord) * (sign * eps)
    return transport


def _unit(n: int, coord: int) -> np.ndarray:
    v = np.zeros(n)
    v[coord] = 1.0
    return v


def numeric_transport_oracle(
    conn: VerticalConnection,
    loops: Sequence[tuple[int, int]] | None = None,
    eps: float = cfg.ORACLE_DEFAULT_EPS,
    steps: int = cfg.ORACLE_MIN_STEPS_PER_LOOP,
    seed: int = cfg.DEFAULT_SEED,
    consistency_rtol: float = cfg.ORACLE_CONSISTENCY_RTOL,
) -> TransportResult:
    """Integrate transport around coordinate squares; floating point.

    Each loop is a coordinate square of side eps in the given plane with
    corner at the model base point.  Fixed-step RK4 with at least the
    configured number of steps per loop; every transport is re-integrated
    at half the step size and StepTooCoarse is raised when the two
    disagree beyond the tolerance.  Matrix logarithms of the transports
    are returned together with their numeric rank.
    """
    from scipy.linalg import logm

    model = conn.model
    if model.abstract:
        raise OracleUnavailable(
            "transport integration needs a chart; abstract models have none"
        )
    if loops is None:
        loops = [
            (i, j) for i in range(model.n) for j in range(i + 1, model.n)
        ]
    steps_per_side = max(16, (steps + 3) // 4)
    corner = [float(v) for v in model.base_point]

    def run(plane: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
        t1 = _transport_around_loop(conn, corner, plane, eps, steps_per_side)
        t2 = _transport_around_loop(conn, corner, plane, eps, 2 * steps_per_side)
        scale = max(1.0, float(np.linalg.norm(t2)))
        if float(np.linalg.norm(t1 - t2)) / scale > consistency_rtol:
            raise StepTooCoarse(
                f"transport around plane {plane} changed under step halving"
            )
        log = np.real(logm(t2))
        return t2, log

    workers = cfg.worker_count()
    if workers > 1 and len(loops) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, loops))
    else:
        results = [run(p) for p in loops]

    transports = [t for t, _ in results]
    logs = [l for _, l in results]
    rank = transport_log_rank(logs)
    return TransportResult(
        loops=list(loops),
        eps=eps,
        steps_per_loop=4 * steps_per_side,
        transports=transports,
        logs=logs,
        rank=rank,
    )


def transport_log_rank(logs: Sequence[np.ndarray], rtol: float = cfg.ORACLE_RANK_RTOL) -> int:
    if not logs:
        return 0
    stack = np.stack([l.ravel() for l in logs])
    svals = np.linalg.svd(stack, compute_uv=False)
    if svals.size == 0 or svals[0] == 0.0:
        return 0
    return int(np.sum(svals > rtol * svals[0]))
