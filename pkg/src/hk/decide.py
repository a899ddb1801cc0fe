"""Decision procedures built on the holonomy span.

Two questions are decided from the enumerated holonomy algebra: whether
some positive definite symmetric form on the complement is annihilated
by every generator (equivalently, a fiber metric invariant under
transport exists), and whether the algebra vanishes altogether.  A
one-form variant for corank one repeats the first question through the
twisted differential and must agree with it.

The positive definite feasibility search runs exact fast paths first
(zero-dimensional algebra, nilpotent generator, zero fixed-point space,
all-traceless fixed-point space, one-dimensional fixed-point space) and
falls back to a seeded random-restart ascent of the smallest eigenvalue
over the fixed-point sphere.  A successful ascent is rationalized and
re-verified exactly; when nothing verifies the answer is Inconclusive,
never an unsound Yes or No.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import config as cfg
from . import linalg
from .errors import NormalizationFailed
from .exterior import FrameField, FrameModel, KForm, ext_d, lie_derivative
from .holonomy import HolonomyAlgebra, sym2_pairs
from .poly import Poly
from .selector import Selector, d_chi

YES = "Yes"
NO = "No"
INCONCLUSIVE = "Inconclusive"

ZERO_KERNEL = "ZeroKernel"
TRACE_OBSTRUCTION = "TraceObstruction"
NONZERO_CURVATURE = "NonzeroCurvature"

CONTROLLABILITY = "distribution is bracket generating (complete controllability)"
CONNECTED_HOLONOMY = "holonomy group is connected"
COMPACT_FIBER = "fiber model is compact and simply connected"
ALGEBRAIC_ONLY = (
    "distribution reported as not bracket generating; verdict covers the "
    "algebraic condition only"
)


@dataclass
class Verdict:
    """Outcome of a decision procedure with its checkable evidence."""

    kind: str
    certificate: list[list[Fraction]] | str | None = None
    witness: dict | None = None
    assumptions: list[str] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def reason(self) -> str | None:
        if self.kind == NO and isinstance(self.certificate, str):
            return self.certificate
        return None


def _sym_from_pair_vector(vec: Sequence[Fraction], nu: int) -> list[list[Fraction]]:
    pairs = sym2_pairs(nu)
    out = [[Fraction(0)] * nu for _ in range(nu)]
    for (i, j), value in zip(pairs, vec):
        out[i][j] = value
        out[j][i] = value
    return out


def _pair_vector_trace(vec: Sequence[Fraction], nu: int) -> Fraction:
    total = Fraction(0)
    for (i, j), value in zip(sym2_pairs(nu), vec):
        if i == j:
            total += value
    return total


def _quadratic_form(
    sym: Sequence[Sequence[Fraction]], vec: Sequence[Fraction]
) -> Fraction:
    total = Fraction(0)
    for i, vi in enumerate(vec):
        if vi == 0:
            continue
        for j, vj in enumerate(vec):
            if vj == 0:
                continue
            total += vi * sym[i][j] * vj
    return total


def _mat_vec(matrix: Sequence[Sequence[Fraction]], vec: Sequence[Fraction]) -> list[Fraction]:
    return [
        sum((row[j] * vec[j] for j in range(len(vec))), Fraction(0)) for row in matrix
    ]


def verify_metric_certificate(
    holonomy: HolonomyAlgebra, candidate: Sequence[Sequence[Fraction]]
) -> dict:
    """Re-check a Yes certificate from scratch; independent of the search.

    The candidate must be symmetric, annihilated by every generator in
    the symmetric-form action (A^T G + G A = 0), and positive definite
    by leading principal minors.
    """
    nu = holonomy.nu
    sym = [[Fraction(v) for v in row] for row in candidate]
    if len(sym) != nu or any(len(row) != nu for row in sym):
        return {"ok": False, "failure": "shape"}
    for i in range(nu):
        for j in range(nu):
            if sym[i][j] != sym[j][i]:
                return {"ok": False, "failure": "not symmetric"}
    for idx, gen in enumerate(holonomy.basis):
        for i in range(nu):
            for j in range(nu):
                acc = Fraction(0)
                for m in range(nu):
                    acc += gen[m][i] * sym[m][j] + sym[i][m] * gen[m][j]
                if acc != 0:
                    return {"ok": False, "failure": f"generator {idx} does not annihilate"}
    minors = linalg.leading_principal_minors(sym)
    if any(m <= 0 for m in minors):
        return {"ok": False, "failure": "not positive definite", "minors": minors}
    return {"ok": True, "minors": minors}


def _nilpotent_witness(holonomy: HolonomyAlgebra) -> dict | None:
    """Find a generator A with A^(2m) = 0 and a vector u with A^m u != 0.

    For any invariant symmetric form g, moving A across the pairing m
    times gives g(A^m u, A^m u) = (-1)^m g(u, A^(2m) u) = 0, so the
    nonzero vector A^m u is isotropic and no invariant form is positive
    definite.
    """
    nu = holonomy.nu
    for idx, gen in enumerate(holonomy.basis):
        power = [row[:] for row in gen]
        k = 1
        while k <= nu and not linalg.mat_is_zero(power):
            power = linalg.mat_mul(power, gen)
            k += 1
        if k > nu:
            continue  # not nilpotent
        # now gen^k = 0 and gen^(k-1) != 0 with k >= 2 (basis elements are nonzero)
        m = (k + 1) // 2
        a_m = [row[:] for row in gen]
        for _ in range(m - 1):
            a_m = linalg.mat_mul(a_m, gen)
        col = next(
            j for j in range(nu) if any(a_m[i][j] != 0 for i in range(nu))
        )
        u = [Fraction(1) if j == col else Fraction(0) for j in range(nu)]
        image = [a_m[i][col] for i in range(nu)]
        return {
            "type": "isotropic_vector",
            "generator_index": idx,
            "nilpotency_index": k,
            "power": m,
            "vector": u,
            "isotropic_image": image,
        }
    return None


def _independent_row_witness(
    stacked: list[list[Fraction]], ncols: int
) -> dict:
    transposed = [[stacked[r][c] for r in range(len(stacked))] for c in range(ncols)]
    _, pivots = linalg.rref_fraction(transposed)
    rows = list(pivots)
    square = [stacked[r] for r in rows]
    det = linalg.det_fraction(square)
    return {"type": "independent_rows", "rows": rows, "determinant": det}


def tg_metric_exists(
    holonomy: HolonomyAlgebra,
    budget: int = cfg.PD_RESTART_BUDGET,
    seed: int = cfg.DEFAULT_SEED,
    bracket_generating: bool = True,
) -> Verdict:
    """Decide existence of a positive definite invariant fiber metric."""
    assumptions = [CONNECTED_HOLONOMY]
    if bracket_generating:
        assumptions.insert(0, CONTROLLABILITY)
    else:
        assumptions.insert(0, ALGEBRAIC_ONLY)
    details: dict = {"seed": seed, "budget": budget, "path": None}

    if not holonomy.stabilized:
        details["path"] = "not_stabilized"
        details["holonomy_reason"] = holonomy.reason
        return Verdict(INCONCLUSIVE, None, None, assumptions, details)

    nu = holonomy.nu
    if holonomy.dim == 0:
        identity = [
            [Fraction(1) if i == j else Fraction(0) for j in range(nu)]
            for i in range(nu)
        ]
        check = verify_metric_certificate(holonomy, identity)
        details["path"] = "zero_algebra"
        details["certificate_check"] = check
        return Verdict(YES, identity, None, assumptions, details)

    nil = _nilpotent_witness(holonomy)
    if nil is not None:
        details["path"] = "nilpotent_generator"
        return Verdict(NO, TRACE_OBSTRUCTION, nil, assumptions, details)

    pair_count = nu * (nu + 1) // 2
    stacked: list[list[Fraction]] = []
    for action in holonomy.sym2_basis:
        stacked.extend([row[:] for row in action])
    kernel = linalg.nullspace_fraction(stacked, pair_count)
    details["fixed_space_dim"] = len(kernel)

    if not kernel:
        details["path"] = "zero_kernel"
        witness = _independent_row_witness(stacked, pair_count)
        return Verdict(NO, ZERO_KERNEL, witness, assumptions, details)

    if all(_pair_vector_trace(vec, nu) == 0 for vec in kernel):
        details["path"] = "all_traceless"
        witness = {
            "type": "trace_functional",
            "dual_matrix": [
                [Fraction(1) if i == j else Fraction(0) for j in range(nu)]
                for i in range(nu)
            ],
            "kernel_traces": [_pair_vector_trace(vec, nu) for vec in kernel],
        }
        return Verdict(NO, TRACE_OBSTRUCTION, witness, assumptions, details)

    if len(kernel) == 1:
        sym = _sym_from_pair_vector(kernel[0], nu)
        for sign in (1, -1):
            candidate = [[sign * v for v in row] for row in sym]
            if linalg.is_positive_definite(candidate):
                check = verify_metric_certificate(holonomy, candidate)
                if not check["ok"]:
                    raise AssertionError(
                        f"one-dimensional certificate failed re-verification: {check}"
                    )
                details["path"] = "one_dim_definite"
                details["certificate_check"] = check
                return Verdict(YES, candidate, None, assumptions, details)
        details["path"] = "one_dim_indefinite"
        witness = _span_no_pd_witness(sym)
        return Verdict(NO, TRACE_OBSTRUCTION, witness, assumptions, details)

    verdict = _ascend_lambda_min(holonomy, kernel, budget, seed, assumptions, details)
    return verdict


def _span_no_pd_witness(sym: list[list[Fraction]]) -> dict:
    """Witness that no multiple of sym is positive definite.

    Lagrange diagonalization yields vectors on which the form takes a
    zero value (isotropic) or values of both signs (sign pair); either
    rules out every nonzero multiple.
    """
    columns, diagonal = linalg.congruence_diagonalize(sym)
    for col, d in zip(columns, diagonal):
        if d == 0:
            return {
                "type": "isotropic_vector_in_span",
                "vector": col,
                "value": Fraction(0),
            }
    pos = next((i for i, d in enumerate(diagonal) if d > 0), None)
    neg = next((i for i, d in enumerate(diagonal) if d < 0), None)
    if pos is None or neg is None:
        raise AssertionError("definite form reached the indefinite witness path")
    return {
        "type": "sign_pair",
        "vector_positive": columns[pos],
        "value_positive": diagonal[pos],
        "vector_negative": columns[neg],
        "value_negative": diagonal[neg],
    }


def _ascend_lambda_min(
    holonomy: HolonomyAlgebra,
    kernel: list[list[Fraction]],
    budget: int,
    seed: int,
    assumptions: list[str],
    details: dict,
) -> Verdict:
    """Random-restart maximization of the least eigenvalue over the sphere."""
    nu = holonomy.nu
    k_dim = len(kernel)
    basis_float = [
        np.array([[float(v) for v in row] for row in _sym_from_pair_vector(vec, nu)])
        for vec in kernel
    ]
    rng = np.random.default_rng(seed)
    best_val = -np.inf
    best_t: np.ndarray | None = None
    for _ in range(budget):
        t = rng.normal(size=k_dim)
        norm = np.linalg.norm(t)
        if norm == 0.0:
            continue
        t = t / norm
        step = 0.5
        for _ in range(200):
            s = sum(ti * bi for ti, bi in zip(t, basis_float))
            vals, vecs = np.linalg.eigh(s)
            v = vecs[:, 0]
            grad = np.array([float(v @ b @ v) for b in basis_float])
            grad = grad - (grad @ t) * t
            if np.linalg.norm(grad) < 1e-12:
                break
            t = t + step * grad
            t = t / np.linalg.norm(t)
            step *= 0.97
        s = sum(ti * bi for ti, bi in zip(t, basis_float))
        val = float(np.linalg.eigvalsh(s)[0])
        if val > best_val:
            best_val = val
            best_t = t

    details["path"] = "random_restart"
    details["best_lambda_min"] = best_val
    if best_t is not None and best_val > cfg.PD_LAMBDA_MIN_TOL:
        for denom in (64, 4096, cfg.RATIONALIZE_DENOMINATOR_LIMIT):
            coeffs = [Fraction(float(x)).limit_denominator(denom) for x in best_t]
            candidate = [[Fraction(0)] * nu for _ in range(nu)]
            for c, vec in zip(coeffs, kernel):
                if c == 0:
                    continue
                sym = _sym_from_pair_vector(vec, nu)
                for i in range(nu):
                    for j in range(nu):
                        candidate[i][j] += c * sym[i][j]
            if not linalg.is_positive_definite(candidate):
                continue
            check = verify_metric_certificate(holonomy, candidate)
            if check["ok"]:
                details["certificate_check"] = check
                details["rationalization_denominator"] = denom
                return Verdict(YES, candidate, None, assumptions, details)
        details["rationalization_failed"] = True
    return Verdict(INCONCLUSIVE, None, None, assumptions, details)


def principal_structure_exists(holonomy: HolonomyAlgebra) -> Verdict:
    """Decide whether the enumerated holonomy algebra is zero."""
    assumptions = [CONTROLLABILITY, CONNECTED_HOLONOMY, COMPACT_FIBER]
    details: dict = {"path": None, "algebra_dim": holonomy.dim}
    if not holonomy.stabilized:
        details["path"] = "not_stabilized"
        details["holonomy_reason"] = holonomy.reason
        return Verdict(INCONCLUSIVE, None, None, assumptions, details)
    if holonomy.dim == 0:
        details["path"] = "zero_algebra"
        return Verdict(YES, None, None, assumptions, details)
    details["path"] = "nonzero_algebra"
    witness = {"type": "nonzero_generator", "matrix": holonomy.basis[0]}
    return Verdict(NO, NONZERO_CURVATURE, witness, assumptions, details)


def one_dim_criterion(
    model: FrameModel,
    tau: KForm,
    z_field: FrameField,
    selector: Selector,
) -> tuple[KForm, Verdict]:
    """Corank-one criterion through the twisted differential.

    Preconditions are checked exactly: tau pairs to 1 with the chosen
    vertical field and its differential pairs to -1 with the selector
    bivector.  The obstruction is the twisted differential of the Lie
    derivative of tau along the vertical field; the answer is Yes
    exactly when that two-form vanishes identically.
    """
    if len(selector.columns) != 1:
        raise NormalizationFailed(
            "criterion needs exactly one selector column (corank one)"
        )
    one = Poly.constant(model.coords, 1)
    pairing = tau.apply([z_field])
    if not (pairing - one).is_zero():
        raise NormalizationFailed("tau must pair to 1 with the vertical field")
    (m_index, chi) = next(iter(selector.columns.items()))
    dtau = ext_d(tau)
    against = dtau.pair_kvector(chi)
    if not (against + one).is_zero():
        raise NormalizationFailed(
            "d tau must pair to -1 with the selector bivector"
        )
    lie = lie_derivative(z_field, tau)
    obstruction = d_chi(selector, lie)
    kind = YES if obstruction.is_zero() else NO
    certificate: str | None = None
    witness = None
    if kind == NO:
        certificate = NONZERO_CURVATURE
        witness = {
            "type": "nonzero_obstruction",
            "components": {
                str(idx): str(p) for idx, p in sorted(obstruction.coeffs.items())
            },
        }
    verdict = Verdict(
        kind,
        certificate,
        witness,
        [CONTROLLABILITY, CONNECTED_HOLONOMY],
        {"path": "one_dim_criterion", "vertical_index": m_index},
    )
    return obstruction, verdict
