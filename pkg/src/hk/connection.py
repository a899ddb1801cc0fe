"""Vertical connections on the complement bundle and their curvature.

The complement frame Z_1..Z_nu (the V-indices of the model) trivializes
a bundle over the chart; a vertical connection stores the matrix
Gamma(E_i) of nabla_{E_i} acting on that frame.  The canonical one
differentiates along distribution directions by projected brackets,
nabla_{E_i} Z_j = pr_V [E_i, Z_j], and is zero along complement
directions.

Curvature is computed two ways on purpose: straight from the commutator
definition, and through the frame trivialization (exterior-derivative
route); exact agreement of the two is a standing invariant.  The
selector-modified curvature and the flattening corrector follow the
binomial recursion eta^(k+1) = L(i_chi eta^k).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Mapping, Sequence

from .errors import ModelError, PostconditionFailed
from .exterior import FrameModel, KForm, interior_product, lie_derivative, sort_with_sign
from .linalg import PMat
from .poly import Poly
from .selector import Selector

IndexTuple = tuple[int, ...]


@dataclass
class VerticalConnection:
    """Connection matrices Gamma(E_i) over the complement frame."""

    model: FrameModel
    gamma: dict[int, PMat]

    @property
    def nu(self) -> int:
        return len(self.model.V_indices)

    def gamma_at(self, i: int) -> PMat:
        g = self.gamma.get(i)
        if g is None:
            return PMat.zero(self.nu, self.model.coords)
        return g

    def derive_matrix(self, i: int, m: PMat) -> PMat:
        """Induced derivative on endomorphism-valued functions.

        nabla_{E_i} M = E_i(M) + [Gamma(E_i), M].
        """
        model = self.model
        derived = m.map_entries(lambda p: model.derive(i, p)) if not model.abstract else PMat.zero(self.nu, model.coords)
        return derived + self.gamma_at(i).commutator(m)

    def shifted(self, alpha: "GlValuedForm") -> "VerticalConnection":
        """The connection nabla + alpha for an endomorphism-valued 1-form."""
        if alpha.degree != 1:
            raise ModelError("connection shift expects a 1-form")
        gamma = dict(self.gamma)
        for (i,), mat in alpha.coeffs.items():
            acc = gamma.get(i)
            acc = mat if acc is None else acc + mat
            if acc.is_zero():
                gamma.pop(i, None)
            else:
                gamma[i] = acc
        return VerticalConnection(self.model, gamma)


class GlValuedForm:
    """Alternating form with endomorphism (nu x nu matrix) values."""

    __slots__ = ("model", "nu", "degree", "coeffs")

    def __init__(
        self,
        model: FrameModel,
        nu: int,
        degree: int,
        coeffs: Mapping[IndexTuple, PMat],
    ):
        self.model = model
        self.nu = nu
        self.degree = degree
        clean: dict[IndexTuple, PMat] = {}
        for idx, mat in coeffs.items():
            if len(idx) != degree:
                raise ModelError("coefficient key arity does not match degree")
            if any(a >= b for a, b in zip(idx, idx[1:])):
                raise ModelError("coefficient keys must be strictly increasing")
            if not mat.is_zero():
                clean[tuple(idx)] = mat
        self.coeffs = clean

    def component(self, indices: Sequence[int]) -> PMat:
        key, sign = sort_with_sign(indices)
        if key is None:
            return PMat.zero(self.nu, self.model.coords)
        mat = self.coeffs.get(key)
        if mat is None:
            return PMat.zero(self.nu, self.model.coords)
        return mat if sign > 0 else -mat

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "GlValuedForm") -> "GlValuedForm":
        self.model.check_same(other.model)
        if self.degree != other.degree:
            raise ModelError("degree mismatch")
        coeffs = dict(self.coeffs)
        for idx, mat in other.coeffs.items():
            acc = coeffs.get(idx)
            acc = mat if acc is None else acc + mat
            if acc.is_zero():
                coeffs.pop(idx, None)
            else:
                coeffs[idx] = acc
        return GlValuedForm(self.model, self.nu, self.degree, coeffs)

    def __neg__(self) -> "GlValuedForm":
        return GlValuedForm(
            self.model, self.nu, self.degree, {k: -m for k, m in self.coeffs.items()}
        )

    def __sub__(self, other: "GlValuedForm") -> "GlValuedForm":
        return self + (-other)

    def scale(self, factor) -> "GlValuedForm":
        return GlValuedForm(
            self.model,
            self.nu,
            self.degree,
            {k: m.scale(factor) for k, m in self.coeffs.items()},
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GlValuedForm)
            and self.model is other.model
            and self.degree == other.degree
            and self.coeffs == other.coeffs
        )

    def __repr__(self) -> str:
        return f"GlValuedForm(deg={self.degree}, keys={sorted(self.coeffs)})"


def vertical_connection(model: FrameModel) -> VerticalConnection:
    """Projected-bracket connection on the complement frame."""
    nu = len(model.V_indices)
    vpos = {m: p for p, m in enumerate(model.V_indices)}
    gamma: dict[int, PMat] = {}
    for i in model.D_indices:
        entries: dict[tuple[int, int], Poly] = {}
        for j_pos, j in enumerate(model.V_indices):
            for k, c in model.structure_row(i, j).items():
                p = vpos.get(k)
                if p is not None and not c.is_zero():
                    entries[(p, j_pos)] = c
        if entries:
            gamma[i] = PMat(nu, model.coords, entries)
    return VerticalConnection(model, gamma)


def d_nabla(conn: VerticalConnection, form: GlValuedForm) -> GlValuedForm:
    """Covariant exterior derivative, same stencil as the scalar d."""
    model = conn.model
    k = form.degree
    nu = form.nu
    out: dict[IndexTuple, PMat] = {}

    def put(key: IndexTuple, mat: PMat) -> None:
        if mat.is_zero():
            return
        acc = out.get(key)
        acc = mat if acc is None else acc + mat
        if acc.is_zero():
            out.pop(key, None)
        else:
            out[key] = acc

    if k == 0:
        m0 = form.coeffs.get((), PMat.zero(nu, model.coords))
        for i in range(model.n):
            put((i,), conn.derive_matrix(i, m0))
        return GlValuedForm(model, nu, 1, out)

    for idx, mat in form.coeffs.items():
        for i in range(model.n):
            if i in idx:
                continue
            derived = conn.derive_matrix(i, mat)
            if derived.is_zero():
                continue
            key, sign = sort_with_sign((i,) + idx)
            put(key, derived if sign > 0 else -derived)

    for (i, j), row in model.structure.items():
        for m, c in row.items():
            for idx, mat in form.coeffs.items():
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
                put(key, mat.scale(c).scale(-key_sign * inner_sign))
    return GlValuedForm(model, nu, k + 1, out)


def bracket_of_forms(beta: GlValuedForm, other: GlValuedForm) -> GlValuedForm:
    """[beta, beta] on 1-forms: [b, b](X, Y) = 2 [b(X), b(Y)]."""
    if beta.degree != 1 or other.degree != 1:
        raise ModelError("form bracket implemented for 1-forms")
    model = beta.model
    out: dict[IndexTuple, PMat] = {}
    for (a,), mat_a in beta.coeffs.items():
        for (b,), mat_b in other.coeffs.items():
            if a == b:
                continue
            key = (a, b) if a < b else (b, a)
            term = mat_a.commutator(mat_b)
            if a > b:
                term = -term
            acc = out.get(key)
            acc = term if acc is None else acc + term
            if acc.is_zero():
                out.pop(key, None)
            else:
                out[key] = acc
    # every unordered pair was visited twice, matching the factor 2
    return GlValuedForm(model, beta.nu, 2, out)


def L_op(conn: VerticalConnection, beta: GlValuedForm) -> GlValuedForm:
    """L(beta) = d^nabla beta + (1/2) [beta, beta] on 1-forms."""
    if beta.degree != 1:
        raise ModelError("L expects an endomorphism-valued 1-form")
    return d_nabla(conn, beta) + bracket_of_forms(beta, beta).scale(Fraction(1, 2))


def curvature_direct(conn: VerticalConnection) -> GlValuedForm:
    """Curvature from the commutator definition.

    R(E_a, E_b) = E_a(Gamma_b) - E_b(Gamma_a) + [Gamma_a, Gamma_b]
                - sum_i c^i_ab Gamma_i.
    """
    model = conn.model
    nu = conn.nu
    out: dict[IndexTuple, PMat] = {}
    for a in range(model.n):
        ga = conn.gamma_at(a)
        for b in range(a + 1, model.n):
            gb = conn.gamma_at(b)
            if model.abstract:
                term = PMat.zero(nu, model.coords)
            else:
                term = gb.map_entries(lambda p: model.derive(a, p)) - ga.map_entries(
                    lambda p: model.derive(b, p)
                )
            if not ga.is_zero() and not gb.is_zero():
                term = term + ga.commutator(gb)
            for i, c in model.structure_row(a, b).items():
                gi = conn.gamma_at(i)
                if not gi.is_zero() and not c.is_zero():
                    term = term - gi.scale(c)
            if not term.is_zero():
                out[(a, b)] = term
    return GlValuedForm(model, nu, 2, out)


def curvature_global_basis(model: FrameModel) -> tuple[GlValuedForm, GlValuedForm]:
    """Curvature through the frame trivialization; returns (R, alpha).

    The flat connection annihilating the complement frame differs from
    the projected-bracket connection by the endomorphism-valued 1-form
    alpha with alpha(E_i)_{kj} = (L_{Z_j} t^{m_k})(E_i) on distribution
    directions (zero on complement directions), computed here through
    Lie derivatives of the coframe.  Then R = d^nabla alpha - (1/2)
    [alpha, alpha], which must agree exactly with curvature_direct.
    """
    nu = len(model.V_indices)
    conn = vertical_connection(model)
    lie_rows: dict[int, KForm] = {}
    for j in model.V_indices:
        zj = model.frame_field(j)
        for m in model.V_indices:
            lie_rows[(j, m)] = lie_derivative(zj, model.coframe_form(m))
    coeffs: dict[IndexTuple, PMat] = {}
    for i in model.D_indices:
        entries: dict[tuple[int, int], Poly] = {}
        for j_pos, j in enumerate(model.V_indices):
            for k_pos, m in enumerate(model.V_indices):
                value = lie_rows[(j, m)].coeffs.get((i,))
                if value is not None and not value.is_zero():
                    entries[(k_pos, j_pos)] = value
        if entries:
            coeffs[(i,)] = PMat(nu, model.coords, entries)
    alpha = GlValuedForm(model, nu, 1, coeffs)
    curvature = d_nabla(conn, alpha) - bracket_of_forms(alpha, alpha).scale(
        Fraction(1, 2)
    )
    return curvature, alpha


def iota_gl(selector: Selector, eta: GlValuedForm) -> GlValuedForm:
    """Selector contraction of an endomorphism-valued 2-form."""
    if eta.degree != 2:
        raise ModelError("selector contraction expects a 2-form")
    model = eta.model
    out: dict[IndexTuple, PMat] = {}
    for m, bivec in selector.columns.items():
        acc = PMat.zero(eta.nu, model.coords)
        for (i, j), weight in bivec.coeffs.items():
            mat = eta.coeffs.get((i, j))
            if mat is not None:
                acc = acc + mat.scale(weight)
        if not acc.is_zero():
            out[(m,)] = acc
    return GlValuedForm(model, eta.nu, 1, out)


def modified_curvature(
    conn: VerticalConnection, selector: Selector, return_terms: bool = False
):
    """Binomial-corrected curvature sum_j C(r-1, j) eta^j.

    eta^0 is the curvature, eta^(k+1) = L(i_chi eta^k), r is the flag
    step.  With return_terms=True the list [eta^0..eta^(r-1)] is
    returned alongside the sum.
    """
    r = selector.step
    eta = curvature_direct(conn)
    terms = [eta]
    for _ in range(r - 1):
        eta = L_op(conn, iota_gl(selector, eta))
        terms.append(eta)
    total = None
    for j, term in enumerate(terms):
        scaled = term.scale(Fraction(comb(r - 1, j)))
        total = scaled if total is None else total + scaled
    if return_terms:
        return total, terms
    return total


def modified_curvature_iterated(
    conn: VerticalConnection, selector: Selector
) -> GlValuedForm:
    """Same operator via the iterated (id + L i_chi)^(r-1) route."""
    current = curvature_direct(conn)
    for _ in range(selector.step - 1):
        current = current + L_op(conn, iota_gl(selector, current))
    return current


def flatten(
    conn: VerticalConnection, selector: Selector
) -> tuple[VerticalConnection, GlValuedForm]:
    """Corrector alpha with i_chi curvature(nabla + alpha) = 0.

    alpha = i_chi sum_j C(r-1, j+1) (L i_chi)^j R, j = 0..r-2.  The
    shifted connection's curvature must equal the modified curvature
    and be annihilated by the selector; both are checked exactly and
    PostconditionFailed is raised otherwise.  alpha vanishes on
    distribution directions by construction (also checked).
    """
    model = conn.model
    r = selector.step
    curvature = curvature_direct(conn)
    term = curvature
    alpha: GlValuedForm | None = None
    for j in range(0, max(r - 1, 0)):
        scaled = iota_gl(selector, term).scale(Fraction(comb(r - 1, j + 1)))
        alpha = scaled if alpha is None else alpha + scaled
        if j < r - 2:
            term = L_op(conn, iota_gl(selector, term))
    if alpha is None:
        alpha = GlValuedForm(model, conn.nu, 1, {})

    lev = selector.flag.frame_levels or {}
    for (i,), mat in alpha.coeffs.items():
        if lev.get(i, 1) == 1 and not mat.is_zero():
            raise PostconditionFailed("corrector does not vanish on the distribution")

    shifted = conn.shifted(alpha)
    new_curvature = curvature_direct(shifted)
    if not iota_gl(selector, new_curvature).is_zero():
        raise PostconditionFailed("selector contraction of the shifted curvature is nonzero")
    expected = modified_curvature(conn, selector)
    if not (new_curvature - expected).is_zero():
        raise PostconditionFailed("shifted curvature differs from the modified curvature")
    return shifted, alpha
