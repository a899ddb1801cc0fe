"""Acceptance suite: one test per published criterion.

Each criterion gets its own test function (criterion 8 additionally
fans out over the nilpotency step), so a verbose run prints one
pass/fail line per claim.  Numbers asserted here were frozen from
independent derivations in the unit suites; nothing is recomputed from
the implementation under test except the values being checked.
"""

import random
import time
from fractions import Fraction

import pytest

from conftest import (
    contact5_model,
    ex51_model,
    heis3_spec,
    heisenberg_model,
    ideal4_spec,
    perturbed_heis_spec,
    sl2_spec,
    so3_spec,
    x2_model,
)
from hk.connection import (
    curvature_direct,
    curvature_global_basis,
    flatten,
    iota_gl,
    modified_curvature,
    vertical_connection,
)
from hk.decide import (
    NO,
    YES,
    one_dim_criterion,
    principal_structure_exists,
    tg_metric_exists,
    verify_metric_certificate,
)
from hk.distribution import PointClass, classify_point, compute_flag, growth_vector_at
from hk.exterior import KForm, KVector
from hk.holonomy import numeric_transport_oracle, ozeki_algebra
from hk.liegroups import (
    LieAlgebraSpec,
    bracket_condition_p2k,
    free_nilpotent,
    split_frame_model,
    to_frame_model,
)
from hk.poly import parse_poly
from hk.selector import Selector, build_selector, verify_selector


def natural_split_model(n, r):
    g = free_nilpotent(n, r)
    d_idx = list(g.grading[0])
    v_idx = sorted(i for layer in g.grading[1:] for i in layer)
    return to_frame_model(g, d_idx, v_idx)


def regression_models():
    """The frozen regression registry shared by the exactness criteria."""
    return [
        ("heisenberg", heisenberg_model()),
        ("ex51-0-0", ex51_model("0", "0")),
        ("ex51-x-0", ex51_model("x", "0")),
        ("ex51-x2-0", ex51_model("x^2", "0")),
        ("ex51-0-x", ex51_model("0", "x")),
        ("ex51-x-x", ex51_model("x", "x")),
        ("ex51-x2-x", ex51_model("x^2", "x")),
        ("contact5", contact5_model()),
        ("contact5-twist", contact5_model("x1^2")),
        ("heis3", to_frame_model(heis3_spec(), [0, 1], [2])),
        ("so3", to_frame_model(so3_spec(), [0, 1], [2])),
        ("sl2", to_frame_model(sl2_spec(), [1, 2], [0])),
        ("ideal4", to_frame_model(ideal4_spec(), [0, 1], [2, 3])),
        ("free23-natural", natural_split_model(2, 3)),
        ("free24-natural", natural_split_model(2, 4)),
        ("free24-split", split_frame_model(free_nilpotent(2, 4))[0]),
        ("free34-natural", natural_split_model(3, 4)),
    ]


def pipeline(model):
    flag = compute_flag(model)
    selector = build_selector(flag)
    conn = vertical_connection(model)
    algebra = ozeki_algebra(conn, selector)
    return flag, selector, conn, algebra


def test_criterion_01_heisenberg_flag():
    started = time.perf_counter()
    flag = compute_flag(heisenberg_model())
    elapsed = time.perf_counter() - started
    assert flag.growth_vector == (2, 3)
    assert flag.step == 2
    assert flag.bracket_generating
    assert flag.equiregular
    assert elapsed < 1.0


def test_criterion_02_singular_point_detection():
    model = x2_model()
    flag = compute_flag(model)
    assert not flag.equiregular
    assert flag.growth_vector == (2, 2, 3)
    witness = flag.evidence["witness"]
    point = witness["point"]
    assert witness["rank"] > witness["base_rank"]
    assert growth_vector_at(model, point)[witness["level"] - 1] > 2
    zero = Fraction(0)
    assert growth_vector_at(model, [Fraction(1), zero, zero]) == (2, 3)
    assert growth_vector_at(model, [zero, zero, zero]) == (2, 2, 3)
    assert classify_point(model, model.base_point) is PointClass.SINGULAR


def test_criterion_03_contact_selector_family():
    model = contact5_model()
    flag = compute_flag(model)
    built = build_selector(flag)
    assert verify_selector(built)["ok"]

    def family(f1_text, f2_text):
        f1 = parse_poly(f1_text, model.coords)
        f2 = parse_poly(f2_text, model.coords)
        column = KVector(model, 2, {(0, 1): f1, (2, 3): f2})
        return Selector(model=model, flag=flag, columns={4: column})

    for f1 in ("1", "x1", "1 - y2"):
        good = family(f1, f"1 - ({f1})")
        assert verify_selector(good)["ok"], f1
        bad = family(f1, f1)
        report = verify_selector(bad)
        assert not report["ok"], f1
        assert report["violations"][0]["kind"] == "axiom-II"


def test_criterion_04_curvature_routes_agree():
    for name, model in regression_models():
        conn = vertical_connection(model)
        direct = curvature_direct(conn)
        via_global_basis, _ = curvature_global_basis(model)
        assert (direct - via_global_basis).is_zero(), name


def test_criterion_05_flatten_contraction_vanishes():
    for name, model in regression_models():
        flag = compute_flag(model)
        selector = build_selector(flag)
        conn = vertical_connection(model)
        shifted, _ = flatten(conn, selector)
        residual = iota_gl(selector, curvature_direct(shifted))
        assert residual.is_zero(), name


def test_criterion_06_corank_one_obstruction_formula():
    for phi1 in ("0", "x", "x^2"):
        for phi2 in ("0", "x"):
            model = ex51_model(phi1, phi2)
            flag = compute_flag(model)
            selector = build_selector(flag)
            tau = model.coframe_form(2)
            z_field = model.frame_field(2)
            obstruction, verdict = one_dim_criterion(model, tau, z_field, selector)
            coeff = model.frame_field(0).apply(parse_poly(phi1, model.coords))
            coeff += model.frame_field(1).apply(parse_poly(phi2, model.coords))
            d_coeff = KForm(
                model, 1, {(i,): model.derive(i, coeff) for i in range(model.n)}
            )
            expected = d_coeff.wedge(tau).scale(Fraction(-1))
            assert (obstruction - expected).is_zero(), (phi1, phi2)
            assert (verdict.kind == YES) == coeff.is_constant(), (phi1, phi2)


def test_criterion_07_onedim_matches_tg():
    for name, model in regression_models():
        if len(model.V_indices) != 1:
            continue
        flag, selector, conn, algebra = pipeline(model)
        tg = tg_metric_exists(algebra, bracket_generating=flag.bracket_generating)
        m = model.V_indices[0]
        _, onedim = one_dim_criterion(
            model, model.coframe_form(m), model.frame_field(m), selector
        )
        assert tg.kind in (YES, NO), name
        assert onedim.kind == tg.kind, name


@pytest.mark.parametrize("r", range(2, 9))
def test_criterion_08_carnot_tg_spec_table(r):
    model, _ = split_frame_model(free_nilpotent(2, r))
    flag, _, _, algebra = pipeline(model)
    verdict = tg_metric_exists(algebra, bracket_generating=flag.bracket_generating)
    assert verdict.kind == (YES if r <= 7 else NO)


def test_criterion_08_parity_consistency_and_runtime():
    started = time.perf_counter()
    for r in range(2, 9):
        spec = free_nilpotent(2, r)
        model, split = split_frame_model(spec)
        flag, _, _, algebra = pipeline(model)
        verdict = tg_metric_exists(algebra, bracket_generating=flag.bracket_generating)
        parity_ok, witness = bracket_condition_p2k(spec, split)
        assert parity_ok == (verdict.kind == YES), r
        assert (witness is None) == parity_ok, r
    assert time.perf_counter() - started < 60.0


def test_criterion_09_lie_group_special_cases():
    ideal_cases = (
        ("ideal4", to_frame_model(ideal4_spec(), [0, 1], [2, 3])),
        ("free34-natural", natural_split_model(3, 4)),
        ("abelian", to_frame_model(
            LieAlgebraSpec(3, ["x1", "x2", "x3"], {}), [0, 1], [2]
        )),
    )
    for name, model in ideal_cases:
        _, _, _, algebra = pipeline(model)
        assert algebra.dim == 0, name
        assert principal_structure_exists(algebra).kind == YES, name
    reductive_cases = (
        ("so3", to_frame_model(so3_spec(), [0, 1], [2])),
        ("sl2", to_frame_model(sl2_spec(), [1, 2], [0])),
    )
    for name, model in reductive_cases:
        flag = compute_flag(model)
        selector = build_selector(flag)
        conn = vertical_connection(model)
        assert modified_curvature(conn, selector).is_zero(), name


def test_criterion_10_selector_independence():
    # On the rank-two corank-one model the bivector space of the
    # distribution is one line, so the verification axioms pin the
    # selector coefficient; any distinct candidate must fail.
    model = ex51_model("x^2", "0")
    flag = compute_flag(model)
    canonical = build_selector(flag)
    assert verify_selector(canonical)["ok"]
    pairs = [(a, b) for a in model.D_indices for b in model.D_indices if a < b]
    assert len(pairs) == 1
    base = canonical.column(2).component(pairs[0])
    for shift in ("1", "-1", "x"):
        bumped = base + parse_poly(shift, model.coords)
        candidate = Selector(
            model=model, flag=flag,
            columns={2: KVector(model, 2, {pairs[0]: bumped})},
        )
        assert not verify_selector(candidate)["ok"], shift

    # Two genuinely distinct verified selectors exist on the twisted
    # five-dimensional contact model; the holonomy span cannot tell
    # them apart.
    twisted = contact5_model("x1^2")
    tflag = compute_flag(twisted)
    one = twisted.one_poly()
    first = Selector(model=twisted, flag=tflag,
                     columns={4: KVector(twisted, 2, {(0, 1): one})})
    second = Selector(model=twisted, flag=tflag,
                      columns={4: KVector(twisted, 2, {(2, 3): one})})
    assert verify_selector(first)["ok"]
    assert verify_selector(second)["ok"]
    assert (first.column(4) - second.column(4)).is_zero() is False
    conn = vertical_connection(twisted)
    span_first = ozeki_algebra(conn, first)
    span_second = ozeki_algebra(conn, second)
    assert span_first.dim == span_second.dim == 1
    assert span_first.basis == span_second.basis


def test_criterion_11_numeric_oracle():
    started = time.perf_counter()
    model = ex51_model("x^2", "0")
    flag, selector, conn, algebra = pipeline(model)
    assert algebra.dim == 1
    shifted, _ = flatten(conn, selector)
    eps = 0.125
    result = numeric_transport_oracle(shifted, eps=eps, steps=512, seed=0)
    assert result.rank == algebra.dim

    def norms(res):
        return [sum(float(x) ** 2 for x in log.flatten()) ** 0.5 for log in res.logs]

    coarse = norms(result)
    leading = (0, 2)
    index = result.loops.index(leading)
    frozen = 2.0 * eps * eps
    assert abs(coarse[index] - frozen) <= 1e-6 * frozen

    halved = numeric_transport_oracle(shifted, eps=eps / 2, steps=512, seed=0)
    fine = norms(halved)
    floor = eps * eps / 2
    checked = 0
    for pos, value in enumerate(coarse):
        if value < floor:
            continue
        ratio = value / fine[pos]
        assert abs(ratio - 4.0) <= 0.4, result.loops[pos]
        checked += 1
    assert checked >= 1

    ranks = [
        numeric_transport_oracle(shifted, eps=eps, steps=512, seed=seed).rank
        for seed in (0, 1, 2)
    ]
    assert ranks == [1, 1, 1]
    assert time.perf_counter() - started < 10.0


def test_criterion_12_fuzz_certificates():
    rng = random.Random(0)
    yes = no = failures = 0
    for _ in range(100):
        deltas = [Fraction(rng.randrange(-2, 3), 4) for _ in range(6)]
        spec = perturbed_heis_spec(*deltas)
        model = to_frame_model(spec, [0, 1], [2])
        flag, _, _, algebra = pipeline(model)
        verdict = tg_metric_exists(
            algebra, bracket_generating=flag.bracket_generating
        )
        assert verdict.kind in (YES, NO), deltas
        if verdict.kind == YES:
            yes += 1
            check = verify_metric_certificate(algebra, verdict.certificate)
            if not check["ok"] or any(m <= 0 for m in check["minors"]):
                failures += 1
        else:
            no += 1
    assert failures == 0
    assert yes == 5 and no == 95
