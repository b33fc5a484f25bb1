import numpy as np
import pytest

from slantmap.connection import LambdaField
from slantmap.exprlang import parse
from slantmap.runner import build_sample_set
from slantmap.scenario import load_builtin
from slantmap.theorems import (FAIL, NA, PASS, Clause, DOMAIN_LEMMAS, RANGE_LEMMAS, SampleSet,
                               THEOREMS, _logic_iff, _logic_implies, _logic_two_of_three,
                               connection_checks, lemma_suite, norm_expansion_check,
                               norm_expansion_reports, ricci_reports, theorem_condition)

from helpers import conformal_ex41, ex41_map, load_test_scenario


def sample_set(sc, n=None):
    if n is not None:
        sc.n_points = n
    return build_sample_set(sc, sc.points(), 1.0)


@pytest.fixture(scope="module")
def ss31():
    return sample_set(load_builtin("ex3_1"), 16)


@pytest.fixture(scope="module")
def ss41():
    return sample_set(load_builtin("ex4_1"), 16)


def by_id(reports):
    return {r.check_id: r for r in reports}


# -- logic helpers -----------------------------------------------------------

def C(res, tol=1e-8, name="c"):
    return Clause(name, res, tol)


def test_two_of_three_flags_only_the_odd_one_out():
    assert _logic_two_of_three([C(0), C(0), C(0.5)]) == 0.5
    assert _logic_two_of_three([C(0), C(0.2), C(0.5)]) == 0.0
    assert _logic_two_of_three([C(0), C(0), C(0)]) == 0.0


def test_iff_and_implies():
    assert _logic_iff(C(0), C(0.3)) == 0.3
    assert _logic_iff(C(0.4), C(0)) == 0.4
    assert _logic_iff(C(0.4), C(0.3)) == 0.0
    assert _logic_implies([C(0), C(0)], C(0.7)) == 0.7
    assert _logic_implies([C(1), C(0)], C(0.7)) == 0.0


# -- lemma suites ------------------------------------------------------------

def test_domain_lemmas_on_ex31(ss31):
    reps = by_id(lemma_suite(ss31, "domain"))
    assert set(reps) == set(DOMAIN_LEMMAS)
    for cid, r in reps.items():
        if cid == "lemma3.3.iv":
            continue
        assert r.verdict == PASS, (cid, r.residual)
    assert reps["eq15.completeness"].residual <= 1e-12


def test_lemma_3_3_iv_printed_sign(ss31):
    """The printed sign fails by an O(1) amount; flipping the sign of the
    second term gives an identity that holds to rounding."""
    reps = by_id(lemma_suite(ss31, "domain"))
    assert reps["lemma3.3.iv"].verdict == FAIL
    assert reps["lemma3.3.iv"].residual > 0.1
    assert reps["lemma3.3.iv.sign-corrected"].residual <= 1e-12


@pytest.mark.parametrize("builder", [lambda: ex41_map(), lambda: ex41_map(a=0.7), conformal_ex41])
def test_range_lemmas(builder, rng):
    F = builder()
    ss = SampleSet.build(F, rng.uniform(-1, 1, (8, 6)))
    reps = by_id(lemma_suite(ss, "range"))
    assert set(reps) == set(RANGE_LEMMAS)
    for cid, r in reps.items():
        assert r.verdict == PASS, (cid, r.residual)


def test_lemma_suite_side_checked(ss31):
    with pytest.raises(ValueError):
        lemma_suite(ss31, "middle")


# -- connection checks -----------------------------------------------------

@pytest.mark.parametrize("name", ["ss31", "ss41"])
def test_connection_checks_pass_on_builtins(name, request):
    ss = request.getfixturevalue(name)
    reps = connection_checks(ss)
    ids = {r.check_id for r in reps}
    assert {"sff.symmetry", "eq13.conformal-sff", "lambda.declared"} <= ids
    for r in reps:
        assert r.verdict in (PASS, NA), (r.check_id, r.residual)
        if r.check_id in ("sff.symmetry", "eq12a.duality") and r.verdict == PASS:
            assert r.residual <= 1e-8


def test_connection_checks_on_curved_conformal_map(rng):
    ss = SampleSet.build(conformal_ex41(), rng.uniform(-0.8, 0.8, (6, 6)))
    for r in connection_checks(ss):
        assert r.verdict in (PASS, NA), (r.check_id, r.residual)


def test_wrong_declared_lambda_is_caught(rng):
    F = ex41_map()
    ss = SampleSet.build(F, rng.uniform(-1, 1, (4, 6)), LambdaField(F, parse("1.5", 6)))
    assert by_id(connection_checks(ss))["lambda.declared"].verdict == FAIL


# -- theorems --------------------------------------------------------------

def test_theorem_3_5_clauses_reported_separately(ss31):
    r = theorem_condition(ss31, "thm3.5")
    cl = {c.name: c for c in r.clauses}
    assert cl["harmonic"].holds
    assert cl["omega-parallel"].holds
    assert not cl["lambda-constant-on-horizontal"].holds
    # |H grad ln lambda| = |d/dx1 x1| = 1 for lambda = exp(x1)
    assert cl["lambda-constant-on-horizontal"].residual == pytest.approx(1.0, rel=1e-6)
    assert r.verdict == FAIL and r.kind == "theorem"


def test_theorem_3_1_holds_on_ex31(ss31):
    r = theorem_condition(ss31, "thm3.1")
    assert r.verdict == PASS
    assert all(c.holds for c in r.clauses)


@pytest.mark.parametrize("tid", ["thm4.1", "thm4.2", "thm4.3", "thm4.4", "thm4.5"])
def test_range_theorems_hold_on_ex41(ss41, tid):
    r = theorem_condition(ss41, tid)
    assert r.verdict == PASS, [(c.name, c.residual) for c in r.clauses]


def test_theorems_need_J(ss41):
    assert theorem_condition(ss41, "thm3.1").verdict == NA
    with pytest.raises(KeyError):
        theorem_condition(ss41, "thm9.9")


def test_theorem_on_improper_map_not_applicable():
    ss = sample_set(load_test_scenario("identity"))
    assert not ss.contexts and len(ss.skipped) == 8
    assert theorem_condition(ss, "thm3.3").verdict == NA


def test_every_theorem_runs_on_warped():
    ss = sample_set(load_test_scenario("warped"), 6)
    for tid, spec in THEOREMS.items():
        r = theorem_condition(ss, tid)
        if spec.side == "range":
            assert r.verdict == NA
        else:
            assert r.verdict in (PASS, FAIL, NA)
            for c in r.clauses or []:
                assert np.isfinite(c.residual)


# -- Ricci inequalities ----------------------------------------------------

def test_vertical_ricci_equality_on_ex31_plane():
    ss = sample_set(load_test_scenario("ex3_1_plane"))
    r = by_id(ricci_reports(ss))
    assert r["thm3.6"].verdict == PASS
    assert abs(r["thm3.6"].lhs) <= 1e-8 and abs(r["thm3.6"].rhs) <= 1e-8


def test_vertical_ricci_slack_matches_frame_sum_on_warped():
    ss = sample_set(load_test_scenario("warped"))
    r = by_id(ricci_reports(ss))
    assert r["thm3.6"].verdict == PASS and r["thm3.6"].slack >= 0
    assert r["thm3.6.oracle"].residual <= 1e-7


def test_horizontal_ricci_equality_for_homothety():
    ss = sample_set(load_test_scenario("homothetic"))
    r = by_id(ricci_reports(ss))["thm3.7"]
    assert r.verdict == PASS and abs(r.slack) <= 1e-8


def test_horizontal_ricci_slack_on_ex31(ss31):
    r = by_id(ricci_reports(ss31))
    assert r["thm3.7"].slack >= -1e-6
    assert r["thm3.7.oracle"].residual <= 1e-6


def test_ricci_needs_v():
    sc = load_builtin("ex3_1")
    sc.v = None
    sc.n_points = 2
    assert all(r.verdict == NA for r in ricci_reports(sample_set(sc)))


# -- norm expansions -------------------------------------------------------

def test_norm_expansions_trivial_on_linear_ex41(ss41):
    for r in norm_expansion_reports(ss41):
        assert r.verdict == PASS, (r.check_id, r.residual)


def test_pulled_back_term_needs_inverse_lambda_squared(rng):
    """With non-constant lambda the printed identity misses a 1/lambda^2; the
    corrected one holds to rounding."""
    ss = SampleSet.build(conformal_ex41(), rng.uniform(-0.8, 0.8, (4, 6)))
    ss.theta_decl = parse("0.7", 6)
    worst = {"eq73_printed": 0.0, "eq73_corrected": 0.0, "eq74_corrected": 0.0}
    for k, ctx in enumerate(ss.contexts):
        for Y in ctx.horizontal:
            r = norm_expansion_check(ss, k, Y)
            for key in worst:
                worst[key] = max(worst[key], r[key])
    assert worst["eq73_printed"] > 1e-2
    assert worst["eq73_corrected"] <= 1e-8
    assert worst["eq74_corrected"] <= 1e-8


# -- reproducibility -------------------------------------------------------

def test_reports_reproducible():
    a = [r.to_json() for r in lemma_suite(sample_set(load_builtin("ex3_1"), 8))]
    b = [r.to_json() for r in lemma_suite(sample_set(load_builtin("ex3_1"), 8))]
    assert a == b


def test_tolerance_override_and_scale():
    sc = load_builtin("ex3_1")
    sc.n_points = 4
    sc.tolerances = {"lemma3.3.iv": 2.0}
    ss = build_sample_set(sc, sc.points(), 0.5)
    r = by_id(lemma_suite(ss))["lemma3.3.iv"]
    assert r.tolerance == 1.0
    assert r.verdict == PASS
