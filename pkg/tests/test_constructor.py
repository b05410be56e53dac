import time
from dataclasses import replace
from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdalg.params import factor_parameter_s
from fdalg.constructor import (
    ConstructionPlan,
    Level,
    bracket,
    build_plan,
    choose_alpha1,
    choose_alpha_m,
    choose_j,
    const_oracle,
    decay_exponent,
    level_one_decay,
    verify_plan,
)


def inside(x, interval):
    lo, hi = interval
    return lo < x < hi


def brute_simplest(pred, max_den=400):
    # smallest denominator, then smallest numerator
    for q in range(2, max_den + 1):
        for p in range(1, q):
            x = Fr(p, q)
            if x.denominator == q and pred(x):
                return x
    raise AssertionError("no rational found")


def brute_alpha1(s):
    return brute_simplest(lambda a: inside(1 + (1 / a - 1) ** 2, bracket(s, 1)))


def brute_j(s, m, gamma_prev, alpha, t_prev=1):
    p, q = alpha.numerator, alpha.denominator
    for j in range(1, 10 ** 6):
        if m == 1:
            ell = p * j
            value = (1 / alpha - 1) ** 2 + Fr(1, ell * ell)
        else:
            k = j * q * t_prev
            value = gamma_prev * ((1 - alpha) ** 2 + Fr(1, k * k))
        if inside(1 + value, bracket(s, m)):
            return j
    raise AssertionError("no j found")


def test_bracket():
    assert bracket(Fr(3), 1) == (Fr(13, 4), Fr(7, 2))
    lo, hi = bracket(Fr(3), 8)
    assert hi - lo == Fr(1, 2 ** 9)


def test_alpha1_for_three():
    alpha = choose_alpha1(Fr(3))
    assert alpha == Fr(7, 18)
    assert 1 + (1 / alpha - 1) ** 2 == Fr(170, 49)
    # 2/5 sits on the boundary and is excluded
    assert 1 + (Fr(5, 2) - 1) ** 2 == Fr(13, 4)


@pytest.mark.parametrize("s", [Fr(2), Fr(3), Fr(7, 2), Fr(10), Fr(18), Fr(5, 4), Fr(101, 7)])
def test_alpha1_matches_brute_force(s):
    assert choose_alpha1(s) == brute_alpha1(s)


def test_alpha1_for_two():
    alpha = choose_alpha1(Fr(2))
    assert alpha == Fr(5, 11)
    assert Fr(5, 4) < (1 / alpha - 1) ** 2 < Fr(3, 2)


def test_alpha1_refuses_small_s():
    with pytest.raises(ValueError):
        choose_alpha1(Fr(1))


def test_j_for_three():
    j, k, ell = choose_j(Fr(3), 1, None, Fr(7, 18))
    assert (j, k, ell) == (1, 18, 7)
    value = (Fr(18, 7) - 1) ** 2 + Fr(1, 49)
    assert value == Fr(122, 49) and Fr(9, 4) < value < Fr(5, 2)


def test_j_refuses_bad_alpha():
    with pytest.raises(ValueError):
        choose_j(Fr(3), 1, None, Fr(2, 5))


@settings(max_examples=12, deadline=None)
@given(st.fractions(min_value=Fr(11, 10), max_value=Fr(30), max_denominator=50),
       st.integers(1, 3))
def test_later_levels_match_brute_force(s, t):
    alpha = choose_alpha1(s)
    j, k, ell = choose_j(s, 1, None, alpha)
    assert j == brute_j(s, 1, None, alpha)
    gamma = (1 / alpha - 1) ** 2 + Fr(1, ell * ell)
    for m in (2, 3):
        a = choose_alpha_m(s, m, gamma)
        assert a == brute_simplest(lambda x: inside(1 + gamma * (1 - x) ** 2, bracket(s, m)),
                                   max_den=5000)
        j, k, ell = choose_j(s, m, gamma, a, t)
        assert j == brute_j(s, m, gamma, a, t)
        assert (k, ell) == (j * a.denominator * t, j * a.numerator * t)
        gamma *= (1 - a) ** 2 + Fr(1, k * k)


def test_alpha_m_refuses_corrupted_gamma():
    with pytest.raises(ValueError):
        choose_alpha_m(Fr(3), 2, Fr(5))


@pytest.mark.parametrize("s,p", [(Fr(3), -2), (Fr(10), 1), (Fr(2), -3), (Fr(7, 2), -1)])
def test_decay_exponent(s, p):
    assert decay_exponent(s) == p


def test_level_one_decay():
    assert level_one_decay(Fr(7, 18)) == 0
    assert Fr(7, 18) < Fr(1, 2) and Fr(7, 18) >= Fr(1, 4)


def test_plan_for_three_one_level():
    plan = build_plan(Fr(3), 1)
    (lv,) = plan.levels
    assert (lv.alpha, lv.j, lv.k, lv.ell) == (Fr(7, 18), 1, 18, 7)
    assert factor_parameter_s(plan.sequence).lo == Fr(171, 49)
    assert (plan.enclosure.lo, plan.enclosure.hi) == (Fr(13, 4), Fr(7, 2))
    assert verify_plan(plan).passed


@pytest.mark.parametrize("s", [Fr(2), Fr(3), Fr(7, 2), Fr(10), Fr(18), Fr(21, 20)])
def test_eight_level_plans_verify(s):
    t0 = time.perf_counter()
    plan = build_plan(s, 8)
    report = verify_plan(plan)
    assert report.passed, report.failures
    assert time.perf_counter() - t0 < 5
    assert plan.enclosure.width == Fr(1, 2 ** 9)


def test_plan_with_nontrivial_t_oracle():
    plan = build_plan(Fr(3), 5, lambda m: m + 1)
    assert verify_plan(plan).passed
    for prev, lv in zip(plan.levels, plan.levels[1:]):
        assert lv.ell == lv.j * lv.p * prev.t


def test_empty_plan_rejected():
    with pytest.raises(ValueError):
        build_plan(Fr(3), 0)
    with pytest.raises(ValueError):
        const_oracle(0)


def test_plan_json_round_trip():
    plan = build_plan(Fr(7, 2), 4)
    again = ConstructionPlan.from_json(plan.to_json())
    assert again == plan


def _mutate(plan, idx, **changes):
    levels = list(plan.levels)
    levels[idx] = replace(levels[idx], **changes)
    return replace(plan, levels=tuple(levels))


@pytest.mark.parametrize("idx", range(4))
def test_corrupted_ell_fails(idx):
    plan = build_plan(Fr(3), 4)
    bad = _mutate(plan, idx, ell=plan.levels[idx].ell + 1)
    assert not verify_plan(bad).passed


def test_unreduced_alpha_fails():
    plan = build_plan(Fr(3), 2)
    lv = plan.levels[0]
    bad = _mutate(plan, 0, p=2 * lv.p, q=2 * lv.q)
    names = [c.name for c in verify_plan(bad).failures]
    assert "level 1: lowest terms" in names


def test_wrong_decay_exponent_fails():
    plan = build_plan(Fr(3), 3)
    bad = replace(plan, decay_p=plan.decay_p + 5)
    assert not verify_plan(bad).passed


def test_wrong_enclosure_fails():
    plan = build_plan(Fr(3), 3)
    bad = replace(plan, enclosure=replace(plan.enclosure, lo=plan.enclosure.lo - 1))
    names = [c.name for c in verify_plan(bad).failures]
    assert names == ["enclosure matches final bracket"]


def test_non_minimal_j_is_only_a_warning():
    plan = build_plan(Fr(3), 2)
    lv = plan.levels[1]
    t_prev = plan.levels[0].t
    bigger = _mutate(plan, 1, j=lv.j + 1, k=(lv.j + 1) * lv.q * t_prev,
                     ell=(lv.j + 1) * lv.p * t_prev)
    report = verify_plan(bigger)
    statuses = {c.name: c.status for c in report.checks}
    if not report.passed:
        # a larger j can still break the bracket on later levels; only the
        # minimality check itself must not be a hard failure
        assert statuses.get("level 2: j minimal") != "fail"
    else:
        assert statuses["level 2: j minimal"] == "warn"


def test_failed_checks_carry_detail():
    plan = build_plan(Fr(3), 2)
    bad = _mutate(plan, 0, ell=plan.levels[0].ell + 1)
    assert all(c.detail for c in verify_plan(bad).failures)


def test_level_json():
    lv = Level(1, Fr(7, 18), 7, 18, 1, 18, 7, 1)
    assert Level.from_json(lv.to_json()) == lv
