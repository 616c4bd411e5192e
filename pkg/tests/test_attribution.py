import pytest
from hypothesis import given
from hypothesis import strategies as st

from needscope.attribution import (
    AGE_CATEGORIES,
    AgeMention,
    IncomeMention,
    age_category,
    build_profile,
    detect_mentions,
    normalize_income,
    resolve_age,
    resolve_income,
)
from needscope.errors import AttributionError

from conftest import make_post


def age(year, value):
    return AgeMention(post_id="p", year=year, age_years=value)


def income(year, amount, period="monthly"):
    return IncomeMention(post_id="p", year=year, amount=amount, period=period)


# --- normalize_income -------------------------------------------------------


def test_normalize_income_examples():
    assert normalize_income(6000, "monthly") == 6000.00
    assert normalize_income(120000, "annual") == 10000.00
    assert normalize_income(30, "hourly") == pytest.approx(5200.00)  # 30*40*52/12, hand oracle
    assert normalize_income(1200, "weekly") == pytest.approx(1200 * 52 / 12)
    assert normalize_income(2000, "biweekly") == pytest.approx(2000 * 26 / 12)


def test_normalize_income_rejects_unknown_period_and_nonpositive():
    with pytest.raises(AttributionError):
        normalize_income(100, "fortnightly")
    with pytest.raises(AttributionError):
        normalize_income(0, "monthly")


@given(
    st.floats(min_value=1e-3, max_value=1e6, allow_nan=False),
    st.floats(min_value=1e-3, max_value=1e3, allow_nan=False),
    st.sampled_from(["monthly", "annual", "hourly", "weekly", "biweekly"]),
)
def test_normalize_income_homogeneous_degree_one(amount, c, period):
    assert normalize_income(c * amount, period) == pytest.approx(c * normalize_income(amount, period))


# --- age categories ---------------------------------------------------------


def test_age_category_boundaries_closed_on_the_right():
    assert age_category(20) == "<21"
    assert age_category(21) == "21-30"
    assert age_category(30) == "21-30"
    assert age_category(31) == "31-40"
    assert age_category(60) == "51-60"
    assert age_category(61) == ">60"


@given(st.integers(min_value=1, max_value=119))
def test_age_categories_partition(age_years):
    matches = [label for label, lo, hi in AGE_CATEGORIES if lo <= age_years <= hi]
    assert len(matches) == 1
    assert age_category(age_years) == matches[0]


# --- resolve_age -------------------------------------------------------------


def test_resolve_age_lowest_in_most_recent_year():
    # published anchor case: mentions of 33 and 35 in the latest year resolve to 33
    resolved = resolve_age([age(2022, 31), age(2023, 33), age(2023, 35)])
    assert resolved == (33, "31-40")


def test_resolve_age_single_mention():
    assert resolve_age([age(2022, 31)]) == (31, "31-40")


def test_resolve_age_most_recent_year_wins():
    assert resolve_age([age(2021, 29), age(2023, 30)]) == (30, "21-30")


def test_resolve_age_empty_is_absent():
    assert resolve_age([]) is None


def test_resolve_age_never_exceeds_minimum_in_chosen_year():
    mentions = [age(2023, 40), age(2023, 22), age(2023, 31)]
    resolved_age, _ = resolve_age(mentions)
    assert resolved_age == 22


# --- resolve_income -----------------------------------------------------------


def test_income_backfill_to_all_earlier_years():
    resolved = resolve_income([income(2023, 7000)], {2021, 2022, 2023})
    assert resolved == {2021: 7000, 2022: 7000, 2023: 7000}


def test_income_lowest_of_multiple_mentions_in_year():
    resolved = resolve_income([income(2023, 7000), income(2023, 5000)], {2023})
    assert resolved[2023] == 5000


def test_income_gap_year_takes_nearest_later_mention():
    # pinned reading: unmentioned 2022 back-fills from 2023, not forward from 2021
    resolved = resolve_income([income(2021, 4000), income(2023, 6000)], {2021, 2022, 2023})
    assert resolved == {2021: 4000, 2022: 6000, 2023: 6000}


def test_income_years_after_last_mention_carry_forward():
    resolved = resolve_income([income(2020, 3000)], {2020, 2021, 2022})
    assert resolved == {2020: 3000, 2021: 3000, 2022: 3000}


def test_income_no_mentions_resolves_empty():
    assert resolve_income([], {2021}) == {}


def test_income_mixed_periods_normalized_before_min():
    # 60k annual = 5000/month beats the 5200 monthly mention
    resolved = resolve_income([income(2023, 60000, "annual"), income(2023, 5200, "monthly")], {2023})
    assert resolved[2023] == pytest.approx(5000.0)


@given(
    st.dictionaries(
        st.integers(2019, 2024),
        st.lists(st.floats(min_value=100, max_value=20000), min_size=1, max_size=4),
        min_size=1,
        max_size=5,
    )
)
def test_income_per_year_never_exceeds_any_mention_in_that_year(per_year):
    mentions = [income(y, a) for y, amounts in per_year.items() for a in amounts]
    resolved = resolve_income(mentions, set(per_year))
    for year, amounts in per_year.items():
        assert resolved[year] <= min(amounts) + 1e-9


# --- detect_mentions (reference extractor fixtures) ---------------------------


def test_detect_age_and_annual_income(rule_engine):
    post = make_post(text="I'm 27, making $65k/yr and trying to plan ahead for everything coming up.")
    ages, incomes = detect_mentions(post, rule_engine)
    assert [a.age_years for a in ages] == [27]
    assert len(incomes) == 1
    assert incomes[0].amount == 65000
    assert incomes[0].period == "annual"
    assert normalize_income(incomes[0].amount, incomes[0].period) == pytest.approx(5416.67, abs=0.01)


def test_detect_no_mentions(rule_engine):
    ages, incomes = detect_mentions(make_post(text="thinking about index funds"), rule_engine)
    assert (ages, incomes) == ([], [])


def test_detect_monthly_salary_and_age(rule_engine):
    post = make_post(text="My salary is $4,500 a month at age 31 and rent keeps climbing.")
    ages, incomes = detect_mentions(post, rule_engine)
    assert [a.age_years for a in ages] == [31]
    assert [(i.amount, i.period) for i in incomes] == [(4500.0, "monthly")]


def test_detect_amount_without_period_is_not_income(rule_engine):
    ages, incomes = detect_mentions(make_post(text="I spent $3,000 on a new laptop yesterday."), rule_engine)
    assert incomes == []


def test_detect_non_usd_dropped_with_warning(rule_engine, caplog):
    post = make_post(text="I earn €4,000 a month in Berlin these days.")
    with caplog.at_level("WARNING"):
        _, incomes = detect_mentions(post, rule_engine)
    assert incomes == []
    assert any("non-USD" in r.message for r in caplog.records)


# --- profiles -----------------------------------------------------------------


def test_build_profile_requires_both_age_and_income():
    profile = build_profile("u", [age(2022, 30)], [], {2022})
    assert not profile.has_age_and_income
    profile = build_profile("u", [age(2022, 30)], [income(2022, 5000)], {2022})
    assert profile.has_age_and_income
    assert profile.age_category == "21-30"
    assert profile.income_by_year == {2022: 5000}


def test_profile_round_trips_through_dict():
    from needscope.attribution import UserProfile

    profile = build_profile("u", [age(2021, 40)], [income(2021, 6000)], {2021, 2022})
    assert UserProfile.from_dict(profile.as_dict()) == profile


def test_detect_mentions_wraps_engine_failures_with_post_id():
    class BrokenEngine:
        def detect_age_income(self, post):
            raise RuntimeError("engine exploded")

    with pytest.raises(AttributionError, match="p1"):
        detect_mentions(make_post(post_id="p1"), BrokenEngine())
