import math
import random
from collections import Counter, defaultdict

import numpy as np
import pytest

from needscope.analytics import (
    behavior_correlations,
    build_age_table,
    build_income_bin_table,
    build_level_income_table,
    cooccurrence,
    hypothesis_checks,
    income_bin,
    map_topics_to_levels,
    phi_from_contingency,
)
from needscope.attribution import UserProfile
from needscope.errors import AnalyticsError
from needscope.extraction.types import (
    NeedLabel,
    NeedRecord,
    NhfLevel5,
    NhfLevel7,
    NpfLevel,
    RiskLevel,
    StressLevel,
    collapse_nhf7,
)
from needscope.reference_tables import load_reference_tables, reconcile_reference_tables

from conftest import make_post

NHF7_FOR_5 = {
    NhfLevel5.BASIC: NhfLevel7.BASIC,
    NhfLevel5.SAFETY: NhfLevel7.SAFETY_L1,
    NhfLevel5.LOVE_BELONGINGNESS: NhfLevel7.LOVE_BELONGINGNESS,
    NhfLevel5.ESTEEM: NhfLevel7.ESTEEM,
    NhfLevel5.SELF_ACTUALIZATION: NhfLevel7.SELF_ACTUALIZATION,
}


def need(
    need_id="n1",
    post_id="p1",
    user="alice",
    year=2023,
    nhf5=NhfLevel5.SAFETY,
    npf=NpfLevel.SAVINGS_EMERGENCIES,
    stress=StressLevel.LOW,
    risk=RiskLevel.CALCULATIVE,
):
    nhf7 = NHF7_FOR_5[nhf5]
    return NeedRecord(
        need_id=need_id,
        post_id=post_id,
        user=user,
        year=year,
        label=NeedLabel("emergency fund", "saving"),
        nhf7=nhf7,
        nhf5=collapse_nhf7(nhf7),
        npf=npf,
        stress=stress,
        risk=risk,
        query="q",
        prompt_version="rule-1",
    )


def profile(user="alice", age=25, incomes={2023: 5000.0}):
    from needscope.attribution import age_category

    return UserProfile(user=user, resolved_age=age, age_category=age_category(age), income_by_year=dict(incomes))


# --- age table -----------------------------------------------------------------


def test_age_table_singleton_row():
    profiles = {"alice": profile(age=25, incomes={2023: 5000.0})}
    posts = [make_post(post_id=f"p{i}", author="alice") for i in range(20)]
    needs = [need(need_id=f"n{i}", post_id=f"p{i % 20}") for i in range(55)]
    table = build_age_table(profiles, posts, needs)
    row = table.rows["21-30"]
    assert (row.n_users, row.avg_monthly_income, row.n_posts, row.n_needs) == (1, 5000.0, 20, 55)


def test_age_table_partitions_users():
    profiles = {"a": profile("a", 25), "b": profile("b", 35)}
    posts = [make_post(post_id="p1", author="a"), make_post(post_id="p2", author="b")]
    needs = [need(need_id="n1", post_id="p1", user="a"), need(need_id="n2", post_id="p2", user="b")]
    table = build_age_table(profiles, posts, needs)
    assert set(table.rows) == {"21-30", "31-40"}
    assert table.total_users() == 2
    assert table.total_needs() == 2


def test_age_table_user_income_is_across_year_mean():
    profiles = {"a": profile("a", 25, incomes={2022: 4000.0, 2023: 6000.0})}
    table = build_age_table(profiles, [], [])
    assert table.rows["21-30"].avg_monthly_income == 5000.0


def test_need_for_unprofiled_user_is_a_hard_error():
    with pytest.raises(AnalyticsError):
        build_age_table({}, [], [need(user="ghost")])


# --- level income table -----------------------------------------------------------


def test_level_income_constant_income_everywhere():
    profiles = {"alice": profile(incomes={2023: 6000.0})}
    needs = [
        need(need_id="n1", nhf5=NhfLevel5.BASIC, npf=NpfLevel.CONSUMPTION_IMMEDIATE),
        need(need_id="n2", nhf5=NhfLevel5.SAFETY, npf=NpfLevel.SAVINGS_EMERGENCIES),
    ]
    table = build_level_income_table(needs, profiles)
    assert table.nhf5[NhfLevel5.BASIC].mean_income == 6000.0
    assert table.nhf5[NhfLevel5.SAFETY].mean_income == 6000.0


def test_level_income_uses_post_year_income():
    profiles = {"alice": profile(incomes={2022: 4000.0, 2023: 8000.0})}
    needs = [need(need_id="n1", year=2022), need(need_id="n2", year=2023)]
    table = build_level_income_table(needs, profiles)
    assert table.nhf5[NhfLevel5.SAFETY].mean_income == 6000.0


def test_level_income_empty_level_reports_absent_not_zero():
    profiles = {"alice": profile()}
    table = build_level_income_table([need()], profiles)
    assert table.nhf5[NhfLevel5.ESTEEM].n_needs == 0
    assert table.nhf5[NhfLevel5.ESTEEM].mean_income is None


# --- hypothesis checks ---------------------------------------------------------------


def test_published_nhf_panel_flags_exactly_the_esteem_dip():
    checks = hypothesis_checks(load_reference_tables().level_income)
    assert checks["h1"]["dips"] == ["esteem"]
    assert not checks["h1"]["monotone"]


def test_published_npf_panel_is_monotone():
    checks = hypothesis_checks(load_reference_tables().level_income)
    assert checks["h2"]["monotone"]
    assert checks["h2"]["dips"] == []
    assert all(p["increased"] for p in checks["h2"]["pairs"])


def test_uniform_incomes_flag_equal_not_increasing():
    profiles = {"alice": profile(incomes={2023: 5000.0})}
    needs = [
        need(need_id=f"n{i}", nhf5=nhf5, npf=npf)
        for i, (nhf5, npf) in enumerate(
            (a, b) for a in NhfLevel5 for b in NpfLevel
        )
    ]
    checks = hypothesis_checks(build_level_income_table(needs, profiles))
    assert all(p["relation"] == "equal" for p in checks["h1"]["pairs"])
    assert all(not p["increased"] for p in checks["h1"]["pairs"])
    assert checks["h1"]["dips"] == []


# --- topic-level mapping -----------------------------------------------------------------


def test_topic_map_concentrated_cell():
    needs = [need(need_id=f"n{i}") for i in range(10)]
    assignment = {f"n{i}": 3 for i in range(10)}
    matrix = map_topics_to_levels(needs, assignment, n_topics=5)
    assert matrix["nhf5"]["safety"]["topic_3"] == 10


def test_topic_map_grand_total_conserves_needs_with_unmodeled_column():
    needs = [need(need_id=f"n{i}") for i in range(9977)]
    assignment = {f"n{i}": i % 4 for i in range(9970)}  # 7 needs left unmodeled
    matrix = map_topics_to_levels(needs, assignment, n_topics=4)
    row = matrix["npf"]["savings_emergencies"]
    modeled_total = sum(v for k, v in row.items() if k != "unmodeled")
    assert modeled_total == 9970
    assert row["unmodeled"] == 7
    assert sum(row.values()) == 9977  # table count reconciles only with the residual column


# --- co-occurrence --------------------------------------------------------------------------


def test_cooccurrence_triangle_and_self_pair():
    needs = [
        need(need_id="a", post_id="p1", nhf5=NhfLevel5.BASIC),
        need(need_id="b", post_id="p1", nhf5=NhfLevel5.SAFETY),
        need(need_id="c", post_id="p1", nhf5=NhfLevel5.ESTEEM),
        need(need_id="d", post_id="p2", nhf5=NhfLevel5.BASIC),
        need(need_id="e", post_id="p2", nhf5=NhfLevel5.BASIC),
    ]
    matrix = cooccurrence(needs, "nhf5")
    assert matrix.value("basic", "safety") == 1
    assert matrix.value("safety", "basic") == 1
    assert matrix.value("basic", "esteem") == 1
    assert matrix.value("safety", "esteem") == 1
    assert matrix.value("basic", "basic") == 1  # the (d, e) self-pair


def bruteforce_pairs(needs, key_of):
    by_post = defaultdict(list)
    for n in needs:
        by_post[n.post_id].append(n)
    counts = Counter()
    for group in by_post.values():
        for i in range(len(group)):
            for j in range(i + 1, len(group)):
                a, b = key_of(group[i]), key_of(group[j])
                counts[(a, b)] += 1
                if a != b:
                    counts[(b, a)] += 1
    return counts


def random_needs(rng, n_posts=100):
    needs = []
    nid = 0
    for p in range(n_posts):
        for _ in range(rng.randint(1, 3)):
            needs.append(
                need(
                    need_id=f"n{nid}",
                    post_id=f"p{p}",
                    nhf5=rng.choice(list(NhfLevel5)),
                    npf=rng.choice(list(NpfLevel)),
                    stress=rng.choice(list(StressLevel)),
                    risk=rng.choice(list(RiskLevel)),
                )
            )
            nid += 1
    return needs


def test_cooccurrence_matches_bruteforce_enumeration_and_is_symmetric():
    rng = random.Random(42)
    needs = random_needs(rng)
    assignment = {n.need_id: rng.randrange(5) for n in needs}
    for key, key_of in (
        ("nhf5", lambda n: n.nhf5.value),
        ("npf", lambda n: n.npf.value),
        ("topic", lambda n: f"topic_{assignment[n.need_id]}"),
    ):
        matrix = cooccurrence(needs, key, topic_assignment=assignment)
        expected = bruteforce_pairs(needs, key_of)
        for i, a in enumerate(matrix.labels):
            for j, b in enumerate(matrix.labels):
                assert matrix.counts[i][j] == expected.get((a, b), 0), (key, a, b)
                assert matrix.counts[i][j] == matrix.counts[j][i]


def test_cross_framework_row_sums_equal_pair_participation():
    rng = random.Random(7)
    needs = random_needs(rng, n_posts=50)
    cross = cooccurrence(needs, "cross_framework")
    participation = Counter()
    by_post = defaultdict(list)
    for n in needs:
        by_post[n.post_id].append(n)
    for group in by_post.values():
        for i in range(len(group)):
            for j in range(i + 1, len(group)):
                participation[group[i].nhf5.value] += 1
                participation[group[j].nhf5.value] += 1
    assert cross.row_sums() == {label: participation.get(label, 0) for label in cross.nhf_labels}


def test_cooccurrence_order_invariance():
    rng = random.Random(3)
    needs = random_needs(rng, n_posts=30)
    shuffled = needs[:]
    rng.shuffle(shuffled)
    a = cooccurrence(needs, "nhf5")
    b = cooccurrence(shuffled, "nhf5")
    assert a.labels == b.labels and a.counts == b.counts


# --- correlations ------------------------------------------------------------------------------


def test_phi_hand_computed_contingency_case():
    assert phi_from_contingency(30, 10, 10, 50) == pytest.approx(0.5833, abs=1e-4)


def test_phi_perfect_association():
    needs = [need(need_id=f"n{i}", nhf5=NhfLevel5.BASIC, stress=StressLevel.HIGH) for i in range(5)]
    needs += [need(need_id=f"m{i}", nhf5=NhfLevel5.SAFETY, stress=StressLevel.LOW) for i in range(5)]
    table = behavior_correlations(needs)
    assert table.rows["basic"]["high"] == pytest.approx(1.0)
    assert table.rows["basic"]["low"] == pytest.approx(-1.0)


def test_phi_constant_indicator_reported_absent():
    needs = [need(need_id=f"n{i}", stress=StressLevel.LOW) for i in range(4)]
    table = behavior_correlations(needs)
    assert table.rows["safety"]["low"] is None  # both indicators constant


def test_phi_matches_direct_pearson_on_indicators():
    rng = random.Random(99)
    needs = random_needs(rng, n_posts=400)
    table = behavior_correlations(needs)
    assigned = [n for n in needs if n.risk is not RiskLevel.UNASSIGNED]
    for level in NhfLevel5:
        for stress in StressLevel:
            x = np.array([1.0 if n.nhf5 is level else 0.0 for n in needs])
            y = np.array([1.0 if n.stress is stress else 0.0 for n in needs])
            expected = float(np.corrcoef(x, y)[0, 1])
            assert table.rows[level.value][stress.value] == pytest.approx(expected, abs=1e-10)
        for risk in (RiskLevel.CAUTIOUS, RiskLevel.CALCULATIVE, RiskLevel.CHANCE_TAKING):
            x = np.array([1.0 if n.nhf5 is level else 0.0 for n in assigned])
            y = np.array([1.0 if n.risk is risk else 0.0 for n in assigned])
            expected = float(np.corrcoef(x, y)[0, 1])
            assert table.rows[level.value][risk.value] == pytest.approx(expected, abs=1e-10)


# --- income bins ------------------------------------------------------------------------------------


def test_income_bin_boundaries_right_closed():
    assert income_bin(0) == "0-4000"
    assert income_bin(4000) == "0-4000"
    assert income_bin(4000.01) == "4001-8000"
    assert income_bin(20000) == "16001-20000"
    assert income_bin(20001) == ">20000"


def test_income_bin_table_matches_bruteforce_rebinning():
    rng = random.Random(12)
    needs = random_needs(rng, n_posts=60)
    profiles = {"alice": profile(incomes={2023: 0.0})}
    incomes = {n.need_id: rng.uniform(0, 25000) for n in needs}
    profiles = {}
    for n in needs:
        # one user per need so each need can carry its own income
        user = f"u_{n.need_id}"
        profiles[user] = profile(user=user, incomes={2023: incomes[n.need_id]})
    needs = [
        NeedRecord(
            need_id=n.need_id, post_id=n.post_id, user=f"u_{n.need_id}", year=2023, label=n.label,
            nhf7=n.nhf7, nhf5=n.nhf5, npf=n.npf, stress=n.stress, risk=n.risk,
            query=n.query, prompt_version=n.prompt_version,
        )
        for n in needs
    ]
    table = build_income_bin_table(needs, profiles)

    expected = defaultdict(lambda: {"stress": Counter(), "risk": Counter(), "un": 0, "n": 0})
    for n in needs:
        b = income_bin(incomes[n.need_id])
        expected[b]["n"] += 1
        expected[b]["stress"][n.stress.value] += 1
        if n.risk is RiskLevel.UNASSIGNED:
            expected[b]["un"] += 1
        else:
            expected[b]["risk"][n.risk.value] += 1
    for label, row in table.rows.items():
        assert row.n_needs == expected[label]["n"]
        assert row.n_unassigned_risk == expected[label]["un"]
        for s, count in row.stress.items():
            assert count == expected[label]["stress"].get(s, 0)
        for r, count in row.risk.items():
            assert count == expected[label]["risk"].get(r, 0)
        assert sum(row.stress.values()) == row.n_needs
        assert sum(row.risk.values()) == row.n_needs - row.n_unassigned_risk


# --- published reference fixtures --------------------------------------------------------------------------------------


def test_reference_fixture_reconciliation_all_checks_pass():
    checks = reconcile_reference_tables()
    failures = [c for c in checks if c["kind"] == "check" and not c["ok"]]
    assert failures == []


def test_reference_fixture_surfaces_narrative_discrepancies_without_correcting():
    checks = reconcile_reference_tables()
    notes = [c for c in checks if c["kind"] == "note"]
    deltas = {c["name"].split("'")[1]: c["delta"] for c in notes}
    assert deltas == {"savings_emergencies": 7, "retirement_wealth_lifestyle": 3}
    tables = load_reference_tables()
    assert tables.level_income.npf[NpfLevel.SAVINGS_EMERGENCIES].n_needs == 9977  # table side untouched
    assert tables.npf_text_totals["savings_emergencies"] == 9970  # narrative side untouched
