"""Deterministic synthetic corpus generator for offline runs and benchmarks.

Generates a small forum dump with planted topic themes, explicit age/income
mentions, and a few deliberately ineligible users and malformed lines so a
full pipeline run exercises every filter. Same seed, same bytes.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

THEMES: dict[str, dict] = {
    "emergency_medical": {
        "questions": [
            "Should I use my emergency fund for this urgent medical bill I cannot afford?",
            "How big should my emergency savings be when I am worried about hospital debt?",
            "Is basic health insurance coverage a safe low-risk choice on my budget?",
        ],
        "fillers": [
            "The hospital invoice arrived last week and the emergency fund barely covers the deductible amount.",
            "My insurance policy premium went up again so the emergency cushion keeps shrinking every month.",
            "Urgent care visits and surgery copays drained the savings account faster than expected this year.",
        ],
        "emotions": [
            "I am scared and anxious about the bills piling up.",
            "The sudden diagnosis left me shocked and blindsided honestly.",
        ],
    },
    "retirement_investing": {
        "questions": [
            "Which index fund should I pick for retirement investing?",
            "How should I be weighing VTI vs VOO allocations for my 401k?",
            "Is maxing the IRA before the brokerage account the right strategy?",
        ],
        "fillers": [
            "The retirement portfolio holds index funds and a small brokerage position in dividend stock.",
            "Rebalancing the 401k allocation once a year keeps the expense ratio and diversification on track.",
            "Compound growth in the pension and IRA should cover retirement if contributions stay steady.",
        ],
        "emotions": ["Honestly I am excited and grateful to watch the balance grow."],
    },
    "debt_budgeting": {
        "questions": [
            "How do I budget rent and utilities when I am desperate about eviction and credit card debt?",
            "Should I consolidate my student loan or attack the credit card first since I am struggling?",
            "What budget split works when rent eats half the paycheck and I feel unsure?",
        ],
        "fillers": [
            "The landlord raised rent again and the utilities bill doubled during the winter months.",
            "Credit card interest keeps compounding while the student loan minimum barely moves the balance.",
            "Every paycheck gets allocated to rent utilities groceries and the leftover goes to debt payoff.",
        ],
        "emotions": [
            "I feel sad and hopeless about drowning in payments.",
            "It makes me angry and frustrated that wages stay flat.",
        ],
    },
    "charity_estate": {
        "questions": [
            "How do I set up legacy planning and charitable donations properly?",
            "Should the estate plan include a donor advised fund for philanthropy?",
            "What is the right will structure for leaving money to charity?",
        ],
        "fillers": [
            "The estate attorney suggested a trust for the inheritance and annual philanthropy budget.",
            "Charitable donations through the donor advised fund simplify taxes and the legacy paperwork.",
            "Updating the will and beneficiary forms keeps the charitable legacy plan aligned with our values.",
        ],
        "emotions": ["It makes me happy and proud to give something back."],
    },
    "family_support": {
        "questions": [
            "How do I plan financially to support my aging parents at home?",
            "Should the family budget carry childcare costs or my parents medical help first?",
            "Is a guaranteed safe account the right place for the family wedding fund?",
        ],
        "fillers": [
            "Supporting aging parents while raising kids stretches the family budget in both directions.",
            "The wedding fund and childcare costs compete with everything else the family needs.",
            "We set aside part of each paycheck for the parents and the kids school costs.",
        ],
        "emotions": ["I am grateful we can help but worried about the math."],
    },
    "property_risk": {
        "questions": [
            "Should I gamble on a leveraged rental property or keep the real estate plan boring?",
            "Is buying a rental property a calculated strategy or a moonshot bet right now?",
            "How risky is real estate investment compared to a conservative portfolio?",
        ],
        "fillers": [
            "The rental property listing looks tempting but the leverage and vacancy risk are real.",
            "Real estate investment returns depend on appreciation rents and the mortgage rate spread.",
            "A second property would concentrate the portfolio instead of diversifying the asset mix.",
        ],
        "emotions": ["Part of me is thrilled and part of me is nervous about it."],
    },
}

_THEME_ORDER = list(THEMES)


@dataclass(frozen=True, slots=True)
class SynthUser:
    name: str
    age: int
    monthly_income: float
    income_sentence: str
    age_sentence: str
    n_posts: int
    eligible: bool


def _ts(rng: random.Random, year: int) -> int:
    start = int(datetime(year, 1, 10, tzinfo=timezone.utc).timestamp())
    end = int(datetime(year, 12, 20, tzinfo=timezone.utc).timestamp())
    return rng.randrange(start, end)


def generate_records(seed: int = 7, posts_per_user: int = 20, n_eligible_users: int = 8) -> list[str]:
    """Return raw dump lines (valid posts, two malformed lines, one duplicate)."""
    rng = random.Random(seed)
    subreddits = ["personalfinance", "FinancialPlanning", "investing", "EstatePlanning"]

    users: list[SynthUser] = []
    ages = [19, 24, 27, 33, 38, 45, 52, 64]
    incomes = [
        (2800.0, "I make $2,800 a month at the warehouse."),
        (4200.0, "My salary is $4,200 a month right now."),
        (65000.0 / 12, "I'm making $65k/yr before taxes."),
        (30 * 40 * 52 / 12.0, "I earn $30/hr at the clinic full time."),
        (7500.0, "Take home is about $7,500 per month."),
        (110000.0 / 12, "Base pay is $110k a year plus bonus."),
        (9800.0, "I bring in $9,800 a month from the practice."),
        (260000.0 / 12, "Household income is $260k per year combined."),
    ]
    for i in range(n_eligible_users):
        age = ages[i % len(ages)]
        monthly, sentence = incomes[i % len(incomes)]
        users.append(
            SynthUser(
                name=f"user{i:02d}",
                age=age,
                monthly_income=monthly,
                income_sentence=sentence,
                age_sentence=f"I'm {age} and figuring this out as I go.",
                n_posts=posts_per_user,
                eligible=True,
            )
        )
    # age but never income: all posts excluded by the eligibility flag
    users.append(
        SynthUser(
            name="user_noincome",
            age=29,
            monthly_income=0.0,
            income_sentence="",
            age_sentence="I'm 29 and never talk about pay.",
            n_posts=max(0, posts_per_user // 2),
            eligible=False,
        )
    )
    # too few posts even though age and income appear
    users.append(
        SynthUser(
            name="user_fewposts",
            age=41,
            monthly_income=5100.0,
            income_sentence="My salary is $5,100 a month after the raise.",
            age_sentence="I'm 41 years old and late to saving.",
            n_posts=max(0, posts_per_user // 2),
            eligible=False,
        )
    )
    # enough posts and both mentions, but half the posts are too short
    users.append(
        SynthUser(
            name="user_short",
            age=35,
            monthly_income=6100.0,
            income_sentence="I make $6,100 a month as a contractor.",
            age_sentence="I'm 35 by the way.",
            n_posts=posts_per_user,
            eligible=True,
        )
    )

    lines: list[str] = []
    post_counter = 0
    first_record: dict | None = None
    for user_index, user in enumerate(users):
        for p in range(user.n_posts):
            post_counter += 1
            theme_name = _THEME_ORDER[(user_index + p) % len(_THEME_ORDER)]
            theme = THEMES[theme_name]
            year = 2020 + (p % 4)
            rng_questions = rng.sample(theme["questions"], k=1 + (p % 2))
            body_parts = list(rng_questions)
            body_parts.append(rng.choice(theme["fillers"]))
            body_parts.append(rng.choice(theme["fillers"]))
            if p % 3 == 0:
                body_parts.append(rng.choice(theme["emotions"]))
            if p == 2:
                body_parts.append(user.age_sentence)
                if user.income_sentence:
                    body_parts.append(user.income_sentence)
            if p == 7 and user.income_sentence:
                # second income mention in a later year exercises the min rule
                body_parts.append(user.income_sentence)
            body = " ".join(body_parts)
            if user.name == "user_short" and p % 2 == 1:
                body = "Quick question about money today folks."
            record = {
                "id": f"p{post_counter:05d}",
                "author": user.name,
                "created_utc": _ts(rng, year),
                "subreddit": rng.choice(subreddits),
                "title": rng_questions[0],
                "selftext": body,
            }
            if first_record is None:
                first_record = record
            lines.append(json.dumps(record, sort_keys=True, ensure_ascii=False))

    # two malformed lines and one duplicate id: exercised by the rejects report
    lines.insert(5, "{this is not json")
    lines.insert(11, json.dumps({"id": "missing_fields", "author": "ghost"}, sort_keys=True))
    assert first_record is not None
    lines.append(json.dumps(first_record, sort_keys=True, ensure_ascii=False))
    return lines


def write_corpus(path: str | Path, seed: int = 7, posts_per_user: int = 20, n_eligible_users: int = 8) -> int:
    lines = generate_records(seed=seed, posts_per_user=posts_per_user, n_eligible_users=n_eligible_users)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return len(lines)
