"""Render the analytics artifacts into the report bundle.

Writes CSV tables, co-occurrence edge lists, the reconciliation report in
markdown, and a human-readable summary. Missing analytics artifacts raise a
DependencyError naming the stage to run; optional sibling artifacts (corpus
stats, topic selection, emotions) enrich the summary when present.
"""

from __future__ import annotations

import csv
import logging
from collections import Counter
from pathlib import Path

from .errors import DependencyError
from .extraction.types import EMOTIONS, NhfLevel5, NpfLevel, RiskLevel, StressLevel
from .jsonl import read_json, read_records, write_json

log = logging.getLogger(__name__)

DISPLAY_NHF5 = {
    "basic": "Basic Needs",
    "safety": "Safety Needs",
    "love_belongingness": "Love & Belongingness",
    "esteem": "Esteem Needs",
    "self_actualization": "Self-Actualization",
}
DISPLAY_NPF = {
    "consumption_immediate": "Consumption For Immediate Needs",
    "savings_emergencies": "Savings For Emergencies",
    "retirement_wealth_lifestyle": "Retirement Savings, Wealth and Lifestyle Improvement",
}
DISPLAY_STRESS = {
    "low": "Low stress",
    "slight": "Slightly stressed",
    "moderate": "Moderately stressed",
    "high": "Highly stressed",
}
DISPLAY_RISK = {
    "cautious": "Cautious",
    "calculative": "Calculative",
    "chance_taking": "Chance taking",
}


def _money(value: float | None) -> str:
    return "" if value is None else f"{value:.2f}"


def _load(analytics_dir: Path, name: str) -> dict | list:
    path = analytics_dir / name
    if not path.exists():
        raise DependencyError(f"missing analytics artifact {name!r}; run the 'analyze' stage first", stage="analyze")
    return read_json(path)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def emit_report(analytics_dir: Path, report_dir: Path) -> dict:
    analytics_dir = Path(analytics_dir)
    report_dir = Path(report_dir)
    report_dir.mkdir(parents=True, exist_ok=True)

    age_table = _load(analytics_dir, "age_table.json")
    level_income = _load(analytics_dir, "level_income.json")
    hypothesis = _load(analytics_dir, "hypothesis.json")
    topic_map = _load(analytics_dir, "topic_level_map.json")
    correlations = _load(analytics_dir, "correlations.json")
    income_bins = _load(analytics_dir, "income_bins.json")
    reconciliation = _load(analytics_dir, "reconciliation.json")

    _write_csv(
        report_dir / "age_table.csv",
        ["age", "n_users", "avg_monthly_income", "n_posts", "n_needs"],
        [
            [cat, row["n_users"], _money(row["avg_monthly_income"]), row["n_posts"], row["n_needs"]]
            for cat, row in age_table.items()
        ],
    )

    for framework, display, order in (
        ("nhf5", DISPLAY_NHF5, [level.value for level in NhfLevel5]),
        ("npf", DISPLAY_NPF, [level.value for level in NpfLevel]),
    ):
        _write_csv(
            report_dir / f"level_income_{framework}.csv",
            ["level", "mean_monthly_income", "n_needs"],
            [
                [display[level], _money(level_income[framework][level]["mean_income"]),
                 level_income[framework][level]["n_needs"]]
                for level in order
            ],
        )

        rows = topic_map[framework]
        columns = list(next(iter(rows.values())).keys()) if rows else []
        _write_csv(
            report_dir / f"topic_level_{framework}.csv",
            ["level", *columns],
            [[display.get(level, level), *[cells[c] for c in columns]] for level, cells in rows.items()],
        )

    for key in ("topic", "nhf5", "npf"):
        matrix = _load(analytics_dir, f"cooccurrence_{key}.json")
        _write_csv(
            report_dir / f"cooccurrence_{key}_edges.csv",
            ["source", "target", "weight"],
            [[e["source"], e["target"], e["weight"]] for e in matrix["edges"]],
        )
    cross = _load(analytics_dir, "cooccurrence_cross.json")
    _write_csv(
        report_dir / "cross_framework.csv",
        ["nhf5_level", *[DISPLAY_NPF[l] for l in cross["npf_labels"]]],
        [
            [DISPLAY_NHF5[nhf], *row]
            for nhf, row in zip(cross["nhf_labels"], cross["counts"])
        ],
    )

    stress_cols = [level.value for level in StressLevel]
    risk_cols = [r.value for r in (RiskLevel.CAUTIOUS, RiskLevel.CALCULATIVE, RiskLevel.CHANCE_TAKING)]
    _write_csv(
        report_dir / "correlations.csv",
        ["level", *[DISPLAY_STRESS[c] for c in stress_cols], *[DISPLAY_RISK[c] for c in risk_cols]],
        [
            [
                DISPLAY_NHF5.get(level) or DISPLAY_NPF.get(level, level),
                *[("" if row[c] is None else f"{row[c]:.4f}") for c in stress_cols + risk_cols],
            ]
            for level, row in correlations["rows"].items()
        ],
    )

    bin_rows = []
    for section, labels in (("income", None), ("nhf5", DISPLAY_NHF5), ("npf", DISPLAY_NPF)):
        for label, row in income_bins[section].items():
            display = labels[label] if labels else label
            bin_rows.append(
                [
                    section,
                    display,
                    *[row["stress"][c] for c in stress_cols],
                    *[row["risk"][c] for c in risk_cols],
                    row["n_unassigned_risk"],
                    row["n_needs"],
                ]
            )
    _write_csv(
        report_dir / "income_bins.csv",
        ["section", "category", *[DISPLAY_STRESS[c] for c in stress_cols],
         *[DISPLAY_RISK[c] for c in risk_cols], "unassigned_risk", "n_needs"],
        bin_rows,
    )

    recon_lines = ["# Reconciliation report", ""]
    for check in reconciliation:
        mark = "NOTE" if check["ok"] is None else ("OK" if check["ok"] else "FAIL")
        recon_lines.append(f"- [{mark}] {check['name']}: expected {check['expected']}, got {check['actual']}")
    (report_dir / "reconciliation.md").write_text("\n".join(recon_lines) + "\n", encoding="utf-8")

    write_json(report_dir / "hypothesis_flags.json", hypothesis)

    summary = _summary_lines(analytics_dir, age_table, level_income, hypothesis, income_bins)
    (report_dir / "summary.md").write_text("\n".join(summary) + "\n", encoding="utf-8")

    n_failed = sum(1 for check in reconciliation if check["ok"] is False)
    if not age_table:
        log.warning("report: no needs in input; tables are empty")
    return {"tables": 12, "reconciliation_failures": n_failed}


def _summary_lines(analytics_dir, age_table, level_income, hypothesis, income_bins) -> list[str]:
    lines = ["# Financial needs pipeline summary", ""]

    stats_path = analytics_dir.parent / "corpus_stats.json"
    if stats_path.exists():
        stats = read_json(stats_path)
        lines.append(
            f"Corpus: {stats['eligible_posts']} eligible posts from {stats['eligible_users']} users "
            f"(of {stats['total_posts']} posts / {stats['total_users']} users; "
            f"{stats['posts_per_user_mean']:.2f} posts per eligible user)."
        )
    total_needs = sum(row["n_needs"] for row in age_table.values())
    lines.append(f"Extracted needs: {total_needs}.")
    lines.append("")

    selection_path = analytics_dir.parent / "topic_selection.json"
    if selection_path.exists():
        selection = read_json(selection_path)
        if selection.get("chosen_k"):
            w_by_k = ", ".join(f"k={k}: {w}" for k, w in sorted(selection["w_by_k"].items(), key=lambda kv: int(kv[0])))
            lines.append(f"Topic count selected: k={selection['chosen_k']} (negative-skew counts {w_by_k}).")
            lines.append("")

    def ordering_sentence(framework: str, display: dict) -> str:
        rows = level_income[framework]
        means = [(display[level], rows[level]["mean_income"]) for level in rows if rows[level]["mean_income"] is not None]
        return "; ".join(f"{name}: {_money(value)}" for name, value in means)

    h1, h2 = hypothesis["h1"], hypothesis["h2"]
    lines.append("## Income ordering across hierarchy levels")
    lines.append(f"- NHF-5 mean incomes: {ordering_sentence('nhf5', DISPLAY_NHF5)}")
    if h1["monotone"]:
        lines.append("- H1 pattern: mean income increases monotonically across NHF-5 levels.")
    elif h1["dips"]:
        dips = ", ".join(DISPLAY_NHF5.get(d, d) for d in h1["dips"])
        lines.append(f"- H1 pattern: supported except for a dip at {dips}.")
    else:
        lines.append("- H1 pattern: not monotone (ties present).")
    lines.append(f"- NPF mean incomes: {ordering_sentence('npf', DISPLAY_NPF)}")
    if h2["monotone"]:
        lines.append(
            "- H2 pattern: mean income increases monotonically across NPF levels "
            "(consumption < emergencies < retirement)."
        )
    elif h2["dips"]:
        dips = ", ".join(DISPLAY_NPF.get(d, d) for d in h2["dips"])
        lines.append(f"- H2 pattern: supported except for a dip at {dips}.")
    else:
        lines.append("- H2 pattern: not monotone (ties present).")
    lines.append("")

    stress_totals: Counter[str] = Counter()
    risk_totals: Counter[str] = Counter()
    unassigned = 0
    for row in income_bins["income"].values():
        stress_totals.update(row["stress"])
        risk_totals.update(row["risk"])
        unassigned += row["n_unassigned_risk"]
    n = sum(stress_totals.values())
    if n:
        lines.append("## Behavioral attributes")
        shares = ", ".join(
            f"{DISPLAY_STRESS[level.value]} {100 * stress_totals[level.value] / n:.2f}%"
            for level in StressLevel
        )
        lines.append(f"- Stress distribution: {shares}.")
        risk_n = sum(risk_totals.values()) + unassigned
        shares = ", ".join(
            f"{DISPLAY_RISK[label]} {100 * risk_totals[label] / risk_n:.2f}%" for label in risk_totals
        )
        lines.append(f"- Risk distribution: {shares}, unassigned {100 * unassigned / risk_n:.2f}%.")

    emotions_path = analytics_dir.parent / "emotions.jsonl"
    if emotions_path.exists():
        dominant: Counter[str] = Counter()
        for record in read_records(emotions_path):
            if record.get("dominant"):
                dominant[record["dominant"]] += 1
        total = sum(dominant.values())
        if total:
            shares = ", ".join(
                f"{emotion} {100 * dominant[emotion] / total:.2f}%"
                for emotion in EMOTIONS
                if dominant[emotion]
            )
            lines.append(f"- Dominant post emotions: {shares}.")
    return lines
