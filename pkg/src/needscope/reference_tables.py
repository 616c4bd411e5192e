"""Shipped golden fixtures of the published result tables, with cross-checks.

The source corpus is private, so these tables are the reference points the
analytics layer is validated against: loading them must reconcile exactly
(needs totals, per-level stress-row sums against the level counts), and the
publication's own internal inconsistencies are surfaced as notes rather than
silently corrected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .analytics import (
    AgeGroupRow,
    AgeGroupTable,
    IncomeBinRow,
    IncomeBinTable,
    LevelIncomeRow,
    LevelIncomeTable,
)
from .extraction.types import NhfLevel5, NpfLevel, RiskLevel, StressLevel

STRESS_ORDER = [level.value for level in StressLevel]
RISK_ORDER = [RiskLevel.CAUTIOUS.value, RiskLevel.CALCULATIVE.value, RiskLevel.CHANCE_TAKING.value]


@dataclass(slots=True)
class ReferenceTables:
    age_table: AgeGroupTable
    level_income: LevelIncomeTable
    stress_risk: IncomeBinTable
    correlations_reference: dict
    npf_text_totals: dict[str, int]
    reported_totals: dict[str, int]


def _bin_row(raw: dict) -> IncomeBinRow:
    stress = dict(zip(STRESS_ORDER, raw["stress"]))
    risk = dict(zip(RISK_ORDER, raw["risk"]))
    return IncomeBinRow(
        stress=stress,
        risk=risk,
        n_unassigned_risk=sum(stress.values()) - sum(risk.values()),
        n_needs=sum(stress.values()),
    )


def load_reference_tables() -> ReferenceTables:
    raw = json.loads(
        resources.files("needscope.data").joinpath("reference_tables.json").read_text(encoding="utf-8")
    )
    age_rows = {
        category: AgeGroupRow(
            n_users=row["n_users"],
            avg_monthly_income=row["avg_monthly_income"],
            n_posts=row["n_posts"],
            n_needs=row["n_needs"],
        )
        for category, row in raw["age_table"].items()
    }
    level_income = LevelIncomeTable(
        nhf5={
            NhfLevel5(level): LevelIncomeRow(row["mean_income"], row["n_needs"])
            for level, row in raw["level_income"]["nhf5"].items()
        },
        npf={
            NpfLevel(level): LevelIncomeRow(row["mean_income"], row["n_needs"])
            for level, row in raw["level_income"]["npf"].items()
        },
    )
    stress_risk = IncomeBinTable(
        rows={label: _bin_row(row) for label, row in raw["stress_risk"]["income"].items()},
        nhf_rows={label: _bin_row(row) for label, row in raw["stress_risk"]["nhf5"].items()},
        npf_rows={label: _bin_row(row) for label, row in raw["stress_risk"]["npf"].items()},
    )
    return ReferenceTables(
        age_table=AgeGroupTable(rows=age_rows),
        level_income=level_income,
        stress_risk=stress_risk,
        correlations_reference=raw["correlations_reference"],
        npf_text_totals={k: int(v) for k, v in raw["npf_text_totals"].items()},
        reported_totals={k: int(v) for k, v in raw["reported_totals"].items()},
    )


def write_reference_analytics(out_dir) -> None:
    """Render the shipped fixture in the analytics-artifact layout.

    The resulting directory feeds the normal report stage, so the published
    tables can be browsed through the same CSV/summary bundle as a real run.
    Artifacts with no published full matrix (topic maps, co-occurrence) are
    emitted empty.
    """
    from pathlib import Path

    from .jsonl import write_json

    tables = load_reference_tables()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    write_json(
        out / "age_table.json",
        {
            category: {
                "n_users": row.n_users,
                "avg_monthly_income": row.avg_monthly_income,
                "n_posts": row.n_posts,
                "n_needs": row.n_needs,
            }
            for category, row in tables.age_table.rows.items()
        },
    )
    write_json(
        out / "level_income.json",
        {
            "nhf5": {
                level.value: {"mean_income": row.mean_income, "n_needs": row.n_needs}
                for level, row in tables.level_income.nhf5.items()
            },
            "npf": {
                level.value: {"mean_income": row.mean_income, "n_needs": row.n_needs}
                for level, row in tables.level_income.npf.items()
            },
        },
    )
    from .analytics import hypothesis_checks

    write_json(out / "hypothesis.json", hypothesis_checks(tables.level_income))
    write_json(out / "topic_level_map.json", {"nhf5": {}, "npf": {}})
    for key in ("topic", "nhf5", "npf"):
        write_json(out / f"cooccurrence_{key}.json", {"labels": [], "counts": [], "unit": "", "edges": []})
    write_json(out / "cooccurrence_cross.json", {"nhf_labels": [], "npf_labels": [], "counts": []})
    write_json(
        out / "correlations.json",
        {
            "stress_columns": STRESS_ORDER,
            "risk_columns": RISK_ORDER,
            "rows": {
                level: {
                    **dict(zip(STRESS_ORDER, ref["stress"])),
                    **dict(zip(RISK_ORDER, ref["risk"])),
                }
                for framework in ("nhf5", "npf")
                for level, ref in tables.correlations_reference[framework].items()
            },
        },
    )

    def bin_rows(rows: dict) -> dict:
        return {
            label: {
                "stress": row.stress,
                "risk": row.risk,
                "n_unassigned_risk": row.n_unassigned_risk,
                "n_needs": row.n_needs,
            }
            for label, row in rows.items()
        }

    write_json(
        out / "income_bins.json",
        {
            "income": bin_rows(tables.stress_risk.rows),
            "nhf5": bin_rows(tables.stress_risk.nhf_rows),
            "npf": bin_rows(tables.stress_risk.npf_rows),
        },
    )
    write_json(out / "reconciliation.json", reconcile_reference_tables(tables))


def reconcile_reference_tables(tables: ReferenceTables | None = None) -> list[dict]:
    """Cross-table sum checks; returns one entry per check.

    Entries with kind="check" must all have ok=True; kind="note" entries
    record the publication's own internal discrepancies (e.g. the narrative
    NPF totals differing from its table) without correcting either side.
    """
    if tables is None:
        tables = load_reference_tables()
    checks: list[dict] = []

    def check(name: str, expected, actual) -> None:
        checks.append(
            {"kind": "check", "name": name, "expected": expected, "actual": actual, "ok": expected == actual}
        )

    totals = tables.reported_totals
    check("age-table needs sum to the reported need total", totals["total_needs"], tables.age_table.total_needs())
    check("age-table users sum to the reported user total", totals["eligible_users"], tables.age_table.total_users())
    check("age-table posts sum to the reported post total", totals["eligible_posts"], tables.age_table.total_posts())
    check("NHF level counts sum to the reported need total", totals["total_needs"], tables.level_income.total_needs_nhf())
    check("NPF level counts sum to the reported need total", totals["total_needs"], tables.level_income.total_needs_npf())

    for level in NhfLevel5:
        row = tables.stress_risk.nhf_rows[level.value]
        check(
            f"NHF stress row '{level.value}' sums to its level count",
            tables.level_income.nhf5[level].n_needs,
            sum(row.stress.values()),
        )
    for level in NpfLevel:
        row = tables.stress_risk.npf_rows[level.value]
        check(
            f"NPF stress row '{level.value}' sums to its level count",
            tables.level_income.npf[level].n_needs,
            sum(row.stress.values()),
        )

    for level, text_total in tables.npf_text_totals.items():
        table_total = tables.level_income.npf[NpfLevel(level)].n_needs
        if text_total != table_total:
            checks.append(
                {
                    "kind": "note",
                    "name": f"publication narrative total for '{level}' differs from its table",
                    "expected": table_total,
                    "actual": text_total,
                    "ok": None,
                    "delta": table_total - text_total,
                }
            )
    return checks
