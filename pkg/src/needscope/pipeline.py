"""End-to-end pipeline: staged execution over persisted artifacts.

Each stage reads only prior-stage artifacts and writes byte-deterministic
outputs, so any stage can be re-run standalone and a full re-run with the
same config (and a warm cache for the LLM engine) reproduces identical
content hashes. The manifest records the config snapshot, per-stage timings
and output hashes, and is written incrementally so a failed run can resume
from the last completed stage.
"""

from __future__ import annotations

import hashlib
import logging
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import yaml

from . import __version__
from .attribution import UserProfile, build_profile, detect_mentions
from .corpus import Post, RejectReport, filter_corpus, parse_dump, serialize_post
from .errors import ConfigError, DependencyError, IngestError, StageError
from .extraction import (
    EngineConfig,
    ExtractionEngine,
    LlmClient,
    LlmEngine,
    NeedRecord,
    ResponseCache,
    RuleEngine,
    extract_corpus,
)
from .jsonl import read_json, read_records, write_json, write_records
from .topics import gibbs_train, load_model, save_model, select_k
from .topics.gibbs import dominant_topic_assignment, infer_distributions
from .topics.select import chain_seed, default_alpha
from .topics.skew import SkewReport
from .topics.tokenize import need_text, tokenize

log = logging.getLogger(__name__)

STAGES = ("ingest", "attribute", "filter", "extract", "topics", "analyze", "report")

ARTIFACTS = {
    "corpus": "corpus.jsonl",
    "rejects": "rejects.jsonl",
    "profiles": "profiles.jsonl",
    "filtered": "filtered_posts.jsonl",
    "stats": "corpus_stats.json",
    "needs": "needs.jsonl",
    "emotions": "emotions.jsonl",
    "model": "model.npz",
    "selection": "topic_selection.json",
    "analytics": "analytics",
    "report": "report",
    "manifest": "manifest.json",
}


def _parse_date(value: str) -> datetime:
    try:
        return datetime.strptime(value, "%Y-%m-%d").replace(tzinfo=timezone.utc)
    except ValueError as exc:
        raise ConfigError(f"invalid date {value!r} (expected YYYY-MM-DD)") from exc


@dataclass(slots=True)
class PipelineConfig:
    inputs: list[str] = field(default_factory=list)
    window_start: str = "2020-01-01"
    window_end: str = "2023-12-31"
    min_posts: int = 15
    min_words: int = 20
    engine: str = "rule"
    base_url: str = ""
    model: str = "llama3-70b"
    max_concurrency: int = 4
    max_attempts: int = 4
    requests_per_second: float = 4.0
    cache_dir: str | None = None
    k_min: int = 2
    k_max: int = 8
    epsilon: float = 0.01
    patience: int = 2
    alpha: float | None = None
    beta: float = 0.01
    iterations: int = 200
    average_last: int = 0
    seed: int = 7
    out_dir: str = "out"
    topic_labels: dict[int, str] = field(default_factory=dict)

    def validate(self) -> None:
        if not self.inputs:
            raise ConfigError("at least one input path is required")
        if self.min_posts < 1 or self.min_words < 1:
            raise ConfigError("filter thresholds must be positive")
        if self.k_min < 2:
            raise ConfigError(f"k_min must be >= 2, got {self.k_min}")
        if self.k_min >= self.k_max:
            raise ConfigError(f"k_min must be < k_max, got [{self.k_min}, {self.k_max}]")
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1")
        if self.epsilon < 0 or self.patience < 1:
            raise ConfigError("epsilon must be >= 0 and patience >= 1")
        if self.engine not in ("rule", "llm"):
            raise ConfigError(f"unknown engine {self.engine!r}")
        if self.engine == "llm" and not self.base_url:
            raise ConfigError("llm engine requires base_url")
        if _parse_date(self.window_start) >= _parse_date(self.window_end):
            raise ConfigError("window start must be before window end")

    @property
    def window_seconds(self) -> tuple[int, int]:
        start = int(_parse_date(self.window_start).timestamp())
        end = int(_parse_date(self.window_end).timestamp()) + 86399
        return start, end

    def as_dict(self) -> dict:
        data = asdict(self)
        data["topic_labels"] = {str(k): v for k, v in self.topic_labels.items()}
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        if "topic_labels" in data:
            data = dict(data)
            data["topic_labels"] = {int(k): str(v) for k, v in (data["topic_labels"] or {}).items()}
        return cls(**data)

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        try:
            raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"config file {path} is not valid YAML: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"config file {path} must contain a mapping")
        return cls.from_dict(raw)


def build_engine(config: PipelineConfig) -> ExtractionEngine:
    if config.engine == "rule":
        return RuleEngine()
    cache = ResponseCache(config.cache_dir) if config.cache_dir else None
    client = LlmClient(
        EngineConfig(
            base_url=config.base_url,
            model=config.model,
            max_attempts=config.max_attempts,
            max_concurrency=config.max_concurrency,
            requests_per_second=config.requests_per_second,
        ),
        cache=cache,
    )
    return LlmEngine(client)


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _hash_outputs(out_dir: Path, paths: list[Path]) -> dict[str, str]:
    hashes = {}
    for path in paths:
        if path.is_dir():
            for child in sorted(path.rglob("*")):
                if child.is_file():
                    hashes[str(child.relative_to(out_dir))] = sha256_file(child)
        elif path.exists():
            hashes[str(path.relative_to(out_dir))] = sha256_file(path)
    return hashes


def _require(path: Path, stage: str) -> Path:
    if not path.exists():
        raise DependencyError(f"missing artifact {path.name!r}; run the '{stage}' stage first", stage=stage)
    return path


# --------------------------------------------------------------------------
# stage implementations
# --------------------------------------------------------------------------


def stage_ingest(inputs: list[str | Path], window: tuple[int, int], corpus_path: Path, rejects_path: Path) -> dict:
    rejects = RejectReport([])
    seen: set[str] = set()
    posts: list[Post] = []
    outside_window = 0
    start, end = window
    for input_path in inputs:
        input_path = Path(input_path)
        if not input_path.exists():
            raise IngestError(f"input file not found: {input_path}")
        with input_path.open("r", encoding="utf-8") as fh:
            shard_rejects = RejectReport([])
            for post in parse_dump(fh, rejects=shard_rejects, seen_ids=seen):
                if start <= post.created_at <= end:
                    posts.append(post)
                else:
                    outside_window += 1
            for entry in shard_rejects.rejects:
                entry["input"] = str(input_path)
            rejects.rejects.extend(shard_rejects.rejects)
    write_records(corpus_path, (serialize_post(p) for p in posts))
    write_records(rejects_path, rejects.rejects)
    log.info(
        "ingest: %d posts kept, %d lines rejected, %d outside window",
        len(posts), len(rejects), outside_window,
    )
    return {"posts": len(posts), "rejected": len(rejects), "outside_window": outside_window}


def _read_corpus(path: Path) -> list[Post]:
    posts = list(parse_dump(line for line in Path(path).open("r", encoding="utf-8")))
    return posts


def stage_attribute(corpus_path: Path, engine: ExtractionEngine, profiles_path: Path) -> dict:
    posts = _read_corpus(_require(corpus_path, "ingest"))
    by_user: dict[str, list[Post]] = {}
    for post in posts:
        by_user.setdefault(post.author, []).append(post)

    profiles: list[UserProfile] = []
    for user in sorted(by_user):
        age_mentions = []
        income_mentions = []
        for post in by_user[user]:
            ages, incomes = detect_mentions(post, engine)
            age_mentions.extend(ages)
            income_mentions.extend(incomes)
        profile = build_profile(user, age_mentions, income_mentions, {p.year for p in by_user[user]})
        if profile.has_age_and_income:
            profiles.append(profile)
    write_records(profiles_path, (p.as_dict() for p in profiles))
    log.info("attribute: %d/%d users resolved", len(profiles), len(by_user))
    return {"users": len(by_user), "profiled": len(profiles)}


def load_profiles(path: Path) -> dict[str, UserProfile]:
    return {rec["user"]: UserProfile.from_dict(rec) for rec in read_records(path)}


def stage_filter(
    corpus_path: Path,
    profiles_path: Path,
    min_posts: int,
    min_words: int,
    filtered_path: Path,
    stats_path: Path,
) -> dict:
    posts = _read_corpus(_require(corpus_path, "ingest"))
    profiles = load_profiles(_require(profiles_path, "attribute"))
    flags = {user: profile.has_age_and_income for user, profile in profiles.items()}
    eligible, stats = filter_corpus(posts, flags, min_posts=min_posts, min_words=min_words)
    write_records(filtered_path, (serialize_post(p) for p in eligible))
    write_json(stats_path, stats.as_dict())
    log.info("filter: %d/%d posts eligible (%d users)", stats.eligible_posts, stats.total_posts, stats.eligible_users)
    return stats.as_dict()


def stage_extract(
    filtered_path: Path,
    profiles_path: Path,
    engine: ExtractionEngine,
    needs_path: Path,
    emotions_path: Path,
    max_workers: int = 1,
) -> dict:
    posts = _read_corpus(_require(filtered_path, "filter"))
    _require(profiles_path, "attribute")
    records, emotions = extract_corpus(posts, engine, max_workers=max_workers)
    write_records(needs_path, (r.as_dict() for r in records))
    write_records(
        emotions_path,
        (
            {"post_id": post_id, "scores": profile.scores, "dominant": profile.dominant}
            for post_id, profile in sorted(emotions.items())
        ),
    )
    log.info("extract: %d needs from %d posts", len(records), len(posts))
    return {"needs": len(records), "posts": len(posts)}


def load_needs(path: Path) -> list[NeedRecord]:
    return [NeedRecord.from_dict(rec) for rec in read_records(path)]


def _need_texts(needs: list[NeedRecord]) -> list[tuple[str, str]]:
    core_by_post: dict[str, str] = {}
    for need in needs:
        if need.need_id.endswith(":q0"):
            core_by_post[need.post_id] = need.query
    return [
        (need.need_id, need_text(need.label.purpose, need.label.process, core_by_post.get(need.post_id, need.query)))
        for need in needs
    ]


def stage_topics(
    needs_path: Path,
    model_path: Path,
    selection_path: Path,
    *,
    k_min: int,
    k_max: int,
    epsilon: float,
    patience: int,
    alpha: float | None,
    beta: float,
    iterations: int,
    average_last: int,
    seed: int,
) -> dict:
    needs = load_needs(_require(needs_path, "extract"))
    corpus = tokenize(_need_texts(needs)) if needs else None
    if corpus is None or len(corpus.needs) <= 3:
        reason = "no needs" if not needs else "too few modeled needs for selection"
        log.warning("topics: %s; writing empty selection", reason)
        write_json(selection_path, {"chosen_k": None, "excluded_need_ids": [], "w_by_k": {}, "reason": reason})
        if model_path.exists():
            model_path.unlink()
        return {"chosen_k": None, "modeled": 0}

    k_cap = min(k_max, len(corpus.needs) - 1) if len(corpus.needs) > k_min else k_max
    result = select_k(
        corpus,
        k_min,
        max(k_cap, k_min + 1),
        alpha=alpha,
        beta=beta,
        iterations=iterations,
        seed=seed,
        epsilon=epsilon,
        patience=patience,
        average_last=average_last,
    )
    chosen = result.chosen_k
    model = gibbs_train(
        corpus,
        k=chosen,
        alpha=alpha if alpha is not None else default_alpha(chosen),
        beta=beta,
        iterations=iterations,
        seed=chain_seed(seed, chosen),
        average_last=average_last,
    )
    save_model(model, model_path)
    write_json(
        selection_path,
        {
            "chosen_k": chosen,
            "visited": result.visited,
            "w_by_k": {str(k): w for k, w in result.w_by_k.items()},
            "stop_reason": result.stop_reason,
            "excluded_need_ids": sorted(corpus.excluded_need_ids),
            "skew_by_k": {str(k): report.as_dict() for k, report in result.reports.items()},
            "chosen_skew": SkewReport.from_model(model).as_dict(),
        },
    )
    log.info("topics: chose k=%d (%s) over %s", chosen, result.stop_reason, result.visited)
    return {"chosen_k": chosen, "modeled": len(corpus.needs), "excluded": len(corpus.excluded_need_ids)}


def stage_analyze(
    needs_path: Path,
    profiles_path: Path,
    filtered_path: Path,
    model_path: Path,
    selection_path: Path,
    out_dir: Path,
    topic_labels: dict[int, str] | None = None,
) -> dict:
    from . import analytics

    needs = load_needs(_require(needs_path, "extract"))
    profiles = load_profiles(_require(profiles_path, "attribute"))
    posts = _read_corpus(_require(filtered_path, "filter"))
    _require(selection_path, "topics")

    if model_path.exists():
        model = load_model(model_path)
        assignment = dominant_topic_assignment(infer_distributions(model))
        n_topics = model.k
    else:
        assignment = {}
        n_topics = 0

    out_dir.mkdir(parents=True, exist_ok=True)

    age_table = analytics.build_age_table(profiles, posts, needs)
    write_json(
        out_dir / "age_table.json",
        {
            category: {
                "n_users": row.n_users,
                "avg_monthly_income": row.avg_monthly_income,
                "n_posts": row.n_posts,
                "n_needs": row.n_needs,
            }
            for category, row in age_table.rows.items()
        },
    )

    level_income = analytics.build_level_income_table(needs, profiles)
    write_json(
        out_dir / "level_income.json",
        {
            "nhf5": {
                level.value: {"mean_income": row.mean_income, "n_needs": row.n_needs}
                for level, row in level_income.nhf5.items()
            },
            "npf": {
                level.value: {"mean_income": row.mean_income, "n_needs": row.n_needs}
                for level, row in level_income.npf.items()
            },
        },
    )
    write_json(out_dir / "hypothesis.json", analytics.hypothesis_checks(level_income))

    topic_map = analytics.map_topics_to_levels(needs, assignment, n_topics, topic_labels)
    write_json(out_dir / "topic_level_map.json", topic_map)

    matrices = {}
    for key in ("topic", "nhf5", "npf"):
        matrix = analytics.cooccurrence(needs, key, topic_assignment=assignment)
        matrices[key] = matrix
        write_json(
            out_dir / f"cooccurrence_{key}.json",
            {"labels": matrix.labels, "counts": matrix.counts, "unit": matrix.unit, "edges": matrix.edge_list()},
        )
    cross = analytics.cooccurrence(needs, "cross_framework")
    write_json(
        out_dir / "cooccurrence_cross.json",
        {"nhf_labels": cross.nhf_labels, "npf_labels": cross.npf_labels, "counts": cross.counts},
    )

    correlations = analytics.behavior_correlations(needs)
    write_json(
        out_dir / "correlations.json",
        {
            "stress_columns": correlations.stress_columns,
            "risk_columns": correlations.risk_columns,
            "rows": correlations.rows,
        },
    )

    bins = analytics.build_income_bin_table(needs, profiles)
    write_json(
        out_dir / "income_bins.json",
        {
            "income": {label: _bin_row_dict(row) for label, row in bins.rows.items()},
            "nhf5": {label: _bin_row_dict(row) for label, row in bins.nhf_rows.items()},
            "npf": {label: _bin_row_dict(row) for label, row in bins.npf_rows.items()},
        },
    )

    reconciliation = _run_reconciliation(needs, age_table, level_income, topic_map, bins, matrices)
    write_json(out_dir / "reconciliation.json", reconciliation)
    return {"needs": len(needs), "checks_failed": sum(1 for c in reconciliation if c["ok"] is False)}


def _bin_row_dict(row) -> dict:
    return {
        "stress": row.stress,
        "risk": row.risk,
        "n_unassigned_risk": row.n_unassigned_risk,
        "n_needs": row.n_needs,
    }


def _run_reconciliation(needs, age_table, level_income, topic_map, bins, matrices) -> list[dict]:
    """Conservation checks over this run's own outputs."""
    total = len(needs)
    checks = []

    def check(name: str, expected, actual) -> None:
        checks.append({"name": name, "expected": expected, "actual": actual, "ok": expected == actual})

    check("age-table needs total equals need-record count", total, age_table.total_needs())
    check("NHF-5 level counts total equals need-record count", total, level_income.total_needs_nhf())
    check("NPF level counts total equals need-record count", total, level_income.total_needs_npf())
    check(
        "topic map grand total equals need-record count (NHF-5)",
        total,
        sum(sum(row.values()) for row in topic_map["nhf5"].values()),
    )
    check(
        "income-bin totals equal need-record count",
        total,
        sum(row.n_needs for row in bins.rows.values()),
    )
    for key, matrix in matrices.items():
        symmetric = all(
            matrix.counts[i][j] == matrix.counts[j][i]
            for i in range(len(matrix.labels))
            for j in range(len(matrix.labels))
        )
        check(f"co-occurrence matrix '{key}' is symmetric", True, symmetric)
    return checks


def stage_report(analytics_dir: Path, report_dir: Path) -> dict:
    from .report import emit_report

    _require(analytics_dir, "analyze")
    return emit_report(analytics_dir, report_dir)


# --------------------------------------------------------------------------
# orchestration
# --------------------------------------------------------------------------


def _artifact_paths(out_dir: Path) -> dict[str, Path]:
    return {name: out_dir / rel for name, rel in ARTIFACTS.items()}


def run_pipeline(config: PipelineConfig, resume: bool = False) -> dict:
    """Execute all stages; returns the manifest."""
    config.validate()
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = _artifact_paths(out_dir)

    previous_stages: dict = {}
    if resume and paths["manifest"].exists():
        previous_stages = read_json(paths["manifest"]).get("stages", {})

    manifest: dict = {
        "tool_version": __version__,
        "created_at": datetime.now(timezone.utc).isoformat(),
        "config": config.as_dict(),
        "prompt_version": None,
        "stages": {},
    }

    engine: ExtractionEngine | None = None

    def get_engine() -> ExtractionEngine:
        nonlocal engine
        if engine is None:
            engine = build_engine(config)
            manifest["prompt_version"] = engine.version
        return engine

    stage_runs = {
        "ingest": lambda: (
            stage_ingest(list(config.inputs), config.window_seconds, paths["corpus"], paths["rejects"]),
            [paths["corpus"], paths["rejects"]],
        ),
        "attribute": lambda: (
            stage_attribute(paths["corpus"], get_engine(), paths["profiles"]),
            [paths["profiles"]],
        ),
        "filter": lambda: (
            stage_filter(
                paths["corpus"], paths["profiles"], config.min_posts, config.min_words,
                paths["filtered"], paths["stats"],
            ),
            [paths["filtered"], paths["stats"]],
        ),
        "extract": lambda: (
            stage_extract(
                paths["filtered"], paths["profiles"], get_engine(), paths["needs"], paths["emotions"],
                max_workers=config.max_concurrency if config.engine == "llm" else 1,
            ),
            [paths["needs"], paths["emotions"]],
        ),
        "topics": lambda: (
            stage_topics(
                paths["needs"], paths["model"], paths["selection"],
                k_min=config.k_min, k_max=config.k_max, epsilon=config.epsilon, patience=config.patience,
                alpha=config.alpha, beta=config.beta, iterations=config.iterations,
                average_last=config.average_last, seed=config.seed,
            ),
            [paths["model"], paths["selection"]],
        ),
        "analyze": lambda: (
            stage_analyze(
                paths["needs"], paths["profiles"], paths["filtered"], paths["model"],
                paths["selection"], paths["analytics"], config.topic_labels or None,
            ),
            [paths["analytics"]],
        ),
        "report": lambda: (
            stage_report(paths["analytics"], paths["report"]),
            [paths["report"]],
        ),
    }

    for stage in STAGES:
        if resume and _stage_verifies(previous_stages.get(stage), out_dir):
            manifest["stages"][stage] = {**previous_stages[stage], "skipped": True}
            log.info("stage %s: skipped (outputs verified)", stage)
            continue
        resume = False  # stop skipping at the first unverifiable stage
        start = time.perf_counter()
        try:
            summary, outputs = stage_runs[stage]()
        except Exception as exc:
            manifest["stages"][stage] = {
                "status": "failed",
                "seconds": round(time.perf_counter() - start, 3),
                "error": str(exc),
            }
            write_json(paths["manifest"], manifest)
            if isinstance(exc, (ConfigError, DependencyError, IngestError, OSError)):
                raise
            raise StageError(stage, exc) from exc
        manifest["stages"][stage] = {
            "status": "completed",
            "seconds": round(time.perf_counter() - start, 3),
            "summary": summary,
            "outputs": _hash_outputs(out_dir, outputs),
        }
        write_json(paths["manifest"], manifest)

    if engine is not None and isinstance(engine, LlmEngine):
        engine.client.close()
    return manifest


def _stage_verifies(entry: dict | None, out_dir: Path) -> bool:
    if not entry or entry.get("status") != "completed":
        return False
    for rel, expected in entry.get("outputs", {}).items():
        path = out_dir / rel
        if not path.exists() or sha256_file(path) != expected:
            return False
    return True
