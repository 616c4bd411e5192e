"""Pipeline orchestration, stage isolation, resume, and CLI surface."""

import json

import pytest

from needscope.cli import main
from needscope.errors import ConfigError, DependencyError
from needscope.jsonl import read_json
from needscope.pipeline import (
    PipelineConfig,
    run_pipeline,
    sha256_file,
    stage_analyze,
    stage_filter,
    stage_report,
)

from conftest import SYNTHETIC_CORPUS


def small_config(tmp_path, **overrides) -> PipelineConfig:
    base = dict(
        inputs=[str(SYNTHETIC_CORPUS)],
        out_dir=str(tmp_path / "out"),
        k_min=2,
        k_max=5,
        iterations=80,
        seed=7,
    )
    base.update(overrides)
    return PipelineConfig(**base)


# --- config validation ------------------------------------------------------


def test_k_min_one_rejected_before_any_work(tmp_path):
    config = small_config(tmp_path, k_min=1)
    with pytest.raises(ConfigError):
        run_pipeline(config)
    assert not (tmp_path / "out" / "corpus.jsonl").exists()


@pytest.mark.parametrize(
    "overrides",
    [
        {"min_posts": 0},
        {"min_words": -3},
        {"k_min": 5, "k_max": 5},
        {"window_start": "2023-12-31", "window_end": "2020-01-01"},
        {"engine": "telepathy"},
        {"engine": "llm", "base_url": ""},
        {"inputs": []},
    ],
)
def test_invalid_configs_rejected(tmp_path, overrides):
    with pytest.raises(ConfigError):
        small_config(tmp_path, **overrides).validate()


def test_config_file_round_trip(tmp_path):
    config = small_config(tmp_path)
    path = tmp_path / "config.yaml"
    path.write_text(json.dumps(config.as_dict()), encoding="utf-8")  # YAML is a JSON superset
    loaded = PipelineConfig.from_file(path)
    assert loaded == config


def test_unknown_config_key_rejected(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("inputs: [x]\nbanana: 1\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="banana"):
        PipelineConfig.from_file(path)


# --- full run + resume -----------------------------------------------------------


@pytest.fixture(scope="module")
def completed_run(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("run")
    config = small_config(tmp)
    manifest = run_pipeline(config)
    return config, manifest


def test_all_stages_complete(completed_run):
    _, manifest = completed_run
    assert [s for s, e in manifest["stages"].items() if e["status"] == "completed"] == [
        "ingest", "attribute", "filter", "extract", "topics", "analyze", "report",
    ]
    assert manifest["prompt_version"] == "rule-1"


def test_manifest_lists_output_hashes(completed_run):
    from pathlib import Path

    config, manifest = completed_run
    out = Path(config.out_dir)
    for stage, entry in manifest["stages"].items():
        assert entry["outputs"], stage
        for rel, digest in entry["outputs"].items():
            assert sha256_file(out / rel) == digest


def test_users_without_income_never_reach_downstream_artifacts(completed_run):
    from pathlib import Path

    from needscope.jsonl import read_records

    config, _ = completed_run
    out = Path(config.out_dir)
    profiled = {rec["user"] for rec in read_records(out / "profiles.jsonl")}
    assert "user_noincome" not in profiled
    need_users = {rec["user"] for rec in read_records(out / "needs.jsonl")}
    assert "user_noincome" not in need_users
    assert "user_fewposts" not in need_users  # below the post threshold
    assert "user_short" in need_users  # word filter trims posts, not the user


def test_stage_isolation_reproduces_deleted_artifacts(completed_run):
    import pathlib
    import shutil

    config, manifest = completed_run
    out = pathlib.Path(config.out_dir)
    before = manifest["stages"]["analyze"]["outputs"]
    shutil.rmtree(out / "analytics")
    stage_analyze(
        out / "needs.jsonl", out / "profiles.jsonl", out / "filtered_posts.jsonl",
        out / "model.npz", out / "topic_selection.json", out / "analytics", None,
    )
    after = {
        str(p.relative_to(out)): sha256_file(p) for p in sorted((out / "analytics").rglob("*")) if p.is_file()
    }
    assert after == before

    before = manifest["stages"]["report"]["outputs"]
    shutil.rmtree(out / "report")
    stage_report(out / "analytics", out / "report")
    after = {
        str(p.relative_to(out)): sha256_file(p) for p in sorted((out / "report").rglob("*")) if p.is_file()
    }
    assert after == before


def test_resume_skips_verified_stages(completed_run):
    config, _ = completed_run
    manifest = run_pipeline(config, resume=True)
    assert all(entry.get("skipped") for entry in manifest["stages"].values())


def test_resume_recomputes_from_first_tampered_stage(completed_run):
    import pathlib

    config, _ = completed_run
    out = pathlib.Path(config.out_dir)
    (out / "needs.jsonl").write_text(
        (out / "needs.jsonl").read_text(encoding="utf-8"), encoding="utf-8"
    )  # same bytes: still verifies
    (out / "topic_selection.json").write_text("{}", encoding="utf-8")  # tampered: must recompute
    manifest = run_pipeline(config, resume=True)
    assert manifest["stages"]["extract"].get("skipped")
    assert not manifest["stages"]["topics"].get("skipped")
    assert manifest["stages"]["topics"]["status"] == "completed"


def test_failed_stage_recorded_in_manifest_then_resumable(tmp_path):
    config = small_config(tmp_path, engine="llm", base_url="http://127.0.0.1:9", max_attempts=1)
    with pytest.raises(Exception):
        run_pipeline(config)
    manifest = read_json(tmp_path / "out" / "manifest.json")
    assert manifest["stages"]["ingest"]["status"] == "completed"
    assert manifest["stages"]["attribute"]["status"] == "failed"

    config.engine = "rule"
    manifest = run_pipeline(config, resume=True)
    assert manifest["stages"]["ingest"].get("skipped")
    assert manifest["stages"]["report"]["status"] == "completed"


def test_missing_upstream_artifact_names_the_stage(tmp_path):
    with pytest.raises(DependencyError) as excinfo:
        stage_filter(tmp_path / "corpus.jsonl", tmp_path / "profiles.jsonl", 15, 20,
                     tmp_path / "f.jsonl", tmp_path / "s.json")
    assert excinfo.value.stage == "ingest"


# --- empty corpus degrades gracefully -----------------------------------------------


def test_empty_needs_yield_empty_tables_and_success(tmp_path):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("", encoding="utf-8")
    config = small_config(tmp_path, inputs=[str(empty)])
    manifest = run_pipeline(config)
    assert manifest["stages"]["report"]["status"] == "completed"
    age_table = read_json(tmp_path / "out" / "analytics" / "age_table.json")
    assert age_table == {}
    selection = read_json(tmp_path / "out" / "topic_selection.json")
    assert selection["chosen_k"] is None


# --- CLI ------------------------------------------------------------------------------


def test_cli_stagewise_run_matches_subcommand_contracts(tmp_path):
    out = tmp_path
    assert main([
        "ingest", "--input", str(SYNTHETIC_CORPUS), "--window", "2020-01-01..2023-12-31",
        "--out", str(out / "corpus.jsonl"),
    ]) == 0
    assert (out / "corpus.jsonl.rejects.jsonl").exists()
    assert main([
        "attribute", "--corpus", str(out / "corpus.jsonl"), "--engine", "rule",
        "--out", str(out / "profiles.jsonl"),
    ]) == 0
    assert main([
        "extract", "--corpus", str(out / "corpus.jsonl"), "--profiles", str(out / "profiles.jsonl"),
        "--engine", "rule", "--out", str(out / "needs.jsonl"),
    ]) == 0
    assert (out / "filtered_posts.jsonl").exists()
    assert main([
        "topics", "--needs", str(out / "needs.jsonl"), "--k-min", "2", "--k-max", "5",
        "--iterations", "60", "--seed", "7", "--out", str(out / "model.npz"),
    ]) == 0
    assert main([
        "analyze", "--needs", str(out / "needs.jsonl"), "--profiles", str(out / "profiles.jsonl"),
        "--model", str(out / "model.npz"), "--out", str(out / "analytics"),
    ]) == 0
    assert main([
        "report", "--analytics", str(out / "analytics"), "--out", str(out / "report"),
    ]) == 0
    assert (out / "report" / "summary.md").exists()


def test_cli_exit_codes(tmp_path):
    # validation error -> 1
    assert main(["ingest", "--input", "x", "--window", "busted", "--out", str(tmp_path / "c.jsonl")]) == 1
    # missing input file -> 3
    assert main([
        "ingest", "--input", str(tmp_path / "nope.jsonl"), "--out", str(tmp_path / "c.jsonl"),
    ]) == 3
    # missing upstream artifact -> 2
    assert main([
        "report", "--analytics", str(tmp_path / "missing"), "--out", str(tmp_path / "r"),
    ]) == 2
    # bad config -> 1
    bad = tmp_path / "bad.yaml"
    bad.write_text(json.dumps({"inputs": ["x"], "k_min": 1}), encoding="utf-8")
    assert main(["run", "--config", str(bad)]) == 1


def test_cli_run_and_synth(tmp_path):
    corpus = tmp_path / "corpus.jsonl"
    assert main(["synth", "--out", str(corpus), "--seed", "7"]) == 0
    config = tmp_path / "config.yaml"
    config.write_text(
        json.dumps(
            {
                "inputs": [str(corpus)],
                "out_dir": str(tmp_path / "out"),
                "k_min": 2,
                "k_max": 4,
                "iterations": 50,
            }
        ),
        encoding="utf-8",
    )
    assert main(["run", "--config", str(config), "--seed", "3"]) == 0
    manifest = read_json(tmp_path / "out" / "manifest.json")
    assert manifest["config"]["seed"] == 3
    assert manifest["stages"]["report"]["status"] == "completed"
