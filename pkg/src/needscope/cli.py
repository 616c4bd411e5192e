"""Command-line interface.

Subcommands mirror the pipeline stages (`ingest`, `attribute`, `extract`,
`topics`, `analyze`, `report`) plus `run` for the whole pipeline and `synth`
for the bundled synthetic-corpus generator. Exit codes: 0 success,
1 validation error, 2 stage failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import ConfigError, DependencyError, IngestError, NeedscopeError
from .jsonl import read_json
from .pipeline import (
    PipelineConfig,
    build_engine,
    run_pipeline,
    stage_analyze,
    stage_attribute,
    stage_extract,
    stage_filter,
    stage_ingest,
    stage_report,
    stage_topics,
)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_STAGE = 2
EXIT_IO = 3


def _engine_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--engine", choices=["rule", "llm"], default="rule")
    parser.add_argument("--base-url", default="", help="chat-completions endpoint (llm engine)")
    parser.add_argument("--model", default="llama3-70b")
    parser.add_argument("--cache", default=None, help="LLM response cache directory")
    parser.add_argument("--max-concurrency", type=int, default=4)


def _engine_from_args(args: argparse.Namespace):
    config = PipelineConfig(
        inputs=["-"],
        engine=args.engine,
        base_url=getattr(args, "base_url", ""),
        model=getattr(args, "model", "llama3-70b"),
        cache_dir=getattr(args, "cache", None),
        max_concurrency=getattr(args, "max_concurrency", 4),
    )
    if config.engine == "llm" and not config.base_url:
        raise ConfigError("--engine llm requires --base-url")
    return build_engine(config)


def _parse_window(value: str) -> tuple[str, str]:
    if ".." not in value:
        raise ConfigError(f"window must look like 2020-01-01..2023-12-31, got {value!r}")
    start, end = value.split("..", 1)
    return start.strip(), end.strip()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="needscope", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse raw dumps into a windowed corpus")
    p.add_argument("--input", nargs="+", required=True)
    p.add_argument("--window", default="2020-01-01..2023-12-31")
    p.add_argument("--out", required=True, help="corpus file")
    p.add_argument("--rejects", default=None, help="rejects report path (default: <out>.rejects.jsonl)")

    p = sub.add_parser("attribute", help="detect and resolve age/income per user")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="profiles file")
    _engine_args(p)

    p = sub.add_parser("extract", help="filter eligibility and extract needs")
    p.add_argument("--corpus", required=True, help="raw corpus from ingest")
    p.add_argument("--profiles", required=True)
    p.add_argument("--out", required=True, help="needs file")
    p.add_argument("--min-posts", type=int, default=15)
    p.add_argument("--min-words", type=int, default=20)
    _engine_args(p)

    p = sub.add_parser("topics", help="fit LDA and select the topic count")
    p.add_argument("--needs", required=True)
    p.add_argument("--out", required=True, help="model file")
    p.add_argument("--k-min", type=int, default=2)
    p.add_argument("--k-max", type=int, default=20)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--patience", type=int, default=2)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--alpha", type=float, default=None, help="default: 50/k")
    p.add_argument("--beta", type=float, default=0.01)
    p.add_argument("--iterations", type=int, default=200)
    p.add_argument("--average-last", type=int, default=0)
    p.add_argument("--selection", default=None, help="selection report path (default: <out>.selection.json)")

    p = sub.add_parser("analyze", help="aggregate needs into report tables")
    p.add_argument("--needs", required=True)
    p.add_argument("--profiles", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True, help="analytics directory")
    p.add_argument("--posts", default=None, help="filtered corpus (default: sibling filtered_posts.jsonl)")
    p.add_argument("--selection", default=None, help="selection report (default: <model>.selection.json)")
    p.add_argument("--topic-labels", default=None, help="JSON file mapping topic index to a name")

    p = sub.add_parser("report", help="render the report bundle")
    p.add_argument("--analytics", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("run", help="run every stage")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="override the configured output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--engine", choices=["rule", "llm"], default=None)
    p.add_argument("--resume", action="store_true", help="skip stages whose outputs verify")

    p = sub.add_parser("synth", help="generate the bundled synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--posts-per-user", type=int, default=20)

    return parser


def _cmd_ingest(args) -> None:
    out = Path(args.out)
    rejects = Path(args.rejects) if args.rejects else out.with_suffix(out.suffix + ".rejects.jsonl")
    start, end = _parse_window(args.window)
    config = PipelineConfig(inputs=list(args.input), window_start=start, window_end=end)
    stage_ingest(list(args.input), config.window_seconds, out, rejects)


def _cmd_attribute(args) -> None:
    stage_attribute(Path(args.corpus), _engine_from_args(args), Path(args.out))


def _cmd_extract(args) -> None:
    out = Path(args.out)
    engine = _engine_from_args(args)
    filtered = out.parent / "filtered_posts.jsonl"
    stats = out.parent / "corpus_stats.json"
    stage_filter(Path(args.corpus), Path(args.profiles), args.min_posts, args.min_words, filtered, stats)
    stage_extract(
        filtered, Path(args.profiles), engine, out, out.parent / "emotions.jsonl",
        max_workers=args.max_concurrency if args.engine == "llm" else 1,
    )


def _cmd_topics(args) -> None:
    out = Path(args.out)
    selection = Path(args.selection) if args.selection else out.with_suffix(out.suffix + ".selection.json")
    stage_topics(
        Path(args.needs), out, selection,
        k_min=args.k_min, k_max=args.k_max, epsilon=args.epsilon, patience=args.patience,
        alpha=args.alpha, beta=args.beta, iterations=args.iterations,
        average_last=args.average_last, seed=args.seed,
    )


def _cmd_analyze(args) -> None:
    needs = Path(args.needs)
    model = Path(args.model)
    posts = Path(args.posts) if args.posts else needs.parent / "filtered_posts.jsonl"
    selection = Path(args.selection) if args.selection else model.with_suffix(model.suffix + ".selection.json")
    labels = None
    if args.topic_labels:
        labels = {int(k): str(v) for k, v in read_json(args.topic_labels).items()}
    stage_analyze(needs, Path(args.profiles), posts, model, selection, Path(args.out), labels)


def _cmd_report(args) -> None:
    stage_report(Path(args.analytics), Path(args.out))


def _cmd_run(args) -> None:
    config = PipelineConfig.from_file(args.config)
    if args.out:
        config.out_dir = args.out
    if args.seed is not None:
        config.seed = args.seed
    if args.engine:
        config.engine = args.engine
    run_pipeline(config, resume=args.resume)


def _cmd_synth(args) -> None:
    from .synth import write_corpus

    n = write_corpus(args.out, seed=args.seed, posts_per_user=args.posts_per_user)
    log.info("wrote %d lines to %s", n, args.out)


COMMANDS = {
    "ingest": _cmd_ingest,
    "attribute": _cmd_attribute,
    "extract": _cmd_extract,
    "topics": _cmd_topics,
    "analyze": _cmd_analyze,
    "report": _cmd_report,
    "run": _cmd_run,
    "synth": _cmd_synth,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        COMMANDS[args.command](args)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_VALIDATION
    except (IngestError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_IO
    except DependencyError as exc:
        log.error("%s", exc)
        return EXIT_STAGE
    except NeedscopeError as exc:
        log.error("%s", exc)
        return EXIT_STAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
