"""Command-line front end: build, query, summarize, info.

Exit codes are a stable contract: 0 success, 1 usage or config error,
2 data error, 3 provider error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .cluster import BudgetParams
from .config import EngineConfig, load_config
from .errors import ConfigError, EngineError, ProviderUnavailable
from .index import FORMAT_VERSION, build_index, load_index, save_index
from .ingest import corpus_stats, load_document, split_corpus
from .project import write_layout_csv
from .rag import QaRequest, answer, answer_to_json
from .summarize import summarize_document, write_report, write_wordcloud_csv

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_PROVIDER = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="repvec", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_build = sub.add_parser("build", help="chunk, embed and index text files")
    p_build.add_argument("inputs", nargs="+", help="UTF-8 plain-text files")
    p_build.add_argument("-o", "--out", required=True, help="index file to write")
    p_build.add_argument("-c", "--config", default=None, help="YAML config file")
    p_build.add_argument("--seed", type=int, default=None, help="override config seed")

    p_query = sub.add_parser("query", help="answer a question over an index")
    p_query.add_argument("index")
    p_query.add_argument("query")
    p_query.add_argument("-c", "--config", default=None)
    p_query.add_argument("--top-k", type=int, default=None)
    p_query.add_argument("--context-budget", type=int, default=None)

    p_sum = sub.add_parser("summarize", help="representative-vector summary artifacts")
    p_sum.add_argument("index")
    p_sum.add_argument("-c", "--config", default=None)
    p_sum.add_argument("--max-tokens", type=int, default=None, help="token budget T")
    p_sum.add_argument("--seed", type=int, default=None)
    p_sum.add_argument("--out-dir", default="rvs-summary")

    p_info = sub.add_parser("info", help="print index stats")
    p_info.add_argument("index")
    return parser


def _apply_seed(cfg: EngineConfig, seed: int | None) -> None:
    if seed is not None:
        cfg.seed = seed
        cfg.tsne = dataclasses.replace(cfg.tsne, seed=seed)


def cmd_build(args) -> int:
    cfg = load_config(args.config)
    _apply_seed(cfg, args.seed)
    docs = [load_document(p) for p in args.inputs]
    chunks = split_corpus(docs, cfg.chunking)
    n, s = corpus_stats(chunks)
    embedder = cfg.make_embed_provider()
    vectors = embedder.embed_batch([c.text for c in chunks])
    index = build_index(chunks, vectors, cfg.metric)
    save_index(index, args.out)
    print(f"indexed n={n} chunks, d={index.d}, s={s:.3f} mean tokens -> {args.out}")
    return EXIT_OK


def cmd_query(args) -> int:
    cfg = load_config(args.config)
    if args.top_k is not None and args.top_k < 1:
        raise UsageError("--top-k must be >= 1")
    if args.context_budget is not None and args.context_budget < 1:
        raise UsageError("--context-budget must be >= 1")
    index = load_index(args.index)
    req = QaRequest(
        query=args.query,
        top_k=args.top_k if args.top_k is not None else cfg.top_k,
        max_context_tokens=(
            args.context_budget if args.context_budget is not None else cfg.context_budget
        ),
    )
    qa = answer(index, req, cfg.make_embed_provider(), cfg.make_chat_provider())
    sys.stdout.write(answer_to_json(qa))
    return EXIT_OK


def cmd_summarize(args) -> int:
    cfg = load_config(args.config)
    _apply_seed(cfg, args.seed)
    if args.max_tokens is not None and args.max_tokens < 1:
        raise UsageError("--max-tokens must be >= 1")
    budget_tokens = args.max_tokens if args.max_tokens is not None else cfg.budget_tokens

    index = load_index(args.index)
    n, s = corpus_stats(index.chunks)
    outcome = summarize_document(
        index,
        BudgetParams(T=budget_tokens, s=s, n=n),
        chat_provider=cfg.make_chat_provider(),
        tsne_cfg=cfg.tsne,
        seed=cfg.seed,
        context_budget=cfg.reduce_budget,
    )

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_report(outcome.report, outcome.k, out_dir / "report.json", out_dir / "report.md")
    write_wordcloud_csv(outcome.report.word_cloud, out_dir / "word_cloud.csv")
    write_layout_csv(
        out_dir / "tsne_layout.csv",
        outcome.layout,
        chunk_ids=[c.chunk_id for c in index.chunks],
        cluster_ids=outcome.model.assignments,
        keywords_by_chunk=outcome.report.keyword_map,
    )
    print(f"k={outcome.k}")
    print(f"wrote report.json, report.md, word_cloud.csv, tsne_layout.csv -> {out_dir}")
    return EXIT_OK


def cmd_info(args) -> int:
    index = load_index(args.index)
    n, s = corpus_stats(index.chunks)
    print(f"n={n} d={index.d} s={s:.3f} metric={index.metric.value} version={FORMAT_VERSION}")
    return EXIT_OK


_COMMANDS = {
    "build": cmd_build,
    "query": cmd_query,
    "summarize": cmd_summarize,
    "info": cmd_info,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ProviderUnavailable as exc:
        print(f"provider error: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except EngineError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def console_main() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    console_main()
