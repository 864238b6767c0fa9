"""Command-line entry points: build-theme, rewrite, evaluate, tune.

Every subcommand is deterministic: identical inputs give byte-identical
outputs. Exit codes: 0 success, 2 usage errors / missing or mismatched
inputs, 3 degenerate theme, 4 a position with no candidates.

The taxonomy flag names a directory containing ``edges.tsv`` and
``lemmas.tsv`` (and optionally ``freq.tsv``). REWRITER_THREADS caps the
number of worker threads used to decode stories in parallel; output order
always matches input order.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .corpus import mark_content, read_conllu
from .decoder import DecoderConfig, EmptyCandidateListError, decode
from .evaluate import (
    DEFAULT_GRID,
    corpus_score,
    parse_grid,
    synonym_map_from_taxonomy,
    tune,
)
from .filters import FilterLists
from .resources import ResourceSet, load_embeddings, load_taxonomy, train_deplm
from .scoring import Weights
from .theme import DegenerateThemeError, build_profile, load_profile, save_profile

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DEGENERATE = 3
EXIT_NO_CANDIDATES = 4


def _fail(message: str, code: int) -> int:
    print(f"themeweave: {message}", file=sys.stderr)
    return code


def _missing_inputs(paths: list[str | None]) -> str | None:
    for path in paths:
        if path is not None and not Path(path).exists():
            return str(path)
    return None


def _taxonomy_paths(base: str) -> tuple[Path, Path, Path | None]:
    root = Path(base)
    edges = root / "edges.tsv"
    lemmas = root / "lemmas.tsv"
    freq = root / "freq.tsv"
    return edges, lemmas, freq if freq.exists() else None


def _load_resource_set(args) -> ResourceSet:
    edges, lemmas, freq = _taxonomy_paths(args.taxonomy)
    return ResourceSet(
        embeddings=load_embeddings(args.embeddings),
        deplm=train_deplm(args.deplm),
        taxonomy=load_taxonomy(edges, lemmas, freq),
    )


def _filters_from_args(args) -> FilterLists:
    return FilterLists.load(args.stoplist, args.mathlist, args.offensive)


def _add_filter_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--stoplist", help="stop word list (one word per line)")
    parser.add_argument("--mathlist", help="math word list")
    parser.add_argument("--offensive", help="offensive word list")


def _add_resource_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--embeddings", required=True, help="text embedding table")
    parser.add_argument("--deplm", required=True, help="dependency triple counts TSV")
    parser.add_argument(
        "--taxonomy",
        required=True,
        help="directory with edges.tsv, lemmas.tsv and optional freq.tsv",
    )


def _add_weight_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, default=0.1, help="semantic weight")
    parser.add_argument("--beta", type=float, default=0.1, help="syntactic weight")
    parser.add_argument("--gamma", type=float, default=1.0, help="thematicity weight")


def _add_decoder_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--beam", type=int, default=64, help="beam width")
    parser.add_argument("--n-best", type=int, default=5, help="rewrites to emit per story")
    parser.add_argument(
        "--no-keep", action="store_true", help="forbid keeping original content words"
    )
    parser.add_argument(
        "--delete-penalty",
        type=float,
        default=float("-inf"),
        help="per-deletion score penalty; deletions are disabled at -inf (default)",
    )
    parser.add_argument(
        "--order",
        choices=("any", "left-to-right", "head-first"),
        default="any",
        help="hypothesis expansion order",
    )
    parser.add_argument(
        "--sem-mode",
        choices=("full", "lex-cos"),
        default="full",
        help="semantic scoring: full coherence or single-word cosine only",
    )


def _decoder_config(args) -> DecoderConfig:
    return DecoderConfig(
        beam_width=args.beam,
        n_best=args.n_best,
        allow_keep=not args.no_keep,
        delete_penalty=args.delete_penalty,
        order=args.order,
        sem_mode=args.sem_mode,
    )


def _thread_count() -> int:
    value = os.environ.get("REWRITER_THREADS", "1")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def _write_output(text: str, out_path: str | None) -> None:
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_build_theme(args) -> int:
    missing = _missing_inputs(
        [args.corpus, args.background, args.stoplist, args.mathlist, args.offensive]
    )
    if missing:
        return _fail(f"input not found: {missing}", EXIT_USAGE)
    filters = _filters_from_args(args)
    theme_stories = read_conllu(args.corpus, args.ne_misc_key)
    background = read_conllu(args.background, args.ne_misc_key)
    name = args.name or Path(args.corpus).stem
    try:
        profile = build_profile(
            theme_stories,
            background,
            filters,
            k_max=args.top_k,
            compound_len=args.compound_k,
            name=name,
        )
    except DegenerateThemeError as error:
        return _fail(str(error), EXIT_DEGENERATE)
    save_profile(profile, args.out)
    return EXIT_OK


def cmd_rewrite(args) -> int:
    edges, lemmas, _ = _taxonomy_paths(args.taxonomy)
    missing = _missing_inputs(
        [
            args.story,
            args.theme,
            args.embeddings,
            args.deplm,
            str(edges),
            str(lemmas),
            args.stoplist,
            args.mathlist,
            args.offensive,
        ]
    )
    if missing:
        return _fail(f"input not found: {missing}", EXIT_USAGE)
    filters = _filters_from_args(args)
    resources = _load_resource_set(args)
    profile = load_profile(args.theme)
    stories = [
        mark_content(story, filters) for story in read_conllu(args.story, args.ne_misc_key)
    ]
    weights = Weights(alpha=args.alpha, beta=args.beta, gamma=args.gamma)
    config = _decoder_config(args)

    def run(story):
        return decode(story, profile, resources, weights, config)

    try:
        threads = _thread_count()
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                all_results = list(pool.map(run, stories))
        else:
            all_results = [run(story) for story in stories]
    except EmptyCandidateListError as error:
        return _fail(str(error), EXIT_NO_CANDIDATES)

    if args.format == "text":
        lines = [result.text for results in all_results for result in results]
        _write_output("\n".join(lines) + "\n", args.out)
    else:
        payload = [
            {
                "id": story.id,
                "rewrites": [
                    {
                        "text": result.text,
                        "th": result.breakdown.th,
                        "syn": result.breakdown.syn,
                        "sem_lex": result.breakdown.sem_lex,
                        "sem_pair": result.breakdown.sem_pair,
                        "total": result.breakdown.total,
                    }
                    for result in results
                ],
            }
            for story, results in zip(stories, all_results)
        ]
        _write_output(
            json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
            args.out,
        )
    return EXIT_OK


def _read_lines(path: str) -> list[str]:
    return Path(path).read_text(encoding="utf-8").splitlines()


def cmd_evaluate(args) -> int:
    ref_paths = [p for p in args.refs.split(",") if p]
    missing = _missing_inputs([args.hyp, *ref_paths])
    if missing:
        return _fail(f"input not found: {missing}", EXIT_USAGE)
    hyp_lines = _read_lines(args.hyp)
    ref_lines = [_read_lines(path) for path in ref_paths]
    for path, lines in zip(ref_paths, ref_lines):
        if len(lines) != len(hyp_lines):
            return _fail(
                f"{path}: {len(lines)} lines, expected {len(hyp_lines)}", EXIT_USAGE
            )
    synonym_map = None
    if args.taxonomy:
        edges, lemmas, freq = _taxonomy_paths(args.taxonomy)
        if not edges.exists() or not lemmas.exists():
            return _fail(f"input not found: {args.taxonomy}", EXIT_USAGE)
        synonym_map = synonym_map_from_taxonomy(load_taxonomy(edges, lemmas, freq))
    hyps = [line.split() for line in hyp_lines]
    refs = [
        [ref[i].split() for ref in ref_lines] for i in range(len(hyp_lines))
    ]
    if not hyps:
        return _fail("no stories to evaluate", EXIT_USAGE)
    score = corpus_score(hyps, refs, synonym_map=synonym_map)
    print(f"{score:.4f}")
    return EXIT_OK


def _dev_stories(path: str, ne_misc_key: str):
    target = Path(path)
    if target.is_dir():
        stories = []
        for file in sorted(target.glob("*.conllu")):
            stories.extend(read_conllu(file, ne_misc_key))
        return stories
    return read_conllu(target, ne_misc_key)


def _ref_files(spec: str) -> list[Path]:
    target = Path(spec)
    if target.is_dir():
        return sorted(p for p in target.iterdir() if p.is_file())
    return [Path(p) for p in spec.split(",") if p]


def cmd_tune(args) -> int:
    edges, lemmas, _ = _taxonomy_paths(args.taxonomy)
    ref_files = _ref_files(args.refs)
    missing = _missing_inputs(
        [
            args.dev,
            args.theme,
            args.embeddings,
            args.deplm,
            str(edges),
            str(lemmas),
            args.stoplist,
            args.mathlist,
            args.offensive,
            *[str(path) for path in ref_files],
        ]
    )
    if missing:
        return _fail(f"input not found: {missing}", EXIT_USAGE)
    filters = _filters_from_args(args)
    resources = _load_resource_set(args)
    profile = load_profile(args.theme)
    stories = [
        mark_content(story, filters) for story in _dev_stories(args.dev, args.ne_misc_key)
    ]
    if not stories:
        return _fail("development set is empty", EXIT_USAGE)
    if not ref_files:
        return _fail("no reference files", EXIT_USAGE)
    ref_lines = [_read_lines(path) for path in ref_files]
    for path, lines in zip(ref_files, ref_lines):
        if len(lines) != len(stories):
            return _fail(
                f"{path}: {len(lines)} lines, expected {len(stories)}", EXIT_USAGE
            )
    references = [
        [ref[i].split() for ref in ref_lines] for i in range(len(stories))
    ]
    synonym_map = synonym_map_from_taxonomy(resources.taxonomy)
    grid = parse_grid(args.grid) if args.grid else DEFAULT_GRID
    config = _decoder_config(args)
    result = tune(
        stories,
        references,
        profile,
        resources,
        grid=grid,
        config=config,
        synonym_map=synonym_map,
    )
    lines = [
        f"{alpha:.4f}\t{beta:.4f}\t{gamma:.4f}\t{score:.6f}"
        for alpha, beta, gamma, score in result.rows
    ]
    best = result.best_weights
    lines.append(
        f"{best.alpha:.4f}\t{best.beta:.4f}\t{best.gamma:.4f}\t{result.best_score:.6f}"
    )
    _write_output("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="themeweave",
        description="Rewrite stories into a new theme with coherence-aware lexical substitution.",
    )
    parser.add_argument(
        "--ne-misc-key",
        default="NER",
        help="MISC key carrying named-entity tags in CoNLL-U input",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    build = subparsers.add_parser("build-theme", help="build a theme profile JSON")
    build.add_argument("--corpus", required=True, help="theme corpus (CoNLL-U)")
    build.add_argument("--background", required=True, help="background corpus (CoNLL-U)")
    build.add_argument("--out", required=True, help="output profile path")
    build.add_argument("--name", help="profile name (default: corpus file stem)")
    build.add_argument("--top-k", type=int, default=50, help="candidates kept per class")
    build.add_argument("--compound-k", type=int, default=3, help="max noun compound length")
    _add_filter_flags(build)
    build.set_defaults(func=cmd_build_theme)

    rewrite = subparsers.add_parser("rewrite", help="rewrite stories into a theme")
    rewrite.add_argument("--story", required=True, help="input stories (CoNLL-U)")
    rewrite.add_argument("--theme", required=True, help="theme profile JSON")
    rewrite.add_argument("--out", help="output path (default: stdout)")
    rewrite.add_argument("--format", choices=("text", "json"), default="text")
    _add_resource_flags(rewrite)
    _add_weight_flags(rewrite)
    _add_decoder_flags(rewrite)
    _add_filter_flags(rewrite)
    rewrite.set_defaults(func=cmd_rewrite)

    evaluate = subparsers.add_parser("evaluate", help="score hypotheses against references")
    evaluate.add_argument("--hyp", required=True, help="hypothesis file, one story per line")
    evaluate.add_argument(
        "--refs", required=True, help="comma-separated reference files, line-aligned"
    )
    evaluate.add_argument(
        "--taxonomy", help="taxonomy directory enabling the synonym matching stage"
    )
    evaluate.set_defaults(func=cmd_evaluate)

    tune_cmd = subparsers.add_parser("tune", help="grid-search scoring weights")
    tune_cmd.add_argument("--dev", required=True, help="dev stories: CoNLL-U file or directory")
    tune_cmd.add_argument(
        "--refs", required=True, help="reference files: directory or comma-separated list"
    )
    tune_cmd.add_argument("--theme", required=True, help="theme profile JSON")
    tune_cmd.add_argument("--grid", default="0:1:0.1", help="grid as start:stop:step or values")
    tune_cmd.add_argument("--out", help="output TSV path (default: stdout)")
    _add_resource_flags(tune_cmd)
    _add_decoder_flags(tune_cmd)
    _add_filter_flags(tune_cmd)
    tune_cmd.set_defaults(func=cmd_tune)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
