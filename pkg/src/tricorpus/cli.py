"""Command-line interface.

Conventions: data goes to stdout or to files named by flags, logs and
errors go to stderr.  Errors print one machine-parsable line of the form
`tricorpus: error: <Type>: <message>` and exit nonzero.  A flat key=value
config file supplies defaults for tunable options; explicit flags win.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .align import (
    AlignError,
    align_documents,
    emit_pairs,
    load_embeddings,
)
from .align import DEFAULT_CONFIDENCE_THRESHOLD, DEFAULT_SKIP_PENALTY
from .bpe import BpeError, extend_vocab, learn_bpe, load_model, save_model
from .corpus import (
    Corpus,
    CorpusError,
    align_verses,
    corpus_stats,
    load_corpus,
    load_verse_doc,
    save_corpus,
)
from .experiments import (
    DEFAULT_SEED,
    ExperimentError,
    assemble_experiment,
    export_llm_batch,
    ingest_llm_responses,
    load_split,
    save_split,
    save_training_set,
    standard_experiment,
    stratified_split,
)
from .metrics import (
    EvalPair,
    MetricsError,
    bleu_corpus,
    build_report,
    chrfpp_corpus,
)
from .textprep import (
    clean_text,
    filter_short,
    load_abbreviations,
    split_sentences,
)

log = logging.getLogger("tricorpus")

_KNOWN_ERRORS = (CorpusError, BpeError, AlignError, ExperimentError, MetricsError)


# ---------------------------------------------------------------------------
# Config and shared helpers
# ---------------------------------------------------------------------------

def load_config(path) -> dict:
    """Flat `key = value` lines; blank lines and `#` comments ignored."""
    config = {}
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, value = stripped.partition("=")
        if not sep:
            raise ValueError(f"{path}:{line_no}: expected key=value, got {line!r}")
        config[key.strip()] = value.strip()
    return config


def config_hash(path) -> str:
    data = Path(path).read_bytes() if path else b""
    return hashlib.sha256(data).hexdigest()[:12]


def _cfg(args, config: dict, name: str, default, cast=None):
    """Effective option value: explicit flag, else config, else default."""
    value = getattr(args, name, None)
    if value is not None:
        return value
    raw = config.get(f"{args.command}.{name}", config.get(name))
    if raw is None:
        return default
    if cast is bool:
        return raw.lower() in ("1", "true", "yes", "on")
    return cast(raw) if cast else raw


def _read_lines(path) -> list:
    if path == "-":
        return sys.stdin.read().splitlines()
    return Path(path).read_text(encoding="utf-8").splitlines()


def _write_lines(path, lines) -> None:
    text = "".join(line + "\n" for line in lines)
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _parallel_map(fn, items, threads: int) -> list:
    """Order-preserving map; identical output for any thread count."""
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _load_pairs(path) -> list:
    pairs = []
    for line_no, line in enumerate(_read_lines(path), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MetricsError(f"{path}:{line_no}: bad JSON: {exc}") from exc
        pairs.append(EvalPair(
            hypothesis=obj.get("hypothesis", ""),
            reference=obj["reference"],
            direction=(obj.get("src_lang", "und_Zyyy"), obj.get("tgt_lang", "und_Zyyy")),
            source=obj.get("source", "other"),
        ))
    return pairs


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_clean(args, config) -> int:
    threads = _cfg(args, config, "threads", 1, int)
    lines = _read_lines(args.input)
    results = _parallel_map(clean_text, lines, threads)
    cleaned = [text for text, _ in results]
    report = None
    for _, rep in results:
        report = rep if report is None else report.merge(rep)
    _write_lines(args.output, cleaned)
    if report is not None:
        log.info(
            "cleaned %d lines: nonprintable=%d encoding_fixes=%d palochka=%d",
            len(lines), report.removed_nonprintable,
            report.encoding_fixes, report.palochka_normalizations,
        )
    return 0


def cmd_split_sentences(args, config) -> int:
    lang = _cfg(args, config, "lang", "rus_Cyrl")
    min_tokens = _cfg(args, config, "min_tokens", 1, int)
    abbrev_dir = _cfg(args, config, "abbrev_dir", None)
    abbreviations = load_abbreviations(abbrev_dir, lang) if abbrev_dir else None
    threads = _cfg(args, config, "threads", 1, int)

    def split_one(line: str) -> list:
        return split_sentences(line, lang=lang, abbreviations=abbreviations)

    out = []
    for sentences in _parallel_map(split_one, _read_lines(args.input), threads):
        out.extend(sentences)
    if min_tokens > 1:
        out = filter_short(out, min_tokens=min_tokens)
    _write_lines(args.output, out)
    return 0


def cmd_align_verses(args, config) -> int:
    doc_a = load_verse_doc(args.doc_a, args.lang_a)
    doc_b = load_verse_doc(args.doc_b, args.lang_b)
    source = _cfg(args, config, "source", "bible")
    result = align_verses(
        doc_a, doc_b, source=source, book=args.book, unit_prefix=args.unit_prefix or "",
    )
    corpus = Corpus(units=result.units, mono=[], name=source)
    save_corpus(corpus, args.output)
    log.info(
        "aligned %d units; unmatched_a=%d unmatched_b=%d skipped=%d",
        len(result.units), len(result.unmatched_a),
        len(result.unmatched_b), len(result.skipped),
    )
    return 0


def cmd_align(args, config) -> int:
    skip_penalty = _cfg(args, config, "skip_penalty", DEFAULT_SKIP_PENALTY, float)
    threshold = _cfg(args, config, "threshold", DEFAULT_CONFIDENCE_THRESHOLD, float)
    src = load_embeddings(args.src_emb, renormalize=args.renormalize)
    tgt = load_embeddings(args.tgt_emb, renormalize=args.renormalize)
    src_texts = _read_lines(args.src_texts)
    tgt_texts = _read_lines(args.tgt_texts)
    if len(src_texts) != src.n or len(tgt_texts) != tgt.n:
        raise AlignError(
            f"text/embedding count mismatch: {len(src_texts)}/{src.n} src, "
            f"{len(tgt_texts)}/{tgt.n} tgt"
        )
    path = align_documents(src, tgt, skip_penalty=skip_penalty)
    pairs = emit_pairs(path, src, tgt, src_texts, tgt_texts, threshold=threshold)
    lines = []
    for pair in pairs:
        lines.append(json.dumps({
            "src_ids": pair.src_ids,
            "tgt_ids": pair.tgt_ids,
            "src_text": pair.src_text,
            "tgt_text": pair.tgt_text,
            "similarity": round(pair.similarity, 6),
            "low_confidence": pair.low_confidence,
        }, ensure_ascii=False, sort_keys=True))
    _write_lines(args.output, lines)
    log.info("emitted %d pairs (total cost %.4f)", len(pairs), path.total_cost)
    return 0


def cmd_learn_bpe(args, config) -> int:
    merges = _cfg(args, config, "merges", None, int)
    if merges is None:
        raise BpeError("--merges is required (flag or config key 'merges')")
    marker = _cfg(args, config, "word_end_marker", "</w>")
    model = learn_bpe(_read_lines(args.input), merges, word_end_marker=marker)
    save_model(model, args.output)
    log.info("learned %d merges, vocab size %d", len(model.merges), len(model.vocab))
    return 0


def cmd_extend_vocab(args, config) -> int:
    merges = _cfg(args, config, "merges", None, int)
    if merges is None:
        raise BpeError("--merges is required (flag or config key 'merges')")
    base = load_model(args.base_model)
    new = learn_bpe(_read_lines(args.input), merges, word_end_marker=base.word_end_marker)
    extended = extend_vocab(base, new, args.lang_code)
    save_model(extended, args.output)
    log.info(
        "extended vocab %d -> %d (base ids preserved)",
        extended.base_vocab_size, len(extended.vocab),
    )
    return 0


def cmd_split(args, config) -> int:
    holdout = _cfg(args, config, "holdout", None, int)
    if holdout is None:
        raise ExperimentError("--holdout is required (flag or config key 'holdout')")
    seed = _cfg(args, config, "seed", DEFAULT_SEED, int)
    corpus = load_corpus(args.corpus)
    split = stratified_split(corpus, holdout, seed=seed)
    save_split(split, args.output)
    per_source = {}
    by_id = {unit.id: unit.source for unit in corpus.units}
    for uid in split.holdout_ids:
        per_source[by_id[uid]] = per_source.get(by_id[uid], 0) + 1
    log.info("holdout quotas: %s", json.dumps(per_source, sort_keys=True))
    return 0


def cmd_assemble(args, config) -> int:
    exp_id = _cfg(args, config, "exp", None, int)
    if exp_id is None:
        raise ExperimentError("--exp is required (flag or config key 'exp')")
    corpus = load_corpus(args.corpus)
    split = load_split(args.split)
    spec = standard_experiment(exp_id, args.low, args.partner, args.third)
    bt_units = load_corpus(args.bt).units if args.bt else None
    records = assemble_experiment(corpus, split, spec, bt_units=bt_units)
    save_training_set(records, args.output)
    log.info("experiment %d: %d training records", exp_id, len(records))
    return 0


def cmd_export_llm(args, config) -> int:
    n = _cfg(args, config, "n", None, int)
    if n is None:
        raise ExperimentError("--n is required (flag or config key 'n')")
    corpus = load_corpus(args.corpus)
    split = load_split(args.split)
    prompt = export_llm_batch(
        corpus, split, source=args.source, n=n,
        src_lang=args.src_lang, tgt_lang=args.tgt_lang, out_csv=args.output,
    )
    print(prompt)
    return 0


def cmd_ingest_llm(args, config) -> int:
    with open(args.batch, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    expected = [row[0] for row in rows[1:] if row]
    result = ingest_llm_responses(
        args.responses,
        expected_ids=expected,
        target_lang=args.target_lang,
        refusal_patterns=args.refusal_pattern or (),
    )
    lines = [
        json.dumps({"id": uid, "text": text}, ensure_ascii=False, sort_keys=True)
        for uid, text in result.translations.items()
    ]
    _write_lines(args.output, lines)
    if args.refusals_out:
        _write_lines(args.refusals_out, result.refusals)
    log.info("%d translations, %d refusals", len(result.translations), len(result.refusals))
    return 0


def cmd_score(args, config) -> int:
    pairs = _load_pairs(args.pairs)
    out = {
        "bleu": round(bleu_corpus(pairs), 6),
        "chrfpp": round(chrfpp_corpus(pairs), 6),
        "n": len(pairs),
    }
    print(json.dumps(out, sort_keys=True))
    return 0


def cmd_report(args, config) -> int:
    report = build_report(_load_pairs(args.pairs))
    if args.json:
        print(json.dumps(report.to_json_obj(), ensure_ascii=False, sort_keys=True))
    else:
        print(report.render())
    return 0


def cmd_stats(args, config) -> int:
    print(corpus_stats(load_corpus(args.corpus)).render())
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tricorpus",
        description="Corpus construction and MT evaluation for low-resource language triples.",
    )
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--version", action="store_true", help="print version and config hash")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    parser.add_argument("--threads", type=int, help="worker threads (output is identical for any value)")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("clean", help="repair encoding and normalize raw text")
    p.add_argument("input", help="text file or - for stdin")
    p.add_argument("-o", "--output", help="output file (default stdout)")
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("split-sentences", help="split normalized text into sentences")
    p.add_argument("input", help="text file or - for stdin, one paragraph per line")
    p.add_argument("-o", "--output", help="output file (default stdout)")
    p.add_argument("--lang", help="language tag (default rus_Cyrl)")
    p.add_argument("--abbrev-dir", help="directory with <lang>.txt abbreviation lists")
    p.add_argument("--min-tokens", type=int, help="drop sentences shorter than this")
    p.set_defaults(func=cmd_split_sentences)

    p = sub.add_parser("align-verses", help="pair two verse-keyed documents into a corpus")
    p.add_argument("doc_a", help="verse_key<TAB>text file")
    p.add_argument("doc_b")
    p.add_argument("--lang-a", required=True)
    p.add_argument("--lang-b", required=True)
    p.add_argument("--source", help="source label (default bible)")
    p.add_argument("--book", help="book name prefixed to unit ids")
    p.add_argument("--unit-prefix", help="extra prefix for unit ids")
    p.add_argument("-o", "--output", required=True, help="corpus JSONL")
    p.set_defaults(func=cmd_align_verses)

    p = sub.add_parser("align", help="align two embedded documents sentence by sentence")
    p.add_argument("src_emb", help="EMB1 file with .ids sidecar")
    p.add_argument("tgt_emb")
    p.add_argument("src_texts", help="one sentence per line, same order as embeddings")
    p.add_argument("tgt_texts")
    p.add_argument("--skip-penalty", type=float)
    p.add_argument("--threshold", type=float, help="below this similarity, flag low confidence")
    p.add_argument("--renormalize", action="store_true", help="L2-normalize embeddings on load")
    p.add_argument("-o", "--output", help="aligned pairs JSONL (default stdout)")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("learn-bpe", help="learn a subword merge vocabulary")
    p.add_argument("input", help="monolingual text, one line per sentence")
    p.add_argument("--merges", type=int, help="maximum number of merges")
    p.add_argument("--word-end-marker")
    p.add_argument("-o", "--output", required=True, help="model JSON")
    p.set_defaults(func=cmd_learn_bpe)

    p = sub.add_parser("extend-vocab", help="extend a model with a new language, keeping base ids")
    p.add_argument("base_model", help="model JSON")
    p.add_argument("input", help="monolingual text for the new language")
    p.add_argument("--lang-code", required=True, help="special token for the new language")
    p.add_argument("--merges", type=int)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_extend_vocab)

    p = sub.add_parser("split", help="stratified train/holdout split")
    p.add_argument("corpus", help="corpus JSONL")
    p.add_argument("--holdout", type=int, help="total holdout size")
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--output", required=True, help="unit_id<TAB>part file")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("assemble", help="build a directed training set for one experiment")
    p.add_argument("corpus", help="corpus JSONL")
    p.add_argument("split", help="split file from the split command")
    p.add_argument("--exp", type=int, help="experiment id 1-4")
    p.add_argument("--low", required=True, help="low-resource language tag")
    p.add_argument("--partner", required=True, help="partner language tag")
    p.add_argument("--third", required=True, help="third language tag")
    p.add_argument("--bt", help="corpus JSONL with back-translated units")
    p.add_argument("-o", "--output", required=True, help="training TSV")
    p.set_defaults(func=cmd_assemble)

    p = sub.add_parser("export-llm", help="export a holdout batch as CSV and print the prompt")
    p.add_argument("corpus")
    p.add_argument("split")
    p.add_argument("--source", required=True)
    p.add_argument("--n", type=int, help="number of sentences")
    p.add_argument("--src-lang", required=True)
    p.add_argument("--tgt-lang", required=True)
    p.add_argument("-o", "--output", required=True, help="batch CSV (id,text)")
    p.set_defaults(func=cmd_export_llm)

    p = sub.add_parser("ingest-llm", help="parse LLM responses, separating refusals")
    p.add_argument("responses", help="response CSV (id,text)")
    p.add_argument("--batch", required=True, help="the exported batch CSV, for expected ids")
    p.add_argument("--target-lang", help="refuse rows lacking this language's script")
    p.add_argument("--refusal-pattern", action="append", help="extra refusal regex (repeatable)")
    p.add_argument("-o", "--output", help="accepted translations JSONL (default stdout)")
    p.add_argument("--refusals-out", help="write refused ids here, one per line")
    p.set_defaults(func=cmd_ingest_llm)

    p = sub.add_parser("score", help="corpus BLEU and ChrF++ for a pairs file")
    p.add_argument("pairs", help="JSONL with hypothesis/reference per line")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("report", help="per-direction, per-source score table")
    p.add_argument("pairs")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("stats", help="per-source unit counts for a corpus")
    p.add_argument("corpus")
    p.set_defaults(func=cmd_stats)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    # basicConfig is a no-op once handlers exist, so set the level each call.
    logging.getLogger().setLevel(logging.INFO if args.verbose else logging.WARNING)
    try:
        config = load_config(args.config) if args.config else {}
        if args.version:
            print(f"tricorpus {__version__} config {config_hash(args.config)}")
            return 0
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 2
        return args.func(args, config)
    except _KNOWN_ERRORS + (OSError, ValueError) as exc:
        message = " ".join(str(exc).split())
        print(f"tricorpus: error: {type(exc).__name__}: {message}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
