"""Command-line interface: ``webseg <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data/format error, 3 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from . import conllu, punkt
from .agreement import (
    AgreementReport,
    TierFilter,
    aggregate_majority,
    agreement_report,
    candidate_positions,
    pooled_agreement_report,
)
from .corpus import (
    Document,
    Segmentation,
    Token,
    force_paragraph_ends,
    format_segmentations,
    load_annotations,
    load_corpus,
    realign,
    validate_annotations,
)
from .error_analysis import (
    ErrorAnalysis,
    classify_errors,
    format_category_pretty,
    format_category_table,
    format_instances,
)
from .evaluation import Scenario, evaluate_corpus, format_report_table, format_report_tsv
from .exceptions import WebsegError
from .segmenter import EmoticonAttach, PunctRunPolicy, WebRuleConfig, segment_document
from .tokenizer import Tokenizer, load_abbreviations, load_emoticons

logger = logging.getLogger("webseg")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# helpers


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _tokenizer(args) -> Tokenizer:
    abbrevs = load_abbreviations(args.abbreviations) if args.abbreviations else None
    emoticons = load_emoticons(args.emoticons) if args.emoticons else None
    return Tokenizer(abbrevs, emoticons)


def _map(func, items, jobs: int):
    """Ordered map, optionally over worker processes."""
    if jobs <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items))


def _rule_config(args) -> WebRuleConfig:
    return WebRuleConfig(
        force_paragraph_boundary=not args.no_force_paragraph,
        punct_run_boundary_policy=PunctRunPolicy(args.punct_run_policy),
        emoticon_attach=EmoticonAttach(args.emoticon_attach),
        glued_split=not args.no_glued_split,
    )


def _parse_min_votes(value: str) -> Dict[int, int]:
    """``3`` -> {0: 3}; ``5:3,3:2`` -> threshold per annotator count."""
    try:
        if ":" not in value:
            n = int(value)
            if n < 1:
                raise ValueError
            return {0: n}
        out = {}
        for part in value.split(","):
            k, v = part.split(":")
            k, v = int(k), int(v)
            if k < 1 or v < 1:
                raise ValueError
            out[k] = v
        return out
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected a positive integer or annotators:votes pairs, got {value!r}"
        ) from None


def _load_gold_system(gold_path: str, system_path: str):
    gold_docs = {d.id: (d, t, s) for d, t, s in conllu.import_conllu_corpus(_read(gold_path))}
    sys_docs = {d.id: (d, t, s) for d, t, s in conllu.import_conllu_corpus(_read(system_path))}
    missing = sorted(set(gold_docs) ^ set(sys_docs))
    if missing:
        raise WebsegError(f"documents present in only one file: {', '.join(missing)}")
    pairs = []
    for doc_id in sorted(gold_docs):
        gdoc, gtoks, gseg = gold_docs[doc_id]
        _, stoks, sseg = sys_docs[doc_id]
        stoks, sseg = realign(stoks, sseg, gdoc)
        pairs.append((gdoc, gtoks, gseg, stoks, sseg))
    return pairs


# ---------------------------------------------------------------------------
# subcommands


def _tokenize_one(job):
    doc, tokenizer = job
    return tokenizer.tokenize(doc)


def cmd_tokenize(args) -> int:
    tokenizer = _tokenizer(args)
    docs = load_corpus(args.input)
    results = _map(_tokenize_one, [(d, tokenizer) for d in docs], args.jobs)
    out = []
    if args.format == "tsv":
        out.append("doc_id\tstart\tend\tsurface\tclass\n")
        for doc, toks in zip(docs, results):
            out.extend(f"{doc.id}\t{t.start}\t{t.end}\t{t.surface}\t{c.value}\n" for t, c in toks)
    else:
        for doc, toks in zip(docs, results):
            tokens = [t for t, _ in toks]
            placeholder = force_paragraph_ends(Segmentation(doc.id), doc, tokens)
            out.append(conllu.export_conllu(doc, tokens, placeholder))
    _write(args.out, "".join(out))
    return EXIT_OK


def cmd_train(args) -> int:
    tokenizer = _tokenizer(args)
    docs = load_corpus(args.input)
    trainer = punkt.PunktTrainer(tokenizer)
    for doc in docs:
        trainer.add_document(doc)
    model = trainer.finalize()
    if model.is_empty():
        logger.warning("training corpus is empty; writing an empty model")
    punkt.save(model, args.model)
    logger.info(
        "model: %d abbreviations, %d collocations, %d sentence starters",
        len(model.abbrev_types), len(model.collocations), len(model.sentence_starters),
    )
    return EXIT_OK


def _segment_one(job):
    doc, model, config, tokenizer, ignore = job
    toks, seg = segment_document(doc, model, config, tokenizer, ignore_paragraphs=ignore)
    return [t for t, _ in toks], seg


def cmd_segment(args) -> int:
    config = _rule_config(args)
    tokenizer = _tokenizer(args)
    model = None
    if args.model:
        if Path(args.model).exists():
            model = punkt.load(args.model)
        elif args.require_model:
            raise WebsegError(f"model file not found: {args.model}")
        else:
            logger.warning("model %s not found; segmenting with rules only", args.model)
    elif args.require_model:
        raise UsageError("--require-model needs --model")
    docs = load_corpus(args.input)
    jobs = [(d, model, config, tokenizer, args.ignore_paragraphs) for d in docs]
    results = _map(_segment_one, jobs, args.jobs)
    if args.format == "tsv":
        text = format_segmentations([seg for _, seg in results], annotator_id="system")
    else:
        items = [
            (d.merged() if args.ignore_paragraphs else d, toks, seg)
            for d, (toks, seg) in zip(docs, results)
        ]
        text = conllu.export_corpus(items)
    _write(args.out, text)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    scenarios = [Scenario(s) for s in args.scenario] if args.scenario else list(Scenario)
    pairs = _load_gold_system(args.gold, args.system)
    results, tokens = evaluate_corpus(
        ((gseg, gtoks, sseg, stoks) for _, gtoks, gseg, stoks, sseg in pairs), scenarios
    )
    formatter = format_report_table if args.pretty else format_report_tsv
    _write(args.out, formatter(results, None if args.no_tokens else tokens))
    return EXIT_OK


def _annotated_corpus(args):
    tokenizer = _tokenizer(args)
    docs = load_corpus(args.corpus)
    annotations = load_annotations(args.annotations, docs)
    tokens = {}
    if args.tokens:
        imported = {d.id: (d, t) for d, t, _ in conllu.import_conllu_corpus(_read(args.tokens))}
        for doc in docs:
            if doc.id not in imported:
                raise WebsegError(f"no tokenization for document {doc.id!r} in {args.tokens}")
            tokens[doc.id], _ = realign(imported[doc.id][1], None, doc)
    else:
        for doc in docs:
            tokens[doc.id] = [t for t, _ in tokenizer.tokenize(doc)]
    validate_annotations(annotations, tokens)
    return docs, tokens, annotations


def cmd_agreement(args) -> int:
    docs, tokens, annotations = _annotated_corpus(args)
    if len(annotations) < 2:
        raise WebsegError("agreement needs at least two annotators")
    groups: Dict[Tuple[str, ...], List[str]] = {}
    for doc in docs:
        who = tuple(a.annotator_id for a in annotations if doc.id in a.segmentations)
        if who:
            groups.setdefault(who, []).append(doc.id)
    blocks: List[Tuple[str, AgreementReport]] = []
    for n, (who, doc_ids) in enumerate(sorted(groups.items(), key=lambda kv: kv[1][0]), 1):
        if len(who) < 2:
            logger.warning("documents %s have a single annotator; skipped", ", ".join(doc_ids))
            continue
        members = [a for a in annotations if a.annotator_id in who]
        positions = {d: candidate_positions(_doc(docs, d), tokens[d]) for d in doc_ids}
        blocks.append((f"group{n}:{'+'.join(who)}", agreement_report(members, positions)))
    if args.mode in ("pooled", "both"):
        positions = {d.id: candidate_positions(d, tokens[d.id]) for d in docs}
        blocks.append(("pooled", pooled_agreement_report(annotations, positions)))
    if args.mode == "pooled":
        blocks = blocks[-1:]
    text = _format_agreement_blocks(blocks, args.pretty)
    _write(args.out, text)
    return EXIT_OK


def _doc(docs: Sequence[Document], doc_id: str) -> Document:
    for d in docs:
        if d.id == doc_id:
            return d
    raise KeyError(doc_id)


def _format_agreement_blocks(blocks, pretty: bool) -> str:
    if pretty:
        names = {TierFilter.BINARY: "Binary boundary", TierFilter.ORTHOGRAPHIC: "Orthographic boundary",
                 TierFilter.SYNTACTIC: "Syntactic boundary"}
        out = []
        for name, rep in blocks:
            out.append(f"[{name}] {rep.n_items} items, {rep.n_annotators} annotators")
            out.append(f"{'':<22}  {'Dice':>6}  {'Fleiss k':>8}")
            for f in TierFilter:
                out.append(f"{names[f]:<22}  {rep.dice(f):6.2f}  {rep.kappa(f):8.2f}")
            out.append("")
        return "\n".join(out)
    lines = ["group\tboundary\tdice\tfleiss_kappa\titems\tannotators"]
    for name, rep in blocks:
        for f in TierFilter:
            lines.append(
                f"{name}\t{f.value}\t{rep.dice(f):.6f}\t{rep.kappa(f):.6f}\t{rep.n_items}\t{rep.n_annotators}"
            )
    return "\n".join(lines) + "\n"


def cmd_aggregate(args) -> int:
    docs, tokens, annotations = _annotated_corpus(args)
    thresholds = args.min_votes
    items = []
    for doc in docs:
        voters = [a for a in annotations if doc.id in a.segmentations]
        if not voters:
            logger.warning("document %s has no annotations", doc.id)
            seg = Segmentation(doc.id)
        else:
            n_required = thresholds.get(len(voters), thresholds.get(0))
            if n_required is None:
                raise UsageError(f"--min-votes gives no threshold for {len(voters)} annotators ({doc.id})")
            try:
                seg = aggregate_majority(voters, n_required, doc.id)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
        seg = force_paragraph_ends(seg, doc, tokens[doc.id])
        items.append((doc, tokens[doc.id], seg))
    if args.format == "tsv":
        text = format_segmentations([s for _, _, s in items], annotator_id="majority")
    else:
        text = conllu.export_corpus(items)
    _write(args.out, text)
    return EXIT_OK


def cmd_errors(args) -> int:
    pairs = _load_gold_system(args.gold, args.system)
    total = ErrorAnalysis(Counter(), [])
    tokenizer = _tokenizer(args)
    for gdoc, gtoks, gseg, stoks, sseg in pairs:
        total = total + classify_errors(gdoc, gseg, sseg, gtoks, stoks, tokenizer)
    if sum(total.counts.values()) != len(total.instances):
        raise AssertionError("error counts and instances disagree")
    _write(args.out, format_category_pretty(total) if args.pretty else format_category_table(total))
    if args.instances:
        _write(args.instances, format_instances(total))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="webseg", description="Sentence segmentation and tokenization of web text.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def lexicon_flags(p):
        p.add_argument("--abbreviations", metavar="FILE", help="abbreviation lexicon (replaces the default)")
        p.add_argument("--emoticons", metavar="FILE", help="emoticon pattern file (replaces the default)")

    def jobs_flag(p):
        p.add_argument("--jobs", type=_positive_int, default=1, metavar="N")

    p = sub.add_parser("tokenize", help="tokenize a plain-text corpus")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    p.add_argument("--format", choices=["conllu", "tsv"], default="conllu")
    lexicon_flags(p)
    jobs_flag(p)
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser("train", help="train a Punkt model on raw text")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--model", required=True)
    lexicon_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("segment", help="tokenize and sentence-segment a corpus")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    p.add_argument("--model")
    p.add_argument("--require-model", action="store_true")
    p.add_argument("--ignore-paragraphs", action="store_true",
                   help="merge all paragraphs of a document before segmentation")
    p.add_argument("--no-force-paragraph", action="store_true")
    p.add_argument("--punct-run-policy", choices=[x.value for x in PunctRunPolicy],
                   default=PunctRunPolicy.CAPITALIZED_NEXT.value)
    p.add_argument("--emoticon-attach", choices=[x.value for x in EmoticonAttach],
                   default=EmoticonAttach.PREVIOUS.value)
    p.add_argument("--no-glued-split", action="store_true")
    p.add_argument("--format", choices=["conllu", "tsv"], default="conllu")
    lexicon_flags(p)
    jobs_flag(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("evaluate", help="score a system CoNLL-U file against gold")
    p.add_argument("--gold", required=True)
    p.add_argument("--system", required=True)
    p.add_argument("--scenario", action="append", choices=[s.value for s in Scenario])
    p.add_argument("--no-tokens", action="store_true", help="omit the tokenization row")
    p.add_argument("--pretty", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    for name, func, helptext in (
        ("agreement", cmd_agreement, "inter-annotator agreement"),
        ("aggregate", cmd_aggregate, "majority-vote gold boundaries"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--corpus", required=True)
        p.add_argument("--annotations", required=True)
        p.add_argument("--tokens", help="CoNLL-U file with the reference tokenization")
        p.add_argument("--out")
        lexicon_flags(p)
        if name == "agreement":
            p.add_argument("--mode", choices=["groups", "pooled", "both"], default="both")
            p.add_argument("--pretty", action="store_true")
        else:
            p.add_argument("--min-votes", type=_parse_min_votes, required=True,
                           help="N, or annotators:votes pairs such as 5:3,3:2")
            p.add_argument("--format", choices=["conllu", "tsv"], default="conllu")
        p.set_defaults(func=func)

    p = sub.add_parser("errors", help="categorize orthographic boundary errors")
    p.add_argument("--gold", required=True)
    p.add_argument("--system", required=True)
    p.add_argument("--instances", metavar="FILE")
    p.add_argument("--pretty", action="store_true")
    p.add_argument("--out")
    lexicon_flags(p)
    p.set_defaults(func=cmd_errors)
    return parser


def _positive_int(value: str) -> int:
    try:
        n = int(value)
    except ValueError:
        n = 0
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value!r}")
    return n


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(name)s: %(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"webseg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (WebsegError, OSError, UnicodeDecodeError) as exc:
        print(f"webseg: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except AssertionError as exc:
        print(f"webseg: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
