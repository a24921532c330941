"""Automatic categorization of orthographic sentence-boundary errors.

Missed boundaries (false negatives) are labelled by the gold token that
closes the gold sentence; spurious boundaries (false positives) by where the
system cut falls relative to the gold tokens.  The first matching rule wins:

missed:   1 after a punctuation run, 2 after terminal punctuation glued to
          the next word (or hidden inside a system token), 3 no terminal
          punctuation at all, 9 after an abbreviation, otherwise Others.
spurious: 4 inside a gold punctuation run, 8 inside any other gold token,
          6 right after a punctuation run, 7 around an emoticon that became a
          sentence of its own, 5 after a non-punctuation token, otherwise Others.

Category 5 is deliberately broad: any spurious cut after a word counts.
"""

from __future__ import annotations

import bisect
import enum
from collections import Counter
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .corpus import Document, Segmentation, Token
from .exceptions import AlignmentError
from .tokenizer import TERMINAL_CHARS, TokenClass, Tokenizer, default_tokenizer


class ErrorCategory(enum.Enum):
    NO_BOUNDARY_AFTER_PUNCT_RUN = (1, "No boundary after multiple punctuation marks", "M")
    NO_BOUNDARY_AFTER_TERMINAL = (2, "No boundary after sentence final punctuation", "M")
    NO_BOUNDARY_MISSING_TERMINAL = (3, "No boundary due to missing sentence-final punctuation", "M")
    BOUNDARY_INSIDE_PUNCT_RUN = (4, "Sentence boundary inside repeated punctuation marks", "A")
    BOUNDARY_MID_SENTENCE = (5, "Boundary in the middle of a sentence", "A")
    WRONG_BOUNDARY_AFTER_PUNCT_RUN = (6, "Wrong boundary after multiple punctuation marks", "A")
    EMOTICON_OWN_SENTENCE = (7, "Emoticon has been segmented as a separate sentence", "A")
    BOUNDARY_INSIDE_TOKEN = (8, "Sentence boundary inside a token", "A")
    MISSING_BOUNDARY_AFTER_ABBREV = (9, "Missing boundary after sentence-final abbreviation token", "M")
    OTHERS = (10, "Others", "")

    def __init__(self, number, title, kind):
        self.number = number
        self.title = title
        self.kind = kind

    @property
    def label(self) -> str:
        return "-" if self is ErrorCategory.OTHERS else str(self.number)


MISSING = [c for c in ErrorCategory if c.kind == "M"]
ADDED = [c for c in ErrorCategory if c.kind == "A"]


@dataclass(frozen=True)
class ErrorInstance:
    doc_id: str
    offset: int
    direction: str  # "FN" or "FP"
    category: ErrorCategory
    context: str


@dataclass
class ErrorAnalysis:
    counts: Counter
    instances: List[ErrorInstance]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __add__(self, other: "ErrorAnalysis") -> "ErrorAnalysis":
        return ErrorAnalysis(self.counts + other.counts, self.instances + other.instances)


def _empty_counts() -> Counter:
    return Counter({c: 0 for c in ErrorCategory})


def _context(text: str, offset: int, width: int = 20) -> str:
    left = text[max(0, offset - width):offset]
    right = text[offset:offset + width]
    return (left + "|" + right).replace("\t", " ").replace("\n", "⏎")


def _is_punct_run(tok: Token, cls: TokenClass) -> bool:
    return cls is TokenClass.PUNCT_RUN or (
        len(tok.surface) >= 2 and all(ch in TERMINAL_CHARS for ch in tok.surface)
    ) or tok.surface == "…"


def _sentence_of_emoticons(sentence: Sequence[Tuple[Token, TokenClass]]) -> bool:
    return bool(sentence) and all(cls is TokenClass.EMOTICON for _, cls in sentence)


def classify_errors(
    document: Document,
    gold: Segmentation,
    system: Segmentation,
    gold_tokens: Sequence[Token],
    system_tokens: Sequence[Token],
    tokenizer: Optional[Tokenizer] = None,
) -> ErrorAnalysis:
    """Classify the orthographic boundary errors of ``system`` against ``gold``.

    Both token lists must be anchored on ``document.text``.  Syntactic-only
    gold boundaries are dropped before comparison.
    """
    tokenizer = tokenizer or default_tokenizer()
    text = document.text
    for toks, side in ((gold_tokens, "gold"), (system_tokens, "system")):
        for t in toks:
            if text[t.start:t.end] != t.surface:
                raise AlignmentError(f"{side} token {t.surface!r} does not match text at {t.start}")
    if "".join(t.surface for t in gold_tokens) != "".join(t.surface for t in system_tokens):
        raise AlignmentError(f"document {document.id!r}: gold and system tokens cover different text")

    gold = gold.orthographic()
    gold.validate(gold_tokens)
    system.validate(system_tokens)
    gold_cls = [(t, tokenizer.classify(t.surface)) for t in gold_tokens]
    sys_cls = [(t, tokenizer.classify(t.surface)) for t in system_tokens]
    # the document end is a sentence end on both sides
    final = gold_tokens[-1].end if gold_tokens else None
    gold_set = set(gold.offsets) | ({final} if final is not None else set())
    sys_set = set(system.offsets) | ({final} if final is not None else set())

    gold_by_end = {t.end: (t, c) for t, c in gold_cls}
    gold_starts = [t.start for t in gold_tokens]

    sys_starts = [t.start for t in system_tokens]
    sys_sentences = {}
    for i, j in system.sentences(system_tokens):
        sent = sys_cls[i:j]
        sys_sentences[("start", sent[0][0].start)] = sent
        sys_sentences[("end", sent[-1][0].end)] = sent

    counts = _empty_counts()
    instances = []

    for offset in sorted(gold_set - sys_set):
        tok, cls = gold_by_end[offset]
        cat = _classify_missing(text, offset, tok, cls, system_tokens, sys_starts)
        counts[cat] += 1
        instances.append(ErrorInstance(document.id, offset, "FN", cat, _context(text, offset)))

    for offset in sorted(sys_set - gold_set):
        cat = _classify_added(offset, gold_cls, gold_starts, gold_by_end, sys_starts, sys_sentences)
        counts[cat] += 1
        instances.append(ErrorInstance(document.id, offset, "FP", cat, _context(text, offset)))

    return ErrorAnalysis(counts, instances)


def _classify_missing(text, offset, tok, cls, system_tokens, sys_starts) -> ErrorCategory:
    if _is_punct_run(tok, cls):
        return ErrorCategory.NO_BOUNDARY_AFTER_PUNCT_RUN
    ends_terminal = tok.surface[-1] in ".?!"
    if cls is TokenClass.TERMINAL_PUNCT or (ends_terminal and cls is not TokenClass.ABBREVIATION):
        glued_text = offset < len(text) and not text[offset].isspace()
        k = bisect.bisect_left(sys_starts, offset) - 1
        hidden = k >= 0 and system_tokens[k].end > offset
        if glued_text or hidden:
            return ErrorCategory.NO_BOUNDARY_AFTER_TERMINAL
    if not any(ch in TERMINAL_CHARS for ch in tok.surface):
        return ErrorCategory.NO_BOUNDARY_MISSING_TERMINAL
    if cls is TokenClass.ABBREVIATION:
        return ErrorCategory.MISSING_BOUNDARY_AFTER_ABBREV
    return ErrorCategory.OTHERS


def _classify_added(offset, gold_cls, gold_starts, gold_by_end, sys_starts, sys_sentences) -> ErrorCategory:
    k = bisect.bisect_right(gold_starts, offset - 1) - 1
    if k >= 0:
        tok, cls = gold_cls[k]
        if tok.start < offset < tok.end:
            if _is_punct_run(tok, cls):
                return ErrorCategory.BOUNDARY_INSIDE_PUNCT_RUN
            return ErrorCategory.BOUNDARY_INSIDE_TOKEN
    tok, cls = gold_by_end[offset]
    if _is_punct_run(tok, cls):
        return ErrorCategory.WRONG_BOUNDARY_AFTER_PUNCT_RUN
    ending = sys_sentences.get(("end", offset))
    k = bisect.bisect_left(sys_starts, offset)
    following = sys_sentences.get(("start", sys_starts[k])) if k < len(sys_starts) else None
    if (ending and _sentence_of_emoticons(ending)) or (following and _sentence_of_emoticons(following)):
        return ErrorCategory.EMOTICON_OWN_SENTENCE
    if not any(ch in TERMINAL_CHARS for ch in tok.surface) and cls not in (
        TokenClass.EMOTICON, TokenClass.SYMBOL
    ):
        return ErrorCategory.BOUNDARY_MID_SENTENCE
    return ErrorCategory.OTHERS


# ---------------------------------------------------------------------------
# reports


def format_category_table(analysis: ErrorAnalysis) -> str:
    lines = ["category\tname\ttype\tcount\tpercentage"]
    total = analysis.total
    for cat in ErrorCategory:
        n = analysis.counts.get(cat, 0)
        pct = 100.0 * n / total if total else 0.0
        lines.append(f"{cat.label}\t{cat.title}\t{cat.kind or '-'}\t{n}\t{pct:.2f}")
    return "\n".join(lines) + "\n"


def format_instances(analysis: ErrorAnalysis) -> str:
    lines = ["doc_id\toffset\tdirection\tcategory\tcontext"]
    for inst in analysis.instances:
        lines.append(
            f"{inst.doc_id}\t{inst.offset}\t{inst.direction}\t{inst.category.label}\t{inst.context}"
        )
    return "\n".join(lines) + "\n"


def format_category_pretty(analysis: ErrorAnalysis) -> str:
    total = analysis.total
    out = [f"{'No':>3}  {'Error category':<56} {'Type':<4} {'Count':>6} {'%':>6}"]
    for cat in ErrorCategory:
        n = analysis.counts.get(cat, 0)
        pct = 100.0 * n / total if total else 0.0
        out.append(f"{cat.label:>3}  {cat.title:<56} {cat.kind:<4} {n:>6} {pct:>5.0f}%")
    out.append(f"     {'Total':<56} {'':<4} {total:>6}")
    return "\n".join(out) + "\n"
