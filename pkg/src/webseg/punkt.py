"""Unsupervised Punkt-style statistics: abbreviations, collocations, sentence starters.

Training runs two passes over tokenizer output.  The type pass counts
case-normalized types with and without a final period and classifies
abbreviation types by a scaled log-likelihood.  The token pass marks
first-stage sentence breaks (period-final non-abbreviations, ``?`` and ``!``)
and collects orthographic context, collocation and sentence-starter counts.
"""

from __future__ import annotations

import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from .corpus import Document
from .exceptions import CorpusFormatError, DegenerateCorpusError
from .tokenizer import ClassifiedToken, TokenClass, Tokenizer, default_tokenizer

logger = logging.getLogger(__name__)

ABBREV_THRESHOLD = 0.3
ABBREV_ALT_PROB = 0.99
COLLOCATION_THRESHOLD = 7.88
SENT_STARTER_THRESHOLD = 30.0
MIN_COLLOC_FREQ = 1

ORTHO_BEG_UC = 1 << 0
ORTHO_BEG_LC = 1 << 1
ORTHO_MID_UC = 1 << 2
ORTHO_MID_LC = 1 << 3
ORTHO_UC = ORTHO_BEG_UC | ORTHO_MID_UC
ORTHO_LC = ORTHO_BEG_LC | ORTHO_MID_LC

_ORTHO_FLAGS = {
    ("initial", "upper"): ORTHO_BEG_UC,
    ("initial", "lower"): ORTHO_BEG_LC,
    ("internal", "upper"): ORTHO_MID_UC,
    ("internal", "lower"): ORTHO_MID_LC,
}
_ORTHO_NAMES = (("BU", ORTHO_BEG_UC), ("BL", ORTHO_BEG_LC), ("MU", ORTHO_MID_UC), ("ML", ORTHO_MID_LC))

NUMBER_TYPE = "##number##"
_NUMERIC_RE = re.compile(r"^-?[.,]?\d[\d,.:\-]*\.?$")

FORMAT_VERSION = "webseg-punkt 1"


def normalize_type(surface: str) -> str:
    """Lowercased type with numbers collapsed; a final period is kept."""
    if _NUMERIC_RE.match(surface):
        return NUMBER_TYPE + ("." if surface.endswith(".") else "")
    return surface.lower()


def strip_period(typ: str) -> str:
    return typ[:-1] if typ.endswith(".") and len(typ) > 1 else typ


def first_case(surface: str) -> str:
    """``upper``/``lower`` from the first code point, ``none`` otherwise (digits included)."""
    ch = surface[:1]
    if ch.isupper():
        return "upper"
    if ch.islower():
        return "lower"
    return "none"


@dataclass(frozen=True)
class PunktModel:
    abbrev_types: FrozenSet[str] = frozenset()
    collocations: FrozenSet[Tuple[str, str]] = frozenset()
    sentence_starters: FrozenSet[str] = frozenset()
    ortho_context: Mapping[str, int] = field(default_factory=dict)
    type_counts: Mapping[str, int] = field(default_factory=dict)
    num_period_tokens: int = 0
    total_tokens: int = 0

    def __post_init__(self):
        if self.num_period_tokens < 0 or self.total_tokens < 0:
            raise ValueError("negative token counts")
        if self.num_period_tokens > self.total_tokens:
            raise ValueError("more period-final tokens than tokens")
        if any(c < 0 for c in self.type_counts.values()):
            raise ValueError("negative type count")
        if any(a.endswith(".") for a in self.abbrev_types):
            raise ValueError("abbreviation types must not carry a final period")

    def is_empty(self) -> bool:
        return self.total_tokens == 0

    def ortho(self, typ: str) -> int:
        return self.ortho_context.get(typ, 0)


# ---------------------------------------------------------------------------
# log-likelihoods


def _xlog(coef: float, p: float) -> float:
    return 0.0 if coef == 0 else coef * math.log(p)


def abbreviation_score(
    count_type: int,
    count_type_with_period: int,
    num_period_tokens: int,
    total_tokens: int,
    type_length: int,
    internal_periods: int,
) -> float:
    """Scaled log-likelihood that a type is an abbreviation (>= 0.3 means yes).

    ``count_type`` counts all occurrences of the type, with and without a
    final period; ``type_length`` is measured without the final period.
    """
    a, c = count_type_with_period, count_type
    if not 0 <= a <= c:
        raise ValueError("count_type_with_period must lie in [0, count_type]")
    if total_tokens <= 0:
        raise ValueError("total_tokens must be positive")
    p0 = num_period_tokens / total_tokens
    if p0 <= 0.0 or p0 >= 1.0:
        raise DegenerateCorpusError(f"period-token ratio {p0} leaves the log-likelihood undefined")
    if a == 0:
        return 0.0
    p1 = ABBREV_ALT_PROB
    ll = -2.0 * (_xlog(a, p0) + _xlog(c - a, 1.0 - p0) - _xlog(a, p1) - _xlog(c - a, 1.0 - p1))
    length = type_length - internal_periods
    f_length = math.exp(-length)
    f_periods = internal_periods + 1
    f_penalty = float(length) ** -(c - a) if length > 0 else 1.0
    return ll * f_length * f_periods * f_penalty


def dunning_log_likelihood(count_a: int, count_b: int, count_ab: int, n: int) -> float:
    """Two-way Dunning log-likelihood ratio for the association of a with b.

    ``count_a``/``count_b`` are unigram counts, ``count_ab`` the joint count,
    ``n`` the sample size.  Terms whose probability is 0 or 1 are dropped.
    """
    p = count_b / n
    p1 = count_ab / count_a
    p2 = (count_b - count_ab) / (n - count_a) if n > count_a else 1.0

    def binom(k, m, q):
        if q <= 0.0 or q >= 1.0:
            return 0.0
        return _xlog(k, q) + _xlog(m - k, 1.0 - q)

    null = binom(count_ab, count_a, p) + binom(count_b - count_ab, n - count_a, p)
    alt = binom(count_ab, count_a, p1) + binom(count_b - count_ab, n - count_a, p2)
    return -2.0 * (null - alt)


# ---------------------------------------------------------------------------
# training


@dataclass
class _AugToken:
    surface: str
    type: str
    period_final: bool
    parastart: bool
    cls: TokenClass
    sentbreak: bool = False
    abbr: bool = False
    ellipsis: bool = False

    @property
    def type_no_period(self) -> str:
        return strip_period(self.type)

    @property
    def type_no_sentperiod(self) -> str:
        return self.type_no_period if self.sentbreak else self.type

    @property
    def is_number(self) -> bool:
        return self.type.startswith(NUMBER_TYPE)

    @property
    def is_initial(self) -> bool:
        s = self.surface
        return len(s) == 2 and s[0].isalpha() and s[1] == "."

    @property
    def is_alpha(self) -> bool:
        return self.surface.isalpha()

    @property
    def is_non_punct(self) -> bool:
        return any(ch.isalpha() for ch in self.type) or self.is_number


def augment(tokens: Sequence[ClassifiedToken], paragraph_ids: Sequence[int]) -> List[_AugToken]:
    """Merge a word with an adjacent single period into one period-final unit."""
    out = []
    i = 0
    n = len(tokens)
    while i < n:
        tok, cls = tokens[i]
        parastart = i == 0 or paragraph_ids[i] != paragraph_ids[i - 1]
        surface = tok.surface
        nxt = tokens[i + 1] if i + 1 < n else None
        if (
            cls in (TokenClass.WORD, TokenClass.NUMBER)
            and not surface.endswith(".")
            and nxt is not None
            and nxt[0].surface == "."
            and nxt[0].start == tok.end
        ):
            surface += "."
            i += 1
        out.append(
            _AugToken(
                surface=surface,
                type=normalize_type(surface),
                period_final=surface.endswith("."),
                parastart=parastart,
                cls=cls,
            )
        )
        i += 1
    return out


class PunktTrainer:
    """Accumulates statistics over any number of documents, then ``finalize()``."""

    def __init__(self, tokenizer: Optional[Tokenizer] = None):
        self.tokenizer = tokenizer or default_tokenizer()
        self._docs: List[List[_AugToken]] = []
        self.type_counts: Counter = Counter()
        self.num_period_tokens = 0

    def add_document(self, document: Document) -> None:
        from .corpus import token_paragraphs

        classified = self.tokenizer.tokenize(document)
        paras = token_paragraphs(document, [t for t, _ in classified])
        aug = augment(classified, paras)
        for t in aug:
            self.type_counts[t.type] += 1
            self.num_period_tokens += t.period_final
        self._docs.append(aug)

    def add_text(self, raw_text: str, doc_id: str = "train") -> None:
        from .corpus import split_paragraphs

        self.add_document(Document(doc_id, raw_text, tuple(split_paragraphs(raw_text))))

    # -- type pass --------------------------------------------------------

    def _abbreviations(self) -> set:
        total = sum(self.type_counts.values())
        abbrevs = set()
        if not total or not self.num_period_tokens:
            return abbrevs
        for typ in self.type_counts:
            if not typ.endswith(".") or typ.startswith(NUMBER_TYPE):
                continue
            base = typ[:-1]
            if not any(ch.isalpha() for ch in base):
                continue
            with_period = self.type_counts[typ]
            without = self.type_counts.get(base, 0)
            internal = base.count(".")
            try:
                score = abbreviation_score(
                    with_period + without, with_period, self.num_period_tokens, total,
                    len(base), internal,
                )
            except DegenerateCorpusError:
                logger.warning("every token is period-final; abbreviation detection skipped")
                return set()
            if score >= ABBREV_THRESHOLD:
                abbrevs.add(base)
        return abbrevs

    # -- token pass -------------------------------------------------------

    @staticmethod
    def _first_pass(tokens: List[_AugToken], abbrevs: set) -> None:
        for t in tokens:
            if t.cls is TokenClass.PUNCT_RUN or t.surface == "…":
                if "." in t.surface or "…" in t.surface:
                    t.ellipsis = True
                else:
                    t.sentbreak = True
            elif t.cls is TokenClass.TERMINAL_PUNCT and t.surface in "?!":
                t.sentbreak = True
            elif t.period_final:
                if t.type_no_period in abbrevs or t.cls is TokenClass.ABBREVIATION:
                    t.abbr = True
                else:
                    t.sentbreak = True

    @staticmethod
    def _ortho_data(tokens: List[_AugToken], ortho: Dict[str, int]) -> None:
        context = "internal"
        for t in tokens:
            if t.parastart and context != "unknown":
                context = "initial"
            flag = _ORTHO_FLAGS.get((context, first_case(t.surface)), 0)
            if flag:
                typ = t.type_no_sentperiod
                ortho[typ] = ortho.get(typ, 0) | flag
            if t.sentbreak:
                context = "unknown" if (t.is_number or t.is_initial) else "initial"
            elif t.ellipsis or t.abbr:
                context = "unknown"
            elif t.cls in (TokenClass.EMOTICON, TokenClass.SYMBOL, TokenClass.URL):
                pass
            else:
                context = "internal"

    def finalize(self) -> PunktModel:
        total = sum(self.type_counts.values())
        if not total:
            return PunktModel()
        abbrevs = self._abbreviations()
        ortho: Dict[str, int] = {}
        colloc_counts: Counter = Counter()
        starter_counts: Counter = Counter()
        sentbreaks = 0
        for doc in self._docs:
            self._first_pass(doc, abbrevs)
            self._ortho_data(doc, ortho)
            sentbreaks += sum(t.sentbreak for t in doc)
            for t1, t2 in zip(doc, doc[1:]):
                if not t1.period_final and not t1.sentbreak:
                    continue
                if (
                    t1.sentbreak
                    and not (t1.is_number or t1.is_initial)
                    and t2.is_alpha
                ):
                    starter_counts[t2.type] += 1
                if (
                    t1.period_final
                    and t1.sentbreak
                    and (t1.is_number or t1.is_initial)
                    and t1.is_non_punct
                    and t2.is_non_punct
                ):
                    colloc_counts[(t1.type_no_period, t2.type_no_sentperiod)] += 1

        def count(typ):
            return self.type_counts.get(typ, 0) + self.type_counts.get(typ + ".", 0)

        starters = set()
        for typ, at_break in starter_counts.items():
            typ_count = count(typ)
            if not sentbreaks or typ_count < at_break:
                continue
            ll = dunning_log_likelihood(sentbreaks, typ_count, at_break, total)
            if ll >= SENT_STARTER_THRESHOLD and total / sentbreaks > typ_count / at_break:
                starters.add(typ)

        collocs = set()
        for (typ1, typ2), col_count in colloc_counts.items():
            if typ2 in starters:
                continue
            c1, c2 = count(typ1), count(typ2)
            if c1 > 1 and c2 > 1 and MIN_COLLOC_FREQ < col_count <= min(c1, c2):
                ll = dunning_log_likelihood(c1, c2, col_count, total)
                if ll >= COLLOCATION_THRESHOLD and total / c1 > c2 / col_count:
                    collocs.add((typ1, typ2))

        return PunktModel(
            abbrev_types=frozenset(abbrevs),
            collocations=frozenset(collocs),
            sentence_starters=frozenset(starters),
            ortho_context=dict(ortho),
            type_counts=dict(self.type_counts),
            num_period_tokens=self.num_period_tokens,
            total_tokens=total,
        )


def train(raw_text: str, tokenizer: Optional[Tokenizer] = None) -> PunktModel:
    """Train a model on raw text (blank lines separate paragraphs)."""
    trainer = PunktTrainer(tokenizer)
    trainer.add_text(raw_text)
    return trainer.finalize()


def train_documents(documents: Iterable[Document], tokenizer: Optional[Tokenizer] = None) -> PunktModel:
    trainer = PunktTrainer(tokenizer)
    for doc in documents:
        trainer.add_document(doc)
    return trainer.finalize()


# ---------------------------------------------------------------------------
# serialization


def dumps(model: PunktModel) -> str:
    lines = [f"# {FORMAT_VERSION}", "[totals]",
             f"num_period_tokens\t{model.num_period_tokens}",
             f"total_tokens\t{model.total_tokens}", "[abbrev]"]
    lines += sorted(model.abbrev_types)
    lines.append("[colloc]")
    lines += [f"{a}\t{b}" for a, b in sorted(model.collocations)]
    lines.append("[starter]")
    lines += sorted(model.sentence_starters)
    lines.append("[ortho]")
    for typ in sorted(model.ortho_context):
        flags = model.ortho_context[typ]
        names = ",".join(name for name, bit in _ORTHO_NAMES if flags & bit)
        lines.append(f"{typ}\t{names}")
    lines.append("[counts]")
    lines += [f"{typ}\t{model.type_counts[typ]}" for typ in sorted(model.type_counts)]
    return "\n".join(lines) + "\n"


_SECTIONS = ("[totals]", "[abbrev]", "[colloc]", "[starter]", "[ortho]", "[counts]")


def loads(text: str) -> PunktModel:
    lines = text.split("\n")
    if not lines or lines[0].strip() != f"# {FORMAT_VERSION}":
        raise CorpusFormatError(f"not a model file (expected header '# {FORMAT_VERSION}')", line=1)
    section = None
    totals: Dict[str, int] = {}
    abbrev, starters = set(), set()
    collocs = set()
    ortho: Dict[str, int] = {}
    counts: Dict[str, int] = {}
    bits = dict(_ORTHO_NAMES)
    for lineno, line in enumerate(lines[1:], 2):
        if not line:
            continue
        if line in _SECTIONS:
            section = line
            continue
        fields = line.split("\t")
        try:
            if section == "[abbrev]" and len(fields) == 1:
                abbrev.add(line)
            elif section == "[starter]" and len(fields) == 1:
                starters.add(line)
            elif section == "[colloc]" and len(fields) == 2:
                collocs.add((fields[0], fields[1]))
            elif section == "[ortho]" and len(fields) == 2:
                flags = 0
                for name in filter(None, fields[1].split(",")):
                    flags |= bits[name]
                ortho[fields[0]] = flags
            elif section == "[counts]" and len(fields) == 2:
                counts[fields[0]] = int(fields[1])
            elif section == "[totals]" and len(fields) == 2:
                totals[fields[0]] = int(fields[1])
            else:
                raise ValueError(line)
        except (KeyError, ValueError):
            raise CorpusFormatError(f"bad entry {line!r} in section {section}", line=lineno) from None
    try:
        return PunktModel(
            abbrev_types=frozenset(abbrev),
            collocations=frozenset(collocs),
            sentence_starters=frozenset(starters),
            ortho_context=ortho,
            type_counts=counts,
            num_period_tokens=totals.get("num_period_tokens", 0),
            total_tokens=totals.get("total_tokens", 0),
        )
    except ValueError as exc:
        raise CorpusFormatError(f"inconsistent model: {exc}") from None


def save(model: PunktModel, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(model))


def load(path) -> PunktModel:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())
