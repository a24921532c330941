"""Sentence boundary decisions over tokenizer output.

Candidates are the ends of TerminalPunct, PunctRun and Abbreviation tokens
and of any token whose surface ends in ``.?!``.  Each candidate is decided
from the token class, the next token and the trained Punkt statistics; the
web rules (paragraph ends, emoticon attachment, glued sentences) are applied
on top.  Only orthographic boundaries are produced.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import List, Optional, Sequence

from .corpus import (
    Boundary,
    BoundaryTier,
    Document,
    Segmentation,
    Span,
    Token,
)
from .exceptions import ConsistencyError
from .punkt import (
    ORTHO_BEG_LC,
    ORTHO_LC,
    ORTHO_MID_UC,
    ORTHO_UC,
    PunktModel,
    first_case,
    normalize_type,
    strip_period,
)
from .tokenizer import ClassifiedToken, TokenClass, Tokenizer, default_tokenizer


class PunctRunPolicy(enum.Enum):
    ALWAYS = "always"
    CAPITALIZED_NEXT = "capitalized-next"
    NEVER = "never"


class EmoticonAttach(enum.Enum):
    PREVIOUS = "previous"
    OWN_SENTENCE = "own-sentence"


@dataclass(frozen=True)
class WebRuleConfig:
    force_paragraph_boundary: bool = True
    punct_run_boundary_policy: PunctRunPolicy = PunctRunPolicy.CAPITALIZED_NEXT
    emoticon_attach: EmoticonAttach = EmoticonAttach.PREVIOUS
    glued_split: bool = True


class Ortho(enum.Enum):
    START = "start"
    NOT_START = "not-start"
    UNDECIDED = "undecided"


def ortho_heuristic(surface: str, model: PunktModel) -> Ortho:
    """Does the token look like the first word of a sentence, judging by case statistics?"""
    case = first_case(surface)
    if case == "none":
        return Ortho.UNDECIDED
    flags = model.ortho(strip_period(normalize_type(surface)))
    if case == "upper":
        if flags & ORTHO_LC and not flags & ORTHO_MID_UC:
            return Ortho.START
        return Ortho.UNDECIDED
    if flags & ORTHO_UC or not flags & ORTHO_BEG_LC:
        return Ortho.NOT_START
    return Ortho.UNDECIDED


def _is_candidate(cls: TokenClass, surface: str) -> bool:
    return cls in (
        TokenClass.TERMINAL_PUNCT, TokenClass.PUNCT_RUN, TokenClass.ABBREVIATION
    ) or surface[-1:] in ".?!"


def _paragraph_ids(tokens: Sequence[Token], paragraphs: Sequence[Span]) -> List[int]:
    ids = []
    p = 0
    prev_end = -1
    for tok in tokens:
        if tok.start < prev_end:
            raise ConsistencyError(f"tokens overlap or are unordered at offset {tok.start}")
        prev_end = tok.end
        if not paragraphs:
            ids.append(0)
            continue
        while p < len(paragraphs) and paragraphs[p][1] <= tok.start:
            p += 1
        if p == len(paragraphs) or tok.start < paragraphs[p][0] or tok.end > paragraphs[p][1]:
            raise ConsistencyError(f"token {tok.surface!r} at {tok.start} lies outside every paragraph")
        ids.append(p)
    return ids


def _previous_type(tokens: Sequence[ClassifiedToken], i: int) -> Optional[str]:
    """Type of the word that a period at ``i`` closes, if it is glued to it."""
    tok = tokens[i][0]
    if tok.surface.endswith(".") and len(tok.surface) > 1:
        return strip_period(normalize_type(tok.surface))
    if i > 0 and tokens[i - 1][0].end == tok.start:
        return normalize_type(tokens[i - 1][0].surface)
    return None


def _decide(tokens: Sequence[ClassifiedToken], i: int, model: PunktModel, config: WebRuleConfig) -> bool:
    tok, cls = tokens[i]
    nxt, nxt_cls = tokens[i + 1]
    glued = nxt.start == tok.end
    if glued and not config.glued_split:
        return False
    next_type = strip_period(normalize_type(nxt.surface))
    ortho = ortho_heuristic(nxt.surface, model)
    upper_next = first_case(nxt.surface) == "upper"
    prev_type = _previous_type(tokens, i)

    is_abbrev = cls is TokenClass.ABBREVIATION or (
        tok.surface == "." and prev_type is not None and prev_type in model.abbrev_types
    ) or (
        cls in (TokenClass.WORD,) and tok.surface.endswith(".")
        and strip_period(tok.surface.lower()) in model.abbrev_types
    )
    if is_abbrev:
        return next_type in model.sentence_starters or ortho is Ortho.START

    if cls is TokenClass.PUNCT_RUN or tok.surface == "…":
        policy = config.punct_run_boundary_policy
        if policy is PunctRunPolicy.ALWAYS:
            return True
        if policy is PunctRunPolicy.NEVER:
            return False
        return upper_next or ortho is Ortho.START

    if glued and upper_next and cls is TokenClass.TERMINAL_PUNCT and prev_type is not None:
        # word.Next with no space: the glued-sentence rule wins over collocations
        return True

    if prev_type is not None and (prev_type, next_type) in model.collocations:
        return False
    if ortho is Ortho.NOT_START:
        return False
    if cls is TokenClass.NUMBER or (prev_type or "").startswith("##number##") and tok.surface == ".":
        # ordinal or number-final period: needs positive evidence of a new sentence
        return ortho is Ortho.START or upper_next or next_type in model.sentence_starters
    return True


def segment(
    tokens: Sequence[ClassifiedToken],
    paragraphs: Sequence[Span],
    model: Optional[PunktModel] = None,
    config: Optional[WebRuleConfig] = None,
    doc_id: str = "",
) -> Segmentation:
    """Predict orthographic sentence boundaries for one tokenized document."""
    model = model or PunktModel()
    config = config or WebRuleConfig()
    toks = [t for t, _ in tokens]
    para = _paragraph_ids(toks, paragraphs)
    n = len(tokens)
    cuts = set()
    for i in range(n - 1):
        tok, cls = tokens[i]
        if _is_candidate(cls, tok.surface) and _decide(tokens, i, model, config):
            cuts.add(i)
    if n:
        cuts.add(n - 1)
    if config.force_paragraph_boundary:
        cuts.update(i for i in range(n - 1) if para[i + 1] != para[i])
    if config.emoticon_attach is EmoticonAttach.PREVIOUS:
        cuts = _attach_emoticons(tokens, para, cuts)
    return Segmentation(
        doc_id, tuple(Boundary(toks[i].end, BoundaryTier.ORTHOGRAPHIC) for i in sorted(cuts))
    )


def _attach_emoticons(tokens, para, cuts):
    """Shift a cut that precedes an emoticon to after the emoticon run (same paragraph only)."""
    n = len(tokens)
    result = set()
    for i in sorted(cuts):
        j = i
        while j + 1 < n and tokens[j + 1][1] is TokenClass.EMOTICON and para[j + 1] == para[j]:
            j += 1
        result.add(j)
    return result


def segment_document(
    document: Document,
    model: Optional[PunktModel] = None,
    config: Optional[WebRuleConfig] = None,
    tokenizer: Optional[Tokenizer] = None,
    ignore_paragraphs: bool = False,
):
    """Tokenize and segment a document; returns ``(tokens, segmentation)``.

    Abbreviations learned by the model extend the tokenizer lexicon.  With
    ``ignore_paragraphs`` the paragraph structure is merged into a single
    paragraph before segmentation.
    """
    tokenizer = tokenizer or default_tokenizer()
    if model is not None and model.abbrev_types:
        tokenizer = tokenizer.with_abbreviations(model.abbrev_types)
    doc = document.merged() if ignore_paragraphs else document
    classified = tokenizer.tokenize(document)
    seg = segment(classified, doc.paragraphs, model, config, doc_id=document.id)
    return classified, seg
