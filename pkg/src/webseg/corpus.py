"""Documents, tokens, tiered sentence boundaries and the plain-text/standoff I/O.

All offsets are code-point offsets into ``Document.text``.  A sentence
boundary is stored as the end offset of the token that closes the sentence,
so segmentations survive re-tokenization as long as that token end survives.
"""

from __future__ import annotations

import bisect
import enum
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .exceptions import (
    AlignmentError,
    AnnotationReferenceError,
    ConsistencyError,
    CorpusFormatError,
)

logger = logging.getLogger(__name__)

Span = Tuple[int, int]


class BoundaryTier(enum.Enum):
    ORTHOGRAPHIC = "orthographic"
    SYNTACTIC = "syntactic"
    BOTH = "both"

    @property
    def is_orthographic(self) -> bool:
        return self is not BoundaryTier.SYNTACTIC

    @property
    def is_syntactic(self) -> bool:
        return self is not BoundaryTier.ORTHOGRAPHIC

    @classmethod
    def parse(cls, value: str) -> "BoundaryTier":
        try:
            return cls(value.strip().lower())
        except ValueError:
            raise CorpusFormatError(f"unknown boundary tier {value!r}") from None

    @classmethod
    def combine(cls, orthographic: bool, syntactic: bool) -> Optional["BoundaryTier"]:
        if orthographic and syntactic:
            return cls.BOTH
        if orthographic:
            return cls.ORTHOGRAPHIC
        if syntactic:
            return cls.SYNTACTIC
        return None


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    paragraphs: Tuple[Span, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "paragraphs", tuple(tuple(p) for p in self.paragraphs))
        prev_end = 0
        for start, end in self.paragraphs:
            if not (prev_end <= start < end <= len(self.text)):
                raise ConsistencyError(
                    f"document {self.id!r}: bad paragraph span ({start}, {end})"
                )
            if self.text[prev_end:start].strip():
                raise ConsistencyError(
                    f"document {self.id!r}: text outside paragraphs before offset {start}"
                )
            prev_end = end
        if self.text[prev_end:].strip():
            raise ConsistencyError(
                f"document {self.id!r}: text outside paragraphs after offset {prev_end}"
            )

    def paragraph_index(self, offset: int) -> int:
        """Index of the paragraph containing ``offset``, or -1."""
        starts = [p[0] for p in self.paragraphs]
        i = bisect.bisect_right(starts, offset) - 1
        if i >= 0 and offset < self.paragraphs[i][1]:
            return i
        return -1

    def merged(self) -> "Document":
        """Same text with all paragraph information erased (one paragraph)."""
        if not self.paragraphs:
            return self
        return Document(self.id, self.text, ((self.paragraphs[0][0], self.paragraphs[-1][1]),))


@dataclass(frozen=True)
class Token:
    start: int
    end: int
    surface: str

    def __post_init__(self):
        if self.end - self.start != len(self.surface) or not self.surface:
            raise ConsistencyError(f"token {self.surface!r} has span ({self.start}, {self.end})")
        if any(ch.isspace() for ch in self.surface):
            raise ConsistencyError(f"token {self.surface!r} contains whitespace")

    @property
    def span(self) -> Span:
        return (self.start, self.end)


@dataclass(frozen=True)
class Boundary:
    offset: int
    tier: BoundaryTier = BoundaryTier.ORTHOGRAPHIC


@dataclass(frozen=True)
class Segmentation:
    doc_id: str
    boundaries: Tuple[Boundary, ...] = ()

    def __post_init__(self):
        bounds = tuple(sorted(self.boundaries, key=lambda b: b.offset))
        for a, b in zip(bounds, bounds[1:]):
            if a.offset == b.offset:
                raise ConsistencyError(
                    f"document {self.doc_id!r}: two boundaries at offset {a.offset}"
                )
        object.__setattr__(self, "boundaries", bounds)

    @classmethod
    def from_offsets(cls, doc_id, offsets, tier=BoundaryTier.ORTHOGRAPHIC):
        return cls(doc_id, tuple(Boundary(o, tier) for o in sorted(set(offsets))))

    @property
    def offsets(self) -> List[int]:
        return [b.offset for b in self.boundaries]

    def tiers(self) -> Dict[int, BoundaryTier]:
        return {b.offset: b.tier for b in self.boundaries}

    def filter(self, keep) -> "Segmentation":
        """Keep boundaries whose tier satisfies ``keep(tier)``."""
        return Segmentation(self.doc_id, tuple(b for b in self.boundaries if keep(b.tier)))

    def orthographic(self) -> "Segmentation":
        return self.filter(lambda t: t.is_orthographic)

    def validate(self, tokens: Sequence[Token]) -> None:
        ends = {t.end for t in tokens}
        for b in self.boundaries:
            if b.offset not in ends:
                raise ConsistencyError(
                    f"document {self.doc_id!r}: boundary {b.offset} is not a token end"
                )

    def sentences(self, tokens: Sequence[Token]) -> List[Tuple[int, int]]:
        """Token index ranges ``[i, j)`` of the sentences induced on ``tokens``.

        Tokens after the last boundary form a final sentence of their own.
        """
        self.validate(tokens)
        cuts = set(self.offsets)
        result = []
        begin = 0
        for i, tok in enumerate(tokens):
            if tok.end in cuts:
                result.append((begin, i + 1))
                begin = i + 1
        if begin < len(tokens):
            result.append((begin, len(tokens)))
        return result

    def closed(self, tokens: Sequence[Token], tier=BoundaryTier.ORTHOGRAPHIC) -> "Segmentation":
        """Add a boundary at the final token end if it is missing."""
        if not tokens or tokens[-1].end in self.tiers():
            return self
        return Segmentation(self.doc_id, self.boundaries + (Boundary(tokens[-1].end, tier),))


@dataclass(frozen=True)
class AnnotationSet:
    annotator_id: str
    segmentations: Mapping[str, Segmentation] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# token / paragraph bookkeeping


def token_paragraphs(document: Document, tokens: Sequence[Token]) -> List[int]:
    """Paragraph index of every token; raises if a token leaves its paragraph."""
    result = []
    prev_end = -1
    paras = document.paragraphs
    p = 0
    for tok in tokens:
        if tok.start < prev_end:
            raise ConsistencyError(f"document {document.id!r}: tokens overlap at {tok.start}")
        if document.text[tok.start:tok.end] != tok.surface:
            raise ConsistencyError(
                f"document {document.id!r}: token {tok.surface!r} does not match text at {tok.start}"
            )
        while p < len(paras) and paras[p][1] <= tok.start:
            p += 1
        if p == len(paras) or tok.start < paras[p][0] or tok.end > paras[p][1]:
            raise ConsistencyError(
                f"document {document.id!r}: token {tok.surface!r} at {tok.start} is outside a paragraph"
            )
        result.append(p)
        prev_end = tok.end
    return result


def paragraph_final_offsets(document: Document, tokens: Sequence[Token]) -> List[int]:
    """End offsets of the last token of every non-empty paragraph."""
    paras = token_paragraphs(document, tokens)
    return [
        tok.end
        for i, tok in enumerate(tokens)
        if i + 1 == len(tokens) or paras[i + 1] != paras[i]
    ]


def force_paragraph_ends(
    segmentation: Segmentation, document: Document, tokens: Sequence[Token]
) -> Segmentation:
    """Make every paragraph-final token end a boundary.

    A missing paragraph end is added as Orthographic; an existing
    syntactic-only one is promoted to Both.
    """
    tiers = segmentation.tiers()
    for offset in paragraph_final_offsets(document, tokens):
        tier = tiers.get(offset)
        if tier is None:
            tiers[offset] = BoundaryTier.ORTHOGRAPHIC
        elif tier is BoundaryTier.SYNTACTIC:
            tiers[offset] = BoundaryTier.BOTH
    return Segmentation(segmentation.doc_id, tuple(Boundary(o, t) for o, t in tiers.items()))


def nonspace_offsets(tokens: Sequence[Token]) -> List[Span]:
    """Token spans re-expressed in the whitespace-free character sequence."""
    result = []
    pos = 0
    for tok in tokens:
        result.append((pos, pos + len(tok.surface)))
        pos += len(tok.surface)
    return result


def realign(
    tokens: Sequence[Token],
    segmentation: Optional[Segmentation],
    target: Document,
) -> Tuple[List[Token], Optional[Segmentation]]:
    """Move tokens (and boundaries) onto ``target.text``.

    Both texts must have the same non-whitespace character sequence; only
    whitespace may differ.  Tokens are re-anchored by their position in that
    sequence.
    """
    positions = [i for i, ch in enumerate(target.text) if not ch.isspace()]
    joined = "".join(t.surface for t in tokens)
    target_chars = "".join(target.text[i] for i in positions)
    if joined != target_chars:
        raise AlignmentError(_first_difference(joined, target_chars, target.id))
    moved = []
    end_map = {}
    pos = 0
    for tok in tokens:
        n = len(tok.surface)
        start = positions[pos]
        end = positions[pos + n - 1] + 1
        if end - start != n:
            raise AlignmentError(
                f"document {target.id!r}: token {tok.surface!r} spans whitespace in target text"
            )
        moved.append(Token(start, end, tok.surface))
        end_map[tok.end] = end
        pos += n
    if segmentation is None:
        return moved, None
    try:
        bounds = tuple(Boundary(end_map[b.offset], b.tier) for b in segmentation.boundaries)
    except KeyError as exc:
        raise ConsistencyError(f"boundary {exc.args[0]} is not a token end") from None
    return moved, Segmentation(target.id, bounds)


def _first_difference(a: str, b: str, doc_id: str) -> str:
    for i, (x, y) in enumerate(zip(a, b)):
        if x != y:
            return (
                f"document {doc_id!r}: non-whitespace texts differ at character {i}: "
                f"{a[max(0, i - 10):i + 10]!r} vs {b[max(0, i - 10):i + 10]!r}"
            )
    return f"document {doc_id!r}: non-whitespace texts differ in length ({len(a)} vs {len(b)})"


# ---------------------------------------------------------------------------
# plain-text corpus


def split_paragraphs(text: str) -> List[Span]:
    """Paragraph spans separated by blank lines, trimmed of outer whitespace."""
    spans = []
    start = end = None
    pos = 0
    for line in text.split("\n"):
        if line.strip():
            lead = len(line) - len(line.lstrip())
            trail = len(line.rstrip())
            if start is None:
                start = pos + lead
            end = pos + trail
        elif start is not None:
            spans.append((start, end))
            start = None
        pos += len(line) + 1
    if start is not None:
        spans.append((start, end))
    return spans


def read_document(path, doc_id: Optional[str] = None) -> Document:
    path = Path(path)
    data = path.read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CorpusFormatError(f"invalid UTF-8 ({exc.reason})", path=path, position=exc.start) from None
    if text.startswith("﻿"):
        text = text[1:]
    return Document(doc_id or path.stem, text, tuple(split_paragraphs(text)))


def load_corpus(path) -> List[Document]:
    """Load one document per file of a directory (or a single file).

    Document ids are file stems; documents are ordered by id.
    """
    path = Path(path)
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.is_file() and not p.name.startswith("."))
    elif path.is_file():
        files = [path]
    else:
        raise FileNotFoundError(f"no such corpus: {path}")
    docs = [read_document(p) for p in files]
    ids = [d.id for d in docs]
    if len(set(ids)) != len(ids):
        raise CorpusFormatError("duplicate document ids", path=path)
    return sorted(docs, key=lambda d: d.id)


def write_document(document: Document, path) -> None:
    Path(path).write_text(document.text, encoding="utf-8")


# ---------------------------------------------------------------------------
# standoff annotations


def parse_annotations(
    lines: Iterable[str],
    doc_ids: Optional[Iterable[str]] = None,
    source=None,
) -> List[AnnotationSet]:
    """Parse ``annotator<TAB>doc<TAB>offset<TAB>tier`` records.

    Annotation sets are returned in order of first appearance.
    """
    known = set(doc_ids) if doc_ids is not None else None
    records: Dict[str, Dict[str, Dict[int, BoundaryTier]]] = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise CorpusFormatError(
                f"expected 4 tab-separated fields, got {len(fields)}", path=source, line=lineno
            )
        annotator, doc_id, offset_str, tier_str = (f.strip() for f in fields)
        try:
            offset = int(offset_str)
        except ValueError:
            raise CorpusFormatError(f"bad offset {offset_str!r}", path=source, line=lineno) from None
        if offset < 0:
            raise CorpusFormatError(f"negative offset {offset}", path=source, line=lineno)
        try:
            tier = BoundaryTier.parse(tier_str)
        except CorpusFormatError as exc:
            raise CorpusFormatError(str(exc), path=source, line=lineno) from None
        if known is not None and doc_id not in known:
            raise AnnotationReferenceError(
                f"{source or '<annotations>'}:line {lineno}: unknown document {doc_id!r}"
            )
        per_doc = records.setdefault(annotator, {}).setdefault(doc_id, {})
        if offset in per_doc:
            raise CorpusFormatError(
                f"duplicate boundary ({annotator}, {doc_id}, {offset})", path=source, line=lineno
            )
        per_doc[offset] = tier
    return [
        AnnotationSet(
            annotator,
            {
                doc_id: Segmentation(doc_id, tuple(Boundary(o, t) for o, t in bounds.items()))
                for doc_id, bounds in docs.items()
            },
        )
        for annotator, docs in records.items()
    ]


def load_annotations(path, documents: Optional[Iterable[Document]] = None) -> List[AnnotationSet]:
    """Read a standoff annotation file; doc ids are checked against ``documents``."""
    doc_ids = None if documents is None else [d.id for d in documents]
    with open(path, encoding="utf-8") as fh:
        return parse_annotations(fh, doc_ids, source=path)


def validate_annotations(
    annotations: Iterable[AnnotationSet], tokens_by_doc: Mapping[str, Sequence[Token]]
) -> None:
    """Check that every annotated boundary coincides with a token end."""
    for ann in annotations:
        for doc_id, seg in ann.segmentations.items():
            if doc_id not in tokens_by_doc:
                raise AnnotationReferenceError(
                    f"annotator {ann.annotator_id!r}: unknown document {doc_id!r}"
                )
            try:
                seg.validate(tokens_by_doc[doc_id])
            except ConsistencyError as exc:
                raise ConsistencyError(f"annotator {ann.annotator_id!r}: {exc}") from None


def format_annotations(annotations: Iterable[AnnotationSet]) -> str:
    lines = ["# annotator\tdoc\toffset\ttier"]
    for ann in annotations:
        for doc_id in sorted(ann.segmentations):
            for b in ann.segmentations[doc_id].boundaries:
                lines.append(f"{ann.annotator_id}\t{doc_id}\t{b.offset}\t{b.tier.value}")
    return "\n".join(lines) + "\n"


def format_segmentations(segmentations: Iterable[Segmentation], annotator_id: str = "gold") -> str:
    """Standoff records for a set of segmentations under one annotator id."""
    return format_annotations(
        [AnnotationSet(annotator_id, {s.doc_id: s for s in segmentations})]
    )
