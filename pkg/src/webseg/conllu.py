"""CoNLL-U export and import of tokenized, sentence-segmented documents.

Only ID, FORM and MISC (``SpaceAfter=No``) are produced; every other column
is ``_``.  Sentence tiers travel in a ``# sent_type`` comment, paragraph
starts in ``# newpar``.  Imported text is rebuilt from the forms: tokens are
joined by one space (none after ``SpaceAfter=No``) and paragraphs by a
blank line, so a round trip normalizes whitespace but keeps every token,
sentence and tier.
"""

from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

from .corpus import (
    Boundary,
    BoundaryTier,
    Document,
    Segmentation,
    Token,
    token_paragraphs,
)
from .exceptions import ConsistencyError, CorpusFormatError

PARAGRAPH_SEPARATOR = "\n\n"


def export_conllu(document: Document, tokens: Sequence[Token], segmentation: Segmentation) -> str:
    """Render one document; an empty document renders as an empty string."""
    tokens = [t[0] if isinstance(t, tuple) else t for t in tokens]
    if not tokens:
        return ""
    if segmentation.doc_id and segmentation.doc_id != document.id:
        raise ConsistencyError(
            f"segmentation is for {segmentation.doc_id!r}, document is {document.id!r}"
        )
    paras = token_paragraphs(document, tokens)
    try:
        sentences = segmentation.sentences(tokens)
    except ConsistencyError as exc:
        raise ConsistencyError(f"document {document.id!r}: {exc}") from None
    tiers = segmentation.tiers()
    out = [f"# newdoc id = {document.id}"]
    for n, (i, j) in enumerate(sentences, 1):
        if len(set(paras[i:j])) != 1:
            raise ConsistencyError(
                f"document {document.id!r}: sentence {n} crosses a paragraph border "
                f"(paragraph ends must be boundaries)"
            )
        if i == 0 or paras[i] != paras[i - 1]:
            out.append("# newpar")
        out.append(f"# sent_id = {document.id}-{n}")
        text = ""
        for k in range(i, j):
            text += tokens[k].surface
            if k + 1 < j and tokens[k + 1].start != tokens[k].end:
                text += " "
        out.append(f"# text = {text}")
        tier = tiers.get(tokens[j - 1].end, BoundaryTier.ORTHOGRAPHIC)
        out.append(f"# sent_type = {tier.value}")
        for k in range(i, j):
            glued = k + 1 < len(tokens) and tokens[k + 1].start == tokens[k].end
            misc = "SpaceAfter=No" if glued else "_"
            out.append(f"{k - i + 1}\t{tokens[k].surface}\t_\t_\t_\t_\t_\t_\t_\t{misc}")
        out.append("")
    return "\n".join(out) + "\n"


def export_corpus(items) -> str:
    """Concatenate exports of ``(document, tokens, segmentation)`` triples."""
    return "".join(export_conllu(d, t, s) for d, t, s in items)


class _Builder:
    def __init__(self, doc_id: str):
        self.doc_id = doc_id
        self.text = ""
        self.tokens: List[Token] = []
        self.paragraphs: List[Tuple[int, int]] = []
        self.boundaries: List[Boundary] = []
        self.space_pending = False
        self.para_open = False

    def start_paragraph(self):
        if self.para_open and self.tokens:
            self.paragraphs[-1] = (self.paragraphs[-1][0], self.tokens[-1].end)
            self.text += PARAGRAPH_SEPARATOR
            self.space_pending = False
        self.para_open = False

    def add_token(self, form: str, space_after: bool, lineno: int):
        if not form or any(ch.isspace() for ch in form):
            raise CorpusFormatError(f"FORM {form!r} is empty or contains whitespace", line=lineno)
        if not self.para_open:
            self.paragraphs.append((len(self.text), -1))
            self.para_open = True
        elif self.space_pending:
            self.text += " "
        start = len(self.text)
        self.text += form
        self.tokens.append(Token(start, len(self.text), form))
        self.space_pending = space_after

    def end_sentence(self, tier: BoundaryTier):
        if self.tokens and (not self.boundaries or self.boundaries[-1].offset != self.tokens[-1].end):
            self.boundaries.append(Boundary(self.tokens[-1].end, tier))

    def finish(self):
        if self.para_open and self.tokens:
            self.paragraphs[-1] = (self.paragraphs[-1][0], self.tokens[-1].end)
        paras = [p for p in self.paragraphs if p[1] > p[0]]
        doc = Document(self.doc_id, self.text, tuple(paras))
        return doc, self.tokens, Segmentation(self.doc_id, tuple(self.boundaries))


def _space_after(misc: str) -> bool:
    return "SpaceAfter=No" not in misc.split("|")


def import_conllu_corpus(text: str, default_id: str = "doc") -> List[Tuple[Document, List[Token], Segmentation]]:
    """Parse CoNLL-U into one ``(Document, tokens, Segmentation)`` per ``# newdoc``.

    Multiword range lines (``1-2``) are skipped; their words are glued
    together and the range's SpaceAfter applies to the last word.  Empty
    nodes (``1.1``) are ignored.
    """
    docs = []
    builder: Optional[_Builder] = None
    sent_tokens = 0
    tier = BoundaryTier.ORTHOGRAPHIC
    newpar = False
    range_end = 0
    range_space = True
    sentence_open = False

    def close_sentence():
        nonlocal sent_tokens, tier, sentence_open
        if builder is not None and sent_tokens:
            builder.end_sentence(tier)
        sent_tokens = 0
        tier = BoundaryTier.ORTHOGRAPHIC
        sentence_open = False

    for lineno, raw in enumerate(text.split("\n"), 1):
        line = raw.rstrip("\r")
        if not line.strip():
            close_sentence()
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            key, _, value = body.partition("=")
            key, value = key.strip(), value.strip()
            if key in ("newdoc", "newdoc id"):
                close_sentence()
                if builder is not None and builder.tokens:
                    docs.append(builder.finish())
                builder = _Builder(value or f"{default_id}{len(docs) + 1}")
                newpar = True
            elif key in ("newpar", "newpar id"):
                newpar = True
            elif key == "sent_type":
                try:
                    tier = BoundaryTier.parse(value)
                except CorpusFormatError:
                    raise CorpusFormatError(f"unknown sent_type {value!r}", line=lineno) from None
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise CorpusFormatError(f"expected 10 tab-separated columns, got {len(cols)}", line=lineno)
        tok_id = cols[0]
        if builder is None:
            builder = _Builder(default_id if not docs else f"{default_id}{len(docs) + 1}")
            newpar = True
        if "-" in tok_id:
            try:
                lo, hi = (int(x) for x in tok_id.split("-"))
            except ValueError:
                raise CorpusFormatError(f"bad range ID {tok_id!r}", line=lineno) from None
            if hi < lo:
                raise CorpusFormatError(f"bad range ID {tok_id!r}", line=lineno)
            range_end = hi
            range_space = _space_after(cols[9])
            continue
        if "." in tok_id:
            continue
        try:
            word_id = int(tok_id)
        except ValueError:
            raise CorpusFormatError(f"bad token ID {tok_id!r}", line=lineno) from None
        if word_id < 1:
            raise CorpusFormatError(f"bad token ID {tok_id!r}", line=lineno)
        if newpar and not sentence_open:
            builder.start_paragraph()
            newpar = False
        sentence_open = True
        if word_id < range_end:
            space = False
        elif word_id == range_end:
            space = range_space
            range_end = 0
        else:
            space = _space_after(cols[9])
        builder.add_token(cols[1], space, lineno)
        sent_tokens += 1
    close_sentence()
    if builder is not None and (builder.tokens or not docs):
        docs.append(builder.finish())
    return docs


def import_conllu(text: str, default_id: str = "doc") -> Tuple[Document, List[Token], Segmentation]:
    """Parse a single-document CoNLL-U string."""
    docs = import_conllu_corpus(text, default_id)
    if not docs:
        return Document(default_id, "", ()), [], Segmentation(default_id)
    if len(docs) > 1:
        raise CorpusFormatError(f"expected one document, found {len(docs)}")
    return docs[0]
