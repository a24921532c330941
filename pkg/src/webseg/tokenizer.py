"""Rule-based word tokenizer for noisy web text.

Each whitespace-delimited chunk is split by a fixed cascade of rules; a rule
only sees the pieces left unclaimed by the rules before it:

1. URLs and e-mail addresses
2. emoticons (pattern lexicon)
3. runs of two or more terminal punctuation marks (``!!!``, ``?!``, ``...``)
4. known abbreviations with their period (abbreviation lexicon)
5./6./7. everything else: numbers (decimals, ordinals, times), words with
   internal hyphens/apostrophes, single terminal punctuation, symbols.

Glued sentences (``tuli.Siis``) fall out of step 5-7: the word stops at the
period, which becomes its own TerminalPunct token.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

from .corpus import Document, Token

TERMINAL_CHARS = ".?!…"


class TokenClass(enum.Enum):
    WORD = "Word"
    NUMBER = "Number"
    ABBREVIATION = "Abbreviation"
    TERMINAL_PUNCT = "TerminalPunct"
    PUNCT_RUN = "PunctRun"
    EMOTICON = "Emoticon"
    URL = "Url"
    SYMBOL = "Symbol"
    OTHER = "Other"


ClassifiedToken = Tuple[Token, TokenClass]

_URL_RE = re.compile(
    r"""
    [A-Za-z][A-Za-z0-9+.\-]*://\S+
    | www\.\S+
    | [\w.+\-]+@[\w\-]+(?:\.[\w\-]+)+
    | (?<![\w@.])(?:[A-Za-z0-9\-]+\.)+(?:ee|com|org|net|eu|info|ru|fi|lv|lt|de|uk)
      (?:/\S*)?(?![\w])
    """,
    re.VERBOSE | re.IGNORECASE,
)
_URL_TRAILING = ".,;:!?\"'»”…"

_PUNCT_RUN_RE = re.compile(r"[.?!…]{2,}")
_PUNCT_RUN_FULL = re.compile(r"[.?!…]+")

_REST_RE = re.compile(
    r"""
    (?P<num>\d+(?:[.,:]\d+)*(?:\.(?![^\W_]))?(?![^\W_]))
    | (?P<word>[^\W_]+(?:['’\-][^\W_]+)*)
    | (?P<term>[.?!…])
    | (?P<sym>(?P<symch>[^\w\s]|_)(?P=symch)*)
    """,
    re.VERBOSE,
)
_NUMBER_FULL = re.compile(r"\d+(?:[.,:]\d+)*\.?")


# ---------------------------------------------------------------------------
# lexicons


def _read_lines(lines: Iterable[str]) -> List[str]:
    out = []
    for line in lines:
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(line)
    return out


def load_abbreviations(path=None) -> frozenset:
    """Abbreviation lexicon (lowercased, no final period); the bundled list by default."""
    if path is None:
        text = resources.files("webseg").joinpath("data/abbreviations.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return frozenset(e.lower().rstrip(".") for e in _read_lines(text.splitlines()))


def compile_emoticon_pattern(pattern: str) -> str:
    """Translate the emoticon mini-syntax into a regular expression.

    ``{abc}`` is one character of the set, optionally followed by ``?`` or
    ``+``; ``\\x`` is a literal ``x``; every other character is literal.
    """
    out = []
    i = 0
    n = len(pattern)
    while i < n:
        ch = pattern[i]
        if ch == "\\" and i + 1 < n:
            out.append(re.escape(pattern[i + 1]))
            i += 2
            continue
        if ch == "{":
            j = i + 1
            members = []
            while j < n and pattern[j] != "}":
                if pattern[j] == "\\" and j + 1 < n:
                    j += 1
                members.append(pattern[j])
                j += 1
            if j >= n:
                raise ValueError(f"unterminated character set in emoticon pattern {pattern!r}")
            cls = "[" + "".join(re.escape(m) for m in members) + "]"
            j += 1
            if j < n and pattern[j] in "?+":
                cls += pattern[j]
                j += 1
            out.append(cls)
            i = j
            continue
        out.append(re.escape(ch))
        i += 1
    return "".join(out)


def load_emoticons(path=None) -> Tuple[str, ...]:
    if path is None:
        text = resources.files("webseg").joinpath("data/emoticons.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return tuple(_read_lines(text.splitlines()))


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Piece:
    start: int
    text: str
    cls: Optional[TokenClass] = None


class Tokenizer:
    """Configured tokenizer; immutable once built and safe to share."""

    def __init__(self, abbreviations=None, emoticons=None):
        if abbreviations is None:
            abbreviations = load_abbreviations()
        if emoticons is None:
            emoticons = load_emoticons()
        self.abbreviations = frozenset(a.lower().rstrip(".") for a in abbreviations if a)
        self.emoticon_patterns = tuple(emoticons)
        self._emoticon_res = [re.compile(compile_emoticon_pattern(p)) for p in self.emoticon_patterns]
        self._emoticon_full = re.compile(
            "(?:" + "|".join(r.pattern for r in self._emoticon_res) + ")\\Z"
        ) if self._emoticon_res else None
        if self.abbreviations:
            alts = sorted(self.abbreviations, key=lambda a: (-len(a), a))
            self._abbrev_re = re.compile(
                r"(?<![^\W_])(?:" + "|".join(re.escape(a) for a in alts) + r")\.",
                re.IGNORECASE,
            )
        else:
            self._abbrev_re = None

    def with_abbreviations(self, extra: Iterable[str]) -> "Tokenizer":
        extra = set(extra)
        if extra <= self.abbreviations:
            return self
        return Tokenizer(self.abbreviations | extra, self.emoticon_patterns)

    # -- public API -------------------------------------------------------

    def tokenize(self, document: Document) -> List[ClassifiedToken]:
        result = []
        for p_start, p_end in document.paragraphs:
            for m in re.finditer(r"\S+", document.text[p_start:p_end]):
                result.extend(self.tokenize_chunk(m.group(), p_start + m.start()))
        return result

    def tokenize_chunk(self, chunk: str, offset: int = 0) -> List[ClassifiedToken]:
        pieces = [_Piece(offset, chunk)]
        pieces = self._split(pieces, self._find_urls, TokenClass.URL)
        pieces = self._split(pieces, self._find_emoticons, TokenClass.EMOTICON)
        pieces = self._split(pieces, _regex_finder(_PUNCT_RUN_RE), TokenClass.PUNCT_RUN)
        if self._abbrev_re is not None:
            pieces = self._split(pieces, _regex_finder(self._abbrev_re), TokenClass.ABBREVIATION)
        out = []
        for piece in pieces:
            if piece.cls is not None:
                out.append((Token(piece.start, piece.start + len(piece.text), piece.text), piece.cls))
            else:
                out.extend(self._split_rest(piece))
        return out

    def classify(self, surface: str) -> TokenClass:
        """Class of a single surface string, as if it had been produced whole."""
        if _URL_RE.fullmatch(surface.rstrip(_URL_TRAILING)) and surface.rstrip(_URL_TRAILING) == surface:
            return TokenClass.URL
        if self._emoticon_full is not None and self._emoticon_full.match(surface):
            return TokenClass.EMOTICON
        if _PUNCT_RUN_FULL.fullmatch(surface):
            return TokenClass.PUNCT_RUN if len(surface) >= 2 else TokenClass.TERMINAL_PUNCT
        if self._abbrev_re is not None and self._abbrev_re.fullmatch(surface):
            return TokenClass.ABBREVIATION
        return _classify_rest(surface)

    # -- rule helpers -----------------------------------------------------

    @staticmethod
    def _split(pieces, finder, cls):
        out = []
        for piece in pieces:
            if piece.cls is not None:
                out.append(piece)
                continue
            pos = 0
            for start, end in finder(piece.text):
                if start > pos:
                    out.append(_Piece(piece.start + pos, piece.text[pos:start]))
                out.append(_Piece(piece.start + start, piece.text[start:end], cls))
                pos = end
            if pos < len(piece.text):
                out.append(_Piece(piece.start + pos, piece.text[pos:]))
        return out

    @staticmethod
    def _find_urls(text):
        for m in _URL_RE.finditer(text):
            url = m.group()
            url = url.rstrip(_URL_TRAILING)
            while url.endswith(")") and url.count(")") > url.count("("):
                url = url[:-1].rstrip(_URL_TRAILING)
            if len(url) > 1:
                yield m.start(), m.start() + len(url)

    def _find_emoticons(self, text):
        pos = 0
        n = len(text)
        while pos < n:
            best = 0
            for rx in self._emoticon_res:
                m = rx.match(text, pos)
                if m and m.end() - pos > best and self._emoticon_context_ok(text, pos, m.end()):
                    best = m.end() - pos
            if best:
                yield pos, pos + best
                pos += best
            else:
                pos += 1

    @staticmethod
    def _emoticon_context_ok(text, start, end):
        first, last = text[start], text[end - 1]
        before = text[start - 1] if start else ""
        after = text[end] if end < len(text) else ""
        if first.isdigit() and start != 0:
            return False
        if before.isdigit():
            return False
        if first.isalpha() and before.isalnum():
            return False
        if last.isalpha() and after.isalpha():
            return False
        return True

    @staticmethod
    def _split_rest(piece: _Piece) -> List[ClassifiedToken]:
        out = []
        text = piece.text
        for m in _REST_RE.finditer(text):
            surface = m.group()
            start = piece.start + m.start()
            tok = Token(start, start + len(surface), surface)
            if m.group("term"):
                cls = TokenClass.TERMINAL_PUNCT
            elif m.group("num"):
                cls = TokenClass.NUMBER
            elif m.group("word"):
                cls = _classify_rest(surface)
            else:
                cls = TokenClass.SYMBOL
            out.append((tok, cls))
        return out


def _classify_rest(surface: str) -> TokenClass:
    if _NUMBER_FULL.fullmatch(surface):
        return TokenClass.NUMBER
    if any(ch.isalpha() for ch in surface):
        return TokenClass.WORD
    if any(ch.isdigit() for ch in surface):
        return TokenClass.NUMBER
    if all(not ch.isalnum() for ch in surface):
        return TokenClass.SYMBOL
    return TokenClass.OTHER


def _regex_finder(rx):
    def find(text):
        for m in rx.finditer(text):
            yield m.start(), m.end()
    return find


@lru_cache(maxsize=1)
def default_tokenizer() -> Tokenizer:
    return Tokenizer()


def tokenize(document: Document, tokenizer: Optional[Tokenizer] = None) -> List[ClassifiedToken]:
    """Tokenize a document into ``(Token, TokenClass)`` pairs."""
    return (tokenizer or default_tokenizer()).tokenize(document)


def detokenize_check(document: Document, tokens: Sequence[Token]) -> bool:
    """True iff the tokens reproduce each paragraph's non-whitespace characters in order."""
    tokens = [t[0] if isinstance(t, tuple) else t for t in tokens]
    i = 0
    for p_start, p_end in document.paragraphs:
        expected = "".join(document.text[p_start:p_end].split())
        got = []
        length = 0
        while i < len(tokens) and length < len(expected):
            tok = tokens[i]
            if not (p_start <= tok.start and tok.end <= p_end):
                return False
            got.append(tok.surface)
            length += len(tok.surface)
            i += 1
        if "".join(got) != expected:
            return False
    return i == len(tokens)
