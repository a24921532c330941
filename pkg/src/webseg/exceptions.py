"""Exception hierarchy shared by all webseg modules."""


class WebsegError(Exception):
    """Base class for all errors raised by this package."""


class CorpusFormatError(WebsegError):
    """Malformed input file (plain text, standoff annotations, CoNLL-U, model)."""

    def __init__(self, message, path=None, line=None, position=None):
        self.path = path
        self.line = line
        self.position = position
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if position is not None:
            where.append(f"byte {position}")
        if where:
            message = f"{':'.join(where)}: {message}"
        super().__init__(message)


class AnnotationReferenceError(WebsegError):
    """An annotation refers to a document that is not in the corpus."""


class ConsistencyError(WebsegError):
    """Tokens, paragraphs and segmentations disagree about a document."""


class AlignmentError(WebsegError):
    """Two token sequences do not cover the same non-whitespace text."""


class CoverageError(WebsegError):
    """An annotator did not annotate a document required for agreement."""


class DegenerateCorpusError(WebsegError):
    """Corpus statistics make a log-likelihood undefined."""

