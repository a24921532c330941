"""Sentence segmentation, tokenization and evaluation tools for noisy web text."""

from .corpus import (
    AnnotationSet,
    Boundary,
    BoundaryTier,
    Document,
    Segmentation,
    Token,
    load_annotations,
    load_corpus,
)
from .evaluation import PRF, Scenario, evaluate_corpus, sentence_eval, token_f1
from .punkt import PunktModel, PunktTrainer, train
from .segmenter import EmoticonAttach, PunctRunPolicy, WebRuleConfig, segment, segment_document
from .tokenizer import TokenClass, Tokenizer, tokenize

__version__ = "0.1.0"

__all__ = [
    "AnnotationSet",
    "Boundary",
    "BoundaryTier",
    "Document",
    "EmoticonAttach",
    "PRF",
    "PunctRunPolicy",
    "PunktModel",
    "PunktTrainer",
    "Scenario",
    "Segmentation",
    "Token",
    "TokenClass",
    "Tokenizer",
    "WebRuleConfig",
    "evaluate_corpus",
    "load_annotations",
    "load_corpus",
    "segment",
    "segment_document",
    "sentence_eval",
    "token_f1",
    "tokenize",
    "train",
]
