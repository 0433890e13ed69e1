"""Evaluation and corpus tooling for multi-view fallacy span annotations."""

from .agreement import AgreementConfig, AgreementResult, Unit, best_alignment, gamma
from .analysis import corpus_stats, informative_tokens, overlap_matrix
from .corpus import Corpus, FallacySpan, Post, Prediction, View
from .fixtures import GenConfig, generate, perturb
from .formats import (FormatError, Kind, Violation, parse_conll, parse_corpus_records,
                      parse_predictions, read_corpus, validate, write_conll,
                      write_corpus_records)
from .labels import FINE_LABELS, MACRO_LABELS, canonical
from .scoring import (EvalReport, MetricTriple, ScoringConfig, Task, evaluate, pair_credit,
                      post_labels, score_posts, score_spans, span_tokens, to_coarse)
from .splits import FoldSet, make_folds
from .taxonomy import Taxonomy, default_taxonomy, delta, load_taxonomy, macro_parents

__version__ = "0.1.0"

__all__ = [
    "AgreementConfig",
    "AgreementResult",
    "Unit",
    "best_alignment",
    "gamma",
    "corpus_stats",
    "informative_tokens",
    "overlap_matrix",
    "Corpus",
    "FallacySpan",
    "Post",
    "Prediction",
    "View",
    "GenConfig",
    "generate",
    "perturb",
    "FormatError",
    "Kind",
    "Violation",
    "parse_conll",
    "parse_corpus_records",
    "parse_predictions",
    "read_corpus",
    "validate",
    "write_conll",
    "write_corpus_records",
    "FINE_LABELS",
    "MACRO_LABELS",
    "canonical",
    "EvalReport",
    "MetricTriple",
    "ScoringConfig",
    "Task",
    "evaluate",
    "pair_credit",
    "post_labels",
    "score_posts",
    "score_spans",
    "span_tokens",
    "to_coarse",
    "FoldSet",
    "make_folds",
    "Taxonomy",
    "default_taxonomy",
    "delta",
    "load_taxonomy",
    "macro_parents",
]
