"""shiftbench: constituent-movement minimal pairs, LM preference scoring,
and weight-ratio analysis, with a bundled human-judgment study service."""

__version__ = "0.1.0"

from .analysis import ablate, build_design, fit_gam, preference_curve, spearman
from .gam import SplineGAM
from .generator import GenerationPlan, Lexicon, dataset_census, default_lexicon, expand, load_lexicon
from .ngram import NGramModel, train_ngram
from .pairs import Constituent, SentencePair, read_pairs, write_pairs
from .scoring import (
    HttpLogprobBackend,
    PreferenceRecord,
    ReplayBackend,
    ScoredSequence,
    preference,
    score_sequence,
)
from .treebank import (
    ParseNode,
    QualityFilter,
    ShiftMatch,
    match_shift_pattern,
    mine,
    parse_treebank,
    realize_pair,
)
from .weights import (
    WeightProfile,
    profile,
    ratios,
    syllable_count,
    syllable_weight,
    token_length,
    word_length,
)

__all__ = [
    "SplineGAM", "NGramModel", "train_ngram", "SentencePair", "Constituent",
    "read_pairs", "write_pairs", "HttpLogprobBackend", "ReplayBackend",
    "PreferenceRecord", "ScoredSequence", "preference", "score_sequence",
    "ParseNode", "QualityFilter", "ShiftMatch", "match_shift_pattern", "mine",
    "parse_treebank", "realize_pair", "GenerationPlan", "Lexicon",
    "dataset_census", "default_lexicon", "expand", "load_lexicon",
    "WeightProfile", "profile", "ratios", "syllable_count", "syllable_weight",
    "token_length", "word_length", "ablate", "build_design", "fit_gam",
    "preference_curve", "spearman",
]
