"""Typo-tolerant catalog search correction trained on synthetic misspellings."""

__version__ = "0.1.0"

from .corpus import (
    Alphabet,
    DEFAULT_ALPHABET,
    EditEvent,
    EditType,
    TypoPair,
    canonicalize,
    classify_single_edit,
    parse_corpus,
)
from .stats import (
    FusionSpec,
    StatsModel,
    build_stats,
    fuse,
    load_stats,
    qwerty_stats,
    save_stats,
    uniform_stats,
)
from .syngen import GenerationConfig, SynthSample, build_training_set, generate_samples
from .model import ModelConfig, embed, load_checkpoint, save_checkpoint, train
from .index import EmbeddingIndex, build_index, load_index, query, save_index
from .baseline import FrequencyDictionary, baseline_correct, levenshtein
from .evaluation import ValidationSet, evaluate, make_validation, run_matrix
from .service import CorrectionService, ServiceConfig, serve

__all__ = [
    "Alphabet", "DEFAULT_ALPHABET", "EditEvent", "EditType", "TypoPair",
    "canonicalize", "classify_single_edit", "parse_corpus",
    "FusionSpec", "StatsModel", "build_stats", "fuse", "load_stats",
    "qwerty_stats", "save_stats", "uniform_stats",
    "GenerationConfig", "SynthSample", "build_training_set", "generate_samples",
    "ModelConfig", "embed", "load_checkpoint", "save_checkpoint", "train",
    "EmbeddingIndex", "build_index", "load_index", "query", "save_index",
    "FrequencyDictionary", "baseline_correct", "levenshtein",
    "ValidationSet", "evaluate", "make_validation", "run_matrix",
    "CorrectionService", "ServiceConfig", "serve",
]
