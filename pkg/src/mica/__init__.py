"""MICA: a two-pass, typo-robust named-entity tagger.

A first-pass CRF tags every sentence; the entities it predicts within a
sentence-context window become per-type candidate dictionaries, and string
similarities against those candidates are injected as extra features into
the second-pass CRF, which produces the final tags.
"""

from .context import (
    ContextConfig,
    EntityDictionary,
    SimilarityVector,
    build_dictionary,
    enrich,
    similarity_vector,
)
from .corpus import (
    ENTITY_TYPES,
    LABELS,
    ConllParseError,
    Corpus,
    Document,
    EntitySpan,
    EntityType,
    Sentence,
    Token,
    bio_from_spans,
    load_conll,
    parse_conll,
    spans_from_bio,
    write_conll,
)
from .crf import (
    CrfModel,
    ModelFormatError,
    TrainConfig,
    load_model,
    log_partition,
    nll_and_gradient,
    save_model,
    sequence_score,
    train,
    viterbi,
)
from .evaluation import Counts, EvalReport, score, sweep_report
from .features import FeatureVector, extract_features, sentence_features
from .pipeline import two_pass_predict, two_pass_train
from .strsim import (
    damerau_levenshtein,
    lcs_similarity,
    lev_similarity,
    longest_common_substring,
)
from .synthetic import generate_benchmark, generate_corpus
from .taggers import CrfTagger, MicaTagger
from .typos import TypoConfig, inject

__version__ = "0.1.0"

__all__ = [
    "ENTITY_TYPES",
    "LABELS",
    "ConllParseError",
    "ContextConfig",
    "Corpus",
    "Counts",
    "CrfModel",
    "CrfTagger",
    "Document",
    "EntityDictionary",
    "EntitySpan",
    "EntityType",
    "EvalReport",
    "FeatureVector",
    "MicaTagger",
    "ModelFormatError",
    "Sentence",
    "SimilarityVector",
    "Token",
    "TrainConfig",
    "TypoConfig",
    "bio_from_spans",
    "build_dictionary",
    "damerau_levenshtein",
    "enrich",
    "extract_features",
    "generate_benchmark",
    "generate_corpus",
    "inject",
    "lcs_similarity",
    "lev_similarity",
    "load_conll",
    "load_model",
    "log_partition",
    "longest_common_substring",
    "nll_and_gradient",
    "parse_conll",
    "save_model",
    "score",
    "sentence_features",
    "sequence_score",
    "similarity_vector",
    "spans_from_bio",
    "sweep_report",
    "train",
    "two_pass_predict",
    "two_pass_train",
    "viterbi",
    "write_conll",
]
