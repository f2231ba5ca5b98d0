"""Cross-lingual named-entity recognition.

Train a Bi-LSTM-CRF tagger on one language's annotations and apply it to
another, with three transfer bridges: bilingual word embeddings aligned
by orthogonal Procrustes, context-scored dictionary translation of the
training tokens, and rule-table romanization unifying the character
space. Estimator classes follow scikit-learn conventions; the functional
modules underneath are importable on their own.
"""

from ._version import VERSION as __version__
from .ablation import (
    AblationConfig,
    AblationResources,
    AblationTable,
    default_configs,
    run_ablation,
)
from .conll import (
    Corpus,
    EntitySpan,
    Sentence,
    Token,
    bio_to_biose,
    biose_to_bio,
    convert_schema,
    corpus_from_sequences,
    extract_spans,
    filter_tags,
    normalize_surface,
    normalize_tokens,
    parse_conll,
    serialize_conll,
    shuffle_ablation,
)
from .embeddings import (
    EmbeddingTable,
    OovVectors,
    OrthogonalMap,
    apply_alignment,
    cosine,
    load_embeddings,
    load_word_pairs,
    merge_tables,
    normalize_table,
    oov_rate,
    procrustes_align,
    save_embeddings,
)
from .errors import (
    AlignmentError,
    ConfigError,
    ParseError,
    TrainingError,
    ValidationError,
    XlnerError,
)
from .metrics import LengthBuckets, ScoreTriple, entity_f1, f1_by_length, score_report
from .network import Hyperparams, TaggerNetwork, load_network, save_network
from .romanize import (
    TransliterationTable,
    builtin_table,
    empty_table,
    load_table,
    romanize,
    romanize_corpus,
)
from .tagger import BilstmCrfTagger
from .training import (
    GradientCheckReport,
    TrainReport,
    check_gradients,
    learning_rate_for_epoch,
    train,
)
from .transforms import DictionaryTranslator, Romanizer, TokenNormalizer
from .translate import (
    BilingualDictionary,
    load_dictionary,
    score_candidate,
    select_candidate,
    translate_corpus,
)

__all__ = [
    "__version__",
    "AblationConfig",
    "AblationResources",
    "AblationTable",
    "AlignmentError",
    "BilingualDictionary",
    "BilstmCrfTagger",
    "ConfigError",
    "Corpus",
    "DictionaryTranslator",
    "EmbeddingTable",
    "EntitySpan",
    "GradientCheckReport",
    "Hyperparams",
    "LengthBuckets",
    "OovVectors",
    "OrthogonalMap",
    "ParseError",
    "Romanizer",
    "ScoreTriple",
    "Sentence",
    "TaggerNetwork",
    "Token",
    "TokenNormalizer",
    "TrainReport",
    "TrainingError",
    "TransliterationTable",
    "ValidationError",
    "XlnerError",
    "apply_alignment",
    "bio_to_biose",
    "biose_to_bio",
    "builtin_table",
    "check_gradients",
    "convert_schema",
    "corpus_from_sequences",
    "cosine",
    "default_configs",
    "empty_table",
    "entity_f1",
    "extract_spans",
    "f1_by_length",
    "filter_tags",
    "learning_rate_for_epoch",
    "load_dictionary",
    "load_embeddings",
    "load_network",
    "load_table",
    "load_word_pairs",
    "merge_tables",
    "normalize_surface",
    "normalize_table",
    "normalize_tokens",
    "oov_rate",
    "parse_conll",
    "procrustes_align",
    "romanize",
    "romanize_corpus",
    "run_ablation",
    "save_embeddings",
    "save_network",
    "score_candidate",
    "score_report",
    "select_candidate",
    "serialize_conll",
    "shuffle_ablation",
    "train",
    "translate_corpus",
]
