"""Ablation experiments: train pipeline variants, score them on one test set.

Variants: "full" (word + char inputs), "shuffle" (full inputs, training
sentences internally reordered to destroy word-order cues), "word_only",
and "char_only". All variants share the dictionary-translation step and
the seed, so score differences isolate the ablated ingredient.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from .conll import Corpus, Sentence, Token, shuffle_ablation
from .embeddings import EmbeddingTable
from .errors import ValidationError
from .metrics import ScoreTriple, entity_f1
from .network import Hyperparams
from .romanize import TransliterationTable
from .tagger import BilstmCrfTagger
from .translate import BilingualDictionary, translate_corpus

VARIANTS = ("full", "shuffle", "word_only", "char_only")

ROW_NAMES = {
    "full": "Full Model",
    "shuffle": "Shuffle",
    "word_only": "Word-only",
    "char_only": "Char-only",
}


@dataclass(frozen=True)
class AblationConfig:
    variant: str
    seed: int
    hyper: Hyperparams

    def validate(self) -> None:
        if self.variant not in VARIANTS:
            raise ValidationError(
                f"variant must be one of {VARIANTS}, got {self.variant!r}"
            )
        if self.seed < 0:
            raise ValidationError("seed must be non-negative")
        self.hyper.validate()


def default_configs(seed: int, hyper: Hyperparams) -> list[AblationConfig]:
    """All four variants, in fixed row order, sharing one seed."""
    return [AblationConfig(variant, seed, hyper) for variant in VARIANTS]


@dataclass
class AblationResources:
    """Shared fixed inputs for every variant."""

    word_vectors: EmbeddingTable
    dictionary: BilingualDictionary | None = None
    romanization: TransliterationTable | None = None
    alpha: float = 0.5
    early_stop_f1: float | None = None
    verbose: bool = False


@dataclass(frozen=True)
class AblationRow:
    variant: str
    name: str
    scores: ScoreTriple


@dataclass
class AblationTable:
    rows: list[AblationRow] = field(default_factory=list)

    def score(self, variant: str) -> ScoreTriple:
        for row in self.rows:
            if row.variant == variant:
                return row.scores
        raise ValidationError(f"no ablation row for variant {variant!r}")

    def as_record(self) -> dict:
        return {
            row.variant: {"name": row.name, **row.scores.as_record()}
            for row in self.rows
        }

    def as_text(self) -> str:
        lines = ["variant       prec    rec     f1"]
        for row in self.rows:
            lines.append(f"{row.name:<11} {row.scores.as_percent_row()}")
        return "\n".join(lines)


def _variant_input_mode(variant: str) -> str:
    if variant in ("word_only", "char_only"):
        return variant
    return "full"


def run_ablation(
    train: Corpus,
    dev: Corpus,
    test: Corpus,
    configs: list[AblationConfig],
    resources: AblationResources,
) -> AblationTable:
    """Train one tagger per config and score each on the untouched test set.

    The translation step runs once on the unmodified training corpus — its
    context scoring should see real sentences — and the shuffle variant
    reorders the translated result.
    """
    if not configs:
        raise ValidationError("no ablation configs given")
    for config in configs:
        config.validate()

    if resources.dictionary is not None:
        translated, _ = translate_corpus(
            train, resources.dictionary, resources.word_vectors, resources.alpha
        )
    else:
        translated = train

    dev_X = [s.surfaces for s in dev.sentences]
    dev_y = [s.labels for s in dev.sentences]
    test_X = [s.surfaces for s in test.sentences]

    table = AblationTable()
    for config in configs:
        corpus = translated
        if config.variant == "shuffle":
            corpus = shuffle_ablation(translated, config.seed)
        hyper = dataclasses.replace(
            config.hyper,
            input_mode=_variant_input_mode(config.variant),
            seed=config.seed,
        )
        tagger = BilstmCrfTagger(
            word_vectors=resources.word_vectors,
            romanization=resources.romanization,
            word_dim=hyper.word_dim,
            char_dim=hyper.char_dim,
            char_hidden=hyper.char_hidden,
            token_hidden=hyper.token_hidden,
            dropout=hyper.dropout,
            epochs=hyper.epochs,
            learning_rate=hyper.learning_rate,
            decay_rate=hyper.decay_rate,
            momentum=hyper.momentum,
            grad_clip=hyper.grad_clip,
            input_mode=hyper.input_mode,
            seed=hyper.seed,
            early_stop_f1=resources.early_stop_f1,
            verbose=resources.verbose,
        )
        tagger.fit(
            [s.surfaces for s in corpus.sentences],
            [s.labels for s in corpus.sentences],
            dev_X,
            dev_y,
        )
        predicted = tagger.predict(test_X)
        scores = entity_f1(
            test,
            dataclasses.replace(
                test,
                sentences=tuple(
                    _with_labels(sentence, labels)
                    for sentence, labels in zip(test.sentences, predicted)
                ),
            ),
        )
        table.rows.append(AblationRow(config.variant, ROW_NAMES[config.variant], scores))
    return table


def _with_labels(sentence: Sentence, labels: list[str]) -> Sentence:
    return Sentence(
        tuple(Token(tok.surface, lab) for tok, lab in zip(sentence.tokens, labels))
    )
