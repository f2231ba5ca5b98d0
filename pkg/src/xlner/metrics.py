"""Entity-level scoring: precision/recall/F1 and a per-length breakdown.

Scoring is exact-match on (sentence, start, end, type) spans extracted
with the same repair rules used everywhere else, so it does not care
whether labels arrive in two- or four-boundary form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .conll import Corpus, EntitySpan, corpus_spans
from .errors import ValidationError

# Entity-length buckets: singletons, pairs, everything longer.
BUCKET_KEYS = ("1", "2", ">=3")


def bucket_of(length: int) -> str:
    if length < 1:
        raise ValidationError(f"entity length must be >= 1, got {length}")
    return BUCKET_KEYS[min(length, 3) - 1]


@dataclass(frozen=True)
class ScoreTriple:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, correct: int, predicted: int, gold: int) -> "ScoreTriple":
        """Build P/R/F1 from match counts; every 0/0 ratio is defined as 0."""
        precision = correct / predicted if predicted else 0.0
        recall = correct / gold if gold else 0.0
        f1 = (
            2 * precision * recall / (precision + recall)
            if precision + recall
            else 0.0
        )
        return cls(precision, recall, f1)

    def as_record(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}

    def as_percent_row(self) -> str:
        return (
            f"{100 * self.precision:6.2f}  {100 * self.recall:6.2f}  {100 * self.f1:6.2f}"
        )


def _check_parallel(gold: Corpus, predicted: Corpus) -> None:
    if len(gold.sentences) != len(predicted.sentences):
        raise ValidationError(
            f"gold has {len(gold.sentences)} sentences, "
            f"predictions have {len(predicted.sentences)}"
        )
    for index, (g, p) in enumerate(zip(gold.sentences, predicted.sentences)):
        if len(g.tokens) != len(p.tokens):
            raise ValidationError(
                f"sentence {index}: gold has {len(g.tokens)} tokens, "
                f"prediction has {len(p.tokens)}"
            )


def match_counts(gold: Corpus, predicted: Corpus) -> tuple[int, int, int]:
    """(correct, predicted, gold) span counts under exact span+type match."""
    _check_parallel(gold, predicted)
    gold_spans = set(corpus_spans(gold))
    pred_spans = set(corpus_spans(predicted))
    return len(gold_spans & pred_spans), len(pred_spans), len(gold_spans)


def entity_f1(gold: Corpus, predicted: Corpus) -> ScoreTriple:
    correct, n_predicted, n_gold = match_counts(gold, predicted)
    return ScoreTriple.from_counts(correct, n_predicted, n_gold)


@dataclass(frozen=True)
class LengthBuckets:
    """Scores and span counts per entity-length bucket.

    Precision buckets predicted spans by their own length and recall
    buckets gold spans by theirs; an exactly matched span has the same
    length on both sides, so it lands in one bucket consistently.
    """

    scores: Mapping[str, ScoreTriple]
    correct: Mapping[str, int]
    predicted: Mapping[str, int]
    gold: Mapping[str, int]

    @property
    def total_correct(self) -> int:
        return sum(self.correct.values())

    @property
    def total_predicted(self) -> int:
        return sum(self.predicted.values())

    @property
    def total_gold(self) -> int:
        return sum(self.gold.values())

    def as_record(self) -> dict:
        return {
            key: {
                **self.scores[key].as_record(),
                "correct": self.correct[key],
                "predicted": self.predicted[key],
                "gold": self.gold[key],
            }
            for key in BUCKET_KEYS
        }

    def as_text(self) -> str:
        lines = ["length    prec    rec     f1  correct  predicted  gold"]
        for key in BUCKET_KEYS:
            lines.append(
                f"{key:>6}  {self.scores[key].as_percent_row()}"
                f"  {self.correct[key]:7d}  {self.predicted[key]:9d}  {self.gold[key]:4d}"
            )
        return "\n".join(lines)


def f1_by_length(gold: Corpus, predicted: Corpus) -> LengthBuckets:
    _check_parallel(gold, predicted)
    gold_spans = set(corpus_spans(gold))
    pred_spans = set(corpus_spans(predicted))

    def tally(spans: set[EntitySpan]) -> dict[str, int]:
        counts = {key: 0 for key in BUCKET_KEYS}
        for span in spans:
            counts[bucket_of(span.length)] += 1
        return counts

    correct = tally(gold_spans & pred_spans)
    predicted_counts = tally(pred_spans)
    gold_counts = tally(gold_spans)
    scores = {
        key: ScoreTriple.from_counts(correct[key], predicted_counts[key], gold_counts[key])
        for key in BUCKET_KEYS
    }
    return LengthBuckets(scores, correct, predicted_counts, gold_counts)


def score_report(gold: Corpus, predicted: Corpus) -> str:
    """Overall plus per-length scores as an aligned plain-text block."""
    overall = entity_f1(gold, predicted)
    buckets = f1_by_length(gold, predicted)
    lines = [
        "entity-level scores (exact span + type match; values x100)",
        f"overall   prec {100 * overall.precision:6.2f}"
        f"  rec {100 * overall.recall:6.2f}  f1 {100 * overall.f1:6.2f}",
        "",
        buckets.as_text(),
    ]
    return "\n".join(lines)
