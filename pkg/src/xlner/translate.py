"""Reverse translation of a source-language corpus through a bilingual
dictionary, with polysemy resolved by a context-weighted cosine score.

A candidate translation t for source word w in context words c_j at token
distances d_j is scored as::

    alpha * cos(E(w), E(t)) + (1 - alpha) * sum_j cos(E(t), E(c_j)) / (d_j + 1)^2

using the merged bilingual embedding table E. The highest-scoring candidate
replaces the word; ties go to the earliest dictionary position.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence, TextIO

from .conll import Corpus, Sentence, Token, split_label
from .embeddings import EmbeddingTable, cosine
from .errors import ParseError, ValidationError

NEG_INF = float("-inf")


@dataclass
class BilingualDictionary:
    """Source word -> ordered, duplicate-free candidate translations."""

    entries: dict[str, tuple[str, ...]]

    def __contains__(self, word: str) -> bool:
        return word in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def candidates(self, word: str) -> tuple[str, ...]:
        return self.entries.get(word, ())


def load_dictionary(text: str | TextIO | Iterable[str]) -> BilingualDictionary:
    """Read one ``source target`` pair per line; repeated source words
    accumulate candidates in file order, exact duplicate pairs collapse."""
    if isinstance(text, str):
        lines: Iterable[str] = text.splitlines()
    else:
        lines = text
    entries: dict[str, list[str]] = {}
    for line_number, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ParseError(
                f"expected 'source target', found {line!r}", line_number=line_number
            )
        source, target = fields
        bucket = entries.setdefault(source, [])
        if target not in bucket:
            bucket.append(target)
    return BilingualDictionary({w: tuple(c) for w, c in entries.items()})


@dataclass(frozen=True)
class ScoringContext:
    """Source word plus its (context word, distance >= 1) neighborhood and
    the pair-vs-context trade-off factor alpha in [0, 1]."""

    word: str
    context: tuple[tuple[str, int], ...]
    alpha: float


def score_candidate(
    ctx: ScoringContext, candidate: str, table: EmbeddingTable
) -> float:
    """Context-weighted similarity of a candidate translation.

    Context words absent from the table contribute nothing; a candidate
    absent from the table scores -inf so it is never preferred over an
    embedded candidate. A source word absent from the table contributes a
    zero pair term.
    """
    if not 0.0 <= ctx.alpha <= 1.0:
        raise ValidationError(f"alpha must be in [0, 1], got {ctx.alpha}")
    if candidate not in table:
        return NEG_INF
    candidate_vector = table[candidate]
    pair_term = cosine(table[ctx.word], candidate_vector) if ctx.word in table else 0.0
    context_sum = 0.0
    for context_word, distance in ctx.context:
        if distance < 1:
            raise ValidationError(f"context distance must be >= 1, got {distance}")
        if context_word in table:
            context_sum += cosine(candidate_vector, table[context_word]) / (distance + 1) ** 2
    return ctx.alpha * pair_term + (1.0 - ctx.alpha) * context_sum


def sentence_context(surfaces: Sequence[str], index: int) -> tuple[tuple[str, int], ...]:
    """Every other token of the sentence with its absolute index distance."""
    return tuple(
        (surface, abs(index - j))
        for j, surface in enumerate(surfaces)
        if j != index
    )


def select_candidate(
    surfaces: Sequence[str],
    index: int,
    dictionary: BilingualDictionary,
    table: EmbeddingTable,
    alpha: float,
) -> str | None:
    """Best-scoring translation for one token, or None when the dictionary
    has no entry. Context distances use the original surfaces, so results do
    not depend on processing order. If no candidate is embedded, the first
    dictionary candidate is returned."""
    candidates = dictionary.candidates(surfaces[index])
    if not candidates:
        return None
    ctx = ScoringContext(surfaces[index], sentence_context(surfaces, index), alpha)
    best = None
    best_score = NEG_INF
    for candidate in candidates:
        score = score_candidate(ctx, candidate, table)
        if best is None or score > best_score:
            best = candidate
            best_score = score
    return best


def translate_sentence(
    sentence: Sentence,
    dictionary: BilingualDictionary,
    table: EmbeddingTable,
    alpha: float = 0.5,
) -> Sentence:
    """Replace each dictionary-covered token by its best-scoring candidate;
    tokens without an entry and all labels are unchanged."""
    surfaces = sentence.surfaces
    tokens = []
    for i, token in enumerate(sentence.tokens):
        choice = select_candidate(surfaces, i, dictionary, table, alpha)
        if choice is None:
            tokens.append(token)
        else:
            tokens.append(Token(choice, token.label))
    return Sentence(tuple(tokens))


@dataclass
class TranslationStats:
    replaced: int = 0
    kept: int = 0
    by_type: dict[str, int] | None = None

    @property
    def total(self) -> int:
        return self.replaced + self.kept

    def as_record(self) -> dict:
        record = {"replaced": self.replaced, "kept": self.kept, "total": self.total}
        for entity_type in sorted(self.by_type or {}):
            record[f"replaced_{entity_type}"] = self.by_type[entity_type]
        return record


def translate_corpus(
    corpus: Corpus,
    dictionary: BilingualDictionary,
    table: EmbeddingTable,
    alpha: float = 0.5,
) -> tuple[Corpus, TranslationStats]:
    """Translate every sentence; sentence count and lengths are preserved.
    Stats count replaced vs kept tokens, with replacements also broken down
    by the token's entity type (``O`` for non-entity tokens)."""
    stats = TranslationStats(by_type={})
    sentences = []
    for sentence in corpus.sentences:
        translated = translate_sentence(sentence, dictionary, table, alpha)
        for before in sentence.tokens:
            if before.surface in dictionary:
                stats.replaced += 1
                _, entity_type = split_label(before.label)
                key = entity_type or "O"
                stats.by_type[key] = stats.by_type.get(key, 0) + 1
            else:
                stats.kept += 1
        sentences.append(translated)
    return replace(corpus, sentences=tuple(sentences)), stats
