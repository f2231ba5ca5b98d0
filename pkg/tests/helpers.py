"""Shared fixture builders for the test suite."""

from __future__ import annotations

import numpy as np

from xlner.conll import (
    SCHEMA_BIO,
    SCHEMA_BIOSE,
    Corpus,
    Sentence,
    Token,
    corpus_from_sequences,
)
from xlner.embeddings import EmbeddingTable

TYPES = ("PER", "ORG", "LOC", "MISC")


def random_bio_labels(rng: np.random.Generator, length: int) -> list[str]:
    """A uniformly messy but valid BIO sequence."""
    labels: list[str] = []
    i = 0
    while i < length:
        if rng.random() < 0.5:
            labels.append("O")
            i += 1
            continue
        entity_type = TYPES[rng.integers(len(TYPES))]
        span_len = min(int(rng.integers(1, 4)), length - i)
        labels.append(f"B-{entity_type}")
        for _ in range(span_len - 1):
            labels.append(f"I-{entity_type}")
        i += span_len
    return labels


def corpus_of(label_rows: list[list[str]], schema: str = SCHEMA_BIOSE) -> Corpus:
    """Corpus with placeholder surfaces w0, w1, ... per sentence."""
    surfaces = [[f"w{i}" for i in range(len(row))] for row in label_rows]
    return corpus_from_sequences(surfaces, label_rows, schema=schema)


def table_of(words: dict[str, list[float]]) -> EmbeddingTable:
    dims = {len(v) for v in words.values()}
    assert len(dims) == 1
    return EmbeddingTable(
        {w: np.asarray(v, dtype=np.float64) for w, v in words.items()}, dim=dims.pop()
    )


def random_table(rng: np.random.Generator, words: list[str], dim: int) -> EmbeddingTable:
    return EmbeddingTable({w: rng.normal(size=dim) for w in words}, dim=dim)


def sentence(*pairs: tuple[str, str]) -> Sentence:
    return Sentence(tuple(Token(surface, label) for surface, label in pairs))
