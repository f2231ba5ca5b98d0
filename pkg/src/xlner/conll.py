"""CoNLL-format corpora: parsing, normalization, tag schemas, entity spans.

A corpus is an immutable sequence of sentences; each sentence is a sequence
of (surface, label) tokens. Labels are plain strings such as ``"B-PER"`` or
``"O"``. Two positional schemas are supported: BIO and BIOSE (BIO extended
with Single and End markers).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from typing import Iterable, Sequence, TextIO

from .errors import ParseError, ValidationError

SCHEMA_BIO = "BIO"
SCHEMA_BIOSE = "BIOSE"

ENTITY_TYPES = ("PER", "ORG", "LOC", "MISC")

_POSITIONS = {SCHEMA_BIO: ("B", "I", "O"), SCHEMA_BIOSE: ("B", "I", "O", "S", "E")}

_DOC_MARKER = "-DOCSTART-"

_NUM_STRIP = str.maketrans("", "", ".,%-/+")
_URL_PREFIXES = ("http://", "https://", "ftp://", "www.")


@dataclass(frozen=True)
class Token:
    surface: str
    label: str


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def surfaces(self) -> tuple[str, ...]:
        return tuple(t.surface for t in self.tokens)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(t.label for t in self.tokens)


@dataclass(frozen=True)
class Corpus:
    sentences: tuple[Sentence, ...]
    language: str = "und"
    schema: str = SCHEMA_BIO

    def __len__(self) -> int:
        return len(self.sentences)

    @property
    def n_tokens(self) -> int:
        return sum(len(s) for s in self.sentences)


@dataclass(frozen=True, order=True)
class EntitySpan:
    """A typed entity covering tokens ``start..end`` (inclusive) of a sentence."""

    sentence_index: int
    start: int
    end: int
    entity_type: str

    @property
    def length(self) -> int:
        return self.end - self.start + 1


def split_label(label: str) -> tuple[str, str | None]:
    """Split ``"B-PER"`` into ``("B", "PER")``; ``"O"`` into ``("O", None)``."""
    if label == "O":
        return "O", None
    if "-" in label:
        position, entity_type = label.split("-", 1)
        return position, entity_type
    return label, None


def join_label(position: str, entity_type: str | None) -> str:
    if position == "O":
        return "O"
    return f"{position}-{entity_type}"


def validate_label(label: str, schema: str = SCHEMA_BIO) -> None:
    """Raise ``ValidationError`` unless ``label`` is well formed under ``schema``."""
    position, entity_type = split_label(label)
    if position not in _POSITIONS[schema]:
        raise ValidationError(f"unknown label {label!r} for schema {schema}")
    if position == "O":
        if entity_type is not None:
            raise ValidationError(f"unknown label {label!r}: O carries no entity type")
    elif entity_type not in ENTITY_TYPES:
        raise ValidationError(f"unknown label {label!r}: entity type not recognized")


def parse_conll(
    text: str | TextIO | Iterable[str],
    token_column: int = 0,
    label_column: int = -1,
    language: str = "und",
    schema: str = SCHEMA_BIO,
) -> Corpus:
    """Parse CoNLL column format into a :class:`Corpus`.

    Lines are whitespace-separated columns; blank lines separate sentences;
    lines whose first field is ``-DOCSTART-`` are document markers and are
    skipped. Raises :class:`ParseError` (with the 1-based line number) on
    malformed lines or unknown labels.
    """
    if schema not in _POSITIONS:
        raise ValidationError(f"unknown schema {schema!r}")
    if isinstance(text, str):
        lines: Iterable[str] = text.splitlines()
    else:
        lines = text

    sentences: list[Sentence] = []
    current: list[Token] = []

    def flush() -> None:
        if current:
            sentences.append(Sentence(tuple(current)))
            current.clear()

    for line_number, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            flush()
            continue
        columns = line.split()
        if columns[0].startswith(_DOC_MARKER):
            continue
        n = len(columns)
        for name, index in (("token", token_column), ("label", label_column)):
            if not -n <= index < n:
                raise ParseError(
                    f"{name} column {index} out of range for {n}-column line {line!r}",
                    line_number=line_number,
                )
        surface = columns[token_column]
        label = columns[label_column]
        try:
            validate_label(label, schema)
        except ValidationError as exc:
            raise ParseError(str(exc), line_number=line_number) from exc
        current.append(Token(surface, label))
    flush()
    return Corpus(tuple(sentences), language=language, schema=schema)


def serialize_conll(corpus: Corpus) -> str:
    """Emit ``surface label`` per line, blank line between sentences."""
    blocks = []
    for sentence in corpus.sentences:
        blocks.append("\n".join(f"{t.surface} {t.label}" for t in sentence.tokens))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


def is_numeric_token(surface: str) -> bool:
    """True when the surface is all decimal digits after removing ``.,%-/+``."""
    stripped = surface.translate(_NUM_STRIP)
    return bool(stripped) and all(c in "0123456789" for c in stripped)


def is_url_token(surface: str) -> bool:
    return surface.startswith(_URL_PREFIXES)


def normalize_surface(surface: str) -> str:
    """Lowercase, then rewrite numeric tokens to ``num`` and URLs to ``url``."""
    lowered = surface.lower()
    if is_numeric_token(lowered):
        return "num"
    if is_url_token(lowered):
        return "url"
    return lowered


def normalize_tokens(corpus: Corpus) -> Corpus:
    sentences = tuple(
        Sentence(tuple(Token(normalize_surface(t.surface), t.label) for t in s.tokens))
        for s in corpus.sentences
    )
    return replace(corpus, sentences=sentences)


def extract_spans(labels: Sequence[str], sentence_index: int = 0) -> list[EntitySpan]:
    """Extract entity spans from a BIO or BIOSE label sequence.

    Invalid sequences are repaired leniently: a stray ``I-X`` (no matching
    open entity) opens a new entity, a stray ``E-X`` stands alone as a
    single-token entity. The result is deterministic, the spans are disjoint
    and ordered, and they cover exactly the non-O positions.
    """
    spans: list[EntitySpan] = []
    open_start: int | None = None
    open_type: str | None = None

    def close(end: int) -> None:
        nonlocal open_start, open_type
        if open_start is not None:
            spans.append(EntitySpan(sentence_index, open_start, end, open_type))
            open_start = None
            open_type = None

    for i, label in enumerate(labels):
        position, entity_type = split_label(label)
        if position == "O":
            close(i - 1)
        elif position == "B":
            close(i - 1)
            open_start, open_type = i, entity_type
        elif position == "S":
            close(i - 1)
            spans.append(EntitySpan(sentence_index, i, i, entity_type))
        elif position == "I":
            if open_type != entity_type:
                close(i - 1)
                open_start, open_type = i, entity_type
        elif position == "E":
            if open_type == entity_type:
                close(i)
            else:
                close(i - 1)
                spans.append(EntitySpan(sentence_index, i, i, entity_type))
        else:
            raise ValidationError(f"unknown label {label!r}")
    close(len(labels) - 1)
    return spans


def corpus_spans(corpus: Corpus) -> list[EntitySpan]:
    spans: list[EntitySpan] = []
    for index, sentence in enumerate(corpus.sentences):
        spans.extend(extract_spans(sentence.labels, index))
    return spans


def spans_to_labels(
    spans: Iterable[EntitySpan], length: int, schema: str = SCHEMA_BIOSE
) -> list[str]:
    """Render spans back into a label sequence of the given length."""
    labels = ["O"] * length
    for span in spans:
        if not 0 <= span.start <= span.end < length:
            raise ValidationError(f"span {span} out of bounds for length {length}")
        if schema == SCHEMA_BIOSE and span.start == span.end:
            labels[span.start] = join_label("S", span.entity_type)
            continue
        labels[span.start] = join_label("B", span.entity_type)
        for i in range(span.start + 1, span.end + 1):
            labels[i] = join_label("I", span.entity_type)
        if schema == SCHEMA_BIOSE:
            labels[span.end] = join_label("E", span.entity_type)
    return labels


def bio_to_biose(labels: Sequence[str]) -> list[str]:
    """Convert BIO labels to BIOSE: single-token entities become ``S-X``,
    the last token of a multi-token entity becomes ``E-X``."""
    return spans_to_labels(extract_spans(labels), len(labels), SCHEMA_BIOSE)


def biose_to_bio(labels: Sequence[str]) -> list[str]:
    """Inverse of :func:`bio_to_biose` on schema-valid input."""
    return spans_to_labels(extract_spans(labels), len(labels), SCHEMA_BIO)


def convert_schema(corpus: Corpus, schema: str) -> Corpus:
    """Return a copy of the corpus with labels rendered in ``schema``."""
    if schema not in _POSITIONS:
        raise ValidationError(f"unknown schema {schema!r}")
    if corpus.schema == schema:
        return corpus
    convert = bio_to_biose if schema == SCHEMA_BIOSE else biose_to_bio
    sentences = []
    for sentence in corpus.sentences:
        labels = convert(sentence.labels)
        sentences.append(
            Sentence(tuple(Token(t.surface, l) for t, l in zip(sentence.tokens, labels)))
        )
    return replace(corpus, sentences=tuple(sentences), schema=schema)


def filter_tags(corpus: Corpus, keep: Iterable[str]) -> Corpus:
    """Relabel tokens whose entity type is not in ``keep`` as ``O``."""
    keep = frozenset(keep)
    sentences = []
    for sentence in corpus.sentences:
        tokens = []
        for token in sentence.tokens:
            _, entity_type = split_label(token.label)
            if entity_type is not None and entity_type not in keep:
                tokens.append(Token(token.surface, "O"))
            else:
                tokens.append(token)
        sentences.append(Sentence(tuple(tokens)))
    return replace(corpus, sentences=tuple(sentences))


def shuffle_ablation(corpus: Corpus, seed: int) -> Corpus:
    """Destroy within-sentence order while keeping entities intact.

    Each sentence is segmented into atomic units (one per entity span, one
    per O token) and the units are permuted uniformly at random. Token order
    inside an entity, the labels attached to each token, and the per-sentence
    token multiset are all preserved.
    """
    rng = random.Random(seed)
    sentences = []
    for sentence in corpus.sentences:
        labels = sentence.labels
        starts = {s.start: s for s in extract_spans(labels)}
        units: list[list[Token]] = []
        i = 0
        while i < len(labels):
            span = starts.get(i)
            if span is not None:
                units.append(list(sentence.tokens[span.start : span.end + 1]))
                i = span.end + 1
            else:
                units.append([sentence.tokens[i]])
                i += 1
        rng.shuffle(units)
        sentences.append(Sentence(tuple(t for unit in units for t in unit)))
    return replace(corpus, sentences=tuple(sentences))


def corpus_from_sequences(
    surfaces: Sequence[Sequence[str]],
    labels: Sequence[Sequence[str]],
    language: str = "und",
    schema: str = SCHEMA_BIOSE,
) -> Corpus:
    """Build a corpus from parallel surface and label sequences."""
    if len(surfaces) != len(labels):
        raise ValidationError(
            f"{len(surfaces)} surface sequences vs {len(labels)} label sequences"
        )
    sentences = []
    for sent_surfaces, sent_labels in zip(surfaces, labels):
        if len(sent_surfaces) != len(sent_labels):
            raise ValidationError("surface/label length mismatch within a sentence")
        sentences.append(
            Sentence(tuple(Token(s, l) for s, l in zip(sent_surfaces, sent_labels)))
        )
    return Corpus(tuple(sentences), language=language, schema=schema)
