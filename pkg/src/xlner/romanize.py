"""Table-driven transliteration into printable ASCII.

Words are scanned left to right with longest-match-first against the rule
keys; printable ASCII characters pass through unchanged, unmatched non-ASCII
characters map to a configurable placeholder (removed by default). The
romanized forms feed the character-level encoder only; word-embedding
lookups keep using the original surfaces.
"""

from __future__ import annotations

import logging
import unicodedata
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, TextIO

from .conll import Corpus
from .errors import ParseError, ValidationError

logger = logging.getLogger(__name__)

BUILTIN_LANGUAGES = ("german", "bengali")


def is_printable_ascii(text: str) -> bool:
    return all(0x20 <= ord(c) <= 0x7E for c in text)


@dataclass(frozen=True)
class TransliterationTable:
    """Ordered (grapheme key, ASCII replacement) rules for one language."""

    rules: tuple[tuple[str, str], ...]
    language: str = "und"

    def match_order(self) -> list[tuple[str, str]]:
        """Rules sorted longest key first; file order breaks length ties."""
        return sorted(self.rules, key=lambda rule: -len(rule[0]))


def load_table(text: str | TextIO | Iterable[str], language: str = "und") -> TransliterationTable:
    """Parse one ``key<TAB>replacement`` rule per line; ``#`` lines are
    comments. Replacements must be printable ASCII, keys non-empty. Keys that
    are themselves pure ASCII would break idempotence and are only warned
    about."""
    if isinstance(text, str):
        lines: Iterable[str] = text.splitlines()
    else:
        lines = text
    rules: list[tuple[str, str]] = []
    ascii_keys = 0
    for line_number, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        if "\t" not in line:
            raise ParseError(
                f"expected 'key<TAB>replacement', found {line!r}",
                line_number=line_number,
            )
        key, replacement = line.split("\t", 1)
        if not key:
            raise ParseError("empty grapheme key", line_number=line_number)
        if not is_printable_ascii(replacement):
            raise ParseError(
                f"replacement {replacement!r} is not printable ASCII",
                line_number=line_number,
            )
        if is_printable_ascii(key):
            ascii_keys += 1
        rules.append((unicodedata.normalize("NFC", key), replacement))
    if ascii_keys:
        logger.warning(
            "%d rule keys are pure ASCII; romanization will not be idempotent",
            ascii_keys,
        )
    return TransliterationTable(tuple(rules), language=language)


def builtin_table(language: str) -> TransliterationTable:
    """Rule table bundled with the package (``german`` or ``bengali``)."""
    if language not in BUILTIN_LANGUAGES:
        raise ValidationError(
            f"no builtin romanization table for {language!r}; "
            f"available: {', '.join(BUILTIN_LANGUAGES)}"
        )
    path = resources.files(__package__).joinpath(f"data/romanization/{language}.tsv")
    return load_table(path.read_text(encoding="utf-8"), language=language)


def empty_table(language: str = "und") -> TransliterationTable:
    """A table with no rules: ASCII passes through, everything else drops."""
    return TransliterationTable((), language=language)


def romanize_with_count(
    word: str, table: TransliterationTable, unmatched: str = ""
) -> tuple[str, int]:
    """Romanize one word, also returning how many characters fell through to
    the unmatched placeholder."""
    if not is_printable_ascii(unmatched):
        raise ValidationError("unmatched placeholder must be printable ASCII")
    word = unicodedata.normalize("NFC", word)
    order = table.match_order()
    out: list[str] = []
    dropped = 0
    i = 0
    while i < len(word):
        for key, replacement in order:
            if word.startswith(key, i):
                out.append(replacement)
                i += len(key)
                break
        else:
            char = word[i]
            if 0x20 <= ord(char) <= 0x7E:
                out.append(char)
            else:
                out.append(unmatched)
                dropped += 1
            i += 1
    return "".join(out), dropped


def romanize(word: str, table: TransliterationTable, unmatched: str = "") -> str:
    return romanize_with_count(word, table, unmatched)[0]


@dataclass(frozen=True)
class RomanizedSurfaces:
    """Per-token romanized surfaces, parallel to a corpus, plus the count of
    characters that hit the unmatched placeholder."""

    sentences: tuple[tuple[str, ...], ...]
    dropped: int = 0


def romanize_corpus(
    corpus: Corpus, table: TransliterationTable, unmatched: str = ""
) -> RomanizedSurfaces:
    """Romanized surface per token; the corpus itself is untouched."""
    sentences = []
    dropped = 0
    for sentence in corpus.sentences:
        romanized = []
        for token in sentence.tokens:
            word, n = romanize_with_count(token.surface, table, unmatched)
            romanized.append(word)
            dropped += n
        sentences.append(tuple(romanized))
    return RomanizedSurfaces(tuple(sentences), dropped)


def romanize_sequences(
    surfaces: Iterable[Iterable[str]], table: TransliterationTable, unmatched: str = ""
) -> list[list[str]]:
    """Romanize raw token-sequence input (the estimator-facing variant)."""
    return [[romanize(word, table, unmatched) for word in sentence] for sentence in surfaces]
