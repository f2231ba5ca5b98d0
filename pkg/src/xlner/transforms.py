"""scikit-learn-style transformers over token sequences.

All three transformers take X as a list of sentences, each a sequence of
token strings, and return the same shape. Labels never pass through a
transformer, so any of them can sit in front of the tagger in a
``sklearn.pipeline.Pipeline``: y is forwarded to the final estimator
untouched while X is rewritten token by token.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin

from .conll import normalize_surface
from .embeddings import EmbeddingTable
from .errors import ValidationError
from .romanize import TransliterationTable, builtin_table, empty_table, romanize
from .translate import BilingualDictionary, TranslationStats, select_candidate
from .validation import check_token_sequences


class TokenNormalizer(BaseEstimator, TransformerMixin):
    """Lowercase tokens and collapse numbers/URLs to placeholder tokens."""

    def fit(self, X, y=None):
        check_token_sequences(X, allow_empty=True)
        self.fitted_ = True
        return self

    def transform(self, X):
        rows = check_token_sequences(X, allow_empty=True)
        return [[normalize_surface(token) for token in row] for row in rows]


class DictionaryTranslator(BaseEstimator, TransformerMixin):
    """Replace each dictionary-covered token with its best translation.

    Candidate choice combines word-to-candidate similarity with
    distance-discounted candidate-to-context similarity, weighted by
    ``alpha``; tokens without a dictionary entry pass through. The last
    ``transform`` call's replaced/kept counts are kept in ``stats_``.
    """

    def __init__(
        self,
        dictionary: BilingualDictionary | None = None,
        word_vectors: EmbeddingTable | None = None,
        alpha: float = 0.5,
    ):
        self.dictionary = dictionary
        self.word_vectors = word_vectors
        self.alpha = alpha

    def _check_params(self) -> None:
        if self.dictionary is None:
            raise ValidationError("DictionaryTranslator needs a dictionary")
        if self.word_vectors is None:
            raise ValidationError("DictionaryTranslator needs word vectors")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError(f"alpha must be in [0, 1], got {self.alpha}")

    def fit(self, X, y=None):
        self._check_params()
        check_token_sequences(X, allow_empty=True)
        self.fitted_ = True
        return self

    def transform(self, X):
        self._check_params()
        rows = check_token_sequences(X, allow_empty=True)
        stats = TranslationStats()
        out = []
        for row in rows:
            translated = []
            for index, token in enumerate(row):
                choice = select_candidate(
                    row, index, self.dictionary, self.word_vectors, self.alpha
                )
                if choice is None:
                    stats.kept += 1
                    translated.append(token)
                else:
                    stats.replaced += 1
                    translated.append(choice)
            out.append(translated)
        self.stats_ = stats
        return out


class Romanizer(BaseEstimator, TransformerMixin):
    """Rewrite tokens into printable ASCII using a transliteration table.

    Either pass a loaded ``table`` or name a bundled ``language``
    ("german", "bengali"); with neither, ASCII passes through and other
    characters are replaced by ``unmatched`` (dropped for the default "").
    """

    def __init__(
        self,
        table: TransliterationTable | None = None,
        language: str | None = None,
        unmatched: str = "",
    ):
        self.table = table
        self.language = language
        self.unmatched = unmatched

    def _resolve_table(self) -> TransliterationTable:
        if self.table is not None and self.language is not None:
            raise ValidationError("pass either table or language, not both")
        if self.table is not None:
            return self.table
        if self.language is not None:
            return builtin_table(self.language)
        return empty_table()

    def fit(self, X, y=None):
        self.table_ = self._resolve_table()
        check_token_sequences(X, allow_empty=True)
        self.fitted_ = True
        return self

    def transform(self, X):
        table = getattr(self, "table_", None) or self._resolve_table()
        rows = check_token_sequences(X, allow_empty=True)
        return [[romanize(token, table, self.unmatched) for token in row] for row in rows]
