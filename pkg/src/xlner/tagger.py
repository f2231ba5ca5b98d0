"""The Bi-LSTM-CRF sequence tagger as a scikit-learn estimator.

X is a list of sentences (each a sequence of token strings), y a parallel
list of label sequences, mirroring sklearn-crfsuite. Word vectors are
looked up on the surfaces as given; the character path sees the surfaces
romanized through the configured transliteration table, so one estimator
can train on a Latin-script source language and still decode a
non-Latin-script target at prediction time.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator

from .conll import corpus_from_sequences
from .embeddings import EmbeddingTable
from .errors import ValidationError
from .metrics import entity_f1
from .network import Hyperparams, TaggerNetwork, load_network, save_network
from .romanize import TransliterationTable, empty_table, romanize_sequences
from .training import TrainReport, train
from .validation import check_label_sequences, check_token_sequences


class BilstmCrfTagger(BaseEstimator):
    """Bi-LSTM-CRF tagger with frozen word vectors and a char-level LSTM.

    Parameters follow the usual estimator contract: stored verbatim in
    ``__init__``, validated and resolved in ``fit``. ``word_dim=None``
    infers the dimension from ``word_vectors``. ``input_mode`` selects
    which token representation feeds the token LSTM: "full" (word vector
    concatenated with the char encoding), "word_only", or "char_only".
    ``early_stop_f1`` stops training once the dev F1 reaches the given
    value; dev defaults to the training data when not supplied to ``fit``.
    """

    def __init__(
        self,
        word_vectors: EmbeddingTable | None = None,
        romanization: TransliterationTable | None = None,
        word_dim: int | None = None,
        char_dim: int = 300,
        char_hidden: int = 300,
        token_hidden: int = 300,
        dropout: float = 0.5,
        epochs: int = 200,
        learning_rate: float = 0.01,
        decay_rate: float = 0.05,
        momentum: float = 0.9,
        grad_clip: float = 5.0,
        input_mode: str = "full",
        seed: int = 0,
        early_stop_f1: float | None = None,
        verbose: bool = False,
    ):
        self.word_vectors = word_vectors
        self.romanization = romanization
        self.word_dim = word_dim
        self.char_dim = char_dim
        self.char_hidden = char_hidden
        self.token_hidden = token_hidden
        self.dropout = dropout
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.decay_rate = decay_rate
        self.momentum = momentum
        self.grad_clip = grad_clip
        self.input_mode = input_mode
        self.seed = seed
        self.early_stop_f1 = early_stop_f1
        self.verbose = verbose

    # ------------------------------------------------------------------

    def _resolved_hyperparams(self) -> Hyperparams:
        word_dim = self.word_dim
        if word_dim is None:
            word_dim = (
                self.word_vectors.dim if self.word_vectors is not None else 300
            )
        hyper = Hyperparams(
            word_dim=word_dim,
            char_dim=self.char_dim,
            char_hidden=self.char_hidden,
            token_hidden=self.token_hidden,
            dropout=self.dropout,
            epochs=self.epochs,
            learning_rate=self.learning_rate,
            decay_rate=self.decay_rate,
            momentum=self.momentum,
            grad_clip=self.grad_clip,
            input_mode=self.input_mode,
            seed=self.seed,
        )
        hyper.validate()
        return hyper

    def _table(self) -> TransliterationTable:
        return self.romanization if self.romanization is not None else empty_table()

    def _check_fitted(self) -> None:
        if not hasattr(self, "network_"):
            raise ValidationError("this tagger has not been fitted yet")

    # ------------------------------------------------------------------

    def fit(self, X, y, dev_X=None, dev_y=None):
        """Train on (X, y); when a dev pair is given, the epoch with the
        best dev F1 is kept, otherwise the training data itself serves as
        the selection set."""
        X = check_token_sequences(X)
        y = check_label_sequences(y, X)
        if (dev_X is None) != (dev_y is None):
            raise ValidationError("pass dev_X and dev_y together or neither")
        if dev_X is not None:
            dev_X = check_token_sequences(dev_X, name="dev_X")
            dev_y = check_label_sequences(dev_y, dev_X, name="dev_y")
        else:
            dev_X, dev_y = X, y

        hyper = self._resolved_hyperparams()
        if self.early_stop_f1 is not None and not 0.0 < self.early_stop_f1 <= 1.0:
            raise ValidationError(
                f"early_stop_f1 must be in (0, 1], got {self.early_stop_f1}"
            )
        labels = sorted({label for row in y for label in row})
        self.label_set_ = tuple(labels)
        self.classes_ = list(labels)

        table = self._table()
        train_corpus = corpus_from_sequences(X, y)
        dev_corpus = corpus_from_sequences(dev_X, dev_y)
        train_romanized = romanize_sequences(X, table)
        dev_romanized = romanize_sequences(dev_X, table)

        self.network_ = TaggerNetwork(hyper, self.label_set_, self.word_vectors)
        progress = None
        if self.verbose:
            progress = lambda s: print(
                f"epoch {s.epoch:3d}  lr {s.learning_rate:.4f}  "
                f"loss {s.mean_loss:.4f}  dev_f1 {s.dev_f1:.4f}"
            )
        self.train_report_: TrainReport = train(
            self.network_,
            train_corpus,
            train_romanized,
            dev_corpus,
            dev_romanized,
            early_stop_f1=self.early_stop_f1,
            progress=progress,
        )
        return self

    def predict(self, X) -> list[list[str]]:
        """Most likely label sequence per sentence."""
        self._check_fitted()
        X = check_token_sequences(X, allow_empty=True)
        romanized = romanize_sequences(X, self._table())
        return [
            self.network_.decode(surfaces, roman)
            for surfaces, roman in zip(X, romanized)
        ]

    def score(self, X, y) -> float:
        """Entity-level F1 of the predictions against y."""
        X = check_token_sequences(X)
        y = check_label_sequences(y, X)
        predictions = self.predict(X)
        return entity_f1(
            corpus_from_sequences(X, y), corpus_from_sequences(X, predictions)
        ).f1

    # ------------------------------------------------------------------

    def save(self, path) -> None:
        """Write the fitted network to a deterministic binary model file."""
        self._check_fitted()
        extra = {
            "romanization_language": (
                self.romanization.language if self.romanization is not None else None
            )
        }
        save_network(self.network_, path, extra_header=extra)

    @classmethod
    def load(
        cls,
        path,
        word_vectors: EmbeddingTable | None = None,
        romanization: TransliterationTable | None = None,
    ) -> "BilstmCrfTagger":
        """Rebuild a fitted tagger from ``save`` output.

        The same word-vector table used in training must be supplied; the
        file's embedding hash is checked against it.
        """
        network, header = load_network(path, word_vectors)
        hyper = network.hyper
        tagger = cls(
            word_vectors=word_vectors,
            romanization=romanization,
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
        )
        tagger.network_ = network
        tagger.label_set_ = network.label_set
        tagger.classes_ = list(network.label_set)
        return tagger
