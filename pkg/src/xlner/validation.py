"""Input checks for the estimator-style API.

Estimators take X as a list of token-string sequences and y as a parallel
list of label-string sequences — the same shape scikit-learn sequence
taggers such as sklearn-crfsuite use. These helpers normalize both to
lists of lists and fail early with a clear message.
"""

from __future__ import annotations

from typing import Sequence

from .errors import ValidationError


def _as_string_lists(data, name: str) -> list[list[str]]:
    if isinstance(data, str):
        raise ValidationError(
            f"{name} must be a sequence of sentences, not a single string"
        )
    try:
        rows = list(data)
    except TypeError:
        raise ValidationError(f"{name} must be an iterable of sentences")
    out = []
    for index, row in enumerate(rows):
        if isinstance(row, str):
            raise ValidationError(
                f"{name}[{index}] is a string; expected a sequence of tokens"
            )
        try:
            items = list(row)
        except TypeError:
            raise ValidationError(f"{name}[{index}] is not a sequence")
        for item in items:
            if not isinstance(item, str):
                raise ValidationError(
                    f"{name}[{index}] contains {type(item).__name__}; "
                    "expected str entries"
                )
        out.append(items)
    return out


def check_token_sequences(
    X, name: str = "X", allow_empty: bool = False
) -> list[list[str]]:
    """Validate a batch of sentences (each a sequence of token strings)."""
    rows = _as_string_lists(X, name)
    if not rows and not allow_empty:
        raise ValidationError(f"{name} contains no sentences")
    for index, row in enumerate(rows):
        if not row:
            raise ValidationError(f"{name}[{index}] is an empty sentence")
        for token in row:
            if token == "":
                raise ValidationError(f"{name}[{index}] contains an empty token")
    return rows


def check_label_sequences(
    y, X: Sequence[Sequence[str]], name: str = "y"
) -> list[list[str]]:
    """Validate labels parallel to already-checked token sequences."""
    rows = _as_string_lists(y, name)
    if len(rows) != len(X):
        raise ValidationError(
            f"{name} has {len(rows)} sentences but X has {len(X)}"
        )
    for index, (labels, tokens) in enumerate(zip(rows, X)):
        if len(labels) != len(tokens):
            raise ValidationError(
                f"sentence {index}: {len(labels)} labels for {len(tokens)} tokens"
            )
    return rows
