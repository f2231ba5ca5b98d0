"""Linear-chain CRF layer: log-partition, negative log-likelihood, Viterbi.

Scores live in a transition matrix of shape (L+2, L+2) over L labels plus
virtual start (index L) and end (index L+1) states. A path's score is the
sum of its per-position emissions, the start->first and last->end
transitions, and the adjacent-label transitions in between.
"""

from __future__ import annotations

import numpy as np
import torch

from .errors import ValidationError


def _check_shapes(emissions: torch.Tensor, transitions: torch.Tensor) -> int:
    if emissions.ndim != 2 or emissions.shape[0] < 1:
        raise ValidationError(f"emissions must be (T>=1, L), got {tuple(emissions.shape)}")
    n_labels = emissions.shape[1]
    if transitions.shape != (n_labels + 2, n_labels + 2):
        raise ValidationError(
            f"transitions must be ({n_labels + 2}, {n_labels + 2}), "
            f"got {tuple(transitions.shape)}"
        )
    return n_labels


def crf_log_partition(emissions: torch.Tensor, transitions: torch.Tensor) -> torch.Tensor:
    """Log of the summed exponentiated scores over all label paths, computed
    by the forward recursion in log space."""
    n_labels = _check_shapes(emissions, transitions)
    start, end = n_labels, n_labels + 1
    alpha = transitions[start, :n_labels] + emissions[0]
    for t in range(1, emissions.shape[0]):
        alpha = emissions[t] + torch.logsumexp(
            alpha.unsqueeze(1) + transitions[:n_labels, :n_labels], dim=0
        )
    return torch.logsumexp(alpha + transitions[:n_labels, end], dim=0)


def gold_path_score(
    emissions: torch.Tensor, transitions: torch.Tensor, labels: list[int] | np.ndarray
) -> torch.Tensor:
    """Score of one label path, including start/end transitions."""
    n_labels = _check_shapes(emissions, transitions)
    if len(labels) != emissions.shape[0]:
        raise ValidationError(f"{len(labels)} labels for {emissions.shape[0]} positions")
    if any(not 0 <= int(y) < n_labels for y in labels):
        raise ValidationError("label index out of range")
    start, end = n_labels, n_labels + 1
    score = transitions[start, int(labels[0])] + emissions[0, int(labels[0])]
    for t in range(1, emissions.shape[0]):
        prev, cur = int(labels[t - 1]), int(labels[t])
        score = score + transitions[prev, cur] + emissions[t, cur]
    return score + transitions[int(labels[-1]), end]


def crf_neg_log_likelihood(
    emissions: torch.Tensor, transitions: torch.Tensor, labels: list[int] | np.ndarray
) -> torch.Tensor:
    """log-partition minus the gold path score; non-negative."""
    return crf_log_partition(emissions, transitions) - gold_path_score(
        emissions, transitions, labels
    )


def viterbi_decode(emissions, transitions) -> list[int]:
    """Maximum-score label path. Ties break toward the smallest label index
    at every backtrack step (numpy argmax picks the first maximum)."""
    if isinstance(emissions, torch.Tensor):
        emissions = emissions.detach().cpu().numpy()
    if isinstance(transitions, torch.Tensor):
        transitions = transitions.detach().cpu().numpy()
    emissions = np.asarray(emissions, dtype=np.float64)
    transitions = np.asarray(transitions, dtype=np.float64)
    n_steps, n_labels = emissions.shape
    if n_steps < 1:
        raise ValidationError("emissions must cover at least one position")
    if transitions.shape != (n_labels + 2, n_labels + 2):
        raise ValidationError("transition matrix shape does not match emissions")
    start, end = n_labels, n_labels + 1

    score = transitions[start, :n_labels] + emissions[0]
    backpointers = np.zeros((n_steps, n_labels), dtype=np.int64)
    for t in range(1, n_steps):
        candidate = score[:, None] + transitions[:n_labels, :n_labels]
        backpointers[t] = np.argmax(candidate, axis=0)
        score = emissions[t] + np.max(candidate, axis=0)
    score = score + transitions[:n_labels, end]

    best = int(np.argmax(score))
    path = [best]
    for t in range(n_steps - 1, 0, -1):
        best = int(backpointers[t, best])
        path.append(best)
    path.reverse()
    return path
