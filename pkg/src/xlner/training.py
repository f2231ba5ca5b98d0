"""Training loop for the tagger network.

One sentence per update: SGD with momentum, every gradient component
clipped to [-grad_clip, grad_clip] before the velocity update, and a
fixed learning-rate schedule lr_e = lr / (1 + e * decay_rate) with e
counted from 0. After the final epoch the parameters are rolled back to
the epoch with the best dev F1 (earliest epoch on ties).

Also hosts the finite-difference gradient checker used to validate the
backward pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import torch

from .conll import Corpus, Sentence, Token
from .errors import TrainingError, ValidationError
from .metrics import entity_f1
from .network import Hyperparams, TaggerNetwork

# Sub-streams derived from the run seed, so shuffling, dropout, and
# out-of-vocabulary vectors draw from independent generators.
_SHUFFLE_STREAM = 1
_DROPOUT_STREAM = 2


def learning_rate_for_epoch(base_rate: float, decay_rate: float, epoch: int) -> float:
    """Learning rate for a 0-based epoch index."""
    if base_rate <= 0:
        raise ValidationError("base learning rate must be positive")
    if decay_rate < 0:
        raise ValidationError("decay rate must be non-negative")
    if epoch < 0:
        raise ValidationError("epoch index must be non-negative")
    return base_rate / (1.0 + epoch * decay_rate)


class MomentumSgd:
    """Plain SGD-with-momentum over the network's parameter dict.

        g   <- clip(grad, [-c, c])        (component-wise)
        v   <- momentum * v + g
        p   <- p - lr * v
    """

    def __init__(self, params: dict[str, torch.Tensor], momentum: float, grad_clip: float):
        if momentum < 0:
            raise ValidationError("momentum must be non-negative")
        if grad_clip <= 0:
            raise ValidationError("grad_clip must be positive")
        self.params = params
        self.momentum = momentum
        self.grad_clip = grad_clip
        self.velocity = {
            name: torch.zeros_like(tensor) for name, tensor in params.items()
        }

    def step(self, learning_rate: float) -> None:
        with torch.no_grad():
            for name, tensor in self.params.items():
                if tensor.grad is None:
                    continue
                grad = tensor.grad.clamp(-self.grad_clip, self.grad_clip)
                self.velocity[name].mul_(self.momentum).add_(grad)
                tensor.add_(self.velocity[name], alpha=-learning_rate)
                tensor.grad = None


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    learning_rate: float
    mean_loss: float
    dev_f1: float


@dataclass
class TrainReport:
    epochs: list[EpochStats] = field(default_factory=list)
    selected_epoch: int = -1
    stopped_early: bool = False
    final_checksum: str = ""

    @property
    def best_dev_f1(self) -> float:
        if self.selected_epoch < 0:
            return 0.0
        return self.epochs[self.selected_epoch].dev_f1

    def as_record(self) -> dict:
        return {
            "epochs": [
                {
                    "epoch": s.epoch,
                    "learning_rate": s.learning_rate,
                    "mean_loss": s.mean_loss,
                    "dev_f1": s.dev_f1,
                }
                for s in self.epochs
            ],
            "selected_epoch": self.selected_epoch,
            "best_dev_f1": self.best_dev_f1,
            "stopped_early": self.stopped_early,
            "final_checksum": self.final_checksum,
        }

    def as_text(self) -> str:
        lines = ["epoch      lr    mean_loss   dev_f1"]
        for s in self.epochs:
            lines.append(
                f"{s.epoch:5d}  {s.learning_rate:.4f}  {s.mean_loss:11.6f}  {s.dev_f1:.4f}"
            )
        lines.append(
            f"selected epoch {self.selected_epoch} (dev F1 {self.best_dev_f1:.4f})"
            + ("; stopped early" if self.stopped_early else "")
        )
        return "\n".join(lines)


def predict_corpus(
    network: TaggerNetwork, corpus: Corpus, romanized: Sequence[Sequence[str]]
) -> Corpus:
    """Decode every sentence; surfaces are kept, labels replaced."""
    if len(romanized) != len(corpus.sentences):
        raise ValidationError(
            f"{len(romanized)} romanized sentences for {len(corpus.sentences)} inputs"
        )
    out = []
    for sentence, roman in zip(corpus.sentences, romanized):
        labels = network.decode(sentence.surfaces, roman)
        out.append(
            Sentence(
                tuple(
                    Token(tok.surface, label)
                    for tok, label in zip(sentence.tokens, labels)
                )
            )
        )
    return Corpus(tuple(out), language=corpus.language, schema=corpus.schema)


def _check_romanized(corpus: Corpus, romanized: Sequence[Sequence[str]], name: str) -> None:
    if len(romanized) != len(corpus.sentences):
        raise ValidationError(
            f"{name}: {len(romanized)} romanized sentences for "
            f"{len(corpus.sentences)} corpus sentences"
        )
    for index, (sentence, roman) in enumerate(zip(corpus.sentences, romanized)):
        if len(roman) != len(sentence.tokens):
            raise ValidationError(f"{name}: length mismatch at sentence {index}")


def train(
    network: TaggerNetwork,
    train_corpus: Corpus,
    train_romanized: Sequence[Sequence[str]],
    dev_corpus: Corpus,
    dev_romanized: Sequence[Sequence[str]],
    early_stop_f1: float | None = None,
    progress: Callable[[EpochStats], None] | None = None,
) -> TrainReport:
    """Fit the network in place and return the per-epoch log.

    ``early_stop_f1`` ends training as soon as a dev F1 at or above the
    threshold is seen; with the default None, all configured epochs run.
    """
    hyper = network.hyper
    if not train_corpus.sentences:
        raise ValidationError("training corpus is empty")
    if not dev_corpus.sentences:
        raise ValidationError("dev corpus is empty")
    _check_romanized(train_corpus, train_romanized, "train")
    _check_romanized(dev_corpus, dev_romanized, "dev")
    gold_indices = [
        network.label_indices(sentence.labels) for sentence in train_corpus.sentences
    ]

    shuffle_rng = np.random.default_rng(
        np.random.SeedSequence([hyper.seed, _SHUFFLE_STREAM])
    )
    dropout_generator = torch.Generator()
    dropout_generator.manual_seed(
        int(np.random.SeedSequence([hyper.seed, _DROPOUT_STREAM]).generate_state(1)[0])
    )
    optimizer = MomentumSgd(network.params, hyper.momentum, hyper.grad_clip)

    report = TrainReport()
    best_f1 = -1.0
    best_state: dict[str, torch.Tensor] | None = None
    n_sentences = len(train_corpus.sentences)

    for epoch in range(hyper.epochs):
        rate = learning_rate_for_epoch(hyper.learning_rate, hyper.decay_rate, epoch)
        order = shuffle_rng.permutation(n_sentences)
        total_loss = 0.0
        for index in order:
            sentence = train_corpus.sentences[index]
            network.zero_grad()
            loss = network.sentence_loss(
                sentence.surfaces,
                train_romanized[index],
                gold_indices[index],
                training=True,
                dropout_generator=dropout_generator,
            )
            value = float(loss.detach())
            if not math.isfinite(value):
                raise TrainingError(
                    f"non-finite loss {value}",
                    epoch=epoch,
                    sentence_index=int(index),
                )
            loss.backward()
            optimizer.step(rate)
            total_loss += value

        predictions = predict_corpus(network, dev_corpus, dev_romanized)
        dev_f1 = entity_f1(dev_corpus, predictions).f1
        stats = EpochStats(epoch, rate, total_loss / n_sentences, dev_f1)
        report.epochs.append(stats)
        if progress is not None:
            progress(stats)

        if dev_f1 > best_f1:
            best_f1 = dev_f1
            best_state = network.clone_state()
            report.selected_epoch = epoch
        if early_stop_f1 is not None and best_f1 >= early_stop_f1:
            report.stopped_early = True
            break

    assert best_state is not None
    network.load_state(best_state)
    report.final_checksum = network.state_checksum()
    return report


# ----------------------------------------------------------------------
# gradient checking


@dataclass(frozen=True)
class GroupCheck:
    name: str
    n_checked: int
    max_rel_error: float
    max_abs_backprop: float


@dataclass(frozen=True)
class GradientCheckReport:
    epsilon: float
    groups: tuple[GroupCheck, ...]

    @property
    def max_rel_error(self) -> float:
        return max((g.max_rel_error for g in self.groups), default=0.0)

    def as_text(self) -> str:
        lines = [f"central differences, epsilon = {self.epsilon:g}"]
        for g in self.groups:
            lines.append(
                f"{g.name:20s}  checked {g.n_checked:3d}  "
                f"max rel err {g.max_rel_error:.3e}"
            )
        lines.append(f"worst group: {self.max_rel_error:.3e}")
        return "\n".join(lines)


def check_gradients(
    network: TaggerNetwork,
    surfaces: Sequence[str],
    romanized: Sequence[str],
    labels: Sequence[str],
    epsilon: float = 1e-5,
    samples_per_group: int = 8,
    seed: int = 0,
    denominator_floor: float = 1e-5,
) -> GradientCheckReport:
    """Compare backward-pass gradients against central finite differences.

    For sampled components of every parameter group the relative error
        |g_bp - g_fd| / max(|g_bp| + |g_fd|, denominator_floor)
    is computed with g_fd = (f(p + eps) - f(p - eps)) / (2 eps). The
    floor keeps the ratio meaningful where the true gradient is so small
    that the difference quotient is dominated by float64 rounding of the
    loss (absolute noise ~ eps_machine * |loss| / epsilon); a genuinely
    wrong backward pass still shows errors orders of magnitude above any
    tolerance. The network must be in float64; dropout is off so the loss
    is a deterministic function of the parameters.
    """
    if network.dtype != torch.float64:
        raise ValidationError("gradient checking requires a float64 network")
    label_idx = network.label_indices(labels)

    def loss_value() -> torch.Tensor:
        return network.sentence_loss(surfaces, romanized, label_idx, training=False)

    network.zero_grad()
    loss_value().backward()
    backprop = {
        name: (
            tensor.grad.detach().clone()
            if tensor.grad is not None
            else torch.zeros_like(tensor)
        )
        for name, tensor in network.params.items()
    }
    network.zero_grad()

    rng = np.random.default_rng(seed)
    groups = []
    for name, tensor in network.params.items():
        flat = tensor.detach().view(-1)
        grads = backprop[name].view(-1)
        count = min(samples_per_group, flat.numel())
        indices = rng.choice(flat.numel(), size=count, replace=False)
        worst = 0.0
        for i in indices:
            i = int(i)
            original = float(flat[i])
            with torch.no_grad():
                flat[i] = original + epsilon
                plus = float(loss_value())
                flat[i] = original - epsilon
                minus = float(loss_value())
                flat[i] = original
            fd = (plus - minus) / (2.0 * epsilon)
            bp = float(grads[i])
            rel = abs(bp - fd) / max(abs(bp) + abs(fd), denominator_floor)
            worst = max(worst, rel)
        groups.append(
            GroupCheck(
                name=name,
                n_checked=count,
                max_rel_error=worst,
                max_abs_backprop=float(backprop[name].abs().max()),
            )
        )
    return GradientCheckReport(epsilon=epsilon, groups=tuple(groups))
