"""Bi-LSTM-CRF tagger network.

Every token is encoded as the concatenation of a frozen word vector
(looked up on the original surface) and the output of a character-level
bidirectional LSTM run over the romanized surface; a token-level
bidirectional LSTM plus a linear projection turns the sequence of token
encodings into per-label emission scores for the CRF. The LSTM cell and
all parameter updates are written out explicitly on torch tensors so the
arithmetic is fully visible to finite-difference checks; autograd is used
only to obtain gradients.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import struct
from dataclasses import dataclass, field
from typing import BinaryIO, Sequence

import numpy as np
import torch

from .crf import crf_neg_log_likelihood, viterbi_decode
from .embeddings import EmbeddingTable, OovVectors, lookup
from .errors import ValidationError

INPUT_MODES = ("full", "word_only", "char_only")

# Character inventory for the char-level LSTM: printable ASCII plus a
# blank symbol (empty romanization) and a catch-all for anything else.
CHAR_INVENTORY = "".join(chr(c) for c in range(0x20, 0x7F))
BLANK_INDEX = len(CHAR_INVENTORY)
UNK_CHAR_INDEX = BLANK_INDEX + 1
N_CHAR_SYMBOLS = UNK_CHAR_INDEX + 1

_CHAR_TO_INDEX = {ch: i for i, ch in enumerate(CHAR_INVENTORY)}

INIT_RANGE = 0.1

MODEL_MAGIC = b"XLNER-MODEL-1\n"


@dataclass
class Hyperparams:
    """Network sizes and optimization settings, with the defaults used
    throughout unless a config overrides them."""

    word_dim: int = 300
    char_dim: int = 300
    char_hidden: int = 300
    token_hidden: int = 300
    dropout: float = 0.5
    epochs: int = 200
    learning_rate: float = 0.01
    decay_rate: float = 0.05
    momentum: float = 0.9
    grad_clip: float = 5.0
    input_mode: str = "full"
    seed: int = 0

    def validate(self) -> None:
        for name in ("word_dim", "char_dim", "char_hidden", "token_hidden"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be a positive integer")
        if self.input_mode not in INPUT_MODES:
            raise ValidationError(
                f"input_mode must be one of {INPUT_MODES}, got {self.input_mode!r}"
            )
        if not 0.0 <= self.dropout < 1.0:
            raise ValidationError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.epochs < 1:
            raise ValidationError("epochs must be at least 1")
        if self.learning_rate <= 0:
            raise ValidationError("learning_rate must be positive")
        if self.decay_rate < 0:
            raise ValidationError("decay_rate must be non-negative")
        if self.momentum < 0:
            raise ValidationError("momentum must be non-negative")
        if self.grad_clip <= 0:
            raise ValidationError("grad_clip must be positive")
        if self.seed < 0:
            raise ValidationError("seed must be non-negative")

    @property
    def input_dim(self) -> int:
        if self.input_mode == "word_only":
            return self.word_dim
        if self.input_mode == "char_only":
            return 2 * self.char_hidden
        return self.word_dim + 2 * self.char_hidden

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, record: dict) -> "Hyperparams":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(record) - known
        if unknown:
            raise ValidationError(f"unknown hyperparameter(s): {sorted(unknown)}")
        hyper = cls(**record)
        hyper.validate()
        return hyper


def char_indices(romanized: str) -> list[int]:
    """Map a romanized surface to character symbol indices; an empty
    string becomes the single blank symbol."""
    if not romanized:
        return [BLANK_INDEX]
    return [_CHAR_TO_INDEX.get(ch, UNK_CHAR_INDEX) for ch in romanized]


def lstm_sequence(
    inputs: torch.Tensor,
    w_input: torch.Tensor,
    w_hidden: torch.Tensor,
    bias: torch.Tensor,
    reverse: bool = False,
) -> torch.Tensor:
    """Run a single-direction LSTM over (T, D) inputs and return the (T, H)
    hidden states in input order.

    The cell uses one bias vector and the gate layout (input, forget,
    cell, output) stacked along the first axis of the weights:

        z = W_x x_t + W_h h_{t-1} + b
        i, f = sigmoid(z_i), sigmoid(z_f)
        g, o = tanh(z_g), sigmoid(z_o)
        c_t = f * c_{t-1} + i * g
        h_t = o * tanh(c_t)
    """
    hidden = w_hidden.shape[1]
    h = torch.zeros(hidden, dtype=inputs.dtype)
    c = torch.zeros(hidden, dtype=inputs.dtype)
    steps = range(inputs.shape[0] - 1, -1, -1) if reverse else range(inputs.shape[0])
    outputs: list[torch.Tensor | None] = [None] * inputs.shape[0]
    for t in steps:
        z = w_input @ inputs[t] + w_hidden @ h + bias
        i = torch.sigmoid(z[:hidden])
        f = torch.sigmoid(z[hidden : 2 * hidden])
        g = torch.tanh(z[2 * hidden : 3 * hidden])
        o = torch.sigmoid(z[3 * hidden :])
        c = f * c + i * g
        h = o * torch.tanh(c)
        outputs[t] = h
    return torch.stack(outputs)  # type: ignore[arg-type]


def _inverted_dropout(
    x: torch.Tensor, rate: float, generator: torch.Generator
) -> torch.Tensor:
    keep = (
        torch.rand(x.shape, generator=generator, dtype=x.dtype) >= rate
    ).to(x.dtype)
    return x * keep / (1.0 - rate)


class TaggerNetwork:
    """Parameter container plus forward passes for the Bi-LSTM-CRF tagger.

    Word vectors come from a frozen embedding table and are never part of
    the trainable state; out-of-vocabulary surfaces get deterministic
    per-word random vectors. All trainable tensors are initialized
    uniformly in [-0.1, 0.1] from a generator seeded by ``hyper.seed``.
    """

    def __init__(
        self,
        hyper: Hyperparams,
        label_set: Sequence[str],
        word_table: EmbeddingTable | None,
        dtype: torch.dtype = torch.float64,
    ):
        hyper.validate()
        labels = tuple(label_set)
        if len(labels) < 1:
            raise ValidationError("label set must not be empty")
        if len(set(labels)) != len(labels):
            raise ValidationError("label set contains duplicates")
        if hyper.input_mode != "char_only":
            if word_table is None:
                raise ValidationError(
                    f"input_mode={hyper.input_mode!r} requires a word embedding table"
                )
            if word_table.dim != hyper.word_dim:
                raise ValidationError(
                    f"embedding table is {word_table.dim}-dimensional but "
                    f"word_dim={hyper.word_dim}"
                )
        self.hyper = hyper
        self.label_set = labels
        self.word_table = word_table
        self.dtype = dtype
        self.oov = OovVectors(hyper.word_dim, hyper.seed)
        self._label_to_index = {label: i for i, label in enumerate(labels)}
        self.params: dict[str, torch.Tensor] = {}
        self._init_params()

    # ------------------------------------------------------------------
    # parameters

    def _init_params(self) -> None:
        hyper = self.hyper
        n_labels = len(self.label_set)
        # The char-path parameters are allocated in every mode; word_only
        # simply never touches them, so their gradients stay identically
        # zero rather than the parameter group changing shape per mode.
        shapes: dict[str, tuple[int, ...]] = {}
        shapes["char_embed"] = (N_CHAR_SYMBOLS, hyper.char_dim)
        for prefix in ("char_fwd", "char_bwd"):
            shapes[f"{prefix}_w_input"] = (4 * hyper.char_hidden, hyper.char_dim)
            shapes[f"{prefix}_w_hidden"] = (4 * hyper.char_hidden, hyper.char_hidden)
            shapes[f"{prefix}_bias"] = (4 * hyper.char_hidden,)
        for prefix in ("token_fwd", "token_bwd"):
            shapes[f"{prefix}_w_input"] = (4 * hyper.token_hidden, hyper.input_dim)
            shapes[f"{prefix}_w_hidden"] = (4 * hyper.token_hidden, hyper.token_hidden)
            shapes[f"{prefix}_bias"] = (4 * hyper.token_hidden,)
        shapes["proj_weight"] = (n_labels, 2 * hyper.token_hidden)
        shapes["proj_bias"] = (n_labels,)
        shapes["transitions"] = (n_labels + 2, n_labels + 2)

        generator = torch.Generator()
        generator.manual_seed(hyper.seed)
        for name, shape in shapes.items():
            tensor = torch.empty(shape, dtype=self.dtype)
            tensor.uniform_(-INIT_RANGE, INIT_RANGE, generator=generator)
            tensor.requires_grad_(True)
            self.params[name] = tensor

    def parameter_names(self) -> list[str]:
        return list(self.params)

    def zero_grad(self) -> None:
        for tensor in self.params.values():
            tensor.grad = None

    def clone_state(self) -> dict[str, torch.Tensor]:
        return {name: t.detach().clone() for name, t in self.params.items()}

    def load_state(self, state: dict[str, torch.Tensor]) -> None:
        if set(state) != set(self.params):
            raise ValidationError("parameter names do not match this network")
        with torch.no_grad():
            for name, tensor in self.params.items():
                if state[name].shape != tensor.shape:
                    raise ValidationError(f"shape mismatch for parameter {name!r}")
                tensor.copy_(state[name].to(self.dtype))

    def state_checksum(self) -> str:
        digest = hashlib.sha256()
        for name in self.params:
            digest.update(name.encode("utf-8"))
            digest.update(_param_bytes(self.params[name]))
        return digest.hexdigest()

    # ------------------------------------------------------------------
    # labels

    def label_indices(self, labels: Sequence[str]) -> list[int]:
        try:
            return [self._label_to_index[label] for label in labels]
        except KeyError as exc:
            raise ValidationError(f"label {exc.args[0]!r} not in the model's label set")

    def labels_from_indices(self, indices: Sequence[int]) -> list[str]:
        return [self.label_set[i] for i in indices]

    # ------------------------------------------------------------------
    # forward passes

    def _word_vector(self, surface: str) -> torch.Tensor:
        assert self.word_table is not None
        vec = lookup(self.word_table, surface, self.oov)
        return torch.as_tensor(vec, dtype=self.dtype)

    def _char_vector(self, romanized: str) -> torch.Tensor:
        indices = char_indices(romanized)
        chars = self.params["char_embed"][indices]
        forward = lstm_sequence(
            chars,
            self.params["char_fwd_w_input"],
            self.params["char_fwd_w_hidden"],
            self.params["char_fwd_bias"],
        )
        backward = lstm_sequence(
            chars,
            self.params["char_bwd_w_input"],
            self.params["char_bwd_w_hidden"],
            self.params["char_bwd_bias"],
            reverse=True,
        )
        # Final state of each direction: last row forward, first row backward.
        return torch.cat([forward[-1], backward[0]])

    def emissions(
        self,
        surfaces: Sequence[str],
        romanized: Sequence[str],
        training: bool = False,
        dropout_generator: torch.Generator | None = None,
    ) -> torch.Tensor:
        """Per-token label scores, shape (T, L)."""
        if len(surfaces) != len(romanized):
            raise ValidationError(
                f"{len(surfaces)} surfaces but {len(romanized)} romanized forms"
            )
        if len(surfaces) == 0:
            raise ValidationError("cannot score an empty sentence")
        apply_dropout = training and self.hyper.dropout > 0.0
        if apply_dropout and dropout_generator is None:
            raise ValidationError("training-mode forward pass needs a dropout generator")
        mode = self.hyper.input_mode

        token_inputs = []
        for surface, roman in zip(surfaces, romanized):
            parts = []
            if mode != "char_only":
                parts.append(self._word_vector(surface))
            if mode != "word_only":
                char_vec = self._char_vector(roman)
                if apply_dropout:
                    char_vec = _inverted_dropout(
                        char_vec, self.hyper.dropout, dropout_generator
                    )
                parts.append(char_vec)
            token_inputs.append(torch.cat(parts) if len(parts) > 1 else parts[0])
        inputs = torch.stack(token_inputs)

        forward = lstm_sequence(
            inputs,
            self.params["token_fwd_w_input"],
            self.params["token_fwd_w_hidden"],
            self.params["token_fwd_bias"],
        )
        backward = lstm_sequence(
            inputs,
            self.params["token_bwd_w_input"],
            self.params["token_bwd_w_hidden"],
            self.params["token_bwd_bias"],
            reverse=True,
        )
        hidden = torch.cat([forward, backward], dim=1)
        if apply_dropout:
            hidden = _inverted_dropout(hidden, self.hyper.dropout, dropout_generator)
        return hidden @ self.params["proj_weight"].T + self.params["proj_bias"]

    def sentence_loss(
        self,
        surfaces: Sequence[str],
        romanized: Sequence[str],
        label_indices: Sequence[int],
        training: bool = False,
        dropout_generator: torch.Generator | None = None,
    ) -> torch.Tensor:
        if len(label_indices) != len(surfaces):
            raise ValidationError(
                f"{len(label_indices)} labels for {len(surfaces)} tokens"
            )
        scores = self.emissions(surfaces, romanized, training, dropout_generator)
        return crf_neg_log_likelihood(scores, self.params["transitions"], list(label_indices))

    def decode(self, surfaces: Sequence[str], romanized: Sequence[str]) -> list[str]:
        """Most likely label sequence for one sentence (no dropout)."""
        with torch.no_grad():
            scores = self.emissions(surfaces, romanized, training=False)
            path = viterbi_decode(scores, self.params["transitions"])
        return self.labels_from_indices(path)


# ----------------------------------------------------------------------
# serialization
#
# The on-disk format is a magic line, an 8-byte big-endian header length,
# a canonical JSON header, and the raw little-endian float64 bytes of
# every parameter in header order. Nothing in the file depends on when or
# where it was written, so retraining with the same inputs reproduces the
# bytes exactly.


def _param_bytes(tensor: torch.Tensor) -> bytes:
    array = tensor.detach().cpu().numpy().astype("<f8")
    return array.tobytes(order="C")


def save_network(network: TaggerNetwork, path, extra_header: dict | None = None) -> None:
    header = {
        "format": 1,
        "hyper": network.hyper.as_dict(),
        "label_set": list(network.label_set),
        "char_symbols": N_CHAR_SYMBOLS,
        "embedding_hash": (
            network.word_table.content_hash() if network.word_table is not None else None
        ),
        "params": [
            {"name": name, "shape": list(tensor.shape)}
            for name, tensor in network.params.items()
        ],
    }
    if extra_header:
        overlap = set(extra_header) & set(header)
        if overlap:
            raise ValidationError(f"extra header keys collide: {sorted(overlap)}")
        header.update(extra_header)
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as handle:
        handle.write(MODEL_MAGIC)
        handle.write(struct.pack(">Q", len(blob)))
        handle.write(blob)
        for tensor in network.params.values():
            handle.write(_param_bytes(tensor))


def _read_exact(handle: BinaryIO, count: int, what: str) -> bytes:
    data = handle.read(count)
    if len(data) != count:
        raise ValidationError(f"model file truncated while reading {what}")
    return data


def load_network(
    path, word_table: EmbeddingTable | None, dtype: torch.dtype = torch.float64
) -> tuple[TaggerNetwork, dict]:
    """Rebuild a network from a model file.

    The header's embedding hash is checked against ``word_table`` so a
    model cannot silently run with different vectors than it was trained
    with. Returns the network and the full header dict.
    """
    with open(path, "rb") as handle:
        magic = handle.read(len(MODEL_MAGIC))
        if magic != MODEL_MAGIC:
            raise ValidationError(f"{path} is not a tagger model file")
        (header_len,) = struct.unpack(">Q", _read_exact(handle, 8, "header length"))
        try:
            header = json.loads(_read_exact(handle, header_len, "header"))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"model header is not valid JSON: {exc}")
        if header.get("format") != 1:
            raise ValidationError(f"unsupported model format {header.get('format')!r}")

        hyper = Hyperparams.from_dict(header["hyper"])
        stored_hash = header.get("embedding_hash")
        if stored_hash is None:
            if hyper.input_mode != "char_only":
                raise ValidationError("model header lacks an embedding hash")
        else:
            if word_table is None:
                raise ValidationError(
                    "this model was trained with word vectors; pass the same table"
                )
            if word_table.content_hash() != stored_hash:
                raise ValidationError(
                    "word embedding table does not match the one used in training"
                )
        network = TaggerNetwork(hyper, header["label_set"], word_table, dtype=dtype)

        stored = {entry["name"]: entry["shape"] for entry in header["params"]}
        if set(stored) != set(network.params):
            raise ValidationError("model parameter list does not match the architecture")
        state: dict[str, torch.Tensor] = {}
        for entry in header["params"]:
            name, shape = entry["name"], tuple(entry["shape"])
            if shape != tuple(network.params[name].shape):
                raise ValidationError(f"stored shape for {name!r} does not match")
            count = int(np.prod(shape)) if shape else 1
            raw = _read_exact(handle, 8 * count, f"parameter {name!r}")
            array = np.frombuffer(raw, dtype="<f8").reshape(shape)
            state[name] = torch.as_tensor(array.copy(), dtype=dtype)
        trailing = handle.read(1)
        if trailing:
            raise ValidationError("model file has trailing bytes")
    network.load_state(state)
    return network, header
