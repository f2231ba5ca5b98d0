import numpy as np
import pytest
import torch

from helpers import random_table
from xlner.embeddings import EmbeddingTable
from xlner.errors import ValidationError
from xlner.network import (
    BLANK_INDEX,
    N_CHAR_SYMBOLS,
    UNK_CHAR_INDEX,
    Hyperparams,
    TaggerNetwork,
    char_indices,
    load_network,
    lstm_sequence,
    save_network,
)

LABELS = ("O", "B-PER", "E-PER", "S-LOC")


def tiny_hyper(**overrides) -> Hyperparams:
    base = dict(
        word_dim=5,
        char_dim=4,
        char_hidden=3,
        token_hidden=4,
        dropout=0.0,
        epochs=1,
        seed=13,
        input_mode="full",
    )
    base.update(overrides)
    return Hyperparams(**base)


@pytest.fixture
def table():
    rng = np.random.default_rng(2)
    return random_table(rng, ["anna", "berlin", "works", "in"], 5)


@pytest.fixture
def net(table):
    return TaggerNetwork(tiny_hyper(), LABELS, table)


SENT = (["anna", "works", "in", "berlin"], ["anna", "works", "in", "berlin"])


class TestHyperparams:
    def test_defaults_are_the_training_settings(self):
        h = Hyperparams()
        assert (h.word_dim, h.char_dim, h.char_hidden, h.token_hidden) == (300,) * 4
        assert h.dropout == 0.5
        assert h.epochs == 200
        assert h.learning_rate == 0.01
        assert h.decay_rate == 0.05
        assert h.momentum == 0.9
        assert h.grad_clip == 5.0
        assert h.input_mode == "full"

    def test_input_dim_per_mode(self):
        assert tiny_hyper().input_dim == 5 + 2 * 3
        assert tiny_hyper(input_mode="word_only").input_dim == 5
        assert tiny_hyper(input_mode="char_only").input_dim == 6

    @pytest.mark.parametrize(
        "field,value",
        [
            ("word_dim", 0),
            ("dropout", 1.0),
            ("dropout", -0.1),
            ("epochs", 0),
            ("learning_rate", 0.0),
            ("decay_rate", -1.0),
            ("momentum", -0.5),
            ("grad_clip", 0.0),
            ("input_mode", "both"),
            ("seed", -1),
        ],
    )
    def test_validation(self, field, value):
        with pytest.raises(ValidationError):
            tiny_hyper(**{field: value}).validate()

    def test_round_trip_via_dict(self):
        h = tiny_hyper(dropout=0.25)
        assert Hyperparams.from_dict(h.as_dict()) == h

    def test_from_dict_rejects_unknown_keys(self):
        with pytest.raises(ValidationError):
            Hyperparams.from_dict({"word_dim": 3, "batteries": 2})


class TestCharInventory:
    def test_ascii_maps_into_inventory(self):
        indices = char_indices("Az9 ~")
        assert all(0 <= i < BLANK_INDEX for i in indices)
        assert len(indices) == 5

    def test_empty_word_is_blank_symbol(self):
        assert char_indices("") == [BLANK_INDEX]

    def test_non_ascii_maps_to_unk(self):
        assert char_indices("ü") == [UNK_CHAR_INDEX]

    def test_inventory_size(self):
        assert N_CHAR_SYMBOLS == 95 + 2


class TestLstmSequence:
    def _params(self, rng, d_in, hidden):
        return (
            torch.tensor(rng.normal(size=(4 * hidden, d_in))),
            torch.tensor(rng.normal(size=(4 * hidden, hidden))),
            torch.tensor(rng.normal(size=(4 * hidden,))),
        )

    def test_output_shape(self):
        rng = np.random.default_rng(6)
        w_input, w_hidden, bias = self._params(rng, 3, 2)
        inputs = torch.tensor(rng.normal(size=(5, 3)))
        assert lstm_sequence(inputs, w_input, w_hidden, bias).shape == (5, 2)

    def test_reverse_equals_forward_on_flipped_input(self):
        rng = np.random.default_rng(7)
        w_input, w_hidden, bias = self._params(rng, 3, 2)
        inputs = torch.tensor(rng.normal(size=(4, 3)))
        backward = lstm_sequence(inputs, w_input, w_hidden, bias, reverse=True)
        flipped = lstm_sequence(torch.flip(inputs, [0]), w_input, w_hidden, bias)
        assert torch.allclose(backward, torch.flip(flipped, [0]))

    def test_single_step_matches_cell_equations(self):
        rng = np.random.default_rng(8)
        hidden = 2
        w_input, w_hidden, bias = self._params(rng, 3, hidden)
        x = torch.tensor(rng.normal(size=(1, 3)))
        z = w_input @ x[0] + bias  # h0 = 0
        i = torch.sigmoid(z[:hidden])
        f = torch.sigmoid(z[hidden : 2 * hidden])
        g = torch.tanh(z[2 * hidden : 3 * hidden])
        o = torch.sigmoid(z[3 * hidden :])
        expected = o * torch.tanh(i * g)
        out = lstm_sequence(x, w_input, w_hidden, bias)
        assert torch.allclose(out[0], expected)


class TestNetworkBasics:
    def test_emission_shape(self, net):
        scores = net.emissions(*SENT)
        assert scores.shape == (4, len(LABELS))

    def test_init_is_seed_deterministic(self, table):
        a = TaggerNetwork(tiny_hyper(), LABELS, table)
        b = TaggerNetwork(tiny_hyper(), LABELS, table)
        c = TaggerNetwork(tiny_hyper(seed=99), LABELS, table)
        for name in a.params:
            assert torch.equal(a.params[name], b.params[name])
        assert any(not torch.equal(a.params[n], c.params[n]) for n in a.params)

    def test_init_range(self, net):
        for tensor in net.params.values():
            assert float(tensor.detach().abs().max()) <= 0.1

    def test_word_only_ignores_characters(self, table):
        net = TaggerNetwork(tiny_hyper(input_mode="word_only"), LABELS, table)
        surfaces = ["anna", "berlin"]
        a = net.emissions(surfaces, ["anna", "berlin"])
        b = net.emissions(surfaces, ["xxxx", "yyyyyy"])
        assert torch.equal(a, b)

    def test_char_only_ignores_word_vectors(self, table):
        net = TaggerNetwork(tiny_hyper(input_mode="char_only"), LABELS, None)
        romanized = ["anna", "berlin"]
        a = net.emissions(["anna", "berlin"], romanized)
        b = net.emissions(["other", "words"], romanized)
        assert torch.equal(a, b)

    def test_full_mode_uses_both(self, net):
        a = net.emissions(*SENT)
        b = net.emissions(SENT[0], ["anna", "works", "in", "hamburg"])
        c = net.emissions(["anna", "works", "in", "anna"], SENT[1])
        assert not torch.equal(a, b)
        assert not torch.equal(a, c)

    def test_oov_word_is_deterministic(self, net):
        a = net.emissions(["zzz", "anna"], ["zzz", "anna"])
        b = net.emissions(["zzz", "anna"], ["zzz", "anna"])
        assert torch.equal(a, b)

    def test_decode_returns_known_labels(self, net):
        labels = net.decode(*SENT)
        assert len(labels) == 4
        assert all(label in LABELS for label in labels)

    def test_label_indices_round_trip(self, net):
        indices = net.label_indices(["O", "S-LOC", "B-PER"])
        assert net.labels_from_indices(indices) == ["O", "S-LOC", "B-PER"]
        with pytest.raises(ValidationError):
            net.label_indices(["B-ORG"])

    def test_sentence_loss_positive_scalar(self, net):
        loss = net.sentence_loss(SENT[0], SENT[1], [0, 0, 0, 3])
        assert loss.shape == ()
        assert float(loss.detach()) > 0


class TestNetworkValidation:
    def test_empty_sentence_rejected(self, net):
        with pytest.raises(ValidationError):
            net.emissions([], [])

    def test_surface_romanized_length_mismatch(self, net):
        with pytest.raises(ValidationError):
            net.emissions(["a", "b"], ["a"])

    def test_label_length_mismatch(self, net):
        with pytest.raises(ValidationError):
            net.sentence_loss(["anna"], ["anna"], [0, 0])

    def test_word_modes_require_table(self):
        with pytest.raises(ValidationError):
            TaggerNetwork(tiny_hyper(), LABELS, None)

    def test_table_dim_must_match(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValidationError):
            TaggerNetwork(tiny_hyper(word_dim=7), LABELS, random_table(rng, ["a"], 5))

    def test_duplicate_or_empty_labels(self, table):
        with pytest.raises(ValidationError):
            TaggerNetwork(tiny_hyper(), ("O", "O"), table)
        with pytest.raises(ValidationError):
            TaggerNetwork(tiny_hyper(), (), table)

    def test_training_forward_needs_generator_when_dropout_on(self, table):
        net = TaggerNetwork(tiny_hyper(dropout=0.5), LABELS, table)
        with pytest.raises(ValidationError):
            net.emissions(SENT[0], SENT[1], training=True)


class TestDropout:
    def test_eval_mode_is_deterministic(self, table):
        net = TaggerNetwork(tiny_hyper(dropout=0.5), LABELS, table)
        assert torch.equal(net.emissions(*SENT), net.emissions(*SENT))

    def test_training_mode_draws_fresh_masks(self, table):
        net = TaggerNetwork(tiny_hyper(dropout=0.5), LABELS, table)
        generator = torch.Generator().manual_seed(0)
        a = net.emissions(*SENT, training=True, dropout_generator=generator)
        b = net.emissions(*SENT, training=True, dropout_generator=generator)
        assert not torch.equal(a, b)

    def test_same_generator_state_same_mask(self, table):
        net = TaggerNetwork(tiny_hyper(dropout=0.5), LABELS, table)
        a = net.emissions(
            *SENT, training=True, dropout_generator=torch.Generator().manual_seed(5)
        )
        b = net.emissions(
            *SENT, training=True, dropout_generator=torch.Generator().manual_seed(5)
        )
        assert torch.equal(a, b)

    def test_zero_rate_training_equals_eval(self, table):
        net = TaggerNetwork(tiny_hyper(dropout=0.0), LABELS, table)
        assert torch.equal(net.emissions(*SENT, training=True), net.emissions(*SENT))


class TestStateManagement:
    def test_clone_load_round_trip(self, net):
        state = net.clone_state()
        with torch.no_grad():
            net.params["proj_bias"] += 1.0
        changed = net.state_checksum()
        net.load_state(state)
        assert net.state_checksum() != changed
        for name in state:
            assert torch.equal(net.params[name], state[name])

    def test_checksum_tracks_content(self, net):
        before = net.state_checksum()
        assert before == net.state_checksum()
        with torch.no_grad():
            net.params["transitions"][0, 0] += 0.5
        assert net.state_checksum() != before

    def test_load_state_validates_names_and_shapes(self, net):
        state = net.clone_state()
        state.pop("proj_bias")
        with pytest.raises(ValidationError):
            net.load_state(state)


class TestSerialization:
    def test_round_trip(self, net, table, tmp_path):
        path = tmp_path / "model.bin"
        save_network(net, path)
        loaded, header = load_network(path, table)
        assert header["label_set"] == list(LABELS)
        assert loaded.hyper == net.hyper
        for name in net.params:
            assert torch.equal(loaded.params[name], net.params[name])
        assert loaded.decode(*SENT) == net.decode(*SENT)

    def test_char_only_round_trip_without_table(self, tmp_path):
        net = TaggerNetwork(tiny_hyper(input_mode="char_only"), LABELS, None)
        path = tmp_path / "model.bin"
        save_network(net, path)
        loaded, _ = load_network(path, None)
        assert loaded.decode(["ab"], ["ab"]) == net.decode(["ab"], ["ab"])

    def test_mismatched_embeddings_rejected(self, net, tmp_path):
        path = tmp_path / "model.bin"
        save_network(net, path)
        rng = np.random.default_rng(9)
        other = random_table(rng, ["anna", "berlin", "works", "in"], 5)
        with pytest.raises(ValidationError):
            load_network(path, other)

    def test_missing_table_rejected_for_word_model(self, net, tmp_path):
        path = tmp_path / "model.bin"
        save_network(net, path)
        with pytest.raises(ValidationError):
            load_network(path, None)

    def test_not_a_model_file(self, table, tmp_path):
        path = tmp_path / "nope.bin"
        path.write_bytes(b"something else entirely")
        with pytest.raises(ValidationError):
            load_network(path, table)

    def test_truncated_file(self, net, table, tmp_path):
        path = tmp_path / "model.bin"
        save_network(net, path)
        raw = path.read_bytes()
        path.write_bytes(raw[: len(raw) - 16])
        with pytest.raises(ValidationError):
            load_network(path, table)

    def test_trailing_garbage(self, net, table, tmp_path):
        path = tmp_path / "model.bin"
        save_network(net, path)
        path.write_bytes(path.read_bytes() + b"\x00")
        with pytest.raises(ValidationError):
            load_network(path, table)

    def test_save_is_byte_deterministic(self, net, tmp_path):
        a, b = tmp_path / "a.bin", tmp_path / "b.bin"
        save_network(net, a)
        save_network(net, b)
        assert a.read_bytes() == b.read_bytes()

    def test_extra_header_keys(self, net, table, tmp_path):
        path = tmp_path / "model.bin"
        save_network(net, path, extra_header={"note": "x"})
        _, header = load_network(path, table)
        assert header["note"] == "x"
        with pytest.raises(ValidationError):
            save_network(net, path, extra_header={"label_set": []})
