import io

import numpy as np
import pytest

from helpers import corpus_of, random_table, table_of
from xlner.conll import corpus_from_sequences
from xlner.embeddings import (
    EmbeddingTable,
    OovVectors,
    OrthogonalMap,
    apply_alignment,
    cosine,
    load_embeddings,
    load_word_pairs,
    lookup,
    merge_tables,
    normalize_table,
    oov_rate,
    procrustes_align,
    save_embeddings,
)
from xlner.errors import AlignmentError, ParseError, ValidationError


def random_rotation(rng: np.random.Generator, dim: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)))
    # make the decomposition unique-ish and keep determinant information
    return q * np.sign(np.diag(r))


class TestLoadSave:
    def test_plain_rows(self):
        table = load_embeddings("the 1.0 2.0\ncat -0.5 0.25\n")
        assert table.dim == 2
        assert table.words == ["the", "cat"]
        np.testing.assert_array_equal(table["cat"], [-0.5, 0.25])

    def test_count_dim_header_is_skipped(self):
        table = load_embeddings("2 3\na 1 2 3\nb 4 5 6\n")
        assert table.dim == 3 and len(table) == 2

    def test_word_that_looks_numeric_is_not_a_header_mid_file(self):
        table = load_embeddings("a 1 2\n3 4 5\n")
        assert "3" in table and len(table) == 2

    def test_wrong_width_reports_line(self):
        with pytest.raises(ParseError) as err:
            load_embeddings("a 1 2\nb 1\n")
        assert err.value.line_number == 2

    def test_unparseable_value(self):
        with pytest.raises(ParseError):
            load_embeddings("a 1 x\n")

    def test_empty_stream_rejected(self):
        with pytest.raises(ParseError):
            load_embeddings("")

    def test_duplicates_first_wins(self):
        table = load_embeddings("a 1 1\na 2 2\n")
        np.testing.assert_array_equal(table["a"], [1.0, 1.0])

    def test_save_load_bit_exact(self):
        rng = np.random.default_rng(0)
        table = random_table(rng, ["alpha", "beta", "gamma"], 7)
        buffer = io.StringIO()
        save_embeddings(table, buffer)
        reloaded = load_embeddings(buffer.getvalue())
        assert reloaded.words == table.words
        for word in table.words:
            assert reloaded[word].tobytes() == table[word].tobytes()

    def test_content_hash_tracks_content(self):
        a = table_of({"x": [1.0, 2.0], "y": [3.0, 4.0]})
        b = table_of({"y": [3.0, 4.0], "x": [1.0, 2.0]})  # order-insensitive
        c = table_of({"x": [1.0, 2.0], "y": [3.0, 4.5]})
        assert a.content_hash() == b.content_hash()
        assert a.content_hash() != c.content_hash()


class TestNormalize:
    def test_unit_center_unit(self):
        table = normalize_table(table_of({"a": [3.0, 4.0], "b": [0.0, 2.0], "c": [-1.0, 0.0]}))
        matrix = table.matrix()
        np.testing.assert_allclose(np.linalg.norm(matrix, axis=1), 1.0, atol=1e-12)
        # after the final scaling the mean is not exactly zero, but the
        # centering step operated on unit vectors
        assert len(table) == 3

    def test_zero_vectors_dropped(self):
        table = normalize_table(
            table_of({"a": [0.0, 0.0], "b": [1.0, 0.0], "c": [0.0, 1.0]})
        )
        assert "a" not in table and len(table) == 2

    def test_single_entry_table_rejected(self):
        # one vector mean-centers to zero, so nothing survives
        with pytest.raises(ValidationError):
            normalize_table(table_of({"a": [3.0, 4.0]}))

    def test_all_zero_rejected(self):
        with pytest.raises(ValidationError):
            normalize_table(table_of({"a": [0.0, 0.0]}))


class TestOrthogonalMap:
    def test_accepts_rotation(self):
        rng = np.random.default_rng(1)
        OrthogonalMap(random_rotation(rng, 6))

    def test_rejects_non_orthogonal(self):
        with pytest.raises(ValidationError):
            OrthogonalMap(np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_rejects_non_square(self):
        with pytest.raises(ValidationError):
            OrthogonalMap(np.zeros((2, 3)))


class TestProcrustes:
    def _planted(self, seed=123, n_words=50, dim=10):
        rng = np.random.default_rng(seed)
        source = random_table(rng, [f"s{i}" for i in range(n_words)], dim)
        rotation = random_rotation(rng, dim)
        # target vector = R^T s so that the recovered W = R maps target back
        target = EmbeddingTable(
            {f"t{i}": rotation.T @ source[f"s{i}"] for i in range(n_words)}, dim
        )
        pairs = [(f"s{i}", f"t{i}") for i in range(n_words)]
        return source, target, rotation, pairs

    def test_planted_rotation_recovered(self):
        source, target, rotation, pairs = self._planted()
        omap = procrustes_align(source, target, pairs)
        assert np.linalg.norm(omap.matrix - rotation) <= 1e-6
        assert omap.orthogonality_deviation() <= 1e-8

    def test_retrieval_precision_at_one(self):
        source, target, _, pairs = self._planted()
        aligned = apply_alignment(target, omap=procrustes_align(source, target, pairs))
        source_words = source.words
        source_matrix = source.matrix()
        hits = 0
        for i, word in enumerate(aligned.words):
            sims = source_matrix @ aligned[word]
            sims = sims / (np.linalg.norm(source_matrix, axis=1) * np.linalg.norm(aligned[word]))
            if source_words[int(np.argmax(sims))] == f"s{i}":
                hits += 1
        assert hits == len(source_words)

    def test_sampled_optimality(self):
        # the SVD solution is the least-squares optimum over orthogonal
        # maps; no random orthogonal candidate may beat it
        rng = np.random.default_rng(7)
        dim, n = 6, 25
        source = random_table(rng, [f"s{i}" for i in range(n)], dim)
        target = random_table(rng, [f"t{i}" for i in range(n)], dim)
        pairs = [(f"s{i}", f"t{i}") for i in range(n)]
        omap = procrustes_align(source, target, pairs)
        s = np.stack([source[f"s{i}"] for i in range(n)])
        t = np.stack([target[f"t{i}"] for i in range(n)])

        def loss(w):
            return float(np.sum((t @ w.T - s) ** 2))

        best = loss(omap.matrix)
        for _ in range(1000):
            assert loss(random_rotation(rng, dim)) >= best - 1e-9

    def test_missing_pairs_dropped_and_min_enforced(self):
        source, target, _, pairs = self._planted(n_words=12, dim=10)
        usable = pairs[:9] + [("s_nope", "t0"), ("s0", "t_nope")]
        with pytest.raises(AlignmentError):
            procrustes_align(source, target, usable)  # 9 usable < dim=10
        procrustes_align(source, target, usable, min_pairs=9)

    def test_dim_mismatch(self):
        a = table_of({"x": [1.0, 0.0]})
        b = table_of({"y": [1.0, 0.0, 0.0]})
        with pytest.raises(ValidationError):
            procrustes_align(a, b, [("x", "y")])

    def test_identity_when_tables_agree(self):
        rng = np.random.default_rng(3)
        source = random_table(rng, [f"w{i}" for i in range(20)], 5)
        target = EmbeddingTable(dict(source.vectors), 5)
        omap = procrustes_align(source, target, [(w, w) for w in source.words])
        assert np.linalg.norm(omap.matrix - np.eye(5)) <= 1e-9


class TestApplyMerge:
    def test_alignment_preserves_norms(self):
        rng = np.random.default_rng(5)
        table = random_table(rng, ["a", "b"], 4)
        omap = OrthogonalMap(random_rotation(rng, 4))
        aligned = apply_alignment(table, omap)
        for word in table.words:
            assert np.linalg.norm(aligned[word]) == pytest.approx(
                np.linalg.norm(table[word])
            )

    def test_merge_first_table_wins(self):
        a = table_of({"shared": [1.0, 0.0], "a_only": [0.0, 1.0]})
        b = table_of({"shared": [9.0, 9.0], "b_only": [1.0, 1.0]})
        merged, collisions = merge_tables(a, b)
        assert collisions == 1
        assert len(merged) == 3
        np.testing.assert_array_equal(merged["shared"], [1.0, 0.0])


class TestWordPairs:
    def test_tab_and_space(self):
        assert load_word_pairs("a b\nc\td\n") == [("a", "b"), ("c", "d")]

    def test_blank_lines_skipped(self):
        assert load_word_pairs("\na b\n\n") == [("a", "b")]

    def test_malformed_line(self):
        with pytest.raises(ParseError) as err:
            load_word_pairs("only_one\n")
        assert err.value.line_number == 1
        with pytest.raises(ParseError):
            load_word_pairs("a b c\n")


class TestCosine:
    def test_basics(self):
        assert cosine([1.0, 0.0], [0.0, 1.0]) == 0.0
        assert cosine([1.0, 0.0], [2.0, 0.0]) == pytest.approx(1.0)
        assert cosine([1.0, 0.0], [-3.0, 0.0]) == pytest.approx(-1.0)

    def test_zero_norm_convention(self):
        assert cosine([0.0, 0.0], [1.0, 0.0]) == 0.0

    def test_shape_mismatch(self):
        with pytest.raises(ValidationError):
            cosine([1.0], [1.0, 2.0])


class TestOov:
    def test_deterministic_per_word_and_order_independent(self):
        a = OovVectors(dim=6, seed=9)
        b = OovVectors(dim=6, seed=9)
        first = a.vector_for("zebra")
        a.vector_for("yak")
        again = a.vector_for("zebra")
        assert first.tobytes() == again.tobytes()
        # different lookup order, same vectors
        b.vector_for("aardvark")
        assert b.vector_for("zebra").tobytes() == first.tobytes()

    def test_seed_changes_vectors(self):
        assert (
            OovVectors(6, 1).vector_for("w").tobytes()
            != OovVectors(6, 2).vector_for("w").tobytes()
        )

    def test_range(self):
        vec = OovVectors(200, 0).vector_for("word")
        assert np.all(np.abs(vec) <= 0.1)

    def test_lookup_prefers_table(self):
        table = table_of({"known": [5.0, 5.0]})
        oov = OovVectors(2, 0)
        np.testing.assert_array_equal(lookup(table, "known", oov), [5.0, 5.0])
        assert np.all(np.abs(lookup(table, "unknown", oov)) <= 0.1)

    def test_oov_rate_counts(self):
        table = table_of({"the": [1.0], "cat": [1.0]})
        corpus = corpus_from_sequences(
            [["the", "cat", "sat"], ["the", "dog"]],
            [["O"] * 3, ["O"] * 2],
        )
        report = oov_rate(corpus, table)
        # types: the, cat, sat, dog -> 2 OOV of 4; tokens: sat, dog of 5
        assert report.n_types == 4 and report.oov_types == 2
        assert report.n_tokens == 5 and report.oov_tokens == 2
        assert report.type_rate == pytest.approx(50.0)
        assert report.token_rate == pytest.approx(40.0)

    def test_oov_rate_empty_corpus(self):
        with pytest.raises(ValidationError):
            oov_rate(corpus_of([]), table_of({"a": [1.0]}))
