import logging

import pytest

from xlner.conll import corpus_from_sequences
from xlner.errors import ParseError, ValidationError
from xlner.romanize import (
    TransliterationTable,
    builtin_table,
    empty_table,
    is_printable_ascii,
    load_table,
    romanize,
    romanize_corpus,
    romanize_sequences,
    romanize_with_count,
)


class TestLoadTable:
    def test_single_rule(self):
        table = load_table("ü\tue\n")
        assert table.rules == (("ü", "ue"),)

    def test_comments_and_blanks(self):
        table = load_table("# comment\n\nö\toe\n")
        assert table.rules == (("ö", "oe"),)

    def test_comment_only_file_gives_empty_table(self):
        assert load_table("# a\n# b\n").rules == ()

    def test_missing_tab(self):
        with pytest.raises(ParseError) as err:
            load_table("ü ue\n")
        assert err.value.line_number == 1

    def test_non_ascii_replacement_rejected(self):
        with pytest.raises(ParseError):
            load_table("ü\tü\n")

    def test_empty_key_rejected(self):
        with pytest.raises(ParseError):
            load_table("\tue\n")

    def test_ascii_key_warns_but_loads(self, caplog):
        with caplog.at_level(logging.WARNING, logger="xlner.romanize"):
            table = load_table("s\tz\n")
        assert table.rules == (("s", "z"),)
        assert "idempotent" in caplog.text

    def test_empty_replacement_allowed(self):
        # deleting a grapheme is a valid rule (e.g. a silent sign)
        table = load_table("্\t\n")
        assert romanize("্", table) == ""


class TestRomanize:
    GERMAN = TransliterationTable(
        (("ü", "ue"), ("ö", "oe"), ("ä", "ae"), ("ß", "ss"))
    )

    def test_table_one_example(self):
        assert romanize("grünen", self.GERMAN) == "gruenen"

    def test_ascii_passes_through(self):
        assert romanize("green", self.GERMAN) == "green"

    def test_repeated_rule(self):
        assert romanize("üü", self.GERMAN) == "ueue"

    def test_longest_match_first(self):
        table = load_table("sch\tsh\ns\tz\n")
        assert romanize("schnell", table) == "shnell"

    def test_file_order_breaks_length_ties(self):
        table = load_table("é\te1\né\te2\n")
        assert romanize("é", table) == "e1"

    def test_unmatched_dropped_and_counted(self):
        out, dropped = romanize_with_count("aЖb", empty_table())
        assert out == "ab" and dropped == 1

    def test_unmatched_placeholder(self):
        assert romanize("aЖb", empty_table(), unmatched="?") == "a?b"

    def test_placeholder_must_be_ascii(self):
        with pytest.raises(ValidationError):
            romanize("x", empty_table(), unmatched="¿")

    def test_output_always_printable_ascii(self):
        for word in ["grünen", "ßoß", "mixedäЖtext"]:
            assert is_printable_ascii(romanize(word, self.GERMAN))

    def test_idempotent_with_non_ascii_keys(self):
        once = romanize("grüßen", self.GERMAN)
        assert romanize(once, self.GERMAN) == once

    def test_nfc_normalization_applied(self):
        # u + combining diaeresis matches the composed-form rule
        decomposed = "grünen"
        assert romanize(decomposed, self.GERMAN) == "gruenen"

    def test_empty_word(self):
        assert romanize("", self.GERMAN) == ""


class TestBuiltinTables:
    def test_german(self):
        table = builtin_table("german")
        assert romanize("grünen", table) == "gruenen"
        assert romanize("weiß", table) == "weiss"
        assert romanize("Über", table) == "Ueber"

    def test_bengali_table_one_example(self):
        table = builtin_table("bengali")
        word = "ইউরোপের"
        assert romanize(word, table) == "iuropera"

    def test_bengali_output_ascii(self):
        table = builtin_table("bengali")
        assert is_printable_ascii(romanize("বাংলা", table))

    def test_unknown_language(self):
        with pytest.raises(ValidationError):
            builtin_table("klingon")


class TestCorpus:
    def test_parallel_shape_and_untouched_corpus(self):
        corpus = corpus_from_sequences(
            [["die", "grünen"], ["gut"]], [["O", "S-ORG"], ["O"]]
        )
        table = TestRomanize.GERMAN
        out = romanize_corpus(corpus, table)
        assert out.sentences == (("die", "gruenen"), ("gut",))
        assert corpus.sentences[0].surfaces == ("die", "grünen")
        assert out.dropped == 0

    def test_ascii_corpus_identity(self):
        corpus = corpus_from_sequences([["a", "b"]], [["O", "O"]])
        assert romanize_corpus(corpus, empty_table()).sentences == (("a", "b"),)

    def test_dropped_counted_across_corpus(self):
        corpus = corpus_from_sequences([["Ж", "ЖЖ"]], [["O", "O"]])
        assert romanize_corpus(corpus, empty_table()).dropped == 3

    def test_sequences_variant(self):
        assert romanize_sequences([["grün"]], TestRomanize.GERMAN) == [["gruen"]]
