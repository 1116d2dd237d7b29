import pytest
from hypothesis import given, strategies as st

from cswitch.corpus import (
    CleaningPolicy,
    CleaningReport,
    CorpusError,
    Sentence,
    SentencePair,
    clean_corpus,
    detokenize,
    mix_corpora,
    prepend_tag,
    read_tsv,
    tokenize,
    write_tsv,
)


def pair(src_tokens, tgt_tokens, src_lang="en", tgt_lang="fr"):
    return SentencePair(
        Sentence(tuple(src_tokens), src_lang), Sentence(tuple(tgt_tokens), tgt_lang)
    )


class TestTokenize:
    def test_detaches_final_period(self):
        assert tokenize("The weather today is nice.", "en").tokens == (
            "The", "weather", "today", "is", "nice", ".",
        )

    def test_empty_input(self):
        assert tokenize("", "en").tokens == ()

    def test_french_elision_split(self):
        assert tokenize("l'acteur et chanteur", "fr").tokens == (
            "l'", "acteur", "et", "chanteur",
        )

    def test_aujourdhui_not_split(self):
        assert tokenize("Il fait beau aujourd'hui .", "fr").tokens == (
            "Il", "fait", "beau", "aujourd'hui", ".",
        )

    def test_english_apostrophe_untouched(self):
        assert tokenize("the boys' toys", "en").tokens == ("the", "boys'", "toys")

    def test_idempotent_on_retokenized_text(self):
        s = tokenize("Hello, world! (really)", "en")
        assert tokenize(" ".join(s.tokens), "en").tokens == s.tokens

    def test_rejects_whitespace_token(self):
        with pytest.raises(CorpusError):
            Sentence(("a b",), "en")


class TestDetokenize:
    def test_reattaches_punctuation(self):
        s = Sentence(("Il", "fait", "beau", "aujourd'hui", "."), "fr")
        assert detokenize(s) == "Il fait beau aujourd'hui."

    def test_empty(self):
        assert detokenize(Sentence((), "en")) == ""

    def test_elision_rejoined(self):
        assert detokenize(Sentence(("l'", "acteur"), "fr")) == "l'acteur"

    @given(st.text(alphabet=st.characters(codec="utf-8", categories=["L", "P", "N", "Zs"]), max_size=60))
    def test_round_trip_en(self, raw):
        s = tokenize(raw, "en")
        assert tokenize(detokenize(s), "en").tokens == s.tokens

    @given(st.text(alphabet="l'acteur chanteur.qu aujourd,hui ", max_size=40))
    def test_round_trip_fr(self, raw):
        s = tokenize(raw, "fr")
        assert tokenize(detokenize(s), "fr").tokens == s.tokens


class TestCleanCorpus:
    def test_zero_token_source_rejected(self):
        policy = CleaningPolicy(min_len=1)
        assert list(clean_corpus([pair([], ["x"])], policy)) == []

    def test_overlong_target_rejected(self):
        policy = CleaningPolicy()
        p = pair(["a"] * 10, ["b"] * 251)
        assert list(clean_corpus([p], policy)) == []

    def test_min_len_boundary(self):
        p = pair(["a"], ["b"])
        assert list(clean_corpus([p], CleaningPolicy(min_len=1))) == [p]
        assert list(clean_corpus([p], CleaningPolicy())) == []

    def test_order_preserved_and_report(self):
        pairs = [pair(["a", "b"], ["x", "y"]), pair(["c"], ["z"]), pair(["d", "e"], ["w", "v"])]
        report = CleaningReport()
        kept = list(clean_corpus(pairs, CleaningPolicy(), report))
        assert kept == [pairs[0], pairs[2]]
        assert report.kept == 2
        assert report.rejected_by_reason == {"too_short": 1}

    def test_policy_validation(self):
        with pytest.raises(CorpusError):
            CleaningPolicy(min_len=0)
        with pytest.raises(CorpusError):
            CleaningPolicy(ratio_max=1.0)


class TestPrependTag:
    def test_tag_en(self):
        p = pair(["Il", "fait", "beau", "aujourd'hui", "."], ["x"], "fr", "en")
        tagged = prepend_tag(p, "en", ["en", "fr"])
        assert tagged.tag == "<2en>"
        assert tagged.source.tokens == p.source.tokens
        assert tagged.tagged_source_text() == "<2en> Il fait beau aujourd'hui ."

    def test_tag_fr(self):
        p = pair(["The", "weather", "today", "is", "nice", "."], ["x"])
        assert prepend_tag(p, "fr", ["en", "fr"]).tag == "<2fr>"

    def test_retag_replaces(self):
        p = prepend_tag(pair(["a", "b"], ["x", "y"]), "fr", ["en", "fr"])
        assert prepend_tag(p, "en", ["en", "fr"]).tag == "<2en>"

    def test_unknown_lang(self):
        with pytest.raises(CorpusError):
            prepend_tag(pair(["a"], ["b"]), "de", ["en", "fr"])


class TestMixCorpora:
    def test_empty_plus_corpus_is_permutation(self):
        b = ["1", "2", "3"]
        assert sorted(mix_corpora([], b, 7)) == b

    def test_deterministic(self):
        a, b = ["a", "b"], ["c", "d", "e"]
        assert mix_corpora(a, b, 42) == mix_corpora(a, b, 42)

    def test_size_is_sum(self):
        assert len(mix_corpora(["a"] * 5, ["b"] * 7, 0)) == 12


class TestTsv:
    def test_round_trip(self, tmp_path):
        pairs = [
            prepend_tag(pair(["a", "b"], ["x", "y"]), "fr", ["en", "fr"]),
            pair(["c"], ["z"]),
        ]
        path = tmp_path / "corpus.tsv"
        write_tsv(path, pairs)
        back = read_tsv(path, "en", "fr")
        assert [p.tag for p in back] == ["<2fr>", None]
        assert [p.source.tokens for p in back] == [("a", "b"), ("c",)]
        assert [p.target.tokens for p in back] == [("x", "y"), ("z",)]
