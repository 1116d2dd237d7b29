import pytest
from hypothesis import given, strategies as st

from cswitch.corpus import Sentence
from cswitch.subword import BpeEncoder, BpeError, remove_bpe


def sent(*tokens, lang="en"):
    return Sentence(tuple(tokens), lang)


class TestLearn:
    def test_aaab_corpus_merges(self):
        corpus = [sent("aaab")] * 5
        enc = BpeEncoder(merge_count=2).fit(corpus)
        assert enc.merges_ == [("a", "a"), ("aa", "a")]

    def test_zero_merge_count_rejected(self):
        with pytest.raises(BpeError):
            BpeEncoder(merge_count=0).fit([sent("ab")])

    def test_single_character_corpus_no_merges(self):
        enc = BpeEncoder(merge_count=10).fit([sent("a", "b")])
        assert enc.merges_ == []

    def test_empty_corpus_rejected(self):
        with pytest.raises(BpeError):
            BpeEncoder(merge_count=5).fit([])

    def test_deterministic(self):
        corpus = [sent("banana", "bandana"), sent("ban", "anna")]
        a = BpeEncoder(merge_count=20).fit(corpus).merges_
        b = BpeEncoder(merge_count=20).fit(corpus).merges_
        assert a == b

    def test_shared_across_languages(self):
        en = [sent("shared", lang="en")] * 3
        fr = [sent("shared", lang="fr")] * 3
        enc = BpeEncoder(merge_count=50).fit(en + fr)
        # Fully covered word segments to itself.
        assert enc.transform_sentence(sent("shared")).tokens == ("shared",)


class TestApply:
    def test_covered_token_unchanged(self):
        enc = BpeEncoder(merge_count=50).fit([sent("hello")] * 3)
        assert enc.transform_sentence(sent("hello")).tokens == ("hello",)

    def test_unseen_token_splits(self):
        enc = BpeEncoder(merge_count=1).fit([sent("aab")] * 2)
        assert enc.merges_ == [("a", "a")]
        out = enc.transform_sentence(sent("aac"))
        assert out.tokens == ("aa@@", "c")

    def test_tag_passes_through(self):
        enc = BpeEncoder(merge_count=5).fit([sent("abc")] * 2)
        out = enc.transform_sentence(sent("<2fr>", "abc"))
        assert out.tokens[0] == "<2fr>"

    def test_unfitted_raises(self):
        with pytest.raises(BpeError):
            BpeEncoder().transform_sentence(sent("a"))


class TestRoundTrip:
    def test_empty_sentence(self):
        assert remove_bpe(sent()).tokens == ()

    def test_unsplit_sentence(self):
        assert remove_bpe(sent("plain", "words")).tokens == ("plain", "words")

    def test_split_and_rejoin(self):
        enc = BpeEncoder(merge_count=2).fit([sent("abcd")] * 2)
        s = sent("abcd", "ab", "xyz")
        assert remove_bpe(enc.transform_sentence(s)).tokens == s.tokens

    @given(
        st.lists(
            st.text(alphabet="abcdef", min_size=1, max_size=8),
            min_size=1,
            max_size=6,
        )
    )
    def test_round_trip_property(self, words):
        corpus = [sent(*words)]
        enc = BpeEncoder(merge_count=30).fit(corpus)
        for extra in (words, ["abfc", "fedcba"]):
            s = sent(*extra)
            assert remove_bpe(enc.transform_sentence(s)).tokens == s.tokens

    def test_inverse_transform(self):
        enc = BpeEncoder(merge_count=3).fit([sent("abcd")] * 2)
        batch = [sent("abcd", "dcba")]
        assert [s.tokens for s in enc.inverse_transform(enc.transform(batch))] == [
            b.tokens for b in batch
        ]


class TestModelFile:
    def test_save_load_round_trip(self, tmp_path):
        enc = BpeEncoder(merge_count=10).fit([sent("banana", "band")] * 3)
        path = tmp_path / "bpe.model"
        enc.save(path)
        loaded = BpeEncoder.load(path)
        assert loaded.merges_ == enc.merges_
        s = sent("bananaband")
        assert loaded.transform_sentence(s).tokens == enc.transform_sentence(s).tokens

    def test_rejects_foreign_file(self, tmp_path):
        path = tmp_path / "bogus"
        path.write_text("not a model\n")
        with pytest.raises(BpeError):
            BpeEncoder.load(path)


def test_get_params_sklearn_compatible():
    enc = BpeEncoder(merge_count=123)
    assert enc.get_params() == {"merge_count": 123}
    enc.set_params(merge_count=7)
    assert enc.merge_count == 7
