"""Shared byte-pair-encoding subword vocabulary.

The model is learned jointly over both languages' text.  The end-of-word
convention: during learning the final character of a word carries an
``</w>`` suffix; applied output marks word-internal pieces with a ``@@``
continuation suffix so segmentation is reversible.
"""

from __future__ import annotations

from collections import Counter
from typing import Iterable, Optional

from sklearn.base import BaseEstimator, TransformerMixin

from .corpus import Sentence, is_language_tag

EOW = "</w>"
CONTINUATION = "@@"

MODEL_MAGIC = "cswitch-bpe"
MODEL_VERSION = 1


class BpeError(ValueError):
    pass


def _word_symbols(word: str) -> tuple:
    chars = list(word)
    chars[-1] = chars[-1] + EOW
    return tuple(chars)


def _count_pairs(vocab: dict) -> Counter:
    pairs = Counter()
    for symbols, freq in vocab.items():
        for a, b in zip(symbols, symbols[1:]):
            pairs[(a, b)] += freq
    return pairs


def _merge_symbols(symbols: tuple, pair: tuple) -> tuple:
    a, b = pair
    merged = []
    i = 0
    while i < len(symbols):
        if i < len(symbols) - 1 and symbols[i] == a and symbols[i + 1] == b:
            merged.append(a + b)
            i += 2
        else:
            merged.append(symbols[i])
            i += 1
    return tuple(merged)


class BpeEncoder(BaseEstimator, TransformerMixin):
    """Learn BPE merges on a corpus and segment sentences with them.

    Parameters
    ----------
    merge_count : number of merge operations to learn (fewer are learned if
        the corpus is exhausted first).
    """

    def __init__(self, merge_count: int = 500):
        self.merge_count = merge_count

    def fit(self, sentences: Iterable[Sentence], y=None):
        if self.merge_count <= 0:
            raise BpeError("merge_count must be positive")
        word_freq = Counter()
        seen = False
        for sent in sentences:
            seen = True
            for tok in sent.tokens:
                if not is_language_tag(tok):
                    word_freq[tok] += 1
        if not seen:
            raise BpeError("empty corpus")

        vocab = {_word_symbols(w): f for w, f in word_freq.items()}
        merges = []
        for _ in range(self.merge_count):
            pairs = _count_pairs(vocab)
            if not pairs:
                break
            best_count = max(pairs.values())
            # Tie-break on the merged symbol string, then on the pair itself,
            # so learning is deterministic.
            best = min(
                (p for p, c in pairs.items() if c == best_count),
                key=lambda p: (p[0] + p[1], p),
            )
            merges.append(best)
            vocab = {_merge_symbols(sym, best): f for sym, f in vocab.items()}

        self.merges_ = merges
        self.merge_ranks_ = {pair: rank for rank, pair in enumerate(merges)}
        self._cache = {}
        return self

    def _check_fitted(self):
        if not hasattr(self, "merges_"):
            raise BpeError("BpeEncoder is not fitted")

    def _segment_token(self, token: str) -> tuple:
        cached = self._cache.get(token)
        if cached is not None:
            return cached
        symbols = _word_symbols(token)
        while len(symbols) > 1:
            candidates = [
                (self.merge_ranks_[p], p)
                for p in zip(symbols, symbols[1:])
                if p in self.merge_ranks_
            ]
            if not candidates:
                break
            _, pair = min(candidates)
            symbols = _merge_symbols(symbols, pair)

        pieces = []
        for i, sym in enumerate(symbols):
            if i == len(symbols) - 1:
                pieces.append(sym[: -len(EOW)] if sym.endswith(EOW) else sym)
            else:
                pieces.append(sym + CONTINUATION)
        result = tuple(pieces)
        self._cache[token] = result
        return result

    def transform_sentence(self, sent: Sentence) -> Sentence:
        self._check_fitted()
        out = []
        for tok in sent.tokens:
            if is_language_tag(tok):
                out.append(tok)
            else:
                out.extend(self._segment_token(tok))
        return Sentence(tuple(out), sent.lang)

    def transform(self, sentences: Iterable[Sentence]) -> list:
        return [self.transform_sentence(s) for s in sentences]

    def inverse_transform(self, sentences: Iterable[Sentence]) -> list:
        return [remove_bpe(s) for s in sentences]

    def save(self, path):
        self._check_fitted()
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{MODEL_MAGIC} v{MODEL_VERSION} marker={CONTINUATION} merges={len(self.merges_)}\n")
            for a, b in self.merges_:
                fh.write(f"{a} {b}\n")

    @classmethod
    def load(cls, path) -> "BpeEncoder":
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().split()
            if not header or header[0] != MODEL_MAGIC:
                raise BpeError(f"not a BPE model file: {path}")
            merges = []
            for line in fh:
                a, b = line.rstrip("\n").split(" ")
                merges.append((a, b))
        enc = cls(merge_count=max(len(merges), 1))
        enc.merges_ = merges
        enc.merge_ranks_ = {pair: rank for rank, pair in enumerate(merges)}
        enc._cache = {}
        return enc


def remove_bpe(sent: Sentence) -> Sentence:
    """Rejoin continuation-marked subword pieces into full tokens."""
    out = []
    buf = ""
    for tok in sent.tokens:
        if tok.endswith(CONTINUATION) and len(tok) > len(CONTINUATION):
            buf += tok[: -len(CONTINUATION)]
        else:
            out.append(buf + tok)
            buf = ""
    if buf:
        out.append(buf)
    return Sentence(tuple(out), sent.lang)
