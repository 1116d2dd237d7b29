"""Parallel corpus handling: tokenization, cleaning, language tags, mixing.

Sentences are plain lists of token strings wrapped in :class:`Sentence`.
Corpus files are UTF-8 plain text, one sentence per line; bilingual corpora
are either two parallel files paired by line number or a single TSV file
(source <tab> target).
"""

from __future__ import annotations

import hashlib
import random
import unicodedata
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Optional

# Prefixes that elide before a vowel in French-style orthography.  A token
# like "l'acteur" splits after the apostrophe; "aujourd'hui" does not because
# "aujourd" is not an elision prefix.
ELISION_PREFIXES = frozenset(
    ["c", "j", "l", "m", "n", "s", "t", "d", "qu", "jusqu", "lorsqu", "puisqu", "quoiqu"]
)

# Languages whose tokenizer applies the elision split.
ELISION_LANGS = frozenset(["fr"])

APOSTROPHES = "'’"

# Punctuation detached into standalone tokens.
_SPLIT_PUNCT = set(".,!?:;()[]{}¿¡\"«»“”%")

# Tokens that detokenize with no space before them.
_ATTACH_LEFT = set(".,!?:;)]}%")
# Tokens that detokenize with no space after them.
_ATTACH_RIGHT = set("([{")


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class Sentence:
    """A tokenized sentence with a language label."""

    tokens: tuple
    lang: str

    def __post_init__(self):
        for tok in self.tokens:
            if not tok:
                raise CorpusError("empty token")
            if any(ch.isspace() for ch in tok):
                raise CorpusError(f"token contains whitespace: {tok!r}")

    def __len__(self):
        return len(self.tokens)

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


@dataclass(frozen=True)
class SentencePair:
    """A source/target pair, optionally carrying a target-language tag."""

    source: Sentence
    target: Sentence
    tag: Optional[str] = None

    def tagged_source_text(self) -> str:
        if self.tag is None:
            return self.source.text
        return f"{self.tag} {self.source.text}" if self.source.tokens else self.tag


@dataclass
class CleaningPolicy:
    """Length and ratio bounds applied to sentence pairs."""

    min_len: int = 2
    max_len: int = 250
    ratio_max: float = 1.5
    drop_empty: bool = True

    def __post_init__(self):
        if self.min_len < 1:
            raise CorpusError("min_len must be >= 1")
        if self.max_len < self.min_len:
            raise CorpusError("max_len must be >= min_len")
        if self.ratio_max <= 1:
            raise CorpusError("ratio_max must be > 1")


def language_tag(code: str) -> str:
    return f"<2{code}>"


def is_language_tag(token: str) -> bool:
    return len(token) > 3 and token.startswith("<2") and token.endswith(">")


def _is_elided_prefix(piece: str) -> bool:
    return piece.lower() in ELISION_PREFIXES


def _split_word(word: str, lang: str) -> list:
    """Split one whitespace-delimited chunk into tokens."""
    out = []
    buf = []

    def flush():
        if buf:
            out.append("".join(buf))
            buf.clear()

    i = 0
    while i < len(word):
        ch = word[i]
        if ch in _SPLIT_PUNCT:
            flush()
            out.append(ch)
        elif ch in APOSTROPHES and lang in ELISION_LANGS and buf and _is_elided_prefix("".join(buf)):
            buf.append(ch)
            flush()
        else:
            buf.append(ch)
        i += 1
    flush()
    return out


def tokenize(raw: str, lang: str) -> Sentence:
    """Deterministic rule tokenizer: NFC normalize, detach punctuation,
    split French-style elided articles after the apostrophe."""
    normalized = unicodedata.normalize("NFC", raw)
    tokens = []
    for chunk in normalized.split():
        tokens.extend(_split_word(chunk, lang))
    return Sentence(tuple(tokens), lang)


def _is_elided_token(tok: str, lang: str) -> bool:
    return (
        lang in ELISION_LANGS
        and len(tok) > 1
        and tok[-1] in APOSTROPHES
        and _is_elided_prefix(tok[:-1])
    )


def detokenize(s: Sentence) -> str:
    """Inverse of :func:`tokenize` on canonically-spaced text."""
    pieces = []
    for tok in s.tokens:
        if not pieces:
            pieces.append(tok)
            continue
        prev = pieces[-1]
        if tok in _ATTACH_LEFT or prev in _ATTACH_RIGHT or _is_elided_token(prev, s.lang):
            pieces[-1] = prev + tok
        else:
            pieces.append(tok)
    return " ".join(pieces)


@dataclass
class CleaningReport:
    stage: str = "clean"
    kept: int = 0
    rejected_by_reason: dict = field(default_factory=dict)

    def reject(self, reason: str):
        self.rejected_by_reason[reason] = self.rejected_by_reason.get(reason, 0) + 1

    def as_dict(self) -> dict:
        return {
            "stage": self.stage,
            "kept": self.kept,
            "rejected_by_reason": dict(self.rejected_by_reason),
        }


def clean_corpus(
    pairs: Iterable[SentencePair],
    policy: CleaningPolicy,
    report: Optional[CleaningReport] = None,
) -> Iterator[SentencePair]:
    """Yield pairs whose both sides satisfy the length bounds, preserving order."""
    for pair in pairs:
        reason = None
        for side in (pair.source, pair.target):
            n = len(side)
            if n < policy.min_len:
                reason = "too_short"
                break
            if n > policy.max_len:
                reason = "too_long"
                break
        if reason is None:
            if report is not None:
                report.kept += 1
            yield pair
        elif report is not None:
            report.reject(reason)


def prepend_tag(pair: SentencePair, target_lang: str, known_langs: Iterable[str]) -> SentencePair:
    """Set the target-language tag; re-tagging replaces the old tag."""
    if target_lang not in set(known_langs):
        raise CorpusError(f"unknown language code: {target_lang!r}")
    return replace(pair, tag=language_tag(target_lang))


def _derive_rng(seed: int, label: str = "") -> random.Random:
    digest = hashlib.sha256(f"{seed}:{label}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def mix_corpora(a: list, b: list, seed: int) -> list:
    """Concatenate two corpora and shuffle with a seeded RNG."""
    merged = list(a) + list(b)
    _derive_rng(seed, "mix").shuffle(merged)
    return merged


def per_line_rng(seed: int, line_index: int) -> random.Random:
    """Independent RNG stream for one corpus line; stable across runs and
    worker counts."""
    return _derive_rng(seed, f"line:{line_index}")


def read_lines(path) -> list:
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh]


def write_lines(path, lines: Iterable[str]):
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line + "\n")


def read_parallel(src_path, tgt_path, src_lang: str, tgt_lang: str) -> list:
    src_lines = read_lines(src_path)
    tgt_lines = read_lines(tgt_path)
    if len(src_lines) != len(tgt_lines):
        raise CorpusError(
            f"parallel files differ in length: {len(src_lines)} vs {len(tgt_lines)}"
        )
    pairs = []
    for s, t in zip(src_lines, tgt_lines):
        pairs.append(
            SentencePair(
                Sentence(tuple(s.split()), src_lang),
                Sentence(tuple(t.split()), tgt_lang),
            )
        )
    return pairs


def read_tsv(path, src_lang: str, tgt_lang: str) -> list:
    pairs = []
    for lineno, line in enumerate(read_lines(path), 1):
        cols = line.split("\t")
        if len(cols) < 2:
            raise CorpusError(f"{path}:{lineno}: expected at least 2 tab-separated columns")
        src_tokens = cols[0].split()
        tag = None
        if src_tokens and is_language_tag(src_tokens[0]):
            tag = src_tokens[0]
            src_tokens = src_tokens[1:]
        pairs.append(
            SentencePair(
                Sentence(tuple(src_tokens), src_lang),
                Sentence(tuple(cols[1].split()), tgt_lang),
                tag=tag,
            )
        )
    return pairs


def write_tsv(path, pairs: Iterable[SentencePair]):
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(f"{pair.tagged_source_text()}\t{pair.target.text}\n")
