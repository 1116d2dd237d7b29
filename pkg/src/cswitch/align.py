"""Probabilistic word alignment trained by EM.

Two stages, both over exact case-sensitive word types: a lexical
translation-table model trained from uniform initialization, then a
diagonal-prior positional model warm-started from it.  Decoding is
per-target-position Viterbi; forward and reverse decodes are combined
with intersection, union, or grow-diag-final-and.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

from sklearn.base import BaseEstimator

from .corpus import SentencePair

NULL_WORD = "<NULL>"
PROB_FLOOR = 1e-9


class AlignError(ValueError):
    pass


@dataclass(frozen=True)
class AlignmentLinkSet:
    """Links (src_index, tgt_index) for one sentence pair."""

    links: frozenset
    src_len: int
    tgt_len: int

    def __post_init__(self):
        for i, j in self.links:
            if not (0 <= i < self.src_len and 0 <= j < self.tgt_len):
                raise AlignError(f"link ({i},{j}) out of range {self.src_len}x{self.tgt_len}")

    @classmethod
    def of(cls, links, src_len, tgt_len) -> "AlignmentLinkSet":
        return cls(frozenset(links), src_len, tgt_len)

    def transpose(self) -> "AlignmentLinkSet":
        return AlignmentLinkSet(
            frozenset((j, i) for i, j in self.links), self.tgt_len, self.src_len
        )

    def to_pharaoh(self) -> str:
        return " ".join(f"{i}-{j}" for i, j in sorted(self.links))


def parse_pharaoh(line: str, src_len: int, tgt_len: int) -> AlignmentLinkSet:
    links = set()
    for part in line.split():
        i, j = part.split("-")
        links.add((int(i), int(j)))
    return AlignmentLinkSet.of(links, src_len, tgt_len)


def _normalize_table(counts: dict) -> dict:
    """Turn fractional counts e -> {f: c} into floored, normalized
    conditional distributions."""
    table = {}
    for e, row in counts.items():
        total = sum(row.values())
        if total <= 0:
            continue
        floored = {f: max(c / total, PROB_FLOOR) for f, c in row.items()}
        norm = sum(floored.values())
        table[e] = {f: p / norm for f, p in floored.items()}
    return table


def _ttable_prob(table: dict, e: str, f: str) -> float:
    row = table.get(e)
    if row is None:
        return PROB_FLOOR
    return row.get(f, PROB_FLOOR)


def _diag_weights(j: int, m: int, n: int, tension: float) -> list:
    """Unnormalized position prior over source positions i (0-based) for
    target position j; positions enter the exponent 1-based."""
    return [
        math.exp(-tension * abs((i + 1) / n - (j + 1) / m))
        for i in range(n)
    ]


@dataclass
class EmTrace:
    log_likelihoods: list = field(default_factory=list)


def _target_vocab_size(pairs) -> int:
    vocab = set()
    for pair in pairs:
        vocab.update(pair.target.tokens)
    return max(len(vocab), 1)


class Model1Aligner(BaseEstimator):
    """IBM Model 1 with a NULL source word, trained by EM."""

    def __init__(self, iterations: int = 5, null_prob: float = 0.08):
        self.iterations = iterations
        self.null_prob = null_prob

    def fit(self, pairs: Iterable[SentencePair], y=None):
        if self.iterations < 1:
            raise AlignError("iterations must be >= 1")
        pairs = list(pairs)
        if not pairs:
            raise AlignError("empty corpus")

        table: Optional[dict] = None
        self.trace_ = EmTrace()
        uniform = 1.0 / _target_vocab_size(pairs)
        for _ in range(self.iterations):
            table, ll = self._em_step(pairs, table, uniform)
            self.trace_.log_likelihoods.append(ll)
        self.ttable_ = table
        return self

    def _em_step(self, pairs, table, uniform):
        counts: dict = {}
        log_likelihood = 0.0
        p0 = self.null_prob
        for pair in pairs:
            src = pair.source.tokens
            tgt = pair.target.tokens
            n = len(src)
            if n == 0 or len(tgt) == 0:
                continue
            for f in tgt:
                # Uniform position prior; NULL carries null_prob mass.
                weights = []
                if table is None:
                    t_null = uniform
                    t_src = [uniform] * n
                else:
                    t_null = _ttable_prob(table, NULL_WORD, f)
                    t_src = [_ttable_prob(table, e, f) for e in src]
                weights.append((NULL_WORD, p0 * t_null))
                for e, t in zip(src, t_src):
                    weights.append((e, (1.0 - p0) * t / n))
                total = sum(w for _, w in weights)
                log_likelihood += math.log(total)
                for e, w in weights:
                    row = counts.setdefault(e, {})
                    row[f] = row.get(f, 0.0) + w / total
        return _normalize_table(counts), log_likelihood


class DiagonalAligner(BaseEstimator):
    """Positional model with an exp(-tension * |i/n - j/m|) diagonal prior,
    warm-started from Model 1."""

    def __init__(
        self,
        model1_iterations: int = 5,
        iterations: int = 5,
        tension: float = 4.0,
        null_prob: float = 0.08,
    ):
        self.model1_iterations = model1_iterations
        self.iterations = iterations
        self.tension = tension
        self.null_prob = null_prob

    def fit(self, pairs: Iterable[SentencePair], y=None):
        if self.tension <= 0:
            raise AlignError("tension must be positive")
        if self.iterations < 1:
            raise AlignError("iterations must be >= 1")
        pairs = list(pairs)
        if not pairs:
            raise AlignError("empty corpus")

        self.trace_ = EmTrace()
        if self.model1_iterations > 0:
            warm = Model1Aligner(self.model1_iterations, self.null_prob).fit(pairs)
            table = warm.ttable_
            self.model1_trace_ = warm.trace_
        else:
            table = None
        uniform = 1.0 / _target_vocab_size(pairs)
        for _ in range(self.iterations):
            table, ll = self._em_step(pairs, table, uniform)
            self.trace_.log_likelihoods.append(ll)
        self.ttable_ = table
        return self

    def _posteriors(self, table, src, tgt, j, uniform=1.0):
        """Weights over NULL + source positions for target position j."""
        n = len(src)
        m = len(tgt)
        f = tgt[j]
        diag = _diag_weights(j, m, n, self.tension)
        z = sum(diag)
        p0 = self.null_prob
        if table is None:
            t_null = uniform
            t_src = [uniform] * n
        else:
            t_null = _ttable_prob(table, NULL_WORD, f)
            t_src = [_ttable_prob(table, e, f) for e in src]
        weights = [p0 * t_null]
        for i in range(n):
            weights.append((1.0 - p0) * diag[i] / z * t_src[i])
        return weights

    def _em_step(self, pairs, table, uniform):
        counts: dict = {}
        log_likelihood = 0.0
        for pair in pairs:
            src = pair.source.tokens
            tgt = pair.target.tokens
            if not src or not tgt:
                continue
            for j in range(len(tgt)):
                f = tgt[j]
                weights = self._posteriors(table, src, tgt, j, uniform)
                total = sum(weights)
                log_likelihood += math.log(total)
                row = counts.setdefault(NULL_WORD, {})
                row[f] = row.get(f, 0.0) + weights[0] / total
                for i, e in enumerate(src):
                    row = counts.setdefault(e, {})
                    row[f] = row.get(f, 0.0) + weights[i + 1] / total
        return _normalize_table(counts), log_likelihood

    def predict_pair(self, pair: SentencePair) -> AlignmentLinkSet:
        """Viterbi decode: per target position, argmax over NULL and source
        positions; ties go to the smallest source index."""
        src = pair.source.tokens
        tgt = pair.target.tokens
        links = set()
        for j in range(len(tgt)):
            weights = self._posteriors(self.ttable_, src, tgt, j)
            best_i = None
            best_w = weights[0]
            for i in range(len(src)):
                if weights[i + 1] > best_w:
                    best_w = weights[i + 1]
                    best_i = i
            if best_i is not None:
                links.add((best_i, j))
        return AlignmentLinkSet.of(links, len(src), len(tgt))

    def predict(self, pairs: Iterable[SentencePair]) -> list:
        return [self.predict_pair(p) for p in pairs]

    def save_ttable(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"cswitch-ttable v1 tension={self.tension} null_prob={self.null_prob}\n")
            for e in sorted(self.ttable_):
                for f in sorted(self.ttable_[e]):
                    fh.write(f"{e}\t{f}\t{self.ttable_[e][f]:.12g}\n")

    @classmethod
    def load_ttable(cls, path) -> "DiagonalAligner":
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().split()
            if not header or header[0] != "cswitch-ttable":
                raise AlignError(f"not a translation table file: {path}")
            kwargs = dict(kv.split("=") for kv in header[2:])
            model = cls(tension=float(kwargs["tension"]), null_prob=float(kwargs["null_prob"]))
            table: dict = {}
            for line in fh:
                e, f, p = line.rstrip("\n").split("\t")
                table.setdefault(e, {})[f] = float(p)
        model.ttable_ = table
        return model


# Conventional neighbor order: adjacent first, then diagonal.
_NEIGHBOR_OFFSETS = (
    (-1, 0), (0, -1), (1, 0), (0, 1), (-1, -1), (-1, 1), (1, -1), (1, 1),
)


def _neighbors(i: int, j: int):
    for di, dj in _NEIGHBOR_OFFSETS:
        yield i + di, j + dj


def _grow_diag_final_and(fwd: set, rev_t: set, src_len: int, tgt_len: int) -> set:
    union = fwd | rev_t
    aligned = fwd & rev_t
    src_cov = {i for i, _ in aligned}
    tgt_cov = {j for _, j in aligned}
    # grow-diag: scan the grid, expanding each aligned point through its
    # 8-neighborhood within the union, until a full pass adds nothing.
    changed = True
    while changed:
        changed = False
        for i in range(src_len):
            for j in range(tgt_len):
                if (i, j) not in aligned:
                    continue
                for ni, nj in _neighbors(i, j):
                    if (ni, nj) in union and (ni, nj) not in aligned:
                        if ni not in src_cov or nj not in tgt_cov:
                            aligned.add((ni, nj))
                            src_cov.add(ni)
                            tgt_cov.add(nj)
                            changed = True
    # final-and: add links whose endpoints are both still uncovered,
    # forward links first.
    for group in (sorted(fwd), sorted(rev_t)):
        for i, j in group:
            if (i, j) not in aligned and i not in src_cov and j not in tgt_cov:
                aligned.add((i, j))
                src_cov.add(i)
                tgt_cov.add(j)
    return aligned


def symmetrize(
    fwd: AlignmentLinkSet, rev: AlignmentLinkSet, heuristic: str = "gdfa"
) -> AlignmentLinkSet:
    """Combine a src->tgt decode with a tgt->src decode (transposed here)."""
    rev_t = rev.transpose()
    if fwd.src_len != rev_t.src_len or fwd.tgt_len != rev_t.tgt_len:
        raise AlignError("forward/reverse alignments cover different lengths")
    if heuristic == "intersection":
        result = set(fwd.links) & set(rev_t.links)
    elif heuristic == "union":
        result = set(fwd.links) | set(rev_t.links)
    elif heuristic == "gdfa":
        result = _grow_diag_final_and(
            set(fwd.links), set(rev_t.links), fwd.src_len, fwd.tgt_len
        )
    else:
        raise AlignError(f"unknown symmetrization heuristic: {heuristic!r}")
    return AlignmentLinkSet.of(result, fwd.src_len, fwd.tgt_len)
