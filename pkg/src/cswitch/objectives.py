"""Encoder alignment losses over pooled sentence representations.

A toy embedding encoder (lookup table + max or mean pooling) stands in for
the full encoder: every loss below acts only on pooled sentence vectors,
so the formulas are exercised exactly while analytic gradients stay small
enough to verify against central finite differences.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from .corpus import Sentence

UNK = "<unk>"


class ObjectiveError(ValueError):
    pass


@dataclass
class ObjectiveConfig:
    kind: str = "pool_cosine"
    margin_delta: float = 0.4  # hinge margin (negative-sampling loss)
    margin_m: float = 0.3  # additive softmax margin
    weight: float = None  # default depends on kind
    negatives: Optional[int] = None  # None: all other batch rows

    KINDS = ("pool_cosine", "neg_margin", "ranking", "ams", "sentence_align")
    DEFAULT_WEIGHTS = {"pool_cosine": 10.0, "sentence_align": 1.0}

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ObjectiveError(f"unknown objective kind: {self.kind!r}")
        if self.margin_delta < 0 or self.margin_m < 0:
            raise ObjectiveError("margins must be non-negative")
        if self.weight is None:
            self.weight = self.DEFAULT_WEIGHTS.get(self.kind, 1.0)


@dataclass
class ObjectiveReport:
    loss: float
    gradient: np.ndarray  # flat, aligned to ToyEncoder.table.ravel()
    gradcheck_max_rel_err: Optional[float] = None
    skipped_pairs: int = 0


class ToyEncoder:
    """Embedding lookup + pooling.  Parameters are the embedding table,
    flat-indexable for finite-difference checks."""

    def __init__(self, vocab, d: int = 8, pooling: str = "mean", seed: int = 0):
        if pooling not in ("max", "mean"):
            raise ObjectiveError(f"pooling must be 'max' or 'mean', got {pooling!r}")
        tokens = [UNK] + [t for t in vocab if t != UNK]
        self.vocab = {tok: i for i, tok in enumerate(tokens)}
        self.d = d
        self.pooling = pooling
        rng = np.random.default_rng(seed)
        self.table = rng.normal(0.0, 0.5, size=(len(tokens), d))

    @classmethod
    def from_corpus(cls, sentences: Iterable[Sentence], **kwargs) -> "ToyEncoder":
        seen = []
        known = set()
        for s in sentences:
            for tok in s.tokens:
                if tok not in known:
                    known.add(tok)
                    seen.append(tok)
        return cls(seen, **kwargs)

    def ids(self, s: Sentence) -> np.ndarray:
        unk = self.vocab[UNK]
        return np.array([self.vocab.get(t, unk) for t in s.tokens], dtype=np.intp)

    def encode(self, s: Sentence):
        """Pooled vector plus the backprop closure for it."""
        if len(s.tokens) == 0:
            raise ObjectiveError("cannot encode an empty sentence")
        ids = self.ids(s)
        emb = self.table[ids]
        if self.pooling == "mean":
            vec = emb.mean(axis=0)

            def backprop(grad_vec, grad_table):
                np.add.at(grad_table, ids, grad_vec[None, :] / len(ids))

        else:
            arg = emb.argmax(axis=0)
            vec = emb[arg, np.arange(self.d)]

            def backprop(grad_vec, grad_table):
                np.add.at(grad_table, (ids[arg], np.arange(self.d)), grad_vec)

        return vec, backprop

    def encode_vec(self, s: Sentence) -> np.ndarray:
        return self.encode(s)[0]

    def n_params(self) -> int:
        return self.table.size

    def touched_indices(self, sentences: Iterable[Sentence]) -> np.ndarray:
        rows = sorted({int(i) for s in sentences for i in self.ids(s)})
        flat = []
        for r in rows:
            flat.extend(range(r * self.d, (r + 1) * self.d))
        return np.array(flat, dtype=np.intp)

    def save(self, path):
        payload = {
            "version": 1,
            "pooling": self.pooling,
            "d": self.d,
            "vocab": [t for t, _ in sorted(self.vocab.items(), key=lambda kv: kv[1])],
            "table": self.table.tolist(),
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh)

    @classmethod
    def load(cls, path) -> "ToyEncoder":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        enc = cls.__new__(cls)
        enc.pooling = payload["pooling"]
        enc.d = payload["d"]
        enc.vocab = {tok: i for i, tok in enumerate(payload["vocab"])}
        enc.table = np.array(payload["table"], dtype=float)
        return enc


def _cosine_with_grads(u, v):
    """cos(u, v) and its gradients w.r.t. u and v; None on zero norm."""
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return None
    c = float(u @ v / (nu * nv))
    du = v / (nu * nv) - c * u / (nu * nu)
    dv = u / (nu * nv) - c * v / (nv * nv)
    return c, du, dv


def pool_cosine_loss(enc: ToyEncoder, batch: list) -> ObjectiveReport:
    """Negative mean cosine similarity between paired pooled vectors."""
    if not batch:
        raise ObjectiveError("empty batch")
    grad = np.zeros_like(enc.table)
    total = 0.0
    used = 0
    skipped = 0
    pending = []
    for x, y in batch:
        u, bp_u = enc.encode(x)
        v, bp_v = enc.encode(y)
        res = _cosine_with_grads(u, v)
        if res is None:
            skipped += 1
            continue
        c, du, dv = res
        total += -c
        used += 1
        pending.append((bp_u, -du, bp_v, -dv))
    if used == 0:
        return ObjectiveReport(0.0, grad.ravel(), skipped_pairs=skipped)
    for bp_u, gu, bp_v, gv in pending:
        bp_u(gu / used, grad)
        bp_v(gv / used, grad)
    return ObjectiveReport(total / used, grad.ravel(), skipped_pairs=skipped)


def neg_margin_loss(
    enc: ToyEncoder, batch: list, delta: float = 0.4
) -> ObjectiveReport:
    """Hinged margin loss over (x, y, y_negative) triples."""
    if not batch:
        raise ObjectiveError("empty batch")
    grad = np.zeros_like(enc.table)
    total = 0.0
    n = len(batch)
    for x, y, y_neg in batch:
        u, bp_u = enc.encode(x)
        v, bp_v = enc.encode(y)
        w, bp_w = enc.encode(y_neg)
        pos = _cosine_with_grads(u, v)
        neg = _cosine_with_grads(u, w)
        if pos is None or neg is None:
            continue
        c_pos, du_pos, dv = pos
        c_neg, du_neg, dw = neg
        h = delta - c_pos + c_neg
        if h <= 0:
            continue
        total += h
        bp_u((-du_pos + du_neg) / n, grad)
        bp_v(-dv / n, grad)
        bp_w(dw / n, grad)
    return ObjectiveReport(total / n, grad.ravel())


def _candidate_sets(n: int, negatives: Optional[int]):
    """Per-row candidate column lists: the positive first, then negatives."""
    out = []
    for i in range(n):
        others = [j for j in range(n) if j != i]
        if negatives is not None:
            others = others[:negatives]
        out.append([i] + others)
    return out


def _softmax_ce(enc, batch, margin: float, negatives: Optional[int]) -> ObjectiveReport:
    """Shared core of the ranking and additive-margin losses: per row, a
    log-softmax over the dot-product scores of the positive candidate
    (shifted down by the margin) and the negative candidates."""
    if not batch:
        raise ObjectiveError("empty batch")
    n = len(batch)
    us, bp_us, vs, bp_vs = [], [], [], []
    for x, y in batch:
        u, bp_u = enc.encode(x)
        v, bp_v = enc.encode(y)
        us.append(u)
        bp_us.append(bp_u)
        vs.append(v)
        bp_vs.append(bp_v)
    U = np.stack(us)
    V = np.stack(vs)
    phi = U @ V.T

    grad = np.zeros_like(enc.table)
    grad_U = np.zeros_like(U)
    grad_V = np.zeros_like(V)
    total = 0.0
    candidates = _candidate_sets(n, negatives)
    for i, cols in enumerate(candidates):
        logits = phi[i, cols].copy()
        logits[0] -= margin
        z = logits - logits.max()
        log_probs = z - math.log(np.exp(z).sum())
        total += -log_probs[0]
        p = np.exp(log_probs)
        dlogits = p / n
        dlogits[0] -= 1.0 / n
        for dl, j in zip(dlogits, cols):
            grad_U[i] += dl * V[j]
            grad_V[j] += dl * U[i]
    for i in range(n):
        bp_us[i](grad_U[i], grad)
        bp_vs[i](grad_V[i], grad)
    return ObjectiveReport(total / n, grad.ravel())


def ranking_loss(
    enc: ToyEncoder, batch: list, negatives: Optional[int] = None
) -> ObjectiveReport:
    """Translation-candidate ranking: log-softmax of the positive dot score
    against in-batch negative target sentences."""
    return _softmax_ce(enc, batch, margin=0.0, negatives=negatives)


def ams_loss(
    enc: ToyEncoder, batch: list, m: float = 0.3, negatives: Optional[int] = None
) -> ObjectiveReport:
    """Additive-margin softmax: the positive score is reduced by m in both
    the numerator and its own denominator term."""
    return _softmax_ce(enc, batch, margin=m, negatives=negatives)


def sentence_align_loss(
    enc: ToyEncoder, batch: list, extra_pool: Optional[list] = None
) -> ObjectiveReport:
    """Average negative log-likelihood of the true translation against every
    candidate target in the mini-batch (plus optional extra candidates)."""
    if not batch:
        raise ObjectiveError("empty batch")
    n = len(batch)
    extra = list(extra_pool) if extra_pool else []
    cx, bp_x = [], []
    cy, bp_y = [], []
    for x, y in batch:
        u, bu = enc.encode(x)
        v, bv = enc.encode(y)
        cx.append(u)
        bp_x.append(bu)
        cy.append(v)
        bp_y.append(bv)
    for y in extra:
        v, bv = enc.encode(y)
        cy.append(v)
        bp_y.append(bv)
    X = np.stack(cx)
    Y = np.stack(cy)
    scores = X @ Y.T  # n x (n + extras); candidate pool is every target

    grad = np.zeros_like(enc.table)
    grad_X = np.zeros_like(X)
    grad_Y = np.zeros_like(Y)
    total = 0.0
    for i in range(n):
        z = scores[i] - scores[i].max()
        log_probs = z - math.log(np.exp(z).sum())
        total += -log_probs[i]
        p = np.exp(log_probs)
        dl = p / n
        dl[i] -= 1.0 / n
        grad_X[i] += dl @ Y
        grad_Y += np.outer(dl, X[i])
    for i in range(n):
        bp_x[i](grad_X[i], grad)
    for j in range(len(cy)):
        bp_y[j](grad_Y[j], grad)
    return ObjectiveReport(total / n, grad.ravel())


def evaluate(enc: ToyEncoder, config: ObjectiveConfig, batch: list) -> ObjectiveReport:
    if config.kind == "pool_cosine":
        return pool_cosine_loss(enc, batch)
    if config.kind == "neg_margin":
        return neg_margin_loss(enc, batch, config.margin_delta)
    if config.kind == "ranking":
        return ranking_loss(enc, batch, config.negatives)
    if config.kind == "ams":
        return ams_loss(enc, batch, config.margin_m, config.negatives)
    return sentence_align_loss(enc, batch)


def gradcheck(
    loss_fn: Callable[[ToyEncoder], ObjectiveReport],
    enc: ToyEncoder,
    indices: Optional[np.ndarray] = None,
    step: float = 1e-5,
) -> float:
    """Max relative error between the analytic gradient and central finite
    differences over the given flat parameter indices (all by default)."""
    if step <= 0:
        raise ObjectiveError("step must be positive")
    report = loss_fn(enc)
    analytic = report.gradient
    if indices is None:
        indices = np.arange(enc.n_params())
    flat = enc.table.ravel()
    max_err = 0.0
    for idx in indices:
        orig = flat[idx]
        flat[idx] = orig + step
        hi = loss_fn(enc).loss
        flat[idx] = orig - step
        lo = loss_fn(enc).loss
        flat[idx] = orig
        numeric = (hi - lo) / (2 * step)
        a = analytic[idx]
        err = abs(a - numeric) / max(1e-8, abs(a) + abs(numeric))
        max_err = max(max_err, err)
    return max_err


@dataclass
class TrainTrace:
    steps: list = field(default_factory=list)
    losses: list = field(default_factory=list)
    grad_norms: list = field(default_factory=list)

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "loss", "grad_norm"])
            for s, l, g in zip(self.steps, self.losses, self.grad_norms):
                writer.writerow([s, f"{l:.10g}", f"{g:.10g}"])


class DivergenceError(RuntimeError):
    pass


def train_encoder(
    enc: ToyEncoder,
    batches: list,
    config: ObjectiveConfig,
    steps: int = 500,
    lr: float = 0.1,
) -> TrainTrace:
    """Plain gradient descent on weight * loss, updating only the encoder's
    embedding table.  Batches are cycled in order for reproducibility."""
    trace = TrainTrace()
    if not batches:
        raise ObjectiveError("no batches")
    for step in range(steps):
        batch = batches[step % len(batches)]
        report = evaluate(enc, config, batch)
        if not math.isfinite(report.loss):
            raise DivergenceError(f"loss diverged at step {step}: {report.loss}")
        grad = config.weight * report.gradient
        enc.table -= lr * grad.reshape(enc.table.shape)
        trace.steps.append(step)
        trace.losses.append(config.weight * report.loss)
        trace.grad_norms.append(float(np.linalg.norm(grad)))
    return trace
