"""Random-batch finite-difference verification shared by the CLI and tests."""

from __future__ import annotations

import numpy as np

from .corpus import Sentence
from .objectives import (
    ObjectiveConfig,
    ToyEncoder,
    ams_loss,
    gradcheck,
    neg_margin_loss,
    pool_cosine_loss,
    ranking_loss,
    sentence_align_loss,
)


def random_sentence(rng: np.random.Generator, vocab: list, max_len: int = 6) -> Sentence:
    length = int(rng.integers(1, max_len + 1))
    return Sentence(tuple(rng.choice(vocab, size=length)), "any")


def make_batch(kind: str, rng: np.random.Generator, vocab: list, batch_size: int):
    pairs = [
        (random_sentence(rng, vocab), random_sentence(rng, vocab))
        for _ in range(batch_size)
    ]
    if kind == "neg_margin":
        return [
            (x, y, pairs[(i + 1) % len(pairs)][1]) for i, (x, y) in enumerate(pairs)
        ]
    return pairs


def loss_fn_for(kind: str, batch, delta=0.4, m=0.3):
    if kind == "pool_cosine":
        return lambda enc: pool_cosine_loss(enc, batch)
    if kind == "neg_margin":
        return lambda enc: neg_margin_loss(enc, batch, delta)
    if kind == "ranking":
        return lambda enc: ranking_loss(enc, batch)
    if kind == "ams":
        return lambda enc: ams_loss(enc, batch, m)
    if kind == "sentence_align":
        return lambda enc: sentence_align_loss(enc, batch)
    raise ValueError(f"unknown kind: {kind!r}")


def _hinge_margins(enc, batch, delta):
    """Pre-hinge values for a neg_margin batch; used to skip kink-adjacent
    batches where the loss is not differentiable."""
    from .objectives import _cosine_with_grads

    margins = []
    for x, y, y_neg in batch:
        u = enc.encode_vec(x)
        pos = _cosine_with_grads(u, enc.encode_vec(y))
        neg = _cosine_with_grads(u, enc.encode_vec(y_neg))
        if pos is None or neg is None:
            margins.append(0.0)
            continue
        margins.append(delta - pos[0] + neg[0])
    return margins


def _maxpool_near_tie(enc, batch, window: float) -> bool:
    """True when some pooled dimension's top two values are within the
    window; the argmax routing switches there, so finite differences are
    invalid at that point."""
    for item in batch:
        for sent in item:
            emb = enc.table[enc.ids(sent)]
            if emb.shape[0] < 2:
                continue
            top2 = np.sort(emb, axis=0)[-2:]
            if np.any(top2[1] - top2[0] < window):
                return True
    return False


def run_gradcheck_batches(
    kind: str,
    n_batches: int = 20,
    batch_size: int = 4,
    dim: int = 8,
    vocab_size: int = 50,
    seed: int = 0,
    step: float = 1e-5,
    kink_window: float = 1e-3,
) -> float:
    """Max relative gradient error across random batches.  For the hinged
    loss, batches with a pre-hinge value inside the kink window are redrawn."""
    rng = np.random.default_rng(seed)
    vocab = [f"w{i}" for i in range(vocab_size)]
    config = ObjectiveConfig(kind=kind)
    worst = 0.0
    done = 0
    attempts = 0
    while done < n_batches:
        attempts += 1
        if attempts > n_batches * 50:
            raise RuntimeError("could not draw enough kink-free batches")
        pooling = "max" if kind == "pool_cosine" else "mean"
        enc = ToyEncoder(vocab, d=dim, pooling=pooling, seed=int(rng.integers(1 << 31)))
        batch = make_batch(kind, rng, vocab, batch_size)
        if kind == "neg_margin":
            margins = _hinge_margins(enc, batch, config.margin_delta)
            if any(abs(h) < kink_window for h in margins):
                continue
        if pooling == "max" and _maxpool_near_tie(enc, batch, kink_window):
            continue
        loss_fn = loss_fn_for(kind, batch)
        sentences = []
        for item in batch:
            sentences.extend(item)
        err = gradcheck(loss_fn, enc, enc.touched_indices(sentences), step)
        worst = max(worst, err)
        done += 1
    return worst
