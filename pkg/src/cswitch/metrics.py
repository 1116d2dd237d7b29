"""Corpus BLEU, the copying baseline, and histogram reports."""

from __future__ import annotations

import json
import math
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .corpus import Sentence, tokenize
from .generate import CswRecord


class MetricsError(ValueError):
    pass


@dataclass
class BleuConfig:
    max_ngram: int = 4
    case_sensitive: bool = True
    smoothing: str = "none"  # or "exponential"

    def __post_init__(self):
        if self.max_ngram < 1:
            raise MetricsError("max_ngram must be >= 1")
        if self.smoothing not in ("none", "exponential"):
            raise MetricsError(f"unknown smoothing: {self.smoothing!r}")


@dataclass
class BleuResult:
    score: float
    precisions: list
    brevity_penalty: float
    hyp_len: int
    ref_len: int

    def as_dict(self) -> dict:
        return {
            "score": self.score,
            "precisions": self.precisions,
            "bp": self.brevity_penalty,
            "hyp_len": self.hyp_len,
            "ref_len": self.ref_len,
        }


def _ngrams(tokens, n):
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _prepare(tokens, case_sensitive):
    if case_sensitive:
        return list(tokens)
    return [t.lower() for t in tokens]


def corpus_bleu(
    hyps: list, refs: list, cfg: Optional[BleuConfig] = None
) -> BleuResult:
    """Corpus-level BLEU: geometric mean of clipped n-gram precisions times
    the brevity penalty."""
    cfg = cfg or BleuConfig()
    if len(hyps) != len(refs):
        raise MetricsError(f"hypothesis/reference count mismatch: {len(hyps)} vs {len(refs)}")
    if not hyps:
        raise MetricsError("empty corpus")

    matches = [0] * cfg.max_ngram
    totals = [0] * cfg.max_ngram
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hyps, refs):
        h = _prepare(hyp.tokens if isinstance(hyp, Sentence) else hyp, cfg.case_sensitive)
        r = _prepare(ref.tokens if isinstance(ref, Sentence) else ref, cfg.case_sensitive)
        hyp_len += len(h)
        ref_len += len(r)
        for n in range(1, cfg.max_ngram + 1):
            hyp_counts = _ngrams(h, n)
            ref_counts = _ngrams(r, n)
            totals[n - 1] += max(len(h) - n + 1, 0)
            for gram, count in hyp_counts.items():
                matches[n - 1] += min(count, ref_counts.get(gram, 0))

    precisions = []
    smooth = 1.0
    for n in range(cfg.max_ngram):
        if totals[n] == 0:
            precisions.append(0.0)
        elif matches[n] == 0:
            if cfg.smoothing == "exponential":
                smooth *= 2.0
                precisions.append(1.0 / (smooth * totals[n]))
            else:
                precisions.append(0.0)
        else:
            precisions.append(matches[n] / totals[n])

    if hyp_len == 0:
        bp = 0.0
    else:
        bp = math.exp(min(0.0, 1.0 - ref_len / hyp_len))

    if any(p == 0.0 for p in precisions):
        score = 0.0
    else:
        log_mean = sum(math.log(p) for p in precisions) / cfg.max_ngram
        score = 100.0 * bp * math.exp(log_mean)
    return BleuResult(score, precisions, bp, hyp_len, ref_len)


def corpus_bleu_detok(hyp_texts, ref_texts, lang, cfg=None) -> BleuResult:
    """Score detokenized text by re-tokenizing with the fixed rule set."""
    hyps = [tokenize(t, lang).tokens for t in hyp_texts]
    refs = [tokenize(t, lang).tokens for t in ref_texts]
    return corpus_bleu(hyps, refs, cfg)


def copying_baseline(
    records: Iterable[CswRecord], target: str = "matrix", cfg=None
) -> BleuResult:
    """Score the code-switched sentence itself as the hypothesis against the
    matrix-side or embedded-side monolingual references."""
    if target not in ("matrix", "embedded"):
        raise MetricsError(f"target must be 'matrix' or 'embedded', got {target!r}")
    hyps = []
    refs = []
    for rec in records:
        if rec.src_mono.lang == rec.matrix_lang:
            matrix_ref, embedded_ref = rec.src_mono, rec.tgt_mono
        else:
            matrix_ref, embedded_ref = rec.tgt_mono, rec.src_mono
        hyps.append(rec.csw.tokens)
        refs.append(matrix_ref.tokens if target == "matrix" else embedded_ref.tokens)
    return corpus_bleu(hyps, refs, cfg)


@dataclass
class Histogram:
    edges: list
    counts: list
    title: str = ""
    xlabel: str = ""
    ylabel: str = "count"

    def total(self) -> int:
        return sum(self.counts)

    def mode_bin(self):
        """(lo, hi) of the fullest bin; None when empty."""
        if not self.counts or self.total() == 0:
            return None
        idx = max(range(len(self.counts)), key=lambda i: self.counts[i])
        return (self.edges[idx], self.edges[idx + 1])


def _bin_index(value: float, bin_width: float) -> int:
    # Nudge past float noise so exact bin edges (0.15 / 0.05) land in the
    # half-open bin they start.
    return int(value / bin_width + 1e-9)


def build_histogram(values, bin_width: float, title="", xlabel="") -> Histogram:
    values = list(values)
    if bin_width <= 0:
        raise MetricsError("bin_width must be positive")
    if not values:
        return Histogram([], [], title, xlabel)
    n_bins = _bin_index(max(values), bin_width) + 1
    edges = [i * bin_width for i in range(n_bins + 1)]
    counts = [0] * n_bins
    for v in values:
        counts[min(_bin_index(v, bin_width), n_bins - 1)] += 1
    return Histogram(edges, counts, title, xlabel)


def length_histogram(sentences: Iterable[Sentence], bin_width: int = 1) -> Histogram:
    return build_histogram(
        [len(s) for s in sentences], bin_width, "Sentence length", "tokens"
    )


def fraction_histogram(records: Iterable[CswRecord], bin_width: float = 0.05) -> Histogram:
    return build_histogram(
        [r.replaced_fraction for r in records],
        bin_width,
        "Replaced fraction",
        "fraction of matrix tokens",
    )


def histogram_to_csv(hist: Histogram, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("bin_lo,bin_hi,count\n")
        for i, count in enumerate(hist.counts):
            fh.write(f"{hist.edges[i]:.6g},{hist.edges[i + 1]:.6g},{count}\n")


def histogram_from_csv(path) -> Histogram:
    edges = []
    counts = []
    with open(path, encoding="utf-8") as fh:
        next(fh)
        for line in fh:
            lo, hi, count = line.rstrip("\n").split(",")
            if not edges:
                edges.append(float(lo))
            edges.append(float(hi))
            counts.append(int(count))
    return Histogram(edges, counts)


def histogram_to_svg(hist: Histogram, path, width=640, height=360):
    """Minimal static bar chart; output bytes depend only on the histogram."""
    pad = 40
    bars = len(hist.counts)
    peak = max(hist.counts) if hist.counts else 1
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<text x="{width // 2}" y="16" text-anchor="middle">{hist.title}</text>',
    ]
    if bars:
        bar_w = (width - 2 * pad) / bars
        for i, count in enumerate(hist.counts):
            h = (height - 2 * pad) * count / max(peak, 1)
            x = pad + i * bar_w
            y = height - pad - h
            parts.append(
                f'<rect x="{x:.2f}" y="{y:.2f}" width="{bar_w:.2f}" height="{h:.2f}" '
                f'fill="steelblue" stroke="white"/>'
            )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")


@dataclass
class ReportWriter:
    """Writes the reports/ directory layout: one CSV (and optional SVG) per
    histogram plus bleu.json."""

    out_dir: str
    svg: bool = False
    written: list = field(default_factory=list)

    def write_histogram(self, name: str, hist: Histogram):
        os.makedirs(self.out_dir, exist_ok=True)
        csv_path = os.path.join(self.out_dir, f"{name}.csv")
        histogram_to_csv(hist, csv_path)
        self.written.append(csv_path)
        if self.svg:
            svg_path = os.path.join(self.out_dir, f"{name}.svg")
            histogram_to_svg(hist, svg_path)
            self.written.append(svg_path)

    def write_bleu(self, result: BleuResult, cfg: BleuConfig):
        os.makedirs(self.out_dir, exist_ok=True)
        path = os.path.join(self.out_dir, "bleu.json")
        payload = result.as_dict()
        payload["config"] = {
            "max_ngram": cfg.max_ngram,
            "case_sensitive": cfg.case_sensitive,
            "smoothing": cfg.smoothing,
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        self.written.append(path)
