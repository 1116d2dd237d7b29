"""Code-switched sentence generation by minimal-unit replacement.

For each parallel pair: pick the matrix language (fair coin), pick units to
replace (around 15% of the matrix tokens, or an exponential replacement
count), substitute the embedded-language spans, and emit tagged rows.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .corpus import Sentence, SentencePair, language_tag, per_line_rng
from .units import MinimalUnit


class GenerateError(ValueError):
    pass


@dataclass
class ReplacementPolicy:
    mode: str = "mlm_fraction"  # or "exponential"
    fraction: float = 0.15
    short_threshold: int = 7
    max_replacements: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("mlm_fraction", "exponential"):
            raise GenerateError(f"unknown replacement mode: {self.mode!r}")
        if not 0 < self.fraction < 1:
            raise GenerateError("fraction must be in (0, 1)")
        if self.short_threshold < 1:
            raise GenerateError("short_threshold must be >= 1")
        if self.max_replacements < 1:
            raise GenerateError("max_replacements must be >= 1")


@dataclass
class CswRecord:
    csw: Sentence
    src_mono: Sentence
    tgt_mono: Sentence
    matrix_lang: str
    replaced_token_count: int
    replaced_fraction: float
    unit_ids: list = field(default_factory=list)


def choose_matrix(pair: SentencePair, rng: random.Random) -> str:
    """Fair coin between the two languages of the pair."""
    langs = (pair.source.lang, pair.target.lang)
    return langs[0] if rng.random() < 0.5 else langs[1]


def _round_half_up(x: float) -> int:
    return int(x + 0.5)


def sample_replacements(
    units: list,
    matrix_len: int,
    policy: ReplacementPolicy,
    rng: random.Random,
    matrix_side: str = "src",
) -> list:
    """Indices into ``units`` chosen for replacement.

    mlm_fraction mode: short sentences get exactly one unit; otherwise draw
    units uniformly without repetition until the accumulated matrix-side
    span length first reaches ~fraction * matrix_len (overshoot kept).

    exponential mode: draw a replacement count r with P(r=k) = 2^-(k+1),
    leftover mass on k=0, then pick r units uniformly.
    """
    if not units:
        return []
    if matrix_len < 1:
        raise GenerateError("matrix_len must be >= 1")

    if policy.mode == "exponential":
        u = rng.random()
        cum = 0.0
        r = 0
        for k in range(policy.max_replacements + 1):
            p = 2.0 ** -(k + 1)
            if k == 0:
                p += 2.0 ** -(policy.max_replacements + 1)  # leftover tail mass
            cum += p
            if u < cum:
                r = k
                break
        r = min(r, len(units))
        return sorted(rng.sample(range(len(units)), r))

    if matrix_len < policy.short_threshold:
        return [rng.randrange(len(units))]

    budget = max(1, _round_half_up(policy.fraction * matrix_len))
    order = rng.sample(range(len(units)), len(units))
    chosen = []
    accumulated = 0
    for idx in order:
        chosen.append(idx)
        accumulated += units[idx].span_len(matrix_side)
        if accumulated >= budget:
            break
    return sorted(chosen)


def apply_replacements(
    pair: SentencePair,
    units: list,
    selected: list,
    matrix: str,
) -> CswRecord:
    """Substitute each selected unit's matrix-side span with its
    embedded-side tokens, preserving matrix order."""
    if matrix == pair.source.lang:
        matrix_sent, embedded_sent = pair.source, pair.target
        matrix_side = "src"
    elif matrix == pair.target.lang:
        matrix_sent, embedded_sent = pair.target, pair.source
        matrix_side = "tgt"
    else:
        raise GenerateError(f"matrix language {matrix!r} not in pair")

    spans = []
    for idx in selected:
        u = units[idx]
        if matrix_side == "src":
            spans.append((u.src_start, u.src_end, (u.tgt_start, u.tgt_end)))
        else:
            spans.append((u.tgt_start, u.tgt_end, (u.src_start, u.src_end)))
    spans.sort()
    for (a0, a1, _), (b0, _b1, _) in zip(spans, spans[1:]):
        if b0 < a1:
            raise GenerateError("selected units overlap on the matrix side")

    out = []
    cursor = 0
    replaced = 0
    for a0, a1, (e0, e1) in spans:
        out.extend(matrix_sent.tokens[cursor:a0])
        out.extend(embedded_sent.tokens[e0:e1])
        replaced += a1 - a0
        cursor = a1
    out.extend(matrix_sent.tokens[cursor:])

    csw_lang = matrix if not spans else "mixed"
    return CswRecord(
        csw=Sentence(tuple(out), csw_lang),
        src_mono=pair.source,
        tgt_mono=pair.target,
        matrix_lang=matrix,
        replaced_token_count=replaced,
        replaced_fraction=replaced / len(matrix_sent),
        unit_ids=list(selected),
    )


def emit_rows(rec: CswRecord) -> list:
    """The two tagged CSW training rows: csw -> each monolingual side."""
    rows = []
    for mono in (rec.src_mono, rec.tgt_mono):
        tag = language_tag(mono.lang)
        rows.append((f"{tag} {rec.csw.text}", mono.text))
    return rows


def postfilter(rows: Iterable[tuple], ratio_max: float = 1.5, max_len: int = 250):
    """Drop rows whose length ratio (longer/shorter, tag excluded) exceeds
    ratio_max or whose sides exceed max_len tokens; order preserved."""
    kept = []
    for src, tgt in rows:
        src_tokens = src.split()
        if src_tokens and src_tokens[0].startswith("<2") and src_tokens[0].endswith(">"):
            src_tokens = src_tokens[1:]
        tgt_tokens = tgt.split()
        a, b = len(src_tokens), len(tgt_tokens)
        if a == 0 or b == 0:
            continue
        if max(a, b) > max_len:
            continue
        if max(a, b) / min(a, b) > ratio_max:
            continue
        kept.append((src, tgt))
    return kept


@dataclass
class GenerationReport:
    records: int = 0
    zero_unit_sentences: int = 0
    rows_emitted: int = 0
    rows_kept: int = 0
    fraction_values: list = field(default_factory=list)
    span_lengths: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "records": self.records,
            "zero_unit_sentences": self.zero_unit_sentences,
            "rows_emitted": self.rows_emitted,
            "rows_kept": self.rows_kept,
        }


def generate_record(
    pair: SentencePair,
    units: list,
    policy: ReplacementPolicy,
    line_index: int,
) -> CswRecord:
    """Generate one record with an RNG stream derived from (seed, line)."""
    rng = per_line_rng(policy.seed, line_index)
    matrix = choose_matrix(pair, rng)
    matrix_len = len(pair.source if matrix == pair.source.lang else pair.target)
    matrix_side = "src" if matrix == pair.source.lang else "tgt"
    selected = sample_replacements(units, matrix_len, policy, rng, matrix_side)
    return apply_replacements(pair, units, selected, matrix)


def generate_corpus(
    pairs: list,
    unit_lists: list,
    policy: ReplacementPolicy,
    report: Optional[GenerationReport] = None,
) -> list:
    """Generate one record per pair.  Line-derived RNG streams make the
    output independent of evaluation order and worker count."""
    if len(pairs) != len(unit_lists):
        raise GenerateError("pairs and unit lists differ in length")
    records = []
    for idx, (pair, units) in enumerate(zip(pairs, unit_lists)):
        rec = generate_record(pair, units, policy, idx)
        records.append(rec)
        if report is not None:
            report.records += 1
            if not units:
                report.zero_unit_sentences += 1
            report.fraction_values.append(rec.replaced_fraction)
            for uid in rec.unit_ids:
                u = units[uid]
                side = "src" if rec.matrix_lang == pair.source.lang else "tgt"
                report.span_lengths.append(u.span_len(side))
    return records


def record_to_tsv(rec: CswRecord, target_lang: str) -> str:
    """One output TSV row: tagged csw source, target, matrix lang, fraction."""
    mono = rec.src_mono if rec.src_mono.lang == target_lang else rec.tgt_mono
    tag = language_tag(target_lang)
    return (
        f"{tag} {rec.csw.text}\t{mono.text}\t{rec.matrix_lang}\t"
        f"{rec.replaced_fraction:.6f}"
    )
