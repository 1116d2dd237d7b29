"""Minimal aligned units: the atomic contiguous span pairs swapped during
code-switch generation.

A unit is a pair of contiguous spans (source, target) such that every
alignment link touching the source span lands inside the target span and
vice versa, and no strictly smaller span pair has that property.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from .align import AlignmentLinkSet


@dataclass(frozen=True, order=True)
class MinimalUnit:
    """Half-open span pair [src_start, src_end) x [tgt_start, tgt_end)."""

    src_start: int
    src_end: int
    tgt_start: int
    tgt_end: int
    link_count: int

    @property
    def src_len(self) -> int:
        return self.src_end - self.src_start

    @property
    def tgt_len(self) -> int:
        return self.tgt_end - self.tgt_start

    def span_len(self, side: str) -> int:
        return self.src_len if side == "src" else self.tgt_len


def extract_units(links: AlignmentLinkSet) -> list:
    """Group links into connected components (shared row or column), extend
    each component to its covering contiguous spans, then merge components
    whose spans overlap, to fixpoint.  Unaligned tokens belong to no unit."""
    link_list = sorted(links.links)
    if not link_list:
        return []

    # Union-find over links: same source index or same target index.
    parent = list(range(len(link_list)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    by_src: dict = {}
    by_tgt: dict = {}
    for idx, (i, j) in enumerate(link_list):
        by_src.setdefault(i, []).append(idx)
        by_tgt.setdefault(j, []).append(idx)
    for group in list(by_src.values()) + list(by_tgt.values()):
        for idx in group[1:]:
            union(group[0], idx)

    components: dict = {}
    for idx in range(len(link_list)):
        components.setdefault(find(idx), []).append(link_list[idx])

    # Each component as (src_start, src_end, tgt_start, tgt_end, links).
    spans = []
    for comp in components.values():
        srcs = [i for i, _ in comp]
        tgts = [j for _, j in comp]
        spans.append([min(srcs), max(srcs) + 1, min(tgts), max(tgts) + 1, comp])

    # Merge any two components whose covering spans overlap on either side.
    merged = True
    while merged:
        merged = False
        out = []
        while spans:
            cur = spans.pop()
            absorbed = False
            for other in out:
                if _overlaps(cur[0], cur[1], other[0], other[1]) or _overlaps(
                    cur[2], cur[3], other[2], other[3]
                ):
                    other[0] = min(other[0], cur[0])
                    other[1] = max(other[1], cur[1])
                    other[2] = min(other[2], cur[2])
                    other[3] = max(other[3], cur[3])
                    other[4] = other[4] + cur[4]
                    absorbed = True
                    merged = True
                    break
            if not absorbed:
                out.append(cur)
        spans = out

    units = [
        MinimalUnit(s0, s1, t0, t1, len(comp)) for s0, s1, t0, t1, comp in spans
    ]
    return sorted(units)


def _overlaps(a0, a1, b0, b1) -> bool:
    return a0 < b1 and b0 < a1


def unit_span_histogram(units: Iterable[MinimalUnit], side: str = "src") -> Counter:
    """Span length -> count over a stream of units."""
    if side not in ("src", "tgt"):
        raise ValueError(f"side must be 'src' or 'tgt', got {side!r}")
    hist: Counter = Counter()
    for unit in units:
        hist[unit.span_len(side)] += 1
    return hist


def format_units(units: Iterable[MinimalUnit]) -> str:
    """One corpus line's units as "srcStart-srcEnd:tgtStart-tgtEnd" fields."""
    return " ".join(
        f"{u.src_start}-{u.src_end}:{u.tgt_start}-{u.tgt_end}" for u in units
    )


def parse_units(line: str, links: AlignmentLinkSet = None) -> list:
    units = []
    for part in line.split():
        src_part, tgt_part = part.split(":")
        s0, s1 = (int(x) for x in src_part.split("-"))
        t0, t1 = (int(x) for x in tgt_part.split("-"))
        count = 0
        if links is not None:
            count = sum(1 for i, j in links.links if s0 <= i < s1 and t0 <= j < t1)
        units.append(MinimalUnit(s0, s1, t0, t1, count))
    return units
