"""Chattering removal and gap-based segmentation of an alarm log into sequences."""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime

from .ingest import AlarmEvent, AlarmLog, TagVocabulary, build_vocabulary


@dataclass(frozen=True)
class PreprocessConfig:
    chatter_window: float = 60.0  # seconds
    gap_threshold: float = 300.0  # seconds
    min_len: int = 5

    def __post_init__(self):
        for name in ("chatter_window", "gap_threshold", "min_len"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class AlarmSequence:
    id: int
    items: tuple[tuple[int, datetime], ...]

    def __len__(self) -> int:
        return len(self.items)

    @property
    def tag_indices(self) -> list[int]:
        return [i for i, _ in self.items]


def dechatter_mask(log: AlarmLog, window: float) -> list[bool]:
    """Per-event keep flags for :func:`dechatter`.

    An event is kept iff the last *kept* event of the same tag is more than
    ``window`` seconds earlier. Suppressed events never re-anchor the window.
    """
    last_kept: dict[str, datetime] = {}
    keep = []
    for e in log:
        prev = last_kept.get(e.tag)
        ok = prev is None or (e.triggered_at - prev).total_seconds() > window
        if ok:
            last_kept[e.tag] = e.triggered_at
        keep.append(ok)
    return keep


def dechatter(log: AlarmLog, window: float = 60.0) -> AlarmLog:
    keep = dechatter_mask(log, window)
    return AlarmLog(tuple(e for e, k in zip(log, keep) if k))


def segment_runs(log: AlarmLog, gap_threshold: float) -> list[list[AlarmEvent]]:
    """Split the log wherever consecutive triggers are more than ``gap_threshold`` seconds apart."""
    runs: list[list[AlarmEvent]] = []
    prev = None
    for e in log:
        if prev is None or (e.triggered_at - prev).total_seconds() > gap_threshold:
            runs.append([])
        runs[-1].append(e)
        prev = e.triggered_at
    return runs


def segment(
    log: AlarmLog,
    gap_threshold: float = 300.0,
    min_len: int = 5,
    vocab: TagVocabulary | None = None,
) -> list[AlarmSequence]:
    """Gap-delimited alarm sequences with fewer than ``min_len`` events dropped.

    Surviving sequences are numbered 0.. in chronological order. Tag indices
    come from ``vocab`` (built from ``log`` when omitted).
    """
    vocab = vocab if vocab is not None else build_vocabulary(log)
    out = []
    for run in segment_runs(log, gap_threshold):
        if len(run) < min_len:
            continue
        items = tuple((vocab.index(e.tag), e.triggered_at) for e in run)
        out.append(AlarmSequence(len(out), items))
    return out


def format_sequences(sequences: list[AlarmSequence], vocab: TagVocabulary) -> str:
    """JSON-lines export: one record per sequence with ordered (tag, ISO time) pairs."""
    lines = []
    for s in sequences:
        rec = {"id": s.id, "items": [[vocab.tag(i), t.isoformat()] for i, t in s.items]}
        lines.append(json.dumps(rec, ensure_ascii=False))
    return "".join(line + "\n" for line in lines)


def parse_sequences(text: str, vocab: TagVocabulary) -> list[AlarmSequence]:
    out = []
    for line in text.splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        items = tuple((vocab.index(tag), datetime.fromisoformat(ts)) for tag, ts in rec["items"])
        out.append(AlarmSequence(int(rec["id"]), items))
    return out
