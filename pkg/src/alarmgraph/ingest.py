"""Alarm-log parsing, canonical serialization and tag vocabulary."""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable

from .errors import LogFormatError

# column key -> accepted header spellings (compared case-insensitively, spaces/underscores folded)
COLUMNS = {
    "tag": "Alarm_tag",
    "subblock": "Subblock",
    "triggered_at": "Triggered Time",
    "finished_at": "Finished Time",
    "duration": "Alarm Duration",
    "priority": "Priority",
}

TABLE_TIME_FORMAT = "%m/%d/%Y %I:%M:%S %p"
DURATION_TOLERANCE_MIN = 0.5

_ARROWS = {"↑": "_HI", "↓": "_LO"}


class Priority(str, enum.Enum):
    LOW = "Low"
    MEDIUM = "Medium"
    HIGH = "High"

    @classmethod
    def parse(cls, text: str) -> "Priority":
        for member in cls:
            if member.value.lower() == text.strip().lower():
                return member
        raise ValueError(f"unknown priority {text!r}")


@dataclass(frozen=True)
class AlarmEvent:
    tag: str
    triggered_at: datetime
    subblock: str = ""
    finished_at: datetime | None = None
    duration: float | None = None  # minutes
    priority: Priority | None = None

    def __post_init__(self):
        if self.finished_at is not None and self.finished_at < self.triggered_at:
            raise ValueError("finished_at precedes triggered_at")
        if self.duration is not None and self.duration < 0:
            raise ValueError("negative duration")


@dataclass(frozen=True)
class AlarmLog:
    events: tuple[AlarmEvent, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        for a, b in zip(self.events, self.events[1:]):
            if b.triggered_at < a.triggered_at:
                raise ValueError("events are not in chronological order")

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    @classmethod
    def from_unsorted(cls, events: Iterable[AlarmEvent]) -> "AlarmLog":
        # sorted() is stable, so equal timestamps keep their input order
        return cls(tuple(sorted(events, key=lambda e: e.triggered_at)))


@dataclass(frozen=True)
class Diagnostic:
    """A rejected input row. ``row`` is the 1-based line number in the file (header = line 1)."""

    row: int
    kind: str  # MalformedRow | BadTimestamp | NegativeDuration | DurationMismatch
    message: str


@dataclass(frozen=True)
class LogFormat:
    delimiter: str = ","


@dataclass
class TagVocabulary:
    tags: list[str] = field(default_factory=list)

    def __post_init__(self):
        self._index = {t: i for i, t in enumerate(self.tags)}
        if len(self._index) != len(self.tags):
            raise ValueError("duplicate tags in vocabulary")

    def __len__(self) -> int:
        return len(self.tags)

    def __contains__(self, tag: str) -> bool:
        return tag in self._index

    def index(self, tag: str) -> int:
        return self._index[tag]

    def tag(self, index: int) -> str:
        return self.tags[index]


def normalize_tag(tag: str) -> str:
    """Strip whitespace and map trailing direction arrows to ASCII suffixes (RT↑ -> RT_HI)."""
    tag = tag.strip()
    for arrow, suffix in _ARROWS.items():
        if tag.endswith(arrow):
            return tag[: -len(arrow)].rstrip() + suffix
    return tag


def parse_timestamp(text: str) -> datetime:
    text = text.strip()
    try:
        ts = datetime.strptime(text, TABLE_TIME_FORMAT)
    except ValueError:
        try:
            ts = datetime.fromisoformat(text)
        except ValueError:
            raise ValueError(f"unparseable timestamp {text!r}") from None
        if ts.tzinfo is not None:
            ts = ts.astimezone(timezone.utc).replace(tzinfo=None)
    return ts.replace(microsecond=0)


def _fold(name: str) -> str:
    return name.strip().lower().replace("_", " ")


def _map_header(header: list[str]) -> dict[str, int]:
    wanted = {_fold(v): k for k, v in COLUMNS.items()}
    positions = {}
    for i, name in enumerate(header):
        key = wanted.get(_fold(name))
        if key is not None and key not in positions:
            positions[key] = i
    missing = [COLUMNS[k] for k in ("tag", "triggered_at") if k not in positions]
    if missing:
        raise LogFormatError(f"header lacks required column(s): {', '.join(missing)}")
    return positions


def _parse_row(cells: list[str], cols: dict[str, int]) -> AlarmEvent:
    """Build one event or raise ``_RowError`` with the diagnostic kind."""

    def cell(key):
        i = cols.get(key)
        return cells[i].strip() if i is not None else ""

    tag = normalize_tag(cell("tag"))
    if not tag:
        raise _RowError("MalformedRow", "empty alarm tag")
    try:
        triggered = parse_timestamp(cell("triggered_at"))
        finished = parse_timestamp(cell("finished_at")) if cell("finished_at") else None
    except ValueError as exc:
        raise _RowError("BadTimestamp", str(exc)) from None

    duration = None
    if cell("duration"):
        try:
            duration = float(cell("duration"))
        except ValueError:
            raise _RowError("MalformedRow", f"duration {cell('duration')!r} is not a number") from None
        if duration < 0:
            raise _RowError("NegativeDuration", f"duration {duration} < 0")
    if finished is not None and finished < triggered:
        raise _RowError("NegativeDuration", "finished time precedes triggered time")
    if finished is not None:
        elapsed = (finished - triggered).total_seconds() / 60.0
        if duration is None:
            duration = elapsed
        elif abs(duration - elapsed) > DURATION_TOLERANCE_MIN:
            raise _RowError(
                "DurationMismatch", f"duration {duration} min disagrees with timestamps ({elapsed:.2f} min)"
            )

    priority = None
    if cell("priority"):
        try:
            priority = Priority.parse(cell("priority"))
        except ValueError as exc:
            raise _RowError("MalformedRow", str(exc)) from None

    return AlarmEvent(
        tag=tag,
        triggered_at=triggered,
        subblock=cell("subblock"),
        finished_at=finished,
        duration=duration,
        priority=priority,
    )


class _RowError(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


def parse_log(raw: bytes | str, fmt: LogFormat | None = None) -> tuple[AlarmLog, list[Diagnostic]]:
    """Parse a delimited alarm table into a chronologically sorted log.

    Bad rows are skipped and reported as diagnostics; a missing header or
    missing required columns raises ``LogFormatError``.
    """
    fmt = fmt or LogFormat()
    text = raw.decode("utf-8-sig") if isinstance(raw, (bytes, bytearray)) else raw
    reader = csv.reader(io.StringIO(text), delimiter=fmt.delimiter, skipinitialspace=True)
    try:
        header = next(reader)
    except StopIteration:
        raise LogFormatError("empty input: no header row") from None
    cols = _map_header(header)

    events, diagnostics = [], []
    for cells in reader:
        line = reader.line_num
        if not any(c.strip() for c in cells):
            continue
        if len(cells) != len(header):
            diagnostics.append(
                Diagnostic(line, "MalformedRow", f"expected {len(header)} columns, got {len(cells)}")
            )
            continue
        try:
            events.append(_parse_row(cells, cols))
        except _RowError as err:
            diagnostics.append(Diagnostic(line, err.kind, str(err)))
    return AlarmLog.from_unsorted(events), diagnostics


def format_log(log: AlarmLog, fmt: LogFormat | None = None) -> str:
    """Serialize to the canonical table: all six columns, ISO-8601 times, repr-precision durations."""
    fmt = fmt or LogFormat()
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=fmt.delimiter, lineterminator="\n")
    writer.writerow(list(COLUMNS.values()))
    for e in log:
        writer.writerow(
            [
                e.tag,
                e.subblock,
                e.triggered_at.isoformat(),
                e.finished_at.isoformat() if e.finished_at else "",
                repr(e.duration) if e.duration is not None else "",
                e.priority.value if e.priority else "",
            ]
        )
    return buf.getvalue()


def build_vocabulary(log: AlarmLog | Iterable[AlarmEvent]) -> TagVocabulary:
    """Index tags densely in order of first appearance."""
    seen: dict[str, None] = {}
    for e in log:
        seen.setdefault(e.tag, None)
    return TagVocabulary(list(seen))


def format_vocabulary(vocab: TagVocabulary) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["tag", "index"])
    for i, t in enumerate(vocab.tags):
        writer.writerow([t, i])
    return buf.getvalue()


def parse_vocabulary(text: str) -> TagVocabulary:
    rows = list(csv.reader(io.StringIO(text)))[1:]
    rows = sorted((int(i), t) for t, i in rows)
    if [i for i, _ in rows] != list(range(len(rows))):
        raise LogFormatError("vocabulary indices are not contiguous from 0")
    return TagVocabulary([t for _, t in rows])
