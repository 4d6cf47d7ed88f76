"""Synthetic Tennessee-Eastman-style alarm logs with planted correlated groups.

Each correlated group fires in bursts at Poisson times; inside a burst every
member triggers once within ``spread`` seconds. Independent background alarms
come from the noise tags, a periodic fault tag marks the scenario, and
chattering duplicates are injected shortly after originals. The generator
keeps its own bookkeeping so tests know exactly which events are planted
duplicates.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timedelta

import numpy as np

from .errors import InvalidSpec
from .ingest import AlarmEvent, AlarmLog, Priority

_U64 = (1 << 64) - 1

# (name, subblock) for every measured variable listed for the TE process
TE_VARIABLES: list[tuple[str, str]] = [
    ("AF", "Feed"),
    ("DF", "Feed"),
    ("EF", "Feed"),
    ("ACF", "Feed"),
    ("RcF", "Compressor & Purge"),
    ("RFR", "Reactor"),
    ("RP", "Reactor"),
    ("RL", "Reactor"),
    ("RT", "Reactor"),
    ("PuR", "Compressor & Purge"),
    ("PST", "Separator"),
    ("PSL", "Separator"),
    ("PSP", "Separator"),
    ("PSU", "Separator"),
    ("SL", "Stripper"),
    ("SIP", "Stripper"),
    ("SiU", "Stripper"),
    ("SiT", "Stripper"),
    ("SiSF", "Stripper"),
    ("CW", "Compressor & Purge"),
    ("RCT", "Reactor"),
    ("SpCT", "Separator"),
    ("CAR", "Feed"),
    ("CBR", "Feed"),
    ("CCR", "Feed"),
    ("CDR", "Feed"),
    ("CER", "Feed"),
    ("CFR", "Feed"),
    ("CAPu", "Compressor & Purge"),
    ("CBPu", "Compressor & Purge"),
    ("CCPu", "Compressor & Purge"),
    ("CDPu", "Compressor & Purge"),
    ("CEPu", "Compressor & Purge"),
    ("CFPu", "Compressor & Purge"),
    ("CGPu", "Compressor & Purge"),
    ("CHPu", "Compressor & Purge"),
    ("CDPr", "Product"),
    ("CEPr", "Product"),
    ("CFPr", "Product"),
    ("CGPr", "Product"),
    ("CHPr", "Product"),
]
TE_BASE_TAGS = [name for name, _ in TE_VARIABLES]
_SUBBLOCK = dict(TE_VARIABLES)

# scenarios of the TE benchmark used in the case study
TE_FAULTS = ("F1", "F2", "F6", "F8", "F10", "F11", "F12", "F13", "F17", "F18", "F20")

FAULT_SUBBLOCK = "Fault"
CHATTER_MAX_OFFSET = 59  # seconds; duplicates land strictly inside a 60 s window


def builtin_te_vocabulary() -> list[str]:
    """All TE alarm tags: every base variable with a high and a low variant."""
    return [f"{base}_{d}" for base in TE_BASE_TAGS for d in ("HI", "LO")]


def base_tag(tag: str) -> str:
    for suffix in ("_HI", "_LO"):
        if tag.endswith(suffix):
            return tag[: -len(suffix)]
    return tag


def subblock_of(tag: str) -> str:
    return _SUBBLOCK.get(base_tag(tag), "")


@dataclass
class ScenarioSpec:
    fault_label: str
    groups: list[list[str]]
    fault_interval: float  # seconds between fault-tag entries
    noise_tags: list[str] = field(default_factory=list)
    burst_rate: float | list[float] = 1.0  # bursts/hour, per group
    spread: float = 60.0  # seconds
    noise_rate: float = 0.0  # independent alarms/hour over all noise tags
    chatter_prob: float = 0.0
    fault_group: int | None = 0
    total_alarms: int = 4000
    min_same_tag_gap: float = 60.0  # originals of one tag are kept further apart than this
    seed: int = 0
    start: str = "2019-03-07T00:00:00"

    def burst_rates(self) -> list[float]:
        if isinstance(self.burst_rate, (int, float)):
            return [float(self.burst_rate)] * len(self.groups)
        return [float(r) for r in self.burst_rate]

    def validate(self) -> None:
        if not self.groups or any(len(g) == 0 for g in self.groups):
            raise InvalidSpec("groups must be a non-empty list of non-empty tag lists")
        tags = [t for g in self.groups for t in g] + list(self.noise_tags)
        if len(set(tags)) != len(tags):
            raise InvalidSpec("a tag appears in more than one group / noise list")
        if self.fault_label in tags:
            raise InvalidSpec("fault label collides with an alarm tag")
        rates = self.burst_rates()
        if len(rates) != len(self.groups) or any(not r > 0 for r in rates):
            raise InvalidSpec("burst rates must be positive, one per group")
        if not self.spread > 0:
            raise InvalidSpec("spread must be > 0")
        if self.noise_rate < 0 or (self.noise_rate > 0 and not self.noise_tags):
            raise InvalidSpec("noise_rate must be >= 0 and needs noise_tags when positive")
        if not 0 <= self.chatter_prob <= 1:
            raise InvalidSpec("chatter_prob must lie in [0, 1]")
        if not self.fault_interval > 0:
            raise InvalidSpec("fault_interval must be > 0")
        if self.total_alarms < 1:
            raise InvalidSpec("total_alarms must be >= 1")
        if self.fault_group is not None and not 0 <= self.fault_group < len(self.groups):
            raise InvalidSpec("fault_group does not name a group")
        datetime.fromisoformat(self.start)


@dataclass
class GroundTruth:
    tag_group: dict[str, int | None]
    fault_group: dict[str, int | None]
    is_duplicate: list[bool]  # aligned with the generated log's events

    @property
    def n_duplicates(self) -> int:
        return sum(self.is_duplicate)


def _poisson_times(rng: np.random.Generator, rate_per_hour: float, horizon: float) -> list[float]:
    times, t = [], 0.0
    scale = 3600.0 / rate_per_hour
    while True:
        t += rng.exponential(scale)
        if t >= horizon:
            return times
        times.append(t)


def _events_per_hour(spec: ScenarioSpec) -> float:
    planted = sum(r * len(g) for r, g in zip(spec.burst_rates(), spec.groups))
    return (planted + spec.noise_rate) * (1 + spec.chatter_prob) + 3600.0 / spec.fault_interval


def _originals(spec: ScenarioSpec, horizon: float) -> list[tuple[int, int, str, str]]:
    """(second, source rank, tag, kind) for all non-duplicate alarms before ``horizon``."""
    out = []
    for g, (group, rate) in enumerate(zip(spec.groups, spec.burst_rates())):
        rng = np.random.default_rng([spec.seed & _U64, 1, g])
        for t0 in _poisson_times(rng, rate, horizon):
            offsets = rng.uniform(0.0, spec.spread, size=len(group))
            for tag, off in zip(group, offsets):
                out.append((int(t0 + off), 1, tag, "group"))
    if spec.noise_rate > 0:
        rng = np.random.default_rng([spec.seed & _U64, 2])
        for t in _poisson_times(rng, spec.noise_rate, horizon):
            tag = spec.noise_tags[int(rng.integers(len(spec.noise_tags)))]
            out.append((int(t), 2, tag, "noise"))
    j = 1
    while j * spec.fault_interval < horizon:
        out.append((int(round(j * spec.fault_interval)), 0, spec.fault_label, "fault"))
        j += 1
    out.sort(key=lambda e: (e[0], e[1]))

    # same-tag originals closer than the chatter window would read as chattering
    last: dict[str, int] = {}
    kept = []
    for ev in out:
        t, _, tag, kind = ev
        if kind != "fault" and tag in last and t - last[tag] <= spec.min_same_tag_gap:
            continue
        last[tag] = t
        kept.append(ev)
    return kept


def generate(spec: ScenarioSpec) -> tuple[AlarmLog, GroundTruth]:
    """Generate ``spec.total_alarms`` chronologically sorted alarms, deterministic per seed."""
    spec.validate()
    start = datetime.fromisoformat(spec.start)
    horizon = 1.25 * 3600.0 * spec.total_alarms / _events_per_hour(spec) + 3600.0
    while True:
        originals = _originals(spec, horizon)
        chat_rng = np.random.default_rng([spec.seed & _U64, 3])
        dur_rng = np.random.default_rng([spec.seed & _U64, 4])
        rows = []  # (second, tiebreak, tag, kind, duplicate)
        for n, (t, rank, tag, kind) in enumerate(originals):
            rows.append((t, 2 * n, tag, kind, False))
            if kind != "fault" and chat_rng.random() < spec.chatter_prob:
                rows.append((t + int(chat_rng.integers(1, CHATTER_MAX_OFFSET + 1)), 2 * n + 1, tag, kind, True))
        if len(rows) >= spec.total_alarms:
            break
        horizon *= 2
    rows.sort(key=lambda r: (r[0], r[1]))
    rows = rows[: spec.total_alarms]

    priorities = {"fault": Priority.HIGH, "group": Priority.MEDIUM, "noise": Priority.LOW}
    events, dup = [], []
    for t, _, tag, kind, is_dup in rows:
        trig = start + timedelta(seconds=t)
        length = int(dur_rng.exponential(600.0)) + 1
        events.append(
            AlarmEvent(
                tag=tag,
                triggered_at=trig,
                subblock=FAULT_SUBBLOCK if kind == "fault" else subblock_of(tag),
                finished_at=trig + timedelta(seconds=length),
                duration=length / 60.0,
                priority=priorities[kind],
            )
        )
        dup.append(is_dup)

    tag_group: dict[str, int | None] = {t: g for g, group in enumerate(spec.groups) for t in group}
    tag_group.update({t: None for t in spec.noise_tags})
    truth = GroundTruth(tag_group, {spec.fault_label: spec.fault_group}, dup)
    return AlarmLog(tuple(events)), truth


def concatenate(
    parts: list[tuple[AlarmLog, GroundTruth]], gap: float = 3600.0
) -> tuple[AlarmLog, GroundTruth]:
    """Chain several scenario logs end to end, shifting each after the previous one by ``gap`` seconds."""
    events, dup = [], []
    tag_group: dict[str, int | None] = {}
    faults: dict[str, int | None] = {}
    offset = timedelta(0)
    last_end = None
    for log, truth in parts:
        if log.events and last_end is not None:
            offset = last_end + timedelta(seconds=gap) - log.events[0].triggered_at
        for e in log:
            shifted = AlarmEvent(
                e.tag, e.triggered_at + offset, e.subblock,
                e.finished_at + offset if e.finished_at else None, e.duration, e.priority,
            )
            events.append(shifted)
        if log.events:
            last_end = events[-1].triggered_at
        dup.extend(truth.is_duplicate)
        tag_group.update(truth.tag_group)
        faults.update(truth.fault_group)
    return AlarmLog(tuple(events)), GroundTruth(tag_group, faults, dup)


def planted_scenario(seed: int = 0, **overrides) -> ScenarioSpec:
    """Three four-alarm groups, ten noise alarms, 20% chatter and a periodic F12 tag."""
    params = dict(
        fault_label="F12",
        groups=[
            ["RT_HI", "RP_HI", "RCT_HI", "RL_LO"],
            ["SpCT_HI", "PST_HI", "PSP_HI", "PSL_LO"],
            ["SL_LO", "SIP_HI", "SiT_HI", "SiSF_HI"],
        ],
        noise_tags=["AF_LO", "DF_HI", "EF_LO", "ACF_HI", "RcF_HI", "PuR_HI", "CCR_HI", "CAPu_LO", "CGPr_HI", "CEPr_LO"],
        burst_rate=0.5,
        spread=60.0,
        noise_rate=2.0,
        chatter_prob=0.2,
        fault_interval=1800.0,
        fault_group=1,
        total_alarms=4000,
        seed=seed,
    )
    params.update(overrides)
    return ScenarioSpec(**params)


def format_ground_truth(truth: GroundTruth) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["tag", "group"])
    for tag, g in truth.tag_group.items():
        w.writerow([tag, "" if g is None else g])
    for tag, g in truth.fault_group.items():
        w.writerow([tag, "" if g is None else g])
    return buf.getvalue()


def scenario_manifest(spec: ScenarioSpec, truth: GroundTruth) -> str:
    rec = {"scenario": asdict(spec), "n_events": len(truth.is_duplicate), "n_duplicates": truth.n_duplicates}
    return json.dumps(rec, indent=2, sort_keys=True) + "\n"
