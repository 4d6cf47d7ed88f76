"""Flat ``key = value`` pipeline configuration with dotted section prefixes."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from .embed.skipgram import SkipGramParams
from .embed.walks import WalkParams
from .errors import ConfigError
from .preprocess import PreprocessConfig


def _positive(v):
    return None if v > 0 else "must be > 0"


def _at_least(n):
    return lambda v: None if v >= n else f"must be >= {n}"


def _one_of(*choices):
    return lambda v: None if v in choices else f"must be one of {', '.join(choices)}"


def _k_choice(v):
    if v in ("elbow", "epsilon"):
        return None
    return None if isinstance(v, int) and v >= 1 else "must be 'elbow', 'epsilon' or an integer >= 1"


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_k(text: str):
    t = text.strip().strip("\"'")
    return t if t in ("elbow", "epsilon") else int(t)


# key -> (parser, default, validator)
SCHEMA: dict[str, tuple[Callable[[str], Any], Any, Callable[[Any], str | None] | None]] = {
    "seed": (int, 0, None),
    "chatter_window": (float, 60.0, _positive),
    "gap_threshold": (float, 300.0, _positive),
    "min_len": (int, 5, _positive),
    "walk.num_walks": (int, 10, _at_least(1)),
    "walk.walk_length": (int, 40, _at_least(2)),
    "walk.p": (float, 1.0, _positive),
    "walk.q": (float, 1.0, _positive),
    "walk.save_corpus": (_parse_bool, True, None),
    "skipgram.dims": (int, 128, _at_least(2)),
    "skipgram.window": (int, 5, _at_least(1)),
    "skipgram.negatives": (int, 5, _at_least(1)),
    "skipgram.epochs": (int, 5, _at_least(1)),
    "skipgram.lr": (float, 0.025, _positive),
    "skipgram.min_lr": (float, 1e-4, _positive),
    "skipgram.noise_exponent": (float, 0.75, None),
    "cluster.k": (_parse_k, "elbow", _k_choice),
    "cluster.runs": (int, 100, _at_least(1)),
    "cluster.k_min": (int, 2, _at_least(1)),
    "cluster.k_max": (int, 10, _at_least(1)),
    "cluster.linkage": (str, "average", _one_of("single", "complete", "average")),
    "cluster.eps_tol": (float, 1e-3, _positive),
    "cluster.init": (str, "random", _one_of("random", "k-means++")),
    "pca_k": (int, 2, _at_least(1)),
    "synth.burst_rate": (float, 0.5, _positive),
    "synth.noise_rate": (float, 2.0, _at_least(0)),
    "synth.spread": (float, 60.0, _positive),
    "synth.chatter_prob": (float, 0.2, lambda v: None if 0 <= v <= 1 else "must lie in [0, 1]"),
    "synth.fault_interval": (float, 1800.0, _positive),
    "synth.total_alarms": (int, 4000, _at_least(1)),
}

ALIASES = {
    "walk.r": "walk.num_walks",
    "walk.L": "walk.walk_length",
    "skipgram.d": "skipgram.dims",
    "cluster.M_runs": "cluster.runs",
    "preprocess.chatter_window": "chatter_window",
    "preprocess.gap_threshold": "gap_threshold",
    "preprocess.min_len": "min_len",
}


@dataclass
class PipelineConfig:
    values: dict[str, Any] = field(default_factory=lambda: {k: v[1] for k, v in SCHEMA.items()})
    source_sha256: str | None = None

    def __getitem__(self, key: str):
        return self.values[key]

    @property
    def seed(self) -> int:
        return self.values["seed"]

    def with_seed(self, seed: int | None) -> "PipelineConfig":
        if seed is None:
            return self
        return PipelineConfig({**self.values, "seed": seed}, self.source_sha256)

    def validate(self) -> None:
        for key, (_, _, check) in SCHEMA.items():
            msg = check(self.values[key]) if check else None
            if msg:
                raise ConfigError(key, msg)
        if self["cluster.k_max"] < self["cluster.k_min"]:
            raise ConfigError("cluster.k_max", "must be >= cluster.k_min")
        if self["cluster.k"] == "epsilon" and self["cluster.k_max"] < self["cluster.k_min"] + 1:
            raise ConfigError("cluster.k_max", "epsilon selection needs k_max >= k_min + 1")
        if self["pca_k"] > self["skipgram.dims"]:
            raise ConfigError("pca_k", "cannot exceed skipgram.dims")

    def preprocess(self) -> PreprocessConfig:
        return PreprocessConfig(self["chatter_window"], self["gap_threshold"], self["min_len"])

    def walk(self) -> WalkParams:
        return WalkParams(
            self["walk.num_walks"], self["walk.walk_length"], self["walk.p"], self["walk.q"], self.seed
        )

    def skipgram(self) -> SkipGramParams:
        return SkipGramParams(
            dims=self["skipgram.dims"],
            window=self["skipgram.window"],
            negatives=self["skipgram.negatives"],
            epochs=self["skipgram.epochs"],
            learning_rate=self["skipgram.lr"],
            min_learning_rate=self["skipgram.min_lr"],
            noise_exponent=self["skipgram.noise_exponent"],
            seed=self.seed,
        )

    def as_text(self) -> str:
        return "".join(f"{k} = {_render(v)}\n" for k, v in sorted(self.values.items()))


def _render(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "inf" if math.isinf(v) else repr(v)
    return str(v)


def parse_config(text: str) -> PipelineConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment, unknown keys are errors."""
    values = {k: v[1] for k, v in SCHEMA.items()}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", "expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = ALIASES.get(key, key)
        if key not in SCHEMA:
            raise ConfigError(key, "unknown configuration key")
        parser = SCHEMA[key][0]
        try:
            values[key] = parser(value.strip("\"'") if parser is str else value)
        except ValueError as exc:
            raise ConfigError(key, f"cannot parse {value!r} ({exc})") from None
    cfg = PipelineConfig(values, hashlib.sha256(text.encode("utf-8")).hexdigest())
    cfg.validate()
    return cfg


def load_config(path: str | Path | None) -> PipelineConfig:
    if path is None:
        cfg = PipelineConfig()
        cfg.validate()
        return cfg
    data = Path(path).read_bytes()
    cfg = parse_config(data.decode("utf-8"))
    cfg.source_sha256 = hashlib.sha256(data).hexdigest()
    return cfg
