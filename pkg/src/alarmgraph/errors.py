"""Exception types raised across the pipeline."""


class AlarmGraphError(Exception):
    """Base class for every error raised by this package."""


class LogFormatError(AlarmGraphError, ValueError):
    """The log cannot be read at all (missing required header columns, bad format)."""


class IndexOutOfVocabulary(AlarmGraphError, IndexError):
    pass


class EmptyPresence(AlarmGraphError, ValueError):
    pass


class DeadEnd(AlarmGraphError, ValueError):
    pass


class EmptyGraph(AlarmGraphError, ValueError):
    pass


class EmptyCorpus(AlarmGraphError, ValueError):
    pass


class ZeroNormRow(AlarmGraphError, ValueError):
    pass


class TooFewPoints(AlarmGraphError, ValueError):
    pass


class DimensionMismatch(AlarmGraphError, ValueError):
    pass


class DegenerateInput(AlarmGraphError, ValueError):
    pass


class InvalidTarget(AlarmGraphError, ValueError):
    pass


class InvalidSpec(AlarmGraphError, ValueError):
    pass


class ConfigError(AlarmGraphError, ValueError):
    """Invalid pipeline configuration; ``key`` names the offending dotted key."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key
