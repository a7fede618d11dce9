"""Exception hierarchy shared across the simulator."""

from __future__ import annotations


class FedsimError(Exception):
    """Base class for all simulator errors."""


class ConfigError(FedsimError):
    """Invalid experiment configuration (bad value, unknown key, unreadable file)."""


class DataError(FedsimError):
    """Malformed dataset input or violated dataset invariant."""


class CsvParseError(DataError):
    """CSV row that cannot be parsed; message names the offending line."""


class PartitionError(FedsimError):
    """Client partition cannot be built (capacity, stratification, ...)."""


class ShapeError(FedsimError):
    """Array dimensions inconsistent with the declared architecture."""


class AggregationError(FedsimError):
    """Server aggregation received no usable updates."""


class RoundFailureError(FedsimError):
    """A round saw client failures while accept_failures is off."""

    def __init__(self, round_index: int, failed_ids: list[int]):
        self.round_index = round_index
        self.failed_ids = list(failed_ids)
        ids = ", ".join(str(i) for i in self.failed_ids)
        super().__init__(
            f"round {round_index}: client(s) {ids} failed and accept_failures is off"
        )


class MetricsError(FedsimError):
    """Evaluation input on which the requested metric is undefined."""
