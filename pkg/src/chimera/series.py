"""Weekly hospitalization series, running-max scaling, and peak extraction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .epiweek import EpiWeek, week_range
from .errors import AlignmentError, DegenerateScaleError


@dataclass(frozen=True, eq=False)
class HospSeries:
    """Consecutive weekly incident-hospitalization counts for one location."""

    location: str
    start: EpiWeek
    counts: np.ndarray = field(repr=False)

    def __post_init__(self):
        counts = np.array(self.counts, dtype=float)
        if counts.ndim != 1 or counts.size == 0:
            raise ValueError("counts must be a non-empty 1-d vector")
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    def __len__(self):
        return self.counts.size

    @property
    def weeks(self) -> list[EpiWeek]:
        return week_range(self.start, len(self))

    def week_index(self, week: EpiWeek) -> int:
        idx = week - self.start
        if not 0 <= idx < len(self):
            raise KeyError(f"{week} outside series for {self.location}")
        return idx

    def upto(self, week: EpiWeek) -> "HospSeries":
        """Prefix of the series through `week` (inclusive)."""
        return HospSeries(self.location, self.start, self.counts[: self.week_index(week) + 1])

    def items(self):
        return list(zip(self.weeks, self.counts))


@dataclass(frozen=True, eq=False)
class ScaledSeries:
    """Counts divided by their running maximum; values live in [0, 1]."""

    values: np.ndarray
    scale_c: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if self.scale_c <= 0:
            raise DegenerateScaleError("scale must be positive")
        if np.any(values < 0) or np.any(values > 1 + 1e-12):
            raise ValueError("scaled values must lie in [0, 1]")
        object.__setattr__(self, "values", values)


def running_max_scale(series: HospSeries, upto: EpiWeek | None = None) -> ScaledSeries:
    """Divide counts through `upto` by the maximum observed up to that week."""
    prefix = series if upto is None else series.upto(upto)
    c = float(prefix.counts.max())
    if c <= 0:
        raise DegenerateScaleError(f"{series.location}: all-zero series has no scale")
    return ScaledSeries(prefix.counts / c, c)


def peak(series: HospSeries) -> tuple[EpiWeek, float]:
    """Earliest week attaining the maximum count."""
    idx = int(np.argmax(series.counts))  # argmax returns the first maximum
    return series.start + idx, float(series.counts[idx])


def weekly_from_daily(daily, start: EpiWeek) -> list[tuple[EpiWeek, float]]:
    """Sum consecutive 7-day blocks into weekly totals aligned at `start`."""
    daily = np.asarray(daily, dtype=float)
    if daily.ndim != 1 or daily.size % 7 != 0:
        raise AlignmentError(f"daily length {daily.size} is not a multiple of 7")
    weekly = daily.reshape(-1, 7).sum(axis=1)
    return list(zip(week_range(start, weekly.size), weekly))
