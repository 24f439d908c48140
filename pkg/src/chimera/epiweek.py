"""MMWR epidemic-week calendar (CDC convention, weeks run Sunday to Saturday)."""

from __future__ import annotations

import datetime
from dataclasses import dataclass
from functools import total_ordering


def _week_start(day: datetime.date) -> datetime.date:
    """Sunday on or before `day`."""
    return day - datetime.timedelta(days=(day.weekday() + 1) % 7)


@total_ordering
@dataclass(frozen=True)
class EpiWeek:
    """One MMWR week. Week 1 is the first Sunday-start week with at least
    four days in the new calendar year; years have 52 or 53 weeks."""

    year: int
    week: int

    def __post_init__(self):
        if not 1 <= self.week <= weeks_in_year(self.year):
            raise ValueError(f"week {self.week} invalid for MMWR year {self.year}")

    @classmethod
    def from_date(cls, day: datetime.date) -> "EpiWeek":
        start = _week_start(day)
        wednesday = start + datetime.timedelta(days=3)
        year = wednesday.year
        week = (start - _year_start(year)).days // 7 + 1
        return cls(year, week)

    def start_date(self) -> datetime.date:
        return _year_start(self.year) + datetime.timedelta(weeks=self.week - 1)

    def end_date(self) -> datetime.date:
        return self.start_date() + datetime.timedelta(days=6)

    def __add__(self, n: int) -> "EpiWeek":
        return EpiWeek.from_date(self.start_date() + datetime.timedelta(weeks=n))

    def __sub__(self, other):
        """EpiWeek - int -> EpiWeek; EpiWeek - EpiWeek -> signed week count."""
        if isinstance(other, EpiWeek):
            return (self.start_date() - other.start_date()).days // 7
        return self + (-other)

    def __lt__(self, other: "EpiWeek") -> bool:
        return self.start_date() < other.start_date()

    def __str__(self):
        return f"{self.year}W{self.week:02d}"

    def cdc_format(self) -> str:
        return f"{self.year}{self.week:02d}"

    @classmethod
    def parse(cls, text: str) -> "EpiWeek":
        """Accepts '2023W41', '202341', or '2023-41'."""
        text = text.strip().upper().replace("-", "W")
        if "W" in text:
            y, w = text.split("W")
        else:
            y, w = text[:4], text[4:]
        return cls(int(y), int(w))


def _year_start(year: int) -> datetime.date:
    """Sunday starting MMWR week 1: the week containing January 4."""
    return _week_start(datetime.date(year, 1, 4))


def weeks_in_year(year: int) -> int:
    return (_year_start(year + 1) - _year_start(year)).days // 7


def epiweek_from_date(day: datetime.date) -> EpiWeek:
    """MMWR week containing a calendar date."""
    return EpiWeek.from_date(day)


def week_range(start: EpiWeek, n: int) -> list[EpiWeek]:
    """`n` consecutive weeks beginning at `start`."""
    return [start + k for k in range(n)]
