"""Media fragment strings: pixel regions and time intervals.

Supported grammar (pixel space and seconds):

    xywh=<int>,<int>,<int>,<int>
    t=<decimal>,<decimal>

Percent-space xywh and open-ended time ranges are not supported.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union


class MalformedFragment(ValueError):
    """The fragment string does not satisfy the grammar."""


@dataclass(frozen=True)
class Region:
    """Rectangular pixel region, w and h strictly positive."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self) -> None:
        if self.x < 0 or self.y < 0:
            raise MalformedFragment("region origin must be non-negative")
        if self.w <= 0 or self.h <= 0:
            raise MalformedFragment("region width and height must be positive")

    def to_fragment(self) -> str:
        return f"xywh={self.x},{self.y},{self.w},{self.h}"


@dataclass(frozen=True)
class TimeInterval:
    """Half-open interval in seconds, start strictly before end."""

    start: float
    end: float

    def __post_init__(self) -> None:
        if self.start < 0 or self.end < 0:
            raise MalformedFragment("interval bounds must be non-negative")
        if not self.start < self.end:
            raise MalformedFragment("interval start must be < end")

    def to_fragment(self) -> str:
        return f"t={_fmt_seconds(self.start)},{_fmt_seconds(self.end)}"


def _fmt_seconds(value: float) -> str:
    if value == int(value):
        return str(int(value))
    return repr(value)


_XYWH_RE = re.compile(r"^xywh=(\d+),(\d+),(\d+),(\d+)$")
_TIME_RE = re.compile(r"^t=(\d+(?:\.\d+)?),(\d+(?:\.\d+)?)$")


def parse_media_fragment(value: str) -> Union[Region, TimeInterval]:
    """Parse `xywh=a,b,c,d` into a Region or `t=s,e` into a TimeInterval.

    Raises MalformedFragment for wrong arity, non-numeric parts, zero
    width/height, or start >= end.
    """
    if not isinstance(value, str):
        raise MalformedFragment("fragment must be a string")
    m = _XYWH_RE.match(value)
    if m:
        x, y, w, h = (int(g) for g in m.groups())
        if w == 0 or h == 0:
            raise MalformedFragment(f"zero width or height in {value!r}")
        return Region(x, y, w, h)
    m = _TIME_RE.match(value)
    if m:
        start, end = float(m.group(1)), float(m.group(2))
        if not start < end:
            raise MalformedFragment(f"start must be < end in {value!r}")
        return TimeInterval(start, end)
    if value.startswith("xywh=") or value.startswith("t="):
        raise MalformedFragment(f"malformed fragment value {value!r}")
    raise MalformedFragment(f"unknown fragment dimension in {value!r}")
