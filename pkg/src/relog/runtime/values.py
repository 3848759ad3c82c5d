"""Runtime value kinds beyond Python natives.

Relations hold plain Python values (int/float/bool/str/datetime) plus the
wrapper types below. Every kind is totally ordered and hashable so tuple
sets have deterministic, reproducible iteration and output order.
"""

from __future__ import annotations

import datetime as _dt
import functools
import math
import re
import struct
from dataclasses import dataclass

from relog.errors import FactTypeError, ShapeMismatchError, ZeroVectorError


@functools.total_ordering
class Tensor:
    """Dense row-major f32 array with an explicit shape.

    Elements are rounded to f32 on construction; equality and hashing use
    the exact bit pattern, ordering is shape-then-lexicographic.
    """

    __slots__ = ("shape", "data", "_hash")

    def __init__(self, shape, data):
        shape = tuple(int(d) for d in shape)
        n = 1
        for d in shape:
            n *= d
        data = tuple(data)
        if len(data) != n:
            raise FactTypeError(
                f"tensor data length {len(data)} does not match shape {shape}")
        # round-trip through f32 so equality is well-defined
        packed = struct.pack(f"<{len(data)}f", *data)
        self.shape = shape
        self.data = struct.unpack(f"<{len(data)}f", packed)
        self._hash = hash((shape, packed))

    def __eq__(self, other):
        return isinstance(other, Tensor) and self.shape == other.shape \
            and self.to_bytes() == other.to_bytes()

    def __lt__(self, other):
        if not isinstance(other, Tensor):
            return NotImplemented
        return (self.shape, self.data) < (other.shape, other.data)

    def __hash__(self):
        return self._hash

    def to_bytes(self) -> bytes:
        return struct.pack(f"<{len(self.data)}f", *self.data)

    @classmethod
    def from_bytes(cls, shape, raw: bytes) -> "Tensor":
        count = len(raw) // 4
        return cls(shape, struct.unpack(f"<{count}f", raw))

    def __repr__(self):
        return f"Tensor(shape={list(self.shape)}, data={list(self.data)})"


def cosine_similarity(a: Tensor, b: Tensor) -> float:
    if a.shape != b.shape:
        raise ShapeMismatchError(f"tensor shapes differ: {a.shape} vs {b.shape}")
    dot = sum(x * y for x, y in zip(a.data, b.data))
    na = math.sqrt(sum(x * x for x in a.data))
    nb = math.sqrt(sum(y * y for y in b.data))
    if na == 0.0 or nb == 0.0:
        raise ZeroVectorError("cosine similarity of a zero vector")
    return dot / (na * nb)


@functools.total_ordering
@dataclass(frozen=True)
class Duration:
    """Calendar-aware duration: whole months plus microseconds."""

    months: int
    micros: int

    _CHUNK = re.compile(r"(-?\d+(?:\.\d+)?)(MO|Y|M|W|D|H|S)")

    def __lt__(self, other):
        if not isinstance(other, Duration):
            return NotImplemented
        return (self.months, self.micros) < (other.months, other.micros)

    def __add__(self, other):
        if not isinstance(other, Duration):
            return NotImplemented
        return Duration(self.months + other.months, self.micros + other.micros)

    def __neg__(self):
        return Duration(-self.months, -self.micros)

    def __sub__(self, other):
        if not isinstance(other, Duration):
            return NotImplemented
        return self + (-other)

    @classmethod
    def parse(cls, text: str) -> "Duration":
        """Parse ISO-8601-style durations.

        Accepts `P[nY][nMO|nM][nW][nD][T[nH][nM][nS]]`, a leading `R`
        (ignored), and whitespace-separated chunks, e.g. `P1D`,
        `R12MO PT0S`, `P1YT2H`. Before `T` a bare `M` means months; after
        it, minutes.
        """
        months = 0
        micros = 0
        for chunk in text.split():
            i = 0
            time_part = False
            if chunk.startswith("R"):
                i += 1
            if i < len(chunk) and chunk[i] == "P":
                i += 1
            while i < len(chunk):
                if chunk[i] == "T":
                    time_part = True
                    i += 1
                    continue
                m = cls._CHUNK.match(chunk, i)
                if m is None:
                    raise FactTypeError(f"invalid duration {text!r}")
                raw = m.group(1)
                unit = m.group(2)
                whole = "." not in raw
                n = int(raw) if whole else float(raw)
                if not time_part:
                    if not whole:
                        raise FactTypeError(
                            f"fractional date component in duration {text!r}")
                    if unit == "Y":
                        months += 12 * n
                    elif unit in ("MO", "M"):
                        months += n
                    elif unit == "W":
                        micros += n * 7 * 86_400_000_000
                    elif unit == "D":
                        micros += n * 86_400_000_000
                    else:
                        raise FactTypeError(f"invalid duration {text!r}")
                else:
                    if unit == "H":
                        micros += round(n * 3_600_000_000)
                    elif unit == "M":
                        micros += round(n * 60_000_000)
                    elif unit == "S":
                        if whole:
                            micros += n * 1_000_000
                        else:
                            # exact decimal handling; float would lose
                            # microseconds on large magnitudes
                            int_part, _, frac_part = raw.partition(".")
                            frac_micros = int((frac_part + "000000")[:6])
                            base = int(int_part) * 1_000_000
                            if int_part.startswith("-"):
                                micros += base - frac_micros
                            else:
                                micros += base + frac_micros
                    else:
                        raise FactTypeError(f"invalid duration {text!r}")
                i = m.end()
        return cls(months, micros)

    def canonical(self) -> str:
        # plain decimal text (never scientific notation) so negative and
        # sub-second values round-trip through the extended parser
        sign = "-" if self.micros < 0 else ""
        whole, frac = divmod(abs(self.micros), 1_000_000)
        secs_text = f"{sign}{whole}"
        if frac:
            secs_text += f".{frac:06d}".rstrip("0")
        return f"P{self.months}MOT{secs_text}S"

    def __repr__(self):
        return f"Duration({self.canonical()!r})"


@functools.total_ordering
@dataclass(frozen=True)
class Entity:
    """Reference into the term store."""

    id: int

    def __lt__(self, other):
        if not isinstance(other, Entity):
            return NotImplemented
        return self.id < other.id

    def __repr__(self):
        return f"Entity({self.id})"


def parse_datetime(text: str) -> _dt.datetime:
    """ISO-8601 date or date-time; naive values are taken as UTC."""
    raw = text.strip()
    if raw.endswith("Z"):
        raw = raw[:-1]
    try:
        value = _dt.datetime.fromisoformat(raw)
    except ValueError:
        try:
            value = _dt.datetime.combine(_dt.date.fromisoformat(raw), _dt.time())
        except ValueError:
            raise FactTypeError(f"invalid datetime {text!r}")
    if value.tzinfo is not None:
        value = value.astimezone(_dt.timezone.utc).replace(tzinfo=None)
    return value


def datetime_to_text(value: _dt.datetime) -> str:
    if value.time() == _dt.time():
        return value.date().isoformat()
    return value.isoformat()


_DAYS_IN_MONTH = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31]


def _is_leap(year: int) -> bool:
    return year % 4 == 0 and (year % 100 != 0 or year % 400 == 0)


def add_months(value: _dt.datetime, months: int) -> _dt.datetime:
    """Calendar month shift; the day of month clamps (Jan 31 + 1mo = Feb 28/29)."""
    month_index = value.year * 12 + (value.month - 1) + months
    year, month0 = divmod(month_index, 12)
    month = month0 + 1
    days = _DAYS_IN_MONTH[month0] + (1 if month == 2 and _is_leap(year) else 0)
    return value.replace(year=year, month=month, day=min(value.day, days))


def datetime_add(value: _dt.datetime, dur: Duration) -> _dt.datetime:
    shifted = add_months(value, dur.months)
    return shifted + _dt.timedelta(microseconds=dur.micros)


def datetime_sub(value: _dt.datetime, dur: Duration) -> _dt.datetime:
    shifted = add_months(value, -dur.months)
    return shifted - _dt.timedelta(microseconds=dur.micros)


def datetime_diff(a: _dt.datetime, b: _dt.datetime) -> Duration:
    delta = a - b
    return Duration(0, round(delta.total_seconds() * 1_000_000))
