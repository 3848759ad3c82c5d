"""Source text bookkeeping: spans and line/column resolution."""

from __future__ import annotations

import bisect
from dataclasses import dataclass


@dataclass(frozen=True)
class Span:
    """Byte-offset range [start, end) within a named source text."""

    source_name: str
    start: int
    end: int
    line: int = 0
    col: int = 0

    def location(self) -> str:
        return f"{self.source_name}:{self.line}:{self.col}"

    def merge(self, other: "Span") -> "Span":
        if other.source_name != self.source_name:
            return self
        lo, hi = min(self.start, other.start), max(self.end, other.end)
        if lo == self.start:
            return Span(self.source_name, lo, hi, self.line, self.col)
        return Span(self.source_name, lo, hi, other.line, other.col)


class SourceText:
    """Holds a source string and resolves offsets to 1-based line/column."""

    def __init__(self, name: str, text: str):
        self.name = name
        self.text = text
        self._line_starts = [0]
        for i, ch in enumerate(text):
            if ch == "\n":
                self._line_starts.append(i + 1)

    def span(self, start: int, end: int) -> Span:
        line = bisect.bisect_right(self._line_starts, start)
        col = start - self._line_starts[line - 1] + 1
        return Span(self.name, start, end, line, col)
