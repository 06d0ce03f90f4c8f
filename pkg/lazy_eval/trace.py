# lazy_eval/trace.py

from dataclasses import dataclass, field
from typing import List


@dataclass(frozen=True)
class TraceRecord:
    i: int
    rule: str
    size: int


@dataclass
class Trace:
    """Sizes of the states (or expressions) along one run, one record per step."""

    records: List[TraceRecord] = field(default_factory=list)

    def add(self, rule, size):
        self.records.append(TraceRecord(len(self.records) + 1, rule, size))

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def __bool__(self):
        return bool(self.records)

    def peak(self):
        return max((r.size for r in self.records), default=0)
