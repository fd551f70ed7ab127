"""Ingestion of aggregate count tables and unit-level records.

Aggregate tables are long-format CSV with header ``cohort,outcome,count``:
``cohort`` is the truncation age (may be empty for a marginal table),
``outcome`` is a failure year ``1..s`` or the literal ``cens``, and
``count`` is a nonnegative integer.  Duplicate (cohort, outcome) rows are
summed.  Unit-level files use header ``t,d,censored``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from .estimator import SufficientStats
from .model import ObservedUnit

CENSORED_OUTCOME = "cens"

AGGREGATE_HEADER = ["cohort", "outcome", "count"]
UNITS_HEADER = ["t", "d", "censored"]


class PanelFormatError(ValueError):
    """Malformed or out-of-domain input; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class AggregateTable:
    """Normalized counts keyed by (cohort, outcome); outcome None = censored."""

    s: int
    G: int
    counts: dict = field(default_factory=dict)

    def __post_init__(self):
        for (cohort, outcome), count in self.counts.items():
            if count < 0:
                raise PanelFormatError(f"negative count {count} for {(cohort, outcome)}")
            if cohort is not None and not 0 <= cohort <= self.G - 1:
                raise PanelFormatError(f"cohort {cohort} outside 0..{self.G - 1}")
            if outcome is not None and not 1 <= outcome <= self.s:
                raise PanelFormatError(f"outcome {outcome} outside 1..{self.s}")

    @property
    def m(self) -> int:
        return sum(self.counts.values())

    @classmethod
    def from_wide(cls, rows: dict, s: int, G: int) -> "AggregateTable":
        """Build from a wide layout {cohort: (count_d1, ..., count_ds, count_cens)}."""
        counts: dict = {}
        for cohort, row in rows.items():
            if len(row) != s + 1:
                raise ValueError(f"wide row for cohort {cohort} needs {s + 1} entries")
            for d, count in enumerate(row[:s], start=1):
                counts[(cohort, d)] = counts.get((cohort, d), 0) + int(count)
            counts[(cohort, None)] = counts.get((cohort, None), 0) + int(row[s])
        return cls(s=s, G=G, counts=counts)

    def pooled(self) -> "AggregateTable":
        """Marginalize over cohorts (all keys get cohort None)."""
        counts: dict = {}
        for (_, outcome), count in self.counts.items():
            counts[(None, outcome)] = counts.get((None, outcome), 0) + count
        return AggregateTable(s=self.s, G=self.G, counts=counts)


def _sort_key(item):
    (cohort, outcome), _ = item
    return (
        -1 if cohort is None else cohort,
        outcome is None,  # 'cens' sorts after numeric outcomes
        0 if outcome is None else outcome,
    )


def parse_aggregate(stream: io.TextIOBase, s: int, G: int) -> AggregateTable:
    """Parse and validate a long-format aggregate CSV."""
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise PanelFormatError("empty input; expected header cohort,outcome,count")
    if [h.strip() for h in header] != AGGREGATE_HEADER:
        raise PanelFormatError(f"expected header {','.join(AGGREGATE_HEADER)}, got {','.join(header)}", line=1)

    counts: dict = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 3:
            raise PanelFormatError(f"expected 3 fields, got {len(row)}", line=lineno)
        raw_cohort, raw_outcome, raw_count = (cell.strip() for cell in row)

        if raw_cohort == "":
            cohort = None
        else:
            try:
                cohort = int(raw_cohort)
            except ValueError:
                raise PanelFormatError(f"cohort {raw_cohort!r} is not an integer", line=lineno)
            if not 0 <= cohort <= G - 1:
                raise PanelFormatError(f"cohort {cohort} outside 0..{G - 1}", line=lineno)

        if raw_outcome == CENSORED_OUTCOME:
            outcome = None
        else:
            try:
                outcome = int(raw_outcome)
            except ValueError:
                raise PanelFormatError(
                    f"outcome {raw_outcome!r} must be 1..{s} or {CENSORED_OUTCOME!r}", line=lineno
                )
            if not 1 <= outcome <= s:
                raise PanelFormatError(f"outcome {outcome} outside 1..{s}", line=lineno)

        try:
            count = int(raw_count)
        except ValueError:
            raise PanelFormatError(f"count {raw_count!r} is not an integer", line=lineno)
        if count < 0:
            raise PanelFormatError(f"count must be nonnegative, got {count}", line=lineno)

        key = (cohort, outcome)
        counts[key] = counts.get(key, 0) + count

    return AggregateTable(s=s, G=G, counts=counts)


def serialize_aggregate(table: AggregateTable, stream: io.TextIOBase) -> None:
    """Write a table in deterministic order: cohort asc, outcomes asc, cens last."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(AGGREGATE_HEADER)
    for (cohort, outcome), count in sorted(table.counts.items(), key=_sort_key):
        writer.writerow(
            [
                "" if cohort is None else cohort,
                CENSORED_OUTCOME if outcome is None else outcome,
                count,
            ]
        )


def parse_units(stream: io.TextIOBase, s: int, G: int) -> list[ObservedUnit]:
    """Parse unit-level records ``t,d,censored`` (censored rows may omit d)."""
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise PanelFormatError("empty input; expected header t,d,censored")
    if [h.strip() for h in header] != UNITS_HEADER:
        raise PanelFormatError(f"expected header {','.join(UNITS_HEADER)}, got {','.join(header)}", line=1)

    units = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 3:
            raise PanelFormatError(f"expected 3 fields, got {len(row)}", line=lineno)
        raw_t, raw_d, raw_censored = (cell.strip() for cell in row)

        try:
            t = int(raw_t)
        except ValueError:
            raise PanelFormatError(f"t {raw_t!r} is not an integer", line=lineno)
        if not 0 <= t <= G - 1:
            raise PanelFormatError(f"t {t} outside 0..{G - 1}", line=lineno)

        if raw_censored not in ("0", "1"):
            raise PanelFormatError(f"censored must be 0 or 1, got {raw_censored!r}", line=lineno)
        censored = raw_censored == "1"

        if censored:
            if raw_d == "":
                d = s
            else:
                try:
                    d = int(raw_d)
                except ValueError:
                    raise PanelFormatError(f"d {raw_d!r} is not an integer", line=lineno)
                if d != s:
                    raise PanelFormatError(f"censored unit must have d = s = {s} or empty, got {d}", line=lineno)
        else:
            try:
                d = int(raw_d)
            except ValueError:
                raise PanelFormatError(f"d {raw_d!r} is not an integer", line=lineno)
            if not 1 <= d <= s:
                raise PanelFormatError(f"uncensored d {d} outside 1..{s}", line=lineno)

        units.append(ObservedUnit(t_obs=t, d=d, censored=censored))
    return units


def to_sufficient_stats(table: AggregateTable) -> SufficientStats:
    """Collapse an aggregate table to sufficient statistics."""
    m_uncens = m_cens = duration_sum = 0
    for (_, outcome), count in table.counts.items():
        if outcome is None:
            m_cens += count
        else:
            m_uncens += count
            duration_sum += outcome * count
    return SufficientStats(
        m=m_uncens + m_cens,
        m_uncens=m_uncens,
        m_cens=m_cens,
        duration_sum=duration_sum,
        s=table.s,
    )
