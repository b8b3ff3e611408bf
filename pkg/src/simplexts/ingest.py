"""Loading abundance tables and turning them into compositions.

Input is a wide CSV: a header row, one row per time point, a time column
(integers such as years, or ISO dates) and one column per species.
"""

from __future__ import annotations

import csv
import datetime as _dt
import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np

DEFAULT_EPSILON = 0.5


class IngestError(ValueError):
    """Base class for all data-loading problems."""


class EmptyDataError(IngestError):
    pass


class MissingColumnError(IngestError):
    pass


class UnparseableCellError(IngestError):
    pass


class NegativeValueError(IngestError):
    pass


class UnorderedTimesError(IngestError):
    pass


class DuplicateTimeError(IngestError):
    pass


class ZeroCountError(IngestError):
    pass


class UnknownSpeciesError(IngestError, KeyError):
    def __str__(self):  # KeyError would quote the message
        return str(self.args[0])


@dataclass(frozen=True)
class AbundanceTable:
    times: tuple
    species: tuple[str, ...]
    counts: np.ndarray

    def __post_init__(self):
        counts = np.array(self.counts, dtype=float)
        if counts.ndim != 2 or counts.shape != (len(self.times), len(self.species)):
            raise ValueError("counts must be (len(times), len(species))")
        if np.any(counts < 0):
            raise NegativeValueError("counts must be non-negative")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "times", tuple(self.times))
        object.__setattr__(self, "species", tuple(self.species))

    @property
    def n(self) -> int:
        return self.counts.shape[0]

    @property
    def d(self) -> int:
        return self.counts.shape[1]


def _parse_time(text: str, row: int):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return _dt.date.fromisoformat(text)
    except ValueError:
        raise UnparseableCellError(f"row {row}: time value {text!r} is neither an integer nor an ISO date") from None


def load_csv(path, time_column: str, species_columns=None) -> AbundanceTable:
    """Read a wide-format abundance CSV.

    ``species_columns`` defaults to every column except ``time_column``.
    Row numbers in error messages count the header as row 1.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyDataError(f"{path}: no data rows")
        header = [h.strip() for h in header]
        if species_columns is None:
            species_columns = [h for h in header if h != time_column]
        wanted = [time_column, *species_columns]
        missing = [c for c in wanted if c not in header]
        if missing:
            raise MissingColumnError(f"{path}: missing column(s) {', '.join(missing)}")
        idx = [header.index(c) for c in species_columns]
        t_idx = header.index(time_column)
        times, rows = [], []
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) < len(header):
                raise UnparseableCellError(f"{path}: row {lineno} has {len(rec)} fields, expected {len(header)}")
            times.append(_parse_time(rec[t_idx], lineno))
            vals = []
            for col, k in zip(species_columns, idx):
                cell = rec[k].strip()
                try:
                    v = float(cell)
                except ValueError:
                    raise UnparseableCellError(f"{path}: row {lineno}, column {col!r}: {cell!r} is not a number") from None
                if not np.isfinite(v):
                    raise UnparseableCellError(f"{path}: row {lineno}, column {col!r}: {cell!r} is not finite")
                if v < 0:
                    raise NegativeValueError(f"{path}: row {lineno}, column {col!r}: negative value {cell}")
                vals.append(v)
            rows.append(vals)
    if not rows:
        raise EmptyDataError(f"{path}: no data rows")
    kinds = {type(t) for t in times}
    if len(kinds) > 1:
        raise UnparseableCellError(f"{path}: time column mixes integers and dates")
    for a, b in zip(times, times[1:]):
        if a == b:
            raise DuplicateTimeError(f"{path}: duplicate time {a}")
        if b < a:
            raise UnorderedTimesError(f"{path}: time {b} follows {a}")
    return AbundanceTable(times, species_columns, np.array(rows))


class ZeroStrategy(str, enum.Enum):
    REJECT = "reject"
    ADDITIVE_EPSILON = "additive_epsilon"


def to_compositions(table: AbundanceTable, zero_strategy: ZeroStrategy | str = ZeroStrategy.REJECT,
                    epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
    """Row-normalize counts into an ``(n, d)`` array of compositions.

    With ``additive_epsilon``, ``epsilon`` is added to every cell of the
    table when any zero is present, so all rows share one correction.
    """
    zero_strategy = ZeroStrategy(zero_strategy)
    counts = np.array(table.counts, dtype=float)
    totals = counts.sum(axis=1)
    bad = np.flatnonzero(totals <= 0)
    if bad.size:
        raise ZeroCountError(f"time {table.times[bad[0]]}: row total is zero")
    if np.any(counts == 0):
        if zero_strategy is ZeroStrategy.REJECT:
            r, c = np.argwhere(counts == 0)[0]
            raise ZeroCountError(
                f"time {table.times[r]}, species {table.species[c]!r}: zero count "
                "(use the additive_epsilon zero strategy to replace zeros)"
            )
        if not epsilon > 0:
            raise ValueError("epsilon must be positive")
        counts = counts + epsilon
    return counts / counts.sum(axis=1, keepdims=True)


def select_reference(table: AbundanceTable, species_name: str) -> AbundanceTable:
    """Swap ``species_name`` with the last column, making it the reference coordinate."""
    if species_name not in table.species:
        raise UnknownSpeciesError(
            f"unknown species {species_name!r}; available: {', '.join(table.species)}"
        )
    k = table.species.index(species_name)
    order = list(range(table.d))
    order[k], order[-1] = order[-1], order[k]
    return AbundanceTable(table.times, [table.species[i] for i in order], table.counts[:, order])
