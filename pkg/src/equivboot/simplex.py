"""Probability vectors, count vectors and the norm enumeration."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    DimensionTooSmall,
    InvalidCounts,
    NegativeEntry,
    SumNotOne,
)

SUM_TOL = 1e-12


class NormKind(enum.Enum):
    L1 = "l1"
    LINF = "linf"
    L2 = "l2"

    @classmethod
    def parse(cls, value: "str | NormKind") -> "NormKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("∞", "inf")
        aliases = {"l1": cls.L1, "linf": cls.LINF, "inf": cls.LINF, "max": cls.LINF, "l2": cls.L2}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown norm {value!r}; expected one of l1, linf, l2") from None

    def __str__(self) -> str:
        return self.value


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ProbVector:
    """A point of the probability simplex.

    Inputs whose sum is within 1e-12 of one are divided by their sum, so
    ``entries`` always sums to one up to a single rounding step.
    """

    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=float).ravel()
        if arr.size < 2:
            raise DimensionTooSmall(f"probability vector needs k >= 2 entries, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise SumNotOne("probability vector has non-finite entries")
        if np.any(arr < 0):
            i = int(np.argmax(arr < 0))
            raise NegativeEntry(f"entry {i} is negative ({arr[i]!r})")
        total = float(arr.sum())
        if abs(total - 1.0) > SUM_TOL:
            raise SumNotOne(f"entries sum to {total!r}, not 1 (tolerance {SUM_TOL:g})")
        object.__setattr__(self, "entries", _frozen(arr / total))

    @property
    def k(self) -> int:
        return self.entries.size

    def __len__(self) -> int:
        return self.entries.size

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __iter__(self):
        return iter(self.entries.tolist())

    def __eq__(self, other):
        if not isinstance(other, ProbVector):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    def __repr__(self) -> str:
        return f"ProbVector({self.entries.tolist()})"


@dataclass(frozen=True, eq=False)
class CountVector:
    """Observed multinomial counts; ``total`` is the number of trials."""

    counts: np.ndarray
    total: int = field(init=False)

    def __post_init__(self):
        raw = np.asarray(self.counts)
        if raw.ndim != 1:
            raw = raw.ravel()
        if raw.size < 2:
            raise DimensionTooSmall(f"count vector needs k >= 2 entries, got {raw.size}")
        if raw.dtype.kind == "f":
            if not np.all(np.isfinite(raw)) or np.any(raw != np.round(raw)):
                raise InvalidCounts("counts must be integers")
        elif raw.dtype.kind not in "iub":
            raise InvalidCounts("counts must be integers")
        arr = raw.astype(np.int64)
        if np.any(arr < 0):
            raise InvalidCounts("counts must be nonnegative")
        total = int(arr.sum())
        if total < 1:
            raise InvalidCounts("counts must contain at least one trial")
        object.__setattr__(self, "counts", _frozen(arr))
        object.__setattr__(self, "total", total)

    @property
    def k(self) -> int:
        return self.counts.size

    def __len__(self) -> int:
        return self.counts.size

    def __array__(self, dtype=None, copy=None):
        return self.counts if dtype is None else self.counts.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, CountVector):
            return NotImplemented
        return np.array_equal(self.counts, other.counts)

    def __repr__(self) -> str:
        return f"CountVector({self.counts.tolist()})"


def validate_prob(entries) -> ProbVector:
    if isinstance(entries, ProbVector):
        return entries
    return ProbVector(entries)


def as_counts(counts) -> CountVector:
    if isinstance(counts, CountVector):
        return counts
    return CountVector(counts)


def theta(p, q) -> np.ndarray:
    """Componentwise difference ``p - q``."""
    a = np.asarray(p, dtype=float)
    b = np.asarray(q, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"dimensions differ: {a.size} vs {b.size}")
    return a - b
