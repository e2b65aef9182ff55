"""Partition types and Young-diagram combinatorics.

Two families of partitions live here:

* ``ContinuousPartition``: a finite, nonincreasing list of masses in (0, 1]
  plus an explicit ``dust`` remainder left over by truncated samplers.
* ``IntegerPartition``: a nonincreasing tuple of positive integers, doubling
  as a conjugacy class of the symmetric group.

Cells of Young diagrams are 1-based ``(row, col)`` pairs, matching the usual
``(i, j)`` notation.
"""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import accumulate
from typing import Iterable, NamedTuple, Sequence

MASS_TOL = 1e-12
DEFAULT_EXACT_CAP = 30


class CapacityError(ValueError):
    """Raised when an exact-mode computation is requested above the size cap."""


def sort_descending(values: Iterable[float]) -> tuple:
    """Nonincreasing rearrangement of ``values`` with zeros dropped.

    Ties keep their encounter order (the sort is stable).
    """
    vals = [v for v in values if v != 0]
    if any(v < 0 for v in vals):
        raise ValueError("values must be nonnegative")
    return tuple(sorted(vals, key=lambda v: -v))


@dataclass(frozen=True)
class ContinuousPartition:
    """Finite point of the space of ordered partitions of [0, 1].

    ``parts`` are strictly positive and nonincreasing; ``dust`` is the mass
    below the sampler's truncation threshold that is not represented part by
    part.  ``sum(parts) + dust == 1`` up to ``MASS_TOL``.
    """

    parts: tuple = ()
    dust: float = 0.0
    tol: float = field(default=MASS_TOL, repr=False, compare=False)

    def __post_init__(self):
        parts = tuple(float(p) for p in self.parts)
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "dust", float(self.dust))
        if any(p <= 0.0 or p > 1.0 for p in parts):
            raise ValueError("parts must lie in (0, 1]")
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise ValueError("parts must be nonincreasing")
        if self.dust < 0.0:
            raise ValueError("dust must be nonnegative")
        total = math.fsum(parts) + self.dust
        if abs(total - 1.0) > self.tol:
            raise ValueError(f"masses sum to {total!r}, not 1")

    @classmethod
    def from_masses(cls, masses: Iterable[float], dust: float = 0.0, tol: float = MASS_TOL):
        """Build from unsorted masses; zeros are dropped."""
        return cls(sort_descending(masses), dust, tol)

    def __len__(self):
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def __getitem__(self, i):
        return self.parts[i]

    def part(self, i: int) -> float:
        """1-based coordinate ``x_i``; zero past the stored parts."""
        return self.parts[i - 1] if 1 <= i <= len(self.parts) else 0.0

    @cached_property
    def cumulative(self) -> tuple:
        return tuple(accumulate(self.parts))

    def to_json(self) -> str:
        return json.dumps({"parts": list(self.parts), "dust": self.dust})


class IntegerPartition(tuple):
    """Nonincreasing tuple of positive integers.

    Compares and hashes like the underlying tuple, so ``IntegerPartition((2, 1))
    == (2, 1)``.  The empty partition (of 0) is allowed.
    """

    __slots__ = ()

    def __new__(cls, parts: Iterable[int] = ()):
        parts = tuple(int(p) for p in parts)
        if any(p < 1 for p in parts):
            raise ValueError(f"parts must be positive integers: {parts}")
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise ValueError(f"parts must be nonincreasing: {parts}")
        return super().__new__(cls, parts)

    @classmethod
    def from_parts(cls, parts: Iterable[int]) -> "IntegerPartition":
        """Sort (descending) and drop zeros before validating."""
        return cls(sort_descending(int(p) for p in parts))

    @classmethod
    def parse(cls, text: str) -> "IntegerPartition":
        """Parse ``"4,4"``, ``"(4, 4)"`` or ``"[4,4]"``."""
        body = text.strip().strip("()[]")
        if not body:
            return cls(())
        return cls.from_parts(int(t) for t in body.split(","))

    @property
    def n(self) -> int:
        return sum(self)

    @property
    def length(self) -> int:
        """Number of parts."""
        return len(self)

    def __repr__(self):
        return f"IntegerPartition({tuple(self)!r})"

    def __str__(self):
        return "(" + ",".join(map(str, self)) + ")"

    def to_json(self) -> str:
        return json.dumps(list(self))


@dataclass(frozen=True)
class PartitionType:
    """Multiplicities ``counts[k]`` of each part size ``k`` and the number of parts."""

    counts: dict
    total_parts: int


def type_counts(ell: Sequence[int]) -> PartitionType:
    counts = dict(Counter(ell))
    return PartitionType(counts, len(ell))


def conjugate(lam: Sequence[int]) -> IntegerPartition:
    """Transpose of the Young diagram: ``lam'_j = #{i : lam_i >= j}``."""
    if not lam:
        return IntegerPartition(())
    return IntegerPartition(sum(1 for p in lam if p >= j) for j in range(1, lam[0] + 1))


def diagonal_length(lam: Sequence[int]) -> int:
    """Largest ``i`` with ``lam_i >= i`` (0 for the empty partition)."""
    b = 0
    for i, p in enumerate(lam, start=1):
        if p >= i:
            b = i
        else:
            break
    return b


class Cell(NamedTuple):
    row: int
    col: int


def _check_cell(lam: Sequence[int], cell) -> Cell:
    i, j = cell
    if not (1 <= i <= len(lam) and 1 <= j <= lam[i - 1]):
        raise ValueError(f"cell {(i, j)} is not in the diagram of {tuple(lam)}")
    return Cell(i, j)


def hook_length(lam: Sequence[int], cell, lam_conj: Sequence[int] | None = None) -> int:
    i, j = _check_cell(lam, cell)
    lc = conjugate(lam) if lam_conj is None else lam_conj
    return lam[i - 1] - j + lc[j - 1] - i + 1


def rim_segment(lam: Sequence[int], cell) -> frozenset:
    """Cells of the rim segment straddled by ``cell``.

    ``{(u, v) : i <= u <= lam'_j, max(j, lam_{u+1}) <= v <= lam_u}``.
    """
    i, j = _check_cell(lam, cell)
    bottom = conjugate(lam)[j - 1]
    cells = []
    for u in range(i, bottom + 1):
        nxt = lam[u] if u < len(lam) else 0
        cells.extend(Cell(u, v) for v in range(max(j, nxt), lam[u - 1] + 1))
    return frozenset(cells)


def _strip(lam: tuple, i: int, j: int, bottom: int) -> tuple:
    # Row u in [i, bottom] is cut back to max(j, lam_{u+1}) - 1.
    out = list(lam)
    for u in range(i, bottom + 1):
        nxt = lam[u] if u < len(lam) else 0
        out[u - 1] = max(j, nxt) - 1
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def strip_rim(lam: Sequence[int], cell) -> IntegerPartition:
    """Partition left after removing the rim segment straddled by ``cell``."""
    i, j = _check_cell(lam, cell)
    bottom = conjugate(lam)[j - 1]
    return IntegerPartition(_strip(tuple(lam), i, j, bottom))


def remove_part(gamma: Sequence[int], r: int) -> IntegerPartition:
    """Drop the ``r``-th part (1-based)."""
    if not 1 <= r <= len(gamma):
        raise ValueError(f"part index {r} out of range for {tuple(gamma)}")
    return IntegerPartition(tuple(gamma[: r - 1]) + tuple(gamma[r:]))


def _partitions_revlex(n: int, largest: int):
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in _partitions_revlex(n - first, first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _enumerate(n: int) -> tuple:
    return tuple(IntegerPartition(p) for p in _partitions_revlex(n, n))


def enumerate_partitions(n: int, cap: int = DEFAULT_EXACT_CAP) -> list:
    """All partitions of ``n`` in reverse lexicographic order, ``(n)`` first."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    if n > cap:
        raise CapacityError(f"n={n} exceeds the exact-mode cap of {cap}")
    return list(_enumerate(n))


@lru_cache(maxsize=None)
def partition_count(n: int) -> int:
    """p(n) by Euler's pentagonal-number recurrence."""
    if n < 0:
        return 0
    if n == 0:
        return 1
    total = 0
    k = 1
    while True:
        g1 = k * (3 * k - 1) // 2
        if g1 > n:
            break
        sign = 1 if k % 2 else -1
        total += sign * partition_count(n - g1)
        g2 = k * (3 * k + 1) // 2
        if g2 <= n:
            total += sign * partition_count(n - g2)
        k += 1
    return total


@dataclass(frozen=True)
class CylinderSet:
    """Open cylinder ``{x : a_i < x_i < b_i, i = 1..k}`` with ``(a, b)`` in ``I_k``.

    ``I_k`` requires ``0 < a_i < b_i < 1``, ``sum(b) < 1`` and
    ``a_k > 1 - sum(a)``; the last condition forces the tail mass below the
    k-th coordinate.
    """

    a: tuple
    b: tuple

    def __post_init__(self):
        a = tuple(float(x) for x in self.a)
        b = tuple(float(x) for x in self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if not a or len(a) != len(b):
            raise ValueError("a and b must be nonempty and of equal length")
        if not all(0.0 < ai < bi < 1.0 for ai, bi in zip(a, b)):
            raise ValueError("need 0 < a_i < b_i < 1")
        if not sum(b) < 1.0:
            raise ValueError("need sum(b) < 1")
        if not a[-1] > 1.0 - sum(a):
            raise ValueError("need a_k > 1 - sum(a)")

    @property
    def k(self) -> int:
        return len(self.a)

    @classmethod
    def parse(cls, text: str) -> "CylinderSet":
        """Parse ``"a1,b1;a2,b2;..."``."""
        a, b = [], []
        for chunk in text.split(";"):
            if not chunk.strip():
                continue
            lo, hi = chunk.split(",")
            a.append(float(lo))
            b.append(float(hi))
        return cls(tuple(a), tuple(b))

    def to_json(self) -> str:
        return json.dumps({"a": list(self.a), "b": list(self.b)})

    @classmethod
    def from_json(cls, text: str) -> "CylinderSet":
        obj = json.loads(text)
        return cls(tuple(obj["a"]), tuple(obj["b"]))


def cylinder_contains(cyl: CylinderSet, x) -> bool:
    """Strict membership ``x_i in (a_i, b_i)`` for the first k coordinates.

    ``x`` may be a ``ContinuousPartition`` or any nonincreasing sequence;
    missing coordinates count as 0.
    """
    parts = x.parts if isinstance(x, ContinuousPartition) else tuple(x)
    for i, (lo, hi) in enumerate(zip(cyl.a, cyl.b)):
        xi = parts[i] if i < len(parts) else 0.0
        if not lo < xi < hi:
            return False
    return True


def cylinder_delta(cyl: CylinderSet) -> float:
    return min(1.0 - sum(cyl.b), cyl.a[-1] - (1.0 - sum(cyl.a)))


def scaled_cylinder_contains(cyl: CylinderSet, gamma: Sequence[int], n: int | None = None) -> bool:
    """Whether ``gamma / n`` lies in the cylinder, i.e. ``gamma`` is in ``nC``."""
    n = sum(gamma) if n is None else n
    for i, (lo, hi) in enumerate(zip(cyl.a, cyl.b)):
        gi = gamma[i] if i < len(gamma) else 0
        if not n * lo < gi < n * hi:
            return False
    return True
