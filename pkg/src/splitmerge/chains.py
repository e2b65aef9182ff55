"""Split-merge chains on continuous and integer partitions.

Monte Carlo steps work in floats; the exact kernel, Ewens law and k-step
laws work in ``fractions.Fraction`` so that stochasticity, reversibility and
stationarity can be checked to exact zero.
"""
from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from .partitions import (
    DEFAULT_EXACT_CAP,
    ContinuousPartition,
    IntegerPartition,
    enumerate_partitions,
    type_counts,
)
from .samplers import RngStream


class KernelConsistencyError(RuntimeError):
    """Raised when a kernel row built from the split/merge rates does not sum to 1."""


# ---------------------------------------------------------------------------
# Continuous chain


def _pick_desc(parts_asc: list, rand) -> int:
    # Size-biased index into an ascending list, scanning largest-first;
    # a draw landing in the dust is redrawn.
    while True:
        u = rand()
        acc = 0.0
        for idx in range(len(parts_asc) - 1, -1, -1):
            acc += parts_asc[idx]
            if u < acc:
                return idx


def ccf_move(parts_asc: list, rand) -> bool:
    """Apply one CCF transition in place to an ascending list of masses.

    Returns True for a split, False for a merge.
    """
    i = _pick_desc(parts_asc, rand)
    j = _pick_desc(parts_asc, rand)
    if i == j:
        p = parts_asc.pop(i)
        left = rand() * p
        right = p - left
        for piece in (left, right):
            if piece > 0.0:
                _insort(parts_asc, piece)
        return True
    merged = parts_asc[i] + parts_asc[j]
    for idx in sorted((i, j), reverse=True):
        del parts_asc[idx]
    _insort(parts_asc, merged)
    return False


def _insort(asc: list, x: float) -> None:
    lo, hi = 0, len(asc)
    while lo < hi:
        mid = (lo + hi) // 2
        if asc[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    asc.insert(lo, x)


def ccf_step(p: ContinuousPartition, rng: RngStream) -> ContinuousPartition:
    """One continuous coagulation-fragmentation step.

    Two independent size-biased picks (with replacement): the same part twice
    splits it at an independent uniform fraction, two different parts merge.
    Dust is never picked.
    """
    asc = list(reversed(p.parts))
    ccf_move(asc, rng.gen.random)
    return ContinuousPartition(tuple(reversed(asc)), p.dust, tol=max(p.tol, 1e-9))


def run_ccf(p: ContinuousPartition, steps: int, rng: RngStream, observe: Callable | None = None):
    """Run ``steps`` CCF transitions from ``p``.

    ``observe(k, parts_asc)`` is called after every step when given; its
    return values are collected.  Returns ``(final_partition, observations)``.
    """
    asc = list(reversed(p.parts))
    rand = rng.gen.random
    out = []
    for k in range(1, steps + 1):
        ccf_move(asc, rand)
        if observe is not None:
            out.append(observe(k, asc))
    final = ContinuousPartition(tuple(reversed(asc)), p.dust, tol=1e-9)
    return final, out


# ---------------------------------------------------------------------------
# Discrete chain


def dcf_step(ell: Sequence[int], rng: RngStream) -> IntegerPartition:
    """One DCF step: a uniform random transposition acting on a cycle type.

    Two distinct atoms of ``{1..n}`` are drawn; atoms in different blocks merge
    the blocks, atoms in the same block of size ``s`` split it into its ``k``
    smallest and ``s - k`` remaining elements with ``k`` uniform on ``1..s-1``.
    """
    n = sum(ell)
    if n < 2:
        raise ValueError("DCF needs n >= 2")
    gen = rng.gen
    x = int(gen.integers(0, n))
    y = int(gen.integers(0, n - 1))
    if y >= x:
        y += 1
    bx = by = -1
    acc = 0
    for b, size in enumerate(ell):
        acc += size
        if bx < 0 and x < acc:
            bx = b
        if by < 0 and y < acc:
            by = b
        if bx >= 0 and by >= 0:
            break
    parts = list(ell)
    if bx != by:
        merged = parts[bx] + parts[by]
        for b in sorted((bx, by), reverse=True):
            del parts[b]
        parts.append(merged)
    else:
        s = parts.pop(bx)
        k = int(gen.integers(1, s))
        parts.extend((k, s - k))
    return IntegerPartition.from_parts(parts)


# ---------------------------------------------------------------------------
# Exact objects


@dataclass(frozen=True)
class ExactDistribution:
    """Rational probability vector over the canonical order of partitions of n."""

    n: int
    index: tuple
    weights: tuple

    def __post_init__(self):
        w = tuple(Fraction(x) for x in self.weights)
        object.__setattr__(self, "weights", w)
        if len(w) != len(self.index):
            raise ValueError("weights and index differ in length")
        if any(x < 0 for x in w):
            raise ValueError("weights must be nonnegative")
        if sum(w) != 1:
            raise ValueError(f"weights sum to {sum(w)}, not 1")

    @cached_property
    def position(self) -> dict:
        return {lam: i for i, lam in enumerate(self.index)}

    def __getitem__(self, ell) -> Fraction:
        return self.weights[self.position[tuple(ell)]]

    def mass(self, subset: Iterable) -> Fraction:
        return sum((self[ell] for ell in set(map(tuple, subset))), Fraction(0))

    @classmethod
    def point_mass(cls, ell: Sequence[int], cap: int = DEFAULT_EXACT_CAP) -> "ExactDistribution":
        n = sum(ell)
        index = tuple(enumerate_partitions(n, cap))
        target = tuple(ell)
        return cls(n, index, tuple(int(lam == target) for lam in index))

    @classmethod
    def from_mapping(cls, n: int, weights: dict, cap: int = DEFAULT_EXACT_CAP) -> "ExactDistribution":
        index = tuple(enumerate_partitions(n, cap))
        return cls(n, index, tuple(Fraction(weights.get(lam, 0)) for lam in index))

    def as_float(self) -> np.ndarray:
        return np.array([float(w) for w in self.weights])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["partition", "probability_num", "probability_den"])
        for lam, p in zip(self.index, self.weights):
            w.writerow([json.dumps(list(lam)), p.numerator, p.denominator])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({
            "n": self.n,
            "distribution": [
                {"partition": list(lam), "probability": f"{p.numerator}/{p.denominator}"}
                for lam, p in zip(self.index, self.weights)
            ],
        })


@dataclass(frozen=True)
class ExactKernel:
    """Sparse rational transition matrix; ``rows[i]`` maps column index to probability."""

    n: int
    index: tuple
    rows: tuple

    @cached_property
    def position(self) -> dict:
        return {lam: i for i, lam in enumerate(self.index)}

    def __len__(self):
        return len(self.index)

    def entry(self, ell, ell2) -> Fraction:
        i, j = self.position[tuple(ell)], self.position[tuple(ell2)]
        return self.rows[i].get(j, Fraction(0))

    def row(self, ell) -> dict:
        """Nonzero entries of the row of ``ell`` keyed by target partition."""
        r = self.rows[self.position[tuple(ell)]]
        return {self.index[j]: p for j, p in r.items()}

    def dense(self) -> list:
        size = len(self.index)
        out = [[Fraction(0)] * size for _ in range(size)]
        for i, r in enumerate(self.rows):
            for j, p in r.items():
                out[i][j] = p
        return out

    def as_float(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.dense()])

    def apply(self, f: Sequence) -> list:
        """``(K f)(ell) = sum_ell' K(ell, ell') f(ell')`` for ``f`` indexed canonically."""
        return [sum((p * f[j] for j, p in r.items()), Fraction(0)) for r in self.rows]

    def with_entry(self, ell, ell2, value) -> "ExactKernel":
        """Copy with one entry replaced (no renormalisation)."""
        i, j = self.position[tuple(ell)], self.position[tuple(ell2)]
        rows = list(self.rows)
        rows[i] = dict(rows[i])
        rows[i][j] = Fraction(value)
        return ExactKernel(self.n, self.index, tuple(rows))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["from", "to", "probability_num", "probability_den"])
        for i, r in enumerate(self.rows):
            for j in sorted(r):
                p = r[j]
                w.writerow([json.dumps(list(self.index[i])), json.dumps(list(self.index[j])),
                            p.numerator, p.denominator])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({
            "n": self.n,
            "index": [list(lam) for lam in self.index],
            "entries": [
                {"from": i, "to": j, "probability": f"{p.numerator}/{p.denominator}"}
                for i, r in enumerate(self.rows) for j, p in sorted(r.items())
            ],
        })


def _moves(ell: tuple, n: int):
    """Yield ``(target, probability)`` for every split and merge out of ``ell``."""
    counts = type_counts(ell).counts
    denom = n * (n - 1)
    sizes = sorted(counts)

    def replace(remove, add):
        c = Counter(ell)
        c.subtract(remove)
        c.update(add)
        return tuple(sorted(c.elements(), reverse=True))

    for a, j in enumerate(sizes):
        nj = counts[j]
        if nj >= 2:
            yield replace((j, j), (2 * j,)), Fraction(j * j * nj * (nj - 1), denom)
        for k in sizes[a + 1:]:
            yield replace((j, k), (j + k,)), Fraction(2 * j * k * nj * counts[k], denom)
    for s in sizes:
        ns = counts[s]
        for j in range(1, s // 2 + 1):
            k = s - j
            rate = s * ns if j == k else 2 * s * ns
            yield replace((s,), (j, k)), Fraction(rate, denom)


@lru_cache(maxsize=32)
def exact_kernel(n: int, cap: int = DEFAULT_EXACT_CAP) -> ExactKernel:
    """Exact transition matrix of DCF on partitions of ``n``.

    Off-diagonal entries come from the split and merge rates; the diagonal is
    the residual row mass, which must vanish (every step moves to a different
    cycle type).  A nonzero residual raises ``KernelConsistencyError``.
    """
    if n < 2:
        raise ValueError("DCF needs n >= 2")
    index = tuple(enumerate_partitions(n, cap))
    pos = {lam: i for i, lam in enumerate(index)}
    rows = []
    for i, lam in enumerate(index):
        row: dict = {}
        for target, p in _moves(lam, n):
            j = pos[target]
            row[j] = row.get(j, Fraction(0)) + p
        residual = 1 - sum(row.values())
        if residual != 0 or i in row:
            raise KernelConsistencyError(f"row {lam} has residual mass {residual}")
        rows.append(row)
    return ExactKernel(n, index, tuple(rows))


def ewens_weight(ell: Sequence[int]) -> Fraction:
    """``1 / prod_k k^{N(k)} N(k)!`` for the cycle type ``ell``."""
    den = 1
    for k, m in type_counts(ell).counts.items():
        den *= k ** m * math.factorial(m)
    return Fraction(1, den)


@lru_cache(maxsize=32)
def ewens_pmf(n: int, cap: int = DEFAULT_EXACT_CAP) -> ExactDistribution:
    index = tuple(enumerate_partitions(n, cap))
    return ExactDistribution(n, index, tuple(ewens_weight(lam) for lam in index))


def _check_shared(mu: ExactDistribution, K: ExactKernel):
    if mu.n != K.n or mu.index != K.index:
        raise ValueError("distribution and kernel live on different index sets")


def evolve(mu0: ExactDistribution, K: ExactKernel, k_max: int) -> list:
    """Exact laws ``mu0 K^k`` for ``k = 0..k_max``."""
    _check_shared(mu0, K)
    laws = [mu0]
    v = list(mu0.weights)
    for _ in range(k_max):
        nxt = [Fraction(0)] * len(v)
        for i, w in enumerate(v):
            if w:
                for j, p in K.rows[i].items():
                    nxt[j] += w * p
        v = nxt
        laws.append(ExactDistribution(mu0.n, mu0.index, tuple(v)))
    return laws


def k_step_distribution(mu0: ExactDistribution, K: ExactKernel, k: int) -> ExactDistribution:
    if k < 0:
        raise ValueError("k must be nonnegative")
    return evolve(mu0, K, k)[-1]


def check_detailed_balance(K: ExactKernel, pi: ExactDistribution | None = None) -> Fraction:
    """Largest ``|K(l, l') pi(l) - K(l', l) pi(l')|`` over all pairs (exact)."""
    pi = ewens_pmf(K.n) if pi is None else pi
    w = pi.weights
    zero = Fraction(0)
    pairs = {(i, j) for i, r in enumerate(K.rows) for j in r}
    pairs |= {(j, i) for i, j in pairs}
    worst = zero
    for i, j in pairs:
        v = abs(K.rows[i].get(j, zero) * w[i] - K.rows[j].get(i, zero) * w[j])
        if v > worst:
            worst = v
    return worst


def stationarity_violation(K: ExactKernel, pi: ExactDistribution | None = None) -> Fraction:
    """Largest coordinate of ``|pi K - pi|`` (exact)."""
    pi = ewens_pmf(K.n) if pi is None else pi
    nxt = evolve(pi, K, 1)[1]
    return max(abs(a - b) for a, b in zip(nxt.weights, pi.weights))


def empirical_distribution(step_fn, ell0: Sequence[int], k: int, replicas: int, rng: RngStream,
                           cap: int = DEFAULT_EXACT_CAP) -> np.ndarray:
    """Monte Carlo frequencies of the ``k``-step state over the canonical index."""
    n = sum(ell0)
    index = enumerate_partitions(n, cap)
    pos = {lam: i for i, lam in enumerate(index)}
    counts = np.zeros(len(index), dtype=np.int64)
    start = IntegerPartition(ell0)
    for _ in range(replicas):
        state = start
        for _ in range(k):
            state = step_fn(state, rng)
        counts[pos[tuple(state)]] += 1
    return counts / replicas
