"""Independent brute-force oracles used by the tests.

Nothing here imports the package: every quantity is recomputed from
permutations or point evaluations.
"""
import itertools
import math
from collections import Counter
from fractions import Fraction


def cycle_type(perm) -> tuple:
    seen = [False] * len(perm)
    sizes = []
    for start in range(len(perm)):
        if seen[start]:
            continue
        size, x = 0, start
        while not seen[x]:
            seen[x] = True
            x = perm[x]
            size += 1
        sizes.append(size)
    return tuple(sorted(sizes, reverse=True))


def representative(gamma) -> list:
    """A permutation of cycle type ``gamma`` (consecutive cycles)."""
    perm, start = [], 0
    for size in gamma:
        perm.extend(start + (k + 1) % size for k in range(size))
        start += size
    return perm


def class_distribution(n: int) -> dict:
    """Exact law of the cycle type of a uniform permutation, by enumeration."""
    counts = Counter(cycle_type(p) for p in itertools.permutations(range(n)))
    total = math.factorial(n)
    return {g: Fraction(c, total) for g, c in counts.items()}


def transposition_row(gamma) -> dict:
    """Law of the cycle type of ``sigma * t`` for a uniform transposition ``t``."""
    sigma = representative(gamma)
    n = len(sigma)
    out = Counter()
    for i, j in itertools.combinations(range(n), 2):
        tau = list(range(n))
        tau[i], tau[j] = j, i
        out[cycle_type([sigma[tau[x]] for x in range(n)])] += 1
    total = n * (n - 1) // 2
    return {g: Fraction(c, total) for g, c in out.items()}


def all_partitions(n: int) -> set:
    return {cycle_type(p) for p in itertools.permutations(range(n))}


def hook_dimension(lam) -> int:
    """``n! / prod hooks`` (hook-length formula)."""
    conj = [sum(1 for p in lam if p > j) for j in range(lam[0])] if lam else []
    prod = 1
    for i, row in enumerate(lam):
        for j in range(row):
            prod *= row - j + conj[j] - i - 1
    return math.factorial(sum(lam)) // prod


def discrepancy_by_points(bounds, labels, d, n) -> float:
    """``Leb{x : c(x) != d(atom(x))}`` by merging all breakpoints and testing midpoints."""
    pts = sorted(set(float(b) for b in bounds) | {float(m) for m in range(n + 1)})
    total = 0.0
    for lo, hi in zip(pts, pts[1:]):
        mid = (lo + hi) / 2
        k = max(i for i in range(len(labels)) if bounds[i] <= mid)
        if labels[k] != d[int(math.floor(mid))]:
            total += hi - lo
    return total
