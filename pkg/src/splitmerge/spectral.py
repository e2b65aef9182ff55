"""Exact spectral analysis of the discrete split-merge chain.

Characters of the symmetric group are computed with the Murnaghan-Nakayama
recursion on Young diagrams; they are the eigenfunctions of the DCF kernel,
with eigenvalue ``theta_lam = (sum lam_i^2 - sum lam'_j^2) / (n (n - 1))``.
"""
from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .chains import ExactDistribution, ewens_pmf, exact_kernel
from .partitions import (
    DEFAULT_EXACT_CAP,
    CylinderSet,
    conjugate,
    enumerate_partitions,
    scaled_cylinder_contains,
    _strip,
)


def _mn(lam: tuple, gam: tuple, memo: dict) -> int:
    # gam is nonincreasing; its largest remaining part is peeled first.
    if not gam:
        return 0 if lam else 1
    key = (lam, gam)
    hit = memo.get(key)
    if hit is not None:
        return hit
    h, rest = gam[0], gam[1:]
    lc = conjugate(lam)
    total = 0
    for i in range(1, len(lam) + 1):
        row = lam[i - 1]
        # hook lengths fall strictly along a row, so at most one match per row
        if row + lc[0] - i < h:
            break
        for j in range(1, row + 1):
            hook = row - j + lc[j - 1] - i + 1
            if hook == h:
                leg = lc[j - 1] - i
                sub = _mn(_strip(lam, i, j, lc[j - 1]), rest, memo)
                total += -sub if leg % 2 else sub
                break
            if hook < h:
                break
    memo[key] = total
    return total


def character(lam: Sequence[int], gamma: Sequence[int], memo: dict | None = None) -> int:
    """Irreducible character ``chi_lam`` evaluated on the class of cycle type ``gamma``."""
    lam, gamma = tuple(lam), tuple(sorted(gamma, reverse=True))
    if sum(lam) != sum(gamma):
        raise ValueError(f"size mismatch: |{lam}| != |{gamma}|")
    return _mn(lam, gamma, {} if memo is None else memo)


@dataclass
class CharacterTable:
    """Full table ``chi_lam(gamma)`` for all partitions of ``n``, rows and columns
    in canonical (reverse lexicographic) order."""

    n: int
    index: tuple = field(init=False)
    values: dict = field(init=False, repr=False)

    def __post_init__(self):
        self.index = tuple(enumerate_partitions(self.n))
        memo: dict = {}
        self.values = {
            (lam, gam): _mn(lam, gam, memo) for lam in self.index for gam in self.index
        }

    def __call__(self, lam, gamma) -> int:
        return self.values[(tuple(lam), tuple(gamma))]

    def row(self, lam) -> list:
        lam = tuple(lam)
        return [self.values[(lam, gam)] for gam in self.index]

    def matrix(self) -> list:
        return [self.row(lam) for lam in self.index]


@lru_cache(maxsize=16)
def character_table(n: int) -> CharacterTable:
    return CharacterTable(n)


def eigenvalue(lam: Sequence[int]) -> Fraction:
    """Eigenvalue of the DCF kernel on the character ``chi_lam``."""
    n = sum(lam)
    if n < 2:
        raise ValueError("eigenvalues are defined for n >= 2")
    sq = sum(p * p for p in lam)
    sq_conj = sum(p * p for p in conjugate(lam))
    return Fraction(sq - sq_conj, n * (n - 1))


@dataclass(frozen=True)
class Spectrum:
    n: int
    eigenvalues: dict


def spectrum(n: int, cap: int = DEFAULT_EXACT_CAP) -> Spectrum:
    return Spectrum(n, {lam: eigenvalue(lam) for lam in enumerate_partitions(n, cap)})


def _as_vector(f, index) -> list:
    if isinstance(f, Mapping):
        return [Fraction(f.get(lam, 0)) for lam in index]
    if callable(f):
        return [Fraction(f(lam)) for lam in index]
    vec = [Fraction(x) for x in f]
    if len(vec) != len(index):
        raise ValueError("vector length does not match the partition index")
    return vec


def inner_product(f, g, n: int) -> Fraction:
    """``<f, g> = sum_gamma f(gamma) g(gamma) pi_S(gamma)`` over partitions of ``n``.

    ``f`` and ``g`` may be callables on partitions, mappings keyed by
    partition tuples, or sequences in canonical order.
    """
    pi = ewens_pmf(n)
    fv, gv = _as_vector(f, pi.index), _as_vector(g, pi.index)
    return sum((a * b * w for a, b, w in zip(fv, gv, pi.weights)), Fraction(0))


def verify_eigenrelation(n: int, eigenvalues: Mapping | None = None) -> Fraction:
    """Largest ``|(K chi_lam)(gamma) - theta_lam chi_lam(gamma)|`` over all ``lam, gamma``."""
    K = exact_kernel(n)
    table = character_table(n)
    worst = Fraction(0)
    for lam in table.index:
        theta = eigenvalues[lam] if eigenvalues is not None else eigenvalue(lam)
        chi = table.row(lam)
        for kc, c in zip(K.apply(chi), chi):
            worst = max(worst, abs(kc - theta * c))
    return worst


@dataclass(frozen=True)
class SpectralTerm:
    lam: tuple
    theta: Fraction
    start_coef: Fraction  # <g0, chi_lam> = sum mu0(gamma) chi_lam(gamma)
    event_coef: Fraction  # <1_A, chi_lam>


def spectral_terms(mu0: ExactDistribution, subset: Iterable) -> list:
    """Character-expansion terms of ``P(X(k) in A)`` for ``X(0) ~ mu0``."""
    n = mu0.n
    pi = ewens_pmf(n)
    table = character_table(n)
    members = {tuple(g) for g in subset}
    in_a = [gam in members for gam in table.index]
    terms = []
    for lam in table.index:
        chi = table.row(lam)
        start = sum((m * c for m, c in zip(mu0.weights, chi) if m), Fraction(0))
        event = sum((w * c for w, c, a in zip(pi.weights, chi, in_a) if a), Fraction(0))
        terms.append(SpectralTerm(lam, eigenvalue(lam), start, event))
    return terms


def _evaluate(terms, k: int, skip_trivial: bool = False) -> Fraction:
    total = Fraction(0)
    for t in terms:
        if skip_trivial and len(t.lam) == 1:
            continue
        if t.start_coef and t.event_coef:
            total += t.theta ** k * t.start_coef * t.event_coef
    return total


def spectral_event_probability(mu0: ExactDistribution, subset: Iterable, k: int) -> Fraction:
    """Exact ``P(X(k) in A)`` from ``sum_lam theta^k <g0, chi><1_A, chi>``."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    return _evaluate(spectral_terms(mu0, subset), k)


def cylinder_event(cyl: CylinderSet, n: int) -> list:
    """Partitions of ``n`` lying in ``nC``."""
    return [g for g in enumerate_partitions(n) if scaled_cylinder_contains(cyl, g, n)]


def delta_c(mu0: ExactDistribution, cyl: CylinderSet, k: int) -> Fraction:
    """``P(X(k) in nC) - pi_S(nC)``: spectral event probability minus Ewens mass."""
    event = cylinder_event(cyl, mu0.n)
    return spectral_event_probability(mu0, event, k) - ewens_pmf(mu0.n).mass(event)


def delta_c_series(mu0: ExactDistribution, cyl: CylinderSet, k_max: int) -> list:
    """``[Delta(0), ..., Delta(k_max)]`` from the expansion without the trivial character."""
    terms = spectral_terms(mu0, cylinder_event(cyl, mu0.n))
    return [_evaluate(terms, k, skip_trivial=True) for k in range(k_max + 1)]


def hook_eigenvalue(i: int, n: int) -> Fraction:
    """Eigenvalue of the hook ``(i, 1, ..., 1)``: ``(2i - n - 1) / (n - 1)``."""
    return Fraction(2 * i - n - 1, n - 1)


def return_probability(n: int, k: int) -> Fraction:
    """``P(X(2k) = (n) | X(0) = (n))`` via the hook-eigenvalue sum.

    Only hooks have a nonzero character on the n-cycle (value +-1), so the
    return probability is ``(1/n) sum_i ((2i - n - 1)/(n - 1))^(2k)``.
    """
    if n < 2 or k < 1:
        raise ValueError("need n >= 2 and k >= 1")
    return sum((hook_eigenvalue(i, n) ** (2 * k) for i in range(1, n + 1)), Fraction(0)) / n


def return_constant(n_max: int = 50) -> tuple:
    """Minimum of ``k * P(X(2k) = (n))`` over ``2 <= n <= n_max``, ``1 <= k < n``.

    Returns ``(value, n, k)`` at the minimiser.
    """
    best = None
    for n in range(2, n_max + 1):
        for k in range(1, n):
            v = k * return_probability(n, k)
            if best is None or v < best[0]:
                best = (v, n, k)
    return best
