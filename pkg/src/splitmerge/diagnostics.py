"""Statistical functionals of partitions and convergence diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .chains import ExactDistribution, ccf_move
from .partitions import ContinuousPartition
from .samplers import DEFAULT_EPS_TRUNC, RngStream, sample_gem


@dataclass(frozen=True)
class MomentReport:
    alpha: float
    sample_mean: float
    std_error: float
    replicas: int
    dust_term: float = 0.0  # mean of dust**alpha, the dust's contribution as a single block

    def __post_init__(self):
        if self.std_error < 0 or self.replicas < 1:
            raise ValueError("invalid moment report")


def moment_sum(p: ContinuousPartition, alpha: float) -> float:
    """``sum_i p_i^alpha`` over the stored parts; the dust is left out."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return math.fsum(x ** alpha for x in p.parts)


def dust_term(p: ContinuousPartition, alpha: float) -> float:
    """Contribution of the dust if it were a single part.

    For ``alpha < 1`` splitting the dust further only increases its
    contribution, so this is an error bar rather than a correction.
    """
    return p.dust ** alpha if p.dust > 0 else 0.0


def interval_count(p: ContinuousPartition, m: int) -> int:
    """Number of parts in the dyadic class ``(2^-(m+1), 2^-m]``."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    lo, hi = 2.0 ** (-m - 1), 2.0 ** (-m)
    return sum(1 for x in p.parts if lo < x <= hi)


def w_stat(p, m: int) -> float:
    """Mass carried by parts strictly larger than ``2^-m``.

    ``p`` may be a ContinuousPartition or a plain sequence of masses.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    thr = 2.0 ** (-m)
    parts = p.parts if isinstance(p, ContinuousPartition) else p
    return math.fsum(x for x in parts if x > thr)


def mean_and_stderr(values) -> tuple:
    v = np.asarray(values, dtype=np.float64)
    if len(v) < 2:
        return float(v.mean()), 0.0
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(len(v)))


def moment_report(alpha: float, replicas: int, rng: RngStream,
                  eps_trunc: float = DEFAULT_EPS_TRUNC) -> MomentReport:
    """Monte Carlo mean of ``sum p_i^alpha`` under truncated PD(1) draws."""
    vals = np.empty(replicas)
    dust = np.empty(replicas)
    for r in range(replicas):
        p = sample_gem(rng, eps_trunc)
        vals[r] = moment_sum(p, alpha)
        dust[r] = dust_term(p, alpha)
    mean, se = mean_and_stderr(vals)
    return MomentReport(alpha, mean, se, replicas, float(dust.mean()))


def moment_reports(alphas: Sequence[float], replicas: int, rng: RngStream,
                   eps_trunc: float = DEFAULT_EPS_TRUNC) -> list:
    """One report per exponent, all computed from the same draws."""
    alphas = list(alphas)
    vals = np.empty((len(alphas), replicas))
    dust = np.empty((len(alphas), replicas))
    for r in range(replicas):
        p = sample_gem(rng, eps_trunc)
        arr = np.array(p.parts)
        for a, alpha in enumerate(alphas):
            vals[a, r] = float(np.sum(arr ** alpha))
            dust[a, r] = dust_term(p, alpha)
    out = []
    for a, alpha in enumerate(alphas):
        mean, se = mean_and_stderr(vals[a])
        out.append(MomentReport(alpha, mean, se, replicas, float(dust[a].mean())))
    return out


def stationarity_residual(sampler: Callable, m, replicas: int, rng: RngStream):
    """Monte Carlo estimate of ``E[W_m(after one CCF step) - W_m(before)]``.

    ``sampler(rng)`` draws the starting ContinuousPartition.  ``m`` may be an
    int or a sequence of ints; returns ``(mean, std_error)`` or a list of
    them, all estimated from the same draws.
    """
    ms = [m] if isinstance(m, int) else list(m)
    if any(mm < 1 for mm in ms):
        raise ValueError("m must be >= 1")
    diffs = np.empty((len(ms), replicas))
    rand = rng.gen.random
    for r in range(replicas):
        p = sampler(rng)
        asc = list(reversed(p.parts))
        before = [w_stat(asc, mm) for mm in ms]
        ccf_move(asc, rand)
        for i, mm in enumerate(ms):
            diffs[i, r] = w_stat(asc, mm) - before[i]
    res = [mean_and_stderr(row) for row in diffs]
    return res[0] if isinstance(m, int) else res


def point_sampler(p: ContinuousPartition) -> Callable:
    return lambda rng: p


def gem_sampler(eps_trunc: float = DEFAULT_EPS_TRUNC) -> Callable:
    return lambda rng: sample_gem(rng, eps_trunc)


def tv_distance(mu, nu):
    """Half the l1 distance between two probability vectors.

    Exact (a Fraction) when both arguments are ExactDistributions or
    sequences of Fractions/ints; a float otherwise.
    """
    if isinstance(mu, ExactDistribution) and isinstance(nu, ExactDistribution):
        if mu.index != nu.index:
            raise ValueError("distributions live on different index sets")
        mu, nu = mu.weights, nu.weights
    elif isinstance(mu, ExactDistribution):
        mu = mu.weights
    elif isinstance(nu, ExactDistribution):
        nu = nu.weights
    if len(mu) != len(nu):
        raise ValueError("index mismatch")
    exact = all(isinstance(x, (Fraction, int)) for x in mu) and all(isinstance(x, (Fraction, int)) for x in nu)
    if exact:
        return sum((abs(Fraction(a) - Fraction(b)) for a, b in zip(mu, nu)), Fraction(0)) / 2
    return 0.5 * float(np.abs(np.asarray(mu, dtype=float) - np.asarray(nu, dtype=float)).sum())


def ccf_window_mean(p: ContinuousPartition, steps: int, alpha: float, window: int,
                    rng: RngStream) -> float:
    """Mean of ``sum p_i^alpha`` over the last ``window`` of ``steps`` CCF steps."""
    if not 0 < window <= steps:
        raise ValueError("need 0 < window <= steps")
    asc = list(reversed(p.parts))
    rand = rng.gen.random
    acc = 0.0
    for k in range(1, steps + 1):
        ccf_move(asc, rand)
        if k > steps - window:
            acc += math.fsum(x ** alpha for x in asc)
    return acc / window
