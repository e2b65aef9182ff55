import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from oracles import class_distribution
from splitmerge.partitions import ContinuousPartition, enumerate_partitions
from splitmerge.samplers import (
    RngStream,
    gem_sticks,
    replica_map,
    sample_ewens,
    sample_gem,
    size_biased_index,
    size_biased_pick,
    worker_count,
)


def test_streams_reproducible_and_distinct():
    a = [RngStream(5, 0).random() for _ in range(3)]
    b = [RngStream(5, 0).random() for _ in range(3)]
    assert a == b
    assert RngStream(5, 0).random() != RngStream(5, 1).random()
    assert RngStream(5, 0).random() != RngStream(6, 0).random()


@given(st.integers(0, 2**32), st.sampled_from([1e-3, 1e-6, 1e-9]))
def test_gem_draw_invariants(seed, eps):
    p = sample_gem(RngStream(seed), eps)
    assert abs(math.fsum(p.parts) + p.dust - 1.0) < 1e-12
    assert 0.0 <= p.dust < eps
    assert all(a >= b for a, b in zip(p.parts, p.parts[1:]))


def test_gem_first_stick_is_uniform():
    rng = RngStream(11)
    first = [gem_sticks(rng, 1e-6)[0][0] for _ in range(10_000)]
    assert stats.kstest(first, "uniform").pvalue > 0.01


def test_gem_eps_validation():
    with pytest.raises(ValueError):
        sample_gem(RngStream(0), 0.0)


def test_gem_moment_identity():
    rng = RngStream(12)
    vals = np.array([sum(x ** 0.6 for x in sample_gem(rng).parts) for _ in range(10_000)])
    se = vals.std(ddof=1) / math.sqrt(len(vals))
    assert abs(vals.mean() - 1 / 0.6) < 3 * se


def test_ewens_trivial():
    assert sample_ewens(1, RngStream(0)) == (1,)


def test_ewens_n3_chi_square():
    # oracle: cycle types of the six permutations of S_3
    exact = class_distribution(3)
    order = enumerate_partitions(3)
    rng = RngStream(13)
    counts = {g: 0 for g in order}
    for _ in range(100_000):
        counts[tuple(sample_ewens(3, rng))] += 1
    obs = [counts[g] for g in order]
    exp = [float(exact[g]) * 100_000 for g in order]
    assert stats.chisquare(obs, exp).pvalue > 0.01


@pytest.mark.parametrize("n", [4, 5, 6])
def test_ewens_against_enumeration(n):
    exact = class_distribution(n)
    order = enumerate_partitions(n)
    rng = RngStream(14, n)
    reps = 100_000
    counts = {g: 0 for g in order}
    for _ in range(reps):
        counts[tuple(sample_ewens(n, rng))] += 1
    obs = [counts[g] for g in order]
    exp = [float(exact[g]) * reps for g in order]
    assert stats.chisquare(obs, exp).pvalue > 0.01


def test_size_biased_pick_of_sorted_gem_is_uniform():
    # a size-biased pick from PD(1) has the law of the first GEM stick, U[0, 1]
    rng = RngStream(18)
    picks = []
    for _ in range(10_000):
        p = sample_gem(rng)
        picks.append(p.parts[size_biased_pick(p, rng)])
    assert stats.kstest(picks, "uniform").pvalue > 0.01


def test_ewens_mean_cycle_count_is_harmonic():
    rng = RngStream(15)
    lens = np.array([len(sample_ewens(100, rng)) for _ in range(10_000)])
    h = sum(1 / i for i in range(1, 101))
    se = lens.std(ddof=1) / math.sqrt(len(lens))
    assert abs(lens.mean() - h) < 3 * se


@given(st.integers(1, 60), st.integers(0, 2**32))
def test_ewens_is_partition_of_n(n, seed):
    ell = sample_ewens(n, RngStream(seed))
    assert ell.n == n


def test_size_biased_index_examples():
    assert size_biased_index(ContinuousPartition((1.0,)), 0.0) == 0
    assert size_biased_index(ContinuousPartition((1.0,)), 0.999) == 0
    # 0-based: the second part
    assert size_biased_index(ContinuousPartition((0.6, 0.4)), 0.7) == 1
    assert size_biased_index(ContinuousPartition((0.6,), 0.4), 0.7) is None
    with pytest.raises(ValueError):
        size_biased_index(ContinuousPartition((1.0,)), 1.0)


def test_size_biased_frequencies():
    p = ContinuousPartition((0.5, 0.3, 0.15, 0.05))
    rng = RngStream(16)
    reps = 100_000
    counts = np.bincount([size_biased_pick(p, rng) for _ in range(reps)], minlength=4)
    freq = counts / reps
    se = np.sqrt(np.array(p.parts) * (1 - np.array(p.parts)) / reps)
    assert np.all(np.abs(freq - p.parts) < 3 * se + 1e-12)


def test_size_biased_pick_never_dust():
    p = ContinuousPartition((0.1,), 0.9)
    rng = RngStream(17)
    assert all(size_biased_pick(p, rng) == 0 for _ in range(200))


def _first_uniform(rng, scale):
    return scale * rng.random()


def test_replica_map_deterministic_across_workers(monkeypatch):
    serial = replica_map(_first_uniform, 20, 3, 2.0, workers=1)
    assert serial == [2.0 * RngStream(3, r).random() for r in range(20)]
    monkeypatch.setenv("SPLITMERGE_THREADS", "2")
    assert worker_count(8) == 2
    assert replica_map(_first_uniform, 20, 3, 2.0, workers=2) == serial
