import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from oracles import discrepancy_by_points
from splitmerge.chains import exact_kernel
from splitmerge.coupling import (
    CoupledState,
    coupled_step,
    decoupling_time,
    discrepancy,
    embed,
    l1_gap,
    project_continuous,
    project_discrete,
    run_coupling,
)
from splitmerge.partitions import ContinuousPartition
from splitmerge.samplers import RngStream, sample_gem


def state(n, bounds, labels, d):
    return CoupledState(n, np.array(bounds, float), np.array(labels), np.array(d))


def test_projections():
    s = state(8, [0, 8], [1], [1] * 8)
    assert project_continuous(s).parts == (1.0,)
    assert project_discrete(s) == (8,)
    s = state(8, [0, 3, 8], [1, 2], [1, 1, 1, 2, 2, 2, 2, 2])
    assert project_continuous(s).parts == (5 / 8, 3 / 8)
    relabelled = state(8, [0, 3, 8], [7, 4], [1, 1, 1, 2, 2, 2, 2, 2])
    assert project_continuous(relabelled).parts == (5 / 8, 3 / 8)
    s = state(4, [0, 4], [1], [1, 1, 2, 3])
    assert project_discrete(s) == (2, 1, 1)
    assert project_discrete(state(4, [0, 4], [1], [9, 9, 5, 6])) == (2, 1, 1)


def test_embed_single_part():
    s = embed(ContinuousPartition((1.0,)), 10)
    assert list(s.bounds) == [0.0, 10.0]
    assert set(s.d) == {1}
    assert project_discrete(s) == (10,)
    assert discrepancy(s) == 0.0


def test_embed_left_endpoint_rule():
    # n = 8, parts 3/8, 5/16, 3/16, 1/8: cuts at 3, 5.5, 7
    s = embed(ContinuousPartition((3 / 8, 5 / 16, 3 / 16, 1 / 8)), 8)
    assert list(s.d) == [1, 1, 1, 2, 2, 2, 3, 4]
    # each part gets as many atoms as integers in its interval
    expected = np.diff(np.ceil(s.bounds)).astype(int)
    assert list(np.bincount(s.d)[1:]) == list(expected)
    assert discrepancy(s) == pytest.approx(0.5)


def test_embed_with_dust():
    p = ContinuousPartition((0.6, 0.3), 0.1)
    s = embed(p, 20)
    s.validate()
    q = project_continuous(s)
    assert q.parts == pytest.approx((0.6, 0.3, 0.1))


@given(st.integers(0, 2**32), st.integers(2, 300))
def test_initial_discrepancy_bound(seed, n):
    p = sample_gem(RngStream(seed), 1e-6)
    s = embed(p, n)
    s.validate()
    rho = discrepancy(s)
    assert rho == pytest.approx(discrepancy_by_points(s.bounds, s.labels, s.d, n), abs=1e-9)
    assert rho <= len(project_discrete(s)) + 1e-9


def test_initial_discrepancy_bound_gem_batch():
    rng = RngStream(21)
    for _ in range(1000):
        s = embed(sample_gem(rng), 100)
        assert discrepancy(s) <= len(project_discrete(s)) + 1e-9


@given(st.integers(0, 2**32), st.sampled_from([3, 7, 50]))
def test_discrepancy_tracks_oracle_along_path(seed, n):
    rng = RngStream(seed)
    s = embed(sample_gem(rng, 1e-6), n)
    for _ in range(30):
        s = coupled_step(s, rng)
        s.validate()
        assert discrepancy(s) == pytest.approx(
            discrepancy_by_points(s.bounds, s.labels, s.d, n), abs=1e-9)


def test_continuous_marginal_merge_rate():
    rng = RngStream(22)
    start = embed(ContinuousPartition((0.5, 0.5)), 100)
    reps = 100_000
    splits = sum(coupled_step(start, rng, info=True)[1].continuous_split for _ in range(reps))
    se = math.sqrt(0.25 / reps)
    assert abs(splits / reps - 0.5) < 3 * se


def test_discrete_marginal_is_transposition_chain():
    rng = RngStream(23)
    start = embed(ContinuousPartition((2 / 3, 1 / 3)), 3)
    assert project_discrete(start) == (2, 1)
    reps = 20_000
    hits = {(3,): 0, (1, 1, 1): 0}
    for _ in range(reps):
        hits[tuple(project_discrete(coupled_step(start, rng)))] += 1
    row = exact_kernel(3).row((2, 1))
    obs = [hits[(3,)], hits[(1, 1, 1)]]
    exp = [float(row[(3,)]) * reps, float(row[(1, 1, 1)]) * reps]
    assert stats.chisquare(obs, exp).pvalue > 0.01


def test_discrete_split_sizes_uniform_in_scattered_class():
    # class on atoms {1, 3, 4, 6} is not contiguous; splitting it must still
    # act like cutting a 4-cycle: pieces {2, 2} w.p. 1/3, {1, 3} w.p. 2/3
    rng = RngStream(24)
    s = state(6, [0, 6], [1], [1, 2, 1, 1, 2, 1])
    members = [0, 2, 3, 5]
    smaller = []
    while len(smaller) < 6000:
        t = coupled_step(s, rng)
        labs = t.d[members]
        if len(set(labs)) == 2:
            smaller.append(min(np.count_nonzero(labs == x) for x in set(labs)))
    obs = [smaller.count(1), smaller.count(2)]
    assert stats.chisquare(obs, [4000, 2000]).pvalue > 0.01


def test_grid_aligned_merge_keeps_alignment():
    rng = RngStream(25)
    start = embed(ContinuousPartition((0.5, 0.25, 0.25)), 8)
    assert discrepancy(start) == 0
    seen = 0
    for _ in range(500):
        t, info = coupled_step(start, rng, info=True)
        if not info.continuous_split and not info.discrete_split and not info.used_zeta:
            assert discrepancy(t) == 0 and t.e == 0
            seen += 1
    assert seen > 50


def test_e_flag_absorbing_and_tau():
    rng = RngStream(26)
    tr = run_coupling(sample_gem(rng), 50, 200, rng)
    assert len(tr.rho) == 201
    if tr.tau is not None:
        assert tr.e[tr.tau] == 1 and not tr.e[: tr.tau].any()
        assert tr.e[tr.tau:].all()


def test_decoupling_time_agrees_with_trace():
    p = sample_gem(RngStream(27, 0))
    tr = run_coupling(p, 100, 60, RngStream(27, 1))
    assert decoupling_time(p, 100, 60, RngStream(27, 1)) == tr.tau


@given(st.integers(0, 2**32), st.sampled_from([10, 100, 1000]))
def test_pathwise_bounds(seed, n):
    rng = RngStream(seed)
    tr = run_coupling(sample_gem(rng), n, 40, rng)
    assert tr.violations() == []
    last = tr.k_max if tr.tau is None else tr.tau - 1
    for k in range(last + 1):
        assert tr.rho[k] <= tr.rho[0] + k + 1e-9


def test_violations_flags_bad_trace():
    rng = RngStream(28)
    tr = run_coupling(sample_gem(rng), 100, 5, rng)
    tr.rho = tr.rho.copy()
    tr.rho[0] = tr.initial_parts + 5
    assert tr.violations()


def test_l1_gap_matches_projections():
    rng = RngStream(29)
    s = embed(sample_gem(rng), 40)
    for _ in range(20):
        s = coupled_step(s, rng)
    p = np.array(project_continuous(s).parts)
    q = np.array(project_discrete(s), float) / 40
    m = max(len(p), len(q))
    expected = np.abs(np.pad(p, (0, m - len(p))) - np.pad(q, (0, m - len(q)))).sum()
    assert l1_gap(s) == pytest.approx(expected)


def test_coupled_step_requires_n2():
    with pytest.raises(ValueError):
        coupled_step(embed(ContinuousPartition((1.0,)), 1), RngStream(0))
