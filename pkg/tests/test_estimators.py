import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import brute
import cases
from parmatroid.errors import DomainError, InsufficientSample, NoCircuitForElement
from parmatroid.estimators import (alpha_from_lengths, estimate_alpha, estimate_hitting, estimate_marginals,
                                   estimate_q, estimate_w, sample_first_circuits, witness_table)
from parmatroid.matroids import DirectSum, Linear, Partition, Uniform
from parmatroid.oracle import MatroidView
from parmatroid.scheduler import RoundLedger


def sample(m, S=None, count=2000, seed=0):
    v = MatroidView(m)
    S = v.live if S is None else S
    return sample_first_circuits(v, S, count, RoundLedger(seed))


def parallel_pair(r=4):
    # r independent unit columns plus a second copy of the first one: ids 0 and r are parallel
    cols = [tuple(int(i == j) for j in range(r)) for i in range(r)] + [tuple(int(j == 0) for j in range(r))]
    return Linear.from_columns(cols, 2)


# ------------------------------------------------------------------ sampling

def test_free_matroid_has_no_circuits():
    s = sample(Linear.from_columns(np.eye(6, dtype=int), 2))
    assert not s.formed.any()
    assert s.sizes.sum() == 0


def test_uniform_circuits_have_size_r_plus_one():
    s = sample(Uniform(5, 2), count=1000)
    assert set(s.sizes.tolist()) == {3}


def test_circuits_stay_in_dependent_block():
    s = sample(DirectSum([Uniform(4, 1), Uniform(6, 6)]))
    assert (s.circuits.flat < 4).all()
    assert estimate_q(s, [0, 1, 2, 3]) == 1.0


def test_sampling_round_costs():
    ledger = RoundLedger(0)
    sample_first_circuits(MatroidView(Uniform(10, 3)), range(10), 50, ledger)
    assert ledger.per_round == [500, 50 * 4]
    ledger = RoundLedger(0)
    sample_first_circuits(MatroidView(Uniform(10, 10)), range(10), 50, ledger)
    assert ledger.per_round == [500]


def test_q_and_p_edge_cases():
    s = sample(Uniform(20, 9), count=500)
    assert estimate_q(s, s.target) == float(s.formed.mean()) == 1.0
    assert estimate_q(s, []) == 0.0
    assert estimate_hitting(s, s.target) == 1.0
    with pytest.raises(DomainError):
        estimate_q(s, [25])


def test_uniform_marginals_are_one_half():
    s = sample(Uniform(20, 9), count=10_000)
    p = estimate_marginals(s).p
    assert ((p > 0.45) & (p < 0.55)).all()
    assert estimate_hitting(s, [3]) == estimate_marginals(s)[3]


def test_parallel_pair_marginals():
    s = sample(parallel_pair(), count=3000)
    table = estimate_marginals(s).as_dict()
    assert table[0] == table[4] == 1.0
    assert all(table[x] == 0 for x in (1, 2, 3))


@pytest.mark.parametrize("seed", range(8))
def test_estimates_match_exact_law(seed):
    m, pred = cases.random_small(seed, n=6)
    S = list(range(m.n))
    law, total = brute.exact_first_circuit_law(pred, S)
    s = sample(m, count=20_000, seed=seed)
    rng = np.random.default_rng(seed)
    for _ in range(10):
        T = frozenset(np.flatnonzero(rng.random(m.n) < 0.5).tolist())
        q = sum(c for C, c in law.items() if C is not None and C <= T) / total
        p = sum(c for C, c in law.items() if C is not None and C & T) / total
        for est, exact in ((estimate_q(s, sorted(T)), q), (estimate_hitting(s, sorted(T)), p)):
            se = math.sqrt(max(exact * (1 - exact), 1e-12) / s.m)
            assert abs(est - exact) <= 5 * se + 1e-12


# --------------------------------------------------------------------- alpha

def test_alpha_from_lengths_counts_nested_prefixes():
    # j-prefix independent iff j <= L; freq_j = #{L >= j}/m
    assert alpha_from_lengths([1, 1, 3, 3], 5) == 2
    assert alpha_from_lengths([5, 5, 5], 5) == 6
    assert alpha_from_lengths([0, 0, 4], 4) == 1


def test_alpha_examples():
    v = MatroidView(Uniform(200, 50))
    a = estimate_alpha(v, v.live, RoundLedger(0), m_alpha=2000).value
    assert 25 <= a <= 102
    free = MatroidView(Uniform(10, 10))
    assert estimate_alpha(free, free.live, RoundLedger(0)).value == 11


def exact_partition_alpha(blocks, size):
    """Least k with P(uniform k-subset hits no block twice) <= 1/2 (blocks of ``size``, cap 1)."""
    n = blocks * size
    for k in range(1, n + 2):
        if k > blocks:
            return k
        ok = math.comb(blocks, k) * size ** k / math.comb(n, k)
        if ok <= 0.5:
            return k


def test_partition_alpha_in_sandwich():
    exact = exact_partition_alpha(64, 2)
    assert exact == 14
    v = MatroidView(Partition(np.repeat(np.arange(64), 2), np.ones(64, dtype=int)))
    a = estimate_alpha(v, v.live, RoundLedger(1)).value
    assert (exact - 1) / 2 <= a <= 2 * exact


def test_alpha_rejects_empty_set():
    v = MatroidView(Uniform(4, 2))
    with pytest.raises(DomainError):
        estimate_alpha(v, [], RoundLedger(0))


# ------------------------------------------------------------------ witnesses

def test_uniform_witness():
    s = sample(Uniform(20, 9), count=4000)
    w, wit = estimate_w(s, 3)
    assert 9 <= w <= 10 and len(wit) == 10


def test_parallel_pair_witness():
    s = sample(parallel_pair(), count=2000)
    w, wit = estimate_w(s, 0)
    assert w <= 2 and wit.members == (0, 4)


def test_witness_outside_barrier():
    m = DirectSum([parallel_pair(3), Uniform(8, 3)])
    s = sample(m, count=20_000)
    T = list(range(4, 12))
    _, wit = estimate_w(s, 0, T=T)
    assert len(set(wit.members) - set(T)) == 2


def test_witness_errors():
    s = sample(Uniform(20, 9), count=100)
    with pytest.raises(InsufficientSample):
        estimate_w(s, 0)
    res = witness_table(s, [], [0], partial=True)[0]
    assert isinstance(res, tuple)
    free = sample(Uniform(5, 5), count=10)
    with pytest.raises(NoCircuitForElement):
        estimate_w(free, 0, g=1, G=1)
    with pytest.raises(DomainError):
        estimate_w(s, 99)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_marginal_sum_is_mean_circuit_size(seed):
    m, _ = cases.random_small(seed)
    s = sample(m, count=300, seed=seed)
    assert estimate_marginals(s).counts.sum() == s.sizes.sum()
    assert math.isclose(estimate_marginals(s).p.sum(), s.sizes.mean(), rel_tol=0, abs_tol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_restrict_keeps_only_inner_circuits(seed):
    m, _ = cases.random_small(seed)
    s = sample(m, count=200, seed=seed)
    keep = s.target[: max(1, len(s.target) // 2)]
    r = s.restrict(keep)
    for i in range(s.m):
        c = s.circuits.row(i)
        inside = len(c) > 0 and np.isin(c, keep).all()
        assert r.circuits.row(i).tolist() == (c.tolist() if inside else [])
