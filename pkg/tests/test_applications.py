import itertools
from collections import Counter

import numpy as np
import pytest
from scipy.stats import chisquare

import brute
import cases
from parmatroid.applications import random_feasible_sequence
from parmatroid.errors import DomainError
from parmatroid.matroids import Graphic, Uniform
from parmatroid.oracle import MatroidView, is_independent
from parmatroid.scheduler import RoundLedger


def run(m, seed):
    return random_feasible_sequence(MatroidView(m), RoundLedger(seed))


def test_triangle_takes_first_two_edges():
    seq, _ = run(Graphic(3, cases.TRIANGLE), 1)
    assert len(seq) == 2
    assert seq.elements == seq.permutation[:2]


def test_free_matroid_returns_permutation():
    seq, _ = run(Uniform(5, 5), 2)
    assert seq.elements == seq.permutation


def test_empty_view_rejected():
    with pytest.raises(DomainError):
        random_feasible_sequence(MatroidView(Uniform(0, 0)), RoundLedger(0))


def test_rounds_recorded_both_ways():
    ledger = RoundLedger(0)
    _, acct = random_feasible_sequence(MatroidView(Uniform(6, 2)), ledger)
    assert acct["parallelRounds"] == ledger.rounds == 6
    assert acct["sequentialRounds"] == sum(range(1, 7))


@pytest.mark.parametrize("seed", range(12))
def test_prefixes_independent_and_length_is_rank(seed):
    m, pred = cases.random_small(seed)
    v = MatroidView(m)
    seq, _ = random_feasible_sequence(v, RoundLedger(seed))
    for j in range(len(seq) + 1):
        assert is_independent(v, list(seq.elements[:j]))
    assert len(seq) == brute.rank(pred, range(m.n))


def test_uniform_pairs_are_uniform():
    counts = Counter()
    trials = 10_000
    for t in range(trials):
        seq, _ = run(Uniform(4, 2), t)
        counts[seq.elements] += 1
    pairs = list(itertools.permutations(range(4), 2))
    obs = np.array([counts[p] for p in pairs])
    assert obs.sum() == trials
    assert chisquare(obs).pvalue > 0.001
