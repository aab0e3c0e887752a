import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from parmatroid.errors import BudgetExceeded, EmptyBatch
from parmatroid.matroids import Uniform
from parmatroid.oracle import MatroidView
from parmatroid.ragged import Ragged
from parmatroid.scheduler import QueryBatch, RoundLedger, default_budget_cap, fork_rng, submit_batch


def test_plain_batch_example():
    v = MatroidView(Uniform(5, 2))
    ledger = RoundLedger(0)
    assert submit_batch(ledger, [(v, {0}), (v, {0, 1}), (v, {0, 1, 2})]) == [True, True, False]
    assert ledger.rounds == 1 and ledger.per_round == [3]


def test_empty_batch_rejected():
    ledger = RoundLedger(0)
    with pytest.raises(EmptyBatch):
        submit_batch(ledger, [])
    with pytest.raises(EmptyBatch):
        submit_batch(ledger, QueryBatch())
    assert ledger.rounds == 0


def test_rounds_count_batches_not_queries():
    v = MatroidView(Uniform(50, 10))
    ledger = RoundLedger(0)
    submit_batch(ledger, [(v, [1])])
    b = QueryBatch()
    b.add_prefixes(v, Ragged.from_matrix(np.tile(np.arange(50), (7, 1))))
    submit_batch(ledger, b)
    assert ledger.rounds == 2
    assert ledger.per_round == [1, 350]
    assert ledger.total_queries == 351


def test_budget_cap_is_an_error_and_leaves_ledger_alone():
    v = MatroidView(Uniform(10, 3))
    ledger = RoundLedger(0, budget_cap=5)
    with pytest.raises(BudgetExceeded) as exc:
        submit_batch(ledger, [(v, [i]) for i in range(6)])
    assert exc.value.size == 6
    assert ledger.rounds == 0


def test_budget_cap_from_environment(monkeypatch):
    monkeypatch.setenv("MATROID_BUDGET_CAP", "1234")
    assert default_budget_cap() == 1234
    assert RoundLedger(0).budget_cap == 1234
    monkeypatch.delenv("MATROID_BUDGET_CAP")
    assert RoundLedger(0).budget_cap == 10 ** 7


def test_structured_answers():
    v = MatroidView(Uniform(6, 2))
    b = QueryBatch()
    h1 = b.add_prefixes(v, Ragged.from_rows([[0, 1, 2, 3], [4]]))
    h2 = b.add_removals(v, Ragged.from_rows([[3, 4, 5]]))
    h3 = b.add_span(v, Ragged.from_rows([[0], [0, 1]]), Ragged.from_rows([[2, 3], [5]]))
    h4 = b.add_family(v, 10, lambda view: view.size)
    ledger = RoundLedger(0)
    ans = submit_batch(ledger, b)
    assert ans[h1].tolist() == [2, 1]
    assert ans[h2].tolist() == [True, True, True]
    assert ans[h3].tolist() == [False, False, True]
    assert ans[h4] == 6
    assert ledger.per_round == [5 + 3 + 3 + 10]


def test_merge_parallel_charges_depth():
    a, b = RoundLedger(0), RoundLedger(0)
    a.per_round = [3, 4, 5]
    b.per_round = [1, 1]
    m = RoundLedger(0)
    m.merge_parallel([a, b])
    assert m.per_round == [4, 5, 5]


def test_fork_rng_label_reuse_gives_same_stream():
    x = fork_rng(RoundLedger(7), "alpha").integers(0, 10**9, 5)
    y = fork_rng(7, "alpha").integers(0, 10**9, 5)
    z = fork_rng(7, "beta").integers(0, 10**9, 5)
    assert x.tolist() == y.tolist()
    assert x.tolist() != z.tolist()


def test_streams_never_repeat_labels():
    ledger = RoundLedger(3)
    a = ledger.stream("x").integers(0, 10**9, 4)
    b = ledger.stream("x").integers(0, 10**9, 4)
    assert a.tolist() != b.tolist()


def test_ledger_json_shape():
    ledger = RoundLedger(5)
    ledger.charge(3)
    ledger.charge(9)
    assert json.loads(ledger.to_json()) == {"rounds": 2, "totalQueries": 12, "perRound": [3, 9], "seed": 5}
    assert ledger.to_json() == '{"rounds":2,"totalQueries":12,"perRound":[3,9],"seed":5}'


def test_parallel_evaluation_matches_serial():
    v = MatroidView(Uniform(30, 7))
    rng = np.random.default_rng(1)
    jobs = [Ragged.from_matrix(rng.permuted(np.tile(np.arange(30), (20, 1)), axis=1)) for _ in range(4)]
    out = []
    for workers in (1, 3):
        b = QueryBatch()
        for j in jobs:
            b.add_prefixes(v, j)
        out.append([a.tolist() for a in submit_batch(RoundLedger(0, workers=workers), b)])
    assert out[0] == out[1]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(1, 1000), min_size=0, max_size=20))
def test_total_is_sum_of_rounds(sizes):
    ledger = RoundLedger(0)
    for s in sizes:
        ledger.charge(s)
    assert ledger.total_queries == sum(sizes)
    assert ledger.rounds == len(sizes)
    assert all(s <= ledger.budget_cap for s in ledger.per_round)
