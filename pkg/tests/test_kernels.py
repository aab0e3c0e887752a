"""Compiled kernels agree with their interpreted source on random inputs."""
import json
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from parmatroid import kernels as K
from parmatroid._jit import NUMBA_ENABLED
from parmatroid.ragged import Ragged


def rows_of(rng, n, count, max_len):
    return Ragged.from_rows([rng.choice(n, int(rng.integers(0, min(n, max_len) + 1)), replace=False)
                             for _ in range(count)])


def both(fn, *args):
    a = fn(*args)
    b = fn.py_func(*args)
    return a, b


def check_same(a, b):
    if isinstance(a, tuple):
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x, y)
    else:
        np.testing.assert_array_equal(a, b)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_partition_kernels_agree(seed):
    rng = np.random.default_rng(seed)
    n, nb = int(rng.integers(1, 30)), int(rng.integers(1, 6))
    block = rng.integers(0, nb, n)
    cap = rng.integers(0, 3, nb)
    rg = rows_of(rng, n, 20, 10)
    check_same(*both(K.part_prefix, rg.flat, rg.offs, block, cap, nb))
    check_same(*both(K.part_greedy, rng.permutation(n), block, cap, nb))
    check_same(*both(K.part_circuit, rg.flat, rg.offs, block))
    base = rows_of(rng, n, 20, 3)
    check_same(*both(K.part_span, base.flat, base.offs, rg.flat, rg.offs, block, cap, nb))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_graphic_kernels_agree(seed):
    rng = np.random.default_rng(seed)
    nv = int(rng.integers(1, 12))
    n = int(rng.integers(1, 30))
    eu, ev = rng.integers(0, nv, n), rng.integers(0, nv, n)
    rg = rows_of(rng, n, 20, 12)
    lengths = K.gr_prefix(rg.flat, rg.offs, eu, ev, nv)
    check_same(lengths, K.gr_prefix.py_func(rg.flat, rg.offs, eu, ev, nv))
    check_same(*both(K.gr_greedy, rng.permutation(n), eu, ev, nv))
    check_same(*both(K.gr_components, eu, ev, nv))
    dep = np.flatnonzero(lengths < rg.lengths())
    if len(dep):
        closing = Ragged.from_prefixes(np.array([np.pad(rg.row(r), (0, 12 - len(rg.row(r))))
                                                 for r in dep]), lengths[dep] + 1)
        check_same(*both(K.gr_circuit, closing.flat, closing.offs, eu, ev, nv))
    base = Ragged.from_rows([rg.row(r)[:lengths[r]] for r in range(len(rg))])
    check_same(*both(K.gr_span, base.flat, base.offs, rg.flat, rg.offs, eu, ev, nv))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from([2, 3, 7, 65521]))
def test_linear_kernels_agree(seed, p):
    rng = np.random.default_rng(seed)
    n, d = int(rng.integers(1, 25)), int(rng.integers(1, 7))
    cols = rng.integers(0, min(p, 5), (n, d)).astype(np.int64)
    rg = rows_of(rng, n, 20, 9)
    lengths = K.lin_prefix(rg.flat, rg.offs, cols, p)
    check_same(lengths, K.lin_prefix.py_func(rg.flat, rg.offs, cols, p))
    check_same(*both(K.lin_greedy, rng.permutation(n), cols, p))
    dep = np.flatnonzero(lengths < rg.lengths())
    if len(dep):
        closing = Ragged.from_rows([rg.row(r)[:lengths[r] + 1] for r in dep])
        check_same(*both(K.lin_circuit, closing.flat, closing.offs, cols, p))
    base = Ragged.from_rows([rg.row(r)[:lengths[r]] for r in range(len(rg))])
    check_same(*both(K.lin_span, base.flat, base.offs, rg.flat, rg.offs, cols, p))
    keep = np.flatnonzero(K.lin_greedy(rng.permutation(n), cols, p))[:2]
    check_same(*both(K.lin_quotient, cols, keep, p))


def test_numba_flag_reported():
    assert isinstance(NUMBA_ENABLED, bool)


@pytest.mark.parametrize("fn", [K.part_prefix, K.gr_prefix, K.lin_prefix])
def test_kernels_keep_python_source(fn):
    assert callable(fn.py_func)


def test_gf2_circuit_example():
    cols = np.array([(1, 0), (0, 1), (1, 1), (1, 0)], dtype=np.int64)
    rows = Ragged.from_rows([[0, 1, 3]])
    assert K.lin_prefix(rows.flat, rows.offs, cols, 2).tolist() == [2]
    assert K.lin_circuit(rows.flat, rows.offs, cols, 2).tolist() == [True, False, True]


def test_disabled_numba_gives_same_run(tmp_path):
    outs = []
    for flag in ("0", "1"):
        env = dict(os.environ, MATROID_DISABLE_NUMBA=flag)
        res = subprocess.run([sys.executable, "-m", "parmatroid.cli", "find-basis", "--matroid",
                              "gen:graphic:n=128", "--algo", "kps49", "--seed", "2"],
                             env=env, check=True, capture_output=True, text=True)
        outs.append(json.loads(res.stdout))
    assert outs[0]["basis"] == outs[1]["basis"] and outs[0]["ledger"] == outs[1]["ledger"]
