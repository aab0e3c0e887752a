"""Small instances paired with their brute-force predicates."""
import numpy as np

import brute
from parmatroid.matroids import DirectSum, Graphic, Linear, Partition, Uniform


def uniform(n, r):
    return Uniform(n, r), brute.uniform_pred(r)


def partition(block, cap):
    return Partition(block, cap), brute.partition_pred(list(block), list(cap))


def graphic(nv, edges):
    return Graphic(nv, edges), brute.graphic_pred(nv, [tuple(e) for e in edges])


def linear(cols, p):
    return Linear.from_columns(cols, p), brute.linear_pred(cols, p)


def direct_sum(*pairs):
    m = DirectSum([a for a, _ in pairs])
    return m, brute.direct_sum_pred([(a.n, pr) for a, pr in pairs])


def random_small(seed, n=None):
    """A random instance with at most 9 elements from one of the families."""
    rng = np.random.default_rng(seed)
    n = n or int(rng.integers(1, 10))
    kind = seed % 6
    if kind == 0:
        return uniform(n, int(rng.integers(0, n + 1)))
    if kind == 1:
        nb = int(rng.integers(1, 4))
        block = rng.integers(0, nb, n).tolist()
        cap = rng.integers(0, 3, nb).tolist()
        return partition(block, cap)
    if kind == 2:
        nv = int(rng.integers(2, 6))
        edges = rng.integers(0, nv, (n, 2)).tolist()
        return graphic(nv, edges)
    if kind == 3:
        d = int(rng.integers(1, 4))
        return linear(rng.integers(0, 2, (n, d)).tolist(), 2)
    if kind == 4:
        d = int(rng.integers(1, 3))
        return linear(rng.integers(0, 7, (n, d)).tolist(), 7)
    a = max(1, n // 2)
    nv = 3
    return direct_sum(uniform(a, int(rng.integers(0, a + 1))),
                      graphic(nv, rng.integers(0, nv, (max(1, n - a), 2)).tolist()))


TRIANGLE = [[0, 1], [1, 2], [0, 2]]
