"""Matroid spec files and seeded instance generators.

Spec files are JSON objects keyed by ``family``::

    {"family": "uniform", "n": 10, "r": 4}
    {"family": "partition", "blocks": [0, 0, 1], "capacities": [1, 2]}
    {"family": "graphic", "vertices": 3, "edges": [[0, 1], [1, 2], [0, 2]]}
    {"family": "linear", "matrix": [[1, 0, 1], [0, 1, 1]], "modulus": 2}
    {"family": "direct_sum", "parts": [ ...specs... ]}

Generators are named ``gen:<family>:key=value,...`` (see ``GENERATORS``).
"""
import json
import math

import numpy as np

from .errors import DomainError
from .matroids import DirectSum, Graphic, Linear, Partition, Uniform


def from_spec(spec):
    if not isinstance(spec, dict) or "family" not in spec:
        raise DomainError("matroid spec needs a 'family' field")
    fam = spec["family"]
    try:
        if fam == "uniform":
            return Uniform(int(spec["n"]), int(spec["r"]))
        if fam == "partition":
            return Partition(spec["blocks"], spec["capacities"])
        if fam == "graphic":
            return Graphic(int(spec["vertices"]), spec["edges"])
        if fam == "linear":
            return Linear(spec["matrix"], int(spec["modulus"]))
        if fam == "direct_sum":
            return DirectSum([from_spec(p) for p in spec["parts"]])
    except KeyError as exc:
        raise DomainError(f"family {fam!r}: missing field {exc.args[0]!r}") from None
    raise DomainError(f"family: unknown matroid family {fam!r}")


def to_spec(m):
    if isinstance(m, Uniform):
        return {"family": "uniform", "n": m.n, "r": m.r}
    if isinstance(m, Partition):
        return {"family": "partition", "blocks": m.block.tolist(), "capacities": m.cap.tolist()}
    if isinstance(m, Graphic):
        return {"family": "graphic", "vertices": m.nv,
                "edges": np.stack([m.eu, m.ev], axis=1).tolist()}
    if isinstance(m, Linear):
        return {"family": "linear", "matrix": m.cols.T.tolist(), "modulus": m.p}
    if isinstance(m, DirectSum):
        return {"family": "direct_sum", "parts": [to_spec(p) for p in m.parts]}
    raise DomainError(f"cannot serialize family {m.family!r}")


# ---------------------------------------------------------------- generators

def uniform(n, r=None, seed=0):
    return Uniform(n, n // 3 if r is None else int(r))


def rank_one(n, seed=0):
    return Uniform(n, 1)


def free(n, seed=0):
    return Uniform(n, n)


def dense_uniform(n, seed=0):
    return Uniform(n, n // 2)


def free_linear(n, seed=0):
    return Linear(np.eye(n, dtype=np.int64), 2)


def random_partition(n, seed=0, blocks=None, max_cap=3):
    rng = np.random.default_rng(seed)
    nb = blocks or max(1, int(round(math.sqrt(n))))
    block = rng.integers(0, nb, size=n)
    cap = rng.integers(1, max_cap + 1, size=nb)
    return Partition(block, cap)


def random_graph(n, seed=0, degree=3.0):
    """``n`` distinct random edges on about ``2n/degree`` vertices (sparse G(V, M))."""
    rng = np.random.default_rng(seed)
    nv = max(3, int(math.ceil(2 * n / degree)))
    while nv * (nv - 1) // 2 < n:
        nv += 1
    codes = rng.choice(nv * (nv - 1) // 2, size=n, replace=False)
    return Graphic(nv, _pairs(nv)[codes])


def complete_graph(n, seed=0):
    """Smallest complete graph with at least ``n`` edges, keeping ``n`` random edges."""
    rng = np.random.default_rng(seed)
    nv = 2
    while nv * (nv - 1) // 2 < n:
        nv += 1
    pairs = _pairs(nv)
    return Graphic(nv, pairs[np.sort(rng.permutation(len(pairs))[:n])])


def _pairs(nv):
    u, v = np.triu_indices(nv, k=1)
    return np.stack([u, v], axis=1).astype(np.int64)


def random_linear(n, seed=0, p=2, d=None):
    rng = np.random.default_rng(seed)
    d = d or max(1, min(n // 2, 32))
    return Linear(rng.integers(0, p, size=(d, n)), p)


def mixed_sum(n, seed=0):
    """Uniform blocks, a sparse graph and a GF(2) matrix side by side."""
    a = n // 3
    b = n // 3
    c = n - a - b
    blocks = random_partition(a, seed=seed) if a else Uniform(0, 0)
    return DirectSum([blocks, random_graph(b, seed=seed + 1) if b >= 3 else Uniform(b, b),
                      random_linear(c, seed=seed + 2)])


def uniform_blocks(n, seed=0, size=8):
    """Direct sum of uniform blocks with random ranks."""
    rng = np.random.default_rng(seed)
    parts, left = [], n
    while left > 0:
        k = min(size, left)
        parts.append(Uniform(k, int(rng.integers(1, k + 1)) if k > 1 else 1))
        left -= k
    return DirectSum(parts)


GENERATORS = {
    "uniform": uniform,
    "dense_uniform": dense_uniform,
    "rank1": rank_one,
    "free": free,
    "free_linear": free_linear,
    "partition": random_partition,
    "graphic": random_graph,
    "complete": complete_graph,
    "linear": random_linear,
    "linear7": lambda n, seed=0, d=None: random_linear(n, seed=seed, p=7, d=d),
    "direct_sum": mixed_sum,
    "uniform_blocks": uniform_blocks,
}


def _number(text):
    try:
        return int(text)
    except ValueError:
        return float(text)


def generate(text):
    """Build an instance from ``gen:<family>:k=v,...`` (the ``gen:`` prefix is optional)."""
    body = text[4:] if text.startswith("gen:") else text
    fam, _, rest = body.partition(":")
    if fam not in GENERATORS:
        raise DomainError(f"family: unknown generator {fam!r}")
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq:
            raise DomainError(f"generator parameter {item!r} is not key=value")
        params[key.strip()] = _number(val.strip())
    if "n" not in params:
        raise DomainError("generator needs n=<size>")
    n = int(params.pop("n"))
    try:
        return GENERATORS[fam](n, **params)
    except TypeError as exc:
        raise DomainError(f"generator {fam!r}: {exc}") from None


def load(source):
    """A matroid from a ``gen:`` string, a JSON file path, or a spec dict."""
    if isinstance(source, dict):
        return from_spec(source)
    if source.startswith("gen:"):
        return generate(source)
    with open(source) as fh:
        return from_spec(json.load(fh))
