"""First-circuit samples and the statistics read off them.

A :class:`CircuitSample` holds the first circuit of each of ``m`` uniform
permutations of a target set S. Drawing it costs two rounds: all prefixes of
all permutations, then all one-element removals of every first dependent
prefix. q, p and w estimates are pure functions of the sample.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InsufficientSample, NoCircuitForElement
from .oracle import Circuit
from .ragged import Ragged
from .scheduler import QueryBatch, submit_batch


@dataclass(frozen=True)
class CircuitSample:
    target: np.ndarray        # sorted ids of S
    m: int
    lengths: np.ndarray       # longest independent prefix per permutation
    circuits: Ragged          # row r: sorted circuit of permutation r (empty if none formed)
    universe: int             # id bound, for membership masks

    @property
    def formed(self):
        return self.lengths < len(self.target)

    @property
    def sizes(self):
        return self.circuits.lengths()

    def circuit(self, r):
        row = self.circuits.row(r)
        return Circuit.of(row) if len(row) else None

    def restrict(self, keep):
        """Same permutations, keeping only circuits inside ``keep`` (others count as none)."""
        inside = _counts_in(self, keep) == self.sizes
        inside &= self.sizes > 0
        sizes = np.where(inside, self.sizes, 0)
        offs = np.zeros(self.m + 1, dtype=np.int64)
        np.cumsum(sizes, out=offs[1:])
        flat = self.circuits.flat[inside[self.circuits.row_ids()]]
        return CircuitSample(self.target, self.m, self.lengths, Ragged(flat, offs), self.universe)


@dataclass(frozen=True)
class AlphaEstimate:
    value: int
    size: int
    m: int


class MarginalTable:
    def __init__(self, elements, counts, m):
        self.elements = np.asarray(elements, dtype=np.int64)
        self.counts = np.asarray(counts, dtype=np.int64)
        self.m = int(m)

    @property
    def p(self):
        return self.counts / self.m

    def __getitem__(self, x):
        idx = np.searchsorted(self.elements, x)
        if idx >= len(self.elements) or self.elements[idx] != x:
            raise DomainError(f"element {x} not in sample target")
        return self.counts[idx] / self.m

    def as_dict(self):
        return {int(x): c / self.m for x, c in zip(self.elements, self.counts)}


def _as_ids(items):
    if isinstance(items, (set, frozenset)):
        items = sorted(items)
    return np.asarray(items, dtype=np.int64).ravel()


def _mask(universe, items):
    mask = np.zeros(universe, dtype=bool)
    mask[_as_ids(items)] = True
    return mask


def _counts_in(sample, items):
    inside = _mask(sample.universe, items)[sample.circuits.flat]
    return np.bincount(sample.circuits.row_ids(), weights=inside, minlength=sample.m).astype(np.int64)


def _check_subset(sample, T):
    T = _as_ids(T)
    if len(T) and not np.isin(T, sample.target).all():
        raise DomainError("T is not a subset of the sampled set")
    return T


def random_orders(rng, items, m):
    """``m`` independent uniform permutations of ``items`` as rows of a matrix."""
    items = np.asarray(items, dtype=np.int64)
    return rng.permuted(np.broadcast_to(items, (m, len(items))), axis=1)


def budgeted(m, k, ledger):
    """Largest sample count <= m whose all-prefix round fits the ledger's cap."""
    if k == 0:
        return max(1, int(m))
    return max(1, min(int(m), ledger.budget_cap // k))


def sample_first_circuits(view, S, m, ledger, rng=None):
    """Draw ``m`` first circuits of uniform permutations of S (two rounds).

    The second round is skipped when no permutation formed a circuit.
    """
    S = np.unique(_as_ids(S))
    m = int(m)
    if m < 1:
        raise DomainError("m must be positive")
    rng = rng if rng is not None else ledger.stream("circuits")
    k = len(S)
    orders = random_orders(rng, S, m)
    if k == 0:
        return CircuitSample(S, m, np.zeros(m, np.int64), Ragged.from_rows([()] * m), view.n)
    batch = QueryBatch()
    batch.add_prefixes(view, Ragged.from_matrix(orders))
    lengths = submit_batch(ledger, batch)[0]
    formed = np.flatnonzero(lengths < k)
    sizes = np.zeros(m, dtype=np.int64)
    flat = np.zeros(0, dtype=np.int64)
    if len(formed):
        prefixes = Ragged.from_prefixes(orders[formed], lengths[formed] + 1)
        batch = QueryBatch()
        batch.add_removals(view, prefixes)
        members = submit_batch(ledger, batch)[0]
        rid = prefixes.row_ids()
        sizes[formed] = np.bincount(rid, weights=members, minlength=len(formed)).astype(np.int64)
        # sort members within each circuit for a canonical order
        key = rid[members] * (view.n + 1) + prefixes.flat[members]
        flat = np.sort(key) % (view.n + 1)
    offs = np.zeros(m + 1, dtype=np.int64)
    np.cumsum(sizes, out=offs[1:])
    return CircuitSample(S, m, np.asarray(lengths, dtype=np.int64), Ragged(flat, offs), view.n)


def estimate_q(sample, T):
    """Fraction of samples whose circuit formed and lies inside T."""
    T = _check_subset(sample, T)
    inside = (_counts_in(sample, T) == sample.sizes) & (sample.sizes > 0)
    return float(inside.mean())


def estimate_hitting(sample, T):
    """Fraction of samples whose circuit meets T."""
    T = _check_subset(sample, T)
    return float((_counts_in(sample, T) > 0).mean())


def estimate_marginals(sample):
    if sample.m < 1:
        raise DomainError("empty sample")
    counts = np.bincount(sample.circuits.flat, minlength=sample.universe)[sample.target]
    return MarginalTable(sample.target, counts, sample.m)


def alpha_from_lengths(lengths, k):
    """Least j with (fraction of orders whose j-prefix is independent) <= 1/2; k+1 if none.

    The j-prefix of a uniform order is a uniform j-subset, so one set of
    orders yields a frequency for every j at once.
    """
    lengths = np.asarray(lengths)
    m = len(lengths)
    # freq_j = #{L >= j} / m ; it is nonincreasing in j
    hist = np.bincount(np.minimum(lengths, k), minlength=k + 1)
    at_least = m - np.concatenate([[0], np.cumsum(hist)[:-1]])
    ok = np.flatnonzero(at_least[1:] * 2 <= m)
    return int(ok[0] + 1) if len(ok) else k + 1


def estimate_alpha(view, S, ledger, m_alpha=4096, rng=None):
    """alpha-hat of S from one round of prefix queries on ``m_alpha`` uniform orders."""
    S = np.unique(_as_ids(S))
    if len(S) == 0:
        raise DomainError("alpha needs a nonempty set")
    rng = rng if rng is not None else ledger.stream("alpha")
    m = budgeted(m_alpha, len(S), ledger)
    orders = random_orders(rng, S, m)
    batch = QueryBatch()
    batch.add_prefixes(view, Ragged.from_matrix(orders))
    lengths = submit_batch(ledger, batch)[0]
    return AlphaEstimate(alpha_from_lengths(lengths, len(S)), len(S), m)


def alpha_from_sample(sample):
    """alpha-hat read off the prefix round of a circuit sample (no extra queries)."""
    return AlphaEstimate(alpha_from_lengths(sample.lengths, len(sample.target)),
                         len(sample.target), sample.m)


def witness_table(sample, T, elements, g=32, G=32, partial=False):
    """For each element: ``(w_hat, witness)`` or the error explaining why there is none.

    Circuits containing x are taken in permutation order; the first g*G form G
    groups of g. w_hat is the mean over groups of the least |C & (S - T)|,
    and the witness is the least such circuit overall. With ``partial`` an
    element with fewer than g*G circuits uses as many whole groups (of at
    most g) as it has, instead of failing.
    """
    T = _check_subset(sample, T)
    rest = np.setdiff1d(sample.target, T)
    values = _counts_in(sample, rest)
    flat = sample.circuits.flat
    rid = sample.circuits.row_ids()
    elements = _as_ids(elements)
    want = _mask(sample.universe, elements)[flat]
    order = np.lexsort((rid[want], flat[want]))
    el = flat[want][order]
    rows = rid[want][order]
    starts = np.searchsorted(el, elements, side="left")
    ends = np.searchsorted(el, elements, side="right")
    need = g * G
    out = {}
    for x, a, b in zip(elements.tolist(), starts, ends):
        if b == a:
            out[x] = NoCircuitForElement(f"element {x} lies in no sampled circuit")
            continue
        gg, GG = g, G
        if b - a < need:
            if not partial:
                out[x] = InsufficientSample(x, int(b - a), need)
                continue
            gg = min(g, int(b - a))
            GG = int(b - a) // gg
        use = rows[a:a + gg * GG]
        vals = values[use]
        w_hat = float(vals.reshape(GG, gg).min(axis=1).mean())
        best = use[int(np.argmin(vals))]
        out[x] = (w_hat, Circuit.of(sample.circuits.row(best)))
    return out


def estimate_w(sample, i, T=(), g=32, G=32):
    """``(w_hat, witness)`` for element i; raises when the sample cannot support it."""
    if i not in set(sample.target.tolist()):
        raise DomainError(f"element {i} not in sample target")
    res = witness_table(sample, T, [i], g, G)[int(i)]
    if isinstance(res, Exception):
        raise res
    return res
