"""Views of a matroid under deletion and contraction, and direct oracle access.

A view answers "is T independent?" for T inside its live ground set as
``T | contracted`` independent in the base. Everything here is uncharged;
algorithms reach the oracle only through :func:`parmatroid.scheduler.submit_batch`.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .ragged import Ragged


@dataclass(frozen=True)
class Circuit:
    members: tuple

    @classmethod
    def of(cls, items):
        return cls(tuple(sorted(int(x) for x in items)))

    def __len__(self):
        return len(self.members)

    def __contains__(self, x):
        return int(x) in self.members

    def __iter__(self):
        return iter(self.members)


def _ids(items):
    arr = np.asarray(sorted(int(x) for x in items) if isinstance(items, (set, frozenset)) else items,
                     dtype=np.int64).ravel()
    return arr


class MatroidView:
    def __init__(self, base, deleted=(), contracted=(), _eff=None):
        self.base = base
        self.deleted = frozenset(int(x) for x in deleted)
        self.contracted = frozenset(int(x) for x in contracted)
        if self.deleted & self.contracted:
            raise DomainError("deleted and contracted sets overlap")
        bad = [x for x in self.deleted | self.contracted if not 0 <= x < base.n]
        if bad:
            raise DomainError(f"element {min(bad)} outside ground set of size {base.n}")
        if _eff is None:
            c = np.array(sorted(self.contracted), dtype=np.int64)
            if len(c) and not base.is_independent(c):
                raise DomainError("contracted set is dependent in the base matroid")
            _eff = base.contract(c) if len(c) else base
        self.eff = _eff
        mask = np.ones(base.n, dtype=bool)
        for x in self.deleted | self.contracted:
            mask[x] = False
        self.live_mask = mask
        self.live = np.flatnonzero(mask).astype(np.int64)

    @property
    def n(self):
        """Size of the base ground set (ids stay in ``range(n)``)."""
        return self.base.n

    @property
    def size(self):
        return len(self.live)

    def __repr__(self):
        return (f"MatroidView({self.base.family}, n={self.base.n}, live={self.size}, "
                f"contracted={len(self.contracted)})")

    # -- derived views

    def delete(self, items):
        items = set(int(x) for x in items)
        self._check(np.fromiter(items, dtype=np.int64, count=len(items)))
        return MatroidView(self.base, self.deleted | items, self.contracted, _eff=self.eff)

    def contract(self, items):
        arr = _ids(items)
        self._check(arr)
        if len(arr) and not self.eff.is_independent(arr):
            raise DomainError("cannot contract a dependent set")
        eff = self.eff.contract(arr) if len(arr) else self.eff
        return MatroidView(self.base, self.deleted, self.contracted | set(arr.tolist()), _eff=eff)

    def restrict(self, items):
        """View whose live set is ``items`` (everything else live is deleted)."""
        keep = np.zeros(self.base.n, dtype=bool)
        arr = _ids(items)
        self._check(arr)
        keep[arr] = True
        drop = np.flatnonzero(self.live_mask & ~keep)
        return self.delete(drop.tolist())

    # -- batch evaluation (called by scheduler jobs)

    def _check(self, flat):
        flat = np.asarray(flat, dtype=np.int64)
        if len(flat) == 0:
            return
        if flat.min() < 0 or flat.max() >= self.base.n or not self.live_mask[flat].all():
            bad = [int(x) for x in flat if not (0 <= x < self.base.n and self.live_mask[x])]
            raise DomainError(f"element {bad[0]} is not in the live ground set")

    def independent_rows(self, rg):
        self._check(rg.flat)
        return self.eff.independent_rows(rg)

    def prefix_lengths(self, rg):
        self._check(rg.flat)
        return self.eff.prefix_lengths(rg)

    def span_rows(self, base, cand):
        self._check(base.flat)
        self._check(cand.flat)
        return self.eff.span_rows(base, cand)

    def circuit_rows(self, rg):
        self._check(rg.flat)
        return self.eff.circuit_rows(rg)

    def greedy(self, order):
        order = np.asarray(order, dtype=np.int64)
        self._check(order)
        return self.eff.greedy(order)

    def parallel_keys(self, elems):
        elems = np.asarray(elems, dtype=np.int64)
        self._check(elems)
        return self.eff.parallel_keys(elems)


def is_independent(view, items):
    """Direct (uncharged) independence query."""
    return bool(view.independent_rows(Ragged.from_rows([_ids(items)]))[0])


def greedy_rank(view, items=None):
    """Rank of ``items`` (default: the live set) by a greedy scan in id order."""
    arr = view.live if items is None else np.sort(_ids(items))
    return int(view.greedy(arr).sum())


def greedy_scan(view, items=None):
    """Elements greedy keeps when scanning ``items`` in the given order."""
    arr = view.live if items is None else _ids(items)
    return arr[view.greedy(arr)]


def first_circuit(view, order, ledger=None):
    """First circuit along ``order``: ``(prefix_len, Circuit)`` or ``(None, None)``.

    With a ledger the two query rounds (all prefixes, then all one-element
    removals of the first dependent prefix) go through the scheduler.
    """
    order = _ids(order)
    if len(set(order.tolist())) != len(order):
        raise DomainError("order repeats an element")
    if ledger is not None:
        from .scheduler import QueryBatch, submit_batch
        batch = QueryBatch()
        batch.add_prefixes(view, Ragged.from_rows([order]))
        length = int(submit_batch(ledger, batch)[0][0])
    else:
        length = int(view.prefix_lengths(Ragged.from_rows([order]))[0])
    if length == len(order):
        return None, None
    prefix = order[:length + 1]
    if ledger is not None:
        batch = QueryBatch()
        batch.add_removals(view, Ragged.from_rows([prefix]))
        mask = submit_batch(ledger, batch)[0]
    else:
        mask = view.circuit_rows(Ragged.from_rows([prefix]))
    return length + 1, Circuit.of(prefix[mask])
