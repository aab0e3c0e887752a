"""Round accounting for the adaptive query model.

Every oracle query an algorithm makes goes through :func:`submit_batch`. One
call is one adaptive round, no matter how many queries the batch holds.
Structured batches let callers submit whole query families compactly: all
prefixes of many orders, all one-element removals of many sets, or the span
tests ``I + x``. Each family is charged its full logical query count.
"""
import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import BudgetExceeded, EmptyBatch
from .ragged import Ragged

DEFAULT_BUDGET_CAP = 10 ** 7


def default_budget_cap():
    raw = os.environ.get("MATROID_BUDGET_CAP")
    return int(float(raw)) if raw else DEFAULT_BUDGET_CAP


class RoundLedger:
    """Append-only record of batch sizes for one algorithm run."""

    def __init__(self, seed=0, budget_cap=None, workers=1):
        self.seed = int(seed)
        self.budget_cap = int(budget_cap) if budget_cap is not None else default_budget_cap()
        self.workers = workers
        self.per_round = []
        self._streams = 0

    @property
    def rounds(self):
        return len(self.per_round)

    @property
    def total_queries(self):
        return int(sum(self.per_round))

    def admit(self, size):
        size = int(size)
        if size <= 0:
            raise EmptyBatch("a round must contain at least one query")
        if size > self.budget_cap:
            raise BudgetExceeded(size, self.budget_cap)
        return size

    def charge(self, size):
        self.per_round.append(self.admit(size))

    def merge_parallel(self, ledgers):
        """Charge ledgers of independent runs executed side by side.

        Round k of the merged execution carries the k-th batch of every run,
        so the rounds charged are the maximum, not the sum.
        """
        depth = max((lg.rounds for lg in ledgers), default=0)
        for k in range(depth):
            self.charge(sum(lg.per_round[k] for lg in ledgers if k < lg.rounds))

    def stream(self, purpose):
        """A fresh substream; successive calls never repeat a label."""
        self._streams += 1
        return fork_rng(self, f"{purpose}#{self._streams}")

    def to_dict(self):
        return {"rounds": self.rounds, "totalQueries": self.total_queries,
                "perRound": list(self.per_round), "seed": self.seed}

    def to_json(self):
        return json.dumps(self.to_dict(), separators=(",", ":"))


def fork_rng(ledger, label):
    """Deterministic numpy Generator for ``(seed, label)``; same label, same stream."""
    seed = ledger.seed if isinstance(ledger, RoundLedger) else int(ledger)
    digest = hashlib.sha256(f"{seed}:{label}".encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:16], "little"))


class QueryBatch:
    """Queries issued together in one round.

    ``add_*`` methods return a handle; ``submit_batch`` returns answers in
    handle order.
    """

    def __init__(self, queries=None):
        self.jobs = []
        for view, subset in queries or ():
            self.add(view, subset)

    def _push(self, kind, view, data, count):
        self.jobs.append((kind, view, data, int(count)))
        return len(self.jobs) - 1

    def add(self, view, subset):
        if isinstance(subset, (set, frozenset)):
            subset = sorted(subset)
        return self.add_subsets(view, Ragged.from_rows([subset]))

    def add_subsets(self, view, rows):
        """Independence of every row. Answer: bool per row."""
        return self._push("subsets", view, rows, len(rows))

    def add_prefixes(self, view, orders):
        """Independence of every prefix of every order.

        Answer: per order, the longest independent prefix length (prefix j is
        independent iff j <= answer). Charged one query per prefix.
        """
        return self._push("prefixes", view, orders, orders.total())

    def add_removals(self, view, prefixes):
        """All one-element removals P - x of each row P (P dependent, P minus its last independent).

        Answer: flat bool mask, True where P - x is independent, i.e. x is in
        the unique circuit of P. Charged one query per removal.
        """
        return self._push("removals", view, prefixes, prefixes.total())

    def add_span(self, view, bases, candidates, count=None):
        """Independence of I + x for each base row I and each candidate x of that row.

        Answer: flat bool mask, True where I + x is dependent.
        """
        count = candidates.total() if count is None else count
        return self._push("span", view, (bases, candidates), count)

    def add_family(self, view, count, evaluate):
        """A family of ``count`` subset queries whose answers ``evaluate(view)`` reports compactly.

        Used where listing the subsets would dwarf the work, e.g. every pair
        of elements.
        """
        return self._push("family", view, evaluate, count)

    @property
    def size(self):
        return sum(job[3] for job in self.jobs)

    def __len__(self):
        return self.size


def _evaluate(job):
    kind, view, data, _ = job
    if kind == "subsets":
        return view.independent_rows(data)
    if kind == "prefixes":
        return view.prefix_lengths(data)
    if kind == "removals":
        return view.circuit_rows(data)
    if kind == "family":
        return data(view)
    return view.span_rows(*data)


def submit_batch(ledger, batch):
    """Run one adaptive round.

    ``batch`` is a :class:`QueryBatch` (answers per handle) or a plain list of
    ``(view, subset)`` pairs (answers as a list of booleans).
    """
    plain = not isinstance(batch, QueryBatch)
    if plain:
        batch = QueryBatch(batch)
    if not batch.jobs or batch.size == 0:
        raise EmptyBatch("a round must contain at least one query")
    size = ledger.admit(batch.size)
    if ledger.workers > 1 and len(batch.jobs) > 1:
        with ThreadPoolExecutor(ledger.workers) as pool:
            answers = list(pool.map(_evaluate, batch.jobs))
    else:
        answers = [_evaluate(job) for job in batch.jobs]
    ledger.per_round.append(size)
    if plain:
        return [bool(a[0]) for a in answers]
    return answers
