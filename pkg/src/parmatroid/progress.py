"""Single-round progress: contracting independent sets and deleting redundant ones.

Deletion routines come in two halves so a driver can pack several of them
into one round: ``plan_*`` draws the randomness and registers queries on a
batch, and the plan's ``finish`` turns the answers into a DeletionResult.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .config import AlgorithmConfig, log_n
from .errors import ContractionFailed, EmptyDeletion, PreconditionError
from .estimators import budgeted, estimate_marginals, random_orders, witness_table
from .oracle import greedy_rank, is_independent
from .ragged import Ragged
from .scheduler import QueryBatch, submit_batch


@dataclass(frozen=True)
class CoreSplit:
    core: tuple
    non_core: tuple
    mass: float          # sum of p-hat over non-core elements
    tau: float


@dataclass
class DeletionResult:
    deleted: tuple
    kept_witness: tuple
    method: str
    rounds_charged: int = 0
    extra: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.deleted)


def check_deletion(view, deleted):
    """True when deleting ``deleted`` keeps the rank of the live set."""
    if not len(deleted):
        return True
    return greedy_rank(view.delete(deleted)) == greedy_rank(view)


# ---------------------------------------------------------------- contraction

def contraction_length(n, size, alpha):
    return int(min(n, max(1, math.floor(alpha * n / (20 * size)))))


def contract_independent(view, size, alpha, ledger, config=None, length=None):
    """An independent set of the live ground set, found in one round.

    ``prefix`` mode queries only the length-l prefix of k_c random orders and
    returns the first independent one. ``longest`` mode queries every prefix
    of the same orders and returns the longest independent one, which is
    never shorter.
    """
    cfg = config or AlgorithmConfig()
    live = view.live
    n = len(live)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    ell = length or contraction_length(n, max(size, 1), alpha)
    rng = ledger.stream("contract")
    batch = QueryBatch()
    if cfg.contract_mode == "prefix":
        k = max(1, min(cfg.k_c, ledger.budget_cap))
        orders = random_orders(rng, live, k)[:, :ell]
        batch.add_subsets(view, Ragged.from_matrix(orders))
        ok = submit_batch(ledger, batch)[0]
        if not ok.any():
            raise ContractionFailed(f"all {k} prefixes of length {ell} dependent")
        return np.sort(orders[int(np.argmax(ok))])
    k = budgeted(cfg.k_c, n, ledger)
    orders = random_orders(rng, live, k)
    batch.add_prefixes(view, Ragged.from_matrix(orders))
    lengths = submit_batch(ledger, batch)[0]
    best = int(np.argmax(lengths))
    if lengths[best] == 0:
        raise ContractionFailed("every order starts with a loop")
    return np.sort(orders[best, :lengths[best]])


# ------------------------------------------------ witness-span deletion route

def _appendix_c_eval(orders, t, members):
    def evaluate(view):
        lengths = view.prefix_lengths(Ragged.from_matrix(orders[:, :t]))
        span_len = np.minimum(lengths, t)
        bases = Ragged.from_prefixes(orders, span_len)
        cands = []
        for i in range(len(orders)):
            cands.append(np.setdiff1d(members, orders[i, :t]) if span_len[i] > 0 else ())
        cands = Ragged.from_rows(cands)
        hit = view.span_rows(bases, cands)
        return lengths, cands, hit
    return evaluate


class AppendixCPlan:
    """Random A_1..A_l (first t of fresh orders of S); B_i = span of A_i's independent prefix."""

    def __init__(self, view, S, alpha, config, rng, n=None, method="appendixC"):
        cfg = config
        self.view = view
        self.members = np.unique(np.asarray(list(S), dtype=np.int64))
        s = len(self.members)
        n = n or view.size
        scale = log_n(n) if cfg.appc_log else 1.0
        self.t = max(1, int(math.ceil(cfg.appc_t_factor * alpha * scale)))
        self.ell = s // (4 * self.t)
        self.method = method
        if self.ell < 1:
            raise EmptyDeletion(f"|S| = {s} < 4t = {4 * self.t}")
        self.orders = random_orders(rng, self.members, self.ell)
        # per i: every prefix P_j (j <= t) and every P_j + x for x in S - A_i
        self.count = self.ell * (self.t + self.t * (s - self.t))

    def add_to(self, batch):
        self.handle = batch.add_family(self.view, self.count,
                                       _appendix_c_eval(self.orders, self.t, self.members))

    def finish(self, answers, rounds=1):
        lengths, cands, hit = answers[self.handle]
        kept = np.unique(self.orders[:, :self.t])
        redundant = np.unique(cands.flat[hit]) if len(hit) else np.zeros(0, np.int64)
        deleted = np.setdiff1d(redundant, kept)
        return DeletionResult(tuple(deleted.tolist()), tuple(kept.tolist()), self.method, rounds,
                              {"t": self.t, "groups": self.ell})


def plan_appendix_c(view, S, alpha, ledger, config=None, n=None, method="appendixC"):
    return AppendixCPlan(view, S, alpha, config or AlgorithmConfig(), ledger.stream("appendixC"),
                         n=n, method=method)


def _run(plan, ledger):
    batch = QueryBatch()
    plan.add_to(batch)
    return plan.finish(submit_batch(ledger, batch))


def recover_redundant_appendixC(view, S, alpha, ledger, config=None, n=None):
    """One round: delete elements spanned by random t-prefixes of S."""
    return _run(plan_appendix_c(view, S, alpha, ledger, config, n), ledger)


# ------------------------------------------------------------------- core split

def compute_core(sample, alpha):
    size = len(sample.target)
    tau = (alpha / size) ** 2 if size else 0.0
    table = estimate_marginals(sample)
    p = table.p
    is_core = p >= tau
    return CoreSplit(tuple(table.elements[is_core].tolist()), tuple(table.elements[~is_core].tolist()),
                     float(p[~is_core].sum()), tau)


def delete_noncore_mass(view, S, split, alpha, ledger, config=None, n=None):
    """Same witness-span deletion as recover_redundant_appendixC, booked
    against the non-core mass guarantee."""
    plan = plan_appendix_c(view, S, alpha, ledger, config, n, method="nonCoreMass")
    res = _run(plan, ledger)
    res.extra["nonCoreMass"] = split.mass
    return res


# ----------------------------------------------------------------- short circuit

def short_circuit_bulk_delete(S, W, witnesses, R=(), l_cap=None):
    """Delete at least |W|/l_cap elements of W using known circuits; no queries.

    Scan W in increasing id order. An unprocessed v is deleted and the other
    members of its witness inside W are kept; each deletion uses up at most
    l_cap elements of W.
    """
    S = set(int(x) for x in S)
    R = set(int(x) for x in R)
    W = sorted(set(int(x) for x in W))
    if R & set(W):
        raise PreconditionError(f"element {min(R & set(W))} of W lies in the barrier")
    for x in W:
        circ = set(int(y) for y in witnesses[x])
        if x not in circ:
            raise PreconditionError(f"element {x} is not in its own witness")
        if l_cap is not None and len(circ & (S - R)) > l_cap:
            raise PreconditionError(f"element {x}: witness meets S - R in {len(circ & (S - R))} > {l_cap}")
    wset = set(W)
    processed, deleted, kept = set(), [], set()
    for v in W:
        if v in processed:
            continue
        deleted.append(v)
        processed.add(v)
        for y in witnesses[v]:
            y = int(y)
            if y in wset and y != v and y not in processed:
                kept.add(y)
                processed.add(y)
    return DeletionResult(tuple(deleted), tuple(sorted(kept)), "shortCircuit", 0)


def short_circuit_candidates(sample, split, config=None, n=None):
    """W and witnesses: non-core elements with a witness meeting the non-core part in few elements."""
    cfg = config or AlgorithmConfig()
    n = n or len(sample.target)
    cutoff = cfg.c_w * log_n(n) * max(split.mass, 1.0)
    table = witness_table(sample, split.core, split.non_core, cfg.g, cfg.G, partial=True)
    non_core = set(split.non_core)
    W, wit = [], {}
    for x, res in table.items():
        if isinstance(res, Exception):
            continue
        _, circ = res
        if len(set(circ.members) & non_core) <= cutoff:
            W.append(x)
            wit[x] = circ.members
    return W, wit, int(math.floor(cutoff))


# ---------------------------------------------------------------- balanced route

class BalancedPlan:
    def __init__(self, view, S, alpha, sample, ledger, config, n=None):
        cfg = config
        self.members = np.unique(np.asarray(list(S), dtype=np.int64))
        self.split = compute_core(sample, alpha)
        self.core_route = len(self.split.core) * 2 >= len(self.members)
        self.plan = None
        self.short = None
        if self.core_route:
            self.plan = plan_appendix_c(view, self.members, alpha, ledger, cfg, n, "coreRecovery")
            return
        try:
            self.plan = plan_appendix_c(view, self.members, alpha, ledger, cfg, n, "nonCoreMass")
        except EmptyDeletion:
            self.plan = None
        W, wit, cap = short_circuit_candidates(sample, self.split, cfg, n)
        if W:
            self.short = short_circuit_bulk_delete(self.members, W, wit, self.split.core, cap)
            self.short.extra.update({"W": len(W), "cap": cap})
        if self.plan is None and self.short is None:
            raise EmptyDeletion("neither deletion route applies")

    @property
    def count(self):
        return self.plan.count if self.plan is not None else 0

    def add_to(self, batch):
        if self.plan is not None:
            self.plan.add_to(batch)

    def finish(self, answers, rounds=1):
        results = []
        if self.plan is not None:
            results.append(self.plan.finish(answers, rounds))
        if self.short is not None:
            results.append(self.short)
        best = max(results, key=len)
        best.extra["coreSize"] = len(self.split.core)
        best.extra["nonCoreMass"] = self.split.mass
        return best


def plan_balanced(view, S, alpha, sample, ledger, config=None, n=None):
    return BalancedPlan(view, S, alpha, sample, ledger, config or AlgorithmConfig(), n)


def balanced_delete(view, S, alpha, sample, ledger, config=None, n=None):
    """Core route when the core is a majority of S, else the larger of the mass and short-circuit routes."""
    plan = plan_balanced(view, S, alpha, sample, ledger, config, n)
    if plan.count == 0:
        return plan.finish(None, rounds=0)
    batch = QueryBatch()
    plan.add_to(batch)
    return plan.finish(submit_batch(ledger, batch))


def run_plans(plans, ledger):
    """Execute deletion plans in as few rounds as the budget cap allows."""
    results = [None] * len(plans)
    pending = [i for i, p in enumerate(plans) if p.count > 0]
    for i, p in enumerate(plans):
        if p.count == 0:
            results[i] = p.finish(None, rounds=0)
    while pending:
        batch, group, used = QueryBatch(), [], 0
        for i in list(pending):
            c = plans[i].count
            ledger.admit(c)  # a plan larger than the cap can never run
            if used + c <= ledger.budget_cap:
                plans[i].add_to(batch)
                group.append(i)
                used += c
        pending = [i for i in pending if i not in group]
        answers = submit_batch(ledger, batch)
        for i in group:
            results[i] = plans[i].finish(answers)
    return results


def contraction_is_sound(view, items):
    return is_independent(view, items)
