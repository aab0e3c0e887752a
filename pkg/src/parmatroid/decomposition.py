"""Small-circuit removal, globally optimal sets, and repeated peeling."""
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .config import AlgorithmConfig, log_n
from .errors import DomainError, EmptyPeel
from .estimators import (alpha_from_sample, budgeted, estimate_alpha, estimate_marginals,
                         sample_first_circuits)
from .ragged import Ragged
from .scheduler import QueryBatch, RoundLedger, submit_batch


# ------------------------------------------------------------ small circuits

def _pair_classes(view):
    """Answers to every query of size <= 2, summarized as loops and parallel classes."""
    live = view.live
    loops, keys = view.parallel_keys(live)
    return live, loops, keys


def _small_subsets(view, c0):
    live = view.live
    rows = [c for k in range(1, c0 + 1) for c in itertools.combinations(live.tolist(), k)]
    return rows, view.independent_rows(Ragged.from_rows(rows))


def small_circuit_deletions(view, c0, ledger):
    """Lowest id of every circuit of size <= c0, found in one round.

    Deleting the lowest id of each small circuit at once is sound: every
    deleted element is spanned by higher ids of its circuit, and by
    induction downward from the largest id, by the kept elements.
    Restricting never creates new circuits, so one pass leaves none.
    """
    n = view.size
    if c0 <= 0 or n == 0:
        return []
    count = sum(math.comb(n, k) for k in range(1, min(c0, n) + 1))
    ledger.admit(count)
    batch = QueryBatch()
    if c0 <= 2:
        batch.add_family(view, count, _pair_classes)
        live, loops, keys = submit_batch(ledger, batch)[0]
        doomed = set(live[loops].tolist())
        if c0 >= 2:
            nl = ~loops
            order = np.lexsort((live[nl], keys[nl]))
            ks, ids = keys[nl][order], live[nl][order]
            # all but the largest id of each parallel class
            last = np.append(ks[1:] != ks[:-1], True)[:len(ks)]
            doomed.update(ids[~last].tolist())
        return sorted(doomed)
    batch.add_family(view, count, lambda v: _small_subsets(v, c0))
    rows, indep = submit_batch(ledger, batch)[0]
    answer = dict(zip(rows, indep.tolist()))
    doomed = set()
    for sub, ok in answer.items():
        if ok:
            continue
        if all(answer.get(c, True) for c in itertools.combinations(sub, len(sub) - 1) if c):
            doomed.add(min(sub))
    return sorted(doomed)


def remove_small_circuits(view, c0, ledger):
    """Delete one element of every circuit of size <= c0; returns (view', deleted)."""
    deleted = small_circuit_deletions(view, c0, ledger)
    return (view.delete(deleted) if deleted else view), deleted


# ------------------------------------------------------- globally optimal sets

@dataclass
class GloballyOptimalCertificate:
    members: tuple
    q_hat: float
    strategy: str
    base_q: float
    removals: list = field(default_factory=list)   # (size before, |T|, hits(T))
    samples: int = 0
    resamples: int = 0
    violation: tuple = None

    def mass_floor(self, c_rem, n):
        """Lower bound on q_hat implied by the removal log."""
        s0 = len(self.members) + sum(r[1] for r in self.removals)
        return self.base_q - c_rem * (_harmonic(s0) - _harmonic(len(self.members))) / log_n(n)


def _harmonic(k):
    return float(np.sum(1.0 / np.arange(1, k + 1))) if k > 0 else 0.0


@dataclass
class PeelOutcome:
    members: np.ndarray
    certificate: GloballyOptimalCertificate
    sample: object          # CircuitSample over the starting set, restricted to S
    reusable: bool          # True when nothing was removed (sample is over S itself)


def _subset_sums(cnt, s):
    f = cnt.astype(np.int64).copy()
    for i in range(s):
        v = f.reshape(2 ** (s - i - 1), 2, 2 ** i)
        v[:, 1, :] += v[:, 0, :]
    return f


def _circuit_bits(sample, alive, index):
    rows = np.flatnonzero(alive)
    sub = Ragged.from_rows([sample.circuits.row(r) for r in rows])
    bits = np.left_shift(1, index[sub.flat]).astype(np.int64)
    return np.add.reduceat(bits, sub.offs[:-1]) if len(rows) else np.zeros(0, np.int64)


def _exact_choice(sample, alive, members, theta, m):
    """Largest T (then fewest hits) with hits(T) <= m |T| theta, as an index mask, or None."""
    s = len(members)
    index = np.zeros(sample.universe, dtype=np.int64)
    index[members] = np.arange(s)
    bits = _circuit_bits(sample, alive, index)
    full = (1 << s) - 1
    cnt = np.bincount(bits, minlength=1 << s)
    inside = _subset_sums(cnt, s)
    masks = np.arange(1 << s)
    hits = len(bits) - inside[full ^ masks]
    size = np.array([bin(x).count("1") for x in range(1 << s)])
    ok = (hits <= m * size * theta) & (masks > 0)
    if not ok.any():
        return None
    cand = np.flatnonzero(ok)
    best = cand[np.lexsort((cand, hits[cand], -size[cand]))[0]]
    return np.array([(best >> i) & 1 for i in range(s)], dtype=bool)


def _greedy_choice(hits, theta, m, singleton_only):
    if singleton_only:
        pick = hits <= m * theta
        return pick if pick.any() else None
    order = np.lexsort((np.arange(len(hits)), hits))
    cum = np.cumsum(hits[order])
    passing = np.flatnonzero(cum <= m * np.arange(1, len(hits) + 1) * theta)
    if not len(passing):
        return None
    pick = np.zeros(len(hits), dtype=bool)
    pick[order[:passing[-1] + 1]] = True
    return pick


def globally_optimal_constructor(view, ledger, config=None, n=None, strategy=None):
    """Peel the live set down to a globally optimal S.

    One circuit sample is drawn over the starting set; removing T discards
    the circuits that meet T. A fresh sample of the same distribution is
    drawn when fewer than m/4 circuits survive. Raises EmptyPeel with
    ``independent=True`` when the live set has no circuit at all.
    """
    cfg = config or AlgorithmConfig()
    start = view.live.copy()
    if len(start) == 0:
        raise DomainError("live ground set is empty")
    n = n or len(start)
    strategy = strategy or cfg.strategy
    m = budgeted(cfg.m, len(start), ledger)
    sample = sample_first_circuits(view, start, m, ledger)
    base_q = float(sample.formed.mean())
    if base_q == 0.0:
        raise EmptyPeel("no circuits in the live set", independent=True)
    cert = GloballyOptimalCertificate((), base_q, strategy, base_q, samples=1)
    in_s = np.zeros(view.n, dtype=bool)
    in_s[start] = True
    flat, rid = sample.circuits.flat, sample.circuits.row_ids()

    def alive_of(smp):
        f, r = smp.circuits.flat, smp.circuits.row_ids()
        outside = np.bincount(r, weights=~in_s[f], minlength=smp.m)
        return (smp.sizes > 0) & (outside == 0)

    alive = alive_of(sample)
    used = "greedy"
    while True:
        members = np.flatnonzero(in_s)
        if len(members) == 0:
            raise EmptyPeel("removal emptied the set; theta too aggressive")
        if alive.sum() * 4 < m and cert.resamples < 3:
            sample = sample_first_circuits(view, start, m, ledger)
            flat, rid = sample.circuits.flat, sample.circuits.row_ids()
            alive = alive_of(sample)
            cert.resamples += 1
            cert.samples += 1
            cert.base_q = float(alive.mean())
            cert.removals = []
        theta = cfg.c_rem / (len(members) * log_n(n))
        use_exact = strategy == "exact" or (strategy == "auto" and len(members) <= cfg.exact_cap)
        if use_exact and len(members) <= cfg.exact_cap and not cfg.singleton_only:
            used = "exact"
            pick = _exact_choice(sample, alive, members, theta, m)
        else:
            used = "greedy" if not cfg.singleton_only else "singleton"
            hits = np.bincount(flat[alive[rid]], minlength=view.n)[members]
            pick = _greedy_choice(hits, theta, m, cfg.singleton_only)
        if pick is None:
            break
        removed = members[pick]
        gone = np.zeros(view.n, dtype=bool)
        gone[removed] = True
        touched = np.bincount(rid, weights=gone[flat], minlength=sample.m) > 0
        cert.removals.append((len(members), len(removed), int((alive & touched).sum())))
        alive &= ~touched
        in_s[removed] = False
    members = np.flatnonzero(in_s)
    cert.members = tuple(members.tolist())
    cert.strategy = used
    cert.q_hat = float(alive.mean())
    floor = cert.mass_floor(cfg.c_rem, n)
    assert cert.q_hat >= floor - 1e-9, (cert.q_hat, floor)
    restricted = sample.restrict(members)
    reusable = len(members) == len(view.live) and cert.samples == 1
    return PeelOutcome(members, cert, restricted, reusable)


# ------------------------------------------------------------- verification

def _permutation_circuit_bits(view, members):
    """Bitmask (over positions in ``members``) of the first circuit of every permutation."""
    s = len(members)
    perms = np.array(list(itertools.permutations(members.tolist())), dtype=np.int64)
    lengths = view.prefix_lengths(Ragged.from_matrix(perms))
    formed = lengths < s
    bits = np.zeros(len(perms), dtype=np.int64)
    if formed.any():
        pre = Ragged.from_prefixes(perms[formed], lengths[formed] + 1)
        mask = view.circuit_rows(pre)
        index = np.zeros(view.n, dtype=np.int64)
        index[members] = np.arange(s)
        vals = np.where(mask, np.left_shift(1, index[pre.flat]), 0)
        bits[formed] = np.add.reduceat(vals, pre.offs[:-1])
    return bits


def exact_statistics(view, members):
    """Exact q_T and p_T for every T (indexed by bitmask over ``members``), by enumeration."""
    members = np.asarray(members, dtype=np.int64)
    s = len(members)
    bits = _permutation_circuit_bits(view, members)
    total = len(bits)
    cnt = np.bincount(bits[bits > 0], minlength=1 << s)
    inside = _subset_sums(cnt, s)
    full = (1 << s) - 1
    masks = np.arange(1 << s)
    q = inside[masks] / total
    p = ((bits > 0).sum() - inside[full ^ masks]) / total
    return q, p


def verify_subset_hitting(view, S, config=None, n=None, mode="auto", m=20_000, seed=0):
    """Worst-ratio T with p_T < |T| theta_v in M|S, or None.

    Exact mode (|S| <= 8) enumerates every permutation of S; sampling mode
    only checks prefixes of the ascending-hit-count order.
    """
    cfg = config or AlgorithmConfig()
    members = np.unique(np.asarray(list(S), dtype=np.int64))
    s = len(members)
    if s == 0:
        return None
    n = n or view.size
    theta_v = cfg.theta_v_const / (s * log_n(n))
    sub = view.restrict(members)
    if mode == "exact" or (mode == "auto" and s <= 8):
        if s > 8:
            raise DomainError("exact mode needs |S| <= 8")
        _, p = exact_statistics(sub, members)
        size = np.array([bin(x).count("1") for x in range(1 << s)])
        ratio = np.where(size > 0, p / np.maximum(size, 1), np.inf)
        worst = int(np.argmin(ratio))
        if p[worst] < size[worst] * theta_v:
            return tuple(members[[(worst >> i) & 1 == 1 for i in range(s)]].tolist())
        return None
    sample = sample_first_circuits(sub, members, m, RoundLedger(seed, budget_cap=1 << 62))
    counts = estimate_marginals(sample).counts
    order = np.lexsort((members, counts))
    hit = np.zeros(sample.m, dtype=bool)
    rid = sample.circuits.row_ids()
    worst, worst_ratio = None, np.inf
    for j, idx in enumerate(order, start=1):
        hit[rid[sample.circuits.flat == members[idx]]] = True
        p_t = hit.mean()
        if p_t < j * theta_v and p_t / j < worst_ratio:
            worst, worst_ratio = j, p_t / j
    if worst is None:
        return None
    return tuple(sorted(members[order[:worst]].tolist()))


# ------------------------------------------------------------------ peeling

@dataclass
class PeelRecord:
    index: int
    members: tuple
    alpha: int
    good: bool = None
    progress_kind: str = "none"
    progress_count: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def size(self):
        return len(self.members)

    @property
    def bucket(self):
        return math.ceil(math.log2(self.size)) if self.size > 0 else 0

    @property
    def ratio(self):
        return self.alpha / self.size

    def to_dict(self):
        d = {"index": self.index, "size": self.size, "alpha": self.alpha, "bucket": self.bucket,
             "good": self.good, "progressKind": self.progress_kind,
             "progressCount": self.progress_count, "members": list(self.members)}
        d.update(self.extra)
        return d


def peel_alpha(view, outcome, ledger, config):
    """alpha-hat of a peeled set, reusing the peel's own sample when it covers S."""
    if outcome.reusable:
        return alpha_from_sample(outcome.sample).value
    return estimate_alpha(view.restrict(outcome.members), outcome.members, ledger,
                          config.m_alpha).value


def repeated_global_peeling(view, ledger, config=None):
    """Peel globally optimal sets until the stop test fires; returns the records before it."""
    cfg = config or AlgorithmConfig()
    n = view.size
    records = []
    cur = view
    while cur.size > 0:
        try:
            out = globally_optimal_constructor(cur, ledger, cfg, n=n)
        except EmptyPeel as exc:
            if exc.independent:
                return records
            raise EmptyPeel(str(exc), partial=records) from None
        alpha = peel_alpha(cur, out, ledger, cfg)
        rec = PeelRecord(len(records) + 1, out.certificate.members, alpha,
                         extra={"qHat": out.certificate.q_hat})
        if rec.ratio >= 1 / log_n(n) or rec.size > n / 2:
            return records
        records.append(rec)
        cur = cur.delete(out.members)
    return records
