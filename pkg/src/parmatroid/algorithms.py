"""Basis finders: sequential greedy, KUW, and the two decomposition drivers."""
import math
from dataclasses import dataclass, field

import numpy as np

from .config import AlgorithmConfig
from .decomposition import PeelRecord, globally_optimal_constructor, remove_small_circuits
from .errors import (BudgetExceeded, ContractionFailed, EmptyDeletion, EmptyPeel, MatroidError)
from .estimators import alpha_from_sample, budgeted, sample_first_circuits
from .oracle import greedy_scan, is_independent
from .progress import (DeletionResult, check_deletion, compute_core, contract_independent,
                       contraction_length, plan_appendix_c, plan_balanced, run_plans)
from .ragged import Ragged
from .scheduler import RoundLedger, submit_batch, QueryBatch


@dataclass
class RunResult:
    basis: tuple
    ledger: RoundLedger
    peel_trace: list = field(default_factory=list)
    stop_reasons: list = field(default_factory=list)
    deletions: list = field(default_factory=list)      # (view before, DeletionResult)
    contractions: list = field(default_factory=list)   # sizes
    failures: list = field(default_factory=list)
    accounting: dict = field(default_factory=dict)

    @property
    def rounds(self):
        return self.ledger.rounds

    def stop_histogram(self):
        return {r: self.stop_reasons.count(r) for r in ("contractReturn", "deleteReturn", "exhausted")}


def validate_basis(view, basis):
    """Independent and maximal in ``view`` (uncharged; one span pass)."""
    basis = np.asarray(sorted(basis), dtype=np.int64)
    if len(basis) and not is_independent(view, basis):
        return False
    rest = np.setdiff1d(view.live, basis)
    if not len(rest):
        return True
    return bool(view.span_rows(Ragged.from_rows([basis]), Ragged.from_rows([rest])).all())


def _finish(view, result):
    if not validate_basis(view, result.basis):
        raise AssertionError("algorithm returned an invalid basis")
    return result


# -------------------------------------------------------------------- greedy

def greedy_basis(view, ledger=None):
    """Keep x (in id order) iff kept + x is independent; one round per element when charged."""
    if ledger is None:
        return tuple(greedy_scan(view).tolist())
    kept = []
    for x in view.live.tolist():
        if submit_batch(ledger, [(view, kept + [x])])[0]:
            kept.append(x)
    return tuple(kept)


def greedy_run(view, ledger):
    return _finish(view, RunResult(greedy_basis(view, ledger), ledger))


# ----------------------------------------------------------------------- KUW

def _kuw(view, ledger, result):
    cur = view
    basis = []
    while cur.size > 0:
        live = cur.live
        groups = np.array_split(live, math.ceil(math.sqrt(len(live))))
        batch = QueryBatch()
        batch.add_prefixes(cur, Ragged.from_rows(groups))
        lengths = submit_batch(ledger, batch)[0]
        sizes = np.array([len(g) for g in groups])
        full = np.flatnonzero(lengths == sizes)
        if len(full):
            pick = full[np.argmax(sizes[full])]
            basis.extend(groups[pick].tolist())
            cur = cur.contract(groups[pick])
            result.contractions.append(int(sizes[pick]))
        else:
            doomed = [int(g[k]) for g, k in zip(groups, lengths)]
            result.deletions.append((cur, DeletionResult(tuple(doomed), (), "kuw", 1)))
            cur = cur.delete(doomed)
    return basis


def kuw_basis(view, ledger=None, config=None):
    """Contract a fully independent group, else drop each group's first dependent element."""
    ledger = ledger or RoundLedger()
    result = RunResult((), ledger)
    result.basis = tuple(sorted(_kuw(view, ledger, result)))
    return _finish(view, result)


# ---------------------------------------------------------- decomposition core

@dataclass
class PeeledSet:
    members: np.ndarray
    alpha: int
    sample: object
    good: bool


@dataclass
class DecompositionResult:
    reason: str            # contractReturn | deleteReturn | exhausted | independent
    sets: list             # PeeledSet, in peel order
    records: list          # PeelRecord
    view: object           # matroid in which the last set was peeled


def _peel(M, ledger, cfg, n):
    out = globally_optimal_constructor(M, ledger, cfg, n=n)
    S = out.members
    sample = out.sample
    if not out.reusable:
        sample = sample_first_circuits(M, S, budgeted(cfg.m, len(S), ledger), ledger)
    return S, sample, alpha_from_sample(sample).value


def guaranteed_progress_decomposition(view, ledger, config=None):
    """Peel until enough contraction or deletion progress is banked (actions deferred)."""
    cfg = config or AlgorithmConfig()
    n = view.size
    f = cfg.f(n)
    T = 0.0
    M = view
    sets, records = [], []
    i = 0
    while M.size > 0 and M.size >= n / 2:
        i += 1
        try:
            S, sample, alpha = _peel(M, ledger, cfg, n)
        except EmptyPeel as exc:
            if exc.independent:
                return DecompositionResult("independent", sets, records, M)
            raise
        split = compute_core(sample, alpha)
        good = 2 * len(split.core) >= len(S)
        contract_lhs = alpha / len(S) * n
        gain = len(S) if good else len(S) ** 1.5 / alpha
        rec = PeelRecord(i, tuple(S.tolist()), alpha, good,
                         extra={"contractLhs": contract_lhs, "threshold": i * f,
                                "coreSize": len(split.core), "tau": split.tau})
        records.append(rec)
        sets.append(PeeledSet(S, alpha, sample, good))
        if contract_lhs >= i * f:
            rec.extra["deleteLhs"] = T
            return DecompositionResult("contractReturn", sets, records, M)
        T += gain
        rec.extra["deleteLhs"] = T
        if T >= i * f:
            return DecompositionResult("deleteReturn", sets, records, M)
        M = M.delete(S)
    return DecompositionResult("exhausted", sets, records, M)


def new_decomposition(view, ledger, config=None):
    """Peel small-alpha sets until their total size reaches i * t; stop at the first large-alpha set."""
    cfg = config or AlgorithmConfig()
    n = view.size
    t = cfg.t(n)
    T = 0.0
    M = view
    sets, records = [], []
    i = 0
    while M.size > 0 and M.size >= n / 2:
        i += 1
        try:
            S, sample, alpha = _peel(M, ledger, cfg, n)
        except EmptyPeel as exc:
            if exc.independent:
                return DecompositionResult("independent", sets, records, M)
            raise
        small = alpha <= math.sqrt(len(S))
        rec = PeelRecord(i, tuple(S.tolist()), alpha, small,
                         extra={"threshold": i * t})
        records.append(rec)
        sets.append(PeeledSet(S, alpha, sample, small))
        if not small:
            return DecompositionResult("contractReturn", sets, records, M)
        T += len(S)
        rec.extra["deleteLhs"] = T
        if T >= i * t:
            return DecompositionResult("deleteReturn", sets, records, M)
        M = M.delete(S)
    return DecompositionResult("exhausted", sets, records, M)


# -------------------------------------------------------------------- drivers

def _verify_deletion(cur, res, result, cfg):
    ok = check_deletion(cur, res.deleted) if cfg.verify else None
    res.extra["verified"] = ok
    if ok is False:
        raise AssertionError(f"{res.method} deletion lowered the rank")
    result.deletions.append((cur, res))


def _contract(cur, M, S_size, alpha, ledger, cfg):
    """Independent set of M (hence of cur); halves the prefix length on failure."""
    ell = contraction_length(M.size, S_size, alpha)
    while True:
        try:
            return contract_independent(M, S_size, alpha, ledger, cfg, length=ell)
        except ContractionFailed:
            if ell <= 1 or cfg.contract_mode != "prefix":
                raise
            ell //= 2


def _drive(view, ledger, cfg, decompose, plan_for):
    result = RunResult((), ledger)
    n0 = view.size
    cutoff = cfg.kuw_cutoff(n0)
    cur = view
    basis = []
    progress_rounds = 0
    calls = 0
    for _ in range(cfg.max_outer):
        if cur.size <= cutoff:
            break
        try:
            c0 = cfg.c0
            while True:
                try:
                    nxt, gone = remove_small_circuits(cur, c0, ledger)
                    break
                except BudgetExceeded:
                    c0 -= 1
                    if c0 <= 0:
                        nxt, gone = cur, []
                        break
            if gone:
                _verify_deletion(cur, DeletionResult(tuple(gone), (), "smallCircuits", 1), result, cfg)
            cur = nxt
            if cur.size <= cutoff:
                break
            dec = decompose(cur, ledger, cfg)
            for rec in dec.records:
                rec.extra["call"] = calls
            calls += 1
            result.peel_trace.extend(dec.records)
            if dec.reason == "independent":
                I = dec.view.live
            elif dec.reason == "contractReturn":
                last = dec.sets[-1]
                I = _contract(cur, dec.view, len(last.members), last.alpha, ledger, cfg)
            else:
                I = None
            if dec.reason in ("independent", "contractReturn", "deleteReturn", "exhausted"):
                result.stop_reasons.append("contractReturn" if dec.reason == "independent" else dec.reason)
            if I is not None:
                if cfg.verify and not is_independent(cur, I):
                    raise AssertionError("contraction set is dependent")
                basis.extend(I.tolist())
                result.contractions.append(len(I))
                if dec.records:
                    dec.records[-1].progress_kind = "contracted"
                    dec.records[-1].progress_count = len(I)
                cur = cur.contract(I)
                progress_rounds += 1
                continue
            plans, owners = [], []
            for k, ps in enumerate(dec.sets):
                try:
                    plans.append(plan_for(cur, ps, ledger, cfg, n0))
                    owners.append(k)
                except EmptyDeletion:
                    continue
            results = run_plans(plans, ledger) if plans else []
            progress_rounds += len(plans)
            doomed = set()
            for k, res in zip(owners, results):
                _verify_deletion(cur, res, result, cfg)
                dec.records[k].progress_kind = "deleted"
                dec.records[k].progress_count = len(res)
                doomed.update(res.deleted)
            if doomed:
                cur = cur.delete(doomed)
                continue
            # nothing deletable: make progress by contracting instead
            last = dec.sets[-1] if dec.sets else None
            I = _contract(cur, cur, len(last.members) if last else cur.size,
                          last.alpha if last else 1, ledger, cfg)
            basis.extend(I.tolist())
            result.contractions.append(len(I))
            cur = cur.contract(I)
        except (MatroidError, AssertionError) as exc:
            if isinstance(exc, AssertionError) and "lowered the rank" in str(exc):
                raise
            result.failures.append(f"{type(exc).__name__}: {exc}")
            break
    fallback_start = ledger.rounds
    basis.extend(_kuw(cur, ledger, result))
    result.basis = tuple(sorted(basis))
    result.accounting = {"progressRounds": progress_rounds,
                         "kuwRounds": ledger.rounds - fallback_start,
                         "batchedRounds": ledger.rounds}
    return _finish(view, result)


def _plan37(cur, ps, ledger, cfg, n):
    if ps.good:
        return plan_appendix_c(cur, ps.members, ps.alpha, ledger, cfg, n)
    return plan_balanced(cur, ps.members, ps.alpha, ps.sample, ledger, cfg, n)


def _plan49(cur, ps, ledger, cfg, n):
    if not ps.good:
        raise EmptyDeletion("large-alpha set")
    return plan_appendix_c(cur, ps.members, ps.alpha, ledger, cfg, n)


def find_basis_37(view, ledger=None, config=None):
    """Main driver: early-stopping decomposition, deferred progress, KUW on the remnant."""
    return _drive(view, ledger or RoundLedger(), config or AlgorithmConfig(),
                  guaranteed_progress_decomposition, _plan37)


def new_decomposition_49(view, ledger=None, config=None):
    """Comparator driver built on the n^(5/9) progress target."""
    cfg = config or AlgorithmConfig(singleton_only=True)
    return _drive(view, ledger or RoundLedger(), cfg, new_decomposition, _plan49)


ALGORITHMS = {
    "greedy": lambda view, ledger, config=None: greedy_run(view, ledger),
    "kuw": kuw_basis,
    "kps49": new_decomposition_49,
    "main37": find_basis_37,
}


def run_algorithm(name, view, seed=0, config=None, budget_cap=None):
    if name not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {name!r}")
    ledger = RoundLedger(seed, budget_cap=budget_cap)
    if name == "kps49" and config is not None:
        config = config.with_(singleton_only=True)
    return ALGORITHMS[name](view, ledger, config)
