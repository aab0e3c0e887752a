"""Random feasible sequences: elements where the rank of a random prefix goes up."""
from dataclasses import dataclass

import numpy as np

from .algorithms import greedy_basis, run_algorithm
from .errors import DomainError
from .scheduler import RoundLedger, fork_rng

EXACT_LIMIT = 512


@dataclass(frozen=True)
class FeasibleSequence:
    elements: tuple
    permutation: tuple
    ranks: tuple          # rank of each prefix of the permutation

    def __len__(self):
        return len(self.elements)

    def to_dict(self):
        return {"sequence": list(self.elements), "permutation": list(self.permutation),
                "ranks": list(self.ranks)}


def random_feasible_sequence(view, ledger=None, finder="main37", config=None, rng=None):
    """Uniform order e_1..e_n, then keep e_j whenever rank(e_1..e_j) > rank(e_1..e_{j-1}).

    Every prefix rank comes from its own basis computation; the computations
    are independent, so the ledger charges their maximum depth while
    ``accounting`` also records the sequential sum.
    """
    if view.size == 0:
        raise DomainError("random feasible sequence needs a nonempty ground set")
    ledger = ledger if ledger is not None else RoundLedger()
    rng = rng if rng is not None else ledger.stream("sequence")
    perm = rng.permutation(view.live)
    subs, ranks = [], [0]
    for j in range(1, len(perm) + 1):
        sub = RoundLedger(ledger.seed, budget_cap=ledger.budget_cap)
        prefix = view.restrict(perm[:j])
        if view.size <= EXACT_LIMIT:
            basis = greedy_basis(prefix, sub)
        else:
            res = run_algorithm(finder, prefix, seed=int(fork_rng(ledger.seed, f"seq{j}").integers(2**31)),
                                config=config, budget_cap=ledger.budget_cap)
            sub, basis = res.ledger, res.basis
        subs.append(sub)
        ranks.append(len(basis))
    ledger.merge_parallel(subs)
    ranks = np.asarray(ranks)
    chosen = perm[np.flatnonzero(np.diff(ranks) == 1)]
    seq = FeasibleSequence(tuple(chosen.tolist()), tuple(perm.tolist()), tuple(ranks[1:].tolist()))
    ledger_sum = sum(s.rounds for s in subs)
    return seq, {"parallelRounds": max((s.rounds for s in subs), default=0),
                 "sequentialRounds": ledger_sum}
