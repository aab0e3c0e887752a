"""Tunable constants. Defaults are sized for desk-scale runs (n up to ~10^4)."""
import math
from dataclasses import asdict, dataclass, fields, replace


def log_n(n):
    return math.log2(max(int(n), 2))


@dataclass(frozen=True)
class AlgorithmConfig:
    # estimators
    m: int = 8192                 # first-circuit samples per sampling phase (capped by budget)
    m_alpha: int = 4096           # permutations behind each alpha estimate
    g: int = 32                   # group size for the w estimator
    G: int = 32                   # number of groups for the w estimator
    # globally optimal construction
    eps_q: float = 1 / 8
    c_rem: float = 1 / 8          # removal threshold theta(S) = c_rem / (|S| log n)
    c_v: float = None             # verification threshold constant; None means c_rem / 2
    strategy: str = "greedy"      # greedy | exact | auto (exact when |S| <= exact_cap)
    exact_cap: int = 16
    singleton_only: bool = False  # only single elements as removal candidates
    c0: int = 2                   # small-circuit cutoff
    # progress routines
    k_c: int = 256                # permutations tried by contract_independent
    contract_mode: str = "longest"  # longest | prefix
    c_w: float = 4.0              # witness cutoff c_w * l * log n
    appc_t_factor: float = 2.0    # t = factor * alpha (* log n when appc_log)
    appc_log: bool = False
    # drivers
    f_exponent: float = 4 / 7
    f_log_power: float = 0.0
    f_min: float = 1.0
    t_exponent: float = 5 / 9
    kuw_threshold: int = None     # None means ceil(sqrt(n))
    max_outer: int = 10_000
    verify: bool = False          # check every deletion and contraction against the oracle

    @property
    def theta_v_const(self):
        return self.c_rem / 2 if self.c_v is None else self.c_v

    def f(self, n):
        val = n ** self.f_exponent / (log_n(n) ** self.f_log_power)
        return max(self.f_min, val)

    def t(self, n):
        return max(1.0, n ** self.t_exponent)

    def kuw_cutoff(self, n):
        if self.kuw_threshold is not None:
            return self.kuw_threshold
        return math.ceil(math.sqrt(n))

    def with_(self, **changes):
        return replace(self, **changes)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)
