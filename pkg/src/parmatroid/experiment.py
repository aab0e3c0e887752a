"""Experiment grids: run algorithms over families, sizes and seeds; summarize rounds vs n."""
import csv
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from .algorithms import ALGORITHMS, run_algorithm
from .config import AlgorithmConfig
from .errors import DomainError, MatroidError
from .instances import GENERATORS, load
from .oracle import MatroidView

COLUMNS = ("family", "n", "algo", "seed", "rounds", "queries", "basis_size", "wall_ms",
           "stop_contract", "stop_delete", "stop_exhaust")
SUMMARY_COLUMNS = ("family", "algo", "n", "runs", "mean_rounds", "mean_queries", "slope")


@dataclass
class ResultRecord:
    family: str
    n: int
    algo: str
    seed: int
    rounds: int
    queries: int
    basis_size: int
    wall_ms: float
    stop_contract: int
    stop_delete: int
    stop_exhaust: int

    def to_row(self):
        return asdict(self)

    @classmethod
    def from_row(cls, row):
        def conv(f):
            val = row[f.name]
            return int(float(val)) if f.type is int else f.type(val)
        return cls(**{f.name: conv(f) for f in fields(cls)})


@dataclass
class ExperimentSpec:
    cells: list           # (family label, n, matroid source)
    algorithms: list
    seeds: list
    config: AlgorithmConfig
    out: str = None
    trace: bool = False
    workers: int = 1
    budget_cap: int = None

    @classmethod
    def parse(cls, data):
        if not isinstance(data, dict):
            raise DomainError("experiment spec must be a JSON object")
        algos = data.get("algorithms")
        if not algos:
            raise DomainError("algorithms: need at least one algorithm")
        for a in algos:
            if a not in ALGORITHMS:
                raise DomainError(f"algorithms: unknown algorithm {a!r}")
        seeds = data.get("seeds", [0])
        if not isinstance(seeds, list) or not seeds:
            raise DomainError("seeds: need a nonempty list of integers")
        cells = []
        if "matroid" in data:
            m = load(data["matroid"])
            cells.append((getattr(m, "family", "custom"), m.n, data["matroid"]))
        families = data.get("families") or ([data["family"]] if "family" in data else [])
        if not families and not cells:
            raise DomainError("family: need a generator family or a matroid")
        sizes = data.get("sizes")
        if families and not sizes:
            raise DomainError("sizes: size grid must be nonempty")
        params = data.get("params", {})
        for fam in families:
            if fam not in GENERATORS:
                raise DomainError(f"family: unknown generator {fam!r}")
            extra = "".join(f",{k}={v}" for k, v in sorted(params.items()))
            for n in sizes:
                cells.append((fam, int(n), f"gen:{fam}:n={int(n)}{extra}"))
        try:
            config = AlgorithmConfig.from_dict(data.get("config", {}))
        except (TypeError, ValueError) as exc:
            raise DomainError(f"config: {exc}") from None
        return cls(cells, list(algos), [int(s) for s in seeds], config, data.get("out"),
                   bool(data.get("trace", False)), int(data.get("workers", 1)), data.get("budget_cap"))


def run_one(family, source, algo, seed, config, budget_cap=None):
    """One (instance, algorithm, seed) cell; returns (record, RunResult)."""
    view = MatroidView(load(source))
    t0 = time.perf_counter()
    res = run_algorithm(algo, view, seed=seed, config=config, budget_cap=budget_cap)
    wall = (time.perf_counter() - t0) * 1000
    hist = res.stop_histogram()
    rec = ResultRecord(family, view.n, algo, seed, res.rounds, res.ledger.total_queries,
                       len(res.basis), round(wall, 3), hist["contractReturn"],
                       hist["deleteReturn"], hist["exhausted"])
    return rec, res


def run_experiment(spec):
    """One record per (instance, algorithm, seed); failed runs are returned separately."""
    if isinstance(spec, dict):
        spec = ExperimentSpec.parse(spec)
    jobs = [(fam, src, algo, seed) for fam, _, src in spec.cells
            for algo in spec.algorithms for seed in spec.seeds]

    def work(job):
        fam, src, algo, seed = job
        try:
            return run_one(fam, src, algo, seed, spec.config, spec.budget_cap)
        except MatroidError as exc:
            return None, {"family": fam, "source": src, "algo": algo, "seed": seed,
                          "reason": f"{type(exc).__name__}: {exc}"}

    if spec.workers > 1:
        with ThreadPoolExecutor(spec.workers) as pool:
            outcomes = list(pool.map(work, jobs))
    else:
        outcomes = [work(j) for j in jobs]
    records, failures, traces = [], [], []
    for rec, res in outcomes:
        if rec is None:
            failures.append(res)
        else:
            records.append(rec)
            traces.append((rec, res))
    if spec.out:
        write_outputs(spec.out, records, failures, traces if spec.trace else ())
    return records, failures


# ------------------------------------------------------------------------- io

def write_records(path, records):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=COLUMNS)
        w.writeheader()
        for r in records:
            w.writerow(r.to_row())


def write_jsonl(path, rows):
    with open(path, "w") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=False) + "\n")


def read_records(path):
    with open(path) as fh:
        if path.endswith(".jsonl"):
            return [ResultRecord.from_row(json.loads(line)) for line in fh if line.strip()]
        return [ResultRecord.from_row(row) for row in csv.DictReader(fh)]


def write_outputs(out, records, failures=(), traces=()):
    os.makedirs(out, exist_ok=True)
    write_records(os.path.join(out, "records.csv"), records)
    write_jsonl(os.path.join(out, "records.jsonl"), [r.to_row() for r in records])
    if failures:
        write_jsonl(os.path.join(out, "failures.jsonl"), failures)
    for rec, res in traces:
        name = f"trace_{rec.family}_{rec.n}_{rec.algo}_{rec.seed}.json"
        with open(os.path.join(out, name), "w") as fh:
            json.dump({"ledger": res.ledger.to_dict(),
                       "peels": [p.to_dict() for p in res.peel_trace],
                       "stopReasons": res.stop_reasons}, fh)


# -------------------------------------------------------------------- summary

def loglog_slope(ns, values):
    """Least-squares slope of log(values) against log(ns); None with fewer than 2 sizes."""
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(np.unique(ns)) < 2 or (values <= 0).any():
        return None
    return float(np.polyfit(np.log(ns), np.log(values), 1)[0])


def summarize(records):
    """Mean rounds per (family, algo, n) and the log-log slope of each (family, algo) group."""
    groups = {}
    for r in records:
        groups.setdefault((r.family, r.algo), {}).setdefault(r.n, []).append(r)
    table = []
    for (fam, algo) in sorted(groups):
        by_n = groups[(fam, algo)]
        ns = sorted(by_n)
        means = [float(np.mean([r.rounds for r in by_n[n]])) for n in ns]
        slope = loglog_slope(ns, means)
        for n, mean in zip(ns, means):
            runs = by_n[n]
            table.append({"family": fam, "algo": algo, "n": n, "runs": len(runs),
                          "mean_rounds": round(mean, 6),
                          "mean_queries": round(float(np.mean([r.queries for r in runs])), 3),
                          "slope": None if slope is None else round(slope, 6)})
    return table


def write_summary(path, table):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS)
        w.writeheader()
        for row in table:
            w.writerow({k: ("" if row[k] is None else row[k]) for k in SUMMARY_COLUMNS})


def plot_data(table):
    """Series per (family, algo) for external plotting."""
    series = {}
    for row in table:
        key = f"{row['family']}/{row['algo']}"
        s = series.setdefault(key, {"n": [], "rounds": [], "reference": [], "slope": row["slope"]})
        s["n"].append(row["n"])
        s["rounds"].append(row["mean_rounds"])
        s["reference"].append(sqrt_reference(row["n"]))
    return series


def sqrt_reference(n):
    return 3 * math.sqrt(n)
