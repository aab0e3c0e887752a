"""Concrete matroid families answering batched independence questions.

An instance lives on element ids ``0..n-1``. Every family answers four batch
questions over ragged rows of ids (see :mod:`parmatroid.kernels`): longest
independent prefix, span membership, first-circuit members and a greedy scan.
The base class derives all of them from plain independence tests, so a new
family only has to supply ``independent_rows`` (slow but correct); the
built-in families override everything with kernels.

``contract(I)`` returns an instance of the same family representing ``M / I``
on the same id space. Contracted ids themselves become meaningless and are
never queried by views.
"""
import numpy as np

from . import kernels as K
from .ragged import Ragged


class MatroidInstance:
    family = "abstract"

    def __init__(self, n):
        self.n = int(n)

    # -- batch questions; subclasses override at least one of the first two

    def independent_rows(self, rg):
        return self.prefix_lengths(rg) == rg.lengths()

    def prefix_lengths(self, rg):
        lens = rg.lengths()
        lo = np.zeros(len(rg), dtype=np.int64)
        hi = lens.copy()
        active = lo < hi
        while active.any():
            idx = np.flatnonzero(active)
            mid = (lo[idx] + hi[idx] + 1) // 2
            probe = Ragged.from_rows([rg.row(i)[:k] for i, k in zip(idx, mid)])
            ok = self.independent_rows(probe)
            lo[idx[ok]] = mid[ok]
            hi[idx[~ok]] = mid[~ok] - 1
            active = lo < hi
        return lo

    def span_rows(self, base, cand):
        rows = []
        for r in range(len(base)):
            b = base.row(r)
            rows.extend(np.append(b, x) for x in cand.row(r))
        if not rows:
            return np.zeros(0, dtype=bool)
        return ~self.independent_rows(Ragged.from_rows(rows))

    def circuit_rows(self, rg):
        rows = []
        for r in range(len(rg)):
            p = rg.row(r)
            rows.extend(np.delete(p, j) for j in range(len(p)))
        if not rows:
            return np.zeros(0, dtype=bool)
        return self.independent_rows(Ragged.from_rows(rows))

    def greedy(self, order):
        order = np.asarray(order, dtype=np.int64)
        keep = np.zeros(len(order), dtype=bool)
        kept = []
        for j, x in enumerate(order):
            if self.independent_rows(Ragged.from_rows([kept + [x]]))[0]:
                kept.append(int(x))
                keep[j] = True
        return keep

    def parallel_keys(self, elems):
        """Loop flags and parallel-class keys: non-loops x, y are parallel iff keys match."""
        elems = np.asarray(elems, dtype=np.int64)
        loops = ~self.independent_rows(Ragged.from_rows([[x] for x in elems]))
        keys = np.full(len(elems), -1, dtype=np.int64)
        todo = np.flatnonzero(~loops)
        while len(todo):
            rep, rest = elems[todo[0]], todo[1:]
            keys[todo[0]] = rep
            if len(rest):
                hit = self.span_rows(Ragged.from_rows([[rep]]), Ragged.from_rows([elems[rest]]))
                keys[rest[hit]] = rep
                rest = rest[~hit]
            todo = rest
        return loops, keys

    def contract(self, items):
        items = np.asarray(items, dtype=np.int64)
        if len(items) == 0:
            return self
        return Contracted(self, items)

    # -- conveniences

    def is_independent(self, items):
        return bool(self.independent_rows(Ragged.from_rows([items]))[0])

    def rank(self, items):
        return int(self.greedy(items).sum())

    def describe(self):
        return {"family": self.family, "n": self.n}


class Contracted(MatroidInstance):
    """Generic ``M / I`` that prepends ``I`` to every query."""

    def __init__(self, base, items):
        super().__init__(base.n)
        if isinstance(base, Contracted):
            items = np.concatenate([base.items, items])
            base = base.base
        self.base = base
        self.items = np.asarray(items, dtype=np.int64)
        self.family = base.family

    def _lift(self, rg):
        k = len(self.items)
        lens = rg.lengths() + k
        offs = np.zeros(len(rg) + 1, dtype=np.int64)
        np.cumsum(lens, out=offs[1:])
        flat = np.empty(offs[-1], dtype=np.int64)
        for r in range(len(rg)):
            flat[offs[r]:offs[r] + k] = self.items
            flat[offs[r] + k:offs[r + 1]] = rg.row(r)
        return Ragged(flat, offs)

    def _drop(self, mask, rg):
        k = len(self.items)
        keep = np.ones(len(mask), dtype=bool)
        lifted_offs = rg.offs + k * np.arange(len(rg) + 1)
        for r in range(len(rg)):
            keep[lifted_offs[r]:lifted_offs[r] + k] = False
        return mask[keep]

    def independent_rows(self, rg):
        return self.base.independent_rows(self._lift(rg))

    def prefix_lengths(self, rg):
        return np.maximum(self.base.prefix_lengths(self._lift(rg)) - len(self.items), 0)

    def span_rows(self, base, cand):
        return self.base.span_rows(self._lift(base), cand)

    def circuit_rows(self, rg):
        return self._drop(self.base.circuit_rows(self._lift(rg)), rg)

    def greedy(self, order):
        k = len(self.items)
        return self.base.greedy(np.concatenate([self.items, order]))[k:]


# ------------------------------------------------------------------ families

class Uniform(MatroidInstance):
    family = "uniform"

    def __init__(self, n, r):
        super().__init__(n)
        if r < 0:
            raise ValueError("rank must be nonnegative")
        self.r = int(min(r, n))

    def independent_rows(self, rg):
        return rg.lengths() <= self.r

    def prefix_lengths(self, rg):
        return np.minimum(rg.lengths(), self.r)

    def span_rows(self, base, cand):
        full = base.lengths() >= self.r
        return np.repeat(full, cand.lengths())

    def circuit_rows(self, rg):
        return np.ones(rg.total(), dtype=bool)

    def greedy(self, order):
        keep = np.zeros(len(order), dtype=bool)
        keep[:self.r] = True
        return keep

    def parallel_keys(self, elems):
        elems = np.asarray(elems, dtype=np.int64)
        loops = np.full(len(elems), self.r == 0)
        keys = np.zeros(len(elems), dtype=np.int64) if self.r == 1 else elems.copy()
        return loops, keys

    def contract(self, items):
        return Uniform(self.n, self.r - len(items))

    def describe(self):
        return {"family": self.family, "n": self.n, "r": self.r}


class Partition(MatroidInstance):
    family = "partition"

    def __init__(self, block, cap):
        block = np.asarray(block, dtype=np.int64)
        super().__init__(len(block))
        self.block = block
        self.cap = np.asarray(cap, dtype=np.int64)
        if len(block) and (block.min() < 0 or block.max() >= len(self.cap)):
            raise ValueError("block index out of range")
        if (self.cap < 0).any():
            raise ValueError("capacities must be nonnegative")

    def prefix_lengths(self, rg):
        return K.part_prefix(rg.flat, rg.offs, self.block, self.cap, len(self.cap))

    def span_rows(self, base, cand):
        return K.part_span(base.flat, base.offs, cand.flat, cand.offs,
                           self.block, self.cap, len(self.cap))

    def circuit_rows(self, rg):
        return K.part_circuit(rg.flat, rg.offs, self.block)

    def greedy(self, order):
        return K.part_greedy(np.asarray(order, dtype=np.int64), self.block, self.cap, len(self.cap))

    def parallel_keys(self, elems):
        elems = np.asarray(elems, dtype=np.int64)
        b = self.block[elems]
        c = self.cap[b]
        keys = np.where(c == 1, b, len(self.cap) + elems)
        return c == 0, keys

    def contract(self, items):
        used = np.bincount(self.block[np.asarray(items, dtype=np.int64)], minlength=len(self.cap))
        return Partition(self.block, self.cap - used)

    def describe(self):
        return {"family": self.family, "n": self.n, "blocks": len(self.cap)}


class Graphic(MatroidInstance):
    family = "graphic"

    def __init__(self, num_vertices, edges):
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        super().__init__(len(edges))
        self.nv = int(num_vertices)
        self.eu = np.ascontiguousarray(edges[:, 0])
        self.ev = np.ascontiguousarray(edges[:, 1])
        if len(edges) and (edges.min() < 0 or edges.max() >= self.nv):
            raise ValueError("edge endpoint out of range")

    def prefix_lengths(self, rg):
        return K.gr_prefix(rg.flat, rg.offs, self.eu, self.ev, self.nv)

    def span_rows(self, base, cand):
        return K.gr_span(base.flat, base.offs, cand.flat, cand.offs, self.eu, self.ev, self.nv)

    def circuit_rows(self, rg):
        return K.gr_circuit(rg.flat, rg.offs, self.eu, self.ev, self.nv)

    def greedy(self, order):
        return K.gr_greedy(np.asarray(order, dtype=np.int64), self.eu, self.ev, self.nv)

    def parallel_keys(self, elems):
        elems = np.asarray(elems, dtype=np.int64)
        u, v = self.eu[elems], self.ev[elems]
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        return u == v, lo * self.nv + hi

    def contract(self, items):
        items = np.asarray(items, dtype=np.int64)
        lab = K.gr_components(self.eu[items], self.ev[items], self.nv)
        nc = int(lab.max()) + 1 if self.nv else 0
        return Graphic(nc, np.stack([lab[self.eu], lab[self.ev]], axis=1))

    def describe(self):
        return {"family": self.family, "n": self.n, "vertices": self.nv}


class Linear(MatroidInstance):
    """Column matroid of a ``d x n`` matrix over GF(p)."""

    family = "linear"

    def __init__(self, matrix, p):
        p = int(p)
        if p < 2 or p > 1 << 16 or any(p % q == 0 for q in range(2, int(p ** 0.5) + 1)):
            raise ValueError(f"modulus {p} is not a prime <= 2^16")
        mat = np.asarray(matrix, dtype=np.int64)
        if mat.ndim != 2:
            raise ValueError("matrix must be 2-D")
        super().__init__(mat.shape[1])
        self.p = p
        cols = np.ascontiguousarray(mat.T % p)
        if cols.shape[1] == 0:
            cols = np.zeros((self.n, 1), dtype=np.int64)
        self.cols = cols

    @classmethod
    def from_columns(cls, cols, p):
        return cls(np.asarray(cols, dtype=np.int64).T, p)

    def prefix_lengths(self, rg):
        return K.lin_prefix(rg.flat, rg.offs, self.cols, self.p)

    def span_rows(self, base, cand):
        return K.lin_span(base.flat, base.offs, cand.flat, cand.offs, self.cols, self.p)

    def circuit_rows(self, rg):
        return K.lin_circuit(rg.flat, rg.offs, self.cols, self.p)

    def greedy(self, order):
        return K.lin_greedy(np.asarray(order, dtype=np.int64), self.cols, self.p)

    def parallel_keys(self, elems):
        elems = np.asarray(elems, dtype=np.int64)
        vec = self.cols[elems]
        nz = vec != 0
        loops = ~nz.any(axis=1)
        lead = vec[np.arange(len(elems)), np.argmax(nz, axis=1)]
        inv = np.array([pow(int(a), self.p - 2, self.p) if a else 0 for a in lead], dtype=np.int64)
        norm = vec * inv[:, None] % self.p
        _, keys = np.unique(norm, axis=0, return_inverse=True)
        return loops, keys.ravel().astype(np.int64)

    def contract(self, items):
        items = np.asarray(items, dtype=np.int64)
        if len(items) == 0:
            return self
        red, piv = K.lin_quotient(self.cols, items, self.p)
        keep = np.setdiff1d(np.arange(self.cols.shape[1]), piv)
        return Linear(red[:, keep].T, self.p)

    def describe(self):
        return {"family": self.family, "n": self.n, "rows": self.cols.shape[1], "p": self.p}


def _flatten(parts):
    """A single-family instance equal to the direct sum, or None."""
    if all(isinstance(q, (Uniform, Partition)) for q in parts):
        blocks, caps, nb = [], [], 0
        for q in parts:
            if isinstance(q, Uniform):
                blocks.append(np.full(q.n, nb, dtype=np.int64))
                caps.append([q.r])
                nb += 1
            else:
                blocks.append(q.block + nb)
                caps.append(q.cap)
                nb += len(q.cap)
        return Partition(np.concatenate(blocks), np.concatenate(caps))
    if all(isinstance(q, Graphic) for q in parts):
        edges, nv = [], 0
        for q in parts:
            edges.append(np.stack([q.eu + nv, q.ev + nv], axis=1))
            nv += q.nv
        return Graphic(nv, np.concatenate(edges))
    if all(isinstance(q, Linear) for q in parts) and len({q.p for q in parts}) == 1:
        d = sum(q.cols.shape[1] for q in parts)
        n = sum(q.n for q in parts)
        cols = np.zeros((n, d), dtype=np.int64)
        i = j = 0
        for q in parts:
            cols[i:i + q.n, j:j + q.cols.shape[1]] = q.cols
            i += q.n
            j += q.cols.shape[1]
        return Linear(cols.T, parts[0].p)
    return None


class DirectSum(MatroidInstance):
    """Direct sum; part ``k`` owns ids ``offsets[k]..offsets[k+1]-1``.

    Sums of one family collapse onto that family's kernels; mixed sums split
    every question by part.
    """

    family = "direct_sum"

    def __init__(self, parts):
        flat = []
        for q in parts:
            flat.extend(q.parts if isinstance(q, DirectSum) else [q])
        self.parts = flat
        self.offsets = np.concatenate([[0], np.cumsum([q.n for q in flat])]).astype(np.int64)
        super().__init__(int(self.offsets[-1]))
        self.part_of = np.repeat(np.arange(len(flat)), [q.n for q in flat]).astype(np.int64)
        self.engine = _flatten(flat) if flat else Uniform(0, 0)

    def _split(self, rg, k):
        sel = self.part_of[rg.flat] == k
        counts = np.bincount(rg.row_ids()[sel], minlength=len(rg))
        offs = np.zeros(len(rg) + 1, dtype=np.int64)
        np.cumsum(counts, out=offs[1:])
        return sel, Ragged(rg.flat[sel] - self.offsets[k], offs)

    def prefix_lengths(self, rg):
        if self.engine is not None:
            return self.engine.prefix_lengths(rg)
        out = rg.lengths().copy()
        pos = np.arange(rg.total()) - rg.offs[rg.row_ids()]
        for k, q in enumerate(self.parts):
            sel, sub = self._split(rg, k)
            if not sel.any():
                continue
            pl = q.prefix_lengths(sub)
            dep = pl < sub.lengths()
            idx = sub.offs[:-1][dep] + pl[dep]
            out[dep] = np.minimum(out[dep], pos[sel][idx])
        return out

    def span_rows(self, base, cand):
        if self.engine is not None:
            return self.engine.span_rows(base, cand)
        out = np.zeros(cand.total(), dtype=bool)
        for k, q in enumerate(self.parts):
            csel, csub = self._split(cand, k)
            if not csel.any():
                continue
            _, bsub = self._split(base, k)
            out[csel] = q.span_rows(bsub, csub)
        return out

    def circuit_rows(self, rg):
        if self.engine is not None:
            return self.engine.circuit_rows(rg)
        out = np.zeros(rg.total(), dtype=bool)
        lens = rg.lengths()
        last = np.where(lens > 0, self.part_of[rg.flat[np.maximum(rg.offs[1:] - 1, 0)]], -1)
        for k, q in enumerate(self.parts):
            rows = np.flatnonzero(last == k)
            if not len(rows):
                continue
            sub = Ragged.from_rows([rg.row(r) for r in rows])
            sel, part_rows = self._split(sub, k)
            mask = np.zeros(sub.total(), dtype=bool)
            mask[sel] = q.circuit_rows(part_rows)
            for i, r in enumerate(rows):
                out[rg.offs[r]:rg.offs[r + 1]] = mask[sub.offs[i]:sub.offs[i + 1]]
        return out

    def greedy(self, order):
        if self.engine is not None:
            return self.engine.greedy(order)
        order = np.asarray(order, dtype=np.int64)
        keep = np.zeros(len(order), dtype=bool)
        for k, q in enumerate(self.parts):
            sel = self.part_of[order] == k
            if sel.any():
                keep[sel] = q.greedy(order[sel] - self.offsets[k])
        return keep

    def parallel_keys(self, elems):
        if self.engine is not None:
            return self.engine.parallel_keys(elems)
        elems = np.asarray(elems, dtype=np.int64)
        loops = np.zeros(len(elems), dtype=bool)
        keys = np.zeros(len(elems), dtype=np.int64)
        span = 0
        for k, q in enumerate(self.parts):
            sel = self.part_of[elems] == k
            if not sel.any():
                continue
            lp, ky = q.parallel_keys(elems[sel] - self.offsets[k])
            _, ky = np.unique(ky, return_inverse=True)
            loops[sel] = lp
            keys[sel] = ky.ravel() + span
            span += len(ky) + 1
        return loops, keys

    def contract(self, items):
        items = np.asarray(items, dtype=np.int64)
        if len(items) == 0:
            return self
        parts = []
        for k, q in enumerate(self.parts):
            sel = items[self.part_of[items] == k] - self.offsets[k]
            parts.append(q.contract(sel) if len(sel) else q)
        return DirectSum(parts)

    def describe(self):
        return {"family": self.family, "n": self.n, "parts": [q.describe() for q in self.parts]}


class OracleMatroid(MatroidInstance):
    """Matroid given only by a Python independence predicate on frozensets."""

    family = "oracle"

    def __init__(self, n, predicate):
        super().__init__(n)
        self.predicate = predicate

    def independent_rows(self, rg):
        return np.array([bool(self.predicate(frozenset(int(x) for x in rg.row(r))))
                         for r in range(len(rg))], dtype=bool)
