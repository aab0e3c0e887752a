"""Batch kernels for the partition, graphic and linear families.

Every kernel takes ragged rows as ``(flat, offs)``: row ``r`` is
``flat[offs[r]:offs[r + 1]]``. Element ids index the family's data arrays.

* ``*_prefix`` returns, per row, the length of the longest independent prefix.
* ``*_span`` takes independent base rows and candidate rows and flags each
  candidate whose addition to its base makes it dependent.
* ``*_circuit`` takes rows whose last element closes the first circuit and
  flags the members of that circuit.
* ``*_greedy`` scans one order and flags the elements greedy keeps.
"""
import numpy as np

from ._jit import kernel


# ---------------------------------------------------------------- partition

@kernel
def part_prefix(flat, offs, block, cap, nblocks):
    rows = offs.shape[0] - 1
    out = np.empty(rows, np.int64)
    cnt = np.zeros(nblocks, np.int64)
    for r in range(rows):
        s = offs[r]
        e = offs[r + 1]
        length = e - s
        stop = e
        for j in range(s, e):
            b = block[flat[j]]
            cnt[b] += 1
            if cnt[b] > cap[b]:
                length = j - s
                stop = j + 1
                break
        for j in range(s, stop):
            cnt[block[flat[j]]] = 0
        out[r] = length
    return out


@kernel
def part_span(bflat, boffs, cflat, coffs, block, cap, nblocks):
    rows = boffs.shape[0] - 1
    out = np.zeros(cflat.shape[0], np.bool_)
    cnt = np.zeros(nblocks, np.int64)
    for r in range(rows):
        for j in range(boffs[r], boffs[r + 1]):
            cnt[block[bflat[j]]] += 1
        for j in range(coffs[r], coffs[r + 1]):
            b = block[cflat[j]]
            out[j] = cnt[b] >= cap[b]
        for j in range(boffs[r], boffs[r + 1]):
            cnt[block[bflat[j]]] = 0
    return out


@kernel
def part_circuit(flat, offs, block):
    out = np.zeros(flat.shape[0], np.bool_)
    rows = offs.shape[0] - 1
    for r in range(rows):
        s = offs[r]
        e = offs[r + 1]
        if e == s:
            continue
        b = block[flat[e - 1]]
        for j in range(s, e):
            out[j] = block[flat[j]] == b
    return out


@kernel
def part_greedy(order, block, cap, nblocks):
    out = np.zeros(order.shape[0], np.bool_)
    cnt = np.zeros(nblocks, np.int64)
    for j in range(order.shape[0]):
        b = block[order[j]]
        if cnt[b] < cap[b]:
            cnt[b] += 1
            out[j] = True
    return out


# ------------------------------------------------------------------ graphic

@kernel
def _find(par, x):
    while par[x] != x:
        par[x] = par[par[x]]
        x = par[x]
    return x


@kernel
def gr_prefix(flat, offs, eu, ev, nv):
    rows = offs.shape[0] - 1
    out = np.empty(rows, np.int64)
    par = np.arange(nv)
    for r in range(rows):
        s = offs[r]
        e = offs[r + 1]
        length = e - s
        stop = e
        for j in range(s, e):
            a = _find(par, eu[flat[j]])
            b = _find(par, ev[flat[j]])
            if a == b:
                length = j - s
                stop = j + 1
                break
            par[a] = b
        for j in range(s, stop):
            par[eu[flat[j]]] = eu[flat[j]]
            par[ev[flat[j]]] = ev[flat[j]]
        out[r] = length
    return out


@kernel
def gr_span(bflat, boffs, cflat, coffs, eu, ev, nv):
    rows = boffs.shape[0] - 1
    out = np.zeros(cflat.shape[0], np.bool_)
    par = np.arange(nv)
    for r in range(rows):
        for j in range(boffs[r], boffs[r + 1]):
            a = _find(par, eu[bflat[j]])
            b = _find(par, ev[bflat[j]])
            if a != b:
                par[a] = b
        for j in range(coffs[r], coffs[r + 1]):
            out[j] = _find(par, eu[cflat[j]]) == _find(par, ev[cflat[j]])
        for j in range(boffs[r], boffs[r + 1]):
            par[eu[bflat[j]]] = eu[bflat[j]]
            par[ev[bflat[j]]] = ev[bflat[j]]
    return out


@kernel
def gr_circuit(flat, offs, eu, ev, nv):
    # The closing edge (u, v) plus the forest path from u to v.
    out = np.zeros(flat.shape[0], np.bool_)
    rows = offs.shape[0] - 1
    head = np.full(nv, -1, np.int64)
    via = np.full(nv, -2, np.int64)
    m = flat.shape[0]
    nxt = np.empty(2 * m + 2, np.int64)
    dst = np.empty(2 * m + 2, np.int64)
    eid = np.empty(2 * m + 2, np.int64)
    queue = np.empty(nv, np.int64)
    for r in range(rows):
        s = offs[r]
        e = offs[r + 1]
        if e == s:
            continue
        last = e - 1
        out[last] = True
        src = eu[flat[last]]
        tgt = ev[flat[last]]
        if src == tgt:
            continue
        k = 0
        for j in range(s, last):
            x = eu[flat[j]]
            y = ev[flat[j]]
            dst[k] = y
            eid[k] = j
            nxt[k] = head[x]
            head[x] = k
            k += 1
            dst[k] = x
            eid[k] = j
            nxt[k] = head[y]
            head[y] = k
            k += 1
        via[src] = -1
        queue[0] = src
        qh = 0
        qt = 1
        while qh < qt:
            x = queue[qh]
            qh += 1
            if x == tgt:
                break
            a = head[x]
            while a != -1:
                y = dst[a]
                if via[y] == -2:
                    via[y] = a
                    queue[qt] = y
                    qt += 1
                a = nxt[a]
        x = tgt
        while via[x] >= 0:
            a = via[x]
            out[eid[a]] = True
            x = dst[a ^ 1]
        for i in range(qt):
            via[queue[i]] = -2
        for j in range(s, last):
            head[eu[flat[j]]] = -1
            head[ev[flat[j]]] = -1
    return out


@kernel
def gr_greedy(order, eu, ev, nv):
    out = np.zeros(order.shape[0], np.bool_)
    par = np.arange(nv)
    for j in range(order.shape[0]):
        a = _find(par, eu[order[j]])
        b = _find(par, ev[order[j]])
        if a != b:
            par[a] = b
            out[j] = True
    return out


@kernel
def gr_components(eu, ev, nv):
    """Component label of every vertex under the given edges, dense from 0."""
    par = np.arange(nv)
    for j in range(eu.shape[0]):
        a = _find(par, eu[j])
        b = _find(par, ev[j])
        if a != b:
            par[a] = b
    lab = np.full(nv, -1, np.int64)
    out = np.empty(nv, np.int64)
    c = 0
    for x in range(nv):
        root = _find(par, x)
        if lab[root] < 0:
            lab[root] = c
            c += 1
        out[x] = lab[root]
    return out


# ------------------------------------------------------------------- linear

@kernel
def _inv(a, p):
    res = 1
    b = a % p
    e = p - 2
    while e > 0:
        if e & 1:
            res = res * b % p
        b = b * b % p
        e >>= 1
    return res


@kernel
def _reduce(w, basis, piv, k, p):
    # Clear the pivot coordinates of rows 0..k-1; return the first nonzero or -1.
    d = w.shape[0]
    for i in range(k):
        c = w[piv[i]]
        if c != 0:
            for j in range(d):
                if basis[i, j] != 0:
                    w[j] = (w[j] - c * basis[i, j]) % p
    for j in range(d):
        if w[j] != 0:
            return j
    return -1


@kernel
def _push(w, q, basis, piv, k, p):
    inv = _inv(w[q], p)
    for j in range(w.shape[0]):
        basis[k, j] = w[j] * inv % p
    piv[k] = q


@kernel
def lin_prefix(flat, offs, cols, p):
    d = cols.shape[1]
    rows = offs.shape[0] - 1
    out = np.empty(rows, np.int64)
    basis = np.zeros((d, d), np.int64)
    piv = np.zeros(d, np.int64)
    w = np.empty(d, np.int64)
    for r in range(rows):
        s = offs[r]
        e = offs[r + 1]
        length = e - s
        k = 0
        for j in range(s, e):
            w[:] = cols[flat[j]]
            q = _reduce(w, basis, piv, k, p)
            if q < 0:
                length = j - s
                break
            _push(w, q, basis, piv, k, p)
            k += 1
        out[r] = length
    return out


@kernel
def lin_span(bflat, boffs, cflat, coffs, cols, p):
    d = cols.shape[1]
    rows = boffs.shape[0] - 1
    out = np.zeros(cflat.shape[0], np.bool_)
    basis = np.zeros((d, d), np.int64)
    piv = np.zeros(d, np.int64)
    w = np.empty(d, np.int64)
    for r in range(rows):
        k = 0
        for j in range(boffs[r], boffs[r + 1]):
            w[:] = cols[bflat[j]]
            q = _reduce(w, basis, piv, k, p)
            if q >= 0:
                _push(w, q, basis, piv, k, p)
                k += 1
        for j in range(coffs[r], coffs[r + 1]):
            w[:] = cols[cflat[j]]
            out[j] = _reduce(w, basis, piv, k, p) < 0
    return out


@kernel
def lin_circuit(flat, offs, cols, p):
    # Track each basis row as a combination of the row's elements; the
    # dependency found for the closing element names the circuit.
    d = cols.shape[1]
    rows = offs.shape[0] - 1
    out = np.zeros(flat.shape[0], np.bool_)
    basis = np.zeros((d, d), np.int64)
    comb = np.zeros((d, d + 1), np.int64)
    piv = np.zeros(d, np.int64)
    w = np.empty(d, np.int64)
    t = np.empty(d + 1, np.int64)
    for r in range(rows):
        s = offs[r]
        e = offs[r + 1]
        if e == s:
            continue
        k = 0
        for j in range(s, e):
            w[:] = cols[flat[j]]
            t[:] = 0
            t[j - s] = 1
            for i in range(k):
                c = w[piv[i]]
                if c != 0:
                    for a in range(d):
                        if basis[i, a] != 0:
                            w[a] = (w[a] - c * basis[i, a]) % p
                    for a in range(d + 1):
                        if comb[i, a] != 0:
                            t[a] = (t[a] - c * comb[i, a]) % p
            q = -1
            for a in range(d):
                if w[a] != 0:
                    q = a
                    break
            if q < 0:
                for a in range(j - s + 1):
                    out[s + a] = t[a] != 0
                break
            if k >= d:
                break
            inv = _inv(w[q], p)
            for a in range(d):
                basis[k, a] = w[a] * inv % p
            for a in range(d + 1):
                comb[k, a] = t[a] * inv % p
            piv[k] = q
            k += 1
    return out


@kernel
def lin_greedy(order, cols, p):
    d = cols.shape[1]
    out = np.zeros(order.shape[0], np.bool_)
    basis = np.zeros((d, d), np.int64)
    piv = np.zeros(d, np.int64)
    w = np.empty(d, np.int64)
    k = 0
    for j in range(order.shape[0]):
        w[:] = cols[order[j]]
        q = _reduce(w, basis, piv, k, p)
        if q >= 0:
            _push(w, q, basis, piv, k, p)
            k += 1
            out[j] = True
    return out


@kernel
def lin_quotient(cols, keep, p):
    """Reduce every column modulo the span of ``cols[keep]`` (assumed independent).

    Returns the reduced columns and the pivot coordinates, which are zero in
    every reduced column and can be dropped.
    """
    n, d = cols.shape
    basis = np.zeros((d, d), np.int64)
    piv = np.zeros(d, np.int64)
    w = np.empty(d, np.int64)
    k = 0
    for j in range(keep.shape[0]):
        w[:] = cols[keep[j]]
        q = _reduce(w, basis, piv, k, p)
        if q >= 0:
            _push(w, q, basis, piv, k, p)
            k += 1
    out = np.empty((n, d), np.int64)
    for x in range(n):
        w[:] = cols[x]
        _reduce(w, basis, piv, k, p)
        out[x] = w
    return out, piv[:k].copy()
