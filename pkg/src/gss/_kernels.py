"""Compiled probe/scan loops over the split bucket layout.

Per bucket ``b`` the matrix keeps ``fill[b]`` (rooms are filled left to right
and never freed, so room ``x`` is occupied iff ``x < fill[b]``), the index
area ``idx[b, :]`` (``i_s << 4 | i_d``), the fingerprint area ``fp[b, :]``
(``f_s * F + f_d``) and the weight area ``wt[b, :]``.
"""

import numpy as np
from numba import njit

ROOM_NEW = 0
ROOM_MERGED = 1
TO_BUFFER = 2


@njit(cache=True, nogil=True)
def insert_batch(Hs, Hd, w, m, F, r, qtab, ctab, ccnt, fill, idx, fp, wt, kind, slot):
    l = idx.shape[1]
    for t in range(Hs.shape[0]):
        fs = Hs[t] % F
        fd = Hd[t] % F
        hs = Hs[t] // F
        hd = Hd[t] // F
        fpc = fs * F + fd
        seed = fs + fd
        kind[t] = TO_BUFFER
        slot[t] = -1
        for c in range(ccnt[seed]):
            code = ctab[seed, c]
            i = code // r
            j = code % r
            b = ((hs + qtab[fs, i]) % m) * m + (hd + qtab[fd, j]) % m
            ip = i * 16 + j
            n = np.int64(fill[b])
            hit = -1
            for x in range(n):
                if idx[b, x] == ip and fp[b, x] == fpc:
                    hit = x
                    break
            if hit >= 0:
                wt[b, hit] += w[t]
                kind[t] = ROOM_MERGED
                slot[t] = b * l + hit
                break
            if n < l:
                idx[b, n] = ip
                fp[b, n] = fpc
                wt[b, n] = w[t]
                fill[b] = n + 1
                kind[t] = ROOM_NEW
                slot[t] = b * l + n
                break


@njit(cache=True, nogil=True)
def _locate(Hs, Hd, m, F, r, qtab, ctab, ccnt, fill, idx, fp):
    """Slot ``b*l + x`` holding edge ``(Hs, Hd)``, or -1 if it is not in the matrix."""
    l = idx.shape[1]
    fs = Hs % F
    fd = Hd % F
    hs = Hs // F
    hd = Hd // F
    fpc = fs * F + fd
    seed = fs + fd
    for c in range(ccnt[seed]):
        code = ctab[seed, c]
        i = code // r
        j = code % r
        b = ((hs + qtab[fs, i]) % m) * m + (hd + qtab[fd, j]) % m
        ip = i * 16 + j
        n = np.int64(fill[b])
        for x in range(n):
            if idx[b, x] == ip and fp[b, x] == fpc:
                return b * l + x
        if n < l:
            # an empty room ahead of any match: insert would have stopped here
            return -1
    return -1


@njit(cache=True, nogil=True)
def probe_batch(Hs, Hd, m, F, r, qtab, ctab, ccnt, fill, idx, fp, slot):
    for t in range(Hs.shape[0]):
        slot[t] = _locate(Hs[t], Hd[t], m, F, r, qtab, ctab, ccnt, fill, idx, fp)


@njit(cache=True, nogil=True)
def _buf_row(keys, Hv):
    i = np.searchsorted(keys, Hv)
    if i < keys.shape[0] and keys[i] == Hv:
        return i
    return -1


@njit(cache=True, nogil=True)
def _push(queue, tail, Hn):
    if tail == queue.shape[0]:
        grown = np.empty(2 * tail, dtype=np.int64)
        grown[:tail] = queue
        queue = grown
    queue[tail] = Hn
    return queue, tail + 1


@njit(cache=True, nogil=True)
def bfs_reach(Hs, Hd, m, F, r, qtab, ctab, ccnt, fill, idx, fp, bkeys, bptr, bdst, seen):
    """BFS from ``Hs``; returns (found, number of keys visited).

    ``bkeys``/``bptr``/``bdst`` hold the buffer as CSR sorted by source key.
    ``seen`` is a zeroed byte map over all ``m*F`` keys.
    """
    queue = np.empty(64, dtype=np.int64)
    queue[0] = Hs
    head = 0
    tail = 1
    visited = 0
    while head < tail:
        Hv = queue[head]
        head += 1
        if seen[Hv]:
            continue
        seen[Hv] = 1
        visited += 1
        if _locate(Hv, Hd, m, F, r, qtab, ctab, ccnt, fill, idx, fp) >= 0:
            return True, visited
        row_b = _buf_row(bkeys, Hv)
        if row_b >= 0:
            for e in range(bptr[row_b], bptr[row_b + 1]):
                if bdst[e] == Hd:
                    return True, visited
        fv = Hv % F
        hv = Hv // F
        for i in range(r):
            base = ((hv + qtab[fv, i]) % m) * m
            for col in range(m):
                b = base + col
                for x in range(np.int64(fill[b])):
                    ip = idx[b, x]
                    if ip >> 4 != i:
                        continue
                    code = fp[b, x]
                    if code // F != fv:
                        continue
                    fd = code % F
                    Hn = ((col - qtab[fd, ip & 15]) % m) * F + fd
                    if not seen[Hn]:
                        queue, tail = _push(queue, tail, Hn)
        if row_b >= 0:
            for e in range(bptr[row_b], bptr[row_b + 1]):
                if not seen[bdst[e]]:
                    queue, tail = _push(queue, tail, bdst[e])
    return False, visited


@njit(cache=True, nogil=True)
def tcm_expand(counters, P, frontier, cand):
    """Mask over ``cand``: some frontier node has a nonzero cell towards it in every matrix."""
    d = counters.shape[0]
    hit = np.zeros(cand.shape[0], dtype=np.bool_)
    for c in range(cand.shape[0]):
        y = cand[c]
        for f in range(frontier.shape[0]):
            x = frontier[f]
            ok = True
            for j in range(d):
                if counters[j, P[j, x], P[j, y]] <= 0:
                    ok = False
                    break
            if ok:
                hit[c] = True
                break
    return hit


@njit(cache=True, nogil=True)
def scan_rows(Hv, m, F, r, qtab, fill, idx, fp, wt):
    """Outgoing edges of ``Hv``: returns (destination H values, weights)."""
    l = idx.shape[1]
    fv = Hv % F
    hv = Hv // F
    outH = np.empty(r * m * l, dtype=np.int64)
    outW = np.empty(r * m * l, dtype=np.int64)
    n_out = 0
    for i in range(r):
        row = (hv + qtab[fv, i]) % m
        base = row * m
        for col in range(m):
            b = base + col
            for x in range(np.int64(fill[b])):
                ip = idx[b, x]
                if ip >> 4 != i:
                    continue
                code = fp[b, x]
                if code // F != fv:
                    continue
                fd = code % F
                jd = ip & 15
                hd = (col - qtab[fd, jd]) % m
                outH[n_out] = hd * F + fd
                outW[n_out] = wt[b, x]
                n_out += 1
    return outH[:n_out], outW[:n_out]


@njit(cache=True, nogil=True)
def scan_cols(Hv, m, F, r, qtab, fill, idx, fp, wt):
    """Incoming edges of ``Hv``: returns (source H values, weights)."""
    l = idx.shape[1]
    fv = Hv % F
    hv = Hv // F
    outH = np.empty(r * m * l, dtype=np.int64)
    outW = np.empty(r * m * l, dtype=np.int64)
    n_out = 0
    for j in range(r):
        col = (hv + qtab[fv, j]) % m
        for row in range(m):
            b = row * m + col
            for x in range(np.int64(fill[b])):
                ip = idx[b, x]
                if ip & 15 != j:
                    continue
                code = fp[b, x]
                if code % F != fv:
                    continue
                fs = code // F
                i_s = ip >> 4
                hs = (row - qtab[fs, i_s]) % m
                outH[n_out] = hs * F + fs
                outW[n_out] = wt[b, x]
                n_out += 1
    return outH[:n_out], outW[:n_out]


def empty_matrix(m, l):
    nb = m * m
    return (
        np.zeros(nb, dtype=np.uint8),
        np.zeros((nb, l), dtype=np.uint8),
        np.zeros((nb, l), dtype=np.uint32),
        np.zeros((nb, l), dtype=np.int64),
    )
