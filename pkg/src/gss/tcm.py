"""TCM baseline: ``d`` independently hashed ``m x m`` counter matrices.

Weights are added to cell ``(H_j(s), H_j(d))`` of every matrix ``j`` and
queries take the minimum (or, for topology, the intersection) across
matrices.  Node-level topology answers need candidate node IDs, so the
sketch also records every ID it has seen.
"""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from ._kernels import tcm_expand
from .hashing import hash64
from .stream import StreamItem

COUNTER_BYTES = 4


def side_for_memory(memory_bytes: float, d: int) -> int:
    """Largest matrix side whose ``d`` matrices fit in ``memory_bytes``."""
    return max(1, math.isqrt(int(memory_bytes // (COUNTER_BYTES * d))))


class TCM:
    def __init__(self, m: int, d: int = 4, seed: int = 0):
        if m < 1 or d < 1:
            raise ValueError("m and d must be >= 1")
        self.m = m
        self.d = d
        self.seeds = [int(x) for x in np.random.SeedSequence(seed).generate_state(d, dtype=np.uint64)]
        self.counters = np.zeros((d, m, m), dtype=np.int64)
        self._index: dict[bytes, int] = {}
        self._ids: list[bytes] = []
        self._pos: list[np.ndarray] = []
        self._pos_arr: np.ndarray | None = None

    def positions(self, node_id: bytes | str) -> np.ndarray:
        """``H_j(node)`` for every matrix ``j``."""
        if isinstance(node_id, str):
            node_id = node_id.encode()
        i = self._index.get(node_id)
        if i is not None:
            return self._pos[i]
        return np.array([hash64(node_id, s) % self.m for s in self.seeds], dtype=np.int64)

    def _register(self, node_id: bytes) -> int:
        i = self._index.get(node_id)
        if i is None:
            i = self._index[node_id] = len(self._ids)
            self._ids.append(node_id)
            self._pos.append(np.array([hash64(node_id, s) % self.m for s in self.seeds], dtype=np.int64))
            self._pos_arr = None
        return i

    def _all_positions(self) -> np.ndarray:
        """``(d, n_nodes)`` matrix of positions of every known node."""
        if self._pos_arr is None:
            self._pos_arr = (np.stack(self._pos, axis=1) if self._pos
                             else np.zeros((self.d, 0), dtype=np.int64))
        return self._pos_arr

    def insert(self, item: StreamItem) -> None:
        ps = self._pos[self._register(item.s)]
        pd = self._pos[self._register(item.d)]
        self.counters[np.arange(self.d), ps, pd] += item.w

    def ingest(self, items: Iterable[StreamItem]) -> int:
        src: list[int] = []
        dst: list[int] = []
        ws: list[int] = []
        reg = self._register
        for it in items:
            src.append(reg(it.s))
            dst.append(reg(it.d))
            ws.append(it.w)
        if src:
            P = self._all_positions()
            s = np.array(src)
            t = np.array(dst)
            w = np.array(ws, dtype=np.int64)
            for j in range(self.d):
                np.add.at(self.counters[j], (P[j, s], P[j, t]), w)
        return len(src)

    def edge_weight(self, s: bytes | str, d: bytes | str) -> int:
        ps, pd = self.positions(s), self.positions(d)
        return int(self.counters[np.arange(self.d), ps, pd].min())

    def node_out_weight(self, v: bytes | str) -> int:
        pv = self.positions(v)
        return int(min(self.counters[j, pv[j]].sum() for j in range(self.d)))

    def _out_mask(self, pv: np.ndarray, P: np.ndarray) -> np.ndarray:
        mask = self.counters[0, pv[0], P[0]] > 0
        for j in range(1, self.d):
            mask &= self.counters[j, pv[j], P[j]] > 0
        return mask

    def _in_mask(self, pv: np.ndarray, P: np.ndarray) -> np.ndarray:
        mask = self.counters[0, P[0], pv[0]] > 0
        for j in range(1, self.d):
            mask &= self.counters[j, P[j], pv[j]] > 0
        return mask

    def successors(self, v: bytes | str) -> set[bytes]:
        """Known nodes ``y`` with a nonzero ``(v, y)`` cell in every matrix."""
        mask = self._out_mask(self.positions(v), self._all_positions())
        return {self._ids[i] for i in np.flatnonzero(mask)}

    def precursors(self, v: bytes | str) -> set[bytes]:
        mask = self._in_mask(self.positions(v), self._all_positions())
        return {self._ids[i] for i in np.flatnonzero(mask)}

    def reachable(self, s: bytes | str, d: bytes | str) -> bool:
        """BFS over known nodes using the intersected successor relation."""
        s = s.encode() if isinstance(s, str) else s
        d = d.encode() if isinstance(d, str) else d
        if s == d:
            return s in self._index
        ps, pd = self.positions(s), self.positions(d)
        if self.counters[np.arange(self.d), ps, pd].min() > 0:
            return True
        P = self._all_positions()
        into_d = self._in_mask(pd, P)
        visited = np.zeros(P.shape[1], dtype=bool)
        if s in self._index:
            visited[self._index[s]] = True
        frontier = np.flatnonzero(self._out_mask(ps, P) & ~visited)
        while frontier.size:
            if into_d[frontier].any():
                return True
            visited[frontier] = True
            cand = np.flatnonzero(~visited)
            if not cand.size:
                break
            frontier = cand[tcm_expand(self.counters, P, frontier, cand)]
        return False

    def memory_bytes(self) -> int:
        return self.d * self.m * self.m * COUNTER_BYTES
