"""Compound queries over a GSS: node out-weight and BFS reachability."""

from __future__ import annotations

from collections import deque
from typing import NamedTuple

import numpy as np

from . import _kernels as K
from .sketch import GSS


# byte map over every key; above this many keys fall back to a Python set
_BITMAP_LIMIT = 1 << 30


class ReachResult(NamedTuple):
    reachable: bool
    visited_count: int


def node_out_weight(v: bytes | str, sketch: GSS) -> int:
    """Total weight of edges leaving ``H(v)``; 0 for a node with no edges."""
    return sum(sketch.out_edges_h(sketch.node_hash(v)).values())


def reachable_h(Hs: int, Hd: int, sketch: GSS) -> ReachResult:
    """BFS over sketch node keys from ``Hs`` towards ``Hd``.

    Each dequeued key is first tested for a direct edge to ``Hd``, then its
    ``r`` rows and buffer list are expanded.
    """
    cfg = sketch.cfg
    if cfg.M > _BITMAP_LIMIT:
        return reachable_h_py(Hs, Hd, sketch)
    bk, bp, bd = sketch.buffer_csr()
    seen = np.zeros(cfg.M, dtype=np.uint8)
    found, visited = K.bfs_reach(Hs, Hd, cfg.m, cfg.F, cfg.r, sketch._q, sketch._ctab,
                                 sketch._ccnt, sketch._fill, sketch._idx, sketch._fp,
                                 bk, bp, bd, seen)
    return ReachResult(bool(found), int(visited))


def reachable_h_py(Hs: int, Hd: int, sketch: GSS) -> ReachResult:
    """Pure-Python BFS over the public primitives; same answer as ``reachable_h``."""
    seen: set[int] = set()
    queue = deque([Hs])
    while queue:
        Hv = queue.popleft()
        if Hv in seen:
            continue
        seen.add(Hv)
        if sketch.edge_weight_h(Hv, Hd) is not None:
            return ReachResult(True, len(seen))
        for Hn in sketch.out_edges_h(Hv):
            if Hn not in seen:
                queue.append(Hn)
    return ReachResult(False, len(seen))


def reachable(s: bytes | str, d: bytes | str, sketch: GSS) -> ReachResult:
    """Is there a path from ``s`` to ``d`` in the sketch graph?

    A node reaches itself when it was ever inserted.  No false negatives with
    respect to the original stream graph.
    """
    Hs = sketch.node_hash(s)
    Hd = sketch.node_hash(d)
    if Hs == Hd:
        present = sketch.has_hash(Hs)
        return ReachResult(present, int(present))
    return reachable_h(Hs, Hd, sketch)
