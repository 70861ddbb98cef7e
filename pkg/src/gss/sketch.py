"""The GSS store: an m x m matrix of multi-room buckets plus an overflow buffer."""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _kernels as K
from .hashing import SketchConfig, combined_hash, lr_table, candidate_table
from .stream import StreamItem


class PlacementKind(enum.Enum):
    ROOM = "matrix-room"
    MERGED = "merged-existing"
    BUFFER = "buffer"


@dataclass(frozen=True)
class Placement:
    kind: PlacementKind
    row: int | None = None
    col: int | None = None
    room: int | None = None


@dataclass(frozen=True)
class Room:
    occupied: bool
    index_pair: tuple[int, int] = (0, 0)
    fp_pair: tuple[int, int] = (0, 0)
    weight: int = 0


def _as_bytes(node_id: bytes | str) -> bytes:
    return node_id.encode() if isinstance(node_id, str) else node_id


class GSS:
    """Graph stream sketch.

    Insertions are single-writer.  Queries only read the matrix and buffer and
    may run concurrently once ingestion has stopped.
    """

    def __init__(self, cfg: SketchConfig):
        self.cfg = cfg
        self._q = lr_table(cfg)
        self._ctab, self._ccnt = candidate_table(cfg)
        self._fill, self._idx, self._fp, self._wt = K.empty_matrix(cfg.m, cfg.l)
        # buffer: key(s) -> {key(d): weight}, plus the reverse adjacency
        self._buf_out: dict[int, dict[int, int]] = {}
        self._buf_in: dict[int, set[int]] = {}
        self._buf_edges = 0
        self._buf_csr = None
        # reverse ID table H -> original IDs, and the forward cache ID -> H
        self._ids: dict[int, set[bytes]] = defaultdict(set)
        self._H: dict[bytes, int] = {}
        self.items_seen = 0

    # -- hashing -----------------------------------------------------------

    def node_hash(self, node_id: bytes | str) -> int:
        """Combined hash ``H`` of a node; cached for nodes already inserted."""
        node_id = _as_bytes(node_id)
        H = self._H.get(node_id)
        if H is None:
            if not node_id:
                raise ValueError("node id must be non-empty")
            H = combined_hash(node_id, self.cfg)
        return H

    def _register(self, node_id: bytes) -> int:
        H = self._H.get(node_id)
        if H is None:
            if not node_id:
                raise ValueError("node id must be non-empty")
            H = combined_hash(node_id, self.cfg)
            self._H[node_id] = H
            self._ids[H].add(node_id)
        return H

    def ids_for(self, H: int) -> frozenset[bytes]:
        return frozenset(self._ids.get(H, ()))

    def knows(self, node_id: bytes | str) -> bool:
        return _as_bytes(node_id) in self._H

    def has_hash(self, H: int) -> bool:
        return H in self._ids

    @property
    def hash_values(self) -> set[int]:
        return set(self._ids)

    # -- updates -----------------------------------------------------------

    def _buffer_add(self, ks: int, kd: int, w: int) -> None:
        row = self._buf_out.setdefault(ks, {})
        if kd in row:
            row[kd] += w
        else:
            row[kd] = w
            self._buf_in.setdefault(kd, set()).add(ks)
            self._buf_edges += 1
            self._buf_csr = None

    def _apply(self, Hs: np.ndarray, Hd: np.ndarray, w: np.ndarray):
        cfg = self.cfg
        n = len(Hs)
        kind = np.empty(n, dtype=np.int8)
        slot = np.empty(n, dtype=np.int64)
        K.insert_batch(Hs, Hd, w, cfg.m, cfg.F, cfg.r, self._q, self._ctab, self._ccnt,
                       self._fill, self._idx, self._fp, self._wt, kind, slot)
        for t in np.flatnonzero(kind == K.TO_BUFFER):
            self._buffer_add(int(Hs[t]), int(Hd[t]), int(w[t]))
        self.items_seen += n
        return kind, slot

    def insert(self, item: StreamItem) -> Placement:
        Hs = self._register(item.s)
        Hd = self._register(item.d)
        kind, slot = self._apply(
            np.array([Hs], dtype=np.int64),
            np.array([Hd], dtype=np.int64),
            np.array([item.w], dtype=np.int64),
        )
        if kind[0] == K.TO_BUFFER:
            return Placement(PlacementKind.BUFFER)
        b, room = divmod(int(slot[0]), self.cfg.l)
        row, col = divmod(b, self.cfg.m)
        pk = PlacementKind.ROOM if kind[0] == K.ROOM_NEW else PlacementKind.MERGED
        return Placement(pk, row, col, room)

    def ingest(self, items: Iterable[StreamItem], batch: int = 1 << 16) -> int:
        """Insert a stream in order; returns the number of items consumed."""
        reg = self._register
        hs: list[int] = []
        hd: list[int] = []
        ws: list[int] = []
        total = 0
        for it in items:
            hs.append(reg(it.s))
            hd.append(reg(it.d))
            ws.append(it.w)
            if len(hs) >= batch:
                self._apply(np.array(hs, np.int64), np.array(hd, np.int64), np.array(ws, np.int64))
                total += len(hs)
                hs, hd, ws = [], [], []
        if hs:
            self._apply(np.array(hs, np.int64), np.array(hd, np.int64), np.array(ws, np.int64))
            total += len(hs)
        return total

    # -- primitives on hash values ------------------------------------------

    def edge_weight_h(self, Hs: int, Hd: int) -> int | None:
        cfg = self.cfg
        slot = np.empty(1, dtype=np.int64)
        K.probe_batch(np.array([Hs], np.int64), np.array([Hd], np.int64), cfg.m, cfg.F, cfg.r,
                      self._q, self._ctab, self._ccnt, self._fill, self._idx, self._fp, slot)
        if slot[0] >= 0:
            b, x = divmod(int(slot[0]), cfg.l)
            return int(self._wt[b, x])
        return self._buf_out.get(Hs, {}).get(Hd)

    def edge_weights_h(self, Hs: np.ndarray, Hd: np.ndarray) -> list[int | None]:
        """Batched ``edge_weight_h``."""
        cfg = self.cfg
        Hs = np.asarray(Hs, dtype=np.int64)
        Hd = np.asarray(Hd, dtype=np.int64)
        slot = np.empty(len(Hs), dtype=np.int64)
        K.probe_batch(Hs, Hd, cfg.m, cfg.F, cfg.r, self._q, self._ctab, self._ccnt,
                      self._fill, self._idx, self._fp, slot)
        flat = self._wt.reshape(-1)
        out: list[int | None] = []
        for t, s in enumerate(slot):
            if s >= 0:
                out.append(int(flat[s]))
            else:
                out.append(self._buf_out.get(int(Hs[t]), {}).get(int(Hd[t])))
        return out

    def buffer_csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Buffer adjacency as (sorted source keys, row pointers, destination keys)."""
        if self._buf_csr is None:
            keys = sorted(self._buf_out)
            ptr = np.zeros(len(keys) + 1, dtype=np.int64)
            dst: list[int] = []
            for i, k in enumerate(keys):
                dst.extend(self._buf_out[k])
                ptr[i + 1] = len(dst)
            self._buf_csr = (np.array(keys, dtype=np.int64), ptr, np.array(dst, dtype=np.int64))
        return self._buf_csr

    def out_edges_h(self, Hv: int) -> dict[int, int]:
        """Successor H values of ``Hv`` in the sketch graph with edge weights."""
        cfg = self.cfg
        hh, ww = K.scan_rows(Hv, cfg.m, cfg.F, cfg.r, self._q, self._fill, self._idx, self._fp, self._wt)
        out = dict(zip(hh.tolist(), ww.tolist()))
        buf = self._buf_out.get(Hv)
        if buf:
            out.update(buf)
        return out

    def in_edges_h(self, Hv: int) -> set[int]:
        cfg = self.cfg
        hh, _ = K.scan_cols(Hv, cfg.m, cfg.F, cfg.r, self._q, self._fill, self._idx, self._fp, self._wt)
        out = set(hh.tolist())
        out.update(self._buf_in.get(Hv, ()))
        return out

    # -- primitives on original IDs ------------------------------------------

    def edge_weight(self, s: bytes | str, d: bytes | str) -> int | None:
        """Accumulated weight of the sketch edge ``(H(s), H(d))``; ``None`` if absent."""
        return self.edge_weight_h(self.node_hash(s), self.node_hash(d))

    def successors(self, v: bytes | str) -> dict[int, frozenset[bytes]]:
        """1-hop successors as ``{H: original IDs}``; empty when there are none."""
        return {H: self.ids_for(H) for H in self.out_edges_h(self.node_hash(v))}

    def precursors(self, v: bytes | str) -> dict[int, frozenset[bytes]]:
        return {H: self.ids_for(H) for H in self.in_edges_h(self.node_hash(v))}

    # -- introspection ---------------------------------------------------------

    def room(self, row: int, col: int, j: int) -> Room:
        b = row * self.cfg.m + col
        if j >= self._fill[b]:
            return Room(False)
        ip = int(self._idx[b, j])
        code = int(self._fp[b, j])
        F = self.cfg.F
        return Room(True, (ip >> 4, ip & 15), (code // F, code % F), int(self._wt[b, j]))

    @property
    def occupied_rooms(self) -> int:
        return int(self._fill.sum(dtype=np.int64))

    @property
    def buffer_edges(self) -> int:
        return self._buf_edges

    def buffer_stats(self) -> tuple[int, int, float]:
        """(left-over edges, distinct sketch edges, buffer fraction)."""
        left = self._buf_edges
        total = self.occupied_rooms + left
        return left, total, (left / total if total else 0.0)

    def memory_bytes(self) -> int:
        return matrix_bytes(self.cfg)


def matrix_bytes(cfg: SketchConfig) -> int:
    """Nominal matrix size: per room one index-pair byte, two fingerprints, a 4-byte weight."""
    fp_bytes = 2 * ((cfg.fbits + 7) // 8)
    return cfg.m * cfg.m * cfg.l * (1 + fp_bytes + 4)
