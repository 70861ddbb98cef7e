"""Exact reference graphs used as ground truth.

``ExactGraph`` accumulates the stream graph over original node IDs.
``HashedGraph`` accumulates the same stream after mapping every node through
a hash function, i.e. the graph a lossless sketch with that hash would hold.
"""

from __future__ import annotations

from collections import deque
from typing import Callable, Generic, Hashable, Iterable, TypeVar

from .stream import StreamItem

N = TypeVar("N", bound=Hashable)


class _Adjacency(Generic[N]):
    def __init__(self) -> None:
        self.out: dict[N, dict[N, int]] = {}
        self.inc: dict[N, set[N]] = {}
        self.nodes: set[N] = set()

    def add(self, s: N, d: N, w: int) -> None:
        self.nodes.add(s)
        self.nodes.add(d)
        row = self.out.setdefault(s, {})
        if d in row:
            row[d] += w
        else:
            row[d] = w
            self.inc.setdefault(d, set()).add(s)

    def edge_weight(self, s: N, d: N) -> int | None:
        return self.out.get(s, {}).get(d)

    def successors(self, v: N) -> set[N]:
        return set(self.out.get(v, ()))

    def precursors(self, v: N) -> set[N]:
        return set(self.inc.get(v, ()))

    def out_weight(self, v: N) -> int:
        return sum(self.out.get(v, {}).values())

    def edges(self) -> Iterable[tuple[N, N, int]]:
        for s, row in self.out.items():
            for d, w in row.items():
                yield s, d, w

    @property
    def n_edges(self) -> int:
        return sum(len(row) for row in self.out.values())

    def reach_set(self, s: N) -> set[N]:
        """Nodes reachable from ``s`` by a path of length >= 0."""
        seen = {s}
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for u in self.out.get(v, ()):
                if u not in seen:
                    seen.add(u)
                    queue.append(u)
        return seen

    def reachable(self, s: N, d: N) -> bool:
        if s == d:
            return s in self.nodes
        return d in self.reach_set(s)


class ExactGraph(_Adjacency[bytes]):
    @classmethod
    def from_stream(cls, items: Iterable[StreamItem]) -> "ExactGraph":
        g = cls()
        for it in items:
            g.add(it.s, it.d, it.w)
        return g

    def degree_sums(self) -> dict[tuple[bytes, bytes], int]:
        """For each edge, the number of other edges sharing its source or destination."""
        outdeg = {v: len(row) for v, row in self.out.items()}
        indeg = {v: len(src) for v, src in self.inc.items()}
        return {(s, d): outdeg[s] + indeg[d] - 2 for s, d, _ in self.edges()}


class HashedGraph(_Adjacency[int]):
    def __init__(self, hash_fn: Callable[[bytes], int]):
        super().__init__()
        self._hash = hash_fn
        self._cache: dict[bytes, int] = {}

    def H(self, node_id: bytes) -> int:
        h = self._cache.get(node_id)
        if h is None:
            h = self._cache[node_id] = self._hash(node_id)
        return h

    def add_item(self, it: StreamItem) -> None:
        self.add(self.H(it.s), self.H(it.d), it.w)

    @classmethod
    def from_stream(cls, items: Iterable[StreamItem], hash_fn: Callable[[bytes], int]) -> "HashedGraph":
        g = cls(hash_fn)
        for it in items:
            g.add_item(it)
        return g
