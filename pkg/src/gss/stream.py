"""Edge-list ingestion and deterministic synthetic graph streams."""

from __future__ import annotations

import gzip
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, TextIO

import numpy as np


@dataclass(frozen=True, slots=True)
class StreamItem:
    s: bytes
    d: bytes
    w: int = 1
    t: int | None = None

    def __post_init__(self) -> None:
        if not self.s or not self.d:
            raise ValueError("stream item endpoints must be non-empty")


class StreamParseError(ValueError):
    def __init__(self, path, lineno: int, msg: str):
        super().__init__(f"{path}:{lineno}: {msg}")
        self.lineno = lineno


def _open_text(path: Path):
    if path.suffix == ".gz":
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8")
    return open(path, encoding="utf-8")


def iter_stream(path: str | Path) -> Iterator[StreamItem]:
    """Yield items from a whitespace-separated ``src dst [weight] [timestamp]`` file.

    Blank lines and ``#`` comments are skipped.  A missing weight is 1 and a
    missing timestamp is the 1-based line number.
    """
    path = Path(path)
    with _open_text(path) as fh:
        for lineno, line in enumerate(fh, 1):
            body = line.split("#", 1)[0].split()
            if not body:
                continue
            if len(body) < 2 or len(body) > 4:
                raise StreamParseError(path, lineno, f"expected 2-4 fields, got {len(body)}")
            try:
                w = int(body[2]) if len(body) > 2 else 1
                t = int(body[3]) if len(body) > 3 else lineno
            except ValueError as e:
                raise StreamParseError(path, lineno, str(e)) from None
            yield StreamItem(body[0].encode(), body[1].encode(), w, t)


def parse_stream(path: str | Path) -> list[StreamItem]:
    return list(iter_stream(path))


def format_item(it: StreamItem) -> str:
    parts = [it.s.decode(), it.d.decode(), str(it.w)]
    if it.t is not None:
        parts.append(str(it.t))
    return " ".join(parts)


def _write_lines(items: Iterable[StreamItem], fh: TextIO) -> int:
    n = 0
    for it in items:
        fh.write(format_item(it))
        fh.write("\n")
        n += 1
    return n


def write_stream(items: Iterable[StreamItem], dest: str | Path | TextIO) -> int:
    """Write items one per line to a path (``.gz`` compresses) or an open text stream."""
    if hasattr(dest, "write"):
        return _write_lines(items, dest)
    path = Path(dest)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "wt", encoding="utf-8") as fh:
        return _write_lines(items, fh)


@dataclass(frozen=True)
class SynthSpec:
    """Synthetic stream shape.

    ``n_edges`` distinct directed edges (no self loops) are drawn with
    endpoints following a power-law node popularity of exponent
    ``degree_skew``.  Each edge appears once, then ``repeat_ratio * n_edges``
    extra weight-1 items are spread over the edges by a Zipf law of exponent
    ``zipf_exponent`` over a random edge ranking.
    """

    n_nodes: int
    n_edges: int
    zipf_exponent: float = 1.0
    degree_skew: float = 0.8
    rng_seed: int = 0
    repeat_ratio: float = 1.0

    def __post_init__(self) -> None:
        if self.n_nodes < 2:
            raise ValueError("n_nodes must be >= 2")
        if self.n_edges < 1:
            raise ValueError("n_edges must be >= 1")
        if self.n_edges > self.n_nodes * (self.n_nodes - 1):
            raise ValueError("more edges than a simple digraph on n_nodes can hold")
        if self.zipf_exponent <= 0 or self.degree_skew <= 0:
            raise ValueError("exponents must be positive")
        if self.repeat_ratio < 0:
            raise ValueError("repeat_ratio must be non-negative")


def _rank_cdf(n: int, exponent: float) -> np.ndarray:
    w = np.arange(1, n + 1, dtype=np.float64) ** -exponent
    c = np.cumsum(w)
    return c / c[-1]


def _draw(cdf: np.ndarray, rng: np.random.Generator, size: int) -> np.ndarray:
    # inverse CDF on the rank table; clip guards the u ~ 1.0 rounding edge
    return np.minimum(np.searchsorted(cdf, rng.random(size), side="right"), len(cdf) - 1)


def synth_edges(spec: SynthSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Distinct edges ``(src, dst)`` as node indices, and each edge's multiplicity."""
    rng = np.random.default_rng(spec.rng_seed)
    n = spec.n_nodes
    cdf = _rank_cdf(n, spec.degree_skew)
    # separate popularity orders for senders and receivers
    out_rank = rng.permutation(n)
    in_rank = rng.permutation(n)

    seen: set[int] = set()
    src: list[int] = []
    dst: list[int] = []
    attempts = 0
    while len(src) < spec.n_edges:
        need = spec.n_edges - len(src)
        attempts += need
        if attempts > 200 * spec.n_edges + 10_000:
            raise ValueError("degree skew too high to draw that many distinct edges")
        batch = max(2 * need, 1024)
        s = out_rank[_draw(cdf, rng, batch)]
        d = in_rank[_draw(cdf, rng, batch)]
        for a, b in zip(s.tolist(), d.tolist()):
            if a == b:
                continue
            key = a * n + b
            if key in seen:
                continue
            seen.add(key)
            src.append(a)
            dst.append(b)
            if len(src) == spec.n_edges:
                break

    mult = np.ones(spec.n_edges, dtype=np.int64)
    extra = int(round(spec.repeat_ratio * spec.n_edges))
    if extra:
        edge_rank = rng.permutation(spec.n_edges)
        picks = edge_rank[_draw(_rank_cdf(spec.n_edges, spec.zipf_exponent), rng, extra)]
        mult += np.bincount(picks, minlength=spec.n_edges)
    return np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64), mult


def node_name(i: int) -> bytes:
    return b"n%d" % i


def synthesize(spec: SynthSpec) -> list[StreamItem]:
    """Deterministic stream of weight-1 items in shuffled arrival order."""
    src, dst, mult = synth_edges(spec)
    rng = np.random.default_rng([spec.rng_seed, 1])
    order = rng.permutation(np.repeat(np.arange(len(src)), mult))
    names = [node_name(i) for i in range(spec.n_nodes)]
    s_l = src.tolist()
    d_l = dst.tolist()
    return [StreamItem(names[s_l[e]], names[d_l[e]], 1, t) for t, e in enumerate(order.tolist())]
