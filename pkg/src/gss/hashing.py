"""Node hashing, linear-congruential address sequences and hash recovery.

Every node is reduced to a combined hash ``H`` in ``[0, m*F)`` which splits
into a matrix address ``h = H // F`` and a fingerprint ``f = H % F``.  The
fingerprint seeds a linear congruential (LR) sequence ``q`` and the node's
``r`` row/column addresses are ``(h + q[i]) % m``.  Because ``h < m`` the
original ``H`` can be recovered from ``(f, i, address)`` alone.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

MAX_R = 16
MAX_F = 1 << 16

# Multipliers tried (reduced mod p) when no explicit LCG constants are given.
_MULTIPLIERS = (48271, 16807, 69069, 40692, 39373, 1103515245, 22695477, 134775813)
_INCREMENTS = (3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


class ConfigError(ValueError):
    """Raised for an invalid sketch configuration."""


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def next_prime(n: int) -> int:
    """Smallest prime strictly greater than ``n``."""
    c = n + 1
    while not _is_prime(c):
        c += 1
    return c


def _lr_table(seeds: np.ndarray, a: int, b: int, p: int, length: int) -> np.ndarray:
    out = np.empty((len(seeds), length), dtype=np.int64)
    q = seeds.astype(np.int64)
    for i in range(length):
        q = (a * q + b) % p
        out[:, i] = q
    return out


def _has_repeats(table: np.ndarray) -> bool:
    srt = np.sort(table, axis=1)
    return bool((srt[:, 1:] == srt[:, :-1]).any())


def _pick_lcg(m: int, F: int, r: int) -> tuple[int, int, int]:
    p = next_prime(max(m, F))
    while True:
        for a0 in _MULTIPLIERS:
            a = a0 % p
            if a in (0, 1):
                continue
            # ord(a) >= r: no cycle shorter than the sequence
            x, short = 1, False
            for _ in range(1, r):
                x = x * a % p
                if x == 1:
                    short = True
                    break
            if short:
                continue
            inv = pow((1 - a) % p, -1, p)
            for b in _INCREMENTS:
                if b % p == 0:
                    continue
                fixed = b * inv % p
                # a seed equal to the fixed point would give a constant sequence
                if fixed >= F:
                    return a, b, p
        p = next_prime(p)


@dataclass(frozen=True)
class SketchConfig:
    """All GSS parameters.

    ``F`` is the fingerprint range, ``r`` the address-sequence length, ``k``
    the number of candidate buckets probed per edge and ``l`` the rooms per
    bucket.  ``a``, ``b``, ``p`` are the LCG multiplier, increment and modulus.
    """

    m: int
    F: int
    r: int
    k: int
    l: int
    a: int
    b: int
    p: int
    hash_seed: int = 0

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ConfigError(f"m must be >= 1, got {self.m}")
        if not 2 <= self.F <= MAX_F:
            raise ConfigError(f"F must be in [2, {MAX_F}], got {self.F}")
        if not 1 <= self.r <= MAX_R:
            raise ConfigError(f"r must be in [1, {MAX_R}], got {self.r}")
        if not 1 <= self.k <= self.r * self.r:
            raise ConfigError(f"k must be in [1, r*r={self.r * self.r}], got {self.k}")
        if not 1 <= self.l <= 255:
            raise ConfigError(f"l must be in [1, 255], got {self.l}")
        if self.p <= self.m:
            raise ConfigError(f"p must exceed m ({self.p} <= {self.m})")
        if not 0 <= self.hash_seed < 1 << 64:
            raise ConfigError("hash_seed must be a 64-bit unsigned integer")
        if self.a < 0 or self.b < 0:
            raise ConfigError("LCG constants must be non-negative")
        if _has_repeats(lr_table(self)):
            raise ConfigError(
                f"LCG (a={self.a}, b={self.b}, p={self.p}) repeats within r={self.r} terms"
            )

    @classmethod
    def create(
        cls,
        m: int,
        fbits: int = 16,
        r: int = 16,
        k: int = 16,
        l: int = 2,
        *,
        a: int | None = None,
        b: int | None = None,
        p: int | None = None,
        hash_seed: int = 0,
    ) -> "SketchConfig":
        """Build a config from a fingerprint bit width, choosing LCG constants if absent."""
        if not 1 <= fbits <= 16:
            raise ConfigError(f"fbits must be in [1, 16], got {fbits}")
        F = 1 << fbits
        if a is None or b is None or p is None:
            if not (a is None and b is None and p is None):
                raise ConfigError("give all of a, b, p or none of them")
            if m < 1 or not 1 <= r <= MAX_R:
                raise ConfigError(f"bad m={m} or r={r}")
            a, b, p = _pick_lcg(m, F, r)
        return cls(m=m, F=F, r=r, k=k, l=l, a=a, b=b, p=p, hash_seed=hash_seed)

    @property
    def M(self) -> int:
        return self.m * self.F

    @property
    def fbits(self) -> int:
        return (self.F - 1).bit_length()


class NodeRef(NamedTuple):
    H: int
    h: int
    f: int


class AddressSeq(NamedTuple):
    q: tuple[int, ...]
    addrs: tuple[int, ...]


class CandidateSeq(NamedTuple):
    pairs: tuple[tuple[int, int], ...]


def _key_bytes(seed: int) -> bytes:
    return seed.to_bytes(8, "little")


def hash64(node_id: bytes | str, seed: int) -> int:
    """Keyed 64-bit BLAKE2b digest of a node ID."""
    if isinstance(node_id, str):
        node_id = node_id.encode()
    d = hashlib.blake2b(node_id, digest_size=8, key=_key_bytes(seed)).digest()
    return int.from_bytes(d, "little")


def decompose(H: int, cfg: SketchConfig) -> NodeRef:
    return NodeRef(H, H // cfg.F, H % cfg.F)


def combined_hash(node_id: bytes | str, cfg: SketchConfig) -> int:
    x = hash64(node_id, cfg.hash_seed)
    f = x % cfg.F
    h = (x // cfg.F) % cfg.m
    return h * cfg.F + f


def hash_node(node_id: bytes | str, cfg: SketchConfig) -> NodeRef:
    if not node_id:
        raise ValueError("node id must be non-empty")
    return decompose(combined_hash(node_id, cfg), cfg)


def node_key(node: NodeRef, cfg: SketchConfig) -> int:
    return node.h * cfg.F + node.f


def lr_sequence(seed_val: int, cfg: SketchConfig, length: int) -> list[int]:
    out = []
    q = seed_val
    for _ in range(length):
        q = (cfg.a * q + cfg.b) % cfg.p
        out.append(q)
    return out


def address_sequence(node: NodeRef, cfg: SketchConfig) -> AddressSeq:
    q = lr_sequence(node.f, cfg, cfg.r)
    return AddressSeq(tuple(q), tuple((node.h + x) % cfg.m for x in q))


def recover_hash(f: int, idx: int, pos: int, cfg: SketchConfig) -> int:
    """Invert ``pos = (h + q[idx]) % m`` for ``h`` and return ``h*F + f``."""
    q = lr_sequence(f, cfg, idx + 1)[idx]
    return ((pos - q) % cfg.m) * cfg.F + f


def candidate_buckets(fs: int, fd: int, cfg: SketchConfig) -> CandidateSeq:
    Q = lr_sequence(fs + fd, cfg, cfg.k)
    r = cfg.r
    return CandidateSeq(tuple(((x // r) % r, x % r) for x in Q))


# Precomputed tables used by the compiled kernels.  SketchConfig is frozen and
# hashable, so one set of tables is shared by every sketch with equal config.


@lru_cache(maxsize=32)
def lr_table(cfg: SketchConfig) -> np.ndarray:
    """``(F, r)`` array: row ``f`` is ``lr_sequence(f, cfg, r)``."""
    return _lr_table(np.arange(cfg.F), cfg.a, cfg.b, cfg.p, cfg.r)


@lru_cache(maxsize=32)
def candidate_table(cfg: SketchConfig) -> tuple[np.ndarray, np.ndarray]:
    """Deduplicated candidate pairs for every edge seed ``fs + fd`` in ``[0, 2F-1)``.

    Returns ``(codes, counts)``: ``codes[s, :counts[s]]`` holds ``i*r + j`` in
    probe order with later repeats of a pair dropped.
    """
    r, k = cfg.r, cfg.k
    Q = _lr_table(np.arange(2 * cfg.F - 1), cfg.a, cfg.b, cfg.p, k)
    codes = ((Q // r) % r) * r + (Q % r)
    keep = np.ones(codes.shape, dtype=bool)
    for t in range(1, k):
        keep[:, t] = ~(codes[:, :t] == codes[:, t : t + 1]).any(axis=1)
    counts = keep.sum(axis=1).astype(np.int64)
    order = np.argsort(~keep, axis=1, kind="stable")
    packed = np.take_along_axis(codes, order, axis=1).astype(np.int16)
    packed[np.arange(k)[None, :] >= counts[:, None]] = -1
    return packed, counts
