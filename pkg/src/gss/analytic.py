"""Closed-form accuracy and buffer estimates for hash-compressed graph sketches."""

from __future__ import annotations

import math

MAX_ROOMS = 8


def collision_free_rate(E: float, D: float, M: float) -> float:
    """Probability an edge shares its hashed image with no other edge.

    ``E`` edges in total, ``D`` of them share an endpoint with the queried
    edge, node hashes uniform over ``M`` values:
    ``exp(-(E + (M - 1) * D) / M**2)``.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    return math.exp(-(E + (M - 1) * D) / (M * M))


analytic_collision_rate = collision_free_rate


def _log_binom(n: float, k: int) -> float:
    if k < 0 or k > n:
        return -math.inf
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def bucket_available(N: float, D: float, m: int, r: int, l: int) -> float:
    """Lower bound on the chance one candidate bucket still has a free room.

    ``N - D`` non-adjacent edges land uniformly on ``m*m`` buckets and the
    ``D`` adjacent ones on ``r*m``; the bucket is available when fewer than
    ``l`` of them landed there.
    """
    if l > MAX_ROOMS:
        raise ValueError(f"l={l} too large (max {MAX_ROOMS})")
    if not 0 <= D <= N:
        raise ValueError("need 0 <= D <= N")
    if m < 1 or r < 1:
        raise ValueError("m and r must be >= 1")
    n1 = N - D
    area1 = m * m
    area2 = r * m
    total = 0.0
    for n in range(l):
        for a in range(n + 1):
            lt = (
                _log_binom(n1, a)
                + _log_binom(D, n - a)
                - a * math.log(area1)
                - (n - a) * math.log(area2)
                - (n1 - a) / area1
                - (D - n + a) / area2
            )
            total += math.exp(lt)
    return min(total, 1.0)


def insertion_failure(N: float, D: float, m: int, r: int, l: int, k: int) -> float:
    """Upper bound on the chance a new edge is left over: all ``k`` candidates full."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return (1.0 - bucket_available(N, D, m, r, l)) ** k


analytic_insertion_failure = insertion_failure
