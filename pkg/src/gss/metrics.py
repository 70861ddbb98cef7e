"""Accuracy metrics for weight, neighbourhood and reachability queries."""

from __future__ import annotations

from typing import Iterable, Sequence


class MetricError(ValueError):
    pass


def are(estimates: Iterable[tuple[float, float]]) -> float:
    """Average relative error ``mean(est / true - 1)``; every true value must be positive."""
    total = 0.0
    n = 0
    for true, est in estimates:
        if true <= 0:
            raise MetricError(f"relative error undefined for true value {true}")
        total += est / true - 1
        n += 1
    return total / n if n else 0.0


def aae(estimates: Iterable[tuple[float, float]]) -> float:
    """Average signed error ``mean(est - true)``."""
    total = 0.0
    n = 0
    for true, est in estimates:
        total += est - true
        n += 1
    return total / n if n else 0.0


def precision(exact: set, reported: set) -> float:
    if not exact <= reported:
        missing = len(exact - reported)
        raise MetricError(f"reported set misses {missing} true members")
    if not reported:
        return 1.0
    return len(exact) / len(reported)


def avg_precision(results: Iterable[tuple[set, set]]) -> float:
    vals = [precision(ss, rep) for ss, rep in results]
    return sum(vals) / len(vals) if vals else 1.0


def true_negative_recall(answers: Sequence[bool]) -> float:
    """Fraction of truly unreachable pairs answered as unreachable (``False``)."""
    if not answers:
        return 1.0
    return sum(1 for a in answers if not a) / len(answers)
