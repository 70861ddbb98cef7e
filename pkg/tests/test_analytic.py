import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gss.analytic import bucket_available, collision_free_rate, insertion_failure


def _available_exact(N, D, m, r, l):
    """Same double sum with exact integer binomials; only viable for small N."""
    n1 = N - D
    total = 0.0
    for n in range(l):
        for a in range(n + 1):
            if a > n1 or n - a > D:
                continue
            coef = Fraction(math.comb(n1, a), (m * m) ** a) * Fraction(math.comb(D, n - a), (r * m) ** (n - a))
            total += float(coef) * math.exp(-(n1 - a) / (m * m) - (D - n + a) / (r * m))
    return total


def test_collision_examples():
    assert collision_free_rate(5e5, 200, 1000 * 256) == pytest.approx(0.9992, abs=2e-4)
    assert collision_free_rate(5e5, 200, 1000) == pytest.approx(0.497, abs=2e-3)
    assert collision_free_rate(10, 0, 1e12) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        collision_free_rate(1, 1, 0)


@given(st.floats(0, 1e6), st.floats(0, 1e4), st.floats(1, 1e6), st.floats(0.01, 1e5))
def test_collision_monotone(E, D, M, step):
    base = collision_free_rate(E, D, M)
    assert collision_free_rate(E + step, D, M) <= base
    assert collision_free_rate(E, D + step, M) <= base
    assert collision_free_rate(E, D, M + step) >= base or M == 1


@pytest.mark.parametrize("N,D,m,r,l", [(500, 20, 10, 4, 2), (900, 300, 7, 3, 3), (50, 0, 4, 2, 1),
                                       (2000, 2000, 20, 8, 4)])
def test_double_sum_matches_exact_binomials(N, D, m, r, l):
    assert bucket_available(N, D, m, r, l) == pytest.approx(_available_exact(N, D, m, r, l), rel=1e-9)


def test_failure_limits():
    assert insertion_failure(1e6, 1e4, 1000, 8, 3, 400) < 1e-50
    assert insertion_failure(1e6, 1e4, 1000, 8, 0, 8) == 1.0
    assert insertion_failure(0, 0, 10, 2, 1, 3) == 0.0


def test_failure_decreases_with_rooms_and_k():
    vals = [insertion_failure(1e5, 1e3, 300, 8, l, 8) for l in range(1, 6)]
    assert vals == sorted(vals, reverse=True)
    vals = [insertion_failure(1e5, 1e3, 300, 8, 2, k) for k in range(1, 10)]
    assert vals == sorted(vals, reverse=True)


@pytest.mark.parametrize("args", [(10, 11, 5, 2, 2, 2), (10, -1, 5, 2, 2, 2), (10, 1, 5, 2, 9, 2),
                                  (10, 1, 0, 2, 2, 2), (10, 1, 5, 2, 2, -1)])
def test_failure_rejects_bad_inputs(args):
    with pytest.raises(ValueError):
        insertion_failure(*args)


def test_large_inputs_finite():
    p = insertion_failure(1e9, 1e7, 30000, 16, 8, 16)
    assert 0 <= p <= 1 and math.isfinite(p)
