import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_cross_poly, random_poly
from hcross.freq_index import cross_indices, level_of
from hcross.polynomial import TrigPolynomial
from hcross.smolyak import (
    PolynomialSampler,
    Sampler,
    combination_terms,
    recovery_error_sweep,
    smolyak_recover,
    sparse_grid,
    sparse_grid_size,
)

# smallest d' such that T_n reproduces T(Q_{n - d'}) exactly, brute force over d <= 3, n <= 7
REPRODUCTION_OFFSET = 0


def test_constant_recovered():
    c = TrigPolynomial(np.zeros((1, 2), dtype=int), [1.7])
    for n in range(5):
        assert smolyak_recover(PolynomialSampler(c), n, 2).equals(c, atol=1e-14)


@pytest.mark.parametrize("n", range(0, 8))
def test_univariate_exactness_edge(n):
    k = 2**n - 1
    t = TrigPolynomial(np.array([[k]]), [1.0])
    assert smolyak_recover(PolynomialSampler(t), n, 1).equals(t, atol=1e-12)
    alias = TrigPolynomial(np.array([[2**n]]), [1.0])
    assert not smolyak_recover(PolynomialSampler(alias), n, 1).equals(alias, atol=1e-6)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_reproduction_offset(d):
    for n in range(0, 8 if d < 3 else 6):
        f = random_cross_poly(n - REPRODUCTION_OFFSET, d, seed=n)
        g = smolyak_recover(PolynomialSampler(f), n, d)
        assert np.max(np.abs(g.lookup(f.freqs) - f.coeffs)) < 1e-10
        assert (g - f).l2_norm() < 1e-10
        # one level more is not reproduced, so the offset is tight
        h = random_cross_poly(n + 1, d, seed=n)
        assert (smolyak_recover(PolynomialSampler(h), n, d) - h).l2_norm() > 1e-3


@pytest.mark.parametrize("d", [1, 2, 3])
def test_call_count_is_union_size(d):
    f = random_cross_poly(2, d, seed=0)
    for n in range(0, 7 if d < 3 else 5):
        s = PolynomialSampler(f)
        smolyak_recover(s, n, d)
        assert s.call_count == sparse_grid_size(n, d) == sparse_grid(n, d).shape[0]


def test_known_counts_d2():
    assert [sparse_grid_size(n, 2) for n in range(6)] == [4, 12, 32, 80, 192, 448]


def test_generic_sampler_matches_polynomial_sampler():
    f = random_cross_poly(3, 2, seed=5)
    a = smolyak_recover(Sampler(f, 2), 4, 2)
    b = smolyak_recover(PolynomialSampler(f), 4, 2)
    assert a.equals(b, atol=1e-12)


@given(st.integers(0, 10**6), st.floats(-3, 3), st.floats(-3, 3))
def test_linearity(seed, a, b):
    f = random_cross_poly(5, 2, seed)
    g = random_cross_poly(5, 2, seed + 1)
    n = 3
    lhs = smolyak_recover(PolynomialSampler(f * a + g * b), n, 2)
    rhs = smolyak_recover(PolynomialSampler(f), n, 2) * a + smolyak_recover(PolynomialSampler(g), n, 2) * b
    assert (lhs - rhs).l2_norm() < 1e-10 * (1 + abs(a) + abs(b)) * f.l2_norm()


@given(st.integers(0, 10**6), st.integers(0, 5))
def test_idempotence(seed, n):
    f = random_cross_poly(n + 2, 2, seed)
    once = smolyak_recover(PolynomialSampler(f), n, 2)
    assert level_of(once.freqs).max(initial=0) <= n
    twice = smolyak_recover(PolynomialSampler(once), n, 2)
    assert twice.equals(once, atol=1e-10)


def test_combination_coefficients_sum_to_one():
    for d in (1, 2, 3, 4):
        for n in range(6):
            assert sum(c for _, c in combination_terms(n, d)) == 1


def test_negative_level():
    with pytest.raises(ValueError):
        smolyak_recover(Sampler(lambda x: np.ones(len(x)), 1), -1, 1)


def test_sweep_final_row_exact():
    f = random_cross_poly(4, 2, seed=1)
    rows = recovery_error_sweep(lambda: PolynomialSampler(f), f, range(0, 5))
    assert rows[-1]["error"] < 1e-12
    assert [r["samples"] for r in rows] == [sparse_grid_size(n, 2) for n in range(5)]
    assert all(r["error"] >= 0 for r in rows)
    linf = recovery_error_sweep(lambda: PolynomialSampler(f), f, [2], p=math.inf)
    assert linf[0]["error"] > 0


def interpolation_l2_oracle(coeff, K, n):
    """Exact L_2 error of I_n on f(k) = coeff(k), |k| <= K, via the aliasing formula."""
    N = 2 ** (n + 1)
    keep = 2**n - 1
    k = np.arange(-K, K + 1)
    c = coeff(k)
    err2 = float(np.sum(np.abs(c[np.abs(k) > keep]) ** 2))
    folded = np.zeros(N, dtype=complex)
    np.add.at(folded, k % N, c)
    for j in range(-keep, keep + 1):
        err2 += abs(folded[j % N] - c[j + K]) ** 2
    return math.sqrt(err2)


def test_univariate_rate_against_oracle():
    K = 2**17
    coeff = lambda k: np.maximum(np.abs(k), 1).astype(float) ** -1.5
    k = np.arange(-K, K + 1)
    f = TrigPolynomial(k.reshape(-1, 1), coeff(k))
    rows = recovery_error_sweep(lambda: PolynomialSampler(f), f, range(3, 11))
    for row in rows:
        assert row["error"] == pytest.approx(interpolation_l2_oracle(coeff, K, row["level"]), rel=1e-8)
    m = np.array([r["samples"] for r in rows], float)
    e = np.array([r["error"] for r in rows])
    slope = np.polyfit(np.log(m), np.log(e), 1)[0]
    assert slope == pytest.approx(-1.0, abs=0.05)


def test_sample_count_log_power_d2():
    n = np.arange(4, 15)
    counts = []
    f = random_cross_poly(1, 2, seed=0)
    for v in n:
        s = PolynomialSampler(f)
        smolyak_recover(s, int(v), 2)
        counts.append(s.call_count)
    b = np.polyfit(np.log(n), np.log(np.array(counts) / 2.0**n), 1)[0]
    assert abs(b - 1) <= 0.3
