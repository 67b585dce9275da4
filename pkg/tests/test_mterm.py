import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_cross_poly, random_poly
from hcross import lab
from hcross.errors import ParameterError
from hcross.freq_index import cross_indices, cross_size, layer_rank
from hcross.mterm import (
    C_PLAN,
    budget_bound_factor,
    default_kappa,
    default_zeta,
    greedy_mterm,
    largest_terms,
    layered_mterm,
    measure_error,
    plan_budget_H,
    plan_budget_W,
)
from hcross.polynomial import TrigPolynomial
from hcross.spectral import project_cross, norm_lp_poly

# layered L_inf error / projection L_inf error at matched term counts,
# random H^0.4_inf ball (level 9, seed 0), m = |Q_n| for n = 2..8: measured max 0.980
LAYERED_VS_PROJECTION = 1.0

# sum_{n0 < n <= n1} m_n / m for H plans, d = 2, m = 2^10..2^16: measured range
MIDDLE_RANGE = (0.5, 1.0)


def tail_poly(K=4096, beta=2.0):
    k = np.concatenate([np.arange(-K, 0), np.arange(1, K + 1)])
    return TrigPolynomial(k.reshape(-1, 1), np.abs(k).astype(float) ** -beta)


# -- greedy -----------------------------------------------------------------


def test_greedy_keeps_everything():
    f = random_cross_poly(3, 2, seed=0)
    res = greedy_mterm(f, len(f) + 5)
    assert res.error_l2 == 0 and res.error_linf == 0 and res.approximant.equals(f)


def test_greedy_tail_oracle():
    f = tail_poly()
    ms = [16, 32, 64, 128, 256, 512]
    rows = []
    for m in ms:
        res = greedy_mterm(f, 2 * m)
        oracle = 2 * sum(k**-2.0 for k in range(m + 1, 4097))
        assert res.error_linf == pytest.approx(oracle, rel=1e-10)
        rows.append((m, res.error_linf))
    fit = lab.fit_rate(rows, with_log=False)
    assert fit.main_rate == pytest.approx(1.0, abs=0.05)


def test_greedy_tie_rule():
    freqs = cross_indices(2, 2)
    f = TrigPolynomial(freqs, np.ones(len(freqs)))
    res = greedy_mterm(f, len(f) // 2)
    assert res.terms_used == len(f) // 2
    assert np.array_equal(res.approximant.freqs, freqs[: len(f) // 2])


def test_largest_terms_edges():
    c = np.array([3, 1, 3, 2])
    assert largest_terms(c, 0).tolist() == []
    assert largest_terms(c, 2).tolist() == [0, 2]
    assert largest_terms(c, 3).tolist() == [0, 2, 3]
    assert largest_terms(c, 9).tolist() == [0, 1, 2, 3]
    with pytest.raises(ParameterError):
        greedy_mterm(TrigPolynomial.zero(1), -1)


def test_greedy_bruteforce_small():
    rng = np.random.default_rng(0)
    for _ in range(30):
        size = int(rng.integers(1, 9))
        f = random_poly(cross_indices(3, 2)[rng.choice(cross_size(3, 2), size, replace=False)], int(rng.integers(1e9)))
        for m in range(0, min(size, 4) + 1):
            best = min(
                float(np.sqrt(np.sum(np.abs(np.delete(f.coeffs, list(sub))) ** 2)))
                for sub in itertools.combinations(range(size), m)
            )
            assert greedy_mterm(f, m, measure_linf=False).error_l2 == best


@given(st.integers(0, 10**6))
def test_greedy_l2_monotone(seed):
    f = random_cross_poly(4, 2, seed)
    errs = [greedy_mterm(f, m, measure_linf=False).error_l2 for m in range(0, len(f) + 1, 7)]
    assert all(b <= a for a, b in zip(errs, errs[1:]))


@given(st.integers(0, 10**6), st.integers(1, 20), st.integers(1, 20))
def test_subadditivity_surrogate(seed, m1, m2):
    f = random_cross_poly(4, 2, seed)
    g = random_cross_poly(4, 2, seed + 1) * 0.5
    lhs = greedy_mterm(f + g, m1 + m2).error_linf
    rhs = greedy_mterm(f, m1).error_linf + greedy_mterm(g, m2).error_linf
    # grid maxima under-estimate each term by a small relative amount at oversample 4
    assert lhs <= rhs * (1 + 0.05)


# -- plans ------------------------------------------------------------------


def test_smallest_plan():
    for d in (1, 2, 3):
        for planner in (plan_budget_W, plan_budget_H):
            plan = planner(1, 0.4, 4.0, d)
            assert plan.n0 == 0 and plan.budgets == {0: 1}


def test_pivot_examples():
    assert plan_budget_W(2**10, 0.4, 4.0, 2).n1 == 10
    assert plan_budget_H(8192, 0.4, math.inf, 2).n1 == 9


@given(
    st.sampled_from(["W", "H"]),
    st.integers(1, 2**17),
    st.sampled_from([0.3, 0.35, 0.4, 0.45, 0.5]),
    st.sampled_from([3.0, 4.0, 8.0, math.inf]),
    st.integers(1, 4),
)
def test_plan_invariants(family, m, r, p, d):
    planner = plan_budget_W if family == "W" else plan_budget_H
    try:
        plan = planner(m, r, p, d)
    except ParameterError:
        assert (family == "W" and math.isinf(p)) or r <= 1 / p
        return
    assert plan.total() <= budget_bound_factor(plan) * m
    for n in range(plan.n0 + 1):
        assert plan.budget(n) == layer_rank(n, d)
    assert sum(layer_rank(n, d) for n in range(plan.n0 + 1)) <= m or plan.n0 == 0
    above = [plan.budget(n) for n in sorted(plan.budgets) if n > max(plan.n0, plan.n1)]
    assert all(b > 0 for b in above)
    assert all(b <= a for a, b in zip(above, above[1:]))
    if plan.zeta >= 0.5 and plan.kappa <= 0.9 and 16 <= m <= 2**16:
        assert plan.total() <= C_PLAN * m


def test_plan_constant_examples():
    for d in (2, 3):
        for e in range(8, 17):
            assert plan_budget_W(2**e, 0.4, 8.0, d).total() <= C_PLAN * 2**e
            assert plan_budget_H(2**e, 0.4, math.inf, d).total() <= C_PLAN * 2**e


def test_tail_ratio():
    plan = plan_budget_H(2**12, 0.4, math.inf, 2)
    n = plan.n1 + 3
    assert plan.budget(n + 1) / plan.budget(n) == pytest.approx(2**-plan.zeta, rel=0.01)


def test_middle_sum_is_order_m():
    for e in range(10, 17):
        plan = plan_budget_H(2**e, 0.4, math.inf, 2)
        mid = sum(plan.budget(n) for n in range(plan.n0 + 1, plan.n1 + 1))
        assert MIDDLE_RANGE[0] <= mid / 2**e <= MIDDLE_RANGE[1]


def test_defaults():
    assert default_kappa(0.4) == pytest.approx(0.9)
    assert default_kappa(0.5) == 1.0
    assert default_zeta(0.4, 4.0) == pytest.approx(4 * (0.4 - 0.25) / 2)
    assert default_zeta(0.4, math.inf) == pytest.approx(0.5)


@pytest.mark.parametrize(
    "args",
    [
        dict(m=0, r=0.4, p=4.0, d=2),
        dict(m=8, r=0.2, p=4.0, d=2),
        dict(m=8, r=0.6, p=4.0, d=2),
        dict(m=8, r=0.4, p=2.0, d=2),
        dict(m=8, r=0.4, p=4.0, d=2, kappa=0.5),
        dict(m=8, r=0.5, p=4.0, d=2, kappa=0.95),
        dict(m=8, r=0.4, p=4.0, d=2, zeta=0.7),
        dict(m=8, r=0.4, p=4.0, d=0),
    ],
)
def test_plan_parameter_errors(args):
    with pytest.raises(ParameterError):
        plan_budget_W(**args)


def test_w_plan_rejects_infinite_p():
    with pytest.raises(ParameterError):
        plan_budget_W(64, 0.4, math.inf, 2)
    plan_budget_H(64, 0.4, math.inf, 2)


# -- layered ----------------------------------------------------------------


def test_layered_exact_on_low_levels():
    f = random_cross_poly(3, 2, seed=1)
    plan = plan_budget_W(cross_size(3, 2), 0.4, 4.0, 2)
    assert plan.n0 == 3
    res = layered_mterm(f, plan)
    assert res.error_l2 == 0 and res.approximant.equals(f)


@pytest.mark.parametrize("kind", ["sharp", "vp"])
def test_layered_sparsity_and_dimension(kind):
    f = random_cross_poly(6, 2, seed=2)
    for m in (1, 5, 40, 200):
        res = layered_mterm(f, plan_budget_H(m, 0.4, math.inf, 2), kind=kind, measure_linf=False)
        assert res.terms_used <= m
        assert len(res.approximant) == res.terms_used
    with pytest.raises(ParameterError):
        layered_mterm(f, plan_budget_H(8, 0.4, math.inf, 3))


def test_layered_monotone_on_ball():
    f = lab.registry_function("random_H_ball", dict(r=0.4, p=math.inf, level=8, seed=0), 2)
    errs = [layered_mterm(f, plan_budget_H(2**e, 0.4, math.inf, 2), kind="vp").error_linf for e in range(4, 12)]
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_layered_beats_projection():
    f = lab.registry_function("random_H_ball", dict(r=0.4, p=math.inf, level=9, seed=0), 2)
    for n in range(2, 9):
        m = cross_size(n, 2)
        lin = norm_lp_poly(f - project_cross(f, n), math.inf)
        res = layered_mterm(f, plan_budget_H(m, 0.4, math.inf, 2), kind="vp")
        assert res.error_linf <= LAYERED_VS_PROJECTION * lin


def test_measure_error_examples():
    f = random_cross_poly(3, 2, seed=3)
    assert measure_error(f, f, math.inf) == 0
    t = TrigPolynomial(np.array([[2, -1]]), [1.0])
    assert measure_error(t, TrigPolynomial.zero(2), 2) == pytest.approx(1.0)
    c = TrigPolynomial(np.array([[-8], [8]]), [1.0, 1.0])
    assert abs(measure_error(c, TrigPolynomial.zero(1), math.inf, oversample=4) - 2) < 1e-3
    with pytest.raises(ParameterError):
        measure_error(f, f, 2, oversample=1.5)
