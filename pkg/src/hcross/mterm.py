"""Greedy and layered best m-term trigonometric approximation.

All reported errors are upper bounds for the best m-term error: the
approximants are explicit m-term polynomials, the best one is an infimum.
``L_2`` errors are exact (Parseval on the discarded coefficients);
``L_inf`` errors are grid maxima at the recorded oversampling factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .freq_index import block_of, layer_rank
from .polynomial import TrigPolynomial
from .spectral import DEFAULT_OVERSAMPLE, layer_op, norm_lp_poly

#: Frozen bound on sum(m_n) / m for default plans (W or H) with zeta >= 1/2 and
#: kappa <= 0.9, d <= 4, m in 2^4..2^16; measured maximum 12.09 (W, p = 6,
#: r = 0.4, d = 4).  Other regimes are covered by :func:`budget_bound_factor`.
C_PLAN = 12.5


@dataclass
class MTermResult:
    approximant: TrigPolynomial
    terms_used: int
    error_linf: float
    error_l2: float
    oversample: float


@dataclass
class BudgetPlan:
    """Per-layer term budgets for the layered scheme.

    ``budgets[n]`` is the number of terms granted to layer ``n``; layers
    absent from the mapping get none.  Layers ``n <= n0`` are kept whole.
    """

    budgets: dict[int, int]
    n0: int
    n1: int
    kappa: float
    zeta: float
    m_total: int
    d: int
    family: str = "W"
    r: float = 0.0
    p: float = math.inf
    notes: list[str] = field(default_factory=list)

    def total(self) -> int:
        return int(sum(self.budgets.values()))

    def budget(self, n: int) -> int:
        return int(self.budgets.get(n, 0))


def budget_bound_factor(plan: BudgetPlan) -> float:
    """Analytic ``C`` with ``plan.total() <= C * plan.m_total``.

    Full layers contribute at most ``m``; the middle range at most
    ``m * min(n1 - n0, 1 / (1 - 2^(kappa - 1)))``; the tail at most
    ``m * 2^-zeta / (1 - 2^-zeta)``.
    """
    span = max(plan.n1 - plan.n0, 0)
    middle = span if plan.kappa >= 1 else min(span, 1.0 / (1.0 - 2.0 ** (plan.kappa - 1)))
    tail = 2.0 ** -plan.zeta / (1.0 - 2.0 ** -plan.zeta)
    return 1.0 + middle + tail


def largest_terms(coeffs: np.ndarray, m: int) -> np.ndarray:
    """Indices of the ``m`` largest moduli; ties go to the lexicographically first frequency.

    Assumes ``coeffs`` is aligned with lexicographically sorted frequencies.
    """
    if m <= 0:
        return np.zeros(0, dtype=np.intp)
    if m >= coeffs.shape[0]:
        return np.arange(coeffs.shape[0])
    order = np.argsort(-np.abs(coeffs), kind="stable")
    return np.sort(order[:m])


def _result(f: TrigPolynomial, approx: TrigPolynomial, oversample: float, measure_linf: bool) -> MTermResult:
    tail = f - approx
    linf = norm_lp_poly(tail, math.inf, oversample=oversample) if measure_linf else math.nan
    return MTermResult(approx, len(approx), linf, tail.l2_norm(), oversample)


def greedy_mterm(
    f: TrigPolynomial,
    m: int,
    oversample: float = DEFAULT_OVERSAMPLE,
    measure_linf: bool = True,
) -> MTermResult:
    """Keep the ``m`` coefficients of ``f`` with largest modulus."""
    if m < 0:
        raise ParameterError(f"term count must be >= 0, got {m}")
    approx = f.restrict(largest_terms(f.coeffs, m))
    return _result(f, approx, oversample, measure_linf)


# -- budget plans -------------------------------------------------------------


def _full_rank_cutoff(m: int, d: int) -> int:
    n0, total = -1, 0
    while True:
        total += layer_rank(n0 + 1, d)
        if total > m:
            return max(n0, 0)
        n0 += 1


def _max_level(m: int, size) -> int | None:
    """Largest ``nu`` with ``size(nu) <= m``; ``size`` grows without bound."""
    best, nu, misses = None, 0, 0
    while misses < 8:
        if size(nu) <= m:
            best, misses = nu, 0
        else:
            misses += 1
        nu += 1
    return best


def effective_p(r: float, p: float) -> float:
    """Integrability used for the tail exponent; ``p = inf`` is replaced by ``2 / r``."""
    return 2.0 / r if math.isinf(p) else p


def default_kappa(r: float) -> float:
    return 1.0 if r >= 0.5 else (2 * r + 1) / 2


def default_zeta(r: float, p: float) -> float:
    pe = effective_p(r, p)
    return pe * (r - 1 / pe) / 2


def _validate(m: int, r: float, p: float, d: int, kappa: float, zeta: float, family: str):
    if m < 1:
        raise ParameterError(f"term count must be >= 1, got {m}")
    if d < 1:
        raise ParameterError(f"dimension must be >= 1, got {d}")
    if family == "W" and not (2 < p < math.inf):
        raise ParameterError(f"W plans need 2 < p < inf, got p={p}")
    if family == "H" and not p > 2:
        raise ParameterError(f"H plans need 2 < p <= inf, got p={p}")
    if not (1 / p < r <= 0.5):
        raise ParameterError(f"need 1/p < r <= 1/2, got r={r}, p={p}")
    if r == 0.5:
        if kappa != 1:
            raise ParameterError(f"the endpoint r = 1/2 needs kappa = 1, got {kappa}")
    elif not (2 * r < kappa < 1):
        raise ParameterError(f"need 2r < kappa < 1, got kappa={kappa} for r={r}")
    pe = effective_p(r, p)
    if not (0 < zeta < pe * (r - 1 / pe)):
        raise ParameterError(f"need 0 < zeta < p(r - 1/p) = {pe * (r - 1 / pe):.6g}, got {zeta}")


def _plan(m, r, p, d, kappa, zeta, family) -> BudgetPlan:
    kappa = default_kappa(r) if kappa is None else float(kappa)
    zeta = default_zeta(r, p) if zeta is None else float(zeta)
    _validate(m, r, p, d, kappa, zeta, family)
    n0 = _full_rank_cutoff(m, d)
    if family == "W":
        n1 = _max_level(m, lambda nu: 2.0**nu / max(nu, 1) ** (d - 2))
        middle = lambda n: 2.0**n * 2.0 ** ((n1 - n) * kappa) * float(max(n1, 1)) ** (-(d - 2))
    else:
        n1 = _max_level(m, lambda nu: 2.0**nu * nu if nu >= 1 else math.inf)
        middle = lambda n: 2.0**n * 2.0 ** ((n1 - n) * kappa) * n1
    notes = []
    if n1 is None:
        n1 = n0
        notes.append("no pivot level satisfies the defining inequality; pivot set to n0")
    budgets = {n: layer_rank(n, d) for n in range(n0 + 1)}
    for n in range(n0 + 1, n1 + 1):
        budgets[n] = int(math.floor(middle(n)))
    n = max(n0, n1) + 1
    while True:
        mn = int(math.floor(m * 2.0 ** ((n1 - n) * zeta)))
        if mn <= 0:
            break
        budgets[n] = mn
        n += 1
    return BudgetPlan(budgets, n0, n1, kappa, zeta, m, d, family, r, p, notes)


def plan_budget_W(m: int, r: float, p: float, d: int, kappa: float | None = None, zeta: float | None = None) -> BudgetPlan:
    """Budgets for Sobolev-type classes.

    Layers up to ``n0`` (largest level with ``|Q_n0| <= m``) are kept whole;
    for ``n0 < n <= n1`` the budget is ``floor(2^n 2^((n1-n) kappa) n1^-(d-2))``
    with ``n1`` the largest level satisfying ``2^n1 / n1^(d-2) <= m``; above
    ``n1`` it is ``floor(m 2^((n1-n) zeta))`` until it reaches zero.
    """
    return _plan(m, r, p, d, kappa, zeta, "W")


def plan_budget_H(m: int, r: float, p: float, d: int, kappa: float | None = None, zeta: float | None = None) -> BudgetPlan:
    """Budgets for Hoelder-Nikolskii classes: middle layers get ``floor(2^n 2^((n1-n) kappa) n1)``
    with ``n1`` the largest level satisfying ``2^n1 n1 <= m``.  ``p = inf`` is admitted."""
    return _plan(m, r, p, d, kappa, zeta, "H")


def layered_mterm(
    f: TrigPolynomial,
    plan: BudgetPlan,
    kind: str = "sharp",
    oversample: float = DEFAULT_OVERSAMPLE,
    measure_linf: bool = True,
) -> MTermResult:
    """Approximate layer by layer under ``plan`` and cap the result at ``plan.m_total`` terms.

    ``kind="sharp"`` splits ``f`` with ``S_{Delta Q_n}``, ``kind="vp"`` with
    ``A_{Delta Q_n}``.  Within each layer the largest coefficients are kept.
    """
    if plan.d != f.dim:
        raise ParameterError(f"plan is for d={plan.d}, polynomial has d={f.dim}")
    if len(f) == 0:
        return _result(f, f, oversample, measure_linf)
    top = int(block_of(f.freqs).sum(axis=1).max())
    pieces = []
    for n in range(top + 1):
        budget = plan.budget(n)
        if budget <= 0:
            continue
        layer = layer_op(f, n, kind)
        if n <= plan.n0:
            pieces.append(layer)
        else:
            pieces.append(layer.restrict(largest_terms(layer.coeffs, budget)))
    if pieces:
        approx = TrigPolynomial(
            np.concatenate([q.freqs for q in pieces]),
            np.concatenate([q.coeffs for q in pieces]),
            d=f.dim,
        )
    else:
        approx = TrigPolynomial.zero(f.dim)
    if len(approx) > plan.m_total:
        approx = approx.restrict(largest_terms(approx.coeffs, plan.m_total))
    return _result(f, approx, oversample, measure_linf)


def measure_error(
    f: TrigPolynomial,
    g: TrigPolynomial,
    p: float,
    oversample: float = DEFAULT_OVERSAMPLE,
) -> float:
    """``||f - g||_p`` on an oversampled alias-free grid."""
    if oversample < 2:
        raise ParameterError(f"oversample must be >= 2, got {oversample}")
    return norm_lp_poly(f - g, p, oversample=oversample)
