"""Dirichlet, de la Vallee Poussin, dyadic-difference and Bernoulli kernels.

Every kernel is available pointwise and as a Fourier multiplier table.
Coefficients follow ``f_hat(k) = (2 pi)^-d int f(x) exp(-i k.x) dx`` so that
convolution multiplies coefficient tables.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .polynomial import TrigPolynomial, reduce_angle

#: Below this value of ``|sin(t/2)|`` the closed forms switch to direct sums.
SINGULAR_TOL = 1e-6


@dataclass(frozen=True)
class MultiplierTable:
    """Real Fourier multiplier weights on a finite support (lexicographic rows)."""

    freqs: np.ndarray
    weights: np.ndarray

    @property
    def dim(self) -> int:
        return self.freqs.shape[1]

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return {tuple(int(v) for v in k): float(w) for k, w in zip(self.freqs, self.weights)}

    def weight(self, k) -> float:
        hit = np.all(self.freqs == np.asarray(k).reshape(1, -1), axis=1)
        return float(self.weights[hit][0]) if hit.any() else 0.0

    def synthesize(self, t) -> np.ndarray:
        """Evaluate ``sum_k w_k exp(i k t)`` at points ``t`` of shape (npts, d) or (npts,)."""
        poly = TrigPolynomial(self.freqs, self.weights.astype(np.complex128), d=self.dim)
        t = np.asarray(t, dtype=np.float64).reshape(-1, self.dim)
        return poly(t).real


@dataclass(frozen=True)
class BernoulliSpec:
    """Truncated tensor Bernoulli kernel: smoothness ``r``, phases ``alpha``, order ``K``."""

    r: float
    alpha: tuple[float, ...] = field(default=(0.0,))
    K: int = 64

    def __post_init__(self):
        if not self.r > 0:
            raise ParameterError(f"Bernoulli smoothness must be > 0, got {self.r}")
        if int(self.K) < 1:
            raise ParameterError(f"truncation order must be >= 1, got {self.K}")
        object.__setattr__(self, "alpha", tuple(float(a) for a in np.atleast_1d(self.alpha)))
        object.__setattr__(self, "K", int(self.K))

    @property
    def dim(self) -> int:
        return len(self.alpha)


# -- pointwise kernels ------------------------------------------------------


def _direct_dirichlet(k: int, t: np.ndarray) -> np.ndarray:
    j = np.arange(1, k + 1)
    return 1.0 + 2.0 * np.cos(np.multiply.outer(t, j)).sum(axis=-1)


def dirichlet_eval(k: int, t):
    """Dirichlet kernel ``D_k(t) = sum_{|j| <= k} exp(i j t)``."""
    if k < 0:
        raise ParameterError(f"Dirichlet order must be >= 0, got {k}")
    t = reduce_angle(np.asarray(t, dtype=np.float64))
    half = np.sin(t / 2)
    near = np.abs(half) < SINGULAR_TOL
    safe = np.where(near, 1.0, half)
    out = np.sin((k + 0.5) * t) / safe
    if np.any(near):
        out = np.where(near, _direct_dirichlet(k, np.where(near, t, 0.0)), out)
    return out if out.ndim else float(out)


def vp_weight(m: int, k) -> np.ndarray:
    """Univariate de la Vallee Poussin multiplier: 1 up to ``m``, linear ramp to 0 at ``2m``."""
    a = np.abs(np.asarray(k, dtype=np.float64))
    return np.clip((2 * m - a) / m, 0.0, 1.0)


def vp_eval(m: int, t):
    """De la Vallee Poussin kernel ``V_m(t) = sin(mt/2) sin(3mt/2) / (m sin^2(t/2))``."""
    if m < 1:
        raise ParameterError(f"de la Vallee Poussin order must be >= 1, got {m}")
    t = reduce_angle(np.asarray(t, dtype=np.float64))
    half = np.sin(t / 2)
    near = np.abs(half) < SINGULAR_TOL
    safe = np.where(near, 1.0, half)
    out = np.sin(m * t / 2) * np.sin(1.5 * m * t) / (m * safe**2)
    if np.any(near):
        tn = np.where(near, t, 0.0)
        j = np.arange(1, 2 * m)
        direct = 1.0 + 2.0 * (vp_weight(m, j) * np.cos(np.multiply.outer(tn, j))).sum(axis=-1)
        out = np.where(near, direct, out)
    return out if out.ndim else float(out)


def block_weight_1d(s: int, k) -> np.ndarray:
    """Multiplier of the univariate dyadic difference kernel ``A_s``."""
    if s == 0:
        return vp_weight(1, k)
    return vp_weight(2**s, k) - vp_weight(2 ** (s - 1), k)


def block_eval_1d(s: int, t):
    """Pointwise ``A_s(t)``."""
    if s == 0:
        return vp_eval(1, t)
    return vp_eval(2**s, t) - vp_eval(2 ** (s - 1), t)


def block_weight(s, freqs: np.ndarray) -> np.ndarray:
    """Tensor multiplier of ``A_s`` evaluated at each frequency row."""
    freqs = np.asarray(freqs)
    w = np.ones(freqs.shape[0])
    for j, sj in enumerate(s):
        w = w * block_weight_1d(int(sj), freqs[:, j])
    return w


def block_eval(s, x) -> np.ndarray:
    """Pointwise tensor kernel ``A_s(x)`` at points of shape (npts, d)."""
    x = np.asarray(x, dtype=np.float64).reshape(-1, len(s))
    out = np.ones(x.shape[0])
    for j, sj in enumerate(s):
        out = out * block_eval_1d(int(sj), x[:, j])
    return out


# -- multiplier tables ------------------------------------------------------


def _table_1d(k: np.ndarray, w: np.ndarray) -> MultiplierTable:
    keep = w != 0
    return MultiplierTable(k[keep].reshape(-1, 1).astype(np.int64), w[keep])


def dirichlet_multiplier(k: int) -> MultiplierTable:
    if k < 0:
        raise ParameterError(f"Dirichlet order must be >= 0, got {k}")
    freqs = np.arange(-k, k + 1)
    return _table_1d(freqs, np.ones(freqs.shape[0]))


def vp_multiplier(m: int) -> MultiplierTable:
    """Univariate table of ``V_m``: weight 1 for ``|k| <= m``, ``(2m - |k|)/m`` up to ``2m``."""
    if m < 1:
        raise ParameterError(f"de la Vallee Poussin order must be >= 1, got {m}")
    freqs = np.arange(-2 * m + 1, 2 * m)
    return _table_1d(freqs, vp_weight(m, freqs))


def block_multiplier(s) -> MultiplierTable:
    """Tensor table of ``A_s``; axis ``j`` is supported on ``|k_j| < 2**(s_j + 1)``."""
    s = tuple(int(v) for v in s)
    if not s or any(v < 0 for v in s):
        raise ParameterError(f"block index entries must be >= 0, got {s}")
    axes, weights = [], []
    for sj in s:
        k = np.arange(-(2 ** (sj + 1)) + 1, 2 ** (sj + 1))
        w = block_weight_1d(sj, k)
        keep = w != 0
        axes.append(k[keep])
        weights.append(w[keep])
    freqs = np.array(list(itertools.product(*axes)), dtype=np.int64).reshape(-1, len(s))
    grids = np.meshgrid(*weights, indexing="ij")
    w = np.prod(np.stack([g.ravel() for g in grids]), axis=0)
    return MultiplierTable(freqs, w)


def bernoulli_coeffs_1d(r: float, alpha: float, K: int) -> tuple[np.ndarray, np.ndarray]:
    """Frequencies ``-K..K`` and coefficients of the truncated univariate Bernoulli kernel."""
    k = np.arange(-K, K + 1)
    c = np.ones(k.shape[0], dtype=np.complex128)
    nz = k != 0
    a = np.abs(k[nz]).astype(np.float64)
    # 2 k^-r cos(kx - alpha pi/2) splits into k^-r exp(-+ i alpha pi/2) at +-k
    c[nz] = a ** (-r) * np.exp(-1j * np.sign(k[nz]) * alpha * np.pi / 2)
    return k, c


def bernoulli_poly(spec: BernoulliSpec) -> TrigPolynomial:
    """Spectral representation of the truncated tensor Bernoulli kernel."""
    axes, coeffs = [], []
    for a in spec.alpha:
        k, c = bernoulli_coeffs_1d(spec.r, a, spec.K)
        axes.append(k)
        coeffs.append(c)
    kgrids = np.meshgrid(*axes, indexing="ij")
    freqs = np.stack([g.ravel() for g in kgrids], axis=1)
    c = coeffs[0]
    for axis_c in coeffs[1:]:
        c = np.multiply.outer(c, axis_c)
    return TrigPolynomial(freqs, c.ravel(), d=spec.dim)


def bernoulli_eval_1d(r: float, alpha: float, K: int, x) -> np.ndarray:
    """Direct cosine-series value ``1 + 2 sum_{k<=K} k^-r cos(kx - alpha pi/2)``."""
    x = np.asarray(x, dtype=np.float64)
    k = np.arange(1, K + 1)
    return 1.0 + 2.0 * (k ** (-float(r)) * np.cos(np.multiply.outer(x, k) - alpha * np.pi / 2)).sum(axis=-1)
