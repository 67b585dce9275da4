"""Analysis/synthesis, dyadic block operators and smoothness norms.

Polynomials are kept in sparse spectral form and synthesized on a uniform
grid only when a pointwise quantity (an ``L_p`` norm) is needed.  Grid
sizes come from an oversampling factor: along an axis carrying
frequencies up to ``K`` the grid has ``next_fast_len(oversample * (K + 1))``
points, so ``oversample = 2`` is the smallest alias-free choice.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np
import scipy.fft as sfft

from .errors import AliasingError, CapacityError, ParameterError
from .freq_index import block_of, cross_indices, lex_order
from .kernels import block_weight
from .polynomial import GridFunction, TrigPolynomial

__all__ = [
    "GridFunction",
    "TrigPolynomial",
    "SmoothnessSpec",
    "analyze",
    "synthesize",
    "norm_lp",
    "norm_lp_poly",
    "delta_block",
    "vp_block",
    "project_cross",
    "vp_cross",
    "layer_op",
    "norm_smoothness",
    "seminorm_h_diff",
    "norm_h_diff",
    "l1_kernel_norm",
]

DEFAULT_OVERSAMPLE = 4

#: Largest grid (total points) any norm evaluation may touch.
GRID_CAP = 2**31

# points per coset when a grid is reduced piecewise
_STRIP_POINTS = 2**23


# -- grids ------------------------------------------------------------------


def oversampled_resolution(max_freq: Sequence[int], oversample: float = DEFAULT_OVERSAMPLE) -> tuple[int, ...]:
    """Grid size per axis for frequencies bounded by ``max_freq``."""
    if oversample < 2:
        raise ParameterError(f"oversample must be >= 2, got {oversample}")
    return tuple(int(sfft.next_fast_len(int(math.ceil(oversample * (int(k) + 1))))) for k in max_freq)


def _check_resolution(poly: TrigPolynomial, resolution: Sequence[int]) -> tuple[int, ...]:
    resolution = tuple(int(n) for n in resolution)
    if len(resolution) != poly.dim:
        raise ValueError(f"resolution has {len(resolution)} axes, polynomial has {poly.dim}")
    kmax = poly.max_abs_freq()
    for j, (n, k) in enumerate(zip(resolution, kmax)):
        if n <= 2 * k:
            raise AliasingError(f"axis {j}: {n} points cannot resolve |k| = {k} (need > {2 * k})")
    if math.prod(resolution) > GRID_CAP:
        raise CapacityError(f"grid {resolution} exceeds cap of {GRID_CAP} points")
    return resolution


def analyze(f: GridFunction, rtol: float = 1e-13) -> TrigPolynomial:
    """Fourier coefficients of grid samples on the alias-free box.

    Returns coefficients for ``|k_j| <= (N_j - 1) // 2``.  Coefficients
    below ``rtol`` times the largest modulus are treated as roundoff and
    dropped.
    """
    N = f.resolution
    c = sfft.fftn(f.values, norm="forward")
    axes = [np.arange(-((n - 1) // 2), (n - 1) // 2 + 1) for n in N]
    mesh = np.meshgrid(*axes, indexing="ij")
    freqs = np.stack([g.ravel() for g in mesh], axis=1)
    idx = tuple((freqs[:, j] % N[j]) for j in range(len(N)))
    coeffs = c[idx]
    if coeffs.size and rtol > 0:
        coeffs = np.where(np.abs(coeffs) <= rtol * np.abs(coeffs).max(), 0, coeffs)
    return TrigPolynomial._trusted(freqs, coeffs)


def _dense_coefficients(poly: TrigPolynomial, resolution: tuple[int, ...]) -> np.ndarray:
    grid = np.zeros(resolution, dtype=np.complex128)
    idx = tuple(poly.freqs[:, j] % resolution[j] for j in range(poly.dim))
    grid[idx] = poly.coeffs
    return grid


def synthesize(p: TrigPolynomial, resolution: Sequence[int]) -> GridFunction:
    """Evaluate ``p`` on the tensor grid; the grid must be alias-free."""
    resolution = _check_resolution(p, resolution)
    return GridFunction(sfft.ifftn(_dense_coefficients(p, resolution), norm="forward"))


def _coset_factors(resolution: tuple[int, ...], budget: int) -> tuple[int, ...]:
    """Per-axis divisors ``L_j`` of ``N_j`` with ``prod(N_j / L_j) <= budget`` where possible."""
    coarse, factors = list(resolution), [1] * len(resolution)
    while math.prod(coarse) > budget:
        for j in sorted(range(len(coarse)), key=lambda i: -coarse[i]):
            q = next((q for q in range(2, int(math.isqrt(coarse[j])) + 1) if coarse[j] % q == 0), None)
            if q is not None:
                coarse[j] //= q
                factors[j] *= q
                break
        else:
            break
    return tuple(factors)


def iter_grid_values(p: TrigPolynomial, resolution: Sequence[int]) -> Iterator[np.ndarray]:
    """Yield the grid samples of ``p`` in pieces, never holding the full grid.

    The grid is split into the cosets ``t + L Z^d`` of a coarse sub-grid;
    each coset is one FFT of the phase-shifted, folded coefficients.  Chunk
    order is unspecified.
    """
    resolution = _check_resolution(p, resolution)
    factors = _coset_factors(resolution, _STRIP_POINTS)
    if all(f == 1 for f in factors):
        yield synthesize(p, resolution).values.ravel()
        return
    coarse = tuple(n // f for n, f in zip(resolution, factors))
    flat = np.ravel_multi_index(tuple(p.freqs[:, j] % coarse[j] for j in range(p.dim)), coarse)
    size = math.prod(coarse)
    scaled = p.freqs / np.asarray(resolution, dtype=np.float64)
    for shift in itertools.product(*(range(f) for f in factors)):
        c = p.coeffs * np.exp(2j * np.pi * (scaled @ np.asarray(shift, dtype=np.float64)))
        grid = np.bincount(flat, weights=c.real, minlength=size) + 1j * np.bincount(flat, weights=c.imag, minlength=size)
        yield sfft.ifftn(grid.reshape(coarse), norm="forward", overwrite_x=True).ravel()


def _reduce_lp(chunks: Iterable[np.ndarray], p: float) -> float:
    if math.isinf(p):
        return max(float(np.abs(c).max()) for c in chunks)
    total, count = 0.0, 0
    for c in chunks:
        a = np.abs(c)
        total += float(np.sum(a * a)) if p == 2 else float(np.sum(a**p))
        count += c.size
    return (total / count) ** (1.0 / p)


def _check_p(p: float) -> float:
    p = float(p)
    if not (p >= 1):
        raise ParameterError(f"exponent must lie in [1, inf], got {p}")
    return p


def norm_lp(f: GridFunction, p: float) -> float:
    """Riemann-sum ``L_p`` norm under the normalized measure; ``p = inf`` is the grid maximum."""
    return _reduce_lp([f.values.ravel()], _check_p(p))


def norm_lp_poly(
    poly: TrigPolynomial,
    p: float,
    oversample: float = DEFAULT_OVERSAMPLE,
    resolution: Sequence[int] | None = None,
) -> float:
    """``L_p`` norm of a polynomial estimated on an oversampled grid."""
    p = _check_p(p)
    if len(poly) == 0:
        return 0.0
    if resolution is None:
        resolution = oversampled_resolution(poly.max_abs_freq(), oversample)
    return _reduce_lp(iter_grid_values(poly, resolution), p)


# -- block operators --------------------------------------------------------


def delta_block(f: TrigPolynomial, s: Sequence[int]) -> TrigPolynomial:
    """Restriction of ``f`` to the dyadic block ``rho(s)``."""
    s = np.asarray(s, dtype=np.int64).reshape(1, -1)
    if len(f) == 0:
        return f
    return f.restrict(np.all(block_of(f.freqs) == s, axis=1))


def vp_block(f: TrigPolynomial, s: Sequence[int]) -> TrigPolynomial:
    """Convolution of ``f`` with the tensor difference kernel ``A_s``."""
    return f.multiply(block_weight(tuple(int(v) for v in s), f.freqs))


def _a_weight(s: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Univariate ``A_s`` multiplier with a per-entry scale array."""
    a = np.abs(k).astype(np.float64)
    m = np.exp2(s.astype(np.float64))
    upper = np.clip((2 * m - a) / m, 0.0, 1.0)
    half = m / 2
    lower = np.where(s >= 1, np.clip((2 * half - a) / np.where(s >= 1, half, 1.0), 0.0, 1.0), 0.0)
    return upper - lower


def _scale_options(freqs: np.ndarray) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield ``(scales, weight)`` over the per-axis candidate scales of each row.

    Along an axis, a frequency in dyadic block ``sigma`` meets ``A_s`` only
    for ``s in {sigma - 1, sigma}``; the lower option is absent when
    ``sigma = 0``.
    """
    sigma = block_of(freqs)
    d = freqs.shape[1]
    for bits in itertools.product((0, 1), repeat=d):
        scales = sigma - 1 + np.array(bits, dtype=np.int64)
        valid = np.all(scales >= 0, axis=1)
        w = np.where(valid, 1.0, 0.0)
        safe = np.maximum(scales, 0)
        for j in range(d):
            w = w * _a_weight(safe[:, j], freqs[:, j])
        yield safe, w


def cross_multiplier(freqs: np.ndarray, n: int, kind: str = "sharp") -> np.ndarray:
    """Multiplier of ``S_{Q_n}`` (``kind="sharp"``) or ``A_{Q_n}`` (``kind="vp"``) at each row."""
    freqs = np.asarray(freqs, dtype=np.int64)
    if n < 0:
        return np.zeros(freqs.shape[0])
    if kind == "sharp":
        return (block_of(freqs).sum(axis=1) <= n).astype(np.float64)
    if kind != "vp":
        raise ParameterError(f"unknown operator kind {kind!r}")
    total = np.zeros(freqs.shape[0])
    for scales, w in _scale_options(freqs):
        total += np.where(scales.sum(axis=1) <= n, w, 0.0)
    return total


def project_cross(f: TrigPolynomial, n: int) -> TrigPolynomial:
    """``S_{Q_n} f``: restriction of the coefficients to ``Q_n``."""
    if len(f) == 0:
        return f
    return f.restrict(block_of(f.freqs).sum(axis=1) <= n)


def vp_cross(f: TrigPolynomial, n: int) -> TrigPolynomial:
    """``A_{Q_n} f = sum_{|s|_1 <= n} A_s(f)``."""
    if len(f) == 0:
        return f
    return f.multiply(cross_multiplier(f.freqs, n, "vp"))


def layer_multiplier(freqs: np.ndarray, n: int, kind: str = "sharp") -> np.ndarray:
    return cross_multiplier(freqs, n, kind) - cross_multiplier(freqs, n - 1, kind)


def layer_op(f: TrigPolynomial, n: int, kind: str = "sharp") -> TrigPolynomial:
    """``S_{Delta Q_n} f`` or ``A_{Delta Q_n} f``; level 0 is the level-0 operator itself."""
    if n < 0:
        raise ParameterError(f"layer level must be >= 0, got {n}")
    if len(f) == 0:
        return f
    return f.multiply(layer_multiplier(f.freqs, n, kind))


def contributing_blocks(f: TrigPolynomial, kind: str = "vp") -> list[tuple[int, ...]]:
    """Block indices ``s`` for which ``delta_s f`` (sharp) or ``A_s f`` (vp) is nonzero."""
    if len(f) == 0:
        return []
    if kind == "sharp":
        found = np.unique(block_of(f.freqs), axis=0)
    else:
        parts = [scales[w != 0] for scales, w in _scale_options(f.freqs)]
        found = np.unique(np.concatenate(parts, axis=0), axis=0)
    found = found[lex_order(found)]
    return [tuple(int(v) for v in row) for row in found]


# -- smoothness norms -------------------------------------------------------


@dataclass(frozen=True)
class SmoothnessSpec:
    """A mixed-smoothness class: family ``W``, ``H`` or ``B`` with ``r``, ``p``, ``q``, phases ``alpha``."""

    family: str
    r: float
    p: float = 2.0
    q: float = math.inf
    alpha: tuple[float, ...] = field(default=())

    def __post_init__(self):
        family = self.family.upper()
        if family not in ("W", "H", "B"):
            raise ParameterError(f"unknown smoothness family {self.family!r}")
        object.__setattr__(self, "family", family)
        if not self.r > 0:
            raise ParameterError(f"smoothness must be > 0, got {self.r}")
        if family == "H" and not self.r < 1:
            raise ParameterError(f"H classes need 0 < r < 1, got {self.r}")
        if not self.p >= 1 or not self.q >= 1:
            raise ParameterError(f"p and q must lie in [1, inf], got p={self.p}, q={self.q}")
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))

    @property
    def label(self) -> str:
        return self.family


def block_norms(
    f: TrigPolynomial,
    p: float,
    kind: str = "vp",
    oversample: float = DEFAULT_OVERSAMPLE,
    resolution: Sequence[int] | None = None,
) -> dict[tuple[int, ...], float]:
    """``L_p`` norm of every nonzero ``A_s f`` (vp) or ``delta_s f`` (sharp) piece.

    Each piece is synthesized on its own oversampled grid unless a common
    ``resolution`` is given.
    """
    out = {}
    for s in contributing_blocks(f, kind):
        piece = vp_block(f, s) if kind == "vp" else delta_block(f, s)
        if len(piece) == 0:
            continue
        if resolution is None:
            support = [2 ** (sj + 1) - 1 if kind == "vp" else 2**sj - 1 for sj in s]
            res = oversampled_resolution(support, oversample)
        else:
            res = resolution
        out[s] = norm_lp_poly(piece, p, resolution=res)
    return out


def _littlewood_paley(f: TrigPolynomial, r: float, p: float, resolution) -> float:
    if p == 2:
        # Parseval: the square function has exactly this L_2 norm
        weights = np.exp2(2 * r * block_of(f.freqs).sum(axis=1))
        return float(np.sqrt(np.sum(weights * np.abs(f.coeffs) ** 2)))
    square = np.zeros(resolution)
    for s in contributing_blocks(f, "sharp"):
        piece = synthesize(delta_block(f, s), resolution).values
        square += 2.0 ** (2 * r * sum(s)) * np.abs(piece) ** 2
    return _reduce_lp([np.sqrt(square).ravel()], p)


def norm_smoothness(
    f: TrigPolynomial,
    spec: SmoothnessSpec,
    oversample: float = DEFAULT_OVERSAMPLE,
    resolution: Sequence[int] | None = None,
) -> float:
    """Dyadic block norm of ``f`` in the class described by ``spec``.

    ``W``: ``|| (sum_s 2^(2 r |s|) |delta_s f|^2)^(1/2) ||_p``.
    ``H``: ``sup_s 2^(r |s|) ||A_s f||_p``.
    ``B``: the ``l_q`` sum of ``2^(r |s|) ||A_s f||_p`` (``q = inf`` gives ``H``).
    """
    if len(f) == 0:
        return 0.0
    if spec.family == "W":
        if resolution is None:
            resolution = oversampled_resolution(f.max_abs_freq(), oversample)
        resolution = _check_resolution(f, resolution)
        return _littlewood_paley(f, spec.r, spec.p, resolution)
    pieces = block_norms(f, spec.p, "vp", oversample, resolution)
    weighted = np.array([2.0 ** (spec.r * sum(s)) * v for s, v in pieces.items()])
    q = math.inf if spec.family == "H" else spec.q
    if math.isinf(q):
        return float(weighted.max())
    return float(np.sum(weighted**q) ** (1.0 / q))


def _mixed_difference(values: np.ndarray, axes: Sequence[int], steps: Sequence[int]) -> np.ndarray:
    out = values
    for axis, step in zip(axes, steps):
        out = np.roll(out, -int(step), axis=axis) - out
    return out


def seminorm_h_diff(
    f: GridFunction,
    r: float,
    p: float,
    e: Iterable[int],
    h_steps: Iterable | None = None,
) -> float:
    """Grid lower bound for ``sup_h prod_{i in e} |h_i|^-r ||Delta_h^e f||_p``.

    Parameters
    ----------
    f : GridFunction
        Samples of the function.
    r, p : float
        Smoothness and integrability.
    e : iterable of int
        Zero-based axes carrying a difference.  The empty set gives ``||f||_p``.
    h_steps : iterable, optional
        Steps as grid-point counts, either one int (used on every axis of
        ``e``) or one int per axis of ``e``.  Defaults to every combination
        of ``1 .. N_i // 2``.
    """
    axes = tuple(sorted(set(int(i) for i in e)))
    p = _check_p(p)
    if not axes:
        return norm_lp(f, p)
    N = f.resolution
    if h_steps is None:
        h_steps = itertools.product(*[range(1, N[i] // 2 + 1) for i in axes])
    best = 0.0
    for h in h_steps:
        steps = (int(h),) * len(axes) if np.ndim(h) == 0 else tuple(int(v) for v in h)
        if len(steps) != len(axes) or any(v <= 0 for v in steps):
            raise ParameterError(f"invalid step {h} for axes {axes}")
        diff = _mixed_difference(f.values, axes, steps)
        weight = math.prod((2 * math.pi * st / N[i]) ** (-r) for i, st in zip(axes, steps))
        best = max(best, weight * _reduce_lp([diff.ravel()], p))
    return best


def norm_h_diff(f: GridFunction, r: float, p: float, h_steps: Iterable | None = None) -> float:
    """Sum of the difference seminorms over all axis subsets (the ``H`` norm by differences)."""
    steps = list(h_steps) if h_steps is not None else None
    total = 0.0
    for size in range(f.dim + 1):
        for e in itertools.combinations(range(f.dim), size):
            sub = None
            if steps is not None and e:
                sub = itertools.product(steps, repeat=len(e))
            total += seminorm_h_diff(f, r, p, e, sub)
    return total


def vp_cross_kernel(n: int, d: int) -> TrigPolynomial:
    """Coefficient table of ``sum_{|s|_1 <= n} A_s`` (the kernel of ``A_{Q_n}``)."""
    freqs = cross_indices(n + d, d)
    weights = cross_multiplier(freqs, n, "vp")
    return TrigPolynomial(freqs, weights.astype(np.complex128), d=d)


def l1_kernel_norm(
    n: int,
    d: int,
    oversample: float = DEFAULT_OVERSAMPLE,
    resolution: Sequence[int] | None = None,
) -> float:
    """``(2 pi)^-d int |sum_{|s|_1 <= n} A_s(x)| dx`` by grid quadrature.

    This is the ``L_inf -> L_inf`` norm of ``A_{Q_n}``.
    """
    kernel = vp_cross_kernel(n, d)
    return norm_lp_poly(kernel, 1.0, oversample=oversample, resolution=resolution)
