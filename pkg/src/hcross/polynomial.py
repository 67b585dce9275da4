"""Sparse trigonometric polynomials and uniform-grid samples on the torus."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .freq_index import lex_order


# 2 pi = _C1 + _C2 + _C3; _C1 and _C2 have few significant bits so q * _C1, q * _C2 are exact
_C1 = 6.28125
_C2 = 0.0019353071693331003
_C3 = 1.0253376606378076e-11


def reduce_angle(t: np.ndarray) -> np.ndarray:
    """``t`` modulo ``2 pi`` into ``[-pi, pi]``, accurate to a few ulps of the result."""
    q = np.rint(t / (2 * np.pi))
    return ((t - q * _C1) - q * _C2) - q * _C3


def phases(freqs: np.ndarray, points: np.ndarray) -> np.ndarray:
    """``k . x`` reduced modulo ``2 pi`` for every (point, frequency) pair, shape (npts, nfreq).

    Each coordinate is split as ``x = x_hi + x_lo`` with ``x_hi`` on a
    ``2^-24`` lattice, so ``k x_hi`` is exact for ``|k| < 2^26`` and its
    reduction loses nothing; the error is about ``eps * (pi + |k| 2^-24)``.
    """
    out = np.zeros((points.shape[0], freqs.shape[0]))
    for j in range(points.shape[1]):
        x = points[:, j]
        hi = np.round(x * 2.0**24) / 2.0**24
        k = freqs[:, j].astype(np.float64)
        out += reduce_angle(np.multiply.outer(hi, k))
        out += np.multiply.outer(x - hi, k)
    return out


class TrigPolynomial:
    """Finite sum ``sum_k c_k exp(i k.x)`` stored as sorted sparse arrays.

    Parameters
    ----------
    freqs : array_like of shape (n, d)
        Integer frequency vectors.  Repeated rows are summed.
    coeffs : array_like of shape (n,)
        Complex coefficients.  Exact zeros are dropped.
    d : int, optional
        Dimension; required when ``freqs`` is empty.
    """

    __slots__ = ("freqs", "coeffs")

    def __init__(self, freqs, coeffs, d: int | None = None):
        freqs = np.asarray(freqs, dtype=np.int64)
        coeffs = np.asarray(coeffs, dtype=np.complex128).reshape(-1)
        if freqs.size == 0:
            if d is None:
                d = freqs.shape[1] if freqs.ndim == 2 else None
            if d is None or d < 1:
                raise ValueError("dimension must be given for an empty polynomial")
            freqs = np.zeros((0, d), dtype=np.int64)
            coeffs = np.zeros(0, dtype=np.complex128)
        if freqs.ndim == 1:
            freqs = freqs.reshape(-1, 1) if d in (None, 1) else freqs.reshape(1, -1)
        if d is not None and freqs.shape[1] != d:
            raise ValueError(f"frequency rows have length {freqs.shape[1]}, expected {d}")
        if freqs.shape[0] != coeffs.shape[0]:
            raise ValueError("freqs and coeffs disagree in length")
        if freqs.shape[0] > 1:
            uniq, inverse = np.unique(freqs, axis=0, return_inverse=True)
            if uniq.shape[0] < freqs.shape[0]:
                summed = np.zeros(uniq.shape[0], dtype=np.complex128)
                np.add.at(summed, inverse.reshape(-1), coeffs)
                freqs, coeffs = uniq, summed
            else:
                order = lex_order(freqs)
                freqs, coeffs = freqs[order], coeffs[order]
        keep = coeffs != 0
        if not keep.all():
            freqs, coeffs = freqs[keep], coeffs[keep]
        self.freqs = freqs
        self.coeffs = coeffs
        self.freqs.setflags(write=False)
        self.coeffs.setflags(write=False)

    @classmethod
    def _trusted(cls, freqs: np.ndarray, coeffs: np.ndarray) -> "TrigPolynomial":
        # rows already sorted and unique; only zeros need dropping
        obj = cls.__new__(cls)
        keep = coeffs != 0
        obj.freqs = np.ascontiguousarray(freqs[keep], dtype=np.int64)
        obj.coeffs = np.ascontiguousarray(coeffs[keep], dtype=np.complex128)
        obj.freqs.setflags(write=False)
        obj.coeffs.setflags(write=False)
        return obj

    @classmethod
    def zero(cls, d: int) -> "TrigPolynomial":
        return cls(np.zeros((0, d), dtype=np.int64), [], d=d)

    @classmethod
    def from_dict(cls, table: Mapping[tuple[int, ...], complex], d: int | None = None):
        if not table:
            return cls.zero(d or 1)
        keys = list(table)
        return cls(np.array(keys, dtype=np.int64).reshape(len(keys), -1), [table[k] for k in keys], d=d)

    def to_dict(self) -> dict[tuple[int, ...], complex]:
        return {tuple(int(v) for v in k): complex(c) for k, c in zip(self.freqs, self.coeffs)}

    @property
    def dim(self) -> int:
        return self.freqs.shape[1]

    def __len__(self) -> int:
        return self.coeffs.shape[0]

    def __repr__(self) -> str:
        return f"TrigPolynomial(d={self.dim}, terms={len(self)})"

    def max_abs_freq(self) -> np.ndarray:
        """Per-axis maximum of ``|k_j|`` over the support (zeros if empty)."""
        if len(self) == 0:
            return np.zeros(self.dim, dtype=np.int64)
        return np.abs(self.freqs).max(axis=0)

    def lookup(self, freqs: np.ndarray) -> np.ndarray:
        """Coefficients at the given frequency rows (zero where absent)."""
        freqs = np.asarray(freqs, dtype=np.int64).reshape(-1, self.dim)
        out = np.zeros(freqs.shape[0], dtype=np.complex128)
        if len(self) == 0 or freqs.shape[0] == 0:
            return out
        allf = np.concatenate([self.freqs, freqs], axis=0)
        _, inverse = np.unique(allf, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        slot = np.full(inverse.max() + 1, -1, dtype=np.int64)
        slot[inverse[: len(self)]] = np.arange(len(self))
        hit = slot[inverse[len(self):]]
        found = hit >= 0
        out[found] = self.coeffs[hit[found]]
        return out

    def coefficient(self, k) -> complex:
        return complex(self.lookup(np.asarray(k).reshape(1, -1))[0])

    def restrict(self, mask: np.ndarray) -> "TrigPolynomial":
        """Keep the terms selected by a boolean mask over the support."""
        return TrigPolynomial._trusted(self.freqs[mask], self.coeffs[mask])

    def multiply(self, weights: np.ndarray) -> "TrigPolynomial":
        """Coefficientwise product with per-term weights (a Fourier multiplier)."""
        return TrigPolynomial._trusted(self.freqs, self.coeffs * weights)

    def __add__(self, other: "TrigPolynomial") -> "TrigPolynomial":
        if not isinstance(other, TrigPolynomial):
            return NotImplemented
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return TrigPolynomial(
            np.concatenate([self.freqs, other.freqs]),
            np.concatenate([self.coeffs, other.coeffs]),
            d=self.dim,
        )

    def __neg__(self) -> "TrigPolynomial":
        return TrigPolynomial._trusted(self.freqs, -self.coeffs)

    def __sub__(self, other: "TrigPolynomial") -> "TrigPolynomial":
        return self + (-other)

    def __mul__(self, scalar) -> "TrigPolynomial":
        return TrigPolynomial._trusted(self.freqs, self.coeffs * complex(scalar))

    __rmul__ = __mul__

    def same_support(self, other: "TrigPolynomial") -> bool:
        return self.freqs.shape == other.freqs.shape and bool(np.all(self.freqs == other.freqs))

    def equals(self, other: "TrigPolynomial", atol: float = 0.0) -> bool:
        """Coefficientwise comparison; ``atol=0`` demands exact equality."""
        diff = self - other
        if len(diff) == 0:
            return True
        return bool(np.abs(diff.coeffs).max() <= atol)

    def l2_norm(self) -> float:
        """``L_2`` norm under the normalized measure (Parseval)."""
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def __call__(self, points) -> np.ndarray:
        """Evaluate at arbitrary points of shape (npts, d) by direct summation."""
        points = np.asarray(points, dtype=np.float64).reshape(-1, self.dim)
        out = np.zeros(points.shape[0], dtype=np.complex128)
        if len(self) == 0:
            return out
        chunk = max(1, 2**22 // max(len(self), 1))
        for start in range(0, points.shape[0], chunk):
            phase = phases(self.freqs, points[start:start + chunk])
            out[start:start + chunk] = np.exp(1j * phase) @ self.coeffs
        return out


@dataclass(frozen=True)
class GridFunction:
    """Complex samples on the tensor grid ``x_j = 2 pi i / N_j``."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.complex128)
        if values.ndim < 1 or min(values.shape) < 1:
            raise ValueError("grid needs at least one point per axis")
        object.__setattr__(self, "values", values)

    @property
    def resolution(self) -> tuple[int, ...]:
        return tuple(self.values.shape)

    @property
    def dim(self) -> int:
        return self.values.ndim

    def axis_points(self, axis: int) -> np.ndarray:
        n = self.values.shape[axis]
        return 2 * np.pi * np.arange(n) / n

    @classmethod
    def from_callable(cls, func, resolution) -> "GridFunction":
        """Sample ``func(x_1, ..., x_d)`` (broadcasting arrays) on the grid."""
        axes = [2 * np.pi * np.arange(n) / n for n in resolution]
        mesh = np.meshgrid(*axes, indexing="ij")
        return cls(np.broadcast_to(func(*mesh), tuple(resolution)).copy())
