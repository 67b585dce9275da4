"""Dyadic frequency blocks and step hyperbolic crosses.

Frequency sets are returned as ``(n, d)`` int64 arrays whose rows are
distinct and sorted lexicographically.  A dyadic block is addressed by a
scale vector ``s`` with non-negative entries; along axis ``j`` it holds
the integers ``k_j`` with ``floor(2**(s_j - 1)) <= |k_j| < 2**s_j``, so
scale 0 holds only ``k_j = 0``.
"""

from __future__ import annotations

from math import comb
from typing import Iterator, Sequence

import numpy as np

from .errors import CapacityError, ParameterError

#: Largest frequency set that enumeration will materialize.
MAX_FREQS = 2**26

_INT64_MAX = np.iinfo(np.int64).max


def lex_order(freqs: np.ndarray) -> np.ndarray:
    """Permutation sorting the rows of ``freqs`` lexicographically."""
    freqs = np.asarray(freqs)
    if freqs.shape[0] == 0:
        return np.zeros(0, dtype=np.intp)
    return np.lexsort(freqs.T[::-1])


def _check_scales(s: Sequence[int]) -> tuple[int, ...]:
    s = tuple(int(v) for v in s)
    if len(s) == 0:
        raise ParameterError("block index must have length d >= 1")
    if any(v < 0 for v in s):
        raise ParameterError(f"block index entries must be >= 0, got {s}")
    return s


def axis_block(s: int) -> np.ndarray:
    """Sorted integers of the univariate dyadic block at scale ``s``."""
    if s == 0:
        return np.zeros(1, dtype=np.int64)
    pos = np.arange(2 ** (s - 1), 2**s, dtype=np.int64)
    return np.concatenate([-pos[::-1], pos])


def block_indices(s: Sequence[int]) -> np.ndarray:
    """Enumerate the dyadic block ``rho(s)``.

    Parameters
    ----------
    s : sequence of int
        Non-negative scale per axis.

    Returns
    -------
    ndarray of shape (2**sum(s), len(s))
        Block frequencies in lexicographic order.
    """
    s = _check_scales(s)
    size = 2 ** sum(s)
    if size > MAX_FREQS:
        raise CapacityError(f"block {s} has {size} frequencies (cap {MAX_FREQS})")
    axes = [axis_block(v) for v in s]
    grids = np.meshgrid(*axes, indexing="ij")
    # meshgrid in ij order over sorted axes is already lexicographic
    return np.stack([g.ravel() for g in grids], axis=1)


def compositions(total: int, d: int) -> Iterator[tuple[int, ...]]:
    """All scale vectors in N_0^d with entry sum equal to ``total``."""
    if d == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, d - 1):
            yield (first,) + rest


def scales_up_to(n: int, d: int) -> Iterator[tuple[int, ...]]:
    """All scale vectors with ``|s|_1 <= n``, ordered by level."""
    for level in range(n + 1):
        yield from compositions(level, d)


def layer_rank(n: int, d: int) -> int:
    """Number of frequencies with block level exactly ``n``.

    Equals ``2**n * binom(n + d - 1, d - 1)``; computed without
    enumeration.
    """
    if n < 0 or d < 1:
        raise ParameterError(f"need n >= 0 and d >= 1, got n={n}, d={d}")
    count = 2**n * comb(n + d - 1, d - 1)
    if count > _INT64_MAX:
        raise OverflowError(f"layer rank for n={n}, d={d} exceeds int64")
    return count


def cross_size(n: int, d: int) -> int:
    """Cardinality of the step hyperbolic cross ``Q_n``."""
    return sum(layer_rank(v, d) for v in range(n + 1))


def _union_of_blocks(scales: list[tuple[int, ...]], d: int) -> np.ndarray:
    total = sum(2 ** sum(s) for s in scales)
    if total > MAX_FREQS:
        raise CapacityError(f"frequency set of size {total} exceeds cap {MAX_FREQS}")
    if not scales:
        return np.zeros((0, d), dtype=np.int64)
    freqs = np.concatenate([block_indices(s) for s in scales], axis=0)
    return freqs[lex_order(freqs)]


def cross_indices(n: int, d: int) -> np.ndarray:
    """Frequencies of the step hyperbolic cross ``Q_n`` (union of blocks, ``|s|_1 <= n``)."""
    if n < 0 or d < 1:
        raise ParameterError(f"need n >= 0 and d >= 1, got n={n}, d={d}")
    return _union_of_blocks(list(scales_up_to(n, d)), d)


def layer_indices(n: int, d: int) -> np.ndarray:
    """Frequencies in ``Q_n \\ Q_{n-1}``; for ``n = 0`` the origin."""
    if n < 0 or d < 1:
        raise ParameterError(f"need n >= 0 and d >= 1, got n={n}, d={d}")
    return _union_of_blocks(list(compositions(n, d)), d)


def block_of(freqs: np.ndarray) -> np.ndarray:
    """Scale vector of the dyadic block containing each frequency row.

    The scale along an axis is the bit length of ``|k_j|``.
    """
    a = np.abs(np.asarray(freqs, dtype=np.int64))
    # frexp gives a = mant * 2**e with mant in [0.5, 1): e is the bit length
    _, e = np.frexp(a.astype(np.float64))
    return e.astype(np.int64)


def level_of(freqs: np.ndarray) -> np.ndarray:
    """Hyperbolic-cross level ``|s|_1`` of each frequency row."""
    freqs = np.asarray(freqs)
    if freqs.ndim != 2:
        raise ValueError("frequencies must be a 2-d array")
    return block_of(freqs).sum(axis=1)


def in_cross(freqs: np.ndarray, n: int) -> np.ndarray:
    """Boolean mask of rows lying in ``Q_n``."""
    return level_of(freqs) <= n
