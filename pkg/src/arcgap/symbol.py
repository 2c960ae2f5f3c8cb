"""Arc configurations and the Fourier/Toeplitz data of their indicator symbols.

The symbol under study is the indicator function of a union of m arcs of
equal size, placed with an exact m-fold rotational symmetry on the unit
circle and centered on the m-th roots of unity.  The arc set covers a
total fraction epsilon of the circle, so each arc has angular half-width
pi*epsilon/m.  Its Fourier coefficients vanish except on multiples of m,
where they reproduce the coefficients of a single arc of half-width
pi*epsilon.  Everything downstream (determinants, factorization,
asymptotics) is built on the closed forms in this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np

__all__ = [
    "ArcConfiguration",
    "SymbolCoefficients",
    "ToeplitzMatrix",
    "fourier_coefficient",
    "first_row",
    "first_row_mp",
    "build_matrix",
]


@dataclass(frozen=True)
class ArcConfiguration:
    """Pair (m, epsilon) selecting the m-fold symmetric arc set.

    m is the number of arcs (m >= 1); epsilon in (0, 1) is the total
    fraction of the circle covered, so the total angular measure is
    2*pi*epsilon regardless of m.  epsilon is stored as a binary64 value;
    extended-precision code lifts that exact binary value, which keeps all
    precision tiers consistent with each other.
    """

    m: int
    epsilon: float

    def __post_init__(self):
        if not isinstance(self.m, int) or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m!r}")
        eps = float(self.epsilon)
        if not (0.0 < eps < 1.0) or not math.isfinite(eps):
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon!r}")
        object.__setattr__(self, "epsilon", eps)

    @property
    def arc_measure(self) -> float:
        """Total angular measure of the arc set (equals 2*pi*epsilon)."""
        return 2.0 * math.pi * self.epsilon

    def one_interval(self) -> "ArcConfiguration":
        """The single-arc configuration at the same epsilon (m = 1)."""
        return ArcConfiguration(1, self.epsilon)


def fourier_coefficient(config: ArcConfiguration, k: int) -> float:
    """k-th Fourier coefficient of the arc indicator symbol.

    Returns epsilon at k = 0, zero when k is not a multiple of m, and
    sin(pi*epsilon*j)/(pi*j) at k = j*m (j != 0).  The j-th value is
    exactly the j-th coefficient of the single arc [-pi*eps, pi*eps],
    which is the mechanism behind the block factorization; both are
    computed by the same expression so the equality is bit-for-bit.
    Symmetric under k -> -k.
    """
    k = abs(int(k))
    if k == 0:
        return config.epsilon
    if k % config.m:
        return 0.0
    j = k // config.m
    return math.sin(math.pi * config.epsilon * j) / (math.pi * j)


def first_row(config: ArcConfiguration, N: int) -> np.ndarray:
    """First row [t_0, ..., t_{N-1}] as a float64 array."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    return np.array([fourier_coefficient(config, k) for k in range(N)])


def first_row_mp(config: ArcConfiguration, N: int) -> list:
    """First row as mpmath values at the current working precision.

    epsilon is lifted from its exact binary64 value (no re-rounding), so
    rows computed at different precisions describe the same matrix.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    eps = mp.mpf(config.epsilon)
    row = [eps]
    for k in range(1, N):
        if k % config.m:
            row.append(mp.mpf(0))
        else:
            j = k // config.m
            row.append(mp.sin(mp.pi * eps * j) / (mp.pi * j))
    return row


@dataclass(frozen=True)
class SymbolCoefficients:
    """Callable view of the coefficient sequence k -> t_k of a symbol."""

    config: ArcConfiguration

    def __call__(self, k: int) -> float:
        return fourier_coefficient(self.config, k)


@dataclass(frozen=True)
class ToeplitzMatrix:
    """Symmetric Toeplitz matrix storing only its first row.

    Entry (p, q) equals t_{|p-q|}.  For every epsilon in (0, 1) the
    matrix is symmetric positive definite (the symbol is non-negative and
    not identically zero).
    """

    N: int
    row: tuple

    def entry(self, p: int, q: int) -> float:
        return self.row[abs(p - q)]

    def dense(self) -> np.ndarray:
        r = np.asarray(self.row)
        idx = np.abs(np.arange(self.N)[:, None] - np.arange(self.N)[None, :])
        return r[idx]


def build_matrix(config: ArcConfiguration, N: int) -> ToeplitzMatrix:
    """Toeplitz matrix of order N for the symbol of ``config``.

    Rejects N = 0; the empty-determinant convention D_0 = 1 belongs to
    the log-determinant layer, not to matrix construction.
    """
    if N < 1:
        raise ValueError(f"matrix order must be >= 1, got {N}")
    return ToeplitzMatrix(N=N, row=tuple(first_row(config, N)))
