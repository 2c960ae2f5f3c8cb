"""Factorization of the m-arc determinant into single-arc determinants.

Sorting the index set {0, ..., N-1} by residue mod m turns the m-arc
Toeplitz matrix into a block-diagonal matrix whose blocks are single-arc
Toeplitz matrices at the same epsilon: n2 blocks of size n1+1 and m-n2
blocks of size n1, where N = n1*m + n2 is the Euclidean division.  Hence

    ln D_N(m, eps) = (m - n2) * ln D_{n1}(1, eps) + n2 * ln D_{n1+1}(1, eps)

with the D_0 = 1 convention when n1 = 0.  The m > N case degenerates to
N * ln(eps): the matrix is diagonal and the gap event behaves like N
independent uniform angles.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp

from .logdet import DEFAULT_MAX_BITS, DEFAULT_TOLERANCE, LogDetResult, log_det
from .symbol import ArcConfiguration

__all__ = ["EuclideanSplit", "euclidean_split", "log_det_factorized", "residue_permutation"]


@dataclass(frozen=True)
class EuclideanSplit:
    """N = n1*m + n2 with 0 <= n2 <= m-1."""

    N: int
    m: int
    n1: int
    n2: int

    def __post_init__(self):
        if self.N != self.n1 * self.m + self.n2 or not (0 <= self.n2 < self.m):
            raise ValueError(f"inconsistent split {self!r}")


def euclidean_split(N: int, m: int) -> EuclideanSplit:
    """Quotient/remainder split of N by m (n1 = floor(N/m))."""
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    n1, n2 = divmod(N, m)
    return EuclideanSplit(N=N, m=m, n1=n1, n2=n2)


def residue_permutation(N: int, m: int) -> list:
    """Index order that sorts {0..N-1} by residue mod m (then by quotient).

    Applying this permutation symmetrically to the m-arc Toeplitz matrix
    exposes the block-diagonal structure behind the factorization: the
    first n2 residue classes yield blocks of size n1+1, the rest size n1.
    """
    return [q * m + res for res in range(m) for q in range((N - res + m - 1) // m)]


def log_det_factorized(
    config: ArcConfiguration,
    N: int,
    tol: float = DEFAULT_TOLERANCE,
    max_bits: int = DEFAULT_MAX_BITS,
) -> LogDetResult:
    """ln D_N(m, eps) through the single-arc factorization.

    Computes the two single-arc log-determinants with the m = 1
    configuration at the same epsilon and combines them with the
    multiplicities (m - n2, n2).  Precision failures of the underlying
    single-arc computations propagate.
    """
    split = euclidean_split(N, config.m)
    one = config.one_interval()
    if N == 0:
        return LogDetResult(mp.mpf(0), 0, config, "trivial", 53, 1.0)
    # sub-determinant tolerances add up with the multiplicities
    sub_tol = tol / (2 * config.m)
    parts = []
    if split.n1 > 0:  # n1 = 0 leaves D_0^(m-n2) = 1, no contribution
        parts.append((config.m - split.n2, log_det(one, split.n1, sub_tol, max_bits)))
    if split.n2 > 0:
        parts.append((split.n2, log_det(one, split.n1 + 1, sub_tol, max_bits)))

    bits = max([53] + [res.working_precision_bits for _, res in parts])
    min_ratio = 1.0
    method = "trivial"
    with mp.workprec(bits + 8):  # combine at the parts' precision
        value = mp.mpf(0)
        for mult, res in parts:
            value += mult * res.value
            min_ratio = min(min_ratio, res.min_pivot_ratio)
            method = res.method
    return LogDetResult(
        value=value,
        N=N,
        config=config,
        method=method,
        working_precision_bits=bits,
        min_pivot_ratio=min_ratio,
    )
