"""Log-determinants of the arc-indicator Toeplitz matrices.

Two independent routes are provided:

* ``log_det`` -- the fast path.  A Levinson-Durbin recursion for symmetric
  positive-definite Toeplitz matrices, accumulating ln det as the sum of
  the logs of the successive prediction-error variances.  Working in log
  space keeps results finite even though the determinants themselves decay
  like sin(pi*eps/2)**(N^2/m) and underflow any fixed-exponent format.

* ``log_det_dense_oracle`` -- the slow ground truth.  Dense symmetric
  elimination with diagonal pivoting, carried out entirely in mpmath
  arithmetic at a caller-chosen bit count.

The matrices are savagely ill-conditioned (the smallest pivot decays
geometrically with N), so the fast path loses roughly
2*log2(1/sin(pi*eps/2)) bits per step on the single-arc configuration.
Fixed precision therefore cannot cover the parameter space; ``log_det``
climbs a precision ladder (double, ~double-double, then doubling mpmath
precision) and only accepts a value once two consecutive tiers that
completed without breakdown agree to the requested tolerance.  Breakdown
(a non-positive prediction error, or a pivot ratio under 1e3 times the
unit roundoff of the current tier) escalates; it never silently returns.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .symbol import ArcConfiguration, first_row, first_row_mp

__all__ = [
    "PrecisionFailureError",
    "LogDetResult",
    "log_det",
    "log_det_dense_oracle",
    "suggested_oracle_bits",
    "clear_ladder_cache",
    "DEFAULT_TOLERANCE",
    "DEFAULT_MAX_BITS",
    "ORACLE_SIZE_CAP",
]

DEFAULT_TOLERANCE = 1e-11
DEFAULT_MAX_BITS = 8192
ORACLE_SIZE_CAP = 200

# Escalation trigger: a prediction-error ratio below 1e3 units of roundoff
# of the current tier means the recursion is out of accurate bits.
RATIO_GUARD = 1e3


class PrecisionFailureError(ArithmeticError):
    """Raised when no supported precision tier can certify the result."""

    def __init__(self, message, *, config=None, N=None, bits=None):
        super().__init__(message)
        self.config = config
        self.N = N
        self.bits = bits


@dataclass(frozen=True)
class LogDetResult:
    """A natural-log determinant value with provenance.

    ``value`` is an mpmath float carrying the full accuracy of the
    accepted precision tier (use ``float(result.value)`` when binary64 is
    enough).  ``min_pivot_ratio`` is the smallest successive prediction
    error (or pivot) ratio met along the way, a conditioning diagnostic;
    ``working_precision_bits`` is the mantissa size of the accepted tier.
    """

    value: mp.mpf
    N: int
    config: ArcConfiguration
    method: str  # "levinson" | "dense-oracle" | "trivial"
    working_precision_bits: int
    min_pivot_ratio: float


# ---------------------------------------------------------------------------
# Levinson-Durbin ladders
# ---------------------------------------------------------------------------


class _FloatLadder:
    """Float64 Levinson state for one configuration, extensible in N.

    partial[n] = ln det T_n for 1 <= n <= valid_upto.  The recursion for
    step k only needs the first k coefficients, so the state can grow on
    demand and every prefix computed before a breakdown remains valid.
    """

    bits = 53

    def __init__(self, config: ArcConfiguration):
        self.config = config
        self._row = first_row(config, 1)
        self._a = np.zeros(0)
        self._err = 1.0  # normalized prediction-error variance (kappa update scale)
        self._ln_err = 0.0  # its log, accumulated separately to dodge underflow
        self._ln_t0 = math.log(config.epsilon)
        self.partials = [None, self._ln_t0]  # index by N; partials[0] unused
        self.ratios = [1.0]
        self.valid_upto = 1
        self.failed = False

    def ensure(self, N: int) -> bool:
        if N <= self.valid_upto:
            return True
        if self.failed:
            return False
        if len(self._row) < N:
            self._row = first_row(self.config, N)
        t0 = self.config.epsilon
        r = self._row / t0
        guard = RATIO_GUARD * 2.0 ** (-self.bits)
        ln_sum = self.partials[self.valid_upto]
        for k in range(self.valid_upto, N):
            a = self._a
            acc = r[k] - (a @ r[k - 1 : 0 : -1] if k > 1 else 0.0)
            kappa = acc / self._err
            ratio = 1.0 - kappa * kappa
            if not math.isfinite(ratio) or ratio <= guard or self._err == 0.0:
                self.failed = True
                return False
            self._a = np.concatenate((a - kappa * a[::-1], [kappa]))
            self._err *= ratio
            self._ln_err += math.log(ratio)
            self.ratios.append(ratio)
            ln_sum += self._ln_t0 + self._ln_err
            self.partials.append(ln_sum)
        self.valid_upto = N
        return True

    def value(self, N: int):
        return mp.mpf(self.partials[N])

    def min_ratio(self, N: int) -> float:
        return min(self.ratios[:N])


class _MpLadder:
    """mpmath Levinson state at a fixed precision, extensible in N."""

    def __init__(self, config: ArcConfiguration, bits: int):
        self.config = config
        self.bits = bits
        with mp.workprec(bits):
            self._row = first_row_mp(config, 1)
            self._ln_t0 = mp.log(self._row[0])
            self._a = []
            self._err = mp.mpf(1)
            self._ln_err = mp.mpf(0)
            self.partials = [None, self._ln_t0]
        self.ratios = [1.0]
        self.valid_upto = 1
        self.failed = False

    def _extend_row(self, N: int):
        eps = mp.mpf(self.config.epsilon)
        m = self.config.m
        for k in range(len(self._row), N):
            if k % m:
                self._row.append(mp.mpf(0))
            else:
                j = k // m
                self._row.append(mp.sin(mp.pi * eps * j) / (mp.pi * j))

    def ensure(self, N: int) -> bool:
        if N <= self.valid_upto:
            return True
        if self.failed:
            return False
        with mp.workprec(self.bits):
            self._extend_row(N)
            t0 = self._row[0]
            r = [x / t0 for x in self._row]
            guard = RATIO_GUARD * mp.mpf(2) ** (-self.bits)
            ln_sum = self.partials[self.valid_upto]
            one = mp.mpf(1)
            for k in range(self.valid_upto, N):
                a = self._a
                acc = r[k] - (mp.fdot(a, r[k - 1 : 0 : -1]) if k > 1 else 0)
                kappa = acc / self._err
                ratio = one - kappa * kappa
                if ratio <= guard:
                    self.failed = True
                    return False
                arev = a[::-1]
                self._a = [a[j] - kappa * arev[j] for j in range(len(a))]
                self._a.append(kappa)
                self._err *= ratio
                self._ln_err += mp.log(ratio)
                self.ratios.append(float(ratio))
                ln_sum += self._ln_t0 + self._ln_err
                self.partials.append(ln_sum)
            self.valid_upto = N
        return True

    def value(self, N: int):
        return self.partials[N]

    def min_ratio(self, N: int) -> float:
        return min(self.ratios[:N])


_LADDERS: dict = {}
_LADDERS_LOCK = threading.RLock()


def clear_ladder_cache():
    """Drop all cached Levinson states (mainly for tests and benchmarks)."""
    with _LADDERS_LOCK:
        _LADDERS.clear()


def _get_ladder(config: ArcConfiguration, bits: int):
    key = (config.m, config.epsilon, bits)
    with _LADDERS_LOCK:
        state = _LADDERS.get(key)
        if state is None:
            state = _FloatLadder(config) if bits == 53 else _MpLadder(config, bits)
            _LADDERS[key] = state
        return state


def _tier_sequence(max_bits: int):
    bits = 53
    while bits <= max_bits:
        yield bits
        bits *= 2


def log_det(
    config: ArcConfiguration,
    N: int,
    tol: float = DEFAULT_TOLERANCE,
    max_bits: int = DEFAULT_MAX_BITS,
) -> LogDetResult:
    """ln det of the order-N arc-indicator Toeplitz matrix.

    N = 0 returns 0 (empty-determinant convention D_0 = 1).  The result
    is certified by agreement of two consecutive precision tiers to
    within ``tol`` (absolute, in ln D); raises PrecisionFailureError if
    the ladder is exhausted below ``max_bits``.
    """
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    if N == 0:
        return LogDetResult(mp.mpf(0), 0, config, "trivial", 53, 1.0)

    prev = None
    with _LADDERS_LOCK:
        for bits in _tier_sequence(max_bits):
            state = _get_ladder(config, bits)
            if not state.ensure(N):
                continue
            value = state.value(N)
            if prev is not None and abs(value - prev) <= tol:
                if value > tol:
                    raise PrecisionFailureError(
                        f"ln D came out positive ({value}); matrix data corrupt",
                        config=config, N=N, bits=bits,
                    )
                return LogDetResult(
                    value=value,
                    N=N,
                    config=config,
                    method="levinson",
                    working_precision_bits=bits,
                    min_pivot_ratio=state.min_ratio(N),
                )
            prev = value
    raise PrecisionFailureError(
        f"no precision tier up to {max_bits} bits certified ln D at "
        f"m={config.m}, eps={config.epsilon}, N={N} (tol={tol:g}); "
        "the parameter regime is out of reach at the configured precision cap",
        config=config, N=N, bits=max_bits,
    )


# ---------------------------------------------------------------------------
# Dense high-precision oracle
# ---------------------------------------------------------------------------


def suggested_oracle_bits(config: ArcConfiguration, N: int, target_digits: int = 30) -> int:
    """Working precision for the dense oracle to deliver ``target_digits``.

    The pivots of the one-arc matrix decay like sin(pi*eps/2)**(2k), so a
    factorization of the m-arc matrix spans about
    2*(N/m)*log2(1/sin(pi*eps/2)) bits of dynamic range per block; the
    oracle needs that plus the requested accuracy plus slack.
    """
    s = math.sin(math.pi * config.epsilon / 2.0)
    span = 2.0 * (N / config.m + 1) * (-math.log2(s))
    return max(113, int(math.ceil(span + target_digits * 3.33 + 64)))


def log_det_dense_oracle(
    config: ArcConfiguration,
    N: int,
    precision_bits: int = 113,
    size_cap: int = ORACLE_SIZE_CAP,
) -> LogDetResult:
    """Ground-truth ln det by dense pivoted elimination in mpmath.

    Symmetric Gaussian elimination with diagonal pivoting, carried out
    entirely at ``precision_bits``; ln det is the sum of the logs of the
    pivots.  Use ``suggested_oracle_bits`` to pick a safe precision.
    Raises PrecisionFailureError on a non-positive pivot (the requested
    precision was insufficient for this regime) and ValueError when N
    exceeds ``size_cap`` or the precision is below binary64.
    """
    if N < 1:
        raise ValueError(f"oracle needs N >= 1, got {N}")
    if N > size_cap:
        raise ValueError(f"oracle size cap is {size_cap}, got N={N}")
    if precision_bits < 53:
        raise ValueError(f"precision_bits must be >= 53, got {precision_bits}")

    with mp.workprec(precision_bits):
        row = first_row_mp(config, N)
        A = [[row[abs(p - q)] for q in range(N)] for p in range(N)]
        ln_sum = mp.mpf(0)
        min_ratio = 1.0
        prev_pivot = None
        for i in range(N):
            # diagonal pivoting: bring the largest remaining diagonal entry up
            j = max(range(i, N), key=lambda t: A[t][t])
            if j != i:
                A[i], A[j] = A[j], A[i]
                for rrow in A:
                    rrow[i], rrow[j] = rrow[j], rrow[i]
            pivot = A[i][i]
            if pivot <= 0:
                raise PrecisionFailureError(
                    f"non-positive pivot at step {i} with {precision_bits} bits; "
                    "increase precision_bits (see suggested_oracle_bits)",
                    config=config, N=N, bits=precision_bits,
                )
            if prev_pivot is not None:
                min_ratio = min(min_ratio, float(pivot / prev_pivot))
            prev_pivot = pivot
            ln_sum += mp.log(pivot)
            inv = 1 / pivot
            Ai = A[i]
            for r_ in range(i + 1, N):
                f = A[r_][i] * inv
                if f == 0:
                    continue
                Ar = A[r_]
                for c in range(i + 1, N):
                    Ar[c] -= f * Ai[c]
        return LogDetResult(
            value=ln_sum,
            N=N,
            config=config,
            method="dense-oracle",
            working_precision_bits=precision_bits,
            min_pivot_ratio=min_ratio,
        )
