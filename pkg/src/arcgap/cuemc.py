"""Monte Carlo cross-validation against the unitary-matrix picture.

The determinants computed elsewhere in this package equal the probability
that every eigenvalue of the m-th power of a Haar-random N x N unitary
matrix lies in the arc of half-angle pi*epsilon centered at 1.  This
module samples the joint eigenvalue-angle density

    p(theta_1, ..., theta_N)  proportional to  prod_{p<q} |e^{i theta_p} - e^{i theta_q}|^2

with a single-angle Metropolis chain (uniform refresh and small Gaussian
steps mixed 50/50, working on the log weight), checks the sampler against
the exact power-sum moments E|Tr U^j|^2 = min(j, N), and estimates the
arc probability for comparison with exp(ln D).  Chains are driven by a
counter-based Philox generator, so identical (N, seed, ...) inputs give
bit-identical results and distinct seeds give independent streams.

Everything here is desk scale (N <= 8 or so): the probabilities decay
like exp(-c N^2) and Monte Carlo is hopeless beyond tiny N, which is
exactly why the determinant route exists.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .logdet import log_det
from .symbol import ArcConfiguration

__all__ = [
    "SpectrumSample",
    "ProbabilityEstimate",
    "MomentCheck",
    "McRecord",
    "sample_spectrum",
    "arc_event",
    "power_norms",
    "power_sums_squared",
    "estimate_power_gap_probability",
    "moment_check",
    "BURN_IN_SWEEPS_PER_N",
    "GAUSS_STEP",
]

BURN_IN_SWEEPS_PER_N = 50
GAUSS_STEP = 0.3  # radians; local move size next to the global uniform refresh
_PILOT_SWEEPS = 2000
_MAX_THIN = 50
_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SpectrumSample:
    """N eigenvalue angles with the sampler inputs that produced them."""

    angles: tuple
    seed: int
    sweeps_performed: int

    def __post_init__(self):
        if len(self.angles) < 1:
            raise ValueError("a spectrum sample needs at least one angle")
        if any(not (0.0 <= a < _TWO_PI) for a in self.angles):
            raise ValueError("angles must lie in [0, 2*pi)")

    @property
    def N(self) -> int:
        return len(self.angles)


@dataclass(frozen=True)
class ProbabilityEstimate:
    """Arc-probability estimate with ESS-aware error bars."""

    estimate: float
    standard_error: float
    samples_used: int
    autocorrelation_time: float


@dataclass(frozen=True)
class MomentCheck:
    """One power-sum moment E|p_j|^2 against its exact value min(j, N)."""

    N: int
    j: int
    estimate: float
    standard_error: float
    expected: float


@dataclass(frozen=True)
class McRecord:
    """Output row tying an estimate back to the exact determinant."""

    N: int
    m: int
    epsilon: float
    estimate: float
    stderr: float
    samples: int
    seed: int
    exact_logdet: float


# ---------------------------------------------------------------------------
# Chain internals
# ---------------------------------------------------------------------------


class _Chain:
    """Single-angle Metropolis walker on the CUE log weight."""

    _CHUNK = 256  # sweeps of random numbers drawn per generator call

    def __init__(self, N: int, seed: int):
        if N < 1:
            raise ValueError(f"N must be >= 1, got {N}")
        self.N = N
        self.rng = np.random.Generator(np.random.Philox(seed))
        # deterministic, well-separated start: the N-th roots of unity
        self.angles = [(_TWO_PI * j) / N for j in range(N)]
        self._buf_pos = self._CHUNK  # forces a refill on first use

    def _refill(self):
        n = self.N
        c = self._CHUNK
        self._refresh = self.rng.random((c, n)) < 0.5
        self._unif = self.rng.uniform(0.0, _TWO_PI, (c, n))
        self._gauss = self.rng.normal(0.0, GAUSS_STEP, (c, n))
        self._ln_u = np.log(self.rng.random((c, n)))
        self._buf_pos = 0

    def sweep(self):
        if self._buf_pos >= self._CHUNK:
            self._refill()
        i = self._buf_pos
        self._buf_pos += 1
        refresh = self._refresh[i]
        unif = self._unif[i]
        gauss = self._gauss[i]
        ln_u = self._ln_u[i]
        angles = self.angles
        n = self.N
        sin = math.sin
        log = math.log
        for j in range(n):
            old = angles[j]
            new = unif[j] if refresh[j] else (old + gauss[j]) % _TWO_PI
            delta = 0.0
            ok = True
            for k in range(n):
                if k == j:
                    continue
                s_new = sin((new - angles[k]) / 2.0)
                if s_new == 0.0:  # proposal collides with another angle
                    ok = False
                    break
                s_old = sin((old - angles[k]) / 2.0)
                delta += log(abs(s_new)) - log(abs(s_old))
            if ok and 2.0 * delta >= ln_u[j]:
                angles[j] = new

    def run(self, sweeps: int):
        for _ in range(sweeps):
            self.sweep()


def _integrated_autocorrelation(series: np.ndarray) -> float:
    """Initial-positive-sequence estimate of the autocorrelation time."""
    x = np.asarray(series, dtype=float)
    n = len(x)
    if n < 10:
        return 1.0
    x = x - x.mean()
    var = float(x @ x) / n
    if var == 0.0:
        return 1.0
    tau = 1.0
    for k in range(1, min(n // 3, 200)):
        rho = float(x[:-k] @ x[k:]) / ((n - k) * var)
        if rho <= 0.0:
            break
        tau += 2.0 * rho
    return tau


def _batch_means_stderr(series: np.ndarray, batches: int = 32) -> float:
    n = len(series)
    b = max(2, min(batches, n // 4))
    size = n // b
    means = np.asarray(series[: b * size], dtype=float).reshape(b, size).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(b))


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def sample_spectrum(N: int, seed: int, sweeps: int | None = None) -> SpectrumSample:
    """One (approximate) draw from the CUE eigenvalue-angle density.

    Runs a fresh chain for ``sweeps`` full sweeps (default and minimum:
    the burn-in threshold 50*N) and returns its final state.  Convergence
    is asserted by the moment checks, not here.
    """
    burn = BURN_IN_SWEEPS_PER_N * N
    if sweeps is None:
        sweeps = burn
    if sweeps < burn:
        raise ValueError(f"sweeps={sweeps} below the burn-in threshold {burn}")
    chain = _Chain(N, seed)
    chain.run(sweeps)
    return SpectrumSample(angles=tuple(chain.angles), seed=seed, sweeps_performed=sweeps)


def arc_event(sample: SpectrumSample, m: int, epsilon: float) -> bool:
    """True iff every eigenvalue of the m-th power lies in the target arc.

    The wrapped angle m*theta mod 2*pi must fall within pi*epsilon of 0
    (equivalently of 2*pi) for every angle: the arc of half-angle
    pi*epsilon centered at 1, endpoints included.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if not (0.0 < epsilon < 1.0):
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    bound = math.pi * epsilon
    for theta in sample.angles:
        phi = (m * theta) % _TWO_PI
        if min(phi, _TWO_PI - phi) > bound:
            return False
    return True


def power_norms(sample: SpectrumSample, m: int) -> dict:
    """Both scalar conventions for the distance of U^m from the identity.

    'max_two_sin_sq' is max_j 2*sin^2(m*theta_j/2) (the quoted form);
    'spectral_norm' is max_j |e^{i m theta_j} - 1| = max_j 2|sin(m*theta_j/2)|
    (the literal operator 2-norm of U^m - I).  Both are monotone in the
    same |sin|, so comparing them to 2*sin^2(pi*eps/2) respectively
    2*sin(pi*eps/2) defines the same event as ``arc_event``.
    """
    s = [abs(math.sin(m * t / 2.0)) for t in sample.angles]
    top = max(s)
    return {"max_two_sin_sq": 2.0 * top * top, "spectral_norm": 2.0 * top}


def _power_sums_squared(angles, js) -> list:
    out = []
    for j in js:
        re = sum(math.cos(j * t) for t in angles)
        im = sum(math.sin(j * t) for t in angles)
        out.append(re * re + im * im)
    return out


def power_sums_squared(sample: SpectrumSample, js) -> list:
    """|p_j|^2 = |sum_k e^{i j theta_k}|^2 for each j (moment statistics)."""
    return _power_sums_squared(sample.angles, js)


def _thinned_series(N, seed, samples, statistic, width):
    """Burn in, pick a thinning from a pilot run, then record ``samples`` draws."""
    chain = _Chain(N, seed)
    chain.run(BURN_IN_SWEEPS_PER_N * N)

    pilot = np.empty(_PILOT_SWEEPS)
    for i in range(_PILOT_SWEEPS):
        chain.sweep()
        pilot[i] = statistic(chain.angles)[0]
    thin = min(_MAX_THIN, max(1, math.ceil(_integrated_autocorrelation(pilot))))

    data = np.empty((samples, width))
    for i in range(samples):
        chain.run(thin)
        data[i] = statistic(chain.angles)
    return data, thin


def estimate_power_gap_probability(
    N: int,
    m: int,
    epsilon: float,
    samples: int = 100_000,
    seed: int = 0,
) -> ProbabilityEstimate:
    """MCMC estimate of the probability that U^m stays within the arc.

    Draws are decorrelated by pilot-measured thinning; the standard error
    comes from batch means over the retained draws (an effective-sample
    -size estimate, not the raw count).  Warns when the exact probability
    is below ~1e-3, where no reasonable chain length can resolve it.
    """
    if samples < 100:
        raise ValueError(f"samples={samples} too small for error estimation")
    exact = float(log_det(ArcConfiguration(m, epsilon), N).value)
    if exact < math.log(1e-3):
        warnings.warn(
            f"exact probability exp({exact:.2f}) is below 1e-3; the Monte Carlo "
            "estimate will be noise dominated",
            stacklevel=2,
        )
    bound = math.pi * epsilon

    def indicator(angles):
        for t in angles:
            phi = (m * t) % _TWO_PI
            if min(phi, _TWO_PI - phi) > bound:
                return (0.0,)
        return (1.0,)

    data, thin = _thinned_series(N, seed, samples, indicator, 1)
    series = data[:, 0]
    tau = _integrated_autocorrelation(series)
    return ProbabilityEstimate(
        estimate=float(series.mean()),
        standard_error=_batch_means_stderr(series),
        samples_used=samples,
        autocorrelation_time=tau * thin,
    )


def moment_check(N: int, js=(1, 2, 3), samples: int = 50_000, seed: int = 0) -> list:
    """Estimate E|p_j|^2 for each j and pair it with the exact min(j, N).

    One chain serves all requested j; the error bars are batch-means
    standard errors on the retained draws.
    """
    js = tuple(int(j) for j in js)
    if any(j < 1 for j in js):
        raise ValueError(f"moment orders must be >= 1, got {js}")

    data, _ = _thinned_series(N, seed, samples, lambda a: _power_sums_squared(a, js), len(js))
    out = []
    for col, j in enumerate(js):
        series = data[:, col]
        out.append(
            MomentCheck(
                N=N,
                j=j,
                estimate=float(series.mean()),
                standard_error=_batch_means_stderr(series),
                expected=float(min(j, N)),
            )
        )
    return out
