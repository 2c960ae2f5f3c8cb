"""Built-in verification suites behind ``arcgap selftest``.

Reduced versions of the library's cross-checks, printing one PASS/FAIL
line per suite.  ``full=True`` switches to the acceptance-size grids
(minutes instead of seconds).
"""

from __future__ import annotations

import math
import time

from .cuemc import estimate_power_gap_probability, moment_check
from .factorize import log_det_factorized
from .harness import resolve_constant_sign
from .logdet import log_det, log_det_dense_oracle, suggested_oracle_bits
from .series import multi_arc_series, reexpanded_multi_arc_series
from .symbol import ArcConfiguration


def _suite_oracle(full):
    ms = range(1, 8) if full else (1, 3, 5, 7)
    eps_grid = (0.1, 0.3, 0.5, 0.7, 0.9) if full else (0.1, 0.5, 0.9)
    Ns = range(1, 61) if full else (1, 5, 12, 25, 40)
    fails = []
    for m in ms:
        for eps in eps_grid:
            config = ArcConfiguration(m, eps)
            for N in Ns:
                fast = log_det(config, N).value
                oracle = log_det_dense_oracle(config, N, suggested_oracle_bits(config, N)).value
                if abs(float(fast - oracle)) > 1e-9:
                    fails.append(f"m={m} eps={eps} N={N}: |diff|={float(abs(fast - oracle)):.2e}")
    return fails


def _suite_factorization(full):
    ms = range(1, 8) if full else (2, 3, 5, 7)
    eps_grid = (0.1, 0.3, 0.5, 0.7, 0.9) if full else (0.1, 0.5, 0.9)
    Ns = range(1, 61) if full else (1, 4, 9, 23, 41, 60)
    fails = []
    for m in ms:
        for eps in eps_grid:
            config = ArcConfiguration(m, eps)
            for N in Ns:
                diff = log_det(config, N).value - log_det_factorized(config, N).value
                if abs(float(diff)) > 1e-9:
                    fails.append(f"m={m} eps={eps} N={N}: |diff|={float(abs(diff)):.2e}")
    return fails


def _suite_degenerate(full):
    fails = []
    for m in range(2, 13):
        for N in range(0, min(m, 9)):
            for eps in (0.25, 0.8):
                value = float(log_det(ArcConfiguration(m, eps), N).value)
                if abs(value - N * math.log(eps)) > 1e-12:
                    fails.append(f"m={m} N={N} eps={eps}: {value}")
    return fails


def _suite_sign(full):
    fails = []
    signs = set()
    for eps in (0.2, 0.4, 0.6):
        try:
            signs.add(resolve_constant_sign(eps))
        except Exception as exc:  # inconclusive resolution is a failure here
            fails.append(f"eps={eps}: {exc}")
    if len(signs) > 1:
        fails.append(f"sign depends on epsilon: {signs}")
    return fails


def _suite_series(full):
    fails = []
    for m in range(1, 8):
        for n2 in range(m):
            a = multi_arc_series(m, n2, 7)
            b = reexpanded_multi_arc_series(m, n2, 7)
            if a.terms != b.terms or a.ln_coeff != b.ln_coeff:
                fails.append(f"m={m} n2={n2}: coefficient mismatch")
    return fails


def _suite_moments(full):
    samples = 60_000 if full else 20_000
    fails = []
    for N in (2, 3, 4, 5):
        for check in moment_check(N, (1, 2, 3), samples=samples, seed=101 + N):
            dev = abs(check.estimate - check.expected)
            if dev > 3 * check.standard_error:
                fails.append(
                    f"N={N} j={check.j}: {check.estimate:.4f} vs {check.expected} "
                    f"({dev / check.standard_error:.1f} SE)"
                )
    return fails


def _suite_mc_agreement(full):
    samples = 150_000 if full else 40_000
    fails = []
    for N, m, eps in ((4, 5, 0.8), (4, 2, 0.8), (3, 1, 0.9)):
        est = estimate_power_gap_probability(N, m, eps, samples=samples, seed=3)
        exact = math.exp(float(log_det(ArcConfiguration(m, eps), N).value))
        if abs(est.estimate - exact) > 3 * est.standard_error:
            fails.append(
                f"N={N} m={m} eps={eps}: {est.estimate:.4f}±{est.standard_error:.4f} "
                f"vs exact {exact:.4f}"
            )
    return fails


SUITES = [
    ("oracle-equivalence", _suite_oracle),
    ("factorization-identity", _suite_factorization),
    ("degenerate-case", _suite_degenerate),
    ("sign-resolution", _suite_sign),
    ("series-reexpansion", _suite_series),
    ("sampler-moments", _suite_moments),
    ("mc-agreement", _suite_mc_agreement),
]


def run(full: bool = False) -> int:
    """Run all suites; print one line each; return the number of failures."""
    total_fail = 0
    for name, suite in SUITES:
        t0 = time.time()
        fails = suite(full)
        status = "PASS" if not fails else f"FAIL ({len(fails)})"
        print(f"[{status:>9}] {name:<24} {time.time() - t0:6.1f}s")
        for line in fails[:10]:
            print(f"            {line}")
        if len(fails) > 10:
            print(f"            ... and {len(fails) - 10} more")
        total_fail += len(fails)
    print(f"selftest: {'all suites passed' if not total_fail else f'{total_fail} failures'}")
    return total_fail
