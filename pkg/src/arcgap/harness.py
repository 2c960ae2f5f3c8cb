"""Residual scans, free-energy fitting, sign resolution, and result output.

This is the measurement side of the package: it compares exact
log-determinants against the truncated expansions, rescales the residuals
so they estimate the first dropped free energy, fits free energies beyond
the closed forms by Richardson extrapolation on single-arc determinants,
and resolves the sign ambiguity in the expansion's constant term.  All
outputs go through one CSV/JSON writer with a stable column schema and
deterministic ordering.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields as dataclass_fields, asdict
from pathlib import Path

import mpmath as mp

from .factorize import euclidean_split, log_det_factorized
from .logdet import log_det
from .series import (
    CLOSED_FORM_MAX_G,
    FreeEnergyTable,
    free_energy,
    one_interval_series,
    scan_bracket_series,
)
from .symbol import ArcConfiguration

__all__ = [
    "ResidualRecord",
    "FitResult",
    "IllConditionedFitError",
    "InconclusiveSignError",
    "residual_scan",
    "fit_free_energy",
    "resolve_constant_sign",
    "emit_results",
    "write_plot_data",
]


class IllConditionedFitError(ArithmeticError):
    """Richardson ladder too noisy: uncertainty exceeds the estimate."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class InconclusiveSignError(ArithmeticError):
    """Sign resolver could not separate the two candidates (logdet bug)."""


@dataclass(frozen=True)
class ResidualRecord:
    """One point of a residual scan.

    residual = exact_logdet - truncated_expansion by definition.
    scaled_residual carries the scan weight n1^order/m with the
    orientation that makes it estimate the first dropped free energy
    F^(order/2 + 1), i.e. scaled_residual = -residual * n1^order / m.
    """

    m: int
    N: int
    n1: int
    n2: int
    epsilon: float
    exact_logdet: float
    truncated_expansion: float
    residual: float
    scaled_residual: float
    truncation_order: int


@dataclass(frozen=True)
class FitResult:
    """Fitted free energy F^(g)(epsilon) with a ladder-spread uncertainty."""

    g: int
    epsilon: float
    estimate: float
    uncertainty: float
    n_window: tuple


# ---------------------------------------------------------------------------
# Residual scan
# ---------------------------------------------------------------------------


def residual_scan(
    m: int,
    epsilon_grid,
    N_range,
    truncation_order: int = 4,
    constant_sign: str = "plus",
    table: FreeEnergyTable | None = None,
) -> list:
    """Exact-minus-truncated residuals over a grid of (epsilon, N).

    The truncation is the scan bracket: all terms through n1^(-order)
    except the top even free energy (at the default order 4, the
    reference scan's bracket: F2 kept everywhere, F3 dropped), so the
    scaled residual clusters near F^(order/2+1)(epsilon).  Requires
    floor(N/m) >= 2 for every N.
    """
    if truncation_order % 2 or truncation_order < 2:
        raise ValueError(f"truncation_order must be even and >= 2, got {truncation_order}")
    # deepest free energy actually kept in the bracket (the top one is dropped)
    g_needed = max(
        scan_bracket_series(m, n2, truncation_order, constant_sign).max_free_energy_order()
        for n2 in range(m)
    )
    if table is None:
        avail = CLOSED_FORM_MAX_G
    else:
        avail = min(table.max_g(float(e)) for e in epsilon_grid)
    if g_needed > avail:
        raise ValueError(
            f"truncation order {truncation_order} needs free energies through "
            f"g={g_needed}, only g<={avail} available"
        )
    N_list = sorted(set(int(N) for N in N_range))
    for N in N_list:
        if N // m < 2:
            raise ValueError(f"scan needs floor(N/m) >= 2; N={N}, m={m} violates it")

    records = []
    for eps in sorted(float(e) for e in epsilon_grid):
        config = ArcConfiguration(m, eps)
        for N in N_list:
            sp = euclidean_split(N, m)
            # scaled residual must stay meaningful after the n1^order blowup
            tol = min(1e-11, 1e-7 * m / float(sp.n1) ** truncation_order)
            exact = log_det_factorized(config, N, tol=tol).value
            bracket = scan_bracket_series(m, sp.n2, truncation_order, constant_sign)
            trunc = bracket.evaluate(sp.n1, eps, prec_bits=120, table=table)
            # the defining identity is enforced on the stored binary64 values;
            # the rounding this costs (~ulp of ln D) is invisible after scaling
            exact_f, trunc_f = float(exact), float(trunc)
            residual = exact_f - trunc_f
            records.append(
                ResidualRecord(
                    m=m,
                    N=N,
                    n1=sp.n1,
                    n2=sp.n2,
                    epsilon=eps,
                    exact_logdet=exact_f,
                    truncated_expansion=trunc_f,
                    residual=residual,
                    scaled_residual=-residual * float(sp.n1) ** truncation_order / m,
                    truncation_order=truncation_order,
                )
            )
    return records


# ---------------------------------------------------------------------------
# Free-energy fitting
# ---------------------------------------------------------------------------


def _neville_to_zero(xs, ys, depth):
    """Polynomial extrapolation of (xs, ys) to x = 0, one column per level.

    Returns the list of diagonal values T[r] (the last entry of each
    Neville column), r = 0..depth.
    """
    n = len(xs)
    cur = list(ys)
    diag = [cur[-1]]
    for r in range(1, depth + 1):
        nxt = []
        for i in range(n - r):
            x0, x1 = xs[i], xs[i + r]
            nxt.append((x0 * cur[i + 1] - x1 * cur[i]) / (x0 - x1))
        cur = nxt
        diag.append(cur[-1])
    return diag


def fit_free_energy(
    g_target: int,
    epsilon: float,
    n_window,
    constant_sign: str = "plus",
    table: FreeEnergyTable | None = None,
    depth: int = 4,
    points: int = 10,
) -> FitResult:
    """Estimate F^(g_target)(epsilon) from exact single-arc determinants.

    Subtracts every known expansion term below g_target from
    ln D_n(1, eps), multiplies by -n^(2g-2), and Richardson-extrapolates
    in 1/n^2 (the single-arc series is even in 1/n).  Lower orders must be
    available: closed forms for g <= 3, fitted table entries above that.
    Needs a window of at least 6 points; raises IllConditionedFitError
    when the ladder spread exceeds the estimate itself.
    """
    if g_target < 2:
        raise ValueError(f"fitting starts at g=2, got {g_target}")
    lo, hi = int(min(n_window)), int(max(n_window))
    if hi - lo + 1 < 6:
        raise ValueError(f"window {n_window} too small for the Richardson ladder (>= 6)")
    for g in range(4, g_target):
        if table is None or table.fitted(g, epsilon) is None:
            raise ValueError(f"fit of g={g_target} needs fitted F^({g}) first")

    count = max(6, min(points, hi - lo + 1))
    ns = sorted({lo + round(i * (hi - lo) / (count - 1)) for i in range(count)})
    depth = min(depth, len(ns) - 1)

    known = one_interval_series(2 * g_target - 4, constant_sign)
    config = ArcConfiguration(1, epsilon)
    # accuracy of ln D sets the noise floor after the n^(2g-2) blowup
    tol = 1e-11 / float(hi) ** (2 * g_target - 2)

    xs, ys = [], []
    for n in ns:
        res = log_det(config, n, tol=tol)
        bits = res.working_precision_bits + 16
        with mp.workprec(bits):
            tail = res.value - known.evaluate(n, epsilon, prec_bits=bits, table=table)
            ys.append(-tail * mp.mpf(n) ** (2 * g_target - 2))
            xs.append(1 / mp.mpf(n) ** 2)

    diag = _neville_to_zero(xs, ys, depth)
    estimate = float(diag[-1])
    increments = [abs(float(diag[r] - diag[r - 1])) for r in range(1, len(diag))]
    uncertainty = increments[-1] if increments else float("inf")
    result = FitResult(
        g=g_target,
        epsilon=float(epsilon),
        estimate=estimate,
        uncertainty=uncertainty,
        n_window=(lo, hi),
    )
    if not math.isfinite(estimate) or uncertainty > abs(estimate):
        raise IllConditionedFitError(
            f"Richardson ladder for F^({g_target})({epsilon}) is ill-conditioned: "
            f"estimate={estimate:.3e}, uncertainty={uncertainty:.3e}; "
            "widen the window or supply more accurate lower orders",
            result=result,
        )
    return result


# ---------------------------------------------------------------------------
# Constant-sign resolution
# ---------------------------------------------------------------------------

REJECTED_SIGN_RESIDUAL = 0.9925  # |6 zeta'(-1)|, the gap between the two signs


def resolve_constant_sign(epsilon: float, n_window=(50, 150)) -> str:
    """Decide the sign of the 3*zeta'(-1) term from exact determinants.

    Evaluates the order-0 single-arc truncation under both signs along the
    window; the correct sign leaves residuals that decay toward zero, the
    rejected one leaves them pinned near |6 zeta'(-1)| ~ 0.9925.  Raises
    InconclusiveSignError if neither or both candidates behave (which
    would point at a log-determinant bug, not at the sign).
    """
    lo, hi = int(min(n_window)), int(max(n_window))
    ns = sorted({hi, (lo + hi) // 2, max(lo, hi - 7), max(lo, hi - 13)})
    config = ArcConfiguration(1, epsilon)
    med = {}
    for sign in ("plus", "minus"):
        series = one_interval_series(0, sign)
        resid = []
        for n in ns:
            ld = log_det(config, n, tol=1e-12).value
            resid.append(abs(float(ld - series.evaluate(n, epsilon, prec_bits=120))))
        resid.sort()
        med[sign] = resid[len(resid) // 2]
    small = {s for s, r in med.items() if r < 0.05}
    large = {
        s
        for s, r in med.items()
        if abs(r - REJECTED_SIGN_RESIDUAL) <= 0.1 * REJECTED_SIGN_RESIDUAL
    }
    if len(small) == 1 and len(large) == 1 and small != large:
        return small.pop()
    raise InconclusiveSignError(
        f"sign resolution at epsilon={epsilon} inconclusive: medians {med}"
    )


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def _sort_key(record):
    key = []
    for name in ("m", "epsilon", "N"):
        if hasattr(record, name):
            key.append(getattr(record, name))
    return tuple(key)


def _format_cell(value):
    if isinstance(value, float):
        return f"{value:.17g}"
    if isinstance(value, tuple):  # ranges like n_window; keep the cell comma-free
        return ":".join(str(v) for v in value)
    return str(value)


def emit_results(records, destination, format: str = "csv", metadata: dict | None = None) -> Path:
    """Write records to CSV or JSON with a stable schema.

    Columns are exactly the record dataclass fields in declaration order;
    floats carry 17 significant digits; rows are sorted by (m, epsilon, N)
    where those fields exist, so identical inputs give byte-identical
    files.  Metadata lands in '#'-prefixed header lines (CSV) or a
    top-level object (JSON).
    """
    if format not in ("csv", "json"):
        raise ValueError(f"format must be 'csv' or 'json', got {format!r}")
    records = sorted(records, key=_sort_key)
    if not records:
        raise ValueError("no records to write")
    names = [f.name for f in dataclass_fields(records[0])]
    path = Path(destination)
    try:
        if format == "csv":
            lines = []
            for key, value in (metadata or {}).items():
                lines.append(f"# {key}={value}")
            lines.append(",".join(names))
            for rec in records:
                lines.append(",".join(_format_cell(getattr(rec, n)) for n in names))
            path.write_text("\n".join(lines) + "\n")
        else:
            payload = {
                "metadata": metadata or {},
                "records": [asdict(rec) for rec in records],
            }
            path.write_text(json.dumps(payload, indent=2, default=str) + "\n")
    except OSError as exc:
        raise OSError(f"failed writing results to {path}: {exc}") from exc
    return path


def write_plot_data(records, dest_dir, constant_sign: str = "plus") -> list:
    """Two-column plot files: scaled residual vs epsilon per n2 group,
    plus the F^(g+1) reference curve sampled on the scan's epsilon grid.

    Returns the list of paths written.
    """
    dest = Path(dest_dir)
    dest.mkdir(parents=True, exist_ok=True)
    paths = []
    records = sorted(records, key=lambda r: (r.n2, r.epsilon, r.N))
    orders = {r.truncation_order for r in records}
    if len(orders) != 1:
        raise ValueError(f"mixed truncation orders in plot data: {orders}")
    top_g = orders.pop() // 2 + 1
    for n2 in sorted({r.n2 for r in records}):
        p = dest / f"scaled_residuals_n2_{n2}.dat"
        rows = [
            f"{r.epsilon:.17g} {r.scaled_residual:.17g}"
            for r in records
            if r.n2 == n2
        ]
        p.write_text("\n".join(rows) + "\n")
        paths.append(p)
    grid = sorted({r.epsilon for r in records})
    curve = dest / f"free_energy_{top_g}_curve.dat"
    if top_g <= CLOSED_FORM_MAX_G:
        rows = [f"{e:.17g} {free_energy(top_g, e):.17g}" for e in grid]
        curve.write_text("\n".join(rows) + "\n")
        paths.append(curve)
    return paths
