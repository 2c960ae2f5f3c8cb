"""Command-line front end.

Subcommands map one-to-one onto the library layers:

    det       exact log-determinant, direct and/or factorized
    asym      truncated expansion with a per-term breakdown
    residual  residual scans (including the bundled reference preset)
    fit       free-energy fitting by Richardson extrapolation
    mc        Monte Carlo estimate vs the exact determinant
    selftest  reduced verification suites, exit 3 on any failure

Every output file gets a metadata block echoing the full run
configuration, so results can be regenerated from the file alone.
Exit codes: 0 success, 1 usage error, 2 numerical/precision failure,
3 self-test failure.  ARCGAP_OUT_DIR sets the base directory for
relative output paths.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import mpmath as mp

from . import __version__
from .constants import RESOLVED_CONSTANT_SIGN
from .cuemc import McRecord, estimate_power_gap_probability
from .factorize import euclidean_split, log_det_factorized
from .harness import (
    IllConditionedFitError,
    InconclusiveSignError,
    emit_results,
    fit_free_energy,
    residual_scan,
    resolve_constant_sign,
    write_plot_data,
)
from .logdet import (
    DEFAULT_MAX_BITS,
    DEFAULT_TOLERANCE,
    PrecisionFailureError,
    log_det,
    log_det_dense_oracle,
    suggested_oracle_bits,
)
from .series import free_energy, multi_arc_series, CLOSED_FORM_MAX_G
from .symbol import ArcConfiguration

USAGE_ERROR, NUMERICAL_ERROR, SELFTEST_ERROR = 1, 2, 3

FIGURE_PRESET = {
    "m": 5,
    "N_range": range(90, 101),
    "eps_grid": [round(0.05 * i, 2) for i in range(2, 13)],
    "order": 4,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _parse_int_range(text: str) -> list:
    lo, _, hi = text.partition(":")
    try:
        lo, hi = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}")
    if hi < lo:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return list(range(lo, hi + 1))


def _parse_grid(text: str) -> list:
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"expected START:STOP:STEP, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise argparse.ArgumentTypeError("grid step must be positive")
        out = []
        x = start
        while x <= stop + 1e-12:
            out.append(round(x, 10))
            x += step
        return out
    return [float(p) for p in text.split(",") if p]


def _out_path(name: str | None, default: str) -> Path:
    base = Path(os.environ.get("ARCGAP_OUT_DIR", "."))
    p = Path(name) if name else Path(default)
    return p if p.is_absolute() else base / p


def _compact(value):
    if isinstance(value, (list, tuple, range)):
        items = list(value)
        if items and all(isinstance(v, int) for v in items) and items == list(
            range(items[0], items[-1] + 1)
        ):
            return f"{items[0]}:{items[-1]}"
        return ",".join(str(v) for v in items)
    return value


def _metadata(args, **extra) -> dict:
    meta = {"artifact": f"arcgap {__version__}", "subcommand": args.command}
    for key, value in sorted(vars(args).items()):
        if key in ("command", "func") or value is None:
            continue
        meta[key] = _compact(value)
    meta.update(extra)
    return meta


def _resolve_sign(args) -> str:
    if args.sign != "auto":
        return args.sign
    eps = getattr(args, "epsilon", None) or 0.4
    return resolve_constant_sign(min(max(eps, 0.15), 0.75))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_det(args):
    config = ArcConfiguration(args.m, args.epsilon)
    print(f"# arcgap {__version__} det  m={args.m} epsilon={args.epsilon} N={args.N} "
          f"tol={args.tol:g} method={args.method}")
    values = {}
    if args.method in ("direct", "both"):
        res = log_det(config, args.N, tol=args.tol, max_bits=args.max_bits)
        values["direct"] = res.value
        print(f"ln D (direct, levinson)    = {mp.nstr(res.value, 20)}   "
              f"[{res.working_precision_bits} bits, min pivot ratio {res.min_pivot_ratio:.3e}]")
    if args.method in ("factorized", "both"):
        res = log_det_factorized(config, args.N, tol=args.tol, max_bits=args.max_bits)
        sp = euclidean_split(args.N, args.m)
        values["factorized"] = res.value
        print(f"ln D (factorized, n1={sp.n1} n2={sp.n2}) = {mp.nstr(res.value, 20)}   "
              f"[{res.working_precision_bits} bits]")
    if len(values) == 2:
        diff = values["direct"] - values["factorized"]
        print(f"difference                 = {mp.nstr(diff, 6)}")
    if args.oracle:
        bits = suggested_oracle_bits(config, max(args.N, 1))
        res = log_det_dense_oracle(config, args.N, bits)
        print(f"ln D (dense oracle)        = {mp.nstr(res.value, 20)}   [{bits} bits]")
    return 0


def cmd_asym(args):
    sign = _resolve_sign(args)
    sp = euclidean_split(args.N, args.m)
    series = multi_arc_series(args.m, sp.n2, args.order, sign)
    print(f"# arcgap {__version__} asym  m={args.m} epsilon={args.epsilon} N={args.N} "
          f"(n1={sp.n1}, n2={sp.n2}) order={args.order} sign={sign}")
    total = 0.0
    for power, value in series.term_values(sp.n1, args.epsilon):
        label = "ln n1" if power == "ln" else f"n1^{power}"
        print(f"  term {label:>7}: {value:+.15e}")
        total += value
    print(f"truncated expansion = {total:+.15e}")
    if args.exact:
        exact = log_det(ArcConfiguration(args.m, args.epsilon), args.N, tol=args.tol)
        print(f"exact ln D          = {mp.nstr(exact.value, 16)}")
        print(f"residual            = {mp.nstr(exact.value - mp.mpf(total), 6)}")
    return 0


def cmd_residual(args):
    sign = _resolve_sign(args)
    if args.figure2:
        m, N_range = FIGURE_PRESET["m"], FIGURE_PRESET["N_range"]
        grid, order = FIGURE_PRESET["eps_grid"], FIGURE_PRESET["order"]
    else:
        missing = [n for n in ("m", "eps_grid", "N_range") if getattr(args, n) is None]
        if missing:
            flags = ", ".join("--" + n.replace("_", "-") for n in missing)
            print(f"arcgap residual: error: {flags} required without --figure2", file=sys.stderr)
            return USAGE_ERROR
        m, N_range, grid, order = args.m, args.N_range, args.eps_grid, args.order
    records = residual_scan(m, grid, N_range, truncation_order=order, constant_sign=sign)
    out = _out_path(args.out, "residual_scan.csv")
    meta = _metadata(args, resolved_sign=sign, m=m, order=order)
    emit_results(records, out, args.format, meta)
    print(f"wrote {len(records)} records to {out}")
    if args.plot_data:
        paths = write_plot_data(records, args.plot_data, sign)
        print(f"wrote plot data: {', '.join(str(p) for p in paths)}")
    return 0


def cmd_fit(args):
    sign = _resolve_sign(args)
    lo, hi = args.n_window[0], args.n_window[-1]
    result = fit_free_energy(args.g, args.epsilon, (lo, hi), constant_sign=sign)
    print(f"# arcgap {__version__} fit  g={args.g} epsilon={args.epsilon} "
          f"window=[{lo},{hi}] sign={sign}")
    print(f"F^({args.g})({args.epsilon}) = {result.estimate:.12g} +/- {result.uncertainty:.3g}")
    if args.g <= CLOSED_FORM_MAX_G:
        closed = free_energy(args.g, args.epsilon)
        print(f"closed form          = {closed:.12g}   (fit - closed = {result.estimate - closed:+.3e})")
    if args.out:
        out = _out_path(args.out, "")
        emit_results([result], out, args.format, _metadata(args, resolved_sign=sign))
        print(f"wrote {out}")
    return 0


def cmd_mc(args):
    est = estimate_power_gap_probability(
        args.N, args.m, args.epsilon, samples=args.samples, seed=args.seed
    )
    exact_ln = float(log_det(ArcConfiguration(args.m, args.epsilon), args.N).value)
    exact = math.exp(exact_ln)
    dev = abs(est.estimate - exact) / est.standard_error if est.standard_error else float("inf")
    print(f"# arcgap {__version__} mc  N={args.N} m={args.m} epsilon={args.epsilon} "
          f"samples={args.samples} seed={args.seed}")
    print(f"estimate = {est.estimate:.6f} +/- {est.standard_error:.6f} "
          f"(autocorrelation time {est.autocorrelation_time:.2f} sweeps)")
    print(f"exact    = {exact:.6f}  (ln D = {exact_ln:.6f});  |deviation| = {dev:.2f} SE")
    if args.out:
        rec = McRecord(
            N=args.N, m=args.m, epsilon=args.epsilon, estimate=est.estimate,
            stderr=est.standard_error, samples=est.samples_used, seed=args.seed,
            exact_logdet=exact_ln,
        )
        out = _out_path(args.out, "")
        emit_results([rec], out, args.format, _metadata(args))
        print(f"wrote {out}")
    return 0


def cmd_selftest(args):
    from . import selftest

    failures = selftest.run(full=args.full)
    return SELFTEST_ERROR if failures else 0


# ---------------------------------------------------------------------------
# Parser wiring
# ---------------------------------------------------------------------------


def _add_common(p, *, tol=True, sign=True, out=False):
    if tol:
        p.add_argument("--tol", type=float, default=DEFAULT_TOLERANCE,
                       help="absolute tolerance for exact log-determinants")
        p.add_argument("--max-bits", type=int, default=DEFAULT_MAX_BITS,
                       help="precision-escalation cap in mantissa bits")
    if sign:
        p.add_argument("--sign", choices=("plus", "minus", "auto"),
                       default=RESOLVED_CONSTANT_SIGN,
                       help="sign of the 3*zeta'(-1) constant term")
    if out:
        p.add_argument("--out", help="output file (relative paths land in ARCGAP_OUT_DIR)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="arcgap", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"arcgap {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("det", help="exact log-determinant")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--method", choices=("direct", "factorized", "both"), default="both")
    p.add_argument("--oracle", action="store_true",
                   help="also run the dense high-precision oracle")
    _add_common(p, sign=False)
    p.set_defaults(func=cmd_det)

    p = sub.add_parser("asym", help="truncated expansion, term by term")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--order", type=int, default=4)
    p.add_argument("--exact", action="store_true", help="also print exact ln D and residual")
    _add_common(p)
    p.set_defaults(func=cmd_asym)

    p = sub.add_parser("residual", help="residual scan (figure preset: --figure2)")
    p.add_argument("--figure2", action="store_true",
                   help="the bundled reference scan (m=5, N in [90,100], eps 0.1..0.6)")
    p.add_argument("--m", type=int)
    p.add_argument("--eps-grid", type=_parse_grid, help="START:STOP:STEP or comma list")
    p.add_argument("--N-range", type=_parse_int_range, help="LO:HI inclusive")
    p.add_argument("--order", type=int, default=4)
    p.add_argument("--plot-data", help="directory for two-column plot files")
    _add_common(p, out=True)
    p.set_defaults(func=cmd_residual)

    p = sub.add_parser("fit", help="fit a free energy from exact determinants")
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--n-window", type=_parse_int_range, default=list(range(40, 161)),
                   help="LO:HI window of matrix sizes (default 40:160)")
    _add_common(p, out=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("mc", help="Monte Carlo estimate vs exact determinant")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p, tol=False, sign=False, out=True)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("selftest", help="run the verification suites")
    p.add_argument("--full", action="store_true", help="full acceptance-size grids")
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (PrecisionFailureError, IllConditionedFitError, InconclusiveSignError) as exc:
        print(f"arcgap: numerical failure in {args.command}: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR
    except ValueError as exc:
        print(f"arcgap: invalid arguments: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
