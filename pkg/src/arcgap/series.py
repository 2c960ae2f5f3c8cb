"""Large-N expansions of the arc-indicator log-determinants.

Every expansion here is represented exactly before it is evaluated: a
series is a map

    power of n1  ->  { symbol -> rational coefficient }

plus one rational coefficient for ln(n1).  The symbols are '1' (pure
rational), 'ln2', 'zeta' (zeta'(-1)), 'lnsin' (ln sin(pi*eps/2)), 'lncos'
(ln cos(pi*eps/2)) and 'F2', 'F3', ... (the free energies of the
underlying genus-0 curve).  Keeping coefficients as fractions lets the
multi-arc series be checked term-by-term, in exact arithmetic, against an
independent reconstruction: the single-arc series S applied to the block
sizes of the factorization, (m - n2)*S(n1) + n2*S(n1+1), re-expanded in
powers of 1/n1 with binomial and log series.  The two routes must agree
exactly; any transcription slip in a binomial coefficient shows up as a
rational mismatch at a specific power.

Free energies have closed forms for g <= 3; higher orders come from
numerical fits (see harness.fit_free_energy) via a FreeEnergyTable.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import mpmath as mp

from .constants import expansion_constant, sign_factor, zeta_prime_minus_one
from .factorize import euclidean_split

__all__ = [
    "free_energy",
    "FreeEnergyTable",
    "AsymptoticSeries",
    "one_interval_series",
    "multi_arc_series",
    "reexpanded_multi_arc_series",
    "one_interval_expansion",
    "multi_arc_expansion",
    "n_form_expansion",
    "scan_bracket_series",
    "CLOSED_FORM_MAX_G",
    "EPSILON_TAIL_WARN",
]

CLOSED_FORM_MAX_G = 3

# tan(pi*eps/2) blows up as eps -> 1 and the tails lose all uniformity;
# nothing quantifies the expansion there, so evaluation warns.
EPSILON_TAIL_WARN = 0.95


# ---------------------------------------------------------------------------
# Free energies of the genus-0 curve
# ---------------------------------------------------------------------------


def _check_eps(epsilon: float):
    if not (0.0 < epsilon < 1.0):
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon!r}")


def free_energy(g: int, epsilon: float) -> float:
    """Closed-form free energy F^(g)(epsilon) for g in {0, 1, 2, 3}.

    Orders g >= 4 have no closed form here; they are estimated from exact
    determinants by the fitting harness and live in a FreeEnergyTable.
    """
    _check_eps(epsilon)
    if g not in (0, 1, 2, 3):
        raise ValueError(f"closed forms exist for g <= {CLOSED_FORM_MAX_G}, got g={g}")
    half = math.pi * epsilon / 2.0
    if g == 0:
        return math.log(2.0) - math.log(math.sin(half))
    if g == 1:
        return 0.25 * math.log(math.cos(half))
    t2 = math.tan(half) ** 2
    if g == 2:
        return 1.0 / 64.0 - t2 / 32.0
    return -1.0 / 256.0 - t2 / 128.0 - 5.0 * t2 * t2 / 128.0


def _free_energy_mp(g: int, epsilon: float):
    """Closed forms at the current mpmath working precision."""
    half = mp.pi * mp.mpf(epsilon) / 2
    if g == 0:
        return mp.log(2) - mp.log(mp.sin(half))
    if g == 1:
        return mp.log(mp.cos(half)) / 4
    t2 = mp.tan(half) ** 2
    if g == 2:
        return mp.mpf(1) / 64 - t2 / 32
    if g == 3:
        return -mp.mpf(1) / 256 - t2 / 128 - 5 * t2**2 / 128
    raise ValueError(f"no closed form for g={g}")


class FreeEnergyTable:
    """Closed forms for g <= 3 plus numerically fitted orders g >= 4.

    Fitted entries are keyed by (g, epsilon) with their uncertainties;
    they are fed in by the fitting harness.
    """

    def __init__(self):
        self.closed_form_max_g = CLOSED_FORM_MAX_G
        self._fitted = {}

    def add_fit(self, g: int, epsilon: float, estimate: float, uncertainty: float):
        if g <= CLOSED_FORM_MAX_G:
            raise ValueError(f"g={g} has a closed form; fits start at g=4")
        self._fitted[(g, float(epsilon))] = (float(estimate), float(uncertainty))

    def fitted(self, g: int, epsilon: float):
        return self._fitted.get((g, float(epsilon)))

    def max_g(self, epsilon: float) -> int:
        g = CLOSED_FORM_MAX_G
        while (g + 1, float(epsilon)) in self._fitted:
            g += 1
        return g

    def value(self, g: int, epsilon: float) -> float:
        if g <= CLOSED_FORM_MAX_G:
            return free_energy(g, epsilon)
        entry = self.fitted(g, epsilon)
        if entry is None:
            raise KeyError(
                f"F^({g})({epsilon}) is not available: no closed form and no fit; "
                "run the free-energy fitter first"
            )
        return entry[0]


# ---------------------------------------------------------------------------
# Exact series skeletons
# ---------------------------------------------------------------------------


def _sym_add(terms: dict, power: int, symbol: str, coeff: Fraction):
    if coeff == 0:
        return
    bucket = terms.setdefault(power, {})
    new = bucket.get(symbol, Fraction(0)) + coeff
    if new == 0:
        bucket.pop(symbol, None)
        if not bucket:
            terms.pop(power, None)
    else:
        bucket[symbol] = new


@dataclass(frozen=True)
class AsymptoticSeries:
    """Exact expansion skeleton in powers of n1 (plus one ln n1 term).

    ``terms`` maps each power p (2, 1, 0, -1, ..., -order) to a map from
    symbol name to rational coefficient; ``ln_coeff`` multiplies ln(n1).
    Instances are treated as immutable; builders hand out fresh copies.
    """

    m: int
    n2: int
    order: int
    constant_sign: str
    ln_coeff: Fraction
    terms: dict = field(repr=False)

    def truncate(self, order: int) -> "AsymptoticSeries":
        """Drop all powers below -order (order 2l keeps the n1^(-2l) term)."""
        if order > self.order:
            raise ValueError(f"cannot extend truncation {self.order} to {order}")
        kept = {p: dict(syms) for p, syms in self.terms.items() if p >= -order}
        return AsymptoticSeries(self.m, self.n2, order, self.constant_sign, self.ln_coeff, kept)

    def drop_symbol(self, power: int, symbol: str) -> "AsymptoticSeries":
        """Copy of the series with one symbol removed at one power."""
        kept = {p: dict(syms) for p, syms in self.terms.items()}
        kept.get(power, {}).pop(symbol, None)
        return AsymptoticSeries(self.m, self.n2, self.order, self.constant_sign, self.ln_coeff, kept)

    def max_free_energy_order(self) -> int:
        gmax = 0
        for syms in self.terms.values():
            for s in syms:
                if s.startswith("F"):
                    gmax = max(gmax, int(s[1:]))
        return gmax

    def _symbol_values(self, epsilon, prec_bits, table):
        _check_eps(epsilon)
        if epsilon > EPSILON_TAIL_WARN:
            warnings.warn(
                f"expansion tails are uncontrolled for epsilon={epsilon} > "
                f"{EPSILON_TAIL_WARN} (tan(pi*eps/2) is large)",
                stacklevel=3,
            )
        gmax = self.max_free_energy_order()
        if prec_bits is None:
            half = math.pi * epsilon / 2.0
            vals = {
                "1": 1.0,
                "ln2": math.log(2.0),
                "zeta": zeta_prime_minus_one(),
                "lnsin": math.log(math.sin(half)),
                "lncos": math.log(math.cos(half)),
            }
            for g in range(2, gmax + 1):
                vals[f"F{g}"] = (
                    free_energy(g, epsilon)
                    if g <= CLOSED_FORM_MAX_G
                    else (table or FreeEnergyTable()).value(g, epsilon)
                )
            return vals
        with mp.workprec(prec_bits):
            half = mp.pi * mp.mpf(epsilon) / 2
            vals = {
                "1": mp.mpf(1),
                "ln2": mp.log(2),
                "zeta": zeta_prime_minus_one(prec_bits),
                "lnsin": mp.log(mp.sin(half)),
                "lncos": mp.log(mp.cos(half)),
            }
            for g in range(2, gmax + 1):
                if g <= CLOSED_FORM_MAX_G:
                    vals[f"F{g}"] = _free_energy_mp(g, epsilon)
                else:
                    vals[f"F{g}"] = mp.mpf((table or FreeEnergyTable()).value(g, epsilon))
            return vals

    def term_values(self, n1: int, epsilon: float, prec_bits=None, table=None):
        """(power, value) pairs plus the ln term, for display and summation."""
        if n1 < 1:
            raise ValueError(f"series needs n1 >= 1, got {n1}")
        vals = self._symbol_values(epsilon, prec_bits, table)

        def assemble():
            one = vals["1"]
            out = []
            for p in sorted(self.terms, reverse=True):
                coeff = sum(
                    (one * c.numerator) / c.denominator * vals[s]
                    for s, c in self.terms[p].items()
                )
                out.append((p, coeff * (one * n1) ** p))
            if self.ln_coeff:
                c = self.ln_coeff
                lnv = mp.log(n1) if prec_bits is not None else math.log(n1)
                out.append(("ln", (one * c.numerator) / c.denominator * lnv))
            return out

        if prec_bits is not None:
            with mp.workprec(prec_bits):
                return assemble()
        return assemble()

    def evaluate(self, n1: int, epsilon: float, prec_bits=None, table=None):
        """Numeric value at n1; float by default, mpf when prec_bits is set."""
        if prec_bits is not None:
            with mp.workprec(prec_bits):
                parts = [v for _, v in self.term_values(n1, epsilon, prec_bits, table)]
                return mp.fsum(parts)
        return math.fsum(v for _, v in self.term_values(n1, epsilon, None, table))


# ---------------------------------------------------------------------------
# Builders: single-arc series, multi-arc series, and the re-expansion route
# ---------------------------------------------------------------------------


def _constant_block(terms: dict, mult: Fraction, constant_sign: str):
    s = sign_factor(constant_sign)
    _sym_add(terms, 0, "ln2", mult / 12)
    _sym_add(terms, 0, "zeta", mult * 3 * s)
    _sym_add(terms, 0, "lncos", -mult / 4)


@functools.lru_cache(maxsize=None)
def one_interval_series(order: int, constant_sign: str = "plus") -> AsymptoticSeries:
    """Single-arc expansion skeleton: the m = 1 series in n.

    n^2*lnsin - (1/4)ln n - (1/4)lncos + (1/12)ln2 +/- 3*zeta'(-1)
    - sum_{g>=2} F^(g) n^(2-2g), truncated at n^(-order).
    """
    if order < 0:
        raise ValueError(f"order must be >= 0, got {order}")
    terms: dict = {}
    _sym_add(terms, 2, "lnsin", Fraction(1))
    _constant_block(terms, Fraction(1), constant_sign)
    g = 2
    while 2 * g - 2 <= order:
        _sym_add(terms, 2 - 2 * g, f"F{g}", Fraction(-1))
        g += 1
    return AsymptoticSeries(1, 0, order, constant_sign, Fraction(-1, 4), terms)


@functools.lru_cache(maxsize=None)
def multi_arc_series(m: int, n2: int, order: int, constant_sign: str = "plus") -> AsymptoticSeries:
    """Multi-arc expansion skeleton in n1, transcribed term by term.

    Leading block: m*n1^2*lnsin + 2*n2*n1*lnsin - (m/4)ln n1
    + m*((1/12)ln2 +/- 3 zeta'(-1)) - (m/4)lncos + n2*lnsin - n2/(4 n1);
    even tails -(m F^(l+1) - n2/(8l) + n2 sum_j C(2l-1, 2j-1) F^(j+1))/n1^(2l);
    odd tails n2*(-1/(4(2l+1)) + sum_j C(2l, 2j-1) F^(j+1))/n1^(2l+1).
    """
    if m < 1 or not (0 <= n2 < m):
        raise ValueError(f"need m >= 1 and 0 <= n2 < m, got m={m}, n2={n2}")
    if order < 0:
        raise ValueError(f"order must be >= 0, got {order}")
    terms: dict = {}
    _sym_add(terms, 2, "lnsin", Fraction(m))
    _sym_add(terms, 1, "lnsin", Fraction(2 * n2))
    _constant_block(terms, Fraction(m), constant_sign)
    _sym_add(terms, 0, "lnsin", Fraction(n2))
    if order >= 1:
        _sym_add(terms, -1, "1", Fraction(-n2, 4))
    for l in range(1, order // 2 + 1):
        p = -2 * l
        _sym_add(terms, p, f"F{l + 1}", Fraction(-m))
        _sym_add(terms, p, "1", Fraction(n2, 8 * l))
        for j in range(1, l):
            _sym_add(terms, p, f"F{j + 1}", Fraction(-n2 * comb(2 * l - 1, 2 * j - 1)))
        p = -(2 * l + 1)
        if -p <= order:
            _sym_add(terms, p, "1", Fraction(-n2, 4 * (2 * l + 1)))
            for j in range(1, l + 1):
                _sym_add(terms, p, f"F{j + 1}", Fraction(n2 * comb(2 * l, 2 * j - 1)))
    return AsymptoticSeries(m, n2, order, constant_sign, Fraction(-m, 4), terms)


@functools.lru_cache(maxsize=None)
def reexpanded_multi_arc_series(
    m: int, n2: int, order: int, constant_sign: str = "plus"
) -> AsymptoticSeries:
    """Independent reconstruction of the multi-arc series from first principles.

    Takes the single-arc skeleton S and expands (m - n2)*S(n1) + n2*S(n1+1)
    in powers of 1/n1: (n1+1)^2 exactly, ln(n1+1) via the alternating log
    series, and (n1+1)^(2-2g) via the binomial series with integer
    coefficients.  Exists solely to cross-check multi_arc_series; the two
    must agree coefficient by coefficient.
    """
    if m < 1 or not (0 <= n2 < m):
        raise ValueError(f"need m >= 1 and 0 <= n2 < m, got m={m}, n2={n2}")
    single = one_interval_series(order + 2, constant_sign)
    w0 = Fraction(m - n2)
    w1 = Fraction(n2)
    terms: dict = {}

    # (m - n2) * S(n1): powers carry over unchanged
    for p, syms in single.terms.items():
        if p >= -order:
            for s, c in syms.items():
                _sym_add(terms, p, s, w0 * c)
    ln_coeff = w0 * single.ln_coeff

    # n2 * S(n1 + 1): re-expand each piece around n1
    for p, syms in single.terms.items():
        if p == 2:
            # (n1+1)^2 = n1^2 + 2 n1 + 1
            for s, c in syms.items():
                _sym_add(terms, 2, s, w1 * c)
                _sym_add(terms, 1, s, 2 * w1 * c)
                _sym_add(terms, 0, s, w1 * c)
        elif p == 0:
            for s, c in syms.items():
                _sym_add(terms, 0, s, w1 * c)
        elif p < 0:
            # (n1+1)^(-l) = sum_k C(k+l-1, l-1) (-1)^k n1^(-l-k)
            l = -p
            for k in range(0, order - l + 1):
                b = Fraction(comb(k + l - 1, l - 1) * (-1) ** k)
                for s, c in syms.items():
                    _sym_add(terms, p - k, s, w1 * c * b)
        else:
            raise AssertionError(f"unexpected single-arc power {p}")
    # ln(n1+1) = ln n1 + sum_k (-1)^(k+1)/k n1^(-k)
    ln_coeff += w1 * single.ln_coeff
    for k in range(1, order + 1):
        _sym_add(terms, -k, "1", w1 * single.ln_coeff * Fraction((-1) ** (k + 1), k))

    return AsymptoticSeries(m, n2, order, constant_sign, ln_coeff, terms)


# ---------------------------------------------------------------------------
# Evaluated expansions
# ---------------------------------------------------------------------------


def one_interval_expansion(
    n: int,
    epsilon: float,
    g_max: int = CLOSED_FORM_MAX_G,
    constant_sign: str = "plus",
    prec_bits: int | None = None,
    table: FreeEnergyTable | None = None,
):
    """Single-arc expansion with free-energy tails through g_max.

    g_max = 1 is the order-0 truncation (no power tails); each further g
    adds the F^(g) n^(2-2g) term.  g beyond the closed forms needs fitted
    values in ``table``.
    """
    if n < 1:
        raise ValueError(f"expansion needs n >= 1, got {n}")
    if g_max < 1:
        raise ValueError(f"g_max must be >= 1, got {g_max}")
    _require_free_energies(g_max, epsilon, table)
    order = max(0, 2 * g_max - 2)
    return one_interval_series(order, constant_sign).evaluate(n, epsilon, prec_bits, table)


def _require_free_energies(g_max: int, epsilon: float, table):
    top = CLOSED_FORM_MAX_G if table is None else table.max_g(epsilon)
    if g_max > top:
        raise ValueError(
            f"g_max={g_max} exceeds available free energies (closed forms to "
            f"g={CLOSED_FORM_MAX_G}, fitted to g={top}); fit higher orders first"
        )


def multi_arc_expansion(
    m: int,
    N: int,
    epsilon: float,
    order: int = 4,
    constant_sign: str = "plus",
    prec_bits: int | None = None,
    table: FreeEnergyTable | None = None,
):
    """Multi-arc expansion of ln D_N(m, eps), truncated at n1^(-order).

    Order 2l requires free energies through g = l + 1.  Rejects n1 = 0
    (the expansion is in large n1; the m > N regime is exact and belongs
    to the factorization layer).
    """
    split = euclidean_split(N, m)
    if split.n1 == 0:
        raise ValueError(
            f"n1 = 0 for m={m}, N={N}: the large-n1 expansion is undefined; "
            "the m > N case is exact (N*ln eps)"
        )
    _require_free_energies(order // 2 + 1, epsilon, table)
    series = multi_arc_series(m, split.n2, order, constant_sign)
    return series.evaluate(split.n1, epsilon, prec_bits, table)


def n_form_expansion(
    m: int,
    N: int,
    epsilon: float,
    constant_sign: str = "plus",
    prec_bits: int | None = None,
):
    """o(1)-truncated expansion reordered in N instead of n1.

    (N^2 + n2*(m - n2))/m * lnsin - (m/4)ln N + (m/4)ln m
    + m*((1/12)ln2 +/- 3 zeta'(-1)) - (m/4)lncos.

    The quadratic-in-N coefficient comes from the exact identity
    m*n1^2 + 2*n1*n2 + n2 = (N^2 + n2*(m - n2))/m, so this form differs
    from the n1-form only by terms that vanish as N grows.
    """
    split = euclidean_split(N, m)
    if split.n1 == 0:
        raise ValueError(f"n1 = 0 for m={m}, N={N}: expansion undefined")
    _check_eps(epsilon)
    n2 = split.n2
    if prec_bits is None:
        half = math.pi * epsilon / 2.0
        lnsin = math.log(math.sin(half))
        lncos = math.log(math.cos(half))
        return (
            (N * N + n2 * (m - n2)) / m * lnsin
            - m / 4.0 * math.log(N)
            + m / 4.0 * math.log(m)
            + m * expansion_constant(constant_sign)
            - m / 4.0 * lncos
        )
    with mp.workprec(prec_bits):
        half = mp.pi * mp.mpf(epsilon) / 2
        lnsin = mp.log(mp.sin(half))
        lncos = mp.log(mp.cos(half))
        return (
            mp.mpf(N * N + n2 * (m - n2)) / m * lnsin
            - mp.mpf(m) / 4 * mp.log(N)
            + mp.mpf(m) / 4 * mp.log(m)
            + m * expansion_constant(constant_sign, prec_bits)
            - mp.mpf(m) / 4 * lncos
        )


def scan_bracket_series(m: int, n2: int, truncation_order: int = 4,
                        constant_sign: str = "plus") -> AsymptoticSeries:
    """Residual-scan bracket: order-2l series with its top free energy removed.

    Subtracting this bracket from the exact value and rescaling by
    n1^(2l)/m isolates F^(l+1)(eps) up to O(1/n1) corrections; at the
    default order 4 this is the reference residual-scan truncation (terms
    through n1^(-4) with F2 but without F3).
    """
    if truncation_order % 2 or truncation_order < 2:
        raise ValueError(f"scan bracket wants an even order >= 2, got {truncation_order}")
    series = multi_arc_series(m, n2, truncation_order, constant_sign)
    top_g = truncation_order // 2 + 1
    return series.drop_symbol(-truncation_order, f"F{top_g}")
