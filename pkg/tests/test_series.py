import math
from fractions import Fraction

import mpmath as mp
import pytest

from arcgap.constants import (
    RESOLVED_CONSTANT_SIGN,
    ZETA_PRIME_MINUS_ONE,
    ZETA_PRIME_MINUS_ONE_STR,
    expansion_constant,
    zeta_prime_minus_one,
)
from arcgap.logdet import log_det
from arcgap.series import (
    FreeEnergyTable,
    free_energy,
    multi_arc_expansion,
    multi_arc_series,
    n_form_expansion,
    one_interval_expansion,
    one_interval_series,
    reexpanded_multi_arc_series,
    scan_bracket_series,
)
from arcgap.symbol import ArcConfiguration


def test_zeta_prime_minus_one_two_independent_routes():
    with mp.workprec(200):
        direct = mp.zeta(-1, derivative=1)
        glaisher_route = mp.mpf(1) / 12 - mp.log(mp.glaisher)
        literal = mp.mpf(ZETA_PRIME_MINUS_ONE_STR)
        assert abs(direct - glaisher_route) < mp.mpf(10) ** -55
        assert abs(direct - literal) < mp.mpf(10) ** -49  # 50 significant digits stored
    assert ZETA_PRIME_MINUS_ONE == pytest.approx(-0.1654211437, abs=1e-10)
    assert float(zeta_prime_minus_one(300)) == pytest.approx(ZETA_PRIME_MINUS_ONE, rel=1e-15)


def test_expansion_constant_signs():
    gap = expansion_constant("plus") - expansion_constant("minus")
    assert gap == pytest.approx(6 * ZETA_PRIME_MINUS_ONE, rel=1e-14)
    with pytest.raises(ValueError):
        expansion_constant("either")
    assert RESOLVED_CONSTANT_SIGN == "plus"


def test_free_energy_examples():
    # tan(0) = 0 leaves the bare rational term
    assert free_energy(2, 1e-9) == pytest.approx(1 / 64, abs=1e-12)
    assert free_energy(3, 0.5) == pytest.approx(-13 / 256, abs=1e-15)
    assert free_energy(1, 0.5) == pytest.approx(-math.log(2) / 8, abs=1e-15)
    assert free_energy(0, 0.5) == pytest.approx(math.log(2) - math.log(math.sin(math.pi / 4)))
    with pytest.raises(ValueError):
        free_energy(4, 0.5)
    with pytest.raises(ValueError):
        free_energy(2, 1.5)


def test_free_energy_table():
    table = FreeEnergyTable()
    assert table.max_g(0.3) == 3
    with pytest.raises(ValueError):
        table.add_fit(3, 0.3, 0.0, 0.0)  # closed form exists
    table.add_fit(4, 0.3, -0.00737, 1e-9)
    assert table.max_g(0.3) == 4
    assert table.value(4, 0.3) == -0.00737
    assert table.value(2, 0.3) == free_energy(2, 0.3)
    with pytest.raises(KeyError):
        table.value(5, 0.3)


def test_reexpansion_identity_exact():
    # route A (transcription) == route B (binomial re-expansion), exactly
    for m in range(1, 8):
        for n2 in range(m):
            a = multi_arc_series(m, n2, 7)
            b = reexpanded_multi_arc_series(m, n2, 7)
            assert a.ln_coeff == b.ln_coeff == Fraction(-m, 4)
            assert a.terms == b.terms, (m, n2)


def test_series_skeleton_values():
    series = one_interval_series(2)
    assert series.terms[2] == {"lnsin": Fraction(1)}
    assert series.terms[-2] == {"F2": Fraction(-1)}
    assert series.ln_coeff == Fraction(-1, 4)
    # dominant term at eps = 0.5 is -(n^2/2) ln 2
    (p2, v2), *_ = series.term_values(10, 0.5)
    assert p2 == 2
    assert v2 == pytest.approx(-100 * math.log(2) / 2, rel=1e-12)


def test_one_interval_expansion_against_exact():
    # g_max = 1 truncation misses exactly the O(n^-2) tail
    n, eps = 50, 0.5
    exact = float(log_det(ArcConfiguration(1, eps), n).value)
    approx = one_interval_expansion(n, eps, g_max=1)
    resid = exact - approx
    assert abs(resid) < 1e-4
    assert abs(resid) > 1e-7
    assert resid == pytest.approx(-free_energy(2, eps) / n**2, rel=0.01)
    # adding the tails tightens the truncation by orders of magnitude
    better = one_interval_expansion(n, eps, g_max=3)
    assert abs(exact - better) < 1e-9


def test_sign_separation():
    # exactly one sign tracks the determinants; the other is off by ~0.9925
    n, eps = 120, 0.4
    exact = float(log_det(ArcConfiguration(1, eps), n).value)
    res_plus = exact - one_interval_expansion(n, eps, g_max=1, constant_sign="plus")
    res_minus = exact - one_interval_expansion(n, eps, g_max=1, constant_sign="minus")
    assert abs(res_plus) < 1e-4
    assert abs(abs(res_minus) - 0.9925) < 0.01


def test_multi_arc_reduces_to_one_interval_at_m_1():
    for n in (5, 21):
        for order in (0, 2, 4):
            a = multi_arc_expansion(1, n, 0.37, order=order)
            b = one_interval_series(order).evaluate(n, 0.37)
            assert a == pytest.approx(b, rel=1e-15)


def test_multi_arc_against_exact():
    m, eps = 5, 0.5
    for N in (97, 100, 104):
        exact = float(log_det(ArcConfiguration(m, eps), N, tol=1e-13).value)
        approx = multi_arc_expansion(m, N, eps, order=4)
        assert abs(exact - approx) < 5e-6, N


def test_multi_arc_consistent_with_weighted_single_arc():
    # numeric counterpart of the exact re-expansion identity: the series at
    # order 4 and the weighted single-arc evaluations differ only by
    # re-expansion tails beyond the truncation
    m, eps, N = 5, 0.5, 97
    n1, n2 = divmod(N, m)
    combined = (m - n2) * one_interval_expansion(n1, eps, g_max=3) + n2 * one_interval_expansion(
        n1 + 1, eps, g_max=3
    )
    series_value = multi_arc_expansion(m, N, eps, order=4)
    assert abs(series_value - combined) < 1e-4
    assert abs(series_value - combined) > 0  # they are different truncations


def test_multi_arc_rejects_n1_zero_and_deep_orders():
    with pytest.raises(ValueError):
        multi_arc_expansion(7, 4, 0.4)
    with pytest.raises(ValueError):
        multi_arc_expansion(2, 50, 0.4, order=8)  # needs F5
    table = FreeEnergyTable()
    table.add_fit(4, 0.4, -0.05, 1e-8)
    multi_arc_expansion(2, 50, 0.4, order=6, table=table)  # F4 fitted: fine
    with pytest.raises(ValueError):
        one_interval_expansion(30, 0.4, g_max=5, table=table)


def test_leading_orders_match_N_form():
    # the n1-series and the N-reordered first-two-orders stay O(1) apart
    m, eps = 3, 0.4
    half = math.pi * eps / 2
    for N in (31, 60, 121):
        lead = N * N / m * math.log(math.sin(half)) - m / 4 * math.log(N)
        full = multi_arc_expansion(m, N, eps, order=4)
        assert abs(full - lead) < 5.0
        assert abs(lead) > 100


def test_n_form_examples():
    # m = 1: reduces to the order-0 one-interval truncation exactly
    for N in (17, 50):
        a = n_form_expansion(1, N, 0.3)
        b = one_interval_expansion(N, 0.3, g_max=1)
        assert a == pytest.approx(b, rel=1e-14)
    # N divisible by m: the remainder term vanishes
    half = math.pi * 0.25
    v = n_form_expansion(5, 100, 0.5)
    lead = 100 * 100 / 5 * math.log(math.sin(half))
    assert v - lead == pytest.approx(
        -5 / 4 * math.log(100) + 5 / 4 * math.log(5) + 5 * expansion_constant("plus")
        - 5 / 4 * math.log(math.cos(half)),
        rel=1e-12,
    )


def test_n_form_residual_decays():
    m, eps = 3, 0.4
    config = ArcConfiguration(m, eps)
    resids = []
    for N in (50, 100, 150):
        exact = float(log_det(config, N, tol=1e-13).value)
        resids.append(abs(exact - n_form_expansion(m, N, eps)))
    assert resids[-1] < 1e-4
    assert resids[-1] < resids[0]


def test_scan_bracket_drops_only_top_free_energy():
    full = multi_arc_series(5, 2, 4)
    bracket = scan_bracket_series(5, 2, 4)
    assert "F3" in full.terms[-4]
    assert "F3" not in bracket.terms.get(-4, {})
    stripped = {p: {s: c for s, c in syms.items() if (p, s) != (-4, "F3")}
                for p, syms in full.terms.items()}
    stripped = {p: syms for p, syms in stripped.items() if syms}
    assert bracket.terms == stripped


def test_scan_bracket_matches_literal_transcription():
    # the exact bracket of the reference residual scan, written out literally
    def literal(m, n1, n2, eps):
        L = math.log(math.sin(math.pi * eps / 2))
        lc = math.log(math.cos(math.pi * eps / 2))
        F2 = free_energy(2, eps)
        return (
            n1 * n1 * m * L + 2 * n1 * n2 * L - m / 4 * math.log(n1)
            + m * expansion_constant("plus") - m / 4 * lc + n2 * L
            - n2 / (4 * n1) + n2 / (8 * n1**2) - m * F2 / n1**2
            - n2 / (12 * n1**3) + 2 * n2 * F2 / n1**3
            + n2 / (16 * n1**4) - 3 * n2 * F2 / n1**4
        )

    for m, n1, n2, eps in [(5, 18, 4, 0.6), (5, 19, 2, 0.35), (3, 25, 1, 0.5), (1, 40, 0, 0.7)]:
        built = scan_bracket_series(m, n2, 4).evaluate(n1, eps)
        assert built == pytest.approx(literal(m, n1, n2, eps), rel=1e-14)


def test_truncation_convention():
    series = multi_arc_series(3, 1, 5)
    assert min(series.terms) == -5
    truncated = series.truncate(2)
    assert min(truncated.terms) == -2
    with pytest.raises(ValueError):
        truncated.truncate(4)


def test_epsilon_tail_warning():
    with pytest.warns(UserWarning):
        one_interval_expansion(30, 0.97, g_max=1)


def test_leading_coefficient_monotone_in_epsilon():
    # d/d(eps) of the leading coefficient is positive: larger arcs, larger ln D
    for eps in (0.1, 0.5, 0.9):
        h = 1e-6
        up = math.log(math.sin(math.pi * (eps + h) / 2))
        dn = math.log(math.sin(math.pi * (eps - h) / 2))
        assert up > dn


def test_high_precision_evaluation_consistency():
    v_float = multi_arc_expansion(5, 97, 0.5, order=4)
    v_mp = multi_arc_expansion(5, 97, 0.5, order=4, prec_bits=200)
    assert abs(float(v_mp) - v_float) < 1e-9
