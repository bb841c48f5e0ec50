import math

import numpy as np
import pytest
from scipy.special import gammaincc

from kohnen.errors import PrecisionError, ValidationError
from kohnen.lcentral import (
    GaussianCutoff,
    TwistedLSpec,
    central_value,
    chi_values,
    fundamental_discriminants,
    incomplete_gamma_by_quadrature,
    incomplete_gamma_cutoff,
    is_fundamental_discriminant,
    kronecker_chi,
    root_number,
    siegel_probe,
    waldspurger_ratio_scan,
)


# ---------------------------------------------------------------------------
# Kronecker characters
# ---------------------------------------------------------------------------

def test_chi_of_one_is_one():
    for D in fundamental_discriminants(100):
        assert kronecker_chi(D, 1) == 1


def test_chi_5_of_2():
    assert kronecker_chi(5, 2) == -1


def test_chi_8_of_3():
    assert kronecker_chi(8, 3) == -1


def test_chi_against_sympy_jacobi():
    from sympy import jacobi_symbol

    for D in (5, 8, 12, 13, -3, -4, -7, 21):
        for n in range(1, 60, 2):  # jacobi needs odd n
            assert kronecker_chi(D, n) == jacobi_symbol(D, n), (D, n)


def test_chi_completely_multiplicative():
    bound = 1000
    all_fundamental = [d for d in range(-100, 101) if is_fundamental_discriminant(d)]
    m = np.arange(1, bound + 1)
    prods = np.multiply.outer(m, m)
    for D in all_fundamental:
        table = chi_values(D, bound * bound)
        one_d = table[:bound]
        outer = np.multiply.outer(one_d, one_d)
        assert np.array_equal(outer, table[prods - 1]), D


def test_chi_periodic_with_period_D():
    for D in (5, 8, 13, 21, -3, -8):
        period = abs(D)
        for n in range(1, 3 * period):
            assert kronecker_chi(D, n) == kronecker_chi(D, n + period)


def test_chi_table_matches_pointwise():
    for D in (1, 5, 8, -20):
        tab = chi_values(D, 500)
        for n in range(1, 501):
            assert tab[n - 1] == kronecker_chi(D, n)


def test_fundamental_discriminant_classification():
    expected = [1, 5, 8, 12, 13, 17, 21, 24, 28, 29, 33, 37, 40, 41, 44, 53, 56, 57, 60, 61]
    assert fundamental_discriminants(61) == expected
    for bad in (0, 2, 3, 6, 7, 9, 25, 50):
        assert not is_fundamental_discriminant(bad)
    for good in (-3, -4, -7, -8, -11, -15, -19, -20):
        assert is_fundamental_discriminant(good)
    for bad in (-1, -2, -5, -6, -9, -12):
        assert not is_fundamental_discriminant(bad)


def test_root_numbers():
    assert root_number(1) == 1
    assert root_number(5) == 1
    assert root_number(-3) == -1
    with pytest.raises(ValidationError):
        root_number(0)


# ---------------------------------------------------------------------------
# cutoff kernels
# ---------------------------------------------------------------------------

def test_incomplete_gamma_closed_form_vs_scipy():
    ys = np.array([1e-3, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 35.0])
    ours = incomplete_gamma_cutoff(ys)
    ref = gammaincc(6, ys)
    assert np.max(np.abs(ours - ref)) < 1e-13


def test_incomplete_gamma_quadrature_matches_closed_form():
    for y in (0.01, 0.3, 1.7, 4.0, 9.5, 21.0):
        quad = incomplete_gamma_by_quadrature(y)
        closed = float(incomplete_gamma_cutoff(y))
        assert abs(quad - closed) < 1e-11, y


def test_cutoffs_tend_to_one_at_zero_and_decay():
    assert float(incomplete_gamma_cutoff(1e-9)) == pytest.approx(1.0, abs=1e-8)
    assert float(incomplete_gamma_cutoff(60.0)) < 1e-18
    g = GaussianCutoff()
    assert float(g(1e-6)[0]) == pytest.approx(1.0, abs=1e-6)
    assert abs(float(g(400.0)[0])) < 1e-7


def test_gaussian_cutoff_imaginary_part_negligible():
    g = GaussianCutoff()
    y = np.array([0.5, 3.0, 40.0])
    complex_vals = np.exp(np.multiply.outer(-np.log(y), g._u)) @ g._w
    assert np.max(np.abs(complex_vals.imag)) < 1e-10


# ---------------------------------------------------------------------------
# central values
# ---------------------------------------------------------------------------

def test_untwisted_central_value_anchor(tau_13k):
    cv = central_value(TwistedLSpec(tau_13k, 1))
    # frozen regression anchor, cross-validated by the Gaussian kernel below
    assert cv.value == pytest.approx(0.7921228386, abs=1e-8)
    assert cv.error_estimate < 1e-8
    assert not cv.forced_zero


def test_truncation_doubling_consistency(tau_13k):
    for D in (1, 5, 13, 24, 101, 197):
        lo = central_value(TwistedLSpec(tau_13k, D), truncation=30 * D)
        hi = central_value(TwistedLSpec(tau_13k, D), truncation=60 * D)
        assert abs(lo.value - hi.value) < 1e-6, D


def test_dual_kernel_agreement(tau_13k):
    for D in (1, 5, 8, 12, 29, 60, 124, 197):
        a = central_value(TwistedLSpec(tau_13k, D), kernel="incomplete-gamma")
        b = central_value(TwistedLSpec(tau_13k, D), kernel="gaussian")
        assert abs(a.value - b.value) < 1e-6, D


def test_negative_discriminants_forced_zero(tau_13k):
    for D in (-3, -4, -8, -20, -163):
        cv = central_value(TwistedLSpec(tau_13k, D))
        assert cv.forced_zero
        assert cv.value == 0.0
        assert abs(cv.value) < 1e-6


def test_rejects_non_fundamental_twist(tau_13k):
    with pytest.raises(ValidationError):
        TwistedLSpec(tau_13k, 6)


def test_truncation_floor_and_table_guards(tau_13k):
    with pytest.raises(PrecisionError):
        central_value(TwistedLSpec(tau_13k, 5), truncation=10)
    short = tau_13k[:100]
    with pytest.raises(PrecisionError):
        central_value(TwistedLSpec(short, 5))


def test_values_are_finite_and_real(tau_13k):
    for D in fundamental_discriminants(60):
        cv = central_value(TwistedLSpec(tau_13k, D))
        assert math.isfinite(cv.value)
        assert cv.error_estimate >= 0.0


# ---------------------------------------------------------------------------
# Waldspurger scan
# ---------------------------------------------------------------------------

def test_ratio_scan_constancy_small(form_5000, tau_13k):
    scan = waldspurger_ratio_scan(form_5000, 60, tau_13k)
    assert scan.spread <= 1.02
    # the proportionality constant is recorded, not asserted; freeze loosely
    assert scan.min_ratio == pytest.approx(1.26243, rel=1e-3)


def test_ratio_scan_rows_cover_all_fundamental_D(form_5000, tau_13k):
    scan = waldspurger_ratio_scan(form_5000, 60, tau_13k)
    assert [row.D for row in scan.rows] == fundamental_discriminants(60)
    for row in scan.rows:
        if row.l_value >= scan.l_cutoff:
            assert row.ratio == pytest.approx(row.af_squared / row.l_value)
        else:
            assert row.ratio is None


def test_ratio_stability_under_truncation_doubling(form_5000, tau_13k):
    for D in (5, 13, 40):
        lo = central_value(TwistedLSpec(tau_13k, D), truncation=30 * D)
        hi = central_value(TwistedLSpec(tau_13k, D), truncation=60 * D)
        af2 = form_5000.normalized_coefficient(D) ** 2
        assert abs(af2 / lo.value - af2 / hi.value) / (af2 / lo.value) < 0.005


def test_vanishing_coherence(form_5000, tau_13k):
    # Waldspurger: a_f(D) = 0 should force a (numerically) vanishing L-value
    scan = waldspurger_ratio_scan(form_5000, 200, tau_13k)
    for row in scan.rows:
        if row.af_squared == 0.0:
            assert row.l_value < max(row.error_estimate, 1e-6)


def test_scan_requires_enough_coefficients(form_5000, tau_13k):
    with pytest.raises(PrecisionError):
        waldspurger_ratio_scan(form_5000, 6000, tau_13k)


def test_scan_requires_ell_6(tau_13k):
    from kohnen.forms import build_plus_cusp_form

    other = build_plus_cusp_form(8, 600)
    with pytest.raises(ValidationError):
        waldspurger_ratio_scan(other, 50, tau_13k)


# ---------------------------------------------------------------------------
# Siegel probe
# ---------------------------------------------------------------------------

def test_siegel_probe_rows(tau_13k, sieve_1e6):
    probe = siegel_probe(tau_13k, 200, sieve_1e6)
    ps = [row.p for row in probe.rows]
    assert ps == sorted(ps)
    assert all(p % 4 == 1 for p in ps)
    assert ps[0] == 5 and ps[-1] == 197
    assert probe.min_nonzero is not None and probe.min_nonzero > 0
    for row in probe.rows:
        assert set(row.reference_curves) == {0.05, 0.1, 0.2}
        assert row.reference_curves[0.1] == pytest.approx(row.p**-0.1)


def test_siegel_probe_observed_floor(tau_13k, sieve_1e6):
    # measured: the smallest nonzero value for p <= 200 sits at p = 137 and is
    # far below every p^{-eps} curve at unit implied constant, so the probe
    # reports the comparison instead of asserting it
    probe = siegel_probe(tau_13k, 200, sieve_1e6)
    assert probe.min_nonzero == pytest.approx(0.0029775177, rel=1e-4)
    assert not probe.all_above(0.2)
    assert not probe.all_above(0.05)
    by_p = {row.p: row for row in probe.rows}
    assert by_p[29].l_value == pytest.approx(0.1124589, rel=1e-4)
    assert by_p[5].above[0.2] and by_p[5].above[0.05]
