import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaussfk.deficit import (A_THRESHOLD, DeficitRecord, conclusion_constant, deficit,
                             exponent_fit, f_weight, implied_constant_c, main_constant,
                             prop31_bound, resolved_measure, subcell_measure)
from gaussfk.eigen import first_eigenpair
from gaussfk.exceptions import DomainError, InsufficientDataError
from gaussfk.families import family_level
from gaussfk.gauss import GaussianGrid, Halfspace, gauss_measure, phi


def wedge(n, theta):
    return GaussianGrid(2, n).mask_from_level(family_level("wedge", theta))


@pytest.fixture(scope="module")
def wedge_records(profile):
    return {n: deficit(wedge(n, 3 * math.pi / 4), profile) for n in (128, 256)}


def test_f_weight_values():
    assert f_weight(0.5) == pytest.approx(1.0, abs=1e-15)
    assert f_weight(float(phi(1.0))) == pytest.approx(math.exp(0.5) / 2, rel=1e-12)
    assert f_weight(0.841344746) == pytest.approx(0.82436, abs=1e-5)


@settings(max_examples=100)
@given(st.floats(1e-6, 1 - 1e-6))
def test_f_weight_even(m):
    assert f_weight(m) == pytest.approx(f_weight(1.0 - m), rel=1e-6)
    assert f_weight(m) > 0


def test_conclusion_arithmetic():
    assert conclusion_constant(0.5, 1.0, 1.0) == pytest.approx(1.0 / 256, rel=1e-15)


@given(st.floats(1e-6, 1e6))
def test_c_beta_in_unit_interval(beta):
    c_beta = (beta / (beta + 1.0)) ** 2
    assert 0.0 < c_beta < 1.0
    assert conclusion_constant(0.5, beta, 1.0) == pytest.approx(0.5 * c_beta / 32.0)


def test_main_constant_pinned_by_shooting(profile, golden):
    ref = golden["main_constant_m05_shooting"]
    mc = main_constant(0.5, 1.0, n_samples=64, profile=profile)
    assert mc.r == 0.0
    assert mc.L == pytest.approx(ref["L"], rel=1e-6)
    assert mc.g == pytest.approx(ref["g"], rel=1e-6)
    assert mc.beta == pytest.approx(ref["beta"], rel=1e-6)
    assert mc.C_beta == pytest.approx(ref["C_beta"], rel=1e-6)
    assert mc.branch_constant == pytest.approx(ref["branch_constant"], rel=1e-6)
    assert mc.conclusion == pytest.approx(0.5 * ref["C_beta"] / 32.0, rel=1e-6)
    assert mc.C_m == min(mc.branch_constant, mc.conclusion)
    assert mc.C_m_of_c(2.0) == pytest.approx(0.5 * mc.conclusion)
    assert mc.T0(0.2) == pytest.approx(mc.beta / (4 * (1 + mc.beta)) * 0.2 * 0.5)


@pytest.mark.parametrize("m", [0.1, 0.3, 0.7, 0.9])
def test_main_constant_invariants(profile, m):
    mc = main_constant(m, 1.0, profile=profile)
    assert mc.beta > 0 and 0 < mc.C_beta < 1
    assert mc.C_m > 0


def test_main_constant_validation(profile):
    with pytest.raises(DomainError):
        main_constant(1.5, 1.0, profile=profile)
    with pytest.raises(ValueError):
        main_constant(0.5, 0.0, profile=profile)


def test_halfspace_record(grid256, profile):
    hs = Halfspace.from_angle(0.3, 0.2).rasterize(grid256)
    rec = deficit(hs, profile)
    assert abs(rec.D) <= rec.eps_disc
    assert rec.A <= 2.0 / grid256.n
    assert rec.D_A3 is None and rec.D_A2 is None
    assert rec.implied_c is None
    assert 0.0 <= rec.prop31 <= 1e-4


def test_record_fields(wedge_records):
    rec = wedge_records[256]
    assert rec.D > 3 * rec.eps_disc
    assert rec.ratios_defined
    assert rec.D_A3 == pytest.approx(rec.D / rec.A ** 3)
    assert rec.D_A2 == pytest.approx(rec.D / rec.A ** 2)
    assert rec.implied_c == pytest.approx(rec.prop31 / (2 * rec.D))
    row = rec.row()
    assert len(row) == 12 and row[-1] == "; ".join(rec.warnings)


def test_wedge_pair_pinned_by_doubled_resolution(wedge_records, golden):
    ref = golden["wedge_3pi4"]
    coarse, fine = wedge_records[128], wedge_records[256]
    d_ext = fine.D + (fine.D - coarse.D) / 3.0
    a_ext = fine.A + (fine.A - coarse.A) / 3.0
    assert d_ext == pytest.approx(ref["D_richardson"], rel=1e-6)
    assert a_ext == pytest.approx(ref["A_richardson"], rel=1e-6)
    # the fine value sits inside its own tolerance of the extrapolation
    assert abs(fine.D - d_ext) <= fine.eps_disc
    assert abs(fine.A - a_ext) <= 2.0 / 256


def test_wedge_extrapolation_confirmed_at_512(profile, golden):
    rec = deficit(wedge(512, 3 * math.pi / 4), profile, with_bound=False)
    assert rec.D == pytest.approx(golden["wedge_3pi4"]["D_richardson"], abs=2e-4)
    assert rec.A == pytest.approx(golden["wedge_3pi4"]["A_richardson"], abs=5e-3)


def test_prop31_pinned_by_doubled_resolution(wedge_records, golden):
    ref = golden["wedge_3pi4"]
    coarse, fine = wedge_records[128].prop31, wedge_records[256].prop31
    assert fine == pytest.approx(ref["prop31_n256"], rel=1e-6)
    assert abs(coarse - fine) <= 0.25 * fine


def test_prop31_validation_and_sign(grid128):
    res = first_eigenpair(grid128.mask_from_level(family_level("bump", 0.4)))
    value, skipped = prop31_bound(res, n_levels=8)
    assert value >= 0.0 and 0 <= skipped <= 8
    for bad in (0, 33):
        with pytest.raises(ValueError):
            prop31_bound(res, n_levels=bad)


def test_resolved_measure():
    grid = GaussianGrid(2, 128)
    assert resolved_measure(grid) == pytest.approx(2 * (1 - grid.total_mass) / A_THRESHOLD)
    assert 1e-6 < resolved_measure(grid) < 1e-4


def test_subcell_measure(grid256):
    hs = Halfspace.from_angle(0.3, 0.2).rasterize(grid256)
    assert subcell_measure(hs) == pytest.approx(float(phi(0.2)), abs=1e-4)
    from gaussfk.gauss import DomainMask

    assert subcell_measure(DomainMask(grid256, hs.inside)) is None
    assert abs(subcell_measure(hs) - float(phi(0.2))) <= abs(gauss_measure(hs) - float(phi(0.2))) + 1e-6


def test_implied_constant_nulls():
    base = dict(family="x", param=0.0, m=0.5, lam=1.1, g=1.0, D=0.1, A=0.3, eps_disc=1e-3)
    assert implied_constant_c(DeficitRecord(**base, prop31=0.4)) == pytest.approx(2.0)
    assert implied_constant_c(DeficitRecord(**base)) is None
    assert implied_constant_c(DeficitRecord(**dict(base, D=5e-4), prop31=0.4)) is None
    assert implied_constant_c(DeficitRecord(**base, prop31=0.0)) is None
    assert implied_constant_c(DeficitRecord(**dict(base, A=5e-4), prop31=0.4)) is None


@pytest.mark.parametrize("power", [2.0, 3.0])
def test_exponent_fit_exact_power_law(power):
    a = np.array([0.02, 0.05, 0.1, 0.2, 0.4])
    fit = exponent_fit(list(zip(a, 0.7 * a ** power)))
    assert fit.slope == pytest.approx(power, abs=1e-10)
    assert fit.r2 == pytest.approx(1.0, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(0.7), abs=1e-10)
    assert fit.n == 5


def test_exponent_fit_filters_and_insufficient():
    pts = [(0.1, 1e-3), (0.2, 8e-3), (0.0005, 1.0), (0.3, -1.0), (0.4, 6.4e-2)]
    with pytest.raises(InsufficientDataError):
        exponent_fit(pts)
    recs = [DeficitRecord("w", i, 0.5, 1.0, 1.0, a ** 3, a, 1e-6) for i, a in
            enumerate([0.05, 0.1, 0.2, 0.4])]
    recs.append(DeficitRecord("w", 9, 0.5, 1.0, 1.0, 1e-7, 0.3, 1e-6))  # below eps
    assert exponent_fit(recs).n == 4
