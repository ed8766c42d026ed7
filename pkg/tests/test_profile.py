import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaussfk.exceptions import DomainError
from gaussfk.gauss import phi
from gaussfk.profile import (FaberKrahnProfile, ProfileTable, convexity_check, g_inverse,
                             g_profile, lambda2_halfline, lambda_halfline,
                             lipschitz_forward_check, local_lipschitz_L, shooting_eigenvalue)

# Frozen values of the shooting oracle (adaptive DOP853, independent of the
# tridiagonal solver).
SHOOTING = {
    -3.0: 5.295425514117164,
    -2.0: 3.424815709374996,
    -1.0: 2.0,
    -0.5: 1.4486867745351857,
    0.0: 1.0,
    0.5: 0.6488354864758565,
    0.8: 0.4821520970913621,
    1.0: 0.38823829470671056,
    2.0: 0.09727459585883791,
    3.0: 0.011605703647389594,
}
SHOOTING_SECOND = {-1.0: 4.401131601471414, 0.0: 3.0, 1.0: 2.0}


def test_hermite_anchors():
    # Hermite polynomials vanishing at r: x (r = 0), x^2 - 1 (r = -1),
    # x^3 - 3x (second mode at r = 0) and x^2 - 1 again (second mode at r = 1).
    assert abs(lambda_halfline(0.0) - 1.0) < 1e-5
    assert abs(lambda2_halfline(0.0) - 3.0) < 1e-4
    assert abs(lambda_halfline(-1.0) - 2.0) < 1e-5
    assert abs(lambda2_halfline(1.0) - 2.0) < 1e-4


@pytest.mark.parametrize("r", sorted(SHOOTING))
def test_grid_solver_matches_frozen_shooting(r):
    assert lambda_halfline(r) == pytest.approx(SHOOTING[r], abs=1e-5)


@pytest.mark.parametrize("r", sorted(SHOOTING_SECOND))
def test_second_eigenvalue_matches_shooting(r):
    assert lambda2_halfline(r) == pytest.approx(SHOOTING_SECOND[r], abs=1e-4)


@pytest.mark.parametrize("r", [-2.0, 0.5, 2.0])
def test_shooting_reproduces_frozen_values(r):
    assert shooting_eigenvalue(r) == pytest.approx(SHOOTING[r], rel=1e-9)


def test_second_shooting_mode():
    assert shooting_eigenvalue(1.0, index=1) == pytest.approx(2.0, abs=1e-7)


def test_eigenvalue_curve_decreasing():
    rs = np.linspace(-3, 3, 25)
    vals = np.array([lambda_halfline(r) for r in rs])
    assert np.all(np.diff(vals) < 0)
    assert np.all(vals > 0)


def test_convexity_check():
    rs = np.round(np.arange(-3, 3.001, 0.1), 9)
    vals = np.array([lambda_halfline(r) for r in rs])
    d2, ok = convexity_check(rs, vals, tol=1e-4)
    assert ok and d2 > -1e-4
    d2, ok = convexity_check(rs, -vals, tol=1e-4)
    assert not ok


@pytest.mark.parametrize("r,h", [(-2.0, 0.2), (0.0, 0.1), (1.5, 0.05), (2.5, 0.2)])
def test_lipschitz_forward_bound(r, h):
    ratio, bound, ok = lipschitz_forward_check(r, h)
    assert ok
    assert 0 <= ratio <= bound + 10 * 1e-6 / h


def test_profile_at_half_is_one():
    assert g_profile(0.5) == pytest.approx(1.0, abs=1e-5)


def test_profile_at_phi_one():
    assert g_profile(float(phi(1.0))) == pytest.approx(SHOOTING[1.0], abs=1e-5)


def test_inverse_round_trip():
    m = g_inverse(SHOOTING[0.8])
    assert m == pytest.approx(float(phi(0.8)), abs=1e-5)


def test_inverse_out_of_range():
    with pytest.raises(DomainError):
        g_inverse(1e6)
    with pytest.raises(DomainError):
        g_inverse(1.0, bracket=(0.5, 0.2))


def test_estimator_matches_direct(profile):
    for r in (-3.0, -0.5, 0.5, 3.0):
        assert profile(float(phi(r))) == pytest.approx(SHOOTING[r], rel=1e-5)


def test_estimator_outside_table_falls_back(profile):
    m = float(phi(-4.5))
    assert profile(m) == pytest.approx(lambda_halfline(-4.5), rel=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 0.99))
def test_estimator_inverse_round_trip(profile, m):
    assert profile.inverse(profile(m)) == pytest.approx(m, abs=1e-6)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.02, 0.98), st.floats(0.0, 0.5))
def test_profile_monotone_in_measure(profile, m, dm):
    m2 = min(m + dm + 1e-3, 0.99)
    assert profile(m2) < profile(m)


def test_estimator_requires_fit():
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        FaberKrahnProfile().predict(0.5)


def test_estimator_params_round_trip():
    est = FaberKrahnProfile(r_min=-1, r_max=1, r_step=0.5)
    assert est.get_params()["r_step"] == 0.5
    est.fit()
    assert est.table_.r_samples.tolist() == [-1.0, -0.5, 0.0, 0.5, 1.0]
    assert np.all(np.isnan(est.table_.lambda2_samples))


def test_table_csv():
    table = FaberKrahnProfile(r_min=-1, r_max=1, r_step=1.0, with_second=True).fit().table_
    text = table.to_csv()
    lines = text.strip().splitlines()
    assert lines[0] == "r,lambda1,lambda2,m,g"
    assert len(lines) == 4
    r, l1, l2, m, g = (float(v) for v in lines[2].split(","))
    assert r == 0.0 and m == 0.5 and l1 == g
    assert abs(l1 - 1.0) < 1e-5 and abs(l2 - 3.0) < 1e-4


def test_table_validation():
    with pytest.raises(ValueError):
        ProfileTable(np.array([0.0, 0.0]), np.array([2.0, 1.0]), np.array([3, 2.0]), 1e-3, 12)
    with pytest.raises(ValueError):
        ProfileTable(np.array([0.0, 1.0]), np.array([1.0, 2.0]), np.array([3, 2.0]), 1e-3, 12)
    with pytest.raises(ValueError):
        ProfileTable(np.array([0.0, 1.0]), np.array([1.0, -2.0]), np.array([3, 2.0]), 1e-3, 12)


def test_local_lipschitz(profile):
    est = local_lipschitz_L(0.25, 0.5, profile=profile)
    # frozen against the shooting-based value 2.004828564999798
    assert est.value > 0 and math.isfinite(est.value)
    assert est.value == pytest.approx(2.0048284918777313, rel=1e-6)
