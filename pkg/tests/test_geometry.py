import math

import numpy as np
import pytest

from soliton_kit.geometry import (
    OutOfRange,
    completeness_diagnostic,
    curvature_profile,
    curvatures_at,
    geodesic_distance,
)
from soliton_kit.integrate import IntegratorConfig, solve_profile
from soliton_kit.model import SolitonParams


@pytest.fixture(scope="module")
def stationary():
    return solve_profile(SolitonParams(3, 0.0, 0.0), IntegratorConfig(r_max=1e4))


@pytest.fixture(scope="module")
def expanding_exact():
    return solve_profile(SolitonParams(3, 1.0, 1.0 / 3.0), IntegratorConfig(r_max=1e4))


@pytest.fixture(scope="module")
def steady_neg():
    return solve_profile(SolitonParams(3, 0.0, -1.0), IntegratorConfig(r_max=1e6))


def test_stationary_distance_is_identity(stationary):
    for a in (0.0, 0.25, 3.0, 50.0):
        assert geodesic_distance(stationary, a) == pytest.approx(a, abs=1e-12)


def test_expanding_exact_closed_form(expanding_exact):
    # h = 1 + r/3 gives t(a) = sqrt(3) asinh(a / sqrt(3)).
    for a in (0.5, 1.0, 10.0, 90.0):
        ref = math.sqrt(3.0) * math.asinh(a / math.sqrt(3.0))
        t = geodesic_distance(expanding_exact, a)
        assert abs(t - ref) / ref <= 1e-8


def test_steady_neg_distance_ratio(steady_neg):
    # h ~ b1/r makes t(a) ~ a^2 / (2 sqrt(b1)), so t(2a)/t(a) -> 4.
    a = math.sqrt(steady_neg.r_max) * 0.45
    ratio = geodesic_distance(steady_neg, 2 * a) / geodesic_distance(steady_neg, a)
    assert ratio == pytest.approx(4.0, rel=0.05)


def test_out_of_range_errors(stationary):
    with pytest.raises(OutOfRange):
        geodesic_distance(stationary, -1.0)
    with pytest.raises(OutOfRange):
        geodesic_distance(stationary, math.sqrt(stationary.r_max) * 1.01)
    with pytest.raises(OutOfRange):
        curvatures_at(stationary, 0.0)


def test_curvature_signs_by_regime():
    cases = {
        "steady_neg": (SolitonParams(3, 0.0, -1.0), 1e4, +1, +1),
        "steady_pos": (SolitonParams(3, 0.0, 1.0), 1e4, -1, -1),
        "expanding_sub": (SolitonParams(3, 1.0, 0.2), 1e4, -1, -1),
        "expanding_neg": (SolitonParams(3, 1.0, -0.5), 1e4, +1, +1),
    }
    for name, (params, rmax, sign_r, sign_o) in cases.items():
        traj = solve_profile(params, IntegratorConfig(r_max=rmax))
        a_grid = np.geomspace(0.1, math.sqrt(traj.r_max) * 0.9, 25)
        prof = curvature_profile(traj, a_grid)
        assert np.all(sign_r * prof.kappa_radial > 0.0), name
        assert np.all(sign_o * prof.kappa_orbital > 0.0), name


def test_stationary_curvatures_vanish(stationary):
    kr, ko = curvatures_at(stationary, 5.0)
    assert abs(kr) <= 1e-12
    assert abs(ko) <= 1e-12


def test_curvature_profile_validation(stationary):
    with pytest.raises(OutOfRange):
        curvature_profile(stationary, np.array([]))
    with pytest.raises(ValueError):
        curvature_profile(stationary, np.array([2.0, 1.0]))


def test_profile_t_is_monotone(expanding_exact):
    a_grid = np.geomspace(0.1, math.sqrt(expanding_exact.r_max) * 0.9, 30)
    prof = curvature_profile(expanding_exact, a_grid)
    assert np.all(np.diff(prof.t_of_a) > 0.0)
    # incremental accumulation agrees with independent evaluation
    mid = len(a_grid) // 2
    direct = geodesic_distance(expanding_exact, a_grid[mid])
    assert prof.t_of_a[mid] == pytest.approx(direct, rel=1e-9)


def test_completeness_diagnostic():
    for params, rmax, slope in (
        (SolitonParams(3, 0.0, 0.0), 1e4, 1.0),   # flat: t = a
        (SolitonParams(3, 0.0, -1.0), 1e6, 2.0),  # decaying: t ~ a^2
    ):
        traj = solve_profile(params, IntegratorConfig(r_max=rmax))
        comp = completeness_diagnostic(traj)
        assert comp.diverging
        assert comp.loglog_slope == pytest.approx(slope, abs=0.05)
