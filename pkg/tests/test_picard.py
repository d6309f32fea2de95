import numpy as np
import pytest

from soliton_kit.model import SolitonParams
from soliton_kit.picard import (
    CONTRACTION_FACTOR,
    InsufficientIterations,
    NoConvergence,
    PositivityError,
    apply_phi,
    contraction_epsilon,
    empirical_contraction_ratio,
    initial_pair,
    pair_distance,
    picard_solve,
    seed_handoff,
)
from soliton_kit.series import compute_coefficients, eval_series


def test_contraction_epsilon_frozen_values():
    # n=2, lam=0, mu1=0: a=1, base=2, eps1=1/200,
    # C1 = 11, C2 = 3 + 55000/9801, eps2 = 1/(33 C2).
    eps1, eps2 = contraction_epsilon(SolitonParams(2, 0.0, 0.0))
    assert eps1 == pytest.approx(0.005)
    c2 = 3.0 + 55000.0 / 9801.0
    assert eps2 == pytest.approx(1.0 / (33.0 * c2), rel=1e-14)
    assert eps2 == pytest.approx(3.518832e-3, rel=1e-5)


def test_contraction_epsilon_monotone_in_parameters():
    base = contraction_epsilon(SolitonParams(3, 0.0, -1.0))[1]
    assert contraction_epsilon(SolitonParams(5, 0.0, -1.0))[1] < base
    assert contraction_epsilon(SolitonParams(3, 2.0, -1.0))[1] < base
    assert contraction_epsilon(SolitonParams(3, 0.0, -2.0))[1] < base


def test_apply_phi_image_of_center():
    # From (h, w) = (1, mu1): Phi1 = 1 + mu1 r, and E = n mu1^2 - lam mu1
    # constant, so Phi2 = mu1 + (n mu1^2 - lam mu1) r / 2.
    p = SolitonParams(3, 1.0, -0.5)
    pair = initial_pair(p, 1e-3, grid_m=256)
    out = apply_phi(p, pair)
    r = pair.grid
    slope = (p.n * p.mu1**2 - p.lam * p.mu1) / 2.0
    assert np.max(np.abs(out.h_vals - (1.0 + p.mu1 * r))) <= 1e-14
    assert np.max(np.abs(out.w_vals - (p.mu1 + slope * r))) <= 1e-10


def test_apply_phi_rejects_nonpositive_h():
    p = SolitonParams(3, 0.0, -1.0)
    pair = initial_pair(p, 1e-3, grid_m=16)
    bad = type(pair)(eps=pair.eps, grid=pair.grid, h_vals=pair.h_vals * 0.1, w_vals=pair.w_vals)
    with pytest.raises(PositivityError):
        apply_phi(p, bad)


def test_pair_distance_is_a_metric_like_norm():
    p = SolitonParams(3, 0.0, -1.0)
    a = initial_pair(p, 1e-3, grid_m=64)
    assert pair_distance(a, a) == 0.0
    b = apply_phi(p, a)
    assert pair_distance(a, b) == pair_distance(b, a) > 0.0


def test_picard_solve_converges_and_contracts():
    for n in (2, 3, 4):
        for lam in (0.0, 1.0):
            for mu1 in (-1.0, 0.5):
                p = SolitonParams(n, lam, mu1)
                pair, report = picard_solve(p)
                assert report.converged
                assert not report.exploratory
                assert pair.in_closed_set(p)
                try:
                    ratio = empirical_contraction_ratio(report)
                except InsufficientIterations:
                    continue  # converged before any clean ratio was measurable
                assert ratio <= CONTRACTION_FACTOR + 0.05


def test_fixed_point_matches_series():
    p = SolitonParams(3, 0.0, -1.0)
    pair, _ = picard_solve(p)
    series = compute_coefficients(p)
    m = pair.grid <= series.handoff_radius
    hs, hrs = eval_series(series, pair.grid[m])
    assert np.max(np.abs(pair.h_vals[m] - hs)) <= 1e-10
    assert np.max(np.abs(pair.w_vals[m] - hrs)) <= 1e-10


def test_exploratory_flag_and_failure_modes():
    p = SolitonParams(3, 0.0, -1.0)
    _, eps2 = contraction_epsilon(p)
    _, report = picard_solve(p, eps=2.0 * eps2, grid_m=1024)
    assert report.exploratory
    with pytest.raises(ValueError):
        picard_solve(p, eps=-1.0)
    with pytest.raises((NoConvergence, PositivityError)):
        picard_solve(p, eps=5.0, grid_m=256, max_iter=50)


def test_insufficient_iterations_raised():
    # The exact expanding profile is hit almost immediately, leaving no
    # residual pair clear of the noise floor.
    p = SolitonParams(2, 1.0, 0.5)
    _, report = picard_solve(p)
    assert report.iterations <= 3
    with pytest.raises(InsufficientIterations):
        empirical_contraction_ratio(report)


def test_seed_handoff_consistency():
    p = SolitonParams(4, 1.0, -1.0)
    seed = seed_handoff(p)
    assert seed.method == "picard"
    h, hr = seed.evaluate(np.array([0.0, seed.r_seed / 2, seed.r_seed]))
    assert h[0] == 1.0 and hr[0] == pytest.approx(p.mu1)
    assert h[-1] == pytest.approx(seed.h)
    assert hr[-1] == pytest.approx(seed.hr)
