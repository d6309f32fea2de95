"""Geometric quantities of the warped metric built from a profile.

With s = a^2 the metric reads g = ds^2/(4 s h(s)) + s g_sphere, so the
radial coordinate a has geodesic distance from the origin

    t(a) = int_0^a d rho / sqrt(h(rho^2)),

and the sectional curvatures of the planes containing / orthogonal to the
radial direction are -h_s(s) and (1 - h(s))/s evaluated at s = a^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .model import Trajectory, TrajectoryInterpolant


class OutOfRange(ValueError):
    """Requested radius lies beyond the computed trajectory."""


@dataclass(frozen=True)
class MetricProfile:
    """Geodesic distance and curvatures tabulated on a grid of a-values."""

    a_grid: np.ndarray
    t_of_a: np.ndarray
    kappa_radial: np.ndarray
    kappa_orbital: np.ndarray


def _interp(traj_or_interp) -> TrajectoryInterpolant:
    if isinstance(traj_or_interp, TrajectoryInterpolant):
        return traj_or_interp
    if isinstance(traj_or_interp, Trajectory):
        return traj_or_interp.interpolant()
    raise TypeError(f"expected Trajectory or interpolant, got {type(traj_or_interp)!r}")


def geodesic_distance(traj, a: float, rel_tol: float = 1e-10) -> float:
    """Distance t(a) from the origin to coordinate radius a.

    Needs a^2 within the trajectory's radial range.
    """
    interp = _interp(traj)
    if a < 0.0:
        raise OutOfRange(f"a must be nonnegative, got {a}")
    if a == 0.0:
        return 0.0
    if a * a > interp.r_max * (1.0 + 1e-12):
        raise OutOfRange(
            f"a^2 = {a * a} beyond the computed range [0, {interp.r_max}]"
        )

    def f(rho: float) -> float:
        return 1.0 / np.sqrt(interp.h(rho * rho))

    # Split at sqrt(r_min): below it the integrand comes from the quadratic
    # origin model and is perfectly smooth, above it from the spline pieces.
    split = min(a, np.sqrt(interp.r_min))
    total = 0.0
    if split > 0.0:
        val, _ = quad(f, 0.0, split, epsabs=0.0, epsrel=rel_tol, limit=200)
        total += val
    if a > split:
        val, _ = quad(f, split, a, epsabs=0.0, epsrel=rel_tol, limit=500)
        total += val
    return total


def curvatures_at(traj, a: float) -> tuple[float, float]:
    """(kappa_radial, kappa_orbital) at coordinate radius a > 0."""
    interp = _interp(traj)
    if a <= 0.0:
        raise OutOfRange(f"curvatures need a > 0, got {a}")
    s = a * a
    if s > interp.r_max * (1.0 + 1e-12):
        raise OutOfRange(f"a^2 = {s} beyond the computed range")
    return -float(interp.hr(s)), float((1.0 - interp.h(s)) / s)


def curvature_profile(traj, a_grid: np.ndarray) -> MetricProfile:
    """Tabulate t(a) and both curvatures over an increasing grid of a."""
    interp = _interp(traj)
    a_grid = np.asarray(a_grid, dtype=float)
    if a_grid.size == 0 or np.any(a_grid <= 0.0):
        raise OutOfRange("a_grid must be nonempty with positive entries")
    if np.any(np.diff(a_grid) <= 0.0):
        raise ValueError("a_grid must be strictly increasing")
    t = np.empty_like(a_grid)
    kr = np.empty_like(a_grid)
    ko = np.empty_like(a_grid)
    # Accumulate t(a) incrementally so the cost is one pass over the grid.
    prev_a = 0.0
    prev_t = 0.0
    for i, a in enumerate(a_grid):
        if i == 0:
            prev_t = geodesic_distance(interp, a)
        else:
            seg, _ = quad(
                lambda rho: 1.0 / np.sqrt(interp.h(rho * rho)),
                prev_a,
                a,
                epsabs=0.0,
                epsrel=1e-10,
                limit=500,
            )
            prev_t += seg
        prev_a = a
        t[i] = prev_t
        kr[i], ko[i] = curvatures_at(interp, a)
    return MetricProfile(a_grid=a_grid, t_of_a=t, kappa_radial=kr, kappa_orbital=ko)


@dataclass(frozen=True)
class CompletenessDiagnostic:
    a_max: float
    t_max: float
    loglog_slope: float
    diverging: bool


def completeness_diagnostic(traj, slope_threshold: float = 0.25) -> CompletenessDiagnostic:
    """Crude divergence check for t(a) as a -> sqrt(r_max).

    Fits the log-log slope of t(a) over the last decade of a; a slope bounded
    away from zero means t keeps growing like a power of a, which is the
    expected signature of a complete end (h bounded or growing at most
    quadratically gives slope >= ~1/2... the threshold is deliberately loose).
    """
    interp = _interp(traj)
    a_max = float(np.sqrt(interp.r_max)) * (1.0 - 1e-9)
    a_grid = np.geomspace(a_max / 10.0, a_max, 17)
    prof = curvature_profile(interp, a_grid)
    slope, _ = np.polyfit(np.log(prof.a_grid), np.log(prof.t_of_a), 1)
    return CompletenessDiagnostic(
        a_max=a_max,
        t_max=float(prof.t_of_a[-1]),
        loglog_slope=float(slope),
        diverging=bool(slope >= slope_threshold),
    )
