"""Power-series seeding of the profile near the singular origin.

Writing h(r) = sum_k c_k r^k with c_0 = 1, c_1 = mu1, the profile equation
forces the coefficient recurrence

    (k-1)(2k+n-1) c_k + lam (k-1) c_{k-1}
        + sum_{1<=j<=k-1} (3j^2 - (2+k)j - (n-1)) c_j c_{k-j} = 0,   k >= 2.

A nonnegative majorant sequence c'_k dominates |c_k| and sums to the closed
form b(r) below, which yields a guaranteed lower bound on the radius of
convergence and a computable truncation-tail bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import DomainError, Seed, SolitonParams

DEFAULT_ORDER = 30

# Largest r at which the K-term majorant tail bound is required to stay
# below this level when choosing the empirical handoff radius.
TAIL_TOL = 1e-12


@dataclass(frozen=True)
class SeriesSolution:
    """Truncated series c_0..c_K with its majorant and radius bound.

    coeffs          -- c_0 .. c_K
    majorant_coeffs -- c'_1 .. c'_K (nonnegative, |c_k| <= c'_k)
    radius_lb       -- guaranteed lower bound on the radius of convergence
    handoff_radius  -- radius at which the integrator takes over
    """

    params: SolitonParams
    coeffs: np.ndarray
    majorant_coeffs: np.ndarray
    order: int
    radius_lb: float
    handoff_radius: float


def radius_lower_bound(params: SolitonParams) -> float:
    """Guaranteed (conservative) lower bound on the series convergence radius.

    eps = min( 1/(10(|lam|+1)), 1/(200(|mu1|+1)) ).
    """
    c1p = abs(params.mu1)
    return min(
        1.0 / (10.0 * (abs(params.lam) + 1.0)),
        1.0 / (200.0 * (c1p + 1.0)),
    )


def _recurrence(params: SolitonParams, order: int) -> np.ndarray:
    n, lam, mu1 = params.n, params.lam, params.mu1
    c = np.zeros(order + 1)
    c[0] = 1.0
    c[1] = mu1
    for k in range(2, order + 1):
        s = 0.0
        for j in range(1, k):
            s += (3 * j * j - (2 + k) * j - (n - 1)) * c[j] * c[k - j]
        c[k] = -(lam * (k - 1) * c[k - 1] + s) / ((k - 1) * (2 * k + n - 1))
    return c


def _majorant(params: SolitonParams, order: int) -> np.ndarray:
    lam = abs(params.lam)
    cp = np.zeros(order + 1)
    cp[1] = abs(params.mu1)
    for k in range(2, order + 1):
        s = 0.0
        for j in range(1, k):
            s += cp[j] * cp[k - j]
        cp[k] = lam * cp[k - 1] + 2.5 * s
    return cp[1:]


def majorant_value(series: SeriesSolution, r: float) -> float:
    """Closed-form majorant sum b(r) = (1 - |lam| r - sqrt(disc)) / 5.

    disc = (1 - |lam| r)^2 - 10 c'_1 r must be nonnegative; the guaranteed
    radius lies inside that domain by construction.
    """
    lam = abs(series.params.lam)
    c1p = abs(series.params.mu1)
    disc = (1.0 - lam * r) ** 2 - 10.0 * c1p * r
    if disc < 0.0:
        raise DomainError(f"majorant discriminant negative at r={r}")
    return (1.0 - lam * r - math.sqrt(disc)) / 5.0


def tail_bound(series: SeriesSolution, r: float) -> float:
    """Upper bound on the dropped tail |sum_{k>K} c_k r^k| at radius r."""
    partial = 0.0
    rk = 1.0
    for cp in series.majorant_coeffs:
        rk *= r
        partial += cp * rk
    return max(majorant_value(series, r) - partial, 0.0)


def _empirical_handoff(series: SeriesSolution) -> float:
    """Largest r <= radius_lb with majorant tail bound <= TAIL_TOL."""
    lo, hi = 0.0, series.radius_lb
    if tail_bound(series, hi) <= TAIL_TOL:
        return hi
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if tail_bound(series, mid) <= TAIL_TOL:
            lo = mid
        else:
            hi = mid
    return lo


def compute_coefficients(params: SolitonParams, order: int = DEFAULT_ORDER) -> SeriesSolution:
    """Solve the recurrence up to c_order and attach majorant and radii."""
    if order < 2:
        raise ValueError(f"order must be >= 2, got {order}")
    coeffs = _recurrence(params, order)
    majorant = _majorant(params, order)
    radius = radius_lower_bound(params)
    partial = SeriesSolution(
        params=params,
        coeffs=coeffs,
        majorant_coeffs=majorant,
        order=order,
        radius_lb=radius,
        handoff_radius=radius / 2.0,
    )
    handoff = min(radius / 2.0, _empirical_handoff(partial))
    return SeriesSolution(
        params=params,
        coeffs=coeffs,
        majorant_coeffs=majorant,
        order=order,
        radius_lb=radius,
        handoff_radius=handoff,
    )


def eval_series(series: SeriesSolution, r):
    """Horner evaluation of (h, h_r) for 0 <= r <= the handoff radius."""
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > series.handoff_radius * (1.0 + 1e-12)):
        raise DomainError(
            f"series evaluation outside [0, {series.handoff_radius}]"
        )
    c = series.coeffs
    h = np.zeros_like(arr)
    for ck in c[::-1]:
        h = h * arr + ck
    hr = np.zeros_like(arr)
    for k in range(series.order, 0, -1):
        hr = hr * arr + k * c[k]
    if arr.ndim == 0:
        return float(h), float(hr)
    return h, hr


def seed_handoff(params: SolitonParams, order: int = DEFAULT_ORDER) -> Seed:
    """Seed for the integrator: state at the handoff radius plus an evaluator
    covering [0, handoff]."""
    series = compute_coefficients(params, order)
    r0 = series.handoff_radius
    h0, hr0 = eval_series(series, r0)

    def evaluate(r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return eval_series(series, r)

    return Seed(r_seed=r0, h=h0, hr=hr0, evaluate=evaluate, method="series")
