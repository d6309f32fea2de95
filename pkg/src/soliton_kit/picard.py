"""Fixed-point (Picard) seeding of the profile near the singular origin.

The initial value problem is equivalent on a small interval [0, eps] to the
fixed point of the integral map Phi(h, w) = (Phi1, Phi2) with

    Phi1(r) = 1 + int_0^r w,
    Phi2(r) = mu1 + int_0^r E(w, s) / (2 h(s)) ds,
    E(w, s) = (n-1)/s^2 (int_0^s w)^2
              + (n-1)/s^2 int_0^s (w(rho) - w(s)) drho
              + w(s)^2 - lam w(s),

where w plays the role of h_r.  For eps below the threshold eps2 computed
in ``contraction_epsilon`` the map contracts with factor at most 26/33 in
the max of sup and Lipschitz norms, which this module verifies empirically.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .model import Seed, SolitonParams

DEFAULT_GRID = 4096
CONTRACTION_FACTOR = 26.0 / 33.0


class NoConvergence(RuntimeError):
    """Iteration hit max_iter before the residual dropped below tol."""


class InsufficientIterations(RuntimeError):
    """Too few iterations to measure a contraction ratio."""


class PositivityError(RuntimeError):
    """An h iterate left the admissible band; eps is too large or the
    input pair is corrupted."""


@dataclass(frozen=True)
class GridFunctionPair:
    """Discretized (h, w) pair on M+1 uniform nodes over [0, eps]."""

    eps: float
    grid: np.ndarray
    h_vals: np.ndarray
    w_vals: np.ndarray

    def in_closed_set(self, params: SolitonParams, slack: float = 1e-9) -> bool:
        """Discrete membership in the invariant set the contraction argument
        works on: sup and Lipschitz bounds around (1, mu1)."""
        mu1, lam, n = params.mu1, params.lam, params.n
        a = abs(mu1) + 1.0
        bw = 3.0 * (n * a * a + abs(lam) * a)
        dg = np.diff(self.grid)
        lip_h = np.max(np.abs(np.diff(self.h_vals)) / dg)
        lip_w = np.max(np.abs(np.diff(self.w_vals)) / dg)
        return bool(
            self.h_vals[0] == 1.0
            and self.w_vals[0] == mu1
            and np.max(np.abs(self.h_vals - 1.0)) <= a * self.eps + slack
            and lip_h <= a + slack
            and np.max(np.abs(self.w_vals - mu1)) <= bw * self.eps + slack
            and lip_w <= bw + slack
        )


@dataclass(frozen=True)
class PicardReport:
    eps_used: float
    iterations: int
    final_residual: float
    residuals: tuple[float, ...]
    empirical_ratios: tuple[float, ...]
    noise_floor: float
    converged: bool
    exploratory: bool
    grid_m: int


def contraction_epsilon(params: SolitonParams) -> tuple[float, float]:
    """(eps1, eps2): interval lengths below which the map is known to keep
    its invariant set (eps1) and contract with factor 26/33 (eps2).

    eps1 = 1 / (100 (n a^2 + |lam| a)),           a = |mu1| + 1
    C1   = (11/2) (n a^2 + |lam| a)
    C2   = (n+1) a + |lam| + (5000/99^2) C1
    eps2 = min(eps1, 1/(33 C2))
    """
    n, lam = params.n, abs(params.lam)
    a = abs(params.mu1) + 1.0
    base = n * a * a + lam * a
    eps1 = 1.0 / (100.0 * base)
    c1 = 5.5 * base
    c2 = (n + 1) * a + lam + (5000.0 / 99.0**2) * c1
    eps2 = min(eps1, 1.0 / (33.0 * c2))
    return eps1, eps2


def initial_pair(params: SolitonParams, eps: float, grid_m: int = DEFAULT_GRID) -> GridFunctionPair:
    """The center (h == 1, w == mu1) of the invariant set."""
    grid = np.linspace(0.0, eps, grid_m + 1)
    return GridFunctionPair(
        eps=eps,
        grid=grid,
        h_vals=np.ones(grid_m + 1),
        w_vals=np.full(grid_m + 1, params.mu1),
    )


def apply_phi(params: SolitonParams, pair: GridFunctionPair) -> GridFunctionPair:
    """One application of the integral map, composite trapezoid throughout.

    The integrand of Phi2 has a removable 0/0 at s = 0; its value there is
    filled by linear extrapolation from the first two interior nodes.
    """
    if np.any(pair.h_vals <= 0.5):
        raise PositivityError("h iterate dropped to <= 1/2")
    n, lam, mu1 = params.n, params.lam, params.mu1
    s = pair.grid
    w = pair.w_vals
    W = cumulative_trapezoid(w, s, initial=0.0)

    h_new = 1.0 + W

    g = np.empty_like(s)
    si = s[1:]
    Wi = W[1:]
    wi = w[1:]
    E = (
        (n - 1) * (Wi * Wi) / (si * si)
        + (n - 1) * (Wi - si * wi) / (si * si)
        + wi * wi
        - lam * wi
    )
    g[1:] = E / (2.0 * pair.h_vals[1:])
    g[0] = 2.0 * g[1] - g[2]
    w_new = mu1 + cumulative_trapezoid(g, s, initial=0.0)

    return GridFunctionPair(eps=pair.eps, grid=s, h_vals=h_new, w_vals=w_new)


def _component_norm(f: np.ndarray, grid: np.ndarray) -> float:
    sup = float(np.max(np.abs(f)))
    lip = float(np.max(np.abs(np.diff(f)) / np.diff(grid)))
    return max(sup, lip)


def pair_distance(a: GridFunctionPair, b: GridFunctionPair) -> float:
    """Discrete version of the seeding norm: max over components of
    max(sup-norm, Lipschitz seminorm) of the difference."""
    return max(
        _component_norm(a.h_vals - b.h_vals, a.grid),
        _component_norm(a.w_vals - b.w_vals, a.grid),
    )


def picard_solve(
    params: SolitonParams,
    eps: float | None = None,
    tol: float = 1e-12,
    max_iter: int = 200,
    grid_m: int = DEFAULT_GRID,
) -> tuple[GridFunctionPair, PicardReport]:
    """Iterate the map from (1, mu1) to its fixed point on [0, eps].

    eps defaults to the guaranteed contraction threshold eps2.  Larger eps
    is allowed but flagged exploratory: no convergence guarantee applies.

    The Lipschitz seminorm amplifies value round-off by the grid density
    grid_m/eps, so the iteration cannot contract below a noise floor of
    roughly machine_eps * grid_m / eps; the stopping threshold is the max
    of tol and that floor.
    """
    _, eps2 = contraction_epsilon(params)
    if eps is None:
        eps = eps2
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    exploratory = eps > eps2 * (1.0 + 1e-12)
    floor = 4.0 * np.finfo(float).eps * grid_m / eps
    threshold = max(tol, floor)

    pair = initial_pair(params, eps, grid_m)
    residuals: list[float] = []
    converged = False
    for _ in range(max_iter):
        nxt = apply_phi(params, pair)
        d = pair_distance(nxt, pair)
        residuals.append(d)
        pair = nxt
        if d <= threshold:
            converged = True
            break
    ratios = tuple(
        residuals[i + 1] / residuals[i]
        for i in range(len(residuals) - 1)
        if residuals[i] > 0.0
    )
    report = PicardReport(
        eps_used=eps,
        iterations=len(residuals),
        final_residual=residuals[-1] if residuals else 0.0,
        residuals=tuple(residuals),
        empirical_ratios=ratios,
        noise_floor=floor,
        converged=converged,
        exploratory=exploratory,
        grid_m=grid_m,
    )
    if not converged:
        raise NoConvergence(
            f"residual {report.final_residual:.3e} > tol {tol:.3e} "
            f"after {max_iter} iterations (eps={eps}, exploratory={exploratory})"
        )
    return pair, report


def empirical_contraction_ratio(report: PicardReport) -> float:
    """Max consecutive-residual ratio over the clean contraction regime.

    Discards the ratio involving the very first iterate (not yet in the
    contraction regime) and any ratio whose numerator or denominator sits
    within 50x of the round-off noise floor.
    """
    res = report.residuals
    cut = 50.0 * report.noise_floor
    ratios = [
        res[i + 1] / res[i]
        for i in range(1, len(res) - 1)
        if res[i] > cut and res[i + 1] > report.noise_floor
    ]
    if report.iterations < 3 or not ratios:
        raise InsufficientIterations(
            f"need >= 3 iterations clear of the noise floor, have {report.iterations}"
        )
    return max(ratios)


def seed_handoff(
    params: SolitonParams,
    eps: float | None = None,
    tol: float = 1e-12,
    grid_m: int = DEFAULT_GRID,
) -> Seed:
    """Seed for the integrator from the Picard fixed point on [0, eps]."""
    from scipy.interpolate import CubicHermiteSpline

    pair, _ = picard_solve(params, eps=eps, tol=tol, grid_m=grid_m)
    # w is exactly h_r at the fixed point, so Hermite data is available.
    h_interp = CubicHermiteSpline(pair.grid, pair.h_vals, pair.w_vals)
    w_interp = h_interp.derivative()

    def evaluate(r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return h_interp(r), w_interp(r)

    return Seed(
        r_seed=float(pair.eps),
        h=float(pair.h_vals[-1]),
        hr=float(pair.w_vals[-1]),
        evaluate=evaluate,
        method="picard",
    )
