"""Core data model for the rotationally symmetric soliton profile ODE.

The profile h(r) solves the singular second order equation

    2 r^2 h h_rr = (n-1) h (h - 1) + r h_r (r h_r - lam*r - (n-1)),   h > 0,

with h(0) = 1 and h_r(0) = mu1.  The equation degenerates at r = 0, so
integration never starts there; the seeding modules (series / Picard)
hand a state at a small positive radius to the integrator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np


class DomainError(ValueError):
    """Input lies outside the admissible domain of an operation."""


@dataclass(frozen=True)
class SolitonParams:
    """Problem parameters.

    n    -- dimension of the sphere factor; the metric is (n+1)-dimensional.
    lam  -- soliton constant: > 0 expanding, = 0 steady, < 0 shrinking side.
    mu1  -- initial slope h_r(0).
    """

    n: int
    lam: float
    mu1: float

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "mu1", float(self.mu1))


@dataclass(frozen=True)
class SolutionSample:
    """One accepted point (r, h, h_r) of a profile solution."""

    r: float
    h: float
    hr: float


@dataclass(frozen=True)
class Diagnostics:
    """Derived quantities at a single sample with r > 0.

    q = r h_r / h      logarithmic slope
    u = r h
    p = r h_r
    v = r (q + 1)      second order correction of q around -1
    w = u_r / h^2      with u_r = p + h
    """

    q: float
    u: float
    p: float
    v: float
    w: float


class TerminationKind(Enum):
    REACHED_RMAX = "reached_rmax"
    POSITIVITY_LOSS = "positivity_loss"
    GROWTH_GUARD = "growth_guard"
    STEP_UNDERFLOW = "step_underflow"


@dataclass(frozen=True)
class Termination:
    kind: TerminationKind
    r: float | None = None

    def describe(self) -> str:
        if self.kind is TerminationKind.REACHED_RMAX:
            return self.kind.value
        return f"{self.kind.value}@{self.r!r}"


@dataclass(frozen=True)
class Seed:
    """Handoff state produced by a seeding module.

    evaluate(r) must return (h, h_r) arrays for 0 <= r <= r_seed and is used
    to fill the trajectory on [0, r_seed].
    """

    r_seed: float
    h: float
    hr: float
    evaluate: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]
    method: str = "series"


def ode_rhs(params: SolitonParams, r: float, h: float, hr: float) -> float:
    """Second derivative h_rr from the regular form of the profile equation.

    h_rr = h_r^2/(2h) + (n-1)(h-1)/(2 r^2) - ((n-1+lam*r)/(2r)) * h_r/h

    Raises DomainError for r <= 0 or h <= 0: there a seeding module must be
    used instead of direct evaluation.
    """
    if r <= 0.0:
        raise DomainError(f"ode_rhs needs r > 0, got r={r}")
    if h <= 0.0:
        raise DomainError(f"ode_rhs needs h > 0, got h={h}")
    n = params.n
    return (
        hr * hr / (2.0 * h)
        + (n - 1) * (h - 1.0) / (2.0 * r * r)
        - (n - 1 + params.lam * r) / (2.0 * r) * (hr / h)
    )


def ode_residual_raw(
    params: SolitonParams, r: float, h: float, hr: float, hrr: float
) -> float:
    """Residual of the raw (unreduced) form of the profile equation.

    Returns 2 r^2 h h_rr - (n-1) h (h-1) - r h_r (r h_r - lam*r - (n-1)),
    which is zero exactly when (h, h_r, h_rr) satisfies the equation.
    """
    n = params.n
    return (
        2.0 * r * r * h * hrr
        - (n - 1) * h * (h - 1.0)
        - r * hr * (r * hr - params.lam * r - (n - 1))
    )


def diagnostics_at(params: SolitonParams, sample: SolutionSample) -> Diagnostics:
    """All five diagnostics at one sample; only defined for r > 0, h > 0."""
    r, h, hr = sample.r, sample.h, sample.hr
    if r <= 0.0:
        raise DomainError(f"diagnostics need r > 0, got r={r}")
    if h <= 0.0:
        raise DomainError(f"diagnostics need h > 0, got h={h}")
    q = r * hr / h
    u = r * h
    p = r * hr
    v = r * (q + 1.0)
    w = (p + h) / (h * h)
    return Diagnostics(q=q, u=u, p=p, v=v, w=w)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Trajectory:
    """A computed profile: samples (r, h, h_r) with strictly increasing r.

    The first sample is (0, 1, mu1).  ``checkpoint_idx`` marks the subset of
    samples lying on the mandatory log-uniform checkpoint grid (64 nodes per
    decade, anchored at the seed radius); that subgrid is uniform in ln r,
    which downstream finite-difference and extrapolation code relies on.
    """

    params: SolitonParams
    r: np.ndarray
    h: np.ndarray
    hr: np.ndarray
    seed_radius: float
    termination: Termination
    checkpoint_idx: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))

    def __post_init__(self) -> None:
        object.__setattr__(self, "r", _readonly(self.r))
        object.__setattr__(self, "h", _readonly(self.h))
        object.__setattr__(self, "hr", _readonly(self.hr))
        idx = np.ascontiguousarray(self.checkpoint_idx, dtype=int)
        idx.flags.writeable = False
        object.__setattr__(self, "checkpoint_idx", idx)
        if self.r.size < 2:
            raise ValueError("trajectory needs at least two samples")
        if self.r[0] != 0.0:
            raise ValueError("first sample must be at r = 0")
        if not np.all(np.diff(self.r) > 0.0):
            raise ValueError("sample radii must be strictly increasing")
        if not np.all(self.h > 0.0):
            raise ValueError("h must be positive at every sample")

    @property
    def r_max(self) -> float:
        return float(self.r[-1])

    def sample(self, i: int) -> SolutionSample:
        return SolutionSample(float(self.r[i]), float(self.h[i]), float(self.hr[i]))

    def checkpoints(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(r, h, h_r) restricted to the log-uniform checkpoint grid."""
        i = self.checkpoint_idx
        return self.r[i], self.h[i], self.hr[i]

    def diagnostics_arrays(self) -> dict[str, np.ndarray]:
        """Vectorized diagnostics over all samples.

        At r = 0 the limiting values are used: q = v = u = p = 0, w = 1.
        """
        r, h, hr = self.r, self.h, self.hr
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(r > 0, r * hr / h, 0.0)
        u = r * h
        p = r * hr
        v = r * (q + 1.0)
        w = (p + h) / (h * h)
        return {"q": q, "u": u, "p": p, "v": v, "w": w}

    def interpolant(self) -> "TrajectoryInterpolant":
        return TrajectoryInterpolant(self)


class TrajectoryInterpolant:
    """Smooth evaluation of h and h_r between trajectory samples.

    Works in (ln r, ln h) coordinates, where the profile is very mild in all
    regimes, using cubic Hermite pieces whose slopes are the exactly known
    logarithmic derivatives q = d(ln h)/d(ln r).  h_r is recovered from a
    second Hermite interpolant of q whose slope comes from the ODE itself.
    Below the first positive sample the series-collapse quadratic
    h = 1 + mu1 r + c2 r^2 is used.
    """

    def __init__(self, traj: Trajectory):
        from scipy.interpolate import CubicHermiteSpline

        self.traj = traj
        p = traj.params
        mask = traj.r > 0.0
        r = traj.r[mask]
        h = traj.h[mask]
        hr = traj.hr[mask]
        x = np.log(r)
        q = r * hr / h
        # q_r from the ODE: q_r = (h_r + r h_rr)/h - r h_r^2/h^2
        hrr = np.array([ode_rhs(p, ri, hi, hri) for ri, hi, hri in zip(r, h, hr)])
        qr = (hr + r * hrr) / h - r * hr * hr / (h * h)
        self._lnh = CubicHermiteSpline(x, np.log(h), q)
        self._q = CubicHermiteSpline(x, q, r * qr)
        self.r_min = float(r[0])
        self.r_max = float(r[-1])
        n = p.n
        self._c2 = p.mu1 * (n * p.mu1 - p.lam) / (n + 3)

    def h(self, r):
        r = np.asarray(r, dtype=float)
        self._check(r)
        small = r < self.r_min
        out = np.empty_like(r)
        if np.any(small):
            rs = r[small]
            out[small] = 1.0 + self.traj.params.mu1 * rs + self._c2 * rs * rs
        big = ~small
        if np.any(big):
            out[big] = np.exp(self._lnh(np.log(r[big])))
        return out if out.ndim else float(out)

    def hr(self, r):
        r = np.asarray(r, dtype=float)
        self._check(r)
        small = r < self.r_min
        out = np.empty_like(r)
        if np.any(small):
            out[small] = self.traj.params.mu1 + 2.0 * self._c2 * r[small]
        big = ~small
        if np.any(big):
            rb = r[big]
            x = np.log(rb)
            out[big] = self._q(x) * np.exp(self._lnh(x)) / rb
        return out if out.ndim else float(out)

    def _check(self, r: np.ndarray) -> None:
        if np.any(r < 0.0) or np.any(r > self.r_max * (1.0 + 1e-12)):
            raise DomainError(
                f"interpolation radius outside [0, {self.r_max}]"
            )
