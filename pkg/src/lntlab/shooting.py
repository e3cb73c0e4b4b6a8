"""Regular solutions of the initial-value problem u(0) = gamma, u'(0) = 0.

The origin is a regular singular point of the radial Laplacian, so each shot
starts from a Taylor expansion at a small radius chosen so the neglected
fourth-order term sits below tolerance. Large gamma shots develop an initial
collapse layer of width about gamma**(-(p-1)/2); the adaptive integrator
walks through it without special handling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BracketError, EventError, ParameterError
from .ode import RadialState, RadialTrajectory, integrate_adaptive
from .params import ProblemParams
from .singular import CriticalRadii, SingularSolution, _critical_radii_from

__all__ = [
    "ShootingResult",
    "shoot",
    "convergence_to_singular",
    "branch_sample",
    "ConvergenceReport",
]

BRANCH_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class ShootingResult:
    """One regular solution, its trajectory, and its critical radii."""

    gamma: float
    params: ProblemParams
    trajectory: RadialTrajectory
    critical_radii: CriticalRadii

    @property
    def nonpositive(self) -> bool:
        return self.trajectory.status == "nonpositive"


def _taylor_start(gamma: float, params: ProblemParams, r_end: float,
                  rtol: float, atol: float) -> RadialState:
    N, p = params.N, params.p
    try:
        up = gamma**p
    except OverflowError:
        up = math.inf
    if not math.isfinite(up):
        raise ParameterError(
            f"gamma**p = {gamma}**{p} overflows double precision; "
            "the instance is outside the supported range"
        )
    c2 = (gamma - up) / (2.0 * N)
    tol_eff = atol + rtol * gamma
    h_cap = min(0.01 * 2.0 * math.pi / math.sqrt(p - 1.0), 1e-3 * r_end)
    if c2 == 0.0:
        return RadialState(r=h_cap, u=gamma, du=0.0)
    # fourth-order coefficient |c4| = |1 - p gamma**(p-1)| |c2| / (4(N+2));
    # assembled in logs because gamma**(2p-1) can overflow long before the
    # trajectory itself does
    log_pg = math.log(p) + (p - 1.0) * math.log(gamma)
    if log_pg > 50.0:
        log_lin = log_pg
    else:
        lin = abs(1.0 - math.exp(log_pg))
        if lin == 0.0:
            return RadialState(r=h_cap, u=gamma + c2 * h_cap**2, du=2.0 * c2 * h_cap)
        log_lin = math.log(lin)
    log_c4 = log_lin + math.log(abs(c2)) - math.log(4.0 * (N + 2.0))
    h = math.exp(0.25 * (math.log(tol_eff) - log_c4))
    if h == 0.0:
        raise ParameterError(
            f"origin step for gamma={gamma}, p={p} underflows double precision"
        )
    h = min(h, h_cap)
    return RadialState(r=h, u=gamma + c2 * h * h, du=2.0 * c2 * h)


def shoot(
    gamma: float,
    params: ProblemParams,
    r_end: float,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> ShootingResult:
    """Integrate the regular initial-value problem out to r_end.

    gamma = 1 returns the constant equilibrium. A shot that reaches u = 0 is
    returned with its trajectory marked nonpositive rather than raised, since
    some (gamma, p) genuinely leave the positive cone.
    """
    if not (gamma > 0):
        raise ParameterError(f"initial value must be positive, got gamma={gamma}")
    if gamma == 1.0:
        start = RadialState(r=1e-6 * r_end, u=1.0, du=0.0)
    else:
        start = _taylor_start(gamma, params, r_end, rtol, atol)
    traj = integrate_adaptive(params, start, r_end, rtol, atol)
    return ShootingResult(
        gamma=gamma,
        params=params,
        trajectory=traj,
        critical_radii=_critical_radii_from(traj, require_first_min=False),
    )


@dataclass(frozen=True)
class ConvergenceReport:
    """Sup-distances between regular shots and the singular solution."""

    gammas: tuple[float, ...]
    distances: tuple[float, ...]
    interval: tuple[float, float]
    statuses: tuple[str, ...]
    passed: bool  # distances strictly decreasing over the usable shots
    complete: bool  # every requested shot was usable


def convergence_to_singular(
    params: ProblemParams,
    gammas,
    interval: tuple[float, float],
    singular: SingularSolution | None = None,
    n_grid: int = 2048,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> ConvergenceReport:
    """Sup-norm distance of u_gamma to the singular solution on an interval.

    Distances are measured on a shared uniform grid. Shots that lose
    positivity are excluded and demote ``complete``; the monotonicity verdict
    covers the usable shots only.
    """
    a, b = interval
    if not (0.0 < a < b):
        raise ParameterError(f"interval must satisfy 0 < a < b, got {interval}")
    gammas = [float(g) for g in gammas]
    if any(g <= 1.0 for g in gammas):
        raise ParameterError("convergence sweep requires gamma > 1")
    if sorted(gammas) != gammas:
        raise ParameterError("gammas must be increasing")
    if singular is None:
        from .singular import solve_singular

        singular = solve_singular(params, r_end=1.05 * b, rtol=rtol, atol=atol)
    if not singular.trajectory.covers(a, b):
        raise ParameterError("singular solution does not cover the interval")
    grid = np.linspace(a, b, n_grid)
    u_ref, _ = singular.sample(grid)

    distances, statuses = [], []
    for g in gammas:
        shot = shoot(g, params, r_end=1.05 * b, rtol=rtol, atol=atol)
        if shot.nonpositive or not shot.trajectory.covers(a, b):
            distances.append(math.nan)
            statuses.append("nonpositive")
            continue
        u_g, _ = shot.trajectory.sample(grid)
        distances.append(float(np.max(np.abs(u_g - u_ref))))
        statuses.append("ok")
    usable = [d for d in distances if not math.isnan(d)]
    passed = len(usable) >= 2 and all(x > y for x, y in zip(usable, usable[1:]))
    return ConvergenceReport(
        gammas=tuple(gammas),
        distances=tuple(distances),
        interval=(a, b),
        statuses=tuple(statuses),
        passed=passed,
        complete=all(s == "ok" for s in statuses),
    )


def _critical_radius_of_shot(
    gamma: float,
    params: ProblemParams,
    i: int,
    rtol: float,
    atol: float,
    r_end0: float,
) -> float:
    """The i-th critical radius of a shot, extending r_end as needed."""
    r_end = r_end0
    cap = r_end0 * 2**10
    while True:
        shot = shoot(gamma, params, r_end, rtol, atol)
        if len(shot.critical_radii) >= i:
            return shot.critical_radii[i - 1]
        if shot.nonpositive:
            raise EventError(
                f"shot gamma={gamma}, p={params.p} lost positivity before "
                f"critical point {i}"
            )
        if r_end >= cap:
            raise EventError(
                f"critical point {i} of shot gamma={gamma}, p={params.p} "
                f"not found up to r={r_end}"
            )
        r_end *= 2.0


def branch_sample(
    i: int,
    R: float,
    N: int,
    gamma: float,
    p_bracket: tuple[float, float],
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> float:
    """Power p at which the i-th critical radius of u_gamma equals R.

    Bisects p on ``p_bracket`` against the residual r_i(p) - R; one sample of
    the upper-branch diagram data at fixed gamma. The residual of the
    returned power is below 1e-8.
    """
    if i < 1:
        raise ParameterError(f"critical index must be >= 1, got {i}")
    lo, hi = float(p_bracket[0]), float(p_bracket[1])
    if not (lo < hi):
        raise ParameterError(f"invalid bracket {p_bracket}")
    r_end0 = max(2.0 * R, 1.0)

    def residual(p: float) -> float:
        params = ProblemParams(N, p, R=R)
        return _critical_radius_of_shot(gamma, params, i, rtol, atol, r_end0) - R

    f_lo, f_hi = residual(lo), residual(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if math.copysign(1.0, f_lo) == math.copysign(1.0, f_hi):
        raise BracketError(
            f"no sign change of r_{i} - R on p in [{lo}, {hi}]: "
            f"residuals ({f_lo}, {f_hi})"
        )
    f_mid = math.inf
    while hi - lo > 5e-13 * hi:
        mid = 0.5 * (lo + hi)
        f_mid = residual(mid)
        if abs(f_mid) < BRANCH_RESIDUAL_TOL:
            return mid
        if math.copysign(1.0, f_mid) == math.copysign(1.0, f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    if abs(f_mid) < BRANCH_RESIDUAL_TOL:
        return 0.5 * (lo + hi)
    raise BracketError(
        f"bisection exhausted the bracket without meeting the residual "
        f"tolerance: |r_{i} - R| = {abs(f_mid)}"
    )
