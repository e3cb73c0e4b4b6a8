"""Root-finding on the power p: prescribe the i-th critical radius of the
singular solution, plus the continuity diagnostic for p -> R_p_i.

The map p -> R_p_i is continuous and decays to zero as p grows, so a target
radius R below R_p_i at the left endpoint is always bracketed by geometric
expansion and can be bisected. Bisection is used instead of a secant or
Newton step because only continuity is guaranteed across the numerics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BracketError, EventError, ParameterError
from .params import ProblemParams, critical_exponent
from .singular import solve_with_criticals

__all__ = [
    "ExponentSolution",
    "find_istar",
    "find_exponent",
    "continuity_scan",
    "ContinuityReport",
]

P_CAP_DEFAULT = 1.0e4
RESIDUAL_RTOL = 1e-6


@dataclass(frozen=True)
class ExponentSolution:
    """Power p_i at which the i-th critical radius equals the target R."""

    i: int
    R: float
    p_i: float
    residual: float  # |R_{p_i}^i - R|
    crossings: int  # number of u = 1 solutions on (0, R]


def find_istar(
    N: int,
    p_tilde: float,
    R: float,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> int:
    """Smallest index i with i-th critical radius above R at the power p_tilde."""
    if not (R > 0):
        raise ParameterError(f"target radius must be positive, got R={R}")
    params = ProblemParams(N, p_tilde, R=R)
    i = 1
    while True:
        sol = solve_with_criticals(params, i, rtol=rtol, atol=atol)
        radii = sol.critical_radii.radii
        above = np.nonzero(radii > R)[0]
        if above.size:
            return int(above[0]) + 1
        i = len(sol.critical_radii) + 1


def _critical_radius_and_crossings(
    params: ProblemParams, i: int, rtol: float, atol: float
) -> tuple[float, int]:
    sol = solve_with_criticals(params, i, rtol=rtol, atol=atol)
    radius = sol.critical_radii[i - 1]
    crossings = sol.trajectory.crossings_upto(radius)
    return radius, crossings


def find_exponent(
    i: int,
    R: float,
    N: int,
    p_lo: float,
    p_cap: float = P_CAP_DEFAULT,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> ExponentSolution:
    """Find p_i with i-th critical radius of the singular solution equal to R.

    Requires the i-th critical radius to exceed R at ``p_lo``. The upper
    bracket is found by geometric expansion (decay of critical radii in p
    guarantees one exists), verified, then bisected until the residual is
    below ``1e-6 * R``. The accepted solution must show exactly ``i`` unit
    crossings on (0, R]; a mismatch is retried once at tightened tolerance
    before failing.
    """
    if i < 1:
        raise ParameterError(f"oscillation index must be >= 1, got {i}")
    if not (p_lo > critical_exponent(N)):
        raise ParameterError(f"p_lo={p_lo} is not supercritical for N={N}")

    def radius_at(p: float) -> float:
        return _critical_radius_and_crossings(ProblemParams(N, p, R=R), i, rtol, atol)[0]

    r_lo = radius_at(p_lo)
    if not (r_lo > R):
        raise ParameterError(
            f"critical radius {i} at p_lo={p_lo} is {r_lo} <= R={R}; "
            "choose i >= istar(p_lo, R)"
        )
    lo, hi = p_lo, p_lo
    r_hi = r_lo
    while r_hi >= R:
        if hi >= p_cap:
            raise BracketError(
                f"critical radius {i} still >= R={R} at the power cap {p_cap}"
            )
        lo = hi
        hi = min(2.0 * hi, p_cap)
        r_hi = radius_at(hi)
    # bisect on p; the function is continuous but only known to be continuous,
    # so no derivative-based acceleration is attempted
    while hi - lo > 5e-12 * hi:
        mid = 0.5 * (lo + hi)
        if radius_at(mid) > R:
            lo = mid
        else:
            hi = mid
    p_i = 0.5 * (lo + hi)

    for attempt in range(2):
        radius, crossings = _critical_radius_and_crossings(
            ProblemParams(N, p_i, R=R), i, rtol / 10**attempt, atol / 10**attempt
        )
        residual = abs(radius - R)
        if crossings == i:
            break
    else:
        raise EventError(
            f"unit-crossing count {crossings} != i={i} at p_i={p_i} after retry; "
            "the bisection likely jumped to a different critical branch"
        )
    if residual >= RESIDUAL_RTOL * R:
        raise BracketError(
            f"bisection converged in p but residual {residual} exceeds "
            f"{RESIDUAL_RTOL * R}"
        )
    return ExponentSolution(i=i, R=R, p_i=p_i, residual=residual, crossings=crossings)


@dataclass(frozen=True)
class ContinuityReport:
    """Refinement study of the modulus of continuity of p -> R_p_i."""

    i: int
    grid: np.ndarray
    values: np.ndarray
    refined_grid: np.ndarray
    refined_values: np.ndarray
    modulus_coarse: float
    modulus_fine: float
    ratio: float
    max_jump_factor: float  # largest |increment| over the median on the fine grid
    passed: bool


def continuity_scan(
    i: int,
    N: int,
    p_grid,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> ContinuityReport:
    """Modulus of continuity of p -> R_p_i under midpoint grid refinement.

    Computes the i-th critical radius on the grid and on its midpoint
    refinement. For a continuous map the largest adjacent increment should
    halve when the mesh halves; PASS requires the ratio in [1/3, 2/3] and no
    isolated jump above 10x the median increment.
    """
    grid = np.asarray(sorted(float(p) for p in p_grid))
    if grid.size < 3:
        raise ParameterError("continuity scan needs at least three grid points")
    if grid[0] <= critical_exponent(N):
        raise ParameterError("grid extends below the supercritical range")

    def radius_at(p: float) -> float:
        return _critical_radius_and_crossings(ProblemParams(N, p), i, rtol, atol)[0]

    values = np.array([radius_at(p) for p in grid])
    mids = 0.5 * (grid[:-1] + grid[1:])
    mid_values = np.array([radius_at(p) for p in mids])
    refined = np.empty(grid.size + mids.size)
    refined[0::2] = grid
    refined[1::2] = mids
    refined_values = np.empty_like(refined)
    refined_values[0::2] = values
    refined_values[1::2] = mid_values

    inc_coarse = np.abs(np.diff(values))
    inc_fine = np.abs(np.diff(refined_values))
    modulus_coarse = float(np.max(inc_coarse))
    modulus_fine = float(np.max(inc_fine))
    ratio = modulus_fine / modulus_coarse if modulus_coarse > 0 else 0.0
    med = float(np.median(inc_fine))
    max_jump_factor = float(np.max(inc_fine) / med) if med > 0 else 0.0
    if modulus_coarse == 0.0:
        # degenerate constant grid: continuity holds with zero modulus
        passed = modulus_fine == 0.0
    else:
        passed = (1.0 / 3.0 <= ratio <= 2.0 / 3.0) and max_jump_factor <= 10.0
    return ContinuityReport(
        i=i,
        grid=grid,
        values=values,
        refined_grid=refined,
        refined_values=refined_values,
        modulus_coarse=modulus_coarse,
        modulus_fine=modulus_fine,
        ratio=ratio,
        max_jump_factor=max_jump_factor,
        passed=passed,
    )
