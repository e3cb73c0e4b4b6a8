"""Radial Morse index machinery: weighted Sturm-Liouville discretization,
inertia-based negative-eigenvalue counting, Rayleigh quotients, and the
logarithmically oscillating Hardy test functions.

The linearized operator at a radial solution u is

    L phi = -phi'' - (N-1)/r phi' - q(r) phi,      q(r) = p u**(p-1) - 1,

restricted to radial functions, with a Dirichlet cutoff at an inner radius
delta > 0 and a natural Neumann condition at the outer radius R. The inner
Dirichlet condition shrinks the form domain, so a negative-eigenvalue count
that keeps growing as delta -> 0 is unambiguous evidence of an infinite
index, while a plateau indicates a finite one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import ConvergenceFailure, CoverageError, ParameterError, PositivityError
from .ode import RadialTrajectory
from .params import ProblemParams
from .singular import SingularSolution

__all__ = [
    "EigenProblemSpec",
    "TridiagonalForm",
    "AssembledOperator",
    "SpectrumReport",
    "MorseScanResult",
    "TailClass",
    "SampledRadialFunction",
    "assemble_operator",
    "negative_count",
    "smallest_eigenvalues",
    "morse_scan",
    "rayleigh_quotient",
    "hardy_test_function",
    "potential_threshold_check",
    "ThresholdReport",
]

DEFAULT_EPS0 = 0.35
MIN_GRID_SIZE = 32


class TailClass(Enum):
    SUPERCRITICAL_STABLE_TAIL = "supercritical_stable_tail"
    UNBOUNDED = "unbounded"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class EigenProblemSpec:
    """Discretization metadata of one eigenvalue problem instance."""

    grid: np.ndarray  # nodes delta = r_0 < ... < r_M = R
    potential: np.ndarray  # q(r) = p u**(p-1) - 1 at the nodes
    inner_cutoff: float
    inner_bc: str = "dirichlet"
    outer_bc: str = "neumann"
    weight_exponent: int = 0  # N - 1


@dataclass(frozen=True)
class TridiagonalForm:
    """Symmetric tridiagonal pencil (A, B) with diagonal positive mass B."""

    diag: np.ndarray
    offdiag: np.ndarray
    mass: np.ndarray | None = None

    def __post_init__(self):
        if self.offdiag.size != max(self.diag.size - 1, 0):
            raise ParameterError("offdiagonal must be one shorter than the diagonal")
        if self.mass is not None and self.mass.size != self.diag.size:
            raise ParameterError("mass must match the diagonal size")


@dataclass(frozen=True)
class AssembledOperator:
    spec: EigenProblemSpec
    form: TridiagonalForm


@dataclass(frozen=True)
class SpectrumReport:
    """Negative-eigenvalue count at one (cutoff, grid) pair."""

    negative_count: int
    smallest_eigenvalues: tuple[float, ...]
    cutoff: float
    grid_size: int


@dataclass(frozen=True)
class MorseScanResult:
    reports: tuple[SpectrumReport, ...]
    classification: TailClass

    @property
    def counts(self) -> tuple[int, ...]:
        return tuple(rep.negative_count for rep in self.reports)


def _as_radial_callable(u):
    """Normalize the solution argument to a vectorized callable r -> u(r)."""
    if isinstance(u, SingularSolution):
        traj = u.trajectory
        return lambda r: traj.sample(r)[0], (traj.r_start, traj.r_end)
    if isinstance(u, RadialTrajectory):
        return lambda r: u.sample(r)[0], (u.r_start, u.r_end)
    if isinstance(u, (int, float)):
        val = float(u)
        if val <= 0:
            raise PositivityError("constant solution must be positive")
        return lambda r: np.full(np.shape(r), val, dtype=float), None
    if callable(u):
        return lambda r: np.asarray(u(r), dtype=float), None
    raise ParameterError(f"unsupported solution object {type(u)!r}")


def assemble_operator(
    u,
    params: ProblemParams,
    delta: float,
    grid_size: int,
) -> AssembledOperator:
    """Symmetric tridiagonal discretization of the linearized operator.

    Conservative second-order finite differences of -(r**(N-1) phi')' on a
    uniform grid over [delta, R], symmetrized by the r**(N-1) weight with a
    lumped diagonal mass. The row at delta is Dirichlet (the node is
    eliminated); the row at R applies the zero-flux Neumann condition with a
    half mass cell. ``grid_size`` counts intervals; unknowns are the
    ``grid_size`` nodes strictly above delta.
    """
    if params.R is None:
        raise ParameterError("params.R is required to assemble the operator")
    R = params.R
    if not (0.0 < delta < R):
        raise ParameterError(f"cutoff must satisfy 0 < delta < R, got {delta}")
    if grid_size < MIN_GRID_SIZE:
        raise ParameterError(f"grid_size must be >= {MIN_GRID_SIZE}, got {grid_size}")
    ueval, coverage = _as_radial_callable(u)
    if coverage is not None and not (coverage[0] <= delta and R <= coverage[1]):
        raise CoverageError(
            f"solution covers [{coverage[0]}, {coverage[1]}] but the "
            f"eigenproblem needs [{delta}, {R}]"
        )
    M = int(grid_size)
    nodes = np.linspace(delta, R, M + 1)
    h = (R - delta) / M
    uvals = ueval(nodes)
    if np.any(uvals <= 0.0):
        raise PositivityError("solution must be positive on the eigenproblem domain")
    q = params.p * uvals ** (params.p - 1.0) - 1.0

    Nw = params.N - 1
    w_mid = (0.5 * (nodes[:-1] + nodes[1:])) ** Nw  # flux weights at midpoints
    mass = h * nodes[1:] ** Nw
    mass[-1] *= 0.5  # half cell at the Neumann end

    diag = np.empty(M)
    diag[:-1] = (w_mid[:-1] + w_mid[1:]) / h - q[1:-1] * mass[:-1]
    diag[-1] = w_mid[-1] / h - q[-1] * mass[-1]
    off = -w_mid[1:] / h

    spec = EigenProblemSpec(
        grid=nodes,
        potential=q,
        inner_cutoff=delta,
        weight_exponent=Nw,
    )
    return AssembledOperator(spec=spec, form=TridiagonalForm(diag=diag, offdiag=off, mass=mass))


def _ldl_negative_count(diag: np.ndarray, off: np.ndarray) -> int | None:
    """Inertia of a symmetric tridiagonal matrix from the LDL^T pivots.

    Returns None on pivot breakdown (a zero or non-finite pivot).
    """
    pivot = diag[0]
    if pivot == 0.0 or not math.isfinite(pivot):
        return None
    count = int(pivot < 0.0)
    for k in range(1, diag.size):
        pivot = diag[k] - off[k - 1] * off[k - 1] / pivot
        if pivot == 0.0 or not math.isfinite(pivot):
            return None
        count += int(pivot < 0.0)
    return count


def negative_count(system, shift: float = 0.0) -> int:
    """Number of pencil eigenvalues below ``shift`` via a Sturm/inertia pass.

    Exact for the discrete system up to floating-point sign evaluation at the
    shift. A pivot breakdown perturbs the shift by 1e-12 times the matrix
    scale and retries, at most three times.
    """
    form = system.form if isinstance(system, AssembledOperator) else system
    diag = np.asarray(form.diag, dtype=float)
    off = np.asarray(form.offdiag, dtype=float)
    mass = np.ones_like(diag) if form.mass is None else np.asarray(form.mass, dtype=float)
    if diag.size == 0:
        return 0
    scale = max(
        float(np.max(np.abs(diag))),
        float(np.max(np.abs(off))) if off.size else 0.0,
        1.0,
    )
    s = shift
    for _ in range(4):
        count = _ldl_negative_count(diag - s * mass, off)
        if count is not None:
            return count
        s += 1e-12 * scale
    raise ConvergenceFailure("inertia recurrence broke down after three shift perturbations")


def smallest_eigenvalues(system, k: int = 4) -> tuple[float, ...]:
    """The k smallest pencil eigenvalues via the mass-normalized standard form."""
    form = system.form if isinstance(system, AssembledOperator) else system
    diag = np.asarray(form.diag, dtype=float)
    off = np.asarray(form.offdiag, dtype=float)
    mass = np.ones_like(diag) if form.mass is None else np.asarray(form.mass, dtype=float)
    d = diag / mass
    e = off / np.sqrt(mass[:-1] * mass[1:]) if off.size else off
    k = min(k, diag.size)
    vals = eigh_tridiagonal(d, e, select="i", select_range=(0, k - 1), eigvals_only=True)
    return tuple(float(v) for v in vals)


def _doubling(start: int, cap: int):
    size = start
    while size <= cap:
        yield size
        size *= 2


def _resolution_floor(params: ProblemParams, delta: float) -> int:
    """Grid size resolving the innermost oscillation of threshold modes.

    Near the origin the potential behaves like C/r**2 with
    C = p theta (N-2-theta); when C exceeds the Hardy constant, eigenmodes
    near zero oscillate in log-radius with wavenumber sqrt(C - H), giving a
    local wavelength 2 pi r / sqrt(C - H). Sixteen points across that
    wavelength at r = delta fixes the minimum uniform grid.
    """
    theta = 2.0 / (params.p - 1.0)
    climit = params.p * theta * (params.N - 2.0 - theta)
    hardy = 0.25 * (params.N - 2.0) ** 2
    wavenumber = math.sqrt(max(climit - hardy, 1.0))
    needed = 16.0 * (params.R - delta) * wavenumber / (2.0 * math.pi * delta)
    size = 1
    while size < needed:
        size *= 2
    return size


def morse_scan(
    params: ProblemParams,
    sol,
    deltas,
    grid_sizes=None,
    eig_k: int = 3,
    grid_start: int = 8192,
    grid_cap: int = 2**20,
) -> MorseScanResult:
    """Grid-converged negative-eigenvalue counts along a decreasing cutoff list.

    At each cutoff the grid is refined (doubling by default, or the supplied
    ``grid_sizes``) until two successive grids agree on the count; only then
    is the count accepted. Counts that keep increasing as the cutoff shrinks
    classify the tail as UNBOUNDED, a plateau as SUPERCRITICAL_STABLE_TAIL.
    """
    deltas = [float(d) for d in deltas]
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ParameterError("cutoffs must be strictly decreasing")
    reports = []
    for delta in deltas:
        if grid_sizes is not None:
            sizes = list(grid_sizes)
        else:
            start = max(grid_start, _resolution_floor(params, delta))
            sizes = _doubling(start, max(grid_cap, start))
        prev_count, accepted = None, None
        for size in sizes:
            op = assemble_operator(sol, params, delta, size)
            count = negative_count(op)
            if prev_count is not None and count == prev_count:
                accepted = (size, count, op)
                break
            prev_count = count
        if accepted is None:
            raise ConvergenceFailure(
                f"negative count did not stabilize under grid refinement at delta={delta}"
            )
        size, count, op = accepted
        reports.append(
            SpectrumReport(
                negative_count=count,
                smallest_eigenvalues=smallest_eigenvalues(op, eig_k),
                cutoff=delta,
                grid_size=size,
            )
        )
    counts = [rep.negative_count for rep in reports]
    if all(b > a for a, b in zip(counts, counts[1:])):
        classification = TailClass.UNBOUNDED
    elif len(counts) >= 2 and counts[-1] == counts[-2]:
        classification = TailClass.SUPERCRITICAL_STABLE_TAIL
    else:
        classification = TailClass.INCONCLUSIVE
    return MorseScanResult(reports=tuple(reports), classification=classification)


@dataclass(frozen=True)
class SampledRadialFunction:
    """Radial function carried in log-radius with the r**(-(N-2)/2) factor split off.

    The stored samples are y(s) = phi(e**s) * e**(nu*s) with nu = (N-2)/2 and
    s = ln r, together with dy/ds. This representation keeps quadratic forms
    of steeply singular functions inside double-precision range.
    """

    N: int
    log_r: np.ndarray
    scaled: np.ndarray
    scaled_d: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.log_r) <= 0):
            raise ParameterError("log-radius samples must be strictly increasing")

    @property
    def nu(self) -> float:
        return 0.5 * (self.N - 2.0)

    @property
    def radii(self) -> np.ndarray:
        return np.exp(self.log_r)

    def values(self) -> np.ndarray:
        """Plain phi(r) samples; may overflow for supports very close to 0."""
        return self.scaled * np.exp(-self.nu * self.log_r)

    @classmethod
    def from_plain(cls, r, phi, dphi, N: int) -> "SampledRadialFunction":
        """Build the scaled representation from plain (r, phi, phi') samples."""
        r = np.asarray(r, dtype=float)
        phi = np.asarray(phi, dtype=float)
        dphi = np.asarray(dphi, dtype=float)
        s = np.log(r)
        nu = 0.5 * (N - 2.0)
        scale = np.exp(nu * s)
        y = phi * scale
        dy = dphi * r * scale + nu * y
        return cls(N=N, log_r=s, scaled=y, scaled_d=dy)


def _q_r2(ueval, r: np.ndarray, p: float) -> np.ndarray:
    """r**2 (p u**(p-1) - 1), grouped so steep profiles do not overflow."""
    t = ueval(r) * r ** (2.0 / (p - 1.0))
    return p * t ** (p - 1.0) - r * r


def rayleigh_quotient(phi: SampledRadialFunction, u, params: ProblemParams) -> float:
    """Quadratic-form value integral of (phi'**2 - q phi**2) r**(N-1) dr.

    Composite trapezoid on the sample grid in log-radius; the surface-area
    constant of the unit sphere is omitted since only the sign matters. In
    the scaled representation the integrand is

        (dy/ds - nu y)**2 - (q r**2) y**2,

    which stays order one even when the support sits at radii where phi
    itself would overflow.
    """
    if phi.N != params.N:
        raise ParameterError("test function and problem dimension disagree")
    ueval, coverage = _as_radial_callable(u)
    r = phi.radii
    if coverage is not None and not (coverage[0] <= r[0] and r[-1] <= coverage[1]):
        raise CoverageError(
            f"solution covers [{coverage[0]}, {coverage[1]}] but the test "
            f"function is supported on [{r[0]}, {r[-1]}]"
        )
    grad = (phi.scaled_d - phi.nu * phi.scaled) ** 2
    pot = _q_r2(ueval, r, params.p) * phi.scaled**2
    return float(np.trapezoid(grad - pot, phi.log_r))


def hardy_test_function(
    j: int,
    eps0: float = DEFAULT_EPS0,
    N: int = 3,
    n_points: int = 1024,
) -> SampledRadialFunction:
    """The j-th logarithmically oscillating test function with Hardy-critical decay.

    f_j(r) = r**(-(N-2)/2) sin(eps0 ln(r) / 2) restricted to the annulus
    [r_{j+1}, r_j] with r_j = exp(-2 pi j / eps0), where the sine vanishes.
    Different j have disjoint supports. Sampling is uniform in log-radius
    with at least 256 points per support so quadratures resolve the arch.
    """
    if j < 1:
        raise ParameterError(f"index must be >= 1, got {j}")
    if not (eps0 > 0):
        raise ParameterError(f"eps0 must be positive, got {eps0}")
    n_points = max(int(n_points), 256)
    s = np.linspace(-2.0 * math.pi * (j + 1) / eps0, -2.0 * math.pi * j / eps0, n_points)
    y = np.sin(0.5 * eps0 * s)
    dy = 0.5 * eps0 * np.cos(0.5 * eps0 * s)
    # the sine vanishes at both endpoints by construction; make it exact
    y[0] = 0.0
    y[-1] = 0.0
    return SampledRadialFunction(N=N, log_r=s, scaled=y, scaled_d=dy)


@dataclass(frozen=True)
class ThresholdReport:
    """Comparison of the linearized potential against the Hardy constant."""

    radii: np.ndarray
    scaled_potential: np.ndarray  # r**2 (p u**(p-1) - 1) samples
    limit_computed: float  # value at the smallest covered radius
    limit_closed_form: float  # p theta (N - 2 - theta)
    hardy_constant: float  # (N-2)**2 / 4
    margin: float  # limit_closed_form - hardy_constant
    side: str  # "above" or "below"
    eps0: float
    eps0_inequality_holds: bool  # strict separation at the supplied eps0
    consistent_with_pjl: bool
    limit_match: bool
    passed: bool


def potential_threshold_check(
    sol: SingularSolution,
    eps0: float = DEFAULT_EPS0,
    n_samples: int = 64,
) -> ThresholdReport:
    """Locate the near-origin potential relative to the Hardy constant.

    Samples r**2 (p u**(p-1) - 1) on the validated seed window. The limit at
    the origin is p theta (N-2-theta); the potential admits infinitely many
    negative directions when the limit exceeds (N-2)**2/4 (power below the
    Joseph-Lundgren exponent) and only finitely many when it falls below.
    The eps0 flag records whether the separation is strict at the supplied
    margin: limit >= hardy + eps0**2 on the infinite-index side, or
    limit <= (1 - eps0) * hardy on the finite-index side.
    """
    params = sol.params
    c = sol.constants
    radii = np.geomspace(sol.seed_radius * (1.0 + 1e-12), sol.lemma.rtilde_p, n_samples)
    traj = sol.trajectory
    scaled = _q_r2(lambda r: traj.sample(r)[0], radii, params.p)
    limit_computed = float(scaled[0])
    limit_closed = params.p * c.theta * (params.N - 2.0 - c.theta)
    hardy = 0.25 * (params.N - 2.0) ** 2
    margin = limit_closed - hardy
    consistent = (margin > 0.0) == (params.p < c.pJL)
    if margin > 0.0:
        eps0_holds = limit_closed >= hardy + eps0 * eps0
    else:
        eps0_holds = limit_closed <= (1.0 - eps0) * hardy
    limit_match = abs(limit_computed - limit_closed) <= 1e-3 * limit_closed
    return ThresholdReport(
        radii=radii,
        scaled_potential=scaled,
        limit_computed=limit_computed,
        limit_closed_form=limit_closed,
        hardy_constant=hardy,
        margin=margin,
        side="above" if margin > 0 else "below",
        eps0=eps0,
        eps0_inequality_holds=eps0_holds,
        consistent_with_pjl=consistent,
        limit_match=limit_match,
        passed=consistent and limit_match,
    )
