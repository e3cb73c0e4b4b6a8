"""Closed-form parameter algebra for the supercritical radial Neumann problem.

Everything in this module is scalar arithmetic derived from the dimension N
and the power p: exponent thresholds, the constants of the near-origin
power-law profile ``A * r**(-theta)``, the kernel of the constant-coefficient
comparison operator in logarithmic radius, and the smallness constant that
bounds the validated seeding window ``r <= ctilde / sqrt(p)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import FeasibilityError, ParameterError

__all__ = [
    "Regime",
    "ProblemParams",
    "DerivedConstants",
    "LemmaConstants",
    "AsymptoticLimits",
    "critical_exponent",
    "joseph_lundgren",
    "derive_constants",
    "asymptotic_limits",
    "green_kernel",
    "phi_nonlinearity",
    "f_envelope",
    "compute_PN",
    "choose_ctilde",
    "ctilde_record",
    "lemma_constants",
    "beta_dimension10",
]


class Regime(Enum):
    """Sign class of p - 1 - (alpha/2)**2, which selects the kernel shape."""

    OSCILLATORY = "oscillatory"
    NON_OSCILLATORY = "non_oscillatory"
    DEGENERATE = "degenerate"


def _check_dimension(N: int) -> None:
    if not isinstance(N, (int, np.integer)):
        raise ParameterError(f"dimension must be an integer, got {N!r}")
    if N < 3:
        raise ParameterError(f"dimension must satisfy N >= 3, got N={N}")


def critical_exponent(N: int) -> float:
    """Sobolev threshold (N+2)/(N-2) separating sub- and supercritical powers."""
    _check_dimension(N)
    return (N + 2) / (N - 2)


def joseph_lundgren(N: int) -> float:
    """Joseph-Lundgren exponent 1 + 4/(N - 4 - 2*sqrt(N-1)); +inf for N <= 10.

    The infinite branch is returned as ``math.inf`` so that comparisons like
    ``p < joseph_lundgren(N)`` are correct without magic large numbers.
    """
    _check_dimension(N)
    if N <= 10:
        return math.inf
    return 1.0 + 4.0 / (N - 4 - 2.0 * math.sqrt(N - 1.0))


@dataclass(frozen=True)
class ProblemParams:
    """One instance of -u'' - (N-1)/r u' + u = u**p on a ball of radius R.

    R may be omitted for operations that only use the equation on a ray.
    Powers strictly below the critical exponent are rejected; the boundary
    p = (N+2)/(N-2) itself is admitted because every closed form stays
    finite there (it is the alpha = 0 case).
    """

    N: int
    p: float
    R: float | None = None

    def __post_init__(self):
        _check_dimension(self.N)
        ps = critical_exponent(self.N)
        if not (self.p >= ps):
            raise ParameterError(
                f"supercritical power required: p={self.p} < (N+2)/(N-2)={ps} at N={self.N}"
            )
        if self.R is not None and not (self.R > 0):
            raise ParameterError(f"ball radius must be positive, got R={self.R}")

    def as_dict(self) -> dict:
        return {"N": self.N, "p": self.p, "R": self.R}


@dataclass(frozen=True)
class DerivedConstants:
    """Closed-form constants of one (N, p) instance.

    ``A * r**(-theta)`` is the leading singular profile, ``m`` the slope of
    the logarithmic-radius substitution ``r = exp(-m*zeta)``, ``alpha`` and
    ``beta`` the drift and frequency of the comparison operator, and ``Dp``
    the amplitude of the decaying envelope ``f(zeta) = Dp*exp(-2*m*zeta)``.
    """

    N: int
    p: float
    theta: float
    A: float
    m: float
    alpha: float
    beta: float
    Dp: float
    pS: float
    pJL: float
    regime: Regime

    def as_dict(self) -> dict:
        d = {
            "N": self.N,
            "p": self.p,
            "theta": self.theta,
            "A": self.A,
            "m": self.m,
            "alpha": self.alpha,
            "beta": self.beta,
            "Dp": self.Dp,
            "pS": self.pS,
            "pJL": "inf" if math.isinf(self.pJL) else self.pJL,
            "regime": self.regime.name,
        }
        return d


def derive_constants(params: ProblemParams) -> DerivedConstants:
    """Evaluate all closed-form constants for one problem instance."""
    N, p = params.N, params.p
    theta = 2.0 / (p - 1.0)
    # theta < N-2 is implied by p > (N+2)/(N-2); assert defensively since A
    # requires theta*(N-2-theta) > 0.
    if theta >= N - 2:
        raise ParameterError(f"theta={theta} >= N-2={N - 2}: leading profile undefined")
    base = theta * (N - 2.0 - theta)
    A = math.exp(math.log(base) / (p - 1.0))
    m = 1.0 / math.sqrt(base)
    alpha = m * (N - 2.0 - 2.0 * theta)
    disc = (p - 1.0) - (alpha / 2.0) ** 2
    beta = math.sqrt(abs(disc))
    Dp = m * m / (4.0 * m * m + 2.0 * alpha * m + (p - 1.0))
    if disc > 0.0:
        regime = Regime.OSCILLATORY
    elif disc < 0.0:
        regime = Regime.NON_OSCILLATORY
    else:
        regime = Regime.DEGENERATE
    return DerivedConstants(
        N=N,
        p=p,
        theta=theta,
        A=A,
        m=m,
        alpha=alpha,
        beta=beta,
        Dp=Dp,
        pS=critical_exponent(N),
        pJL=joseph_lundgren(N),
        regime=regime,
    )


@dataclass(frozen=True)
class AsymptoticLimits:
    """Limits of the derived constants as p -> infinity at fixed N."""

    N: int
    beta_over_sqrt_p: float
    p_theta: float
    A: float
    alpha_over_sqrt_p: float
    m_over_sqrt_p: float
    Dp: float


def asymptotic_limits(N: int) -> AsymptoticLimits:
    """Large-p limits of the derived constants.

    ``beta_over_sqrt_p`` is sqrt(|1 - (N-2)/8|); it vanishes at N = 10 where
    beta itself stays bounded.
    """
    _check_dimension(N)
    return AsymptoticLimits(
        N=N,
        beta_over_sqrt_p=math.sqrt(abs(1.0 - (N - 2.0) / 8.0)),
        p_theta=2.0,
        A=1.0,
        alpha_over_sqrt_p=math.sqrt((N - 2.0) / 2.0),
        m_over_sqrt_p=1.0 / math.sqrt(2.0 * (N - 2.0)),
        Dp=1.0 / (4.0 * (N - 1.0)),
    )


def beta_dimension10(p: float) -> float:
    """Algebraically simplified beta at N = 10; equals the generic formula."""
    return math.sqrt((3.0 * (p - 1.0) - 1.0) / (4.0 * (p - 1.0) - 1.0))


def green_kernel(x, c: DerivedConstants):
    """Kernel of d^2/dx^2 - alpha d/dx + (p-1) on the half line, zero for x < 0.

    Oscillatory regime: exp(-alpha*x/2) * sin(beta*x) / beta.
    Non-oscillatory regime: exp(-alpha*x/2) * sinh(beta*x) / beta, evaluated
    in exponential-difference form so large arguments do not overflow.
    Degenerate regime: x * exp(-alpha*x/2).
    """
    if c.regime is not Regime.DEGENERATE and not (c.beta > 0):
        raise ParameterError("beta must be positive outside the degenerate regime")
    x = np.asarray(x, dtype=float)
    half = 0.5 * c.alpha
    if c.regime is Regime.OSCILLATORY:
        pos = np.exp(-half * x) * np.sin(c.beta * x) / c.beta
    elif c.regime is Regime.NON_OSCILLATORY:
        # beta < alpha/2 here, so both exponents are negative for x > 0
        pos = 0.5 * (np.exp((c.beta - half) * x) - np.exp(-(c.beta + half) * x)) / c.beta
    else:
        pos = x * np.exp(-half * x)
    out = np.where(x >= 0.0, pos, 0.0)
    return float(out) if out.ndim == 0 else out


def phi_nonlinearity(eta, p: float):
    """Quadratic remainder -( (1+eta)**p - 1 - p*eta ), nonpositive, 0 only at 0.

    Evaluated through expm1/log1p so the cancellation for small eta does not
    destroy accuracy.
    """
    eta = np.asarray(eta, dtype=float)
    if np.any(1.0 + eta <= 0.0):
        raise ParameterError("phi_nonlinearity requires 1 + eta > 0")
    out = -(np.expm1(p * np.log1p(eta)) - p * eta)
    return float(out) if out.ndim == 0 else out


def f_envelope(zeta, c: DerivedConstants):
    """Decaying envelope Dp * exp(-2*m*zeta); strictly decreasing in zeta."""
    zeta = np.asarray(zeta, dtype=float)
    out = c.Dp * np.exp(-2.0 * c.m * zeta)
    return float(out) if out.ndim == 0 else out


def compute_PN(c: DerivedConstants, ctilde: float, p: float) -> tuple[float, float]:
    """Smallness functional and its admissibility threshold for one (c, ctilde).

    Returns ``(PN, threshold)``. The envelope value at the edge of the seed
    window is ``f = Dp * ctilde**2 / p``; PN multiplies ``|phi(f)|/f`` by a
    kernel bound whose form depends on whether N < 10 or N >= 10. The
    constant ctilde is admissible when PN < threshold.
    """
    if not (0.0 < ctilde < 1.0):
        raise ParameterError(f"ctilde must lie in (0, 1), got {ctilde}")
    if c.Dp * ctilde * ctilde > 1.0:
        raise ParameterError("Dp * ctilde**2 must not exceed 1")
    if not (c.beta > 0):
        raise ParameterError("kernel bound undefined for beta = 0")
    f_edge = c.Dp * ctilde * ctilde / p
    ratio = abs(phi_nonlinearity(f_edge, p)) / f_edge
    if c.N < 10:
        damp = math.exp(-(c.alpha + 8.0 * c.m) * math.pi / (2.0 * c.beta))
        bracket = 4.0 * (1.0 + damp) / ((c.alpha + 8.0 * c.m) ** 2 + 4.0 * c.beta**2)
        threshold = 0.5 * (1.0 - damp) / (1.0 + damp)
    else:
        denom = 2.0 * c.beta * (0.5 * c.alpha + 4.0 * c.m - c.beta)
        if denom <= 0.0:
            raise FeasibilityError(
                f"kernel bound degenerate at N={c.N}, p={p}: "
                "alpha/2 + 4m - beta is not positive"
            )
        bracket = 1.0 / denom
        threshold = 0.5
    return ratio * bracket, threshold


# ctilde search is deterministic, so the cache is write-once per key.
_CTILDE_CACHE: dict[tuple[int, float, float], dict] = {}

_CTILDE_GRID = [2.0**-k for k in range(1, 21)]
_P_SAMPLES = 32


def choose_ctilde(N: int, p_range: tuple[float, float]) -> float:
    """Largest grid constant ctilde admissible across a sampled power range.

    Searches ctilde over {2**-1, ..., 2**-20} and requires, at 32 log-spaced
    powers in ``p_range``, that ``compute_PN`` stays below its threshold and
    ``Dp * ctilde**2 <= 1``. Only existence is guaranteed upstream, so the
    search favors determinism and recorded margins over optimality.
    """
    return ctilde_record(N, p_range)["ctilde"]


def ctilde_record(N: int, p_range: tuple[float, float]) -> dict:
    """Like :func:`choose_ctilde` but returns the cached search record.

    The record holds the chosen constant and the worst margin
    ``threshold - PN`` over the sampled powers.
    """
    _check_dimension(N)
    lo, hi = float(p_range[0]), float(p_range[1])
    ps = critical_exponent(N)
    if not (ps <= lo <= hi):
        raise ParameterError(
            f"p_range must sit inside the supercritical range [{ps}, inf), got {p_range}"
        )
    key = (N, lo, hi)
    if key in _CTILDE_CACHE:
        return _CTILDE_CACHE[key]
    if lo == hi:
        p_samples = np.array([lo])
    else:
        p_samples = np.exp(np.linspace(math.log(lo), math.log(hi), _P_SAMPLES))
    constants = [derive_constants(ProblemParams(N, float(p))) for p in p_samples]
    for ctilde in _CTILDE_GRID:
        margin = math.inf
        feasible = True
        for c, p in zip(constants, p_samples):
            if c.Dp * ctilde * ctilde > 1.0:
                feasible = False
                break
            try:
                pn, threshold = compute_PN(c, ctilde, float(p))
            except (ParameterError, FeasibilityError):
                feasible = False
                break
            if not (pn < threshold):
                feasible = False
                break
            margin = min(margin, threshold - pn)
        if feasible:
            record = {"ctilde": ctilde, "margin": margin, "N": N, "p_range": (lo, hi)}
            _CTILDE_CACHE[key] = record
            return record
    raise FeasibilityError(
        f"no admissible ctilde on the search grid for N={N}, p_range={p_range}; "
        "the range likely contains powers that are too small"
    )


@dataclass(frozen=True)
class LemmaConstants:
    """Seed-window constants of one instance: ctilde, its radius and log-radius.

    ``rtilde_p = ctilde / sqrt(p) = exp(-m * zetatilde_p)`` bounds the window
    on which the two-sided power-law envelope is validated, and ``PN`` with
    ``PN_threshold`` records the admissibility margin at this p.
    """

    N: int
    p: float
    ctilde: float
    rtilde_p: float
    zetatilde_p: float
    PN: float
    PN_threshold: float


def lemma_constants(
    params: ProblemParams,
    p_lo: float | None = None,
    p_hi: float | None = None,
) -> LemmaConstants:
    """Seed-window constants for ``params``, sharing ctilde across a power range.

    By default the admissibility search covers ``(min(p, 10), max(p, 1e4))``
    so that sweeps over common desk-scale powers reuse one ctilde.
    """
    c = derive_constants(params)
    lo = p_lo if p_lo is not None else min(params.p, 10.0)
    hi = p_hi if p_hi is not None else max(params.p, 1.0e4)
    lo = max(lo, critical_exponent(params.N))
    ctilde = choose_ctilde(params.N, (min(lo, params.p), max(hi, params.p)))
    rtilde = ctilde / math.sqrt(params.p)
    zetatilde = -math.log(rtilde) / c.m
    pn, threshold = compute_PN(c, ctilde, params.p)
    return LemmaConstants(
        N=params.N,
        p=params.p,
        ctilde=ctilde,
        rtilde_p=rtilde,
        zetatilde_p=zetatilde,
        PN=pn,
        PN_threshold=threshold,
    )
