"""Asymptotic per-user capacity of the sign-slicer CDMA downlink.

In the large-system limit the log-count of codewords that survive hard
decisions concentrates, and the capacity at load ``beta = K/N`` is the
value of an exponential rate function ``g(a, b, beta)`` at its saddle
point. The saddle has ``b* = 0`` identically, while ``a*`` solves a scalar
fixed-point condition built from the Gaussian tail ratio. This module
evaluates ``g``, its exact gradient, and the capacity curve over a load
grid.

Everything here is a pure function of its arguments: no global state, safe
to call from any number of threads. Capacities are computed in nats and
converted to bits at the dataclass boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import erfcx

from .errors import ConvergenceError, DomainError

_SQRT2 = math.sqrt(2.0)
_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_LN2 = math.log(2.0)

# Above this argument the plain quotient -phi(t)/Q(t) is replaced by the
# scaled-erfc form, which stays exact long after Q itself underflows. The
# saddle always has t* < 0, so the switch only matters for gradient checks
# at arbitrary points.
_TAIL_SWITCH = 8.0

#: Residual bound guaranteed for both gradient components at a solution
#: obtained with the default :class:`SolverConfig`.
GRADIENT_RESIDUAL_BOUND = 1e-8


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return value


def gaussian_tail(x: float) -> float:
    """Upper tail Q(x) = P(Z > x) of the standard normal.

    Evaluated through the complementary error function, exact to double
    precision over |x| <= 30 and far beyond (underflow starts near x ~ 38).
    """
    x = _require_finite("x", x)
    return 0.5 * math.erfc(x / _SQRT2)


def _phi(x: float) -> float:
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


def q_ratio(t: float) -> float:
    """Logarithmic derivative Q'(t)/Q(t) = -phi(t)/Q(t) of the Gaussian tail.

    Negative for every finite t. For t >= 8 the quotient is computed as
    -sqrt(2/pi)/erfcx(t/sqrt 2), an identity that avoids the 0/0 of the
    direct form when Q(t) underflows.
    """
    t = _require_finite("t", t)
    if t < _TAIL_SWITCH:
        return -_phi(t) / gaussian_tail(t)
    return -_SQRT_2_OVER_PI / float(erfcx(t / _SQRT2))


def _log_2q(t: float) -> float:
    """log(2 Q(t)), kept finite even where Q(t) underflows."""
    if t < _TAIL_SWITCH:
        return math.log(2.0 * gaussian_tail(t))
    return math.log(float(erfcx(t / _SQRT2))) - 0.5 * t * t


def _check_ab_domain(a: float, beta: float) -> tuple[float, float]:
    a = _require_finite("a", a)
    beta = _require_finite("beta", beta)
    if a <= 0.0:
        raise DomainError(f"a must be positive, got {a!r}")
    if beta <= 0.0:
        raise DomainError(f"beta must be positive, got {beta!r}")
    return a, beta


def g_value(a: float, b: float, beta: float) -> float:
    """Rate function g(a, b, beta), in nats.

    g = (b - 1/2 + (1-b)^2/(2a) + (log a)/2) / beta + log(2 Q(t)),
    with t = (b - 1) / sqrt(a * beta). Its value at the saddle point is the
    asymptotic capacity in nat/symbol/user.
    """
    a, beta = _check_ab_domain(a, beta)
    b = _require_finite("b", b)
    t = (b - 1.0) / math.sqrt(a * beta)
    poly = (b - 0.5 + (1.0 - b) ** 2 / (2.0 * a) + 0.5 * math.log(a)) / beta
    return poly + _log_2q(t)


def g_gradient(a: float, b: float, beta: float) -> tuple[float, float]:
    """Exact partial derivatives (dg/da, dg/db) of :func:`g_value`.

    dg/db = (1 - (1-b)/a) / beta + q_ratio(t) / sqrt(a beta)
    dg/da = [ (1 - (1-b)^2/a) / beta - t * q_ratio(t) ] / (2a)

    Both vanish at the saddle point (a*, 0).
    """
    a, beta = _check_ab_domain(a, beta)
    b = _require_finite("b", b)
    sab = math.sqrt(a * beta)
    t = (b - 1.0) / sab
    qr = q_ratio(t)
    grad_b = (1.0 - (1.0 - b) / a) / beta + qr / sab
    grad_a = ((1.0 - (1.0 - b) ** 2 / a) / beta - t * qr) / (2.0 * a)
    return grad_a, grad_b


@dataclass(frozen=True)
class SolverConfig:
    """Controls for the scalar saddle solver.

    tolerance is relative-absolute on the fixed-point residual:
    convergence is declared when |f(a) - a| < tolerance * max(1, a).
    damping is the initial relaxation factor; it is halved automatically
    whenever the iteration starts to oscillate.
    """

    tolerance: float = 1e-12
    max_iterations: int = 500
    initial_a: float = 1.0
    damping: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.tolerance) and self.tolerance > 0.0):
            raise DomainError(f"tolerance must be positive, got {self.tolerance!r}")
        if self.max_iterations < 1:
            raise DomainError(
                f"max_iterations must be >= 1, got {self.max_iterations!r}"
            )
        if not (math.isfinite(self.initial_a) and self.initial_a > 0.0):
            raise DomainError(f"initial_a must be positive, got {self.initial_a!r}")
        if not (0.0 < self.damping <= 1.0):
            raise DomainError(f"damping must lie in (0, 1], got {self.damping!r}")


@dataclass(frozen=True)
class SaddleSolution:
    """Solved saddle point and capacity at one load value.

    grad_a and grad_b are the gradient components at (a_star, 0); with the
    default solver settings both are below GRADIENT_RESIDUAL_BOUND.
    """

    beta: float
    a_star: float
    b_star: float
    t_star: float
    capacity_nats: float
    capacity_bits: float
    iterations: int
    residual: float
    grad_a: float
    grad_b: float


@dataclass(frozen=True)
class GridSpec:
    """Logarithmic or linear load grid, endpoints included."""

    beta_min: float
    beta_max: float
    points: int
    log: bool = True

    def __post_init__(self) -> None:
        if not (0.0 < self.beta_min <= self.beta_max):
            raise DomainError(
                f"need 0 < beta_min <= beta_max, got {self.beta_min!r}, {self.beta_max!r}"
            )
        if self.points < 1:
            raise DomainError(f"points must be >= 1, got {self.points!r}")

    def values(self) -> np.ndarray:
        if self.log:
            return np.geomspace(self.beta_min, self.beta_max, self.points)
        return np.linspace(self.beta_min, self.beta_max, self.points)


#: Grid used for the capacity-curve figure.
DEFAULT_GRID = GridSpec(beta_min=0.05, beta_max=10.0, points=60, log=True)


@dataclass(frozen=True)
class SweepFailure:
    """A grid point whose solve did not converge."""

    index: int
    beta: float
    message: str


@dataclass(frozen=True)
class CapacityCurve:
    """Per-point saddle solutions over a load grid, in grid order."""

    solutions: tuple[SaddleSolution, ...]
    grid: GridSpec | None = None
    failures: tuple[SweepFailure, ...] = ()

    @property
    def betas(self) -> np.ndarray:
        return np.array([s.beta for s in self.solutions])

    @property
    def capacity_bits(self) -> np.ndarray:
        return np.array([s.capacity_bits for s in self.solutions])


def _fixed_point_map(a: float, beta: float) -> float:
    """One application of the a-update. NaN signals the map left its domain."""
    sab = math.sqrt(a * beta)
    denom = 1.0 / beta + q_ratio(-1.0 / sab) / sab
    if not (denom > 0.0 and math.isfinite(denom)):
        return math.nan
    return (1.0 / beta) / denom


def _stationarity(u: float, beta: float) -> float:
    """Saddle condition in u = 1/sqrt(a beta): u^2 + u phi(u)/PHI(u) - 1/beta.

    Strictly increasing in u > 0, negative at 0+, positive at u = 1/sqrt(beta),
    so it brackets the unique root for every load.
    """
    return u * u - u * q_ratio(-u) - 1.0 / beta


def _bisect_saddle(
    beta: float, cfg: SolverConfig, evals: int, last_a: float
) -> tuple[float, float, int]:
    """Bracketing solve in u-space. Returns (a_star, residual, evals)."""
    budget = cfg.max_iterations
    hi = 1.0 / math.sqrt(beta)
    lo = hi
    while evals < budget:
        lo *= 0.5
        evals += 1
        if _stationarity(lo, beta) < 0.0:
            break
    else:
        raise ConvergenceError(beta, last_a, math.inf, evals)

    a = 1.0 / (beta * (0.5 * (lo + hi)) ** 2)
    while evals < budget:
        width_a = 1.0 / (beta * lo * lo) - 1.0 / (beta * hi * hi)
        if width_a < cfg.tolerance * max(1.0, a):
            return a, width_a, evals
        mid = 0.5 * (lo + hi)
        if not (lo < mid < hi):  # interval collapsed to machine precision
            return a, width_a, evals
        evals += 1
        if _stationarity(mid, beta) < 0.0:
            lo = mid
        else:
            hi = mid
        a = 1.0 / (beta * (0.5 * (lo + hi)) ** 2)
    raise ConvergenceError(
        beta, a, 1.0 / (beta * lo * lo) - 1.0 / (beta * hi * hi), evals
    )


def _finish(beta: float, a: float, evals: int, residual: float) -> SaddleSolution:
    t = -1.0 / math.sqrt(a * beta)
    nats = g_value(a, 0.0, beta)
    grad_a, grad_b = g_gradient(a, 0.0, beta)
    return SaddleSolution(
        beta=beta,
        a_star=a,
        b_star=0.0,
        t_star=t,
        capacity_nats=nats,
        capacity_bits=nats / _LN2,
        iterations=evals,
        residual=residual,
        grad_a=grad_a,
        grad_b=grad_b,
    )


def solve_saddle(beta: float, cfg: SolverConfig | None = None) -> SaddleSolution:
    """Solve the saddle point for one load value.

    Damped fixed-point iteration a <- (1-d) a + d f(a) from cfg.initial_a,
    halving d whenever the residual changes sign. For loads beyond roughly
    4 the raw map is not a contraction from a cold start (its denominator
    changes sign between the start and the root); the solver then falls
    back to sign-change bisection on the equivalent monotone scalar
    condition, which converges for every positive load. Both phases share
    the cfg.max_iterations evaluation budget; exhausting it raises
    ConvergenceError. Identical inputs produce bit-identical output.
    """
    beta = _require_finite("beta", beta)
    if beta <= 0.0:
        raise DomainError(f"beta must be positive, got {beta!r}")
    if cfg is None:
        cfg = SolverConfig()

    a = cfg.initial_a
    d = cfg.damping
    prev_resid = 0.0
    evals = 0
    while evals < cfg.max_iterations:
        fa = _fixed_point_map(a, beta)
        evals += 1
        if math.isnan(fa):
            break  # outside the map's basin: go bracket instead
        resid = fa - a
        if abs(resid) < cfg.tolerance * max(1.0, a):
            return _finish(beta, a, evals, abs(resid))
        if resid * prev_resid < 0.0:
            d *= 0.5
        prev_resid = resid
        a = a + d * resid

    a_star, residual, evals = _bisect_saddle(beta, cfg, evals, a)
    return _finish(beta, a_star, evals, residual)


def capacity(beta: float, cfg: SolverConfig | None = None) -> SaddleSolution:
    """Asymptotic capacity at one load; alias for :func:`solve_saddle`.

    The returned solution satisfies
    capacity_nats == g_value(a_star, b_star, beta) exactly and
    capacity_bits == capacity_nats / ln 2.
    """
    return solve_saddle(beta, cfg)


def sweep(
    grid: GridSpec | "np.ndarray | list[float] | tuple[float, ...]",
    cfg: SolverConfig | None = None,
    warm_start: bool = True,
) -> CapacityCurve:
    """Capacity at every grid point, in grid order.

    Each solve is warm-started from the previous point's a_star (the root
    is unique, so results agree with cold starts to within the solver
    tolerance). Non-converged points are collected into .failures rather
    than aborting the sweep.
    """
    if cfg is None:
        cfg = SolverConfig()
    if isinstance(grid, GridSpec):
        grid_desc: GridSpec | None = grid
        betas = [float(b) for b in grid.values()]
    else:
        grid_desc = None
        betas = [float(b) for b in grid]
    if not betas:
        raise DomainError("sweep requires a non-empty grid")

    solutions: list[SaddleSolution] = []
    failures: list[SweepFailure] = []
    a_prev: float | None = None
    for i, b in enumerate(betas):
        point_cfg = cfg if (a_prev is None or not warm_start) else replace(
            cfg, initial_a=a_prev
        )
        try:
            sol = solve_saddle(b, point_cfg)
        except (ConvergenceError, DomainError) as exc:
            failures.append(SweepFailure(index=i, beta=b, message=str(exc)))
            a_prev = None
            continue
        solutions.append(sol)
        a_prev = sol.a_star
    return CapacityCurve(
        solutions=tuple(solutions), grid=grid_desc, failures=tuple(failures)
    )
