"""Domain types and the pointwise Griffith kernel.

The kernel relates the trace slope f' at the backward characteristic foot,
the local toughness at the front, and the front speed:

    speed = max[(2 f'^2 - kappa) / (2 f'^2 + kappa), 0]        in [0, 1)

together with its inversion (used when a front is prescribed and the trace
must be manufactured) and the dynamic energy release rate
G = (1 - speed^2) * slope^2 / 2 evaluated at the front.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AmbiguityNote,
    IncompatibleTarget,
    InvalidToughness,
    SpeedOutOfRange,
)
from .func1d import MonotoneMap, SampledFunction, derivative

VALID_REGULARITY = ("C01", "C1")


# ---------------------------------------------------------------------------
# Pointwise kernel
# ---------------------------------------------------------------------------

def griffith_speed(fprime_at_trace: float, kappa_at_front: float) -> float:
    """Front speed selected by the energy criterion; always in [0, 1)."""
    if kappa_at_front <= 0.0:
        raise InvalidToughness(f"toughness must be positive, got {kappa_at_front}")
    twice_sq = 2.0 * fprime_at_trace * fprime_at_trace
    return max((twice_sq - kappa_at_front) / (twice_sq + kappa_at_front), 0.0)


def speed_to_fprime_magnitude(v: float, kappa_at_front: float) -> float:
    """Trace-slope magnitude that produces front speed ``v`` (0 < v < 1).

    Right inverse of :func:`griffith_speed`; as v -> 0+ the magnitude tends
    to the threshold sqrt(kappa / 2).
    """
    if not 0.0 < v < 1.0:
        raise SpeedOutOfRange(f"speed must lie in (0, 1), got {v}")
    if kappa_at_front <= 0.0:
        raise InvalidToughness(f"toughness must be positive, got {kappa_at_front}")
    return math.sqrt(kappa_at_front * (1.0 + v) / (2.0 * (1.0 - v)))


def energy_release_rate(speed: float, slope_at_front: float) -> float:
    """Dynamic energy release rate at the given front speed."""
    if not 0.0 <= speed < 1.0:
        raise SpeedOutOfRange(f"speed must lie in [0, 1), got {speed}")
    return 0.5 * (1.0 - speed * speed) * slope_at_front * slope_at_front


# ---------------------------------------------------------------------------
# Toughness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Toughness:
    """Local toughness of the glue, constant or sampled on [0, x_max].

    ``c1`` / ``c2`` are user-supplied bounds (equal for constants); they are
    not estimated from the samples beyond a consistency check.
    """

    kappa: object  # float or SampledFunction
    c1: float = None
    c2: float = None

    def __post_init__(self):
        if isinstance(self.kappa, (int, float)):
            value = float(self.kappa)
            if value <= 0.0:
                raise InvalidToughness(f"toughness must be positive, got {value}")
            object.__setattr__(self, "kappa", value)
            object.__setattr__(self, "c1", value if self.c1 is None else float(self.c1))
            object.__setattr__(self, "c2", value if self.c2 is None else float(self.c2))
        elif isinstance(self.kappa, SampledFunction):
            vmin = float(np.min(self.kappa.vs))
            vmax = float(np.max(self.kappa.vs))
            if vmin <= 0.0:
                raise InvalidToughness("sampled toughness must be positive everywhere")
            object.__setattr__(self, "c1", vmin if self.c1 is None else float(self.c1))
            object.__setattr__(self, "c2", vmax if self.c2 is None else float(self.c2))
        else:
            raise TypeError("kappa must be a number or a SampledFunction")
        if not 0.0 < self.c1 <= self.c2:
            raise InvalidToughness("bounds must satisfy 0 < c1 <= c2")

    @property
    def is_constant(self) -> bool:
        return isinstance(self.kappa, float)

    def __call__(self, x):
        if self.is_constant:
            if np.ndim(x) == 0:
                return self.kappa
            return np.full(np.shape(x), self.kappa)
        return self.kappa(x)


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------

def _require_domain(fn: SampledFunction, hi: float, name: str):
    tol = 1e-9 * max(hi, 1.0)
    if abs(fn.lo) > tol or abs(fn.hi - hi) > tol:
        raise ValueError(f"{name} must be sampled on [0, {hi:g}], got [{fn.lo:g}, {fn.hi:g}]")


@dataclass(frozen=True)
class InitialState:
    """Initial front position and displacement/velocity profiles on [0, ell0]."""

    ell0: float
    y0: SampledFunction
    y1: SampledFunction
    regularity: str = "C01"
    tol: float = 1e-8
    y0_prime: SampledFunction = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.ell0 <= 0.0:
            raise ValueError("ell0 must be positive")
        if self.regularity not in VALID_REGULARITY:
            raise ValueError(f"regularity must be one of {VALID_REGULARITY}")
        _require_domain(self.y0, self.ell0, "y0")
        _require_domain(self.y1, self.ell0, "y1")
        if abs(self.y0(self.ell0)) > self.tol:
            raise ValueError(
                f"y0 must vanish at the front: y0({self.ell0:g}) = {self.y0(self.ell0):g}"
            )
        object.__setattr__(self, "y0_prime", derivative(self.y0))


@dataclass(frozen=True)
class TargetState:
    """Prescribed terminal front position and profiles on [0, ellbar0]."""

    ellbar0: float
    ybar0: SampledFunction
    ybar1: SampledFunction
    regularity: str = "C01"
    tol: float = 1e-8
    ybar0_prime: SampledFunction = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.ellbar0 <= 0.0:
            raise ValueError("ellbar0 must be positive")
        if self.regularity not in VALID_REGULARITY:
            raise ValueError(f"regularity must be one of {VALID_REGULARITY}")
        _require_domain(self.ybar0, self.ellbar0, "ybar0")
        _require_domain(self.ybar1, self.ellbar0, "ybar1")
        if abs(self.ybar0(self.ellbar0)) > self.tol:
            raise ValueError(
                f"ybar0 must vanish at the front: ybar0({self.ellbar0:g}) = "
                f"{self.ybar0(self.ellbar0):g}"
            )
        object.__setattr__(self, "ybar0_prime", derivative(self.ybar0))

    def w_plus(self) -> SampledFunction:
        """The outgoing terminal combination ybar1 + ybar0' on a merged grid."""
        grid = np.union1d(self.ybar1.xs, self.ybar0_prime.xs)
        return SampledFunction(grid, self.ybar1(grid) + self.ybar0_prime(grid))

    def w_minus(self) -> SampledFunction:
        """The incoming terminal combination ybar1 - ybar0' on a merged grid."""
        grid = np.union1d(self.ybar1.xs, self.ybar0_prime.xs)
        return SampledFunction(grid, self.ybar1(grid) - self.ybar0_prime(grid))


# ---------------------------------------------------------------------------
# Front curves and controls
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrontCurve:
    """Debonding front on a time grid, with the characteristic maps t -> t +- ell.

    Both maps are strictly increasing (speeds stay below 1), so their
    inverses locate where a characteristic hitting the front originated.
    """

    times: np.ndarray
    positions: np.ndarray
    speeds: np.ndarray
    tau_plus: MonotoneMap = field(init=False, repr=False, compare=False)
    tau_minus: MonotoneMap = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        t = np.ascontiguousarray(self.times, dtype=float)
        p = np.ascontiguousarray(self.positions, dtype=float)
        v = np.ascontiguousarray(self.speeds, dtype=float)
        if not (t.shape == p.shape == v.shape) or t.ndim != 1 or t.size < 2:
            raise ValueError("times, positions, speeds must be equal-length 1-D arrays")
        span = t[-1] - t[0]
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("times must be strictly increasing")
        if np.any(np.diff(p) < -1e-9 * max(np.max(p), 1.0)):
            raise ValueError("front positions must be nondecreasing")
        if np.any(v < 0.0) or np.any(v >= 1.0):
            raise ValueError("front speeds must lie in [0, 1)")
        if np.any(np.diff(t) - np.diff(p) <= 0.0):
            raise ValueError("front advanced a full time step; tau_minus not invertible")
        for name, arr in (("times", t), ("positions", p), ("speeds", v)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "tau_plus", MonotoneMap.from_samples(t, t + p))
        object.__setattr__(self, "tau_minus", MonotoneMap.from_samples(t, t - p))

    @property
    def t_start(self) -> float:
        return float(self.times[0])

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def ell(self, t):
        out = np.interp(t, self.times, self.positions)
        return float(out) if np.ndim(out) == 0 else out

    def ell_prime(self, t):
        out = np.interp(t, self.times, self.speeds)
        return float(out) if np.ndim(out) == 0 else out

    def echo(self, s):
        """The earlier trace coordinate (tau_minus o tau_plus^-1)(s)."""
        return s - 2.0 * self.ell(self.tau_plus.invert(s))

    def reflection_factor(self, s):
        """(1 - ell')/(1 + ell') evaluated at tau_plus^-1(s)."""
        v = self.ell_prime(self.tau_plus.invert(s))
        return (1.0 - v) / (1.0 + v)


@dataclass(frozen=True)
class ControlSignal:
    """Boundary control u on [0, T] together with its rate u'."""

    u: SampledFunction
    uprime: SampledFunction
    regularity: str = "C01"

    def __post_init__(self):
        if self.regularity not in VALID_REGULARITY:
            raise ValueError(f"regularity must be one of {VALID_REGULARITY}")

    @classmethod
    def zero(cls, T: float, regularity: str = "C1") -> "ControlSignal":
        from .func1d import constant

        return cls(constant(0.0, 0.0, T), constant(0.0, 0.0, T), regularity)

    @property
    def t_end(self) -> float:
        return self.u.hi

    def consistency_residual(self) -> float:
        """Max gap between u(t) - u(0) and the integral of u' over the u grid."""
        t = self.u.xs
        gap = (self.u.vs - self.u.vs[0]) - (
            self.uprime.antiderivative_at(t) - self.uprime.antiderivative_at(t[0])
        )
        return float(np.max(np.abs(gap)))

    def max_uprime_jump(self) -> float:
        """Largest difference of u' between consecutive sample nodes."""
        return float(np.max(np.abs(np.diff(self.uprime.vs))))


# ---------------------------------------------------------------------------
# Branch summaries
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InitialBranchResult:
    """End of the front portion determined solely by the initial data.

    ``ell_star_prime`` is authoritative only for C1 data; for Lipschitz data
    it holds the left-limit slope and is flagged accordingly.
    """

    t_star: float
    ell_star: float
    ell_star_prime: float
    front: FrontCurve
    slope_authoritative: bool = True


@dataclass(frozen=True)
class BranchResult:
    """An admissible final branch on [t_bar_star, T] plus its summary data.

    ``alpha`` is the terminal front speed (the classification value for C1
    branches, the chosen terminal speed otherwise).  ``alternative_admissible``
    records, per node, whether the speed option that was not chosen would also
    have been admissible; non-uniqueness is surfaced, not resolved.
    """

    front_segment: FrontCurve
    t_bar_star: float
    ell_bar_star: float
    ell_bar_star_prime: float
    alpha: float
    alternative_admissible: np.ndarray = None


# ---------------------------------------------------------------------------
# Compatibility and admissibility checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckItem:
    name: str
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tol


@dataclass(frozen=True)
class CheckReport:
    items: tuple

    @property
    def passed(self) -> bool:
        return all(item.passed for item in self.items)

    @property
    def worst(self) -> CheckItem:
        return max(self.items, key=lambda item: item.residual - item.tol)

    def __iter__(self):
        return iter(self.items)


def check_initial_compatibility(
    state: InitialState,
    u0: float,
    uprime0: float,
    kappa: Toughness,
    tol: float = 1e-8,
) -> CheckReport:
    """Well-posedness compatibility of initial data against the control endpoint.

    Lipschitz data needs the displacement matches y0(0) = u(0) and
    y0(ell0) = 0.  C1 data additionally needs y1(0) = u'(0) and the front
    slope condition tying y1(ell0) to the Griffith speed of the seed trace.
    """
    items = [
        CheckItem("y0_matches_control_at_0", abs(state.y0(0.0) - u0), tol),
        CheckItem("y0_vanishes_at_front", abs(state.y0(state.ell0)), tol),
    ]
    if state.regularity == "C1":
        items.append(CheckItem("y1_matches_control_rate_at_0", abs(state.y1(0.0) - uprime0), tol))
        d = state.y1(state.ell0) - state.y0_prime(state.ell0)
        speed0 = griffith_speed(0.5 * d, kappa(state.ell0))
        required = -speed0 * state.y0_prime(state.ell0)
        items.append(
            CheckItem("front_slope_compatibility", abs(state.y1(state.ell0) - required), tol)
        )
    return CheckReport(tuple(items))


def classify_final_state(target: TargetState, kappa: Toughness, tol: float = 1e-8) -> float:
    """Terminal front speed alpha implied by the target data.

    Returns 0 for a passive final state (ybar1 vanishes at the front) or the
    unique positive root for an active one.  The boundary case where both
    classifications coincide resolves to passive, with a warning.
    """
    y1_end = target.ybar1(target.ellbar0)
    slope_end = target.ybar0_prime(target.ellbar0)
    kap_end = kappa(target.ellbar0)
    scale = max(1.0, abs(slope_end))

    passive_ok = abs(y1_end) <= tol
    active_alpha = None
    s2 = slope_end * slope_end
    if s2 > 2.0 * kap_end:
        candidate = math.sqrt(1.0 - 2.0 * kap_end / s2)
        if abs(y1_end + candidate * slope_end) <= tol * scale:
            active_alpha = candidate

    if passive_ok:
        if active_alpha is not None and active_alpha > tol:
            warnings.warn(
                "both passive and active classifications match; resolving as passive",
                AmbiguityNote,
            )
        return 0.0
    if active_alpha is not None:
        return active_alpha
    raise IncompatibleTarget(
        f"target matches neither passive (|ybar1({target.ellbar0:g})| = {abs(y1_end):g}) "
        f"nor active terminal compatibility"
    )


def check_damping_bound(
    target: TargetState,
    kappa_at_front_along_tau,
    tol: float = 1e-9,
) -> CheckReport:
    """Expansion-damping bound |ybar1 + ybar0'|^2 <= 2 kappa(.) on the grid.

    The second argument supplies the toughness seen along the outgoing
    characteristics (for static branches, the constant value at the target
    front); it may be a SampledFunction, a Toughness, or a number.
    """
    w = target.w_plus()
    grid = w.xs
    if isinstance(kappa_at_front_along_tau, (int, float)):
        kap = np.full(grid.shape, float(kappa_at_front_along_tau))
    else:
        kap = np.asarray(kappa_at_front_along_tau(grid), dtype=float)
    excess = w.vs * w.vs - 2.0 * kap
    worst = int(np.argmax(excess))
    item = CheckItem(
        f"damping_bound_worst_at_x={grid[worst]:.6g}",
        float(excess[worst]),
        tol * max(1.0, float(np.max(2.0 * kap))),
    )
    return CheckReport((item,))
