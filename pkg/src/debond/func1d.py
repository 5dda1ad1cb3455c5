"""Piecewise-linear sampled functions on an interval, and monotone map inversion.

All higher modules represent initial data, controls, traces and front curves
with these two types.  Interpolation is piecewise-linear everywhere because the
lowest regularity class handled by the solver (Lipschitz) is represented
exactly by polylines; derivatives are piecewise-constant midpoint slopes,
consistent with functions whose derivative exists only almost everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, RangeError

# Relative slack for domain checks: queries within this fraction of the span
# outside the domain are clamped to the endpoint (float noise from composed
# coordinate maps), anything farther out is a hard error.
_DOMAIN_SLACK = 1e-9

# Minimum node spacing relative to the domain span.
_MIN_SPACING = 1e-12

# Inversion tolerance relative to the range span (far below scheme error).
INVERT_RTOL = 1e-10


@dataclass(frozen=True)
class SampledFunction:
    """A real function of one variable given by samples, interpolated linearly.

    ``xs`` must be strictly increasing with at least two nodes; ``vs`` has the
    same length.  Instances are immutable and safe to share across threads.
    """

    xs: np.ndarray
    vs: np.ndarray
    _cum: np.ndarray = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        xs = np.ascontiguousarray(self.xs, dtype=float)
        vs = np.ascontiguousarray(self.vs, dtype=float)
        if xs.ndim != 1 or xs.shape != vs.shape:
            raise ValueError("abscissae and values must be 1-D arrays of equal length")
        if xs.size < 2:
            raise ValueError("need at least two samples")
        span = xs[-1] - xs[0]
        dx = np.diff(xs)
        if span <= 0.0 or np.any(dx < _MIN_SPACING * span):
            raise ValueError("abscissae must increase with spacing >= 1e-12 * span")
        # Exact trapezoid antiderivative at the nodes, anchored at xs[0].
        cum = np.concatenate(([0.0], np.cumsum(0.5 * (vs[1:] + vs[:-1]) * dx)))
        for name, arr in (("xs", xs), ("vs", vs), ("_cum", cum)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def lo(self) -> float:
        return float(self.xs[0])

    @property
    def hi(self) -> float:
        return float(self.xs[-1])

    @property
    def span(self) -> float:
        return float(self.xs[-1] - self.xs[0])

    def _clip(self, x):
        slack = _DOMAIN_SLACK * max(self.span, 1.0)
        x = np.asarray(x, dtype=float)
        if np.any(x < self.xs[0] - slack) or np.any(x > self.xs[-1] + slack):
            bad = x[(x < self.xs[0] - slack) | (x > self.xs[-1] + slack)]
            raise DomainError(
                f"evaluation at {np.atleast_1d(bad)[0]:.17g} outside "
                f"domain [{self.lo:.17g}, {self.hi:.17g}]"
            )
        return np.clip(x, self.xs[0], self.xs[-1])

    def __call__(self, x):
        x = self._clip(x)
        out = np.interp(x, self.xs, self.vs)
        return float(out) if out.ndim == 0 else out

    def antiderivative_at(self, x):
        """Exact integral of the interpolant from ``lo`` to ``x``."""
        x = self._clip(x)
        scalar = np.ndim(x) == 0
        x = np.atleast_1d(x)
        idx = np.clip(np.searchsorted(self.xs, x, side="right") - 1, 0, self.xs.size - 2)
        x0 = self.xs[idx]
        v0 = self.vs[idx]
        slope = (self.vs[idx + 1] - v0) / (self.xs[idx + 1] - x0)
        d = x - x0
        out = self._cum[idx] + v0 * d + 0.5 * slope * d * d
        return float(out[0]) if scalar else out

    def shifted(self, dx: float) -> "SampledFunction":
        return SampledFunction(self.xs + dx, self.vs)

    def scaled(self, c: float) -> "SampledFunction":
        return SampledFunction(self.xs, c * self.vs)


def evaluate(fn: SampledFunction, x: float) -> float:
    """Linear interpolation of ``fn`` at ``x``; exact at sample points."""
    return fn(x)


def definite_integral(fn: SampledFunction, a: float, b: float) -> float:
    """Exact trapezoid integral of the interpolant; antisymmetric in (a, b)."""
    return fn.antiderivative_at(b) - fn.antiderivative_at(a)


def derivative(fn: SampledFunction) -> SampledFunction:
    """Piecewise-constant segment slopes placed at segment midpoints.

    Endpoint slopes are extended to the domain ends, so the result lives on
    the same interval as ``fn``.  For a C1 input sampled at spacing h the
    pointwise error is O(h).
    """
    xs, vs = fn.xs, fn.vs
    slopes = np.diff(vs) / np.diff(xs)
    if xs.size == 2:
        return SampledFunction(xs, np.array([slopes[0], slopes[0]]))
    mids = 0.5 * (xs[:-1] + xs[1:])
    dx = np.concatenate(([xs[0]], mids, [xs[-1]]))
    dv = np.concatenate(([slopes[0]], slopes, [slopes[-1]]))
    return SampledFunction(dx, dv)


def from_callable(f, lo: float, hi: float, n: int) -> SampledFunction:
    """Sample a callable on ``n`` uniform intervals of [lo, hi]."""
    xs = np.linspace(lo, hi, n + 1)
    return SampledFunction(xs, np.array([float(f(x)) for x in xs]))


def constant(value: float, lo: float, hi: float) -> SampledFunction:
    return SampledFunction(np.array([lo, hi]), np.array([value, value]))


@dataclass(frozen=True)
class MonotoneMap:
    """A strictly increasing sampled function with exact segment-wise inversion.

    Forward evaluation is plain interpolation; ``invert`` bisects to the
    bracketing segment (binary search on the value array) and solves the
    linear segment exactly, so the forward/inverse round trip is the identity
    up to 1e-10 times the range span.
    """

    fn: SampledFunction

    def __post_init__(self):
        if np.any(np.diff(self.fn.vs) <= 0.0):
            raise ValueError("values must be strictly increasing")

    @classmethod
    def from_samples(cls, xs, vs) -> "MonotoneMap":
        return cls(SampledFunction(xs, vs))

    def __call__(self, t):
        return self.fn(t)

    @property
    def range_lo(self) -> float:
        return float(self.fn.vs[0])

    @property
    def range_hi(self) -> float:
        return float(self.fn.vs[-1])

    def invert(self, s):
        vs, xs = self.fn.vs, self.fn.xs
        slack = _DOMAIN_SLACK * max(vs[-1] - vs[0], 1.0)
        s = np.asarray(s, dtype=float)
        if np.any(s < vs[0] - slack) or np.any(s > vs[-1] + slack):
            raise RangeError(
                f"inversion target outside range [{vs[0]:.17g}, {vs[-1]:.17g}]"
            )
        s = np.clip(s, vs[0], vs[-1])
        out = np.interp(s, vs, xs)
        return float(out) if out.ndim == 0 else out


def invert(mono: MonotoneMap, s: float) -> float:
    """Value t with ``mono(t) = s`` up to 1e-10 times the range span."""
    return mono.invert(s)
