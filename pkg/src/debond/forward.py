"""Forward-in-time solver for the coupled front/trace system.

Given initial data, a toughness profile and a boundary control, the solver
marches the front ODE

    ell'(t) = max[(2 f'(t - ell)^2 - kappa(ell)) / (2 f'(t - ell)^2 + kappa(ell)), 0]

where the trace slope f' is determined causally: seeded by the initial data
on [-ell0, ell0] and extended past ell0 through the reflection relation

    f'(s) = u'(s) + f'(echo(s)) * (1 - ell'(t+)) / (1 + ell'(t+)),
    t+ = tau_plus^-1(s),   echo(s) = s - 2 ell(t+).

The echo point always lags the march by at least 2*ell0, so every value is
available when needed.  f' samples are stored at the non-uniform abscissae
s = tau_minus(t_n) produced by the march (that is exactly where the
reflection relation queries them), with linear interpolation between.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, HorizonExceeded, IncompatibleData, StepTooLarge
from .func1d import SampledFunction, definite_integral
from .model import (
    ControlSignal,
    FrontCurve,
    InitialBranchResult,
    InitialState,
    Toughness,
    griffith_speed,
)

_SCHEMES = ("euler", "heun")


@dataclass(frozen=True)
class SolverConfig:
    """Time step, horizon and scheme for the forward march."""

    h: float
    T: float
    scheme: str = "heun"
    speed_clamp_eps: float = 1e-9

    def __post_init__(self):
        if self.h <= 0.0:
            raise ValueError("time step must be positive")
        if self.T <= 0.0:
            raise ValueError("horizon must be positive")
        if self.scheme not in _SCHEMES:
            raise ValueError(f"scheme must be one of {_SCHEMES}")
        if not 0.0 < self.speed_clamp_eps < 1e-3:
            raise ValueError("speed clamp must lie in (0, 1e-3)")


def _interp(xs, vs, q):
    """Scalar linear interpolation on sorted xs, clamped at the ends."""
    i = np.searchsorted(xs, q)
    if i <= 0:
        return float(vs[0])
    if i >= xs.shape[0]:
        return float(vs[-1])
    x0 = xs[i - 1]
    w = (q - x0) / (xs[i] - x0)
    return float(vs[i - 1] * (1.0 - w) + vs[i] * w)


def _merged_eval(fn_a: SampledFunction, fn_b: SampledFunction, combine):
    """Sample ``combine(a, b)`` on the union grid of two functions."""
    grid = np.union1d(fn_a.xs, fn_b.xs)
    return grid, combine(fn_a(grid), fn_b(grid))


class _SeedData:
    """Raw piecewise-linear arrays for the data-determined part of the trace."""

    def __init__(self, initial: InitialState):
        self.ell0 = initial.ell0
        y0p, y1 = initial.y0_prime, initial.y1
        # f'(s) = (y1 - y0')(-s)/2 on [-ell0, 0], stored directly in s.
        grid, diff = _merged_eval(y1, y0p, lambda a, b: 0.5 * (a - b))
        self.minus_xs = np.ascontiguousarray(-grid[::-1])
        self.minus_vs = np.ascontiguousarray(diff[::-1])
        # Outgoing data combination (y0' + y1)/2 on [0, ell0], queried by line 2.
        self.plus_xs, self.plus_vs = _merged_eval(y0p, y1, lambda a, b: 0.5 * (a + b))


class _March:
    """Shared marching core for the forward solve and the initial branch."""

    def __init__(self, initial, kappa, cfg, uprime_xs, uprime_vs):
        if cfg.h > initial.ell0 / 10.0 + 1e-15:
            raise ValueError("time step must not exceed ell0 / 10")
        self.initial = initial
        self.kappa = kappa
        self.cfg = cfg
        self.seed = _SeedData(initial)
        self.up_xs = uprime_xs
        self.up_vs = uprime_vs
        n_steps = max(int(round(cfg.T / cfg.h)), 1)
        self.t = np.linspace(0.0, cfg.T, n_steps + 1)
        self.ell = np.empty(n_steps + 1)
        self.ellp = np.empty(n_steps + 1)
        self.sm = np.empty(n_steps + 1)  # tau_minus(t_n)
        self.sp = np.empty(n_steps + 1)  # tau_plus(t_n)
        self.fp = np.empty(n_steps + 1)  # f'(sm[n])
        self.n = 0
        self._kconst = kappa.kappa if kappa.is_constant else None
        self._commit(0, initial.ell0)

    def _kappa_at(self, x):
        if self._kconst is not None:
            return self._kconst
        return self.kappa(x)

    def _uprime(self, s):
        return _interp(self.up_xs, self.up_vs, s)

    def _clamp(self, v):
        hi = 1.0 - self.cfg.speed_clamp_eps
        return 0.0 if v < 0.0 else (hi if v > hi else v)

    def fprime(self, q, n=None):
        """Trace slope at coordinate q, using nodes 0..n-1 for reflections."""
        if q <= 0.0:
            return _interp(self.seed.minus_xs, self.seed.minus_vs, q)
        if q <= self.seed.ell0:
            return self._uprime(q) - _interp(self.seed.plus_xs, self.seed.plus_vs, q)
        n = self.n + 1 if n is None else n
        sp = self.sp[:n]
        ell_at = _interp(sp, self.ell[:n], q)
        v_at = _interp(sp, self.ellp[:n], q)
        echo = q - 2.0 * ell_at
        if echo < -self.seed.ell0:
            echo = -self.seed.ell0
        if echo <= self.seed.ell0:
            fp_echo = self.fprime(echo, n)
        else:
            fp_echo = _interp(self.sm[:n], self.fp[:n], echo)
        return self._uprime(q) + fp_echo * (1.0 - v_at) / (1.0 + v_at)

    def _commit(self, n, ell_n):
        self.ell[n] = ell_n
        self.sm[n] = self.t[n] - ell_n
        self.sp[n] = self.t[n] + ell_n
        if n > 0 and self.sm[n] <= self.sm[n - 1]:
            raise StepTooLarge(
                f"tau_minus lost monotonicity at t = {self.t[n]:.6g}; reduce the step"
            )
        self.fp[n] = self.fprime(self.sm[n], n)
        self.ellp[n] = self._clamp(griffith_speed(self.fp[n], self._kappa_at(ell_n)))
        self.n = n

    def step(self):
        n = self.n
        h = self.t[n + 1] - self.t[n]
        v0 = self.ellp[n]
        if self.cfg.scheme == "euler":
            self._commit(n + 1, self.ell[n] + h * v0)
            return
        ell_pred = self.ell[n] + h * v0
        fp_pred = self.fprime(self.t[n + 1] - ell_pred, n + 1)
        v1 = self._clamp(griffith_speed(fp_pred, self._kappa_at(ell_pred)))
        self._commit(n + 1, self.ell[n] + 0.5 * h * (v0 + v1))

    def run(self):
        for _ in range(self.t.shape[0] - 1):
            self.step()


class SolutionRecord:
    """A complete forward trajectory: front, trace, control and data.

    Displacement and its derivatives are reconstructed on demand from the
    stored front and trace; instances are immutable after construction and
    safe for concurrent reads.
    """

    def __init__(self, march: _March, control: ControlSignal):
        self.initial = march.initial
        self.toughness = march.kappa
        self.control = control
        self.config = march.cfg
        self.front = FrontCurve(march.t, march.ell, march.ellp)
        self._march = march
        self._seed_minus_cache = None
        # Extend the slope store over (tau_minus(T), T]: reconstruction at
        # time T queries f'(T - x) all the way up to s = T.
        T = march.cfg.T
        tail_lo = march.sm[march.n]
        if tail_lo < T:
            count = max(int(np.ceil((T - tail_lo) / march.cfg.h)), 1)
            tail = np.linspace(tail_lo, T, count + 1)[1:]
            tail_fp = np.array([march.fprime(s) for s in tail])
            self._store_s = np.concatenate([march.sm[: march.n + 1], tail])
            self._store_fp = np.concatenate([march.fp[: march.n + 1], tail_fp])
        else:
            self._store_s = march.sm[: march.n + 1].copy()
            self._store_fp = march.fp[: march.n + 1].copy()

    # -- trace queries ------------------------------------------------------

    def trace_slope(self, s) -> float:
        """f'(s): exact data formulas below ell0, stored march samples above."""
        s = float(s)
        ell0 = self.initial.ell0
        m = self._march
        if s <= ell0:
            return m.fprime(s)
        return _interp(self._store_s, self._store_fp, s)

    def trace_value(self, s) -> float:
        """f(s), anchored at f(0) = 0, via the iterative trace relation."""
        s = float(s)
        ell0 = self.initial.ell0
        if s <= 0.0:
            # f(s) = integral_0^{-s} (y0' - y1)/2 = -integral of the seed slope
            return -definite_integral(self._seed_minus_fn(), 0.0, -s)
        if s <= ell0:
            half = 0.5 * (
                definite_integral(self.initial.y0_prime, 0.0, s)
                + definite_integral(self.initial.y1, 0.0, s)
            )
            return self.control.u(s) - self.control.u(0.0) - half
        return self.control.u(s) + self.trace_value(self.front.echo(s))

    def _seed_minus_fn(self) -> SampledFunction:
        # (y1 - y0')/2 on [0, ell0]; f(s <= 0) = -integral_0^{-s} of this.
        if self._seed_minus_cache is None:
            grid, vals = _merged_eval(
                self.initial.y1, self.initial.y0_prime, lambda a, b: 0.5 * (a - b)
            )
            self._seed_minus_cache = SampledFunction(grid, vals)
        return self._seed_minus_cache

    def trace_function(self) -> SampledFunction:
        """The trace slope assembled into one sampled function on [-ell0, T]."""
        ell0 = self.initial.ell0
        T = self.config.T
        eps = max(2e-12 * (T + ell0), 1e-13)
        nodes = [self._march.seed.minus_xs, np.array([0.0 + eps])]
        inner = self._store_s[(self._store_s > eps) & (self._store_s <= ell0 - eps)]
        nodes += [inner, np.array([ell0, ell0 + eps])]
        nodes.append(self._store_s[self._store_s > ell0 + eps])
        s = np.concatenate(nodes)
        s = np.unique(s)
        s = s[np.concatenate(([True], np.diff(s) > eps / 2))]
        vals = np.array([self.trace_slope(q) for q in s])
        return SampledFunction(s, vals)

    # -- reconstruction -----------------------------------------------------

    def reconstruct(self, t: float, x_grid):
        """Displacement and its time/space derivatives at time t on a grid.

        Inside the data cone (t + x < ell0) the classical d'Alembert formula
        applies; outside it everything is expressed through the trace and the
        characteristic maps.  Every x must satisfy 0 <= x <= ell(t).
        """
        t = float(t)
        if not -1e-12 <= t <= self.config.T + 1e-12:
            raise DomainError(f"time {t:g} outside [0, {self.config.T:g}]")
        ell_t = self.front.ell(t)
        x_grid = np.atleast_1d(np.asarray(x_grid, dtype=float))
        if np.any(x_grid < -1e-12) or np.any(x_grid > ell_t * (1 + 1e-12) + 1e-12):
            raise DomainError(f"reconstruction point beyond the front ell({t:g}) = {ell_t:g}")
        ell0 = self.initial.ell0
        y = np.empty_like(x_grid)
        dty = np.empty_like(x_grid)
        dxy = np.empty_like(x_grid)
        for i, x in enumerate(x_grid):
            x = min(x, ell_t)
            fp_back = self.trace_slope(t - x)
            if t + x >= ell0 * (1.0 - 1e-14):
                s_out = t + x
                y[i] = self.trace_value(t - x) - self.trace_value(self.front.echo(s_out))
                a_out = -self.trace_slope(self.front.echo(s_out)) * self.front.reflection_factor(s_out)
            else:
                if t <= x:
                    y[i] = 0.5 * (
                        self.initial.y0(x + t)
                        + self.initial.y0(x - t)
                        + definite_integral(self.initial.y1, x - t, x + t)
                    )
                else:
                    y[i] = self.control.u(t - x) + 0.5 * (
                        definite_integral(self.initial.y0_prime, t - x, t + x)
                        + definite_integral(self.initial.y1, t - x, t + x)
                    )
                a_out = 0.5 * (self.initial.y0_prime(t + x) + self.initial.y1(t + x))
            dty[i] = fp_back + a_out
            dxy[i] = -fp_back + a_out
        return y, dty, dxy

    def griffith_residuals(self) -> np.ndarray:
        """Per-node gap between stored speeds and the Griffith value."""
        f = self.front
        res = np.empty(f.times.shape[0])
        for i, (tn, ln, vn) in enumerate(zip(f.times, f.positions, f.speeds)):
            res[i] = abs(vn - griffith_speed(self.trace_slope(tn - ln), self.toughness(ln)))
        return res


def _control_arrays(control: ControlSignal):
    return control.uprime.xs, control.uprime.vs


def seed_trace(initial: InitialState, control: ControlSignal):
    """Data-determined trace on [-ell0, ell0]: slope and integral (f(0) = 0).

    The slope keeps one-sided values at the kink s = 0 via a paired node.
    The control must be defined at least on [0, ell0].
    """
    if control.t_end < initial.ell0 * (1 - 1e-12):
        raise IncompatibleData("control must cover [0, ell0] to seed the trace")
    if abs(initial.y0(0.0) - control.u(0.0)) > 1e-6:
        raise IncompatibleData(
            f"control endpoint u(0) = {control.u(0.0):g} does not match y0(0) = "
            f"{initial.y0(0.0):g}"
        )
    seed = _SeedData(initial)
    up_xs, up_vs = _control_arrays(control)
    eps = max(2e-12 * 2 * initial.ell0, 1e-13)
    right = np.union1d(seed.plus_xs, up_xs[(up_xs > 0) & (up_xs <= initial.ell0)])
    right = right[right > eps]
    if right.size == 0 or right[-1] < initial.ell0 - eps:
        right = np.append(right, initial.ell0)
    s_nodes = np.concatenate([seed.minus_xs, [eps], right])
    vals = np.empty_like(s_nodes)
    k = seed.minus_xs.shape[0]
    vals[:k] = seed.minus_vs
    for j in range(k, s_nodes.shape[0]):
        q = s_nodes[j]
        vals[j] = _interp(up_xs, up_vs, q) - _interp(seed.plus_xs, seed.plus_vs, q)
    fprime = SampledFunction(s_nodes, vals)
    dx = np.diff(s_nodes)
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (vals[1:] + vals[:-1]) * dx)))
    cum -= cum[k - 1]  # anchor f(0) = 0 at the left node of the kink pair
    f = SampledFunction(s_nodes, cum)
    return fprime, f


def solve_front(
    initial: InitialState,
    control: ControlSignal,
    kappa: Toughness,
    cfg: SolverConfig,
) -> SolutionRecord:
    """March the coupled front/trace system from 0 to T under the control."""
    if control.t_end < cfg.T * (1 - 1e-12):
        raise DomainError(
            f"control defined up to {control.t_end:g} but horizon is {cfg.T:g}"
        )
    if abs(initial.y0(0.0) - control.u(0.0)) > 1e-6:
        raise IncompatibleData(
            f"control endpoint u(0) = {control.u(0.0):g} does not match y0(0) = "
            f"{initial.y0(0.0):g}"
        )
    up_xs, up_vs = _control_arrays(control)
    march = _March(initial, kappa, cfg, up_xs, up_vs)
    march.run()
    return SolutionRecord(march, control)


def solve_initial_branch(
    initial: InitialState,
    kappa: Toughness,
    cfg: SolverConfig,
) -> InitialBranchResult:
    """Front portion determined by the initial data alone (no control needed).

    Marches until the backward characteristic foot t - ell(t) first reaches 0
    and locates the crossing t_star (= ell_star) by linear interpolation.
    """
    zero = np.array([0.0, cfg.T])
    march = _March(initial, kappa, cfg, zero, np.zeros(2))
    n_max = march.t.shape[0] - 1
    while march.sm[march.n] < 0.0:
        if march.n >= n_max:
            raise HorizonExceeded(
                f"initial branch did not close within the horizon T = {cfg.T:g}"
            )
        march.step()
    n = march.n  # n >= 1: sm[0] = -ell0 < 0 and h <= ell0/10 force several steps
    w = (0.0 - march.sm[n - 1]) / (march.sm[n] - march.sm[n - 1])
    t_star = march.t[n - 1] + w * (march.t[n] - march.t[n - 1])
    v_star = march.ellp[n - 1] + w * (march.ellp[n] - march.ellp[n - 1])
    times = march.t[: n + 1].copy()
    ells = march.ell[: n + 1].copy()
    speeds = march.ellp[: n + 1].copy()
    # Replace the overshooting node with the exact crossing; drop it instead
    # when the crossing coincides with the previous node.
    if t_star - times[n - 1] > 1e-9 * max(t_star, 1.0):
        times[n], ells[n], speeds[n] = t_star, t_star, v_star
    else:
        times, ells, speeds = times[:n], ells[:n], speeds[:n]
        times[-1], ells[-1], speeds[-1] = t_star, t_star, v_star
    front = FrontCurve(times, ells, speeds)
    return InitialBranchResult(
        t_star=float(t_star),
        ell_star=float(t_star),
        ell_star_prime=float(v_star),
        front=front,
        slope_authoritative=(initial.regularity == "C1"),
    )


def reconstruct_state(sol: SolutionRecord, t: float, x_grid):
    """Displacement, time derivative and space derivative at (t, x_grid)."""
    return sol.reconstruct(t, x_grid)
