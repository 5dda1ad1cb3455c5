"""Exact boundary-control synthesis.

The control is assembled in trace coordinates s = t - ell(t) in three stages:

  Stage 1, s in (0, tau_minus(t_bar_star)]: inflate the front from the end of
      the initial branch to the start of the final branch.  Wherever the
      prescribed front moves, the trace-slope magnitude is forced by the
      Griffith kernel; where it is static, the slope is free inside the
      threshold band 2 f'^2 <= kappa and is used to connect endpoint values
      (and to flip sign, when needed, inside a zero-speed plateau).

  Stage 2, s in (tau_minus(t_bar_star), tau_minus(T)]: follow the admissible
      final branch while writing the outgoing half (ybar1 + ybar0') of the
      target onto the trace:
          f'(s) = -(ybar1 + ybar0')((tau_plus o tau_minus^-1)(s) - T) / 2
                  * (1 + ell') / (1 - ell').

  Stage 3, s in (tau_minus(T), T]: write the incoming half directly,
          f'(s) = (ybar1 - ybar0')(T - s) / 2.

The boundary rate u' is then read off the trace relation and integrated from
u(0) = y0(0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .branch import BranchPolicy, static_branch
from .errors import (
    ConstraintViolated,
    ContinuityFailure,
    DomainError,
    IncompatibleData,
    IncompatibleTarget,
    InfeasibleTime,
)
from .forward import SolverConfig, solve_front, solve_initial_branch
from .func1d import SampledFunction
from .model import (
    BranchResult,
    ControlSignal,
    FrontCurve,
    InitialBranchResult,
    InitialState,
    TargetState,
    Toughness,
    check_initial_compatibility,
    classify_final_state,
    griffith_speed,
    speed_to_fprime_magnitude,
)

_SPEED_TOL = 1e-12
_SLOPE_TOL = 1e-9
_SPEED_MARGIN = 1e-6


@dataclass(frozen=True)
class InflationPlan:
    """Geometry of the Stage-1 inflation between the two data-driven branches."""

    t_star: float
    ell_star: float
    ell_star_prime: float
    t_bar_star: float
    ell_bar_star: float
    ell_bar_star_prime: float
    v: float
    t_circ: float
    delta: float
    case: str
    front_segment: FrontCurve


@dataclass(frozen=True)
class SynthesisReport:
    """Everything produced by a synthesis run.

    ``stage_boundaries`` holds the trace coordinates (tau_minus(t_bar_star),
    tau_minus(T), T) separating the three half-open stages.
    ``stage3_junction`` stores (stage-2 limit, stage-3 limit, reference value
    -(1 + alpha) ybar0'(ellbar0) / 2) at the middle boundary.
    """

    control: ControlSignal
    plan: InflationPlan
    branch: BranchResult
    initial_branch: InitialBranchResult
    stage_boundaries: tuple
    front: FrontCurve
    designed_trace: SampledFunction
    stage3_junction: tuple


# ---------------------------------------------------------------------------
# Trace-level operations
# ---------------------------------------------------------------------------

def fprime_for_prescribed_front(
    front: FrontCurve,
    kappa: Toughness,
    sign_policy=1.0,
    left_value: float = None,
    right_value: float = None,
):
    """Trace slope on tau_minus(segment) realizing the prescribed front.

    ``sign_policy`` is either a number or a callable t -> sign used on moving
    stretches.  On static stretches the slope interpolates linearly (in s)
    between the neighbouring forced values or the given endpoint requirements,
    clipped into the threshold band |f'| <= sqrt(kappa/2).

    Returns (s_nodes, values).
    """
    ts = front.times
    Ls = front.positions
    vs = front.speeds
    s_nodes = ts - Ls
    n = ts.shape[0]
    sign_at = sign_policy if callable(sign_policy) else (lambda t, s=float(sign_policy): s)

    vals = np.empty(n)
    moving = vs > _SPEED_TOL
    for i in range(n):
        if moving[i]:
            mag = speed_to_fprime_magnitude(min(vs[i], 1.0 - 1e-12), kappa(Ls[i]))
            vals[i] = math.copysign(mag, sign_at(ts[i]))

    i = 0
    while i < n:
        if moving[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and not moving[j + 1]:
            j += 1
        # anchors for the static run [i, j]
        if i > 0:
            sa, va = s_nodes[i - 1], vals[i - 1]
        elif left_value is not None:
            sa, va = s_nodes[i], float(left_value)
        else:
            sa = va = None
        if j + 1 < n:
            sb, vb = s_nodes[j + 1], vals[j + 1]
        elif right_value is not None:
            sb, vb = s_nodes[j], float(right_value)
        else:
            sb = vb = None
        if va is None and vb is None:
            va = vb = 0.0
            sa, sb = s_nodes[i], s_nodes[j]
        elif va is None:
            va, sa = vb, s_nodes[i]
        elif vb is None:
            vb, sb = va, s_nodes[j]
        for k in range(i, j + 1):
            if sb > sa:
                w = (s_nodes[k] - sa) / (sb - sa)
                w = min(max(w, 0.0), 1.0)
            else:
                w = 0.0
            raw = va * (1.0 - w) + vb * w
            band = math.sqrt(0.5 * kappa(Ls[k]))
            vals[k] = min(max(raw, -band), band)
        i = j + 1
    return s_nodes, vals


def uprime_from_fprime(fprime, front: FrontCurve, initial: InitialState, s: float) -> float:
    """Boundary rate making the trace relation hold at coordinate s.

    ``fprime`` is a callable returning the (designed or solved) trace slope.
    Below ell0 the relation involves only the initial data; above it the echo
    term is subtracted with the reflection factor of the prescribed front.
    """
    s = float(s)
    if s <= initial.ell0:
        return fprime(s) + 0.5 * (initial.y0_prime(s) + initial.y1(s))
    echo = front.echo(s)
    if echo < -initial.ell0 * (1.0 + 1e-9) - 1e-12:
        raise DomainError(f"echo point {echo:g} precedes -ell0")
    return fprime(s) - fprime(max(echo, -initial.ell0)) * front.reflection_factor(s)


# ---------------------------------------------------------------------------
# Stage-1 front construction
# ---------------------------------------------------------------------------

def _speed_profile(p, q, va, vb, gain, h):
    """Continuous speed samples on [p, q] from va to vb with a given integral.

    Tries a single cubic-Hermite position interpolant first; if its slope
    leaves [0, 1), falls back to a ramp/plateau/ramp profile whose plateau
    level is solved from the integral (halving the ramp width until the level
    is admissible).
    """
    L = q - p
    if L <= 0.0:
        raise InfeasibleTime("moving interval has no time budget")
    ts = np.linspace(p, q, max(int(np.ceil(L / h)), 8) + 1)
    # cubic Hermite for the position: slope is quadratic in t
    c2 = 3.0 * gain / L**2 - (2.0 * va + vb) / L
    c3 = (va + vb) / L**2 - 2.0 * gain / L**3
    tau = ts - p
    sigma = va + 2.0 * c2 * tau + 3.0 * c3 * tau * tau
    if np.all(sigma >= -1e-12) and np.all(sigma <= 1.0 - _SPEED_MARGIN):
        return ts, np.clip(sigma, 0.0, 1.0 - _SPEED_MARGIN)
    w = 0.25 * L
    while True:
        m = (gain - 0.5 * w * (va + vb)) / (L - w)
        if 0.0 <= m <= 1.0 - _SPEED_MARGIN:
            break
        w *= 0.5
        if w < 1e-9 * L:
            raise InfeasibleTime(
                f"cannot gain length {gain:.6g} over {L:.6g} time units with speed < 1"
            )
    knots = np.array([p, p + w, q - w, q])
    kvals = np.array([va, m, m, vb])
    sigma = np.interp(ts, knots, kvals)
    return ts, sigma


def _integrate_speeds(ts, sigma, ell_start):
    dx = np.diff(ts)
    return ell_start + np.concatenate(([0.0], np.cumsum(0.5 * (sigma[1:] + sigma[:-1]) * dx)))


def _stage1_case(dl_zero, a_moving, b_moving):
    if dl_zero:
        return "static_match"
    return {(True, True): "a", (False, True): "b", (True, False): "c", (False, False): "d"}[
        (a_moving, b_moving)
    ]


def _build_stage1_c01(t0, ell0_, t1, ell1, h):
    v = (ell1 - ell0_) / (t1 - t0)
    n = max(int(np.ceil((t1 - t0) / h)), 4)
    ts = np.linspace(t0, t1, n + 1)
    ells = ell0_ + v * (ts - t0)
    ells[-1] = ell1
    return ts, ells, np.full(n + 1, v), v, 0.5 * (t0 + t1), 0.0


def _build_stage1_c1(t0, ell0_, v0, t1, ell1, v1, h):
    dt = t1 - t0
    dl = ell1 - ell0_
    slack = dt - dl
    if slack <= 0.0:
        raise InfeasibleTime("no slack for a C1 inflation below unit speed")
    a_moving = v0 > _SLOPE_TOL
    b_moving = v1 > _SLOPE_TOL
    if dl <= _SLOPE_TOL * max(1.0, ell1):
        n = max(int(np.ceil(dt / h)), 4)
        ts = np.linspace(t0, t1, n + 1)
        return ts, np.full(n + 1, ell0_), np.zeros(n + 1), 0.5 * (t0 + t1), 0.0

    delta = min(0.05 * dt, slack / 8.0)
    t_mid = 0.5 * (t0 + t1)
    left = t0 + delta if not a_moving else t0
    right = t1 - delta if not b_moving else t1
    m1 = (left, t_mid - delta)
    m2 = (t_mid + delta, right)
    len1 = m1[1] - m1[0]
    len2 = m2[1] - m2[0]
    gain1 = dl * len1 / (len1 + len2)
    gain2 = dl - gain1

    pieces = []
    if not a_moving:
        n = max(int(np.ceil(delta / h)), 4)
        pieces.append((np.linspace(t0, left, n + 1), np.zeros(n + 1)))
    pieces.append(_speed_profile(m1[0], m1[1], v0 if a_moving else 0.0, 0.0, gain1, h))
    n = max(int(np.ceil(2 * delta / h)), 4)
    pieces.append((np.linspace(t_mid - delta, t_mid + delta, n + 1), np.zeros(n + 1)))
    pieces.append(_speed_profile(m2[0], m2[1], 0.0, v1 if b_moving else 0.0, gain2, h))
    if not b_moving:
        n = max(int(np.ceil(delta / h)), 4)
        pieces.append((np.linspace(right, t1, n + 1), np.zeros(n + 1)))

    ts = np.concatenate([p[0] if i == 0 else p[0][1:] for i, p in enumerate(pieces)])
    sigma = np.concatenate([p[1] if i == 0 else p[1][1:] for i, p in enumerate(pieces)])
    ells = _integrate_speeds(ts, sigma, ell0_)
    # pin the endpoint exactly; the profile integrals put us within float noise
    ells[-1] = ell1
    return ts, ells, sigma, t_mid, delta


# ---------------------------------------------------------------------------
# Front composition and trace assembly
# ---------------------------------------------------------------------------

def _compose_front(parts, allow_slope_jumps, T):
    """Concatenate (times, ells, speeds) parts into one FrontCurve on [0, T].

    At junctions with a genuine slope jump a paired node is inserted so the
    piecewise-linear speed keeps both one-sided values.
    """
    eps = max(2e-12 * T, 1e-13)
    times = [parts[0][0]]
    ells = [parts[0][1]]
    speeds = [parts[0][2]]
    for ts, ls, vs in parts[1:]:
        t_prev = times[-1][-1]
        v_prev = speeds[-1][-1]
        if abs(ts[0] - t_prev) > 1e-9 * max(T, 1.0):
            raise ContinuityFailure("front parts do not abut in time")
        if abs(vs[0] - v_prev) > _SPEED_TOL and allow_slope_jumps:
            times.append(np.array([t_prev + eps]))
            ells.append(np.array([ells[-1][-1]]))
            speeds.append(np.array([vs[0]]))
        times.append(ts[1:] if abs(ts[0] - t_prev) <= eps else ts)
        ells.append(ls[1:] if abs(ts[0] - t_prev) <= eps else ls)
        speeds.append(vs[1:] if abs(ts[0] - t_prev) <= eps else vs)
    t = np.concatenate(times)
    l = np.concatenate(ells)
    v = np.concatenate(speeds)
    keep = np.concatenate(([True], np.diff(t) > eps / 2))
    return FrontCurve(t[keep], l[keep], v[keep])


def _designed_trace_nodes(initial, stages, T, c1_mode, ctol):
    """Glue seed and stage nodes into one slope polyline on [-ell0, T].

    ``stages`` is a list of (s_nodes, values) with increasing coverage of
    (0, T].  For Lipschitz synthesis the stage boundaries get paired nodes
    (one-sided limits); for C1 synthesis any jump above ``ctol`` is an
    internal error.
    """
    eps = max(2e-12 * (T + initial.ell0), 1e-13)
    seed_grid = np.union1d(initial.y1.xs, initial.y0_prime.xs)
    seed_s = -seed_grid[::-1]
    seed_v = 0.5 * (initial.y1(seed_grid) - initial.y0_prime(seed_grid))[::-1]
    s_parts = [seed_s]
    v_parts = [seed_v]
    for s_nodes, vals in stages:
        s_prev = s_parts[-1][-1]
        v_prev = v_parts[-1][-1]
        jump = abs(vals[0] - v_prev)
        if c1_mode and jump > ctol and s_nodes[0] - s_prev <= eps:
            raise ContinuityFailure(
                f"designed trace jumps by {jump:.3g} at s = {s_prev:.6g}"
            )
        if s_nodes[0] - s_prev <= eps:
            s_parts.append(np.array([s_prev + eps]))
            v_parts.append(np.array([vals[0]]))
            s_parts.append(s_nodes[1:])
            v_parts.append(vals[1:])
        else:
            s_parts.append(s_nodes)
            v_parts.append(vals)
    s = np.concatenate(s_parts)
    v = np.concatenate(v_parts)
    keep = np.concatenate(([True], np.diff(s) > eps / 2))
    return s[keep], v[keep]


def _trace_evaluator(s_nodes, values):
    def fp(q):
        i = np.searchsorted(s_nodes, q)
        if i <= 0:
            return float(values[0])
        if i >= s_nodes.shape[0]:
            return float(values[-1])
        x0 = s_nodes[i - 1]
        w = (q - x0) / (s_nodes[i] - x0)
        return float(values[i - 1] * (1.0 - w) + values[i] * w)

    return fp


def _echo_images(front, seeds, T, generations=6):
    """Forward images s -> tau_plus(tau_minus^-1(s)) of trace breakpoints."""
    out = []
    for s0 in seeds:
        s = s0
        for _ in range(generations):
            if s >= front.tau_minus.range_hi - 1e-12:
                break
            s = float(front.tau_plus(front.tau_minus.invert(s)))
            if s > T:
                break
            out.append(s)
    return out


# ---------------------------------------------------------------------------
# Synthesis core
# ---------------------------------------------------------------------------

def _check_branch(branch: BranchResult, target: TargetState, T: float):
    f = branch.front_segment
    tol = 1e-6 * max(T, 1.0)
    if abs(f.t_end - T) > tol or abs(f.ell(f.t_end) - target.ellbar0) > tol:
        raise ValueError("branch does not end at (T, ellbar0)")
    if abs(branch.t_bar_star + branch.ell_bar_star - T) > tol:
        raise ValueError("branch start does not close the characteristic triangle")


def _synthesize(initial, target, kappa, T, branch, cfg, c1_mode, initial_branch=None):
    _check_branch(branch, target, T)
    ctol = 1e-6 + 10.0 * cfg.h

    if c1_mode:
        if initial.regularity != "C1" or target.regularity != "C1":
            raise IncompatibleData("C1 synthesis needs C1-tagged initial and target data")
        compat = check_initial_compatibility(
            initial, initial.y0(0.0), initial.y1(0.0), kappa, tol=1e-6
        )
        if not compat.passed:
            worst = compat.worst
            raise IncompatibleData(
                f"initial data violates C1 compatibility: {worst.name} residual "
                f"{worst.residual:.3g}"
            )
        alpha = classify_final_state(target, kappa, tol=1e-6)
        if abs(branch.alpha - alpha) > 1e-6 + 10.0 * cfg.h:
            raise IncompatibleTarget(
                f"branch terminal speed {branch.alpha:.6g} does not match the "
                f"classification alpha = {alpha:.6g}"
            )
    else:
        alpha = branch.alpha

    ib = initial_branch or solve_initial_branch(initial, kappa, cfg)
    t_star, ell_star, v_star = ib.t_star, ib.ell_star, ib.ell_star_prime
    t_bar, ell_bar, v_bar = branch.t_bar_star, branch.ell_bar_star, branch.ell_bar_star_prime

    len_tol = 1e-9 * max(ell_bar, 1.0)
    if ell_bar < ell_star - len_tol:
        raise InfeasibleTime(
            f"final branch starts at ell = {ell_bar:.6g} left of the initial branch "
            f"end {ell_star:.6g}"
        )
    if ell_bar >= t_bar - len_tol:
        raise InfeasibleTime(
            f"final branch start (t, ell) = ({t_bar:.6g}, {ell_bar:.6g}) leaves no "
            f"time to inflate the domain"
        )
    equal_len = abs(ell_bar - ell_star) <= max(len_tol, 1e-7)
    if c1_mode and equal_len and (v_star > _SLOPE_TOL or v_bar > _SLOPE_TOL):
        raise InfeasibleTime(
            "equal branch lengths require both endpoint front speeds to vanish"
        )
    if c1_mode and not ib.slope_authoritative:
        raise IncompatibleData("C1 synthesis needs an authoritative initial branch slope")

    # Stage-1 prescribed front
    if c1_mode:
        if equal_len:
            s1_parts = _build_stage1_c1(t_star, ell_star, 0.0, t_bar, ell_star, 0.0, cfg.h)
            ts1, ells1, sig1, t_circ, delta = s1_parts
            v_lin = 0.0
        else:
            ts1, ells1, sig1, t_circ, delta = _build_stage1_c1(
                t_star, ell_star, v_star, t_bar, ell_bar, v_bar, cfg.h
            )
            v_lin = (ell_bar - ell_star) / (t_bar - t_star)
    else:
        ts1, ells1, sig1, v_lin, t_circ, delta = _build_stage1_c01(
            t_star, ell_star, t_bar, ell_bar, cfg.h
        )
    case = _stage1_case(equal_len, v_star > _SLOPE_TOL, v_bar > _SLOPE_TOL)
    stage1_front = FrontCurve(ts1, ells1, np.minimum(sig1, 1.0 - 1e-9))

    # Composite prescribed front on [0, T]
    front = _compose_front(
        [
            (ib.front.times, ib.front.positions, ib.front.speeds),
            (ts1, ells1, np.minimum(sig1, 1.0 - 1e-9)),
            (
                branch.front_segment.times,
                branch.front_segment.positions,
                branch.front_segment.speeds,
            ),
        ],
        allow_slope_jumps=not c1_mode,
        T=T,
    )
    if c1_mode:
        l_jump = float(np.max(np.abs(np.diff(front.speeds))))
        if l_jump > ctol:
            raise ContinuityFailure(f"prescribed front speed jumps by {l_jump:.3g}")

    # Stage boundaries in trace coordinates
    s1 = t_bar - ell_bar
    s2 = T - target.ellbar0

    w_plus = target.w_plus()
    w_minus = target.w_minus()
    fp0 = 0.5 * (initial.y1(0.0) - initial.y0_prime(0.0))
    r_w = w_plus(0.0)
    junction = -0.5 * r_w * (1.0 + v_bar) / (1.0 - v_bar)

    sgn_r = math.copysign(1.0, junction) if abs(junction) > 0.0 else 1.0
    if v_star > _SLOPE_TOL and abs(fp0) > 0.0:
        sgn_l = math.copysign(1.0, fp0)
    else:
        sgn_l = sgn_r

    def sign_at(t):
        return sgn_l if t <= t_circ else sgn_r

    s1_nodes, s1_vals = fprime_for_prescribed_front(
        stage1_front,
        kappa,
        sign_at,
        left_value=fp0,
        right_value=junction,
    )

    # Sample stage 2 at solver resolution: the branch grid may be coarse (a
    # static branch needs two nodes), but w_plus composed with the maps does
    # not.  Pull the target's own abscissae back through tau_plus as well so
    # kinks of sampled data stay on the grid.
    n2 = max(int(np.ceil((T - t_bar) / cfg.h)), 8)
    t2 = np.union1d(np.linspace(t_bar, T, n2 + 1), branch.front_segment.times)
    seg = branch.front_segment
    x_back = w_plus.xs + T
    x_back = x_back[(x_back >= seg.tau_plus.range_lo) & (x_back <= seg.tau_plus.range_hi)]
    if x_back.size:
        t2 = np.union1d(t2, seg.tau_plus.invert(x_back))
    t2 = t2[(t2 >= t_bar) & (t2 <= T)]
    bls = seg.ell(t2)
    bvs = seg.ell_prime(t2)
    s2_nodes = t2 - bls
    args = np.clip(t2 + bls - T, w_plus.lo, w_plus.hi)
    s2_vals = -0.5 * w_plus(args) * (1.0 + bvs) / (1.0 - bvs)

    n3 = max(int(np.ceil(target.ellbar0 / cfg.h)), 8)
    x3 = np.union1d(np.linspace(0.0, target.ellbar0, n3 + 1), w_minus.xs)
    s3_nodes = (T - x3)[::-1]
    s3_vals = 0.5 * w_minus(x3)[::-1]

    trace_s, trace_v = _designed_trace_nodes(
        initial,
        [(s1_nodes, s1_vals), (s2_nodes, s2_vals), (s3_nodes, s3_vals)],
        T,
        c1_mode,
        ctol,
    )
    fp_design = _trace_evaluator(trace_s, trace_v)

    # Stage-3 junction identity (the proof's linchpin computation)
    stage2_limit = float(s2_vals[-1])
    stage3_limit = float(s3_vals[0])
    junction_ref = -0.5 * (1.0 + alpha) * target.ybar0_prime(target.ellbar0)
    if c1_mode and abs(stage2_limit - stage3_limit) > ctol:
        raise ContinuityFailure(
            f"trace jumps by {abs(stage2_limit - stage3_limit):.3g} at tau_minus(T)"
        )

    # Boundary rate on a grid carrying every designed node plus echo images
    breakpoints = [0.0, initial.ell0, s1, s2, T]
    images = _echo_images(front, breakpoints, T)
    base = trace_s[trace_s > 0.0]
    grid = np.union1d(np.union1d(base, np.linspace(0.0, T, int(np.ceil(T / cfg.h)) + 1)),
                      np.array(breakpoints + images))
    if not c1_mode:
        # The +side sample's echo must clear the jump sliver of the designed
        # trace, so this offset has to dominate the trace pair spacing even
        # after the echo map contracts it.
        off = 1e-7 * max(T, 1.0)
        pairs = []
        for b in [initial.ell0, s1, s2] + images:
            if 0.0 < b < T:
                pairs += [b - off, b + off]
        grid = np.union1d(grid, np.array(pairs))
    grid = grid[(grid >= 0.0) & (grid <= T)]
    keep = np.concatenate(([True], np.diff(grid) > max(1e-12 * T, 1e-14)))
    grid = grid[keep]

    up_vals = np.array([uprime_from_fprime(fp_design, front, initial, s) for s in grid])
    du = np.diff(grid)
    u_vals = initial.y0(0.0) + np.concatenate(
        ([0.0], np.cumsum(0.5 * (up_vals[1:] + up_vals[:-1]) * du))
    )
    control = ControlSignal(
        SampledFunction(grid, u_vals),
        SampledFunction(grid, up_vals),
        "C1" if c1_mode else "C01",
    )

    plan = InflationPlan(
        t_star=t_star,
        ell_star=ell_star,
        ell_star_prime=v_star,
        t_bar_star=t_bar,
        ell_bar_star=ell_bar,
        ell_bar_star_prime=v_bar,
        v=v_lin,
        t_circ=t_circ,
        delta=delta,
        case=case,
        front_segment=stage1_front,
    )
    return SynthesisReport(
        control=control,
        plan=plan,
        branch=branch,
        initial_branch=ib,
        stage_boundaries=(s1, s2, T),
        front=front,
        designed_trace=SampledFunction(trace_s, trace_v),
        stage3_junction=(stage2_limit, stage3_limit, float(junction_ref)),
    )


def synthesize_c01(
    initial: InitialState,
    target: TargetState,
    kappa: Toughness,
    T: float,
    branch: BranchResult,
    cfg: SolverConfig,
) -> SynthesisReport:
    """Lipschitz control steering the system exactly onto the target at T."""
    return _synthesize(initial, target, kappa, T, branch, cfg, c1_mode=False)


def synthesize_c1(
    initial: InitialState,
    target: TargetState,
    kappa: Toughness,
    T: float,
    branch: BranchResult,
    cfg: SolverConfig,
) -> SynthesisReport:
    """Continuously differentiable control steering exactly onto the target."""
    return _synthesize(initial, target, kappa, T, branch, cfg, c1_mode=True)


def _static_constraint(target: TargetState, kappa: Toughness):
    w = target.w_plus()
    excess = float(np.max(w.vs**2)) - 2.0 * kappa(target.ellbar0)
    if excess > 1e-9 * max(1.0, 2.0 * kappa(target.ellbar0)):
        raise ConstraintViolated(
            f"sup |ybar1 + ybar0'|^2 exceeds 2 kappa(ellbar0) by {excess:.6g}",
            excess=excess,
        )


def synthesize_static_c01(
    initial: InitialState,
    target: TargetState,
    kappa: Toughness,
    T: float,
    cfg: SolverConfig,
) -> SynthesisReport:
    """Static-final-branch shortcut: constraint check, then plain synthesis."""
    _static_constraint(target, kappa)
    if T <= 2.0 * target.ellbar0:
        raise InfeasibleTime(f"need T > 2 ellbar0 = {2 * target.ellbar0:g}, got {T:g}")
    ib = solve_initial_branch(initial, kappa, cfg)
    if target.ellbar0 < ib.ell_star - 1e-9:
        raise InfeasibleTime(
            f"target front {target.ellbar0:g} lies left of the initial branch end "
            f"{ib.ell_star:.6g}"
        )
    branch = static_branch(target, kappa, T)
    return _synthesize(initial, target, kappa, T, branch, cfg, c1_mode=False, initial_branch=ib)


def synthesize_static_c1(
    initial: InitialState,
    target: TargetState,
    kappa: Toughness,
    T: float,
    cfg: SolverConfig,
) -> SynthesisReport:
    """C1 variant of the static shortcut; the target must be passive."""
    _static_constraint(target, kappa)
    if abs(target.ybar1(target.ellbar0)) > 1e-6:
        raise IncompatibleTarget(
            "a static C1 branch needs a passive target: ybar1(ellbar0) must vanish"
        )
    if T <= 2.0 * target.ellbar0:
        raise InfeasibleTime(f"need T > 2 ellbar0 = {2 * target.ellbar0:g}, got {T:g}")
    ib = solve_initial_branch(initial, kappa, cfg)
    strict = ib.ell_star_prime > _SLOPE_TOL
    if target.ellbar0 < ib.ell_star - 1e-9 or (
        strict and target.ellbar0 <= ib.ell_star + 1e-9
    ):
        raise InfeasibleTime(
            f"target front {target.ellbar0:g} too small for the initial branch end "
            f"{ib.ell_star:.6g} (strict: {strict})"
        )
    branch = static_branch(target, kappa, T)
    return _synthesize(initial, target, kappa, T, branch, cfg, c1_mode=True, initial_branch=ib)


# ---------------------------------------------------------------------------
# Round-trip verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VerificationResult:
    front_error: float
    displacement_error: float
    velocity_error: float
    solution: object

    def within(self, tol_front, tol_disp, tol_vel) -> bool:
        return (
            self.front_error <= tol_front
            and self.displacement_error <= tol_disp
            and self.velocity_error <= tol_vel
        )


def verify_synthesis(
    report: SynthesisReport,
    initial: InitialState,
    target: TargetState,
    kappa: Toughness,
    cfg: SolverConfig,
    n_grid: int = 400,
) -> VerificationResult:
    """Simulate forward under the emitted control and compare against the target.

    The velocity comparison skips a thin margin at both domain ends: for
    Lipschitz controls the designed trace jumps map exactly onto the target
    endpoints, where the terminal velocity is only defined almost everywhere.
    """
    T = cfg.T
    sol = solve_front(initial, report.control, kappa, cfg)
    ell_T = sol.front.ell(T)
    front_err = abs(ell_T - target.ellbar0)
    hi = min(ell_T, target.ellbar0)
    xs = np.linspace(0.0, hi, n_grid + 1)
    y, dty, _ = sol.reconstruct(T, xs)
    disp_err = float(np.max(np.abs(y - target.ybar0(xs))))
    margin = max(4.0 * cfg.h, 1e-3 * hi)
    inner = (xs >= margin) & (xs <= hi - margin)
    vel_err = float(np.max(np.abs(dty[inner] - target.ybar1(xs[inner]))))
    return VerificationResult(front_err, disp_err, vel_err, sol)
