import math

import numpy as np
import pytest

from debond import (
    C1SwitchViolation,
    DeadEnd,
    SampledFunction,
    TargetState,
    Toughness,
    griffith_speed,
)
from debond.branch import BranchPolicy, branch_speed_options, solve_final_branch, static_branch


def make_target(ellbar0, y0_fn, y1_fn, regularity="C01", n=400):
    xs = np.linspace(0.0, ellbar0, n + 1)
    return TargetState(
        ellbar0,
        SampledFunction(xs, [y0_fn(x) for x in xs]),
        SampledFunction(xs, [y1_fn(x) for x in xs]),
        regularity,
    )


def constant_w_target(ellbar0, w, regularity="C01"):
    # ybar0 = 0 so ybar0' = 0 and ybar1 + ybar0' = w exactly
    return make_target(ellbar0, lambda x: 0.0, lambda x: w, regularity, n=8)


# -- speed options -------------------------------------------------------------

def test_options_zero_data_excludes_unit_root():
    assert branch_speed_options(0.0, 2.0) == (0.0,)


def test_options_both_branches():
    opts = branch_speed_options(2.0 / 3.0, 2.0)
    assert opts[0] == 0.0
    assert opts[1] == pytest.approx(0.5, abs=1e-15)


def test_options_dead_end():
    with pytest.raises(DeadEnd):
        branch_speed_options(3.0, 2.0)


def test_options_coincidence_at_equality():
    assert branch_speed_options(2.0, 2.0) == (0.0,)


# -- backward integration --------------------------------------------------------

def test_static_branch_preferred():
    tgt = make_target(2.0, lambda x: math.sin(math.pi * x), lambda x: -math.pi * math.cos(math.pi * x))
    T = 6.0
    res = solve_final_branch(tgt, Toughness(1.0), T, BranchPolicy("prefer_static", h=1e-3))
    assert res.t_bar_star == pytest.approx(T - 2.0, abs=1e-12)
    assert res.ell_bar_star == pytest.approx(2.0, abs=1e-12)
    assert res.ell_bar_star_prime == 0.0
    assert np.max(np.abs(res.front_segment.positions - 2.0)) <= 1e-12
    # matches the closed-form static branch exactly
    ref = static_branch(tgt, Toughness(1.0), T)
    assert ref.t_bar_star == res.t_bar_star
    assert np.max(np.abs(res.front_segment.ell(ref.front_segment.times) - 2.0)) == 0.0


def test_moving_branch_constant_coefficients():
    # |w|^2 = 2/3 against 2 kappa = 2: root 0.5 at every node.
    T = 6.0
    h = 1e-3
    tgt = constant_w_target(2.0, math.sqrt(2.0 / 3.0))
    res = solve_final_branch(tgt, Toughness(1.0), T, BranchPolicy("prefer_moving", h=h))
    assert np.max(np.abs(res.front_segment.speeds - 0.5)) <= 10 * h
    assert res.t_bar_star == pytest.approx(T - 4.0 / 3.0, abs=10 * h)
    assert res.t_bar_star + res.ell_bar_star == pytest.approx(T, abs=1e-12)
    expect = 2.0 - 0.5 * (T - res.front_segment.times)
    assert np.max(np.abs(res.front_segment.positions - expect)) <= 10 * h


def test_dead_end_target():
    tgt = constant_w_target(1.0, 2.0)
    with pytest.raises(DeadEnd):
        solve_final_branch(tgt, Toughness(1.0), 4.0, BranchPolicy("prefer_static", h=1e-3))


def test_alternative_admissibility_recorded():
    tgt = constant_w_target(2.0, math.sqrt(2.0 / 3.0))
    res = solve_final_branch(tgt, Toughness(1.0), 6.0, BranchPolicy("prefer_static", h=1e-3))
    # static branch chosen but the moving root 0.5 was available throughout
    assert np.all(res.alternative_admissible)
    assert np.max(np.abs(res.front_segment.positions - 2.0)) <= 1e-12


def test_node_constraint_and_inclusion_hold():
    tgt = make_target(
        2.0,
        lambda x: 0.3 * math.sin(math.pi * x),
        lambda x: 0.4 * math.cos(0.5 * x),
        n=800,
    )
    T = 6.0
    h = 1e-3
    kappa = Toughness(1.0)
    res = solve_final_branch(tgt, kappa, T, BranchPolicy("prefer_moving", h=h))
    w = tgt.w_plus()
    f = res.front_segment
    for t, L, v in zip(f.times[::37], f.positions[::37], f.speeds[::37]):
        x = min(max(t + L - T, 0.0), 2.0)
        Y = w(x) ** 2
        K = 2.0 * kappa(L)
        assert Y <= K + 1e-9
        root = (K - Y) / (K + Y)
        assert min(abs(v - 0.0), abs(v - root)) <= 10 * h


def test_forward_consistency_of_moving_branch():
    # The synthesized stage-2 trace slope must reproduce the branch speed
    # through the Griffith kernel at every node.
    tgt = constant_w_target(2.0, math.sqrt(2.0 / 3.0))
    T = 6.0
    h = 1e-3
    kappa = Toughness(1.0)
    res = solve_final_branch(tgt, kappa, T, BranchPolicy("prefer_moving", h=h))
    w = tgt.w_plus()
    f = res.front_segment
    for t, L, v in zip(f.times[::41], f.positions[::41], f.speeds[::41]):
        x = min(max(t + L - T, 0.0), 2.0)
        fp = -0.5 * w(x) * (1.0 + v) / (1.0 - v)
        assert griffith_speed(fp, kappa(L)) == pytest.approx(v, abs=10 * h)


def test_c1_terminal_slope_forced():
    # Active target: alpha > 0, so a C1 branch must leave T at that speed.
    alpha = math.sqrt(0.5)
    tgt = make_target(
        1.0,
        lambda x: 2.0 * (1.0 - x),
        lambda x: 2.0 * alpha,
        "C1",
        n=800,
    )
    res = solve_final_branch(
        tgt, Toughness(1.0), 4.0, BranchPolicy("prefer_moving", c1_mode=True, h=1e-3)
    )
    assert res.alpha == pytest.approx(alpha, abs=1e-6)
    assert res.front_segment.speeds[-1] == pytest.approx(alpha, abs=1e-6)


def test_no_termination_for_short_horizon():
    from debond import NoTermination

    tgt = constant_w_target(2.0, 0.5)
    with pytest.raises(NoTermination):
        solve_final_branch(tgt, Toughness(1.0), 1.5, BranchPolicy("prefer_static", h=1e-3))


def test_c1_switch_violation():
    # Passive target (alpha = 0) whose outgoing data leaves a positive moving
    # root at T: prefer_moving would need a jump there, which C1 rules forbid.
    tgt = make_target(1.0, lambda x: 0.5 * (x - 1.0), lambda x: 0.0, "C1", n=8)
    with pytest.raises(C1SwitchViolation):
        solve_final_branch(
            tgt, Toughness(1.0), 4.0, BranchPolicy("prefer_moving", c1_mode=True, h=1e-3)
        )
