import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mfmc.errors import ConfigError, GridError
from mfmc.reactions import (INF, ReactionSpec, algorithm1, amplifying_channel,
                            consumed_closed_form, gate, remaining_infinite_rate,
                            thresholding_channel)
from mfmc.signals import Grid, PulseSpec, constant, generate, rect, step, zeros
from mfmc.transfer import apply_channel

# Consumed concentration from integrating dCi/dt = dCj/dt = -k Ci Cj with
# scipy's DOP853 (rtol 1e-12): (Ci0, Cj0, k, t) -> c.
ODE_CONSUMED = {
    (8.0, 4.0, 400.0, 1e-3): 3.550867856016,
    (8.0, 8.0, 400.0, 1e-3): 6.095238095238,
    (3.0, 5.0, 4000.0, 2e-4): 2.724330103016,
    (1e-3, 2.0, 1.0, 1.0): 0.000864587877,
    (8.0, 4.0, 400.0, 5e-3): 3.99932896219,
}


@pytest.mark.parametrize("args", sorted(ODE_CONSUMED))
def test_closed_form_matches_ode(args):
    assert consumed_closed_form(*args) == pytest.approx(ODE_CONSUMED[args], rel=1e-10, abs=1e-12)


def test_closed_form_special_cases():
    assert consumed_closed_form(2.0, 5.0, INF, 1.0) == 2.0
    assert consumed_closed_form(2.0, 5.0, 400.0, 0.0) == 0.0
    c0, k, t = 3.0, 50.0, 0.01
    assert consumed_closed_form(c0, c0, k, t) == pytest.approx(c0 * c0 * k * t / (1 + c0 * k * t))
    # just off the degenerate case the general form takes over smoothly
    assert consumed_closed_form(c0, c0 * (1 + 1e-7), k, t) == pytest.approx(
        c0 * c0 * k * t / (1 + c0 * k * t), rel=1e-6)
    assert consumed_closed_form(0.0, 5.0, 400.0, 1.0) == 0.0


def test_closed_form_no_overflow():
    assert consumed_closed_form(1.0, 1e4, 1e6, 10.0) == 1.0
    assert consumed_closed_form(1e4, 1.0, 1e6, 10.0) == 1.0


def test_closed_form_rejects_negative():
    with pytest.raises(ConfigError):
        consumed_closed_form(-1.0, 1.0, 1.0, 1.0)
    with pytest.raises(ConfigError):
        consumed_closed_form(1.0, 1.0, 0.0, 1.0)


c = st.floats(0, 50)


@given(c, c, st.floats(1e-2, 1e5), st.floats(0, 1.0))
def test_closed_form_bounds_and_monotone(ci, cj, k, t):
    v = consumed_closed_form(ci, cj, k, t)
    assert 0 <= v <= min(ci, cj)
    assert consumed_closed_form(ci, cj, k, t * 2) >= v - 1e-12 * max(1, v)
    assert consumed_closed_form(ci, cj, k * 2, t) >= v - 1e-12 * max(1, v)


def test_reaction_spec():
    ReactionSpec("thresholding", 400.0)
    with pytest.raises(ConfigError):
        ReactionSpec("catalytic")
    with pytest.raises(ConfigError):
        ReactionSpec("amplifying", 0.0)
    with pytest.raises(ConfigError):
        ReactionSpec("thresholding", species=("A", "A", "B"))


def _step_vs_pulse(grid):
    # a step of Si meets a Gaussian pulse of Sj
    ci = generate(step(6.0, 0.5), grid, "Si")
    cj = generate(PulseSpec("gaussian", 10.0, centre=2.0, width=0.2), grid, "Sj")
    return ci, cj


def test_infinite_rate_algebra(grid):
    a = generate(rect(8.0, 1, 3), grid)
    b = generate(rect(8.0, 2, 4), grid)
    ri, rj, phi = remaining_infinite_rate(a, b)
    t = grid.t
    assert np.all(phi.samples[(t >= 2) & (t < 3 - 1e-9)] == 8.0)
    assert np.all(ri.samples[(t >= 1) & (t < 2 - 1e-9)] == 8.0)
    assert np.all(ri.samples * rj.samples == 0)
    same = remaining_infinite_rate(a, a)
    assert same[0].peak() == 0 and same[1].peak() == 0


def test_algorithm1_without_partner(grid):
    a = generate(rect(8.0, 1, 3), grid)
    ri, rj, cons = algorithm1(a, zeros(grid), 400.0)
    assert np.array_equal(ri.samples, a.samples) and cons.peak() == 0


def test_algorithm1_infinite_rate_is_exact(grid):
    ci, cj = _step_vs_pulse(grid)
    ri, rj, cons = algorithm1(ci, cj, INF)
    ref = remaining_infinite_rate(ci, cj)
    assert np.array_equal(ri.samples, ref[0].samples)
    assert np.array_equal(rj.samples, ref[1].samples)
    assert np.array_equal(cons.samples, ref[2].samples)


def test_finite_rate_leaves_more(grid):
    ci, cj = _step_vs_pulse(grid)
    ri, rj, _ = algorithm1(ci, cj, 400.0)
    ref = remaining_infinite_rate(ci, cj)
    assert np.all(ri.samples >= ref[0].samples - 1e-12)
    assert np.all(rj.samples >= ref[1].samples - 1e-12)
    assert ri.mass() > ref[0].mass()


@given(st.sampled_from([40.0, 400.0, 4000.0, INF]))
def test_algorithm1_difference_invariant(k):
    g = Grid.span(6.0)
    ci, cj = _step_vs_pulse(g)
    ri, rj, cons = algorithm1(ci, cj, k)
    assert np.allclose(ri.samples - rj.samples, ci.samples - cj.samples, atol=1e-12)
    assert np.all(cons.samples >= 0)


def test_algorithm1_deviation_governed_by_k_dt():
    # k and dt enter through k * dt: smaller k * dt leaves more unreacted
    devs = {}
    for dt, k in [(0.01, 400.0), (0.005, 400.0), (0.0025, 400.0), (0.005, 800.0)]:
        g = Grid.span(6.0, dt)
        ci, cj = _step_vs_pulse(g)
        ri = algorithm1(ci, cj, k)[0]
        devs[(dt, k)] = np.abs(ri.samples - remaining_infinite_rate(ci, cj)[0].samples).max()
    assert devs[(0.01, 400.0)] < devs[(0.005, 400.0)] < devs[(0.0025, 400.0)]
    assert devs[(0.005, 800.0)] == pytest.approx(devs[(0.01, 400.0)], rel=0.05)


def test_algorithm1_truncates_after_T(grid):
    ci, cj = _step_vs_pulse(grid)
    ri, _, _ = algorithm1(ci, cj, 400.0, T=1.0)
    assert np.all(ri.samples[201:] == 0) and ri.samples[200] > 0


def test_algorithm1_checks_step(grid):
    ci, cj = _step_vs_pulse(grid)
    with pytest.raises(GridError):
        algorithm1(ci, cj, 400.0, dt=0.001)
    with pytest.raises(GridError):
        algorithm1(ci, zeros(Grid(n=11)), 400.0)


def test_gate():
    g = Grid(n=5)
    f = constant(0.0, g).with_samples([0, 1, 8, 0.9, 2])
    assert gate(f).tolist() == [False, False, True, False, True]
    assert gate(f, 0.0).tolist() == [False, True, True, True, True]
    assert not gate(constant(1e-12, g)).any()
    with pytest.raises(ConfigError):
        gate(f, 1.0)


@given(st.floats(1e-3, 1e3))
def test_gate_scale_invariant(a):
    g = Grid.span(5.0)
    f = generate(PulseSpec("gaussian", 1.0, centre=2.0, width=0.3), g)
    assert np.array_equal(gate(f), gate(f * a))


def test_thresholding_channel_without_partner(grid, p):
    a = generate(rect(8.0, 1, 3), grid)
    ci, cj, ck = thresholding_channel(a, zeros(grid), 500e-6, p)
    assert np.allclose(ci.samples, apply_channel(a, 500e-6, p).samples)
    assert ck.peak() == 0 and cj.peak() == 0


def test_thresholding_channel_conservation(grid, p):
    a = generate(rect(8.0, 1, 3), grid)
    b = generate(rect(5.0, 1.5, 4), grid)
    for k in (INF, 400.0):
        ci, _, ck = thresholding_channel(a, b, 500e-6, p, k=k)
        ref = apply_channel(a, 500e-6, p)
        assert np.abs(ci.samples + ck.samples - ref.samples).max() <= 5e-3 * ref.peak()


def test_thresholding_channel_rejects_bad_length(grid, p):
    with pytest.raises(ConfigError):
        thresholding_channel(zeros(grid), zeros(grid), 0.0, p)


def test_amplifying_channel(grid, p):
    assert amplifying_channel(zeros(grid), constant(3.0, grid), 500e-6, p).peak() == 0
    si = generate(rect(8.0, 1, 3), grid)
    out = amplifying_channel(si, constant(3.0, grid), 500e-6, p)
    assert out.samples[int(2.5 / grid.dt)] == pytest.approx(3.0, rel=1e-6)
    assert out.mass() == pytest.approx(3.0 * 2.0, rel=1e-3)


def test_amplifier_threshold_narrows_output(grid, p):
    si = apply_channel(generate(rect(8.0, 1, 3), grid), 500e-6, p)
    amp = constant(3.0, grid)
    wide = amplifying_channel(si, amp, 200e-6, p, theta=0.0)
    narrow = amplifying_channel(si, amp, 200e-6, p, theta=1 / 8)
    assert narrow.mass() < wide.mass()
