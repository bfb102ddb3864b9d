import numpy as np
import pytest
from hypothesis import given, strategies as st

from mfmc.errors import ConfigError, GridError
from mfmc.signals import (ConcentrationSignal, Grid, PulseSpec, combine, constant, convolve,
                          delay, from_csv, generate, pointwise_min, rect, scale, step, to_csv,
                          zeros)
from mfmc.transfer import TransferKernel


def test_step_fills_grid():
    g = Grid.span(4.0, 0.01)
    s = generate(step(8.0), g)
    assert np.all(s.samples == 8.0)


def test_rectangle_is_half_open():
    g = Grid.span(5.0, 0.01)
    s = generate(rect(8.0, 1.0, 3.0), g)
    on = (g.t >= 1.0 - 1e-9) & (g.t < 3.0 - 1e-9)
    assert np.all(s.samples[on] == 8.0) and np.all(s.samples[~on] == 0.0)
    assert s.samples[100] == 8.0 and s.samples[300] == 0.0


def test_zero_amplitude():
    assert generate(rect(0.0, 1, 2), Grid()).peak() == 0.0


def test_gaussian_pulse():
    g = Grid()
    s = generate(PulseSpec("gaussian", 2.0, centre=1.0, width=0.1), g)
    assert s.samples[200] == 2.0
    assert s.samples[300] == pytest.approx(2 * np.exp(-2.5))


@pytest.mark.parametrize("bad", [dict(kind="rectangle", amplitude=1, start=2, stop=1),
                                 dict(kind="step", amplitude=-1),
                                 dict(kind="gaussian", amplitude=1, centre=1.0, width=0),
                                 dict(kind="sawtooth", amplitude=1)])
def test_invalid_pulses(bad):
    with pytest.raises(ConfigError):
        PulseSpec(**bad)


def test_signal_validation():
    g = Grid(n=5)
    with pytest.raises(GridError):
        ConcentrationSignal(g, np.zeros(4))
    with pytest.raises(ConfigError):
        ConcentrationSignal(g, [0, 1, np.nan, 0, 0])
    s = ConcentrationSignal(g, np.arange(5.0))
    with pytest.raises(ValueError):
        s.samples[0] = 3.0


@given(st.integers(0, 400), st.integers(1, 500), st.sampled_from([0.005, 0.01, 0.02]))
def test_rectangle_sample_count_on_grid(i, m, dt):
    g = Grid.span(20.0 + 1e-9, dt)
    s = generate(rect(1.0, i * dt, (i + m) * dt), g)
    assert np.count_nonzero(s.samples) == m == round(m * dt / dt)


@given(st.floats(0, 10), st.floats(0.01, 8), st.sampled_from([0.005, 0.01, 0.02]))
def test_rectangle_sample_count_off_grid(start, width, dt):
    g = Grid.span(20.0, dt)
    s = generate(rect(1.0, start, start + width), g)
    assert np.count_nonzero(s.samples) in (np.floor(width / dt - 1e-9), np.ceil(width / dt - 1e-9))


def _delta(dt):
    return TransferKernel(dt, np.array([1.0 / dt]), 0.0, 1.0, 1.0, 1.0)


def test_delta_kernel_is_identity(grid):
    f = generate(rect(3.0, 1, 2), grid)
    assert np.allclose(convolve(f, _delta(grid.dt)).samples, f.samples)


def test_convolution_grid_mismatch(grid):
    with pytest.raises(GridError):
        convolve(zeros(grid), _delta(0.01))


def _kernel(dt, width):
    t = dt * np.arange(int(width / dt) * 4)
    h = np.exp(-t / width) / width
    return TransferKernel(dt, h / (dt * h.sum()), 0.0, 1.0, 1.0, 1.0)


def test_convolution_preserves_mass(grid):
    f = generate(rect(8.0, 1, 3), grid)
    out = convolve(f, _kernel(grid.dt, 0.3))
    assert out.mass() == pytest.approx(f.mass(), rel=1e-3)


pulses = st.builds(lambda a, s, w: rect(a, s, s + w), st.floats(0.1, 10), st.floats(0, 8),
                   st.floats(0.05, 3))


@given(pulses, pulses, st.floats(0.1, 5), st.floats(0.1, 5))
def test_convolution_linear(p1, p2, a, b):
    g = Grid.span(15.0)
    f1, f2 = generate(p1, g), generate(p2, g)
    k = _kernel(g.dt, 0.2)
    lhs = convolve(combine([(a, f1), (b, f2)]), k).samples
    rhs = a * convolve(f1, k).samples + b * convolve(f2, k).samples
    assert np.allclose(lhs, rhs, atol=1e-9 * max(1, rhs.max()))


@given(pulses, st.integers(0, 200))
def test_convolution_shift_equivariant(pulse, lag):
    g = Grid.span(20.0)
    f = generate(pulse, g)
    k = _kernel(g.dt, 0.2)
    a = convolve(delay(f, lag * g.dt), k).samples
    b = delay(convolve(f, k), lag * g.dt).samples
    assert np.allclose(a, b, atol=1e-9 * max(1, b.max()))


def test_mass_bookkeeping(grid):
    f = generate(rect(2.0, 1, 2), grid)
    k = _kernel(grid.dt, 0.5)
    out = convolve(f, k)
    assert out.mass() == pytest.approx(f.mass() * k.dt * k.samples.sum(), rel=5e-3)


def test_algebra(grid):
    f = generate(rect(3.0, 1, 2), grid)
    assert np.array_equal(combine([(1.0, f)]).samples, f.samples)
    assert np.array_equal(delay(f, 0).samples, f.samples)
    assert np.allclose(combine([(0.5, f), (0.5, f)]).samples, f.samples)
    assert np.allclose((f + f).samples, (2 * f).samples)
    assert np.allclose(scale(f, 0.25).samples, f.samples / 4)
    assert pointwise_min(f, constant(1.0, grid)).peak() == 1.0


def test_delay_shifts_support(grid):
    f = generate(rect(3.0, 1, 2), grid)
    d = delay(f, 0.5)
    assert d.samples[299] == 0.0 and d.samples[300] == 3.0
    assert d.samples[499] == 3.0 and d.samples[500] == 0.0
    assert d.mass() == pytest.approx(f.mass())
    assert delay(f, 1e6).peak() == 0.0
    back = delay(f, -0.5)
    assert back.samples[99] == 0.0 and back.samples[100] == 3.0 and back.samples[300] == 0.0


def test_combine_grid_mismatch():
    with pytest.raises(GridError):
        combine([(1.0, zeros(Grid())), (1.0, zeros(Grid(n=10)))])


def test_csv_round_trip(grid):
    f = generate(rect(1 / 3, 1, 2), grid, "a")
    h = generate(step(np.pi, 0.5), grid, "b")
    back = from_csv(to_csv([f, h]))
    assert [s.name for s in back] == ["a", "b"]
    assert np.array_equal(back[0].samples, f.samples) and np.array_equal(back[1].samples, h.samples)
    assert back[0].grid.n == grid.n and back[0].dt == grid.dt
