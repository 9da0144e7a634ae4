import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from landanneal.errors import ConfigError
from landanneal.schedules import (
    AdaptiveC,
    CoolingSchedule,
    RunMinHistory,
    StepSchedule,
    c_next,
    energy_level_at,
    epsilon_at,
    mollified_runmin,
    mollifier_normaliser,
    mollifier_phi,
    step_at,
)


def bump(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    out[inside] = np.exp(1.0 / (x[inside] ** 2 - 1.0))
    return out


def trapezoid_z(h=1e-5):
    xs = np.arange(-1.0, 1.0 + h / 2, h)
    return np.trapezoid(bump(xs), xs) if hasattr(np, "trapezoid") else np.trapz(bump(xs), xs)


Z_ORACLE = trapezoid_z()


def riemann_oracle(hist, n, lag, t, points=100_000):
    """Midpoint sum of M((u - lag/n)_+) * n*phi(n(t-u)) over the kernel support."""
    width = 2.0 / n
    u = t - 1.0 / n + (np.arange(points) + 0.5) * width / points
    lagged = np.maximum(u - lag / n, 0.0)
    times = np.asarray(hist.times)
    idx = np.maximum(np.searchsorted(times, lagged, side="right") - 1, 0)
    m = np.asarray(hist.values)[idx]
    k = n * bump(n * (t - u)) / Z_ORACLE
    return float(np.sum(m * k) * width / points)


def step_history():
    h = RunMinHistory()
    h.append(0.0, 5.0)
    h.append(1.0, 2.0)
    return h


class TestStepSchedule:
    def test_examples(self):
        s = StepSchedule(0.05, 1000, 0.999)
        assert step_at(s, 0) == 0.05
        assert step_at(s, 999) == 0.05
        assert step_at(s, 2000) == pytest.approx(0.04990005, abs=1e-15)

    def test_thetas_are_cumulative(self):
        s = StepSchedule(0.5, 3, 0.5)
        np.testing.assert_allclose(s.thetas(7), np.cumsum([s.at(k) for k in range(7)]))

    @given(st.floats(1e-4, 10), st.integers(1, 50), st.floats(0.5, 1.0))
    def test_non_increasing(self, eta0, every, factor):
        s = StepSchedule(eta0, every, factor)
        etas = [s.at(k) for k in range(0, 500, 7)]
        assert all(e > 0 for e in etas)
        assert all(a >= b for a, b in zip(etas, etas[1:]))

    @pytest.mark.parametrize("args", [(0.0, 1, 0.5), (0.1, 0, 0.5), (0.1, 1, 1.5), (0.1, 1, 0.0)])
    def test_rejects(self, args):
        with pytest.raises(ValueError):
            StepSchedule(*args)


class TestCooling:
    def test_examples(self):
        fixed = CoolingSchedule.fixed(2.0)
        assert epsilon_at(fixed, 0.05) == pytest.approx(2 / math.log(2.05), abs=1e-14)
        assert epsilon_at(fixed, 0.05) == pytest.approx(2.7862, abs=1e-4)
        assert epsilon_at(fixed, math.e**2 - 2) == pytest.approx(1.0, abs=1e-14)
        assert epsilon_at(CoolingSchedule.fixed(0.5), 0.0) == pytest.approx(0.7213, abs=1e-4)

    def test_adaptive_uses_override(self):
        c = CoolingSchedule.adaptive(0.5, 10)
        assert epsilon_at(c, 3.0, 1.5) == pytest.approx(1.5 / math.log(5.0))
        with pytest.raises(ValueError):
            epsilon_at(c, 3.0)

    def test_theta_too_small(self):
        with pytest.raises(ValueError):
            epsilon_at(CoolingSchedule.fixed(1.0, offset=1.0), 0.0)

    def test_offset_below_one_rejected(self):
        with pytest.raises(ConfigError):
            CoolingSchedule.fixed(1.0, offset=0.5)

    def test_monotone(self):
        c = CoolingSchedule.fixed(2.0)
        eps = [epsilon_at(c, t) for t in np.linspace(0, 1e4, 200)]
        assert all(a >= b for a, b in zip(eps, eps[1:]))

    @pytest.mark.parametrize("text", ["fixed:2:2", "fixed:0.5", "adaptive:0.5:10", "constant:0.3"])
    def test_parse_round_trip(self, text):
        assert CoolingSchedule.parse(str(CoolingSchedule.parse(text))) == CoolingSchedule.parse(text)

    @pytest.mark.parametrize("text", ["fixed", "fixed:-1", "adaptive:0.5", "log:2"])
    def test_parse_rejects(self, text):
        with pytest.raises(ConfigError):
            CoolingSchedule.parse(text)


class TestAdaptiveC:
    def test_examples(self):
        a = AdaptiveC.appendix()
        assert c_next(a, 3.0, 0.0) == 4.0
        assert c_next(a, 3.0, 9.0) == pytest.approx(3.1, abs=1e-15)
        assert c_next(AdaptiveC.fixed(-1.5), 10.0, 123.0) == -1.5

    @given(st.floats(-100, 100), st.floats(0, 1e8))
    def test_appendix_above_runmin(self, m, theta):
        c = c_next(AdaptiveC.appendix(), m, theta)
        assert c > m or theta > 1e15
        assert c - m <= 1.0

    def test_appendix_converges(self):
        assert c_next(AdaptiveC.appendix(), 1.0, 1e12) == pytest.approx(1.0, abs=1e-11)

    def test_mollified_delegates(self):
        h = step_history()
        a = AdaptiveC.mollified(10, 0.1)
        assert c_next(a, None, 1.13, h) == mollified_runmin(h, 10, 1, 1.13)
        with pytest.raises(ValueError):
            c_next(a, 2.0, 1.0)

    @pytest.mark.parametrize("text", ["fixed:-1.5", "appendix", "mollified:10:0.1"])
    def test_parse_round_trip(self, text):
        assert AdaptiveC.parse(str(AdaptiveC.parse(text))) == AdaptiveC.parse(text)

    @pytest.mark.parametrize("text", ["fixed", "mollified:0:0", "mollified:3:-1", "sometimes"])
    def test_parse_rejects(self, text):
        with pytest.raises(ConfigError):
            AdaptiveC.parse(text)


class TestRunMinHistory:
    def test_append_only_on_decrease(self):
        h = RunMinHistory()
        h.append(0.0, 3.0)
        h.append(1.0, 3.0)
        h.append(2.0, 4.0)
        h.append(3.0, 1.0)
        assert h.times == [0.0, 3.0]
        assert h.values == [3.0, 1.0]

    def test_right_continuous(self):
        h = step_history()
        assert h.at(0.999) == 5.0
        assert h.at(1.0) == 2.0
        assert h.at(-1.0) == 5.0
        assert h.at(50.0) == 2.0

    def test_empty(self):
        with pytest.raises(ValueError):
            RunMinHistory().at(0.0)
        with pytest.raises(ValueError):
            mollified_runmin(RunMinHistory(), 10, 1, 1.0)


class TestMollifier:
    def test_support(self):
        assert mollifier_phi(1.5) == 0.0
        assert mollifier_phi(-1.0) == 0.0
        assert mollifier_phi(0.0) == pytest.approx(math.exp(-1) / mollifier_normaliser(), rel=1e-15)

    def test_integrates_to_one(self):
        h = 1e-5
        xs = np.arange(-1.0, 1.0 + h / 2, h)
        vals = np.array([mollifier_phi(x) for x in xs])
        integral = h * (vals.sum() - 0.5 * (vals[0] + vals[-1]))
        assert integral == pytest.approx(1.0, abs=1e-6)
        assert mollifier_normaliser() == pytest.approx(Z_ORACLE, rel=1e-8)

    def test_constant_history(self):
        h = RunMinHistory()
        h.append(0.0, 1.7)
        for t in (0.0, 0.05, 3.0):
            assert mollified_runmin(h, 10, 1, t) == pytest.approx(1.7, abs=1e-12)

    def test_step_history_exact_points(self):
        h = step_history()
        # whole kernel window lags behind the jump
        assert mollified_runmin(h, 10, 1, 1.0) == pytest.approx(5.0, abs=1e-12)
        # jump at the kernel's centre: symmetric split
        assert mollified_runmin(h, 10, 1, 1.1) == pytest.approx(3.5, abs=1e-9)
        assert mollified_runmin(h, 10, 1, 1.2) == pytest.approx(2.0, abs=1e-12)

    @pytest.mark.parametrize("t", [1.03, 1.1, 1.13, 1.17])
    def test_step_history_riemann_oracle(self, t):
        h = step_history()
        value = mollified_runmin(h, 10, 1, t)
        assert 2.0 < value < 5.0
        assert value == pytest.approx(riemann_oracle(h, 10, 1, t), abs=1e-6)

    def test_multi_jump_riemann_oracle(self):
        h = RunMinHistory()
        for t, v in [(0.0, 4.0), (0.31, 3.2), (0.34, 2.5), (0.38, 2.4), (0.52, 1.0)]:
            h.append(t, v)
        for t in np.linspace(0.0, 0.8, 17):
            assert mollified_runmin(h, 7, 1, t) == pytest.approx(riemann_oracle(h, 7, 1, t), abs=1e-6)
            assert mollified_runmin(h, 7, 3, t) == pytest.approx(riemann_oracle(h, 7, 3, t), abs=1e-6)

    def test_non_increasing_in_t(self):
        h = RunMinHistory()
        for t, v in [(0.0, 4.0), (0.2, 3.0), (0.25, 1.0), (0.9, 0.5)]:
            h.append(t, v)
        vals = [mollified_runmin(h, 5, 1, t) for t in np.linspace(0, 2, 201)]
        assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))


class TestEnergyLevel:
    def test_constant_histories(self):
        h = RunMinHistory()
        h.append(0.0, -1.0)
        assert energy_level_at(h, 10, 0.5, -1.0, 2.0) == pytest.approx(0.5, abs=1e-12)
        h2 = RunMinHistory()
        h2.append(0.0, 0.0)
        assert energy_level_at(h2, 10, 0.5, -1.0, 2.0) == pytest.approx(1.5, abs=1e-12)

    def test_step_history_oracle(self):
        h = step_history()
        for t in (1.2, 1.3, 1.35):
            assert energy_level_at(h, 10, 0.5, 0.0, t) == pytest.approx(riemann_oracle(h, 10, 3, t) + 0.5, abs=1e-6)

    def test_gap_to_c_on_constant_history(self):
        h = RunMinHistory()
        h.append(0.0, 0.7)
        delta1, delta2 = 0.1, 0.4
        for t in (0.0, 0.5, 4.0):
            gap = energy_level_at(h, 10, delta2, 0.0, t) - mollified_runmin(h, 10, 1, t)
            assert gap >= delta2 - delta1 - 1e-12

    def test_rejects_nonpositive_delta2(self):
        with pytest.raises(ValueError):
            energy_level_at(step_history(), 10, 0.0, 0.0, 1.0)


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.floats(0.001, 0.5), min_size=1, max_size=8),
    st.lists(st.floats(0.01, 2.0), min_size=8, max_size=8),
    st.integers(1, 20),
    st.floats(0.0, 3.0),
)
def test_sandwich_property(gaps, drops, n, t):
    h = RunMinHistory()
    time, value = 0.0, 10.0
    h.append(time, value)
    for g, d in zip(gaps, drops):
        time += g
        value -= d
        h.append(time, value)
    c = mollified_runmin(h, n, 1, t)
    upper = h.at(max(t - 2.0 / n, 0.0))
    assert h.at(t) - 1e-12 <= c <= upper + 1e-12
