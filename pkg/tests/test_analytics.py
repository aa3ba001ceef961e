import math

import numpy as np
import pytest

from kinmarket.analytics import (
    BollingerBands,
    bandwidth,
    bollinger,
    bubble_crash_percentages,
    classify,
)
from kinmarket.core import (
    ConstantBackground,
    PiecewiseBackground,
    Record,
    Scenario,
    TimeSeries,
)


def series_from(values, dt=1.0):
    ts = TimeSeries()
    for i, v in enumerate(values):
        ts.append(Record(t=i * dt + dt, m_w=float(v), m_x=0.0, V_w=0.0,
                         mass=1.0, state="Normal"))
    return ts


def brute_force_bands(values, n, k):
    """Loop evaluation of the band formulas, matching the stated
    partial-window convention for the first n lagged averages."""
    m = list(map(float, values))

    def avg(j):
        if j == 0:
            return m[0]
        lo = max(j - n, 0)
        window = m[lo:j]
        return sum(window) / len(window)

    rows = []
    for kk in range(n, len(m)):
        mid = avg(kk)
        var = sum((m[kk - l] - avg(kk - l)) ** 2 for l in range(1, n + 1)) \
            / (n - 1)
        sig = math.sqrt(var)
        rows.append((mid, sig, mid + k * sig, mid - k * sig))
    return rows


class TestClassify:
    def test_examples(self):
        assert classify(0.53, 0.5, 0.025) == "Bubble"
        assert classify(0.47, 0.5, 0.025) == "Crash"
        assert classify(0.51, 0.5, 0.025) == "Normal"

    def test_boundaries_are_normal(self):
        assert classify(0.525, 0.5, 0.025) == "Normal"
        assert classify(0.475, 0.5, 0.025) == "Normal"

    def test_monotone_in_mean(self):
        order = {"Crash": 0, "Normal": 1, "Bubble": 2}
        labels = [order[classify(m, 0.5, 0.025)]
                  for m in np.linspace(0.3, 0.7, 101)]
        assert all(b >= a for a, b in zip(labels, labels[1:]))

    def test_requires_positive_R(self):
        with pytest.raises(ValueError):
            classify(0.5, 0.5, 0.0)


class TestPercentages:
    def scen(self):
        return Scenario(background=ConstantBackground(0.5), horizon=200.0,
                        dt=1.0)

    def test_all_inside(self):
        s = series_from([0.5] * 50)
        assert bubble_crash_percentages(s, self.scen(), 0.025) == (0.0, 0.0)

    def test_all_above(self):
        s = series_from([0.9] * 50)
        assert bubble_crash_percentages(s, self.scen(), 0.025) == (100.0, 0.0)

    def test_mixed_counts(self):
        vals = [0.6] * 30 + [0.4] * 10 + [0.5] * 60
        s = series_from(vals)
        pb, pc = bubble_crash_percentages(s, self.scen(), 0.025)
        assert pb == pytest.approx(30.0)
        assert pc == pytest.approx(10.0)
        # bubble + crash + normal = 100
        assert pb + pc + 60.0 == pytest.approx(100.0)

    def test_empty_series_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            bubble_crash_percentages(TimeSeries(), self.scen(), 0.025)


class TestBollinger:
    def test_constant_series_zero_width(self):
        s = series_from([0.42] * 100)
        b = bollinger(s, n=30, k=2.0)
        assert np.allclose(b.sigma, 0.0)
        assert np.allclose(b.r_plus, 0.42)
        assert np.allclose(b.r_minus, 0.42)
        assert len(b) == 70

    def test_alternating_series_symmetric(self):
        vals = [0.5 + 0.1 * (-1) ** i for i in range(80)]
        b = bollinger(series_from(vals), n=30, k=2.0)
        assert np.all(b.sigma > 0)
        assert np.allclose(b.r_plus + b.r_minus, 2 * b.moving_avg)

    def test_linear_ramp_moving_average(self):
        h = 0.01
        vals = [h * i for i in range(40)]
        b = bollinger(series_from(vals), n=3, k=2.0)
        # trailing 3-average of a ramp lags by two steps
        expect = [(kk - 2) * h for kk in range(3, 40)]
        assert np.allclose(b.moving_avg, expect, atol=1e-15)
        # beyond the warm-up of the lagged averages the deviation is
        # exactly 2h, so sigma = h sqrt(6)
        assert np.allclose(b.sigma[3:], h * math.sqrt(6.0), atol=1e-14)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(12)
        vals = 0.5 + 0.05 * rng.standard_normal(200)
        n, k = 30, 2.0
        b = bollinger(series_from(vals), n=n, k=k)
        rows = brute_force_bands(vals, n, k)
        assert np.allclose(b.moving_avg, [r[0] for r in rows], atol=1e-12)
        assert np.allclose(b.sigma, [r[1] for r in rows], atol=1e-12)
        assert np.allclose(b.r_plus, [r[2] for r in rows], atol=1e-12)
        assert np.allclose(b.r_minus, [r[3] for r in rows], atol=1e-12)

    def test_textbook_variant_differs(self):
        rng = np.random.default_rng(5)
        vals = 0.5 + 0.05 * rng.standard_normal(120)
        s = series_from(vals)
        lagged = bollinger(s, n=30, k=2.0)
        textbook = bollinger(s, n=30, k=2.0, textbook_sigma=True)
        assert not np.allclose(lagged.sigma, textbook.sigma)

    def test_too_short_series_rejected(self):
        with pytest.raises(ValueError, match="length"):
            bollinger(series_from([0.5] * 30), n=30, k=2.0)

    def test_band_ordering_invariant(self):
        rng = np.random.default_rng(9)
        vals = 0.5 + 0.2 * rng.random(150)
        b = bollinger(series_from(vals), n=10, k=1.5)
        assert np.all(b.r_plus >= b.moving_avg)
        assert np.all(b.moving_avg >= b.r_minus)
        assert np.all(b.sigma >= 0)


class TestBandwidth:
    def scen(self, W=0.5):
        return Scenario(background=ConstantBackground(W), horizon=1e4,
                        dt=1.0)

    def test_zero_sigma_zero_bandwidth(self):
        b = bollinger(series_from([0.4] * 60), n=30, k=2.0)
        assert np.allclose(bandwidth(b, self.scen()), 0.0)

    def test_linear_in_width_factor(self):
        rng = np.random.default_rng(3)
        vals = 0.5 + 0.1 * rng.random(90)
        s = series_from(vals)
        b1 = bandwidth(bollinger(s, n=20, k=2.0), self.scen())
        b2 = bandwidth(bollinger(s, n=20, k=4.0), self.scen())
        assert np.allclose(b2, 2.0 * b1)

    def test_not_shift_invariant(self):
        # B = 100 (r+ - r-) / W(t) must notice a common shift of the
        # band levels and W; only the zero shift leaves it unchanged
        rng = np.random.default_rng(7)
        vals = 0.5 + 0.1 * rng.random(60)
        b = bollinger(series_from(vals), n=20, k=2.0)
        base = bandwidth(b, self.scen(W=0.5))
        shifted = bandwidth(b, self.scen(W=0.7))
        assert not np.allclose(base, shifted)
        again = bandwidth(b, self.scen(W=0.5))
        assert np.allclose(base, again)

    def test_jump_scenario_peaks_after_drop(self):
        # W drops at t = 100: the tracking series swings, sigma spikes
        # within one window of the jump
        scen = Scenario(
            background=PiecewiseBackground(((0.0, 0.6), (100.0, 0.4))),
            horizon=300.0, dt=1.0)
        vals = []
        m = 0.6
        for i in range(300):
            t = i + 1.0
            target = 0.6 if t < 100.0 else 0.4
            m += 0.5 * (target - m)
            vals.append(m)
        b = bollinger(series_from(vals), n=30, k=2.0)
        bw = bandwidth(b, scen)
        t_peak = b.t[np.argmax(bw)]
        assert 100.0 <= t_peak <= 135.0
