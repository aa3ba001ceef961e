"""Time-series diagnostics: bubble/crash statistics and Bollinger bands.

A step is a bubble when the mean asset value exceeds W + R and a crash
when it falls below W - R. The Bollinger machinery uses the trailing
n-sample moving average

    M_n(t_k) = (1/n) sum_{l=1..n} m_w(t_{k-l})

and the corrected sample standard deviation evaluated against the
moving averages at the lagged times,

    sigma(t_k) = sqrt( (1/(n-1)) sum_{l=1..n}
                       (m_w(t_{k-l}) - M_n(t_{k-l}))^2 ),

with bands R+- = M_n +- k sigma. Lagged averages inside the first
window, where no full trailing window exists yet, are averages over
the samples available so far (M_n(t_0) = m_w(t_0)); emitted bands
start only after a full warm-up of n samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    STATE_BUBBLE,
    STATE_CRASH,
    STATE_NORMAL,
    Scenario,
    TimeSeries,
    background_W,
)


def classify(m_w: float, W: float, R: float) -> str:
    """Bubble above W + R, crash below W - R, normal in between
    (band boundaries included)."""
    if not R > 0:
        raise ValueError("classify: R must be > 0")
    if m_w > W + R:
        return STATE_BUBBLE
    if m_w < W - R:
        return STATE_CRASH
    return STATE_NORMAL


def bubble_crash_percentages(series: TimeSeries, scenario: Scenario,
                             R: float) -> tuple[float, float]:
    """Percentage of steps classified bubble and crash."""
    if len(series) == 0:
        raise ValueError("bubble_crash_percentages: empty series")
    n_b = n_c = 0
    for rec in series:
        W = background_W(rec.t, scenario)
        state = classify(rec.m_w, W, R)
        if state == STATE_BUBBLE:
            n_b += 1
        elif state == STATE_CRASH:
            n_c += 1
    n = len(series)
    return 100.0 * n_b / n, 100.0 * n_c / n


@dataclass(frozen=True)
class BollingerBands:
    """Per-step band records starting after the n-sample warm-up."""

    t: np.ndarray
    m_w: np.ndarray          # the series value at each band time
    moving_avg: np.ndarray
    sigma: np.ndarray
    r_plus: np.ndarray
    r_minus: np.ndarray
    window: int
    width_factor: float

    def __len__(self):
        return len(self.t)


def _lagged_moving_average(m, n):
    """Trailing average of the previous n samples at every index,
    partial inside the first window, M[0] = m[0]."""
    csum = np.concatenate([[0.0], np.cumsum(m)])
    idx = np.arange(len(m))
    lo = np.maximum(idx - n, 0)
    counts = np.maximum(idx - lo, 1)
    avg = (csum[idx] - csum[lo]) / counts
    avg[0] = m[0]
    return avg


def bollinger(series: TimeSeries, n: int = 30, k: float = 2.0,
              textbook_sigma: bool = False) -> BollingerBands:
    """Bollinger bands of the mean-asset-value series.

    textbook_sigma switches the deviation sum to use the single
    current moving average instead of the lagged ones.
    """
    if n < 2:
        raise ValueError("bollinger: window must be >= 2")
    if not k > 0:
        raise ValueError("bollinger: width factor must be > 0")
    m = series.m_w()
    t = series.times()
    if len(m) <= n:
        raise ValueError(f"bollinger: series length {len(m)} needs > {n} samples")
    avg = _lagged_moving_average(m, n)
    dev = m - avg                              # m(t_j) - M_n(t_j), all j
    out_idx = np.arange(n, len(m))
    if textbook_sigma:
        var = np.empty(len(out_idx))
        for a, kk in enumerate(out_idx):
            win = m[kk - n:kk]
            var[a] = np.sum((win - avg[kk]) ** 2) / (n - 1)
    else:
        dev2 = dev ** 2
        csum = np.concatenate([[0.0], np.cumsum(dev2)])
        var = (csum[out_idx] - csum[out_idx - n]) / (n - 1)
    sigma = np.sqrt(var)
    mid = avg[out_idx]
    return BollingerBands(
        t=t[out_idx], m_w=m[out_idx], moving_avg=mid, sigma=sigma,
        r_plus=mid + k * sigma, r_minus=mid - k * sigma,
        window=n, width_factor=k,
    )


def bandwidth(bands: BollingerBands, scenario: Scenario) -> np.ndarray:
    """Relative band spread B(t) = 100 (R+ - R-) / W(t) per record."""
    W = np.array([scenario.background(t) for t in bands.t], dtype=float)
    if np.any(W == 0.0):
        raise ValueError("bandwidth: W(t) = 0 in the band range")
    return 100.0 * (bands.r_plus - bands.r_minus) / W
