"""Domain types, model functions and grid/moment primitives.

Agents carry a rationality x (x > 0 rational, x < 0 irrational) and an
estimated asset value w. The population is represented by cell-averaged
densities on a uniform (x, w) grid. Everything here is shared by the
collision engine, the transport step and the Fokker-Planck solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

MASS_TOL = 1e-8  # normalization tolerance for background densities


# ---------------------------------------------------------------------------
# Noise
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NoiseModel:
    """Zero-mean diffusion noise attached to every interaction.

    kind "two-point" draws +-amplitude with equal probability, kind
    "truncated-gaussian" draws N(0, amplitude^2). Out-of-range
    post-interaction values are handled by event rejection in the
    collision engine, never by clamping the samples here.
    """

    kind: str = "two-point"
    amplitude: float = 0.06

    def __post_init__(self):
        if self.kind not in ("two-point", "truncated-gaussian"):
            raise ValueError(f"noise.kind: unknown kind {self.kind!r}")
        if not self.amplitude >= 0:  # zero turns the noise off
            raise ValueError("noise.amplitude: must be >= 0")

    @property
    def variance(self) -> float:
        return self.amplitude ** 2

    def sample(self, rng: np.random.Generator, size=None):
        if self.kind == "two-point":
            signs = np.where(rng.random(size) < 0.5, 1.0, -1.0)
            return self.amplitude * signs
        return rng.normal(0.0, self.amplitude, size)


# ---------------------------------------------------------------------------
# Model parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelParams:
    """Constants and function selectors of the interaction model.

    alpha   strength of the pull toward the public value, in [0, 1]
    beta    herding strength, in (0, 1/2]
    delta   multiplier of the irrational drift inside the no-bubble band
    kappa   drift magnitude in rationality
    band_R  half-width of the band |w - W| < R where agents turn irrational
    tau_I, tau_H  interaction time scales of the two collision channels
    """

    alpha: float = 0.5
    beta: float = 0.25
    delta: float = 1.0
    kappa: float = 1.0
    band_R: float = 0.025
    tau_I: float = 1.0
    tau_H: float = 1.0
    noise: NoiseModel = field(default_factory=NoiseModel)
    p_kind: str = "constant"          # "constant" | "indicator"
    p_radius: float | None = None     # radius r of the indicator selector
    gamma_kind: str = "indicator-product"  # | "distance-indicator"
    gamma_radius: float | None = None      # radius r_H of the distance kernel
    d_scale: float = 1.0              # d(w) = d_scale * 4 w (1 - w)
    rule_thresholds: tuple[float, float] = (0.4, 0.6)
    swap_rules: bool = False

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha: must lie in [0, 1]")
        if not 0.0 < self.beta <= 0.5:
            raise ValueError("beta: must lie in (0, 1/2]")
        for name in ("delta", "kappa", "band_R", "tau_I", "tau_H"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name}: must be > 0")
        lo, hi = self.rule_thresholds
        if not 0.0 <= lo <= hi <= 1.0:
            raise ValueError("rule_thresholds: need 0 <= lower <= upper <= 1")
        if self.p_kind not in ("constant", "indicator"):
            raise ValueError(f"p_kind: unknown selector {self.p_kind!r}")
        if self.p_kind == "indicator" and not (self.p_radius or 0) > 0:
            raise ValueError("p_radius: indicator selector needs a radius > 0")
        if self.gamma_kind not in ("indicator-product", "distance-indicator"):
            raise ValueError(f"gamma_kind: unknown selector {self.gamma_kind!r}")
        if self.gamma_kind == "distance-indicator" and not (self.gamma_radius or 0) > 0:
            raise ValueError("gamma_radius: distance kernel needs a radius > 0")

    def with_(self, **kw) -> "ModelParams":
        return replace(self, **kw)


# ---------------------------------------------------------------------------
# Grid
# ---------------------------------------------------------------------------

class DistributionGrid:
    """Cell-averaged agent density on a uniform (x, w) grid.

    values[i, j] is the density in the cell centered at
    (x_min + (i + 1/2) dx, w_min + (j + 1/2) dw). Densities are
    nonnegative; the mass of a cell is value * dx * dw.
    """

    def __init__(self, n_x, n_w, x_min=-1.0, x_max=1.0, w_min=0.0, w_max=1.0,
                 values=None):
        if n_x < 1 or n_w < 1:
            raise ValueError("grid: n_x and n_w must be >= 1")
        if not (x_max > x_min and w_max > w_min):
            raise ValueError("grid: bounds must satisfy x_max > x_min, w_max > w_min")
        self.n_x = int(n_x)
        self.n_w = int(n_w)
        self.x_min, self.x_max = float(x_min), float(x_max)
        self.w_min, self.w_max = float(w_min), float(w_max)
        self.dx = (self.x_max - self.x_min) / self.n_x
        self.dw = (self.w_max - self.w_min) / self.n_w
        if values is None:
            self.values = np.zeros((self.n_x, self.n_w))
        else:
            values = np.asarray(values, dtype=float)
            if values.shape != (self.n_x, self.n_w):
                raise ValueError("grid: values shape mismatch")
            if np.any(values < 0):
                raise ValueError("grid: negative density")
            if not np.all(np.isfinite(values)):
                raise ValueError("grid: non-finite density")
            self.values = values.copy()
        self.x_centers = self.x_min + (np.arange(self.n_x) + 0.5) * self.dx
        self.w_centers = self.w_min + (np.arange(self.n_w) + 0.5) * self.dw

    @property
    def cell_area(self) -> float:
        return self.dx * self.dw

    def copy(self) -> "DistributionGrid":
        return DistributionGrid(self.n_x, self.n_w, self.x_min, self.x_max,
                                self.w_min, self.w_max, self.values)

    def w_cell_index(self, w: float) -> int:
        j = int((w - self.w_min) / self.dw)
        return min(max(j, 0), self.n_w - 1)

    def x_cell_index(self, x: float) -> int:
        i = int((x - self.x_min) / self.dx)
        return min(max(i, 0), self.n_x - 1)


# ---------------------------------------------------------------------------
# Scenario: background value W(t), horizon, seeding
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantBackground:
    value: float

    def __call__(self, t):
        return self.value


@dataclass(frozen=True)
class SinExpBackground:
    """W(t) = c0 + c1 (sin(omega t) + exp(rate t) / 2)."""

    c0: float
    c1: float
    omega: float
    rate: float

    def __call__(self, t):
        return self.c0 + self.c1 * (math.sin(self.omega * t)
                                    + 0.5 * math.exp(self.rate * t))


@dataclass(frozen=True)
class PiecewiseBackground:
    """Right-continuous step function through (t, W) breakpoints."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        ts = [t for t, _ in self.points]
        if not ts or ts[0] != 0.0:
            raise ValueError("piecewise background: first breakpoint must be at t=0")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("piecewise background: breakpoints must increase")

    def __call__(self, t):
        value = self.points[0][1]
        for tb, wb in self.points:
            if tb <= t:
                value = wb
            else:
                break
        return value


@dataclass(frozen=True)
class Scenario:
    """Time-dependent background plus run horizon and seeding."""

    background: object = ConstantBackground(0.5)
    horizon: float = 0.5
    dt: float = 1e-5
    seed: int = 0
    ensemble: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt: must be > 0")
        if self.horizon < 0:
            raise ValueError("horizon: must be >= 0")
        if self.horizon and self.horizon < self.dt:
            raise ValueError("horizon: must be >= dt (or 0)")
        if self.ensemble < 1:
            raise ValueError("ensemble: must be >= 1")


def background_W(t, scenario: Scenario, w_min=0.0, w_max=1.0) -> float:
    """Evaluate the background value W(t) of a scenario.

    Raises if the value leaves the open interval (w_min, w_max); the
    model has no meaning for a public value outside the asset range.
    """
    w = float(scenario.background(t))
    if not (w_min < w < w_max):
        raise ValueError(
            f"background W({t}) = {w} outside ({w_min}, {w_max})")
    return w


# ---------------------------------------------------------------------------
# Time series records
# ---------------------------------------------------------------------------

STATE_NORMAL = "Normal"
STATE_BUBBLE = "Bubble"
STATE_CRASH = "Crash"


@dataclass(frozen=True)
class Record:
    t: float
    m_w: float
    m_x: float
    V_w: float
    mass: float
    state: str


class TimeSeries:
    """Ordered per-step records of a run."""

    def __init__(self, records=()):
        self.records: list[Record] = list(records)

    def append(self, record: Record):
        if self.records and record.t <= self.records[-1].t:
            raise ValueError("time series: times must strictly increase")
        if not record.mass > 0:
            raise ValueError("time series: mass must be positive")
        self.records.append(record)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def times(self):
        return np.array([r.t for r in self.records])

    def m_w(self):
        return np.array([r.m_w for r in self.records])


# ---------------------------------------------------------------------------
# Model functions
# ---------------------------------------------------------------------------

def drift_phi(x, w, W, p: ModelParams):
    """Drift velocity in rationality.

    -delta*kappa inside the band |w - W| < R (agents turn irrational
    near the public value), +kappa outside. Independent of x.
    """
    inside = np.abs(np.asarray(w) - W) < p.band_R
    out = np.where(inside, -p.delta * p.kappa, p.kappa)
    return out if out.ndim else float(out)


def compromise_P(dist, p: ModelParams):
    """Compromise propensity weight in [0, 1] as a function of |w - W|."""
    dist = np.asarray(dist)
    if p.p_kind == "constant":
        out = np.ones_like(dist, dtype=float)
    else:
        out = (dist < p.p_radius).astype(float)
    return out if out.ndim else float(out)


def diffusion_d(w, d_scale=1.0):
    """Diffusion amplitude d(w) = d_scale * 4 w (1 - w).

    Vanishes at w = 0 and w = 1 so noise cannot push agents through
    the ends of the unit asset range.
    """
    w = np.asarray(w)
    out = d_scale * 4.0 * w * (1.0 - w)
    return out if out.ndim else float(out)


def herding_gamma(v, w, p: ModelParams):
    """Herding confidence kernel in [0, 1] for a pair (own w, partner v).

    The default product kernel 1_{w < v} * v * (1 - w) makes agents
    with a low asset value herd toward partners with a higher one and
    never lowers confidence spontaneously; the distance kernel
    1_{|w - v| < r_H} restricts herding to similar valuations.
    """
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if p.gamma_kind == "indicator-product":
        out = np.where(w < v, v * (1.0 - w), 0.0)
    else:
        out = (np.abs(w - v) < p.gamma_radius).astype(float)
    return out if out.ndim else float(out)


def H_of_w(w, background, p: ModelParams):
    """Averaged compromise drift H(w) = (1/tau_I) int P(|w-W|)(w-W) M(W) dW.

    The background M is either a point mass (a plain float W) or a
    density given as a (nodes, values) pair integrated by the
    trapezoid rule. Densities must integrate to 1 within 1e-8.
    """
    if np.isscalar(background) or isinstance(background, float):
        W = float(background)
        return float(compromise_P(abs(w - W), p) * (w - W) / p.tau_I)
    nodes, values = background
    nodes = np.asarray(nodes, dtype=float)
    values = np.asarray(values, dtype=float)
    mass = np.trapezoid(values, nodes)
    if abs(mass - 1.0) > MASS_TOL:
        raise ValueError(f"background density not normalized: mass = {mass}")
    integrand = compromise_P(np.abs(w - nodes), p) * (w - nodes) * values
    return float(np.trapezoid(integrand, nodes) / p.tau_I)


# ---------------------------------------------------------------------------
# Grid primitives
# ---------------------------------------------------------------------------

def total_mass(grid: DistributionGrid) -> float:
    """Total number of agents: sum of cell density times cell area."""
    return float(grid.values.sum()) * grid.cell_area


def moments(grid: DistributionGrid, W: float):
    """Midpoint-rule moments (m_w, m_x, V_w) of the density.

    m_w and m_x are the raw first moments (they scale with the total
    mass); V_w is the second moment of (w - W) about the supplied
    background value.
    """
    area = grid.cell_area
    col_mass = grid.values.sum(axis=0) * area   # per w column
    row_mass = grid.values.sum(axis=1) * area   # per x row
    m_w = float(col_mass @ grid.w_centers)
    m_x = float(row_mass @ grid.x_centers)
    V_w = float(col_mass @ (grid.w_centers - W) ** 2)
    return m_w, m_x, V_w


def rational_fraction(grid: DistributionGrid, j: int) -> float:
    """Fraction of the mass in w-column j carried by rational agents.

    Cells whose center satisfies x >= 0 count as rational. An empty
    column carries no information and reports the neutral value 0.5.
    """
    col = grid.values[:, j]
    total = col.sum()
    if total <= 0.0:
        return 0.5
    rational = col[grid.x_centers >= 0.0].sum()
    return float(rational / total)


def deposit_mass(grid: DistributionGrid, x, w_star, m) -> DistributionGrid:
    """Deposit mass m at (x, w_star), splitting it between the two
    w-cells whose centers bracket w_star with linear weights.

    Positions at a cell center, or in the half-cell next to a
    boundary, put everything into the single nearest cell. The grid
    mass grows by exactly m.
    """
    if m < 0:
        raise ValueError("deposit_mass: mass must be >= 0")
    if not (grid.w_min <= w_star <= grid.w_max):
        raise ValueError(f"deposit_mass: w_star = {w_star} outside "
                         f"[{grid.w_min}, {grid.w_max}]")
    i = grid.x_cell_index(x)
    s = (w_star - grid.w_min) / grid.dw - 0.5   # position in center units
    if s <= 0.0:
        j0, frac = 0, 0.0
    elif s >= grid.n_w - 1:
        j0, frac = grid.n_w - 1, 0.0
    else:
        j0 = int(s)
        frac = s - j0
    dens = m / grid.cell_area
    upper = dens * frac
    grid.values[i, j0] += dens - upper
    if upper:
        grid.values[i, j0 + 1] += upper
    return grid
