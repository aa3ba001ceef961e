"""Stochastic collision step for the two interaction channels.

Interactions are simulated with an event-sampling scheme in the spirit
of Bird's method, adapted to a density-on-grid state: each event
withdraws a small mass quantum from its source cell(s), applies the
interaction rule to the cell-center values and redeposits the quantum
with linear interpolation between the bracketing w-cells. Events whose
post-interaction value would leave the asset range are rejected whole,
which keeps the mass exactly conserved and the support confined.

Event budget. Over one interaction time min(tau_I, tau_H) the whole
population interacts once, so a step of size dt transfers the mass
total * dt / min(tau_I, tau_H), split into
N = events_per_step * total * dt / min(tau_I, tau_H) events (fractional
expectations are rounded stochastically, unbiased). The default quantum
is the transferred mass divided by N; larger quanta mean grainier, more
volatile dynamics at the same interaction rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DistributionGrid,
    ModelParams,
    Scenario,
    background_W,
    compromise_P,
    diffusion_d,
    herding_gamma,
)

PUBLIC = "public"
HERDING = "herding"

# one batch may turn over at most this fraction of the population before
# the sampling distribution is refreshed; a full turnover in one batch
# mirrors a simultaneous all-agents interaction sweep
_BATCH_TURNOVER = 1.0


@dataclass(frozen=True)
class CollisionConfig:
    """Calibration of the event-sampling scheme.

    events_per_step: interaction events per unit mass per interaction
        time; None picks one event per grid cell (n_x * n_w).
    quantum_mass: mass moved per event; None divides the per-step
        transferred mass evenly over the events.
    rng_seed: seed used when a step is run standalone.
    """

    events_per_step: float | None = None
    quantum_mass: float | None = None
    rng_seed: int = 0

    def __post_init__(self):
        if self.events_per_step is not None and not self.events_per_step >= 1:
            raise ValueError("events_per_step: must be >= 1")
        if self.quantum_mass is not None and not self.quantum_mass > 0:
            raise ValueError("quantum_mass: must be > 0")

    def resolve_events(self, grid: DistributionGrid) -> float:
        return float(self.events_per_step if self.events_per_step is not None
                     else grid.n_x * grid.n_w)

    def make_rng(self) -> np.random.Generator:
        """Generator for standalone stepping outside a seeded run."""
        return np.random.default_rng(self.rng_seed)


# ---------------------------------------------------------------------------
# interaction rules
# ---------------------------------------------------------------------------

def public_interaction(w, W, eta, p: ModelParams):
    """Post-interaction value after consulting the public source:
    w* = w - alpha P(|w-W|) (w - W) + eta d(w)."""
    pull = p.alpha * compromise_P(np.abs(np.asarray(w) - W), p) * (np.asarray(w) - W)
    out = w - pull + eta * diffusion_d(w, p.d_scale)
    return out if np.ndim(out) else float(out)


def herding_interaction(w, v, eta1, eta2, p: ModelParams):
    """Post-interaction pair after a herding encounter.

    The exchanged amount beta gamma(v, w) (w - v) is computed once and
    moved between the two agents, so w* + v* equals w + v exactly when
    the noise is off, and |w* - v*| never exceeds |w - v|.
    """
    transfer = p.beta * herding_gamma(v, w, p) * (np.asarray(w) - np.asarray(v))
    w_star = w - transfer + eta1 * diffusion_d(w, p.d_scale)
    v_star = v + transfer + eta2 * diffusion_d(v, p.d_scale)
    if np.ndim(w_star):
        return w_star, v_star
    return float(w_star), float(v_star)


def select_rule(frac_rational, p: ModelParams, rng: np.random.Generator) -> str:
    """Pick the interaction rule from the rational mass fraction.

    A rational majority (fraction above the upper threshold) selects
    herding, an irrational majority selects the public rule, and the
    intermediate range flips a fair coin. swap_rules exchanges the two
    majority outcomes.
    """
    lo, hi = p.rule_thresholds
    if frac_rational > hi:
        rule = HERDING
    elif frac_rational < lo:
        rule = PUBLIC
    else:
        return HERDING if rng.random() < 0.5 else PUBLIC
    if p.swap_rules:
        rule = PUBLIC if rule == HERDING else HERDING
    return rule


# ---------------------------------------------------------------------------
# single-event path
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Event:
    """One sampled interaction, fully determined before application."""

    kind: str                      # PUBLIC or HERDING
    i: int                         # source x-cell
    j: int                         # source w-cell
    W: float = 0.5                 # background value (public partner)
    j_partner: int = 0             # partner w-cell in the same x-row
    eta: float = 0.0
    eta2: float = 0.0


def apply_event(grid: DistributionGrid, event: Event, p: ModelParams,
                cfg: CollisionConfig, quantum: float | None = None) -> bool:
    """Apply one event to the grid; returns False if it was rejected.

    Rejection (an out-of-range post-interaction value, or a source cell
    too empty to supply the quantum) leaves the grid bit-identical.
    """
    if quantum is None:
        quantum = cfg.quantum_mass
    if quantum is None:
        raise ValueError("apply_event: no quantum configured")
    area = grid.cell_area
    dens = quantum / area
    w = grid.w_centers[event.j]
    x = grid.x_centers[event.i]
    if grid.values[event.i, event.j] * (1.0 - 1e-12) < dens:
        return False
    if event.kind == PUBLIC:
        w_star = public_interaction(w, event.W, event.eta, p)
        if not (grid.w_min <= w_star <= grid.w_max):
            return False
        grid.values[event.i, event.j] -= dens
        _deposit(grid, event.i, w_star, dens)
        if grid.values[event.i, event.j] < 0:
            raise RuntimeError("collision: cell went negative after withdrawal")
        return True
    v = grid.w_centers[event.j_partner]
    need = dens * (2.0 if event.j_partner == event.j else 1.0)
    if grid.values[event.i, event.j_partner] * (1.0 - 1e-12) < need:
        return False
    w_star, v_star = herding_interaction(w, v, event.eta, event.eta2, p)
    if not (grid.w_min <= w_star <= grid.w_max
            and grid.w_min <= v_star <= grid.w_max):
        return False
    grid.values[event.i, event.j] -= dens
    grid.values[event.i, event.j_partner] -= dens
    _deposit(grid, event.i, w_star, dens)
    _deposit(grid, event.i, v_star, dens)
    if (grid.values[event.i, event.j] < 0
            or grid.values[event.i, event.j_partner] < 0):
        raise RuntimeError("collision: cell went negative after withdrawal")
    return True


def _deposit(grid, i, w_star, dens):
    """Interpolated deposit in density units (mass / cell area)."""
    s = (w_star - grid.w_min) / grid.dw - 0.5
    if s <= 0.0:
        grid.values[i, 0] += dens
    elif s >= grid.n_w - 1:
        grid.values[i, -1] += dens
    else:
        j0 = int(s)
        upper = dens * (s - j0)
        grid.values[i, j0] += dens - upper
        grid.values[i, j0 + 1] += upper


# ---------------------------------------------------------------------------
# vectorized step
# ---------------------------------------------------------------------------

def collision_step(grid: DistributionGrid, t, dt, scenario: Scenario,
                   params: ModelParams, cfg: CollisionConfig,
                   rng: np.random.Generator) -> DistributionGrid:
    """Advance the density by one collision step of size dt, in place.

    Sources are drawn proportionally to cell mass. The rational
    fraction of the source's w-column picks the rule; public events
    interact with the background W(t), herding events draw a partner
    from the same x-row (the herding operator couples densities at
    equal rationality). Events are processed in batches that each turn
    over a bounded mass fraction; per-cell withdrawal caps make
    overdraws impossible, so the total mass is conserved exactly.
    """
    area = grid.cell_area
    total = float(grid.values.sum()) * area
    if total <= 0.0 or dt <= 0.0:
        return grid
    tau = min(params.tau_I, params.tau_H)
    rate = cfg.resolve_events(grid)
    lam = rate * total * dt / tau
    n_events = int(lam) + (1 if rng.random() < lam - int(lam) else 0)
    if n_events == 0:
        return grid
    moved = total * dt / tau
    quantum = cfg.quantum_mass if cfg.quantum_mass is not None \
        else moved / n_events
    W = background_W(t, scenario, grid.w_min, grid.w_max)

    n_batches = max(1, int(np.ceil(n_events * quantum / (_BATCH_TURNOVER * total))))
    n_batches = min(n_batches, n_events)
    sizes = np.full(n_batches, n_events // n_batches)
    sizes[: n_events % n_batches] += 1
    for size in sizes:
        _run_batch(grid, int(size), quantum, W, params, rng)
    return grid


def _run_batch(grid, n_events, quantum, W, p, rng):
    dens_q = quantum / grid.cell_area
    flat = grid.values.ravel()
    n_x, n_w = grid.n_x, grid.n_w
    n_cells = n_x * n_w

    cdf = np.cumsum(flat)           # density units, scale-free sampling
    total = cdf[-1]
    if total <= 0.0:
        return

    src = np.searchsorted(cdf, rng.random(n_events) * total, side="right")
    src = np.minimum(src, n_cells - 1)
    i_src = src // n_w
    j_src = src - i_src * n_w

    # rule selection from the rational fraction of each source w-column
    rational = grid.values[grid.x_centers >= 0.0, :].sum(axis=0)
    col_tot = grid.values.sum(axis=0)
    with np.errstate(invalid="ignore"):
        frac = np.where(col_tot > 0.0, rational / col_tot, 0.5)
    fr = frac[j_src]
    lo, hi = p.rule_thresholds
    herd = fr > hi
    pub = fr < lo
    if p.swap_rules:
        herd, pub = pub, herd
    undecided = ~(herd | pub)
    if undecided.any():
        herd = herd | (undecided & (rng.random(n_events) < 0.5))

    w_src = grid.w_centers[j_src]
    eta = p.noise.sample(rng, 2 * n_events)
    eta1, eta2 = eta[:n_events], eta[n_events:]

    d4 = 4.0 * p.d_scale
    w_new = np.empty(n_events)
    v_new = np.empty(n_events)
    ok = np.zeros(n_events, dtype=bool)

    # public channel: w* = w - alpha P (w - W) + eta d(w)
    m = ~herd
    if m.any():
        w_m = w_src[m]
        dev = w_m - W
        if p.p_kind == "constant":
            pull = p.alpha * dev
        else:
            pull = p.alpha * (np.abs(dev) < p.p_radius) * dev
        wn = w_m - pull + eta1[m] * (d4 * w_m * (1.0 - w_m))
        w_new[m] = wn
        ok[m] = (wn >= grid.w_min) & (wn <= grid.w_max)

    # herding channel: partner from the same x-row, drawn by mass
    partner = np.zeros(n_events, dtype=np.int64)
    if herd.any():
        rows = i_src[herd]
        row_edge = rows * n_w
        row_lo = np.where(rows > 0, cdf[row_edge - 1], 0.0)
        row_hi = cdf[row_edge + (n_w - 1)]
        u = row_lo + rng.random(len(rows)) * (row_hi - row_lo)
        par = np.searchsorted(cdf, u, side="right")
        par = np.clip(par, row_edge, row_edge + (n_w - 1))
        partner[herd] = par
        w_h = w_src[herd]
        v_h = grid.w_centers[par - row_edge]
        if p.gamma_kind == "indicator-product":
            gam = np.where(w_h < v_h, v_h * (1.0 - w_h), 0.0)
        else:
            gam = (np.abs(w_h - v_h) < p.gamma_radius).astype(float)
        transfer = p.beta * gam * (w_h - v_h)
        wn = w_h - transfer + eta1[herd] * (d4 * w_h * (1.0 - w_h))
        vn = v_h + transfer + eta2[herd] * (d4 * v_h * (1.0 - v_h))
        w_new[herd] = wn
        v_new[herd] = vn
        ok[herd] = ((wn >= grid.w_min) & (wn <= grid.w_max)
                    & (vn >= grid.w_min) & (vn <= grid.w_max))

    if not ok.any():
        return

    # per-event transferred density: the configured quantum, but a cell
    # drawn k times supplies at most an equal share of its content, so
    # no withdrawal can overdraw and thinly-filled cells keep moving
    # instead of freezing below the quantum
    idx = np.flatnonzero(ok)
    herd_ok = herd[idx]
    cells = np.concatenate([src[idx], partner[idx][herd_ok]])
    owner = np.concatenate([np.arange(len(idx)), np.flatnonzero(herd_ok)])
    counts = np.bincount(cells, minlength=n_cells)
    with np.errstate(divide="ignore", invalid="ignore"):
        share = flat * (1.0 - 1e-12) / counts
    allot = np.minimum(dens_q, share[cells])
    q_event = np.full(len(idx), np.inf)
    np.minimum.at(q_event, owner, allot)         # herding: min of both sides
    q_event[~np.isfinite(q_event)] = 0.0

    live = q_event > 0.0
    keep = idx[live]
    if keep.size == 0:
        return
    q_keep = q_event[live]

    # apply withdrawals and interpolated deposits in one accumulation
    herd_keep = herd[keep]
    sub = np.concatenate([src[keep], partner[keep][herd_keep]])
    sub_q = np.concatenate([q_keep, q_keep[herd_keep]])
    dep_i = np.concatenate([i_src[keep], i_src[keep][herd_keep]])
    dep_w = np.concatenate([w_new[keep], v_new[keep][herd_keep]])
    s = (dep_w - grid.w_min) / grid.dw - 0.5
    np.clip(s, 0.0, n_w - 1.0, out=s)
    if n_w > 1:
        j0 = np.minimum(s.astype(np.int64), n_w - 2)
        fracs = s - j0
    else:
        j0 = np.zeros(len(s), dtype=np.int64)
        fracs = np.zeros(len(s))
    upper = sub_q * fracs
    base = dep_i * n_w + j0
    indices = np.concatenate([sub, base, base + (1 if n_w > 1 else 0)])
    weights = np.concatenate([-sub_q, sub_q - upper, upper])
    flat += np.bincount(indices, weights=weights, minlength=n_cells)
