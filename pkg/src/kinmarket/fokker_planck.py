"""Explicit finite-difference solver for the nonlocal drift-diffusion
limit of the interaction dynamics,

    g_t + (Phi g)_x = (K[g] g)_w + (H(w) g)_w + (D(w) g)_ww,

on the box [-L, L] x [0, w_max] with g = 0 at w = 0 and w = w_max and
zero x-derivative at x = +-L. K[g](x, w) = int Gamma(v, w) g(x, v) dv
is the nonlocal herding drift. The solver exists to cross-check the
moment behavior of the stochastic engine, so it favors transparency
over speed: first-order upwind drifts, centered diffusion, explicit
Euler stepping, nonnegativity guarded every step.

State lives on nodes w_j = j dw (j = 0..n_w) and x_i = -L + i dx
(i = 0..n_x); integrals are trapezoid sums.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import H_of_w, ModelParams, Scenario, diffusion_d, drift_phi

STABILITY_C = 0.9


@dataclass
class FPConfig:
    """Grid, kernel and coefficient choices for the limit equation.

    kernel: "constant" uses Gamma = gamma0; "pair" uses
        Gamma(v, w) = (beta/alpha) / tau_H * gamma(v, w) (v - w).
    diffusion: "from-d" takes D = (lam_I/tau_I + lam_H rho/tau_H)/2 d(w)^2,
        "linear" takes D(w) = w, "constant" the floor diffusion_floor.
    compromise: "affine" takes H = (w - W)/tau_I, "quadrature" averages
        the compromise drift over a background density.
    dt = None picks a step from the stability bound.
    """

    n_x: int = 1
    n_w: int = 160
    L: float = 0.5
    w_max: float = 2.0
    dt: float | None = None
    kernel: str = "constant"
    gamma0: float = 1.0
    diffusion: str = "linear"
    lam_I: float = 1.0
    lam_H: float = 1.0
    diffusion_floor: float = 0.1
    compromise: str = "affine"

    def __post_init__(self):
        if self.kernel not in ("constant", "pair"):
            raise ValueError(f"kernel: unknown choice {self.kernel!r}")
        if self.diffusion not in ("from-d", "linear", "constant"):
            raise ValueError(f"diffusion: unknown choice {self.diffusion!r}")
        if self.compromise not in ("affine", "quadrature"):
            raise ValueError(f"compromise: unknown choice {self.compromise!r}")
        if self.n_x < 1 or self.n_w < 3:
            raise ValueError("fp grid: need n_x >= 1 and n_w >= 3")


class FPState:
    """Node values g[i, j] on the (x, w) box, Dirichlet rows included."""

    def __init__(self, cfg: FPConfig, values=None):
        self.cfg = cfg
        self.n_x = cfg.n_x
        self.n_w = cfg.n_w
        self.dx = 2.0 * cfg.L / cfg.n_x if cfg.n_x > 1 else 2.0 * cfg.L
        self.dw = cfg.w_max / cfg.n_w
        self.x = (-cfg.L + np.arange(cfg.n_x + 1) * self.dx
                  if cfg.n_x > 1 else np.array([0.0]))
        self.w = np.arange(cfg.n_w + 1) * self.dw
        shape = (len(self.x), cfg.n_w + 1)
        if values is None:
            self.values = np.zeros(shape)
        else:
            values = np.asarray(values, dtype=float)
            if values.shape != shape:
                raise ValueError("fp state: values shape mismatch")
            self.values = values.copy()
        self.values[:, 0] = 0.0
        self.values[:, -1] = 0.0
        # rho in the diffusion coefficient is frozen from the initial
        # datum (the model conserves mass); solve() sets it
        self.rho_frozen: float | None = None

    def copy(self):
        out = FPState(self.cfg)
        out.values[:] = self.values
        out.rho_frozen = self.rho_frozen
        return out


def _trapz_w(vals, dw):
    return np.trapezoid(vals, dx=dw, axis=-1)


def _x_weights(state: FPState):
    if len(state.x) == 1:
        return np.array([2.0 * state.cfg.L])   # single column carries the box
    wts = np.full(len(state.x), state.dx)
    wts[0] = wts[-1] = 0.5 * state.dx
    return wts


def K_of_g(state: FPState, i: int, w, cfg: FPConfig,
           p: ModelParams | None = None):
    """Nonlocal drift K[g](x_i, w) by trapezoid quadrature over v."""
    g_col = state.values[i]
    if cfg.kernel == "constant":
        col_mass = float(_trapz_w(g_col, state.dw))
        out = cfg.gamma0 * col_mass * np.ones_like(np.asarray(w, dtype=float))
        return out if out.ndim else float(out)
    p = p or ModelParams()
    k_ratio = p.beta / p.alpha if p.alpha > 0 else 0.0
    w_arr = np.atleast_1d(np.asarray(w, dtype=float))
    v = state.w
    gam = np.where(w_arr[:, None] < v[None, :],
                   v[None, :] * (1.0 - w_arr[:, None]), 0.0)
    integrand = k_ratio / p.tau_H * gam * (v[None, :] - w_arr[:, None]) \
        * g_col[None, :]
    out = np.trapezoid(integrand, dx=state.dw, axis=1)
    return out if np.ndim(w) else float(out[0])


def _drift_A(state: FPState, t, cfg: FPConfig, p: ModelParams, s: Scenario):
    """Combined w-drift A = K[g] + H(w) on the nodes, per x-row."""
    W = float(s.background(t))   # FP box may exceed the unit asset range
    w = state.w
    if cfg.compromise == "affine":
        H = (w - W) / p.tau_I
    else:
        H = np.array([H_of_w(wi, W, p) for wi in w])
    if cfg.kernel == "constant":
        col_mass = _trapz_w(state.values, state.dw)          # per x-row
        K = cfg.gamma0 * col_mass[:, None] * np.ones_like(w)[None, :]
    else:
        K = np.vstack([K_of_g(state, i, w, cfg, p)
                       for i in range(state.values.shape[0])])
    return K + H[None, :]


def _diffusion_D(state: FPState, cfg: FPConfig, p: ModelParams, rho: float):
    w = state.w
    if cfg.diffusion == "linear":
        return w.copy()
    if cfg.diffusion == "constant":
        return np.full_like(w, cfg.diffusion_floor)
    coeff = 0.5 * (cfg.lam_I / p.tau_I + cfg.lam_H * rho / p.tau_H)
    return coeff * diffusion_d(w, p.d_scale) ** 2


def stability_dt(state: FPState, cfg: FPConfig, p: ModelParams,
                 s: Scenario, rho: float, t=0.0) -> float:
    """Largest step allowed by the explicit stability bound
    C * min(dw^2 / max D, dw / max|K+H|, dx / max|Phi|)."""
    D = _diffusion_D(state, cfg, p, rho)
    A = np.abs(_drift_A(state, t, cfg, p, s))
    bounds = []
    d_max = float(D.max())
    if d_max > 0:
        bounds.append(state.dw ** 2 / d_max)
    a_max = float(A.max())
    if a_max > 0:
        bounds.append(state.dw / a_max)
    phi_max = max(abs(p.kappa), abs(p.delta * p.kappa))
    if len(state.x) > 1 and phi_max > 0:
        bounds.append(state.dx / phi_max)
    return STABILITY_C * min(bounds) if bounds else np.inf


def default_dt(state, cfg, p, s, rho, t=0.0) -> float:
    """Conservative default: a quarter of the sharp positivity bound."""
    D = _diffusion_D(state, cfg, p, rho)
    A = np.abs(_drift_A(state, t, cfg, p, s))
    denom = 2.0 * float(D.max()) / state.dw ** 2 \
        + float(A.max()) / state.dw
    phi_max = max(abs(p.kappa), abs(p.delta * p.kappa))
    if len(state.x) > 1 and phi_max > 0:
        denom += phi_max / state.dx
    return 0.25 / denom if denom > 0 else 1e-3


def fp_step(state: FPState, t, cfg: FPConfig, p: ModelParams,
            s: Scenario, dt: float | None = None) -> FPState:
    """One explicit Euler step, in place.

    Upwind fluxes for the x- and w-drifts, centered second difference
    for (D g)_ww, Dirichlet g = 0 at the w-ends, zero x-gradient at
    x = +-L. Raises on a stability violation or a negative node.
    """
    dt = dt if dt is not None else cfg.dt
    if dt is None:
        raise ValueError("fp_step: no time step configured")
    g = state.values
    dw = state.dw
    rho = state.rho_frozen if state.rho_frozen is not None \
        else fp_moments(state, 0.5)[3]
    A = _drift_A(state, t, cfg, p, s)
    D = _diffusion_D(state, cfg, p, rho)

    bounds = []
    d_max = float(D.max())
    if d_max > 0:
        bounds.append(dw ** 2 / d_max)
    a_max = float(np.abs(A).max())
    if a_max > 0:
        bounds.append(dw / a_max)
    phi_max = max(abs(p.kappa), abs(p.delta * p.kappa))
    if g.shape[0] > 1 and phi_max > 0:
        bounds.append(state.dx / phi_max)
    limit = STABILITY_C * min(bounds) if bounds else np.inf
    if dt > limit:
        raise ValueError(f"fp_step: dt = {dt} violates stability bound {limit:.3g}")

    # (A g)_w with upwinding on the transport velocity -A: the face flux
    # between nodes j and j+1 carries the donor value
    vel = -0.5 * (A[:, :-1] + A[:, 1:])           # face velocity
    donor = np.where(vel > 0.0, g[:, :-1], g[:, 1:])
    face_flux = vel * donor                       # flux of the w-advection
    div_w = np.zeros_like(g)
    div_w[:, 1:-1] = (face_flux[:, 1:] - face_flux[:, :-1]) / dw
    # (A g)_w written as conservation form g_t + ((-A) g)_w = 0
    rhs = -div_w

    # diffusion (D g)_ww, centered
    Dg = D[None, :] * g
    diff = np.zeros_like(g)
    diff[:, 1:-1] = (Dg[:, 2:] - 2.0 * Dg[:, 1:-1] + Dg[:, :-2]) / dw ** 2
    rhs += diff

    # x-transport -(Phi g)_x, upwind, zero-gradient walls
    if g.shape[0] > 1:
        W = float(s.background(t))
        phi = drift_phi(0.0, state.w, W, p)       # independent of x
        gx_minus = np.empty_like(g)               # backward difference
        gx_minus[1:] = (g[1:] - g[:-1]) / state.dx
        gx_minus[0] = 0.0
        gx_plus = np.empty_like(g)                # forward difference
        gx_plus[:-1] = (g[1:] - g[:-1]) / state.dx
        gx_plus[-1] = 0.0
        upx = np.where(phi[None, :] > 0.0, gx_minus, gx_plus)
        rhs -= phi[None, :] * upx

    g += dt * rhs
    g[:, 0] = 0.0
    g[:, -1] = 0.0
    if g.min() < -1e-14:
        raise ValueError(f"fp_step: negative node {g.min():.3g}")
    np.clip(g, 0.0, None, out=g)                  # scrub -1e-300 dust
    return state


def fp_moments(state: FPState, W: float):
    """Trapezoid moments (m_w, m_x, V_w, mass) on the node grid."""
    xw = _x_weights(state)
    col = _trapz_w(state.values, state.dw)        # per x-row w-integral
    mass = float(xw @ col)
    m_x = float((xw * state.x) @ col) if len(state.x) > 1 else 0.0
    w_first = _trapz_w(state.values * state.w[None, :], state.dw)
    m_w = float(xw @ w_first)
    w_var = _trapz_w(state.values * (state.w[None, :] - W) ** 2, state.dw)
    V_w = float(xw @ w_var)
    return m_w, m_x, V_w, mass


def solve(state: FPState, cfg: FPConfig, p: ModelParams, s: Scenario,
          t_final: float, record_every: int = 0):
    """March to t_final; optionally return (t, m_w, m_x, V_w, mass) rows."""
    rho0 = fp_moments(state, 0.5)[3]
    state.rho_frozen = rho0
    dt = cfg.dt if cfg.dt is not None else default_dt(state, cfg, p, s, rho0)
    steps = max(1, int(np.ceil(t_final / dt)))
    dt = t_final / steps
    rows = []
    for k in range(steps):
        if record_every and k % record_every == 0:
            m_w, m_x, V_w, mass = fp_moments(state, float(s.background(k * dt)))
            rows.append((k * dt, m_w, m_x, V_w, mass))
        fp_step(state, k * dt, cfg, p, s, dt)
    m_w, m_x, V_w, mass = fp_moments(state, float(s.background(t_final)))
    rows.append((t_final, m_w, m_x, V_w, mass))
    return rows
