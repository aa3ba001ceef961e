"""Scenario presets for the three standard experiments.

Every preset runs the collision clock at one interaction per agent per
time step (tau_I = tau_H = dt): the background drifts and the band
statistics are calibrated against that convention. The fast variants
shrink the grid, the step count and the ensemble for desk-scale runs;
they are the configuration the acceptance suite exercises.
"""

from __future__ import annotations

from .collision import CollisionConfig
from .core import (
    ConstantBackground,
    ModelParams,
    NoiseModel,
    PiecewiseBackground,
    Scenario,
    SinExpBackground,
)
from .experiments import InitSpec, RunConfig

# the smooth background of the time-dependent experiment was stated
# against a reference step of 1e-5; the frequencies are stored as
# absolute rates so the scenario does not change with the step size
_REF_DT = 1e-5
SIN_EXP_OMEGA = 1.0 / (500.0 * _REF_DT)     # 200 per unit time
SIN_EXP_RATE = 1.0 / (1500.0 * _REF_DT)     # ~66.7 per unit time

PRESET_NAMES = (
    "test1",
    "test2-smooth",
    "test2-crash",
    "test3-bollinger",
    "test3-jump",
    "test3-jump-strong",
)


def _scale(fast: bool):
    """(n, dt, ensemble cap) for full and fast scale."""
    return (35, 1e-4, 20) if fast else (70, 1e-5, 200)


def _base(fast: bool, *, background, horizon, model_kw, ensemble,
          cadence=1, emit_bands=False, init=None, seed=0):
    n, dt, e_cap = _scale(fast)
    model = ModelParams(tau_I=dt, tau_H=dt, **model_kw)
    scenario = Scenario(background=background, horizon=horizon, dt=dt,
                        seed=seed, ensemble=min(ensemble, e_cap))
    return RunConfig(
        model=model,
        scenario=scenario,
        collision=CollisionConfig(),
        init=init or InitSpec(),
        n_x=n, n_w=n,
        cadence=cadence,
        emit_bands=emit_bands,
    )


def preset(name: str, fast: bool = False) -> RunConfig:
    """Named experiment configuration; fast=True gives the desk scale."""
    if name == "test1":
        # constant fair value, bubble/crash statistics over the ensemble
        return _base(
            fast,
            background=ConstantBackground(0.5),
            horizon=0.5,
            model_kw=dict(alpha=0.5, beta=0.25, delta=1.0, kappa=1.0,
                          band_R=0.025, noise=NoiseModel("two-point", 0.06)),
            ensemble=200,
        )
    if name == "test2-smooth":
        # rising oscillatory fair value; W(t) leaves the unit range
        # shortly after t = 0.054, which caps the horizon
        return _base(
            fast,
            background=SinExpBackground(0.1, 0.05, SIN_EXP_OMEGA,
                                        SIN_EXP_RATE),
            horizon=0.05,
            model_kw=dict(alpha=0.05, beta=0.25, delta=2.0, kappa=1.0,
                          band_R=0.025, noise=NoiseModel("two-point", 0.06)),
            ensemble=1,
            init=InitSpec(center=0.125, sd=0.05),
        )
    if name == "test2-crash":
        # level fair value crashing at t = 0.2, constant afterwards
        return _base(
            fast,
            background=PiecewiseBackground(((0.0, 0.7), (0.2, 0.5))),
            horizon=0.4,
            model_kw=dict(alpha=0.25, beta=0.2, delta=1.0, kappa=1.0,
                          band_R=0.025, noise=NoiseModel("two-point", 0.06)),
            ensemble=20,
            init=InitSpec(center=0.7, sd=0.05),
        )
    if name == "test3-bollinger":
        return _base(
            fast,
            background=ConstantBackground(0.5),
            horizon=0.5,
            model_kw=dict(alpha=0.2, beta=0.25, delta=1.0, kappa=1.0,
                          band_R=0.025, noise=NoiseModel("two-point", 0.06)),
            ensemble=1,
            cadence=5,
            emit_bands=True,
        )
    if name in ("test3-jump", "test3-jump-strong"):
        amp = 0.18 if name.endswith("strong") else 0.06
        # d(w) = w (1 - w) for this experiment (d_scale = 1/4)
        return _base(
            fast,
            background=PiecewiseBackground(((0.0, 0.65), (0.2, 0.45))),
            horizon=0.4,
            model_kw=dict(alpha=0.05, beta=0.25, delta=1.0, kappa=1.0,
                          band_R=0.025, d_scale=0.25,
                          noise=NoiseModel("two-point", amp)),
            ensemble=1,
            cadence=5,
            emit_bands=True,
            init=InitSpec(center=0.65, sd=0.05),
        )
    raise ValueError(f"unknown preset {name!r}; known: {', '.join(PRESET_NAMES)}")
