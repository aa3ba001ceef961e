"""Kinetic simulation of market agents on a rationality/asset-value grid.

The state is a cell-averaged density f(x, w) over rationality x and
estimated asset value w. Binary interactions with a public information
source and herding interactions between agents are simulated with a
stochastic event scheme; a drift in rationality is handled by a
flux-limited finite-volume transport step. A nonlocal Fokker-Planck
solver provides an independent cross-check of the moment behavior, and
analytics cover bubble/crash statistics and Bollinger bands.
"""

from .core import (
    DistributionGrid,
    ModelParams,
    NoiseModel,
    Scenario,
    TimeSeries,
    background_W,
    compromise_P,
    deposit_mass,
    diffusion_d,
    drift_phi,
    H_of_w,
    herding_gamma,
    moments,
    rational_fraction,
    total_mass,
)
from .collision import CollisionConfig, collision_step
from .transport import transport_step, van_leer_psi

__all__ = [
    "DistributionGrid",
    "ModelParams",
    "NoiseModel",
    "Scenario",
    "TimeSeries",
    "CollisionConfig",
    "background_W",
    "collision_step",
    "compromise_P",
    "deposit_mass",
    "diffusion_d",
    "drift_phi",
    "H_of_w",
    "herding_gamma",
    "moments",
    "rational_fraction",
    "total_mass",
    "transport_step",
    "van_leer_psi",
]

__version__ = "0.1.0"
