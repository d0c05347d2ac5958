"""Co-design of electric-vehicle transmissions: component sizing, loss maps,
quasi-static energy simulation, optimal gear shifting and design search."""

__version__ = "0.1.0"

from .config import (  # noqa: E402
    AirProps, BearingParams, Config, ConfigError, EMParams, GearboxConfig, OilProps, RatioSet, VehicleParams,
    load_config, validate_config,
)
from .cycles import DriveCycle, cadc_like, load_cycle_csv, nedc, synthetic_cycle  # noqa: E402
from .lossmap import GearboxLossModel, LossMap, build_loss_map, build_loss_maps  # noqa: E402
from .powertrain import SimResult, simulate  # noqa: E402
from .search import enumerate_designs, feasible_counts, prune_infeasible, search  # noqa: E402
from .shifting import optimize_shifts, shift_energy  # noqa: E402
from .synthesis import GearboxDesign, synthesize  # noqa: E402

__all__ = [
    "AirProps", "BearingParams", "Config", "ConfigError", "DriveCycle", "EMParams", "GearboxConfig",
    "GearboxDesign", "GearboxLossModel", "LossMap", "OilProps", "RatioSet", "SimResult", "VehicleParams",
    "build_loss_map", "build_loss_maps", "cadc_like", "enumerate_designs", "feasible_counts", "load_config",
    "load_cycle_csv", "nedc", "optimize_shifts", "prune_infeasible", "search", "shift_energy", "simulate",
    "synthesize", "synthetic_cycle", "validate_config",
]
