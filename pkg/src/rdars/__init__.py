"""Link-level simulation and beamforming optimization for RDARS-aided mmWave MU-MIMO."""
from .channel import (AngleOverride, BeamPlan, ChannelSet, PathLoss, Scenario, VirtualAngles,
                      build_channels, reconfigurable_steering, sinr, steering_vector, wsr)
from .rdars_config import ModeConfig, make_mode_config, min_transmit_elements, placement_candidates

__all__ = [
    "AngleOverride", "BeamPlan", "ChannelSet", "PathLoss", "Scenario", "VirtualAngles",
    "build_channels", "reconfigurable_steering", "sinr", "steering_vector", "wsr",
    "ModeConfig", "make_mode_config", "min_transmit_elements", "placement_candidates",
]
