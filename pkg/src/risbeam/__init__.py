"""Tensor-based joint active/passive beamforming for uplink RIS-assisted MU-MIMO."""

from risbeam.channel_model import ChannelSet, PilotConfig, SystemDims
from risbeam.ms_tao import BeamformerSolution, MsTaoParams, run_ms_tao
from risbeam.baselines import AoParams, CodebookParams, run_codebook, run_multistart_ao

__all__ = [
    "AoParams",
    "BeamformerSolution",
    "ChannelSet",
    "CodebookParams",
    "MsTaoParams",
    "PilotConfig",
    "SystemDims",
    "run_codebook",
    "run_ms_tao",
    "run_multistart_ao",
]

__version__ = "0.1.0"
