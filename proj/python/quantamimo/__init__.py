"""Quantized massive-MIMO uplink rate simulator."""

from ._quantamimo import (
    ChannelModel,
    CsiMode,
    Detector,
    GeometryConfig,
    RateEstimate,
    SimConfig,
    ContractViolation,
    SingularGram,
    approx_rate,
    drop_interferers,
    estimate_rate,
    lloyd_max,
    mutual_info_grid,
    nearest_rank_percentile,
    parse_config_text,
    scatter_demo,
    snr_from_distance,
    std_normal_cdf,
    sweep_antennas,
    sweep_coherence,
    sweep_sir,
    sweep_snr,
)

__all__ = [
    "ChannelModel",
    "CsiMode",
    "Detector",
    "GeometryConfig",
    "RateEstimate",
    "SimConfig",
    "ContractViolation",
    "SingularGram",
    "approx_rate",
    "drop_interferers",
    "estimate_rate",
    "lloyd_max",
    "mutual_info_grid",
    "nearest_rank_percentile",
    "parse_config_text",
    "scatter_demo",
    "snr_from_distance",
    "std_normal_cdf",
    "sweep_antennas",
    "sweep_coherence",
    "sweep_sir",
    "sweep_snr",
]
