"""High-SNR capacity of SIMO/MISO channels with oscillator phase noise.

Internal quantities are in nats and radians; bits and degrees appear only
at the serialization boundary (JSON descriptors, CLI output).
"""

from .capacity import (
    ChannelSpec,
    Direction,
    EstimatorConfig,
    PhaseNoiseNumberResult,
    RateInterval,
    SnrSpec,
    capacity_highsnr,
    phase_noise_number,
)
from .circular import Tikhonov, UniformCircular, WrappedGaussian, conditional_phase_entropy, entropy
from .models import CompositeWiener, Noncoherent, PartiallyCoherent, Topology, Wiener, entropy_rate
from .outage import OutageTemplate, delta_r_analytic, gap_vs_M, outage_cdf_mc, outage_rate_analytic

__version__ = "0.1.0"

__all__ = [
    "ChannelSpec",
    "CompositeWiener",
    "Direction",
    "EstimatorConfig",
    "Noncoherent",
    "OutageTemplate",
    "PartiallyCoherent",
    "PhaseNoiseNumberResult",
    "RateInterval",
    "SnrSpec",
    "Tikhonov",
    "Topology",
    "UniformCircular",
    "Wiener",
    "WrappedGaussian",
    "capacity_highsnr",
    "conditional_phase_entropy",
    "delta_r_analytic",
    "entropy",
    "entropy_rate",
    "gap_vs_M",
    "outage_cdf_mc",
    "outage_rate_analytic",
    "phase_noise_number",
]
