"""Exact Fock-space simulator and estimation toolkit for a Kerr nonlinear
fiber gyroscope."""

__version__ = "0.1.0"

from .channel import ChannelParams, PhotonStatistics, gyro_pass, m_statistics
from .fock import Basis, GMoments, TwoModeState, g_moments, product_state
from .probes import CoherentPair, CoherentSqueezed, NumberPair, build_probe

__all__ = [
    "Basis",
    "ChannelParams",
    "CoherentPair",
    "CoherentSqueezed",
    "GMoments",
    "NumberPair",
    "PhotonStatistics",
    "TwoModeState",
    "__version__",
    "build_probe",
    "g_moments",
    "gyro_pass",
    "m_statistics",
    "product_state",
]
