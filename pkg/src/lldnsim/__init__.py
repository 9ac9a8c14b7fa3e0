"""Analytics and Monte Carlo simulation of IEEE 802.15.4e LLDN superframes
with relay-assisted retransmission (RM) and two-hop extended topology (ETM)."""

from lldnsim.analytic import LinkMatrix, ModeMetrics, etm_metrics, rm_metrics, sm_metrics
from lldnsim.channel import (
    ReferenceLink,
    TargetLink,
    ber_from_per,
    ber_from_snr,
    derive_per,
    scale_snr,
    snr_from_ber,
)
from lldnsim.energy import FrameLengths, TransceiverParams, activity_energy, frame_airtime
from lldnsim.schedule import SuperframeConfig, build_superframe, worst_case_latency
from lldnsim.simulator import Scenario, SimResult, run

__version__ = "0.1.0"

__all__ = [
    "FrameLengths",
    "LinkMatrix",
    "ModeMetrics",
    "ReferenceLink",
    "Scenario",
    "SimResult",
    "SuperframeConfig",
    "TargetLink",
    "TransceiverParams",
    "activity_energy",
    "ber_from_per",
    "ber_from_snr",
    "build_superframe",
    "derive_per",
    "etm_metrics",
    "frame_airtime",
    "rm_metrics",
    "run",
    "scale_snr",
    "sm_metrics",
    "snr_from_ber",
    "worst_case_latency",
]
