"""Monte-Carlo link-level simulator for Ppl measurement."""

from .channel import ChannelModel, ChannelVariant, frame_stream, point_key
from .constellation import Constellation, constellation, demodulate, modulate
from .ostbc import OstbcScheme, ostbc_decode, ostbc_encode, ostbc_scheme
from .sweep import (
    CSV_HEADER,
    PplMeasurement,
    measure_ber,
    measure_ppl_sweep,
    read_sweep_csv,
    run_frame,
    simulate_point,
    transmit,
    wilson_halfwidth,
    write_sweep_csv,
)

__all__ = [
    "ChannelModel",
    "ChannelVariant",
    "frame_stream",
    "point_key",
    "Constellation",
    "constellation",
    "modulate",
    "demodulate",
    "OstbcScheme",
    "ostbc_scheme",
    "ostbc_encode",
    "ostbc_decode",
    "CSV_HEADER",
    "PplMeasurement",
    "measure_ber",
    "measure_ppl_sweep",
    "read_sweep_csv",
    "run_frame",
    "simulate_point",
    "transmit",
    "wilson_halfwidth",
    "write_sweep_csv",
]
