"""AMR / AMR-WB core-frame layouts, Class A CRC and the frame-loss verdict."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels

__all__ = [
    "Codec",
    "CodecFrameLayout",
    "CrcSpec",
    "CRC8",
    "FrameBits",
    "LossVerdict",
    "layout_for",
    "all_layouts",
    "crc8_compute",
    "crc8_batch",
    "build_frame",
    "frame_loss_decision",
    "frame_loss_batch",
    "export_layouts",
]

FRAME_MS = 20


class Codec(str, enum.Enum):
    AMR = "AMR"
    AMR_WB = "AMR_WB"

    @classmethod
    def parse(cls, value) -> "Codec":
        if isinstance(value, cls):
            return value
        key = str(value).upper().replace("-", "_")
        if key in ("AMR_NB", "NB"):
            key = "AMR"
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown codec {value!r}") from None

    @property
    def label(self) -> str:
        return "AMR-WB" if self is Codec.AMR_WB else "AMR"


@dataclass(frozen=True)
class CodecFrameLayout:
    codec: Codec
    mode: int
    class_a: int
    class_b: int
    class_c: int
    total: int
    bitrate_kbps: float
    reconciled: bool = False

    def __post_init__(self):
        if self.class_a <= 0:
            raise ValueError("class_a must be positive")
        if self.class_a + self.class_b + self.class_c != self.total:
            raise ValueError(f"class counts do not sum to total for {self.codec.value} mode {self.mode}")
        if round(self.bitrate_kbps * FRAME_MS) != self.total:
            raise ValueError(f"total {self.total} does not match {self.bitrate_kbps} kbit/s x 20 ms")

    @property
    def name(self) -> str:
        return f"{self.codec.label}-{self.mode}"

    def to_json(self) -> dict:
        return {
            "codec": self.codec.value,
            "mode": self.mode,
            "class_a": self.class_a,
            "class_b": self.class_b,
            "class_c": self.class_c,
            "total": self.total,
            "bitrate_kbps": self.bitrate_kbps,
            "reconciled": self.reconciled,
        }


# Printed tables: (class A, class B, class C, total, kbit/s). Some printed
# B/total entries are inconsistent with the bit-rate; see _reconcile.
_AMR_PRINTED = {
    0: (42, 53, 0, 95, 4.75),
    1: (49, 64, 0, 103, 5.15),
    2: (55, 63, 0, 118, 5.90),
    3: (58, 76, 0, 134, 6.70),
    4: (61, 87, 0, 148, 7.40),
    5: (75, 84, 0, 159, 7.95),
    6: (65, 99, 40, 204, 10.2),
    7: (81, 103, 60, 244, 12.2),
}
_AMR_WB_PRINTED = {
    0: (54, 78, 0, 132, 6.60),
    1: (64, 113, 0, 177, 8.85),
    2: (72, 181, 0, 181, 12.65),
    3: (72, 76, 0, 213, 14.25),
    4: (72, 87, 0, 245, 15.85),
    5: (72, 84, 0, 293, 18.25),
    6: (72, 99, 0, 325, 19.85),
    7: (72, 103, 0, 389, 23.05),
    8: (72, 103, 0, 405, 23.85),
}


def _reconcile(codec: Codec, mode: int, printed) -> CodecFrameLayout:
    # Class A and C are kept verbatim, total follows the bit-rate and
    # Class B absorbs the difference.
    a, b, c, total, kbps = printed
    true_total = round(kbps * FRAME_MS)
    true_b = true_total - a - c
    changed = (true_total, true_b) != (total, b)
    return CodecFrameLayout(codec, mode, a, true_b, c, true_total, kbps, changed)


_LAYOUTS = {
    **{(Codec.AMR, m): _reconcile(Codec.AMR, m, p) for m, p in _AMR_PRINTED.items()},
    **{(Codec.AMR_WB, m): _reconcile(Codec.AMR_WB, m, p) for m, p in _AMR_WB_PRINTED.items()},
}


def layout_for(codec, mode: int) -> CodecFrameLayout:
    try:
        return _LAYOUTS[(Codec.parse(codec), int(mode))]
    except KeyError:
        raise ValueError(f"unknown mode {mode} for codec {codec}") from None


def all_layouts() -> list[CodecFrameLayout]:
    return [_LAYOUTS[k] for k in sorted(_LAYOUTS, key=lambda k: (k[0].value, k[1]))]


def export_layouts(path=None):
    records = [lay.to_json() for lay in all_layouts()]
    if path is not None:
        Path(path).write_text(json.dumps(records, indent=2) + "\n")
    return records


@dataclass(frozen=True)
class CrcSpec:
    """MSB-first CRC register description. ``poly`` excludes the x^width term."""

    width: int = 8
    poly: int = 0x9B  # x^8 + x^7 + x^4 + x^3 + x + 1
    init: int = 0x00
    reflect: bool = False
    xor_out: int = 0x00
    version: str = "crc8-9b-v1"

    def __post_init__(self):
        if self.width != 8:
            raise ValueError("only 8-bit CRCs are supported")
        if bin(self.poly | (1 << self.width)).count("1") < 2:
            raise ValueError("generator needs at least two terms")


CRC8 = CrcSpec()


def crc8_compute(bits, spec: CrcSpec = CRC8) -> int:
    """Checksum of one bit sequence (values 0/1, first element is the MSB)."""
    bits = np.asarray(bits, dtype=np.uint8).reshape(1, -1)
    return int(crc8_batch(bits, spec)[0])


def crc8_batch(bits, spec: CrcSpec = CRC8) -> np.ndarray:
    """Checksums of every row of a 2-D 0/1 array."""
    bits = np.ascontiguousarray(bits, dtype=np.uint8)
    if bits.ndim != 2:
        raise ValueError("crc8_batch expects a 2-D array")
    if spec.reflect:
        bits = bits[:, ::-1].copy()
    crc = _kernels.crc8_rows(bits, spec.poly, spec.init)
    return crc ^ np.uint8(spec.xor_out)


def crc_to_bits(value: int) -> np.ndarray:
    return np.array([(value >> (7 - i)) & 1 for i in range(8)], dtype=np.uint8)


@dataclass(frozen=True)
class FrameBits:
    """A core frame ordered Class A, B, C followed by its 8 CRC bits on air."""

    layout: CodecFrameLayout
    payload: np.ndarray
    crc: int

    def __post_init__(self):
        if self.payload.shape != (self.layout.total,):
            raise ValueError(f"payload length {self.payload.shape} does not match layout total {self.layout.total}")

    @property
    def class_a(self) -> np.ndarray:
        return self.payload[: self.layout.class_a]

    def to_bits(self) -> np.ndarray:
        return np.concatenate([self.payload, crc_to_bits(self.crc)])

    @classmethod
    def from_bits(cls, layout: CodecFrameLayout, bits) -> "FrameBits":
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.shape != (layout.total + 8,):
            raise ValueError(f"expected {layout.total + 8} bits, got {bits.shape}")
        crc = int(np.packbits(bits[layout.total :])[0])
        return cls(layout, bits[: layout.total].copy(), crc)


def build_frame(layout: CodecFrameLayout, payload, spec: CrcSpec = CRC8) -> FrameBits:
    payload = np.asarray(payload, dtype=np.uint8)
    return FrameBits(layout, payload, crc8_compute(payload[: layout.class_a], spec))


@dataclass(frozen=True)
class LossVerdict:
    lost: bool
    class_a_corrupted: bool

    def __bool__(self):
        return self.lost


def frame_loss_decision(sent: FrameBits, received_payload, received_crc: int, spec: CrcSpec = CRC8) -> LossVerdict:
    """CRC verdict on the received Class A bits plus the ground-truth verdict."""
    received_payload = np.asarray(received_payload, dtype=np.uint8)
    if received_payload.shape != sent.payload.shape:
        raise ValueError("received payload length does not match the layout")
    na = sent.layout.class_a
    rx_a = received_payload[:na]
    lost = crc8_compute(rx_a, spec) != int(received_crc)
    corrupted = bool(np.any(rx_a != sent.payload[:na]))
    return LossVerdict(bool(lost), corrupted)


def frame_loss_batch(layout: CodecFrameLayout, sent_bits, received_bits, spec: CrcSpec = CRC8):
    """Vectorised verdicts for frames laid out as rows of ``total + 8`` bits.

    Returns ``(lost, class_a_corrupted)`` boolean arrays.
    """
    sent_bits = np.asarray(sent_bits, dtype=np.uint8)
    received_bits = np.asarray(received_bits, dtype=np.uint8)
    na, total = layout.class_a, layout.total
    rx_crc = _kernels.pack_bits8(np.ascontiguousarray(received_bits[:, total : total + 8]))
    lost = crc8_batch(received_bits[:, :na], spec) != rx_crc
    corrupted = np.any(received_bits[:, :na] != sent_bits[:, :na], axis=1)
    return lost, corrupted
