"""Flat MIMO channel models and the counter-based random streams feeding them."""

from __future__ import annotations

import enum
import math
import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .. import _kernels

__all__ = ["ChannelVariant", "ChannelModel", "frame_stream", "point_key", "uniform_open", "complex_normal"]

_INV_2_53 = 1.0 / 9007199254740992.0


class ChannelVariant(str, enum.Enum):
    IDENTITY = "identity"
    RAYLEIGH = "rayleigh"

    @classmethod
    def parse(cls, value) -> "ChannelVariant":
        if isinstance(value, cls):
            return value
        key = str(value).lower()
        aliases = {"identityawgn": "identity", "awgn": "identity", "rayleighblockfading": "rayleigh"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(f"unknown channel variant {value!r}") from None


@dataclass(frozen=True)
class ChannelModel:
    """``y = H x + n`` with ``n ~ CN(0, N0)`` on every receive antenna.

    ``snr_db`` is total transmit power over N0 (transmit power is
    normalised to 1), i.e. the mean per-receive-antenna symbol SNR under
    unit-variance fading. ``inf`` means a noiseless channel.
    """

    variant: ChannelVariant
    snr_db: float

    def __post_init__(self):
        object.__setattr__(self, "variant", ChannelVariant.parse(self.variant))
        if math.isnan(self.snr_db):
            raise ValueError("snr_db must not be NaN")

    @property
    def noise_var(self) -> float:
        if self.snr_db == math.inf:
            return 0.0
        return 10.0 ** (-self.snr_db / 10.0)

    def channel_words(self, m_rx: int, n_tx: int) -> int:
        return 2 * m_rx * n_tx if self.variant is ChannelVariant.RAYLEIGH else 0

    def matrix(self, words: np.ndarray, m_rx: int, n_tx: int) -> np.ndarray:
        """Channel matrices from raw words of shape ``(frames, channel_words)``."""
        frames = words.shape[0]
        if self.variant is ChannelVariant.IDENTITY:
            return np.broadcast_to(np.eye(m_rx, n_tx, dtype=np.complex128), (frames, m_rx, n_tx))
        return complex_normal(words).reshape(frames, m_rx, n_tx)


def uniform_open(words: np.ndarray) -> np.ndarray:
    """Doubles in (0, 1] from the top 53 bits of each uint64."""
    return ((words >> np.uint64(11)).astype(np.float64) + 1.0) * _INV_2_53


def complex_normal(words: np.ndarray) -> np.ndarray:
    """CN(0, 1) samples by Box-Muller; consumes exactly two words per sample.

    The last axis of ``words`` is consumed in pairs.
    """
    w = np.asarray(words, dtype=np.uint64)
    out = _kernels.box_muller(np.ascontiguousarray(w).ravel())
    return out.reshape(w.shape[:-1] + (w.shape[-1] // 2,))


def _u64(x: float) -> int:
    return struct.unpack("<Q", struct.pack("<d", float(x)))[0]


def point_key(seed: int, *parts) -> np.ndarray:
    """128-bit Philox key for one grid point.

    Parts are hashed by value, so a point's stream does not depend on
    where it sits in the grid.
    """
    words = []
    for p in parts:
        if isinstance(p, float):
            words.append(_u64(p))
        elif isinstance(p, (int, np.integer)):
            words.append(int(p) & 0xFFFFFFFF_FFFFFFFF)
        else:
            words.append(zlib.crc32(str(p).encode()))
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(words))
    return ss.generate_state(2, dtype=np.uint64)


def frame_stream(key: np.ndarray, frame_index: int) -> np.random.Philox:
    """Independent Philox stream for one frame of one grid point.

    The frame index occupies the second counter word, leaving the first
    word for the frame's own draws.
    """
    counter = np.array([0, frame_index, 0, 0], dtype=np.uint64)
    return np.random.Philox(key=key, counter=counter)
