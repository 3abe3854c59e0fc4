"""Unit-energy Gray-labelled PSK/QAM alphabets."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .. import _kernels
from ..pplmodel import ModulationScheme

__all__ = ["Constellation", "constellation", "modulate", "demodulate", "bits_to_ints", "ints_to_bits"]

# Bump if any labelling below changes; recorded in sweep manifests.
LABELLING_VERSION = "gray-v1/qam32-cross-v1"


@dataclass(frozen=True, eq=False)
class Constellation:
    """Points indexed by their bit label (``points[label]``), MSB first."""

    scheme: ModulationScheme
    points: np.ndarray

    @property
    def order(self) -> int:
        return self.points.size

    @property
    def bits_per_symbol(self) -> int:
        return int(np.log2(self.points.size))

    @property
    def bit_map(self) -> dict[tuple[int, ...], int]:
        k = self.bits_per_symbol
        return {tuple(int(b) for b in ints_to_bits(np.array([i]), k)): i for i in range(self.order)}


def _gray(n):
    return n ^ (n >> 1)


def _pam_levels(bits: int) -> np.ndarray:
    """Amplitude of each Gray label on one axis; label 0 sits at the positive edge."""
    n = 1 << bits
    levels = np.empty(n)
    for i in range(n):
        levels[_gray(i)] = n - 1 - 2 * i
    return levels


def _square_qam(order: int) -> np.ndarray:
    k = int(np.log2(order))
    ki = k // 2
    kq = k - ki
    li, lq = _pam_levels(ki), _pam_levels(kq)
    labels = np.arange(order)
    return li[labels >> kq] + 1j * lq[labels & ((1 << kq) - 1)]


def _cross_qam32() -> np.ndarray:
    # Start from an 8x4 Gray rectangle (3 bits on I, 2 on Q) and fold the
    # |I| = 7 columns onto the missing |Q| = 5 rows of the 6x6 cross.
    pts = _square_rect(3, 2)
    out = pts.copy()
    for lab, p in enumerate(pts):
        if abs(p.real) == 7:
            q = p.imag
            out[lab] = np.sign(p.real) * (4 - abs(q)) + 1j * 5 * np.sign(q)
    return out


def _square_rect(ki: int, kq: int) -> np.ndarray:
    li, lq = _pam_levels(ki), _pam_levels(kq)
    labels = np.arange(1 << (ki + kq))
    return li[labels >> kq] + 1j * lq[labels & ((1 << kq) - 1)]


@lru_cache(maxsize=None)
def constellation(scheme) -> Constellation:
    scheme = ModulationScheme.parse(scheme)
    if scheme is ModulationScheme.BPSK:
        pts = np.array([1.0 + 0j, -1.0 + 0j])
    elif scheme is ModulationScheme.QAM32:
        pts = _cross_qam32()
    else:
        pts = _square_qam(scheme.order)
    pts = pts / np.sqrt(np.mean(np.abs(pts) ** 2))
    pts.setflags(write=False)
    return Constellation(scheme, pts)


def bits_to_ints(bits, k: int) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64).reshape(-1, k)
    weights = 1 << np.arange(k - 1, -1, -1, dtype=np.int64)
    return bits @ weights


def ints_to_bits(values, k: int) -> np.ndarray:
    values = np.asarray(values, dtype=np.int64).ravel()
    shifts = np.arange(k - 1, -1, -1, dtype=np.int64)
    return ((values[:, None] >> shifts) & 1).astype(np.uint8).ravel()


def modulate(bits, const: Constellation, return_padding: bool = False):
    """Map bits to symbols, zero-padding the tail to a whole symbol."""
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    k = const.bits_per_symbol
    pad = (-bits.size) % k
    if pad:
        bits = np.concatenate([bits, np.zeros(pad, dtype=np.uint8)])
    symbols = const.points[bits_to_ints(bits, k)]
    return (symbols, pad) if return_padding else symbols


def demodulate(symbols, const: Constellation) -> np.ndarray:
    """Hard minimum-distance decision; returns bits."""
    symbols = np.asarray(symbols, dtype=np.complex128)
    idx = _kernels.nearest_point(symbols.ravel(), const.points)
    return ints_to_bits(idx, const.bits_per_symbol)


def demodulate_indices(symbols, const: Constellation) -> np.ndarray:
    return _kernels.nearest_point(np.asarray(symbols, dtype=np.complex128).ravel(), const.points)
