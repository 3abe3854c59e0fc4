"""Orthogonal space-time block codes for 1 to 4 transmit antennas.

A design with ``K`` symbols over ``T`` slots and ``Mt`` antennas is stored as
two coefficient tensors ``A, B`` of shape ``(K, T, Mt)`` so that a block is

    X = scale * sum_k (A[k] * s_k + B[k] * conj(s_k))

Decoding uses the real-valued linearisation of ``Y = X H^T + N``; the
orthogonality of the design makes the matched filter the ML combiner.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..pplmodel import AntennaSet

__all__ = ["OstbcScheme", "ostbc_scheme", "ostbc_encode", "ostbc_decode", "effective_matrix"]


def _design(entries, K, T, Mt):
    # entries[t][m] = (sign, symbol, conj) or None
    A = np.zeros((K, T, Mt), dtype=np.complex128)
    B = np.zeros((K, T, Mt), dtype=np.complex128)
    for t in range(T):
        for m in range(Mt):
            e = entries[t][m]
            if e is None:
                continue
            sign, k, conj = e
            (B if conj else A)[k, t, m] = sign
    return A, B


_SISO = [[(1, 0, False)]]
_ALAMOUTI = [
    [(1, 0, False), (1, 1, False)],
    [(-1, 1, True), (1, 0, True)],
]
# Rate-3/4 complex orthogonal design; the 3-antenna code keeps the first
# three columns.
_G4 = [
    [(1, 0, False), (1, 1, False), (1, 2, False), None],
    [(-1, 1, True), (1, 0, True), None, (1, 2, False)],
    [(-1, 2, True), None, (1, 0, True), (-1, 1, False)],
    [None, (-1, 2, True), (1, 1, True), (1, 0, False)],
]


@dataclass(frozen=True, eq=False)
class OstbcScheme:
    antennas: AntennaSet
    A: np.ndarray
    B: np.ndarray
    scale: float

    @property
    def n_symbols(self) -> int:
        return self.A.shape[0]

    @property
    def n_slots(self) -> int:
        return self.A.shape[1]

    @property
    def n_tx(self) -> int:
        return self.A.shape[2]

    @property
    def code_rate(self) -> float:
        return self.n_symbols / self.n_slots

    @property
    def name(self) -> str:
        return {1: "siso", 2: "alamouti"}.get(self.n_tx, f"g{self.n_tx}-rate3/4")

    def generator(self, s) -> np.ndarray:
        """Space-time block (T x Mt) for one block of K symbols."""
        s = np.asarray(s, dtype=np.complex128)
        return self.scale * (np.tensordot(s, self.A, axes=(0, 0)) + np.tensordot(s.conj(), self.B, axes=(0, 0)))


@lru_cache(maxsize=None)
def _scheme(n_tx: int, m_rx: int) -> OstbcScheme:
    if n_tx == 1:
        A, B = _design(_SISO, 1, 1, 1)
    elif n_tx == 2:
        A, B = _design(_ALAMOUTI, 2, 2, 2)
    elif n_tx in (3, 4):
        A, B = _design([row[:n_tx] for row in _G4], 3, 4, n_tx)
    else:
        raise ValueError(f"no OSTBC for {n_tx} transmit antennas")
    # Normalise mean total transmit power per slot to 1 for unit-energy
    # symbols. Equals 1/sqrt(Mt) for the full-rate codes.
    nonzero = np.count_nonzero(np.abs(A) + np.abs(B))
    scale = float(np.sqrt(A.shape[1] / nonzero))
    A.setflags(write=False)
    B.setflags(write=False)
    return OstbcScheme(AntennaSet(n_tx, m_rx), A, B, scale)


def ostbc_scheme(antennas) -> OstbcScheme:
    if isinstance(antennas, tuple):
        antennas = AntennaSet(*antennas)
    return _scheme(antennas.n_tx, antennas.m_rx)


def ostbc_encode(symbols, scheme: OstbcScheme, return_padding: bool = False):
    """Encode a symbol stream to a ``(time, n_tx)`` matrix.

    The stream is zero-padded to a whole number of blocks. Leading
    dimensions other than the last are treated as independent streams.
    """
    s = np.asarray(symbols, dtype=np.complex128)
    K = scheme.n_symbols
    pad = (-s.shape[-1]) % K
    if pad:
        s = np.concatenate([s, np.zeros(s.shape[:-1] + (pad,), dtype=s.dtype)], axis=-1)
    blocks = s.reshape(s.shape[:-1] + (-1, K))
    K, T, Mt = scheme.A.shape
    X = blocks @ scheme.A.reshape(K, T * Mt) + blocks.conj() @ scheme.B.reshape(K, T * Mt)
    X = scheme.scale * X.reshape(s.shape[:-1] + (-1, Mt))
    return (X, pad) if return_padding else X


def effective_matrix(h, scheme: OstbcScheme) -> np.ndarray:
    """Real linear map from ``[Re s; Im s]`` to the stacked ``[Re Y; Im Y]`` of one block.

    ``h`` has shape ``(..., m_rx, n_tx)``; the result ``(..., 2*T*Mr, 2*K)``.
    """
    h = np.asarray(h, dtype=np.complex128)
    # Y = X H^T: contribution of s_k's real and imaginary parts.
    HA = np.einsum("ktm,...rm->...ktr", scheme.A, h)
    HB = np.einsum("ktm,...rm->...ktr", scheme.B, h)
    col_re = scheme.scale * (HA + HB)
    col_im = scheme.scale * 1j * (HA - HB)
    lead = h.shape[:-2]
    K = scheme.n_symbols
    cols = np.concatenate([col_re, col_im], axis=-3)  # (..., 2K, T, Mr)
    cols = cols.reshape(lead + (2 * K, -1))
    F = np.concatenate([cols.real, cols.imag], axis=-1)  # (..., 2K, 2*T*Mr)
    return np.swapaxes(F, -1, -2)


def ostbc_decode(received, h, scheme: OstbcScheme) -> np.ndarray:
    """Linear combining of a ``(time, m_rx)`` block stream with known ``h``.

    ``received`` may carry leading batch dimensions matching those of ``h``
    (one channel matrix per batch entry). Returns the symbol estimates.
    """
    Y = np.asarray(received, dtype=np.complex128)
    h = np.asarray(h, dtype=np.complex128)
    T, K = scheme.n_slots, scheme.n_symbols
    if h.shape[-2:] != (Y.shape[-1], scheme.n_tx):
        raise ValueError(f"channel shape {h.shape[-2:]} does not match received {Y.shape} / {scheme.n_tx} tx")
    if Y.shape[-2] % T:
        raise ValueError(f"received length {Y.shape[-2]} is not a multiple of the block length {T}")
    F = effective_matrix(h, scheme)
    gram = np.einsum("...ij,...ij->...j", F, F)  # column norms; equal by orthogonality
    blocks = Y.reshape(Y.shape[:-2] + (-1, T * Y.shape[-1]))
    y = np.concatenate([blocks.real, blocks.imag], axis=-1)  # (..., nb, 2TMr)
    z = (y @ F) / gram[..., None, :]
    s = z[..., :K] + 1j * z[..., K:]
    return s.reshape(s.shape[:-2] + (-1,))
