"""Hot inner loops: nearest-point demapping, Box-Muller noise and batched CRC.

Each kernel has a numba ``@njit`` version and a pure-numpy version with the
same signature. The numba path is used when numba imports and the
environment variable ``WIREMODEL_DISABLE_NUMBA`` is unset (or ``0``).
"""

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

_DISABLED = os.environ.get("WIREMODEL_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")
NUMBA_AVAILABLE = numba is not None and not _DISABLED

# Peak working set of the numpy demapper, in distance entries.
_NUMPY_CHUNK = 1 << 20


def nearest_point_numpy(symbols, points):
    symbols = np.asarray(symbols, dtype=np.complex128).ravel()
    points = np.asarray(points, dtype=np.complex128)
    out = np.empty(symbols.size, dtype=np.int64)
    step = max(1, _NUMPY_CHUNK // points.size)
    for lo in range(0, symbols.size, step):
        d = symbols[lo : lo + step, None] - points[None, :]
        out[lo : lo + step] = np.argmin(d.real * d.real + d.imag * d.imag, axis=1)
    return out


_INV_2_53 = 1.0 / 9007199254740992.0
_TWO_PI = 2.0 * np.pi


def box_muller_numpy(words):
    """CN(0, 1) from consecutive pairs of uint64 words (flat input)."""
    w = words.reshape(-1, 2)
    u1 = ((w[:, 0] >> np.uint64(11)).astype(np.float64) + 1.0) * _INV_2_53
    u2 = (w[:, 1] >> np.uint64(11)).astype(np.float64) * _INV_2_53
    r = np.sqrt(-np.log(u1))
    return r * np.cos(_TWO_PI * u2) + 1j * (r * np.sin(_TWO_PI * u2))


def crc8_rows_numpy(bits, poly, init):
    reg = np.full(bits.shape[0], init, dtype=np.uint8)
    poly = np.uint8(poly)
    for j in range(bits.shape[1]):
        fb = (reg >> 7) ^ bits[:, j]
        reg = (reg << 1) ^ (fb * poly)
    return reg


def pack_bits8_numpy(bits):
    return np.packbits(bits, axis=1)[:, 0]


if NUMBA_AVAILABLE:

    @numba.njit(cache=True, nogil=True)
    def nearest_point_numba(symbols, points):
        n = symbols.size
        m = points.size
        out = np.empty(n, dtype=np.int64)
        for i in range(n):
            yr = symbols[i].real
            yi = symbols[i].imag
            best = 0
            best_d = np.inf
            for k in range(m):
                dr = yr - points[k].real
                di = yi - points[k].imag
                d = dr * dr + di * di
                if d < best_d:
                    best_d = d
                    best = k
            out[i] = best
        return out

    @numba.njit(cache=True, nogil=True)
    def box_muller_numba(words):
        n = words.size // 2
        out = np.empty(n, dtype=np.complex128)
        for i in range(n):
            u1 = (np.float64(words[2 * i] >> np.uint64(11)) + 1.0) * _INV_2_53
            u2 = np.float64(words[2 * i + 1] >> np.uint64(11)) * _INV_2_53
            r = np.sqrt(-np.log(u1))
            out[i] = complex(r * np.cos(_TWO_PI * u2), r * np.sin(_TWO_PI * u2))
        return out

    @numba.njit(cache=True, nogil=True)
    def crc8_rows_numba(bits, poly, init):
        n, w = bits.shape
        out = np.empty(n, dtype=np.uint8)
        for i in range(n):
            reg = init
            for j in range(w):
                fb = ((reg >> 7) ^ bits[i, j]) & 1
                reg = (reg << 1) & 0xFF
                if fb:
                    reg ^= poly
            out[i] = reg
        return out

    @numba.njit(cache=True, nogil=True)
    def pack_bits8_numba(bits):
        n = bits.shape[0]
        out = np.empty(n, dtype=np.uint8)
        for i in range(n):
            v = 0
            for j in range(8):
                v = (v << 1) | bits[i, j]
            out[i] = v
        return out

    def nearest_point(symbols, points):
        s = np.ascontiguousarray(symbols, dtype=np.complex128).ravel()
        return nearest_point_numba(s, np.ascontiguousarray(points, dtype=np.complex128))

    def box_muller(words):
        return box_muller_numba(np.ascontiguousarray(words, dtype=np.uint64).ravel())

    def crc8_rows(bits, poly, init):
        return crc8_rows_numba(np.ascontiguousarray(bits, dtype=np.uint8), int(poly), int(init))

    def pack_bits8(bits):
        return pack_bits8_numba(np.ascontiguousarray(bits, dtype=np.uint8))

else:
    nearest_point = nearest_point_numpy
    crc8_rows = crc8_rows_numpy
    box_muller = box_muller_numpy
    pack_bits8 = pack_bits8_numpy


def backend() -> str:
    return "numba" if NUMBA_AVAILABLE else "numpy"
