"""Frame-level Monte-Carlo: modulate, OSTBC, channel, combine, demodulate, CRC."""

from __future__ import annotations

import csv
import io
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .. import framing
from ..framing import CodecFrameLayout, FrameBits
from ..pplmodel import AntennaSet, ModulationScheme, WirelessConfig
from .channel import ChannelModel, ChannelVariant, complex_normal, frame_stream, point_key
from .constellation import constellation, demodulate_indices, ints_to_bits, modulate
from .ostbc import ostbc_decode, ostbc_encode, ostbc_scheme

__all__ = [
    "PplMeasurement",
    "transmit",
    "run_frame",
    "simulate_point",
    "measure_ber",
    "measure_ppl_sweep",
    "wilson_halfwidth",
    "worker_count",
    "CSV_HEADER",
    "write_sweep_csv",
    "read_sweep_csv",
]

log = logging.getLogger(__name__)

CSV_HEADER = ["modulation", "n_tx", "m_rx", "snr_db", "channel", "frames", "lost", "ppl_pct", "ci95_pct", "seed"]
Z95 = 1.959963984540054
# Frames pushed through the vectorised pipeline at once.
CHUNK_FRAMES = 256


def wilson_halfwidth(lost: int, n: int, z: float = Z95) -> float:
    """Half-width of the Wilson score interval, as a fraction."""
    if n <= 0:
        raise ValueError("n must be positive")
    p = lost / n
    denom = 1.0 + z * z / n
    return z / denom * math.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n))


@dataclass(frozen=True)
class PplMeasurement:
    config: WirelessConfig
    channel: ChannelVariant
    frames_sent: int
    frames_lost: int
    ppl_pct: float
    ci95: float
    seed: int
    # Frames whose Class A bits actually differ from what was sent.
    frames_corrupted: int = 0

    def __post_init__(self):
        if not 0 <= self.frames_lost <= self.frames_sent:
            raise ValueError("frames_lost must lie in [0, frames_sent]")

    def csv_row(self) -> list[str]:
        c = self.config
        return [
            c.modulation.value,
            str(c.antennas.n_tx),
            str(c.antennas.m_rx),
            _fmt(c.snr_db),
            self.channel.value,
            str(self.frames_sent),
            str(self.frames_lost),
            _fmt(self.ppl_pct),
            _fmt(self.ci95),
            str(self.seed),
        ]


def _fmt(x: float) -> str:
    return repr(float(x))


def _padded_bits(n_bits: int, k: int, K: int) -> int:
    step = k * K
    return -(-n_bits // step) * step


def transmit(tx_bits, config: WirelessConfig, channel: ChannelModel, h, noise):
    """Send rows of ``tx_bits`` through the link and return the hard-decided bits.

    Parameters
    ----------
    tx_bits : (frames, n_bits) uint8
    h : (frames, m_rx, n_tx) complex
        Channel matrix per frame (constant over the frame).
    noise : (frames, slots, m_rx) complex
        Unit-variance noise samples; scaled here by ``sqrt(N0)``.
    """
    tx_bits = np.asarray(tx_bits, dtype=np.uint8)
    frames, n_bits = tx_bits.shape
    const = constellation(config.modulation)
    scheme = ostbc_scheme(config.antennas)
    k = const.bits_per_symbol
    n_pad = _padded_bits(n_bits, k, scheme.n_symbols)
    bits = np.zeros((frames, n_pad), dtype=np.uint8)
    bits[:, :n_bits] = tx_bits
    symbols = modulate(bits, const).reshape(frames, -1)
    X = ostbc_encode(symbols, scheme)  # (frames, slots, n_tx)
    Y = X @ np.swapaxes(h, -1, -2)
    if channel.noise_var > 0.0:
        Y = Y + math.sqrt(channel.noise_var) * noise
    s_hat = ostbc_decode(Y, h, scheme)
    idx = demodulate_indices(s_hat, const)
    return ints_to_bits(idx, k).reshape(frames, -1)[:, :n_bits]


def _slots(n_bits: int, config: WirelessConfig) -> int:
    const = constellation(config.modulation)
    scheme = ostbc_scheme(config.antennas)
    n_pad = _padded_bits(n_bits, const.bits_per_symbol, scheme.n_symbols)
    return n_pad // const.bits_per_symbol // scheme.n_symbols * scheme.n_slots


def _draw(bitgen: np.random.Philox, n_words: int) -> np.ndarray:
    return np.asarray(bitgen.random_raw(n_words), dtype=np.uint64)


def _channel_and_noise(words, config, channel: ChannelModel, n_bits):
    m, n = config.antennas.m_rx, config.antennas.n_tx
    hw = channel.channel_words(m, n)
    slots = _slots(n_bits, config)
    h = channel.matrix(words[:, :hw], m, n)
    noise = complex_normal(words[:, hw : hw + 2 * slots * m]).reshape(words.shape[0], slots, m)
    return h, noise


def run_frame(frame: FrameBits, config: WirelessConfig, channel: ChannelModel, rng, bit_errors=None):
    """Send one frame and return its :class:`~wiremodel.framing.LossVerdict`.

    ``rng`` is a numpy bit generator (e.g. from :func:`frame_stream`).
    ``bit_errors`` is an optional XOR mask over the on-air bits.
    """
    tx = frame.to_bits()[None, :]
    n_bits = tx.shape[1]
    m, n = config.antennas.m_rx, config.antennas.n_tx
    words = _draw(rng, channel.channel_words(m, n) + 2 * _slots(n_bits, config) * m)[None, :]
    h, noise = _channel_and_noise(words, config, channel, n_bits)
    rx = transmit(tx, config, channel, h, noise)[0]
    if bit_errors is not None:
        rx = rx ^ np.asarray(bit_errors, dtype=np.uint8)
    received = FrameBits.from_bits(frame.layout, rx)
    return framing.frame_loss_decision(frame, received.payload, received.crc)


def simulate_point(layout: CodecFrameLayout, config: WirelessConfig, variant, frames: int, seed: int) -> PplMeasurement:
    """Measure Ppl at one grid point.

    Frame ``i`` draws payload, channel and noise from its own Philox stream
    keyed by (seed, point, i), so the result does not depend on chunking or
    on how points are distributed over workers.
    """
    if frames < 1:
        raise ValueError("frames must be >= 1")
    variant = ChannelVariant.parse(variant)
    channel = ChannelModel(variant, config.snr_db)
    key = point_key(seed, layout.name, config.modulation.value, config.antennas.n_tx, config.antennas.m_rx,
                    float(config.snr_db), variant.value)
    total = layout.total
    n_bits = total + 8
    m, n = config.antennas.m_rx, config.antennas.n_tx
    payload_words = -(-total // 64)
    hw = channel.channel_words(m, n)
    nw = 2 * _slots(n_bits, config) * m
    per_frame = payload_words + hw + nw

    lost = corrupted = 0
    for lo in range(0, frames, CHUNK_FRAMES):
        hi = min(frames, lo + CHUNK_FRAMES)
        words = np.stack([_draw(frame_stream(key, i), per_frame) for i in range(lo, hi)])
        payload = np.unpackbits(words[:, :payload_words].view(np.uint8), axis=1, bitorder="little")[:, :total]
        crc = framing.crc8_batch(payload[:, : layout.class_a])
        tx = np.concatenate([payload, np.unpackbits(crc[:, None], axis=1)], axis=1)
        h, noise = _channel_and_noise(words[:, payload_words:], config, channel, n_bits)
        rx = transmit(tx, config, channel, h, noise)
        l, c = framing.frame_loss_batch(layout, tx, rx)
        lost += int(l.sum())
        corrupted += int(c.sum())
    return PplMeasurement(
        config=config,
        channel=variant,
        frames_sent=frames,
        frames_lost=lost,
        ppl_pct=100.0 * lost / frames,
        ci95=100.0 * wilson_halfwidth(lost, frames),
        seed=seed,
        frames_corrupted=corrupted,
    )


def measure_ber(config: WirelessConfig, variant, n_bits: int, seed: int, block_bits: int = 480):
    """Uncoded bit errors over ``n_bits`` random bits; returns ``(errors, bits)``.

    Bits are sent in blocks of about ``block_bits`` (rounded up to whole
    space-time blocks), each block seeing one channel draw. The count
    is rounded up to whole blocks.
    """
    variant = ChannelVariant.parse(variant)
    channel = ChannelModel(variant, config.snr_db)
    const = constellation(config.modulation)
    scheme = ostbc_scheme(config.antennas)
    step = const.bits_per_symbol * scheme.n_symbols
    block = _padded_bits(max(block_bits, step), 1, step)
    n_blocks = -(-int(n_bits) // block)
    key = point_key(seed, "ber", config.modulation.value, config.antennas.n_tx, config.antennas.m_rx,
                    float(config.snr_db), variant.value)
    m, n = config.antennas.m_rx, config.antennas.n_tx
    payload_words = -(-block // 64)
    per_block = payload_words + channel.channel_words(m, n) + 2 * _slots(block, config) * m
    errors = 0
    for lo in range(0, n_blocks, CHUNK_FRAMES):
        hi = min(n_blocks, lo + CHUNK_FRAMES)
        words = np.stack([_draw(frame_stream(key, i), per_block) for i in range(lo, hi)])
        tx = np.unpackbits(words[:, :payload_words].view(np.uint8), axis=1, bitorder="little")[:, :block]
        h, noise = _channel_and_noise(words[:, payload_words:], config, channel, block)
        errors += int(np.count_nonzero(transmit(tx, config, channel, h, noise) != tx))
    return errors, n_blocks * block


def worker_count(default=None) -> int:
    env = os.environ.get("WIREMODEL_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"WIREMODEL_THREADS must be an integer, got {env!r}") from None
        return max(1, n)
    return default or os.cpu_count() or 1


def measure_ppl_sweep(
    layout: CodecFrameLayout,
    modulations: Iterable,
    antenna_sets: Iterable,
    snrs_db: Sequence[float],
    variant="rayleigh",
    frames_per_point: int = 500,
    seed: int = 0,
    workers: int | None = None,
) -> list[PplMeasurement]:
    """Ppl over the grid modulation x antennas x SNR, ordered in that nesting."""
    mods = sorted({ModulationScheme.parse(m) for m in modulations}, key=list(ModulationScheme).index)
    ants = sorted({a if isinstance(a, AntennaSet) else AntennaSet(*a) for a in antenna_sets})
    snrs = sorted({float(s) for s in snrs_db})
    if not (mods and ants and snrs):
        raise ValueError("empty sweep grid")
    if frames_per_point < 1:
        raise ValueError("frames_per_point must be >= 1")
    grid = [WirelessConfig(m, a, s) for m in mods for a in ants for s in snrs]
    workers = workers or worker_count()
    log.info("sweep: %d points x %d frames on %d worker(s)", len(grid), frames_per_point, workers)

    def job(cfg):
        return simulate_point(layout, cfg, variant, frames_per_point, seed)

    if workers == 1:
        return [job(cfg) for cfg in grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(job, grid))


def write_sweep_csv(measurements: Iterable[PplMeasurement], path_or_file=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for m in measurements:
        w.writerow(m.csv_row())
    text = buf.getvalue()
    if path_or_file is not None:
        if hasattr(path_or_file, "write"):
            path_or_file.write(text)
        else:
            with open(path_or_file, "w", newline="") as fh:
                fh.write(text)
    return text


def read_sweep_csv(path) -> list[PplMeasurement]:
    """Parse a sweep CSV; raises ``ValueError`` on schema problems."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if header != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        out = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(CSV_HEADER):
                raise ValueError(f"{path}:{lineno}: expected {len(CSV_HEADER)} fields")
            try:
                rec = dict(zip(CSV_HEADER, row))
                frames, lost = int(rec["frames"]), int(rec["lost"])
                out.append(
                    PplMeasurement(
                        config=WirelessConfig(
                            ModulationScheme.parse(rec["modulation"]),
                            AntennaSet(int(rec["n_tx"]), int(rec["m_rx"])),
                            float(rec["snr_db"]),
                        ),
                        channel=ChannelVariant.parse(rec["channel"]),
                        frames_sent=frames,
                        frames_lost=lost,
                        ppl_pct=float(rec["ppl_pct"]),
                        ci95=float(rec["ci95_pct"]),
                        seed=int(rec["seed"]),
                    )
                )
            except (KeyError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    return out
