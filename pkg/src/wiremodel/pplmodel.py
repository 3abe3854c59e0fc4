"""Packet-loss prediction from modulation, antenna set and SNR.

The predictor is a power law in the SNR expressed in dB::

    Ppl' = a * snr_db ** b + c        (percent)

with one ``(a, b, c)`` row per (modulation, antenna set).
"""

from __future__ import annotations

import enum
import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

from .emodel import (
    PPL_PERMITTED_MAX,
    Band,
    CodecProfile,
    PlanningWarning,
    effective_impairment_nb,
    effective_impairment_wb,
)

__all__ = [
    "ModulationScheme",
    "AntennaSet",
    "WirelessConfig",
    "PowerLawCoefficients",
    "CoefficientRow",
    "CoefficientTable",
    "MissingCoefficientRow",
    "builtin_table",
    "estimate_ppl",
    "raw_power_law",
    "predicted_ie_eff_nb",
    "predicted_ie_eff_wb",
    "SYMMETRIC_ANTENNA_SETS",
]

SNR_DESIGN_RANGE = (0.0, 30.0)


class ModulationScheme(str, enum.Enum):
    BPSK = "BPSK"
    QPSK = "QPSK"
    QAM16 = "QAM16"
    QAM32 = "QAM32"
    QAM64 = "QAM64"
    QAM256 = "QAM256"

    @property
    def order(self) -> int:
        return _ORDER[self]

    @property
    def bits_per_symbol(self) -> int:
        return int(math.log2(_ORDER[self]))

    @classmethod
    def parse(cls, value: "ModulationScheme | str") -> "ModulationScheme":
        if isinstance(value, cls):
            return value
        key = str(value).upper().replace("-", "").replace("_", "").replace(" ", "")
        if key.endswith("QAM") and key[:-3].isdigit():
            key = "QAM" + key[:-3]
        if key == "QAM4":
            key = "QPSK"
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown modulation scheme {value!r}") from None


_ORDER = {
    ModulationScheme.BPSK: 2,
    ModulationScheme.QPSK: 4,
    ModulationScheme.QAM16: 16,
    ModulationScheme.QAM32: 32,
    ModulationScheme.QAM64: 64,
    ModulationScheme.QAM256: 256,
}


@dataclass(frozen=True, order=True)
class AntennaSet:
    n_tx: int
    m_rx: int

    def __post_init__(self):
        for v in (self.n_tx, self.m_rx):
            if int(v) != v or not 1 <= v <= 4:
                raise ValueError(f"antenna counts must be integers in 1..4, got ({self.n_tx}, {self.m_rx})")

    def __str__(self):
        return f"({self.n_tx},{self.m_rx})"


SYMMETRIC_ANTENNA_SETS = tuple(AntennaSet(n, n) for n in (1, 2, 3, 4))


@dataclass(frozen=True)
class WirelessConfig:
    modulation: ModulationScheme
    antennas: AntennaSet
    snr_db: float

    def __post_init__(self):
        object.__setattr__(self, "modulation", ModulationScheme.parse(self.modulation))
        if isinstance(self.antennas, tuple):
            object.__setattr__(self, "antennas", AntennaSet(*self.antennas))
        if math.isnan(self.snr_db):
            raise ValueError("snr_db must not be NaN")


@dataclass(frozen=True)
class PowerLawCoefficients:
    a: float
    b: float
    c: float

    def __call__(self, snr_db):
        return self.a * snr_db ** self.b + self.c

    def check(self, label: str = "") -> bool:
        ok = self.a > 0 and self.b < 0
        if not ok:
            warnings.warn(
                f"coefficient row {label} has a={self.a}, b={self.b}; expected a > 0 and b < 0",
                PlanningWarning,
                stacklevel=2,
            )
        return ok


@dataclass(frozen=True)
class CoefficientRow:
    modulation: ModulationScheme
    antennas: AntennaSet
    coeffs: PowerLawCoefficients
    provenance: str = "user"
    note: str = ""

    PROVENANCES = ("builtin-paper", "fitted", "user")

    def __post_init__(self):
        if self.provenance not in self.PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")

    @property
    def key(self):
        return (self.modulation, self.antennas)

    def to_json(self) -> dict:
        out = {
            "modulation": self.modulation.value,
            "n_tx": self.antennas.n_tx,
            "m_rx": self.antennas.m_rx,
            "a": self.coeffs.a,
            "b": self.coeffs.b,
            "c": self.coeffs.c,
            "provenance": self.provenance,
        }
        if self.note:
            out["note"] = self.note
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "CoefficientRow":
        return cls(
            modulation=ModulationScheme.parse(obj["modulation"]),
            antennas=AntennaSet(int(obj["n_tx"]), int(obj["m_rx"])),
            coeffs=PowerLawCoefficients(float(obj["a"]), float(obj["b"]), float(obj["c"])),
            provenance=obj.get("provenance", "user"),
            note=obj.get("note", ""),
        )


class MissingCoefficientRow(KeyError):
    pass


class CoefficientTable(Mapping):
    """Immutable (modulation, antenna set) -> coefficient row mapping."""

    def __init__(self, rows: Iterable[CoefficientRow]):
        data = {}
        for row in rows:
            if row.key in data:
                raise ValueError(f"duplicate coefficient row for {row.modulation.value} {row.antennas}")
            row.coeffs.check(f"{row.modulation.value} {row.antennas}")
            data[row.key] = row
        self._rows = MappingProxyType(data)

    def __getitem__(self, key) -> CoefficientRow:
        mod, ant = key
        mod = ModulationScheme.parse(mod)
        if isinstance(ant, tuple):
            ant = AntennaSet(*ant)
        try:
            return self._rows[(mod, ant)]
        except KeyError:
            raise MissingCoefficientRow(f"no coefficient row for {mod.value} {ant}") from None

    def __iter__(self):
        return iter(self._rows)

    def __len__(self):
        return len(self._rows)

    def lookup(self, modulation, antennas) -> PowerLawCoefficients:
        return self[(modulation, antennas)].coeffs

    def rows(self) -> list[CoefficientRow]:
        return sorted(self._rows.values(), key=lambda r: (list(ModulationScheme).index(r.modulation), r.antennas))

    def to_json(self) -> list[dict]:
        return [r.to_json() for r in self.rows()]

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n")

    @classmethod
    def from_json(cls, records) -> "CoefficientTable":
        if not isinstance(records, list):
            raise ValueError("coefficient table must be a JSON array")
        return cls(CoefficientRow.from_json(r) for r in records)

    @classmethod
    def load(cls, path) -> "CoefficientTable":
        if str(path) == "builtin":
            return builtin_table()
        with open(path) as fh:
            return cls.from_json(json.load(fh))


_M = ModulationScheme
# (modulation, n) -> (a, b, c, note); antenna set is (n, n).
_PUBLISHED = {
    (_M.QPSK, 1): (8395e6, -11.2, -0.0004646, ""),
    (_M.QPSK, 2): (43900.0, -6.434, -0.0001633, ""),
    (_M.QPSK, 3): (60.61, -3.651, -0.0009027, ""),
    (_M.QPSK, 4): (12.12, -3.722, -0.0002535, ""),
    (_M.BPSK, 1): (1019.0, -5.002, -0.002132, ""),
    (_M.BPSK, 2): (90.26, -4.357, -0.001042, ""),
    (_M.BPSK, 3): (0.1684, -1.757, -0.0009269, ""),
    (_M.BPSK, 4): (0.3692, -3.25, -0.000051, ""),
    (_M.QAM16, 1): (1.241e16, -14.19, 0.0, ""),
    (_M.QAM16, 2): (2.04e8, -7.805, -0.0025011, ""),
    (_M.QAM16, 3): (3.751e14, -14.66, -0.0000017, "reconstructed: exponent base printed as '3.751x^14', read as 3.751e14"),
    (_M.QAM16, 4): (4.624e7, -8.614, -0.0002708, ""),
    (_M.QAM32, 1): (2.898e20, -1.78, -0.0000001, "reconstructed: b=-1.78 kept as printed; row never reaches Ppl <= 20% inside 0-30 dB"),
    (_M.QAM32, 2): (6.607e7, -7.132, -0.009703, ""),
    (_M.QAM32, 3): (3.725e10, -9.859, 0.0, ""),
    (_M.QAM32, 4): (1.142e15, -14.51, 0.0, "reconstructed: a printed as '1.142v10^15', read as 1.142e15"),
    (_M.QAM64, 1): (7.08e33, -25.91, 0.0, ""),
    (_M.QAM64, 2): (2.756e30, -24.09, -0.0000013, ""),
    (_M.QAM64, 3): (5.403e27, -23.23, 0.0, ""),
    (_M.QAM64, 4): (1.043e10, -9.116, -0.002523, ""),
    (_M.QAM256, 1): (5.922e25, -18.52, 0.0, ""),
    (_M.QAM256, 2): (3.302e17, -13.05, 0.0, ""),
    (_M.QAM256, 3): (5.465e22, -17.32, -0.0000012, ""),
    (_M.QAM256, 4): (2.975e23, -18.28, 0.0, ""),
}


def builtin_table() -> CoefficientTable:
    """The 24 published AWGN coefficient rows (6 modulations x 4 antenna sets)."""
    return CoefficientTable(
        CoefficientRow(mod, AntennaSet(n, n), PowerLawCoefficients(a, b, c), "builtin-paper", note)
        for (mod, n), (a, b, c, note) in _PUBLISHED.items()
    )


def raw_power_law(config: WirelessConfig, table: CoefficientTable) -> float:
    """Unclamped a * snr**b + c."""
    coeffs = table.lookup(config.modulation, config.antennas)
    snr = config.snr_db
    if not snr > 0.0:
        raise ValueError(
            f"snr_db={snr} is outside the power law's domain (snr_db > 0); treat Ppl' as 100%"
        )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        try:
            return coeffs.a * snr ** coeffs.b + coeffs.c
        except OverflowError:
            return math.inf


def estimate_ppl(config: WirelessConfig, table: CoefficientTable) -> float:
    """Predicted packet loss in percent, clamped to [0, 100]."""
    lo, hi = SNR_DESIGN_RANGE
    if math.isfinite(config.snr_db) and not lo <= config.snr_db <= hi:
        warnings.warn(f"snr_db={config.snr_db} is outside the designed 0-30 dB range", PlanningWarning, stacklevel=2)
    raw = raw_power_law(config, table)
    if raw > PPL_PERMITTED_MAX:
        warnings.warn(
            f"Ppl'={raw:.4g}% for {config.modulation.value} {config.antennas} at {config.snr_db} dB "
            "exceeds the permitted random-loss range (0-20%)",
            PlanningWarning,
            stacklevel=2,
        )
    return min(max(raw, 0.0), 100.0)


def predicted_ie_eff_nb(profile: CodecProfile, config: WirelessConfig, table: CoefficientTable, burst_r=None) -> float:
    if profile.band is not Band.NB:
        raise ValueError(f"{profile.name} is not an NB profile")
    ppl = estimate_ppl(config, table)
    with warnings.catch_warnings():
        # estimate_ppl already flagged the range
        warnings.simplefilter("ignore", PlanningWarning)
        return effective_impairment_nb(profile, ppl, burst_r)


def predicted_ie_eff_wb(profile: CodecProfile, config: WirelessConfig, table: CoefficientTable) -> float:
    if profile.band is not Band.WB:
        raise ValueError(f"{profile.name} is not a WB profile")
    ppl = estimate_ppl(config, table)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PlanningWarning)
        return effective_impairment_wb(profile, ppl)
