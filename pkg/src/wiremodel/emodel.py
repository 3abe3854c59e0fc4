"""NB/WB E-model rating with packet-loss impairment.

Only the effective equipment impairment is modelled. The simultaneous
(``is_``), delay (``id_``) and advantage terms are plain numeric inputs.
"""

from __future__ import annotations

import enum
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

__all__ = [
    "Band",
    "CodecProfile",
    "TransmissionParams",
    "RScore",
    "MosScore",
    "PlanningWarning",
    "PPL_PERMITTED_MAX",
    "effective_impairment_nb",
    "effective_impairment_wb",
    "effective_impairment",
    "r_score",
    "wb_to_nb",
    "r_to_mos",
    "load_codec_registry",
    "save_codec_registry",
]

R0_NB = 93.2
R0_WB = 129.0
R_MAX = {"NB": 100.0, "WB": 129.0}
IE_MAX = 95.0
# Upper end of the random packet-loss range G.107 calibrates for.
PPL_PERMITTED_MAX = 20.0


class PlanningWarning(UserWarning):
    """Input is computable but outside the range the E-model is calibrated for."""


class Band(str, enum.Enum):
    NB = "NB"
    WB = "WB"

    @classmethod
    def parse(cls, value: "Band | str") -> "Band":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ValueError(f"unsupported band {value!r}; only NB and WB are modelled") from None


@dataclass(frozen=True)
class CodecProfile:
    """E-model parameters of one codec mode.

    For WB profiles ``ie`` and ``bpl`` hold Ie,WB and Bpl_WB and
    ``default_burst_r`` is pinned to 1.
    """

    name: str
    band: Band
    ie: float
    bpl: float
    default_burst_r: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "band", Band.parse(self.band))
        if not 0.0 <= self.ie <= IE_MAX:
            raise ValueError(f"{self.name}: ie must lie in [0, 95], got {self.ie}")
        if not self.bpl > 0.0:
            raise ValueError(f"{self.name}: bpl must be > 0, got {self.bpl}")
        if not self.default_burst_r >= 1.0:
            raise ValueError(f"{self.name}: burst_r must be >= 1, got {self.default_burst_r}")
        if self.band is Band.WB and self.default_burst_r != 1.0:
            raise ValueError(f"{self.name}: WB profiles have no burst ratio (must be 1)")

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "band": self.band.value,
            "ie": self.ie,
            "bpl": self.bpl,
            "burst_r": self.default_burst_r,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CodecProfile":
        return cls(
            name=obj["name"],
            band=Band.parse(obj["band"]),
            ie=float(obj["ie"]),
            bpl=float(obj["bpl"]),
            default_burst_r=float(obj.get("burst_r", 1.0)),
        )


@dataclass(frozen=True)
class TransmissionParams:
    """R-scale terms other than the equipment impairment."""

    r0: float = R0_NB
    is_: float = 0.0
    id_: float = 0.0
    advantage: float = 0.0
    band: Band = field(default=Band.NB)

    def __post_init__(self):
        object.__setattr__(self, "band", Band.parse(self.band))
        for name in ("r0", "is_", "id_", "advantage"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")
        if self.is_ < 0 or self.id_ < 0:
            raise ValueError("is_ and id_ must be non-negative")
        if not 0.0 <= self.advantage <= 20.0:
            raise ValueError(f"advantage must lie in [0, 20], got {self.advantage}")

    @classmethod
    def default(cls, band: "Band | str", **overrides) -> "TransmissionParams":
        band = Band.parse(band)
        r0 = R0_NB if band is Band.NB else R0_WB
        overrides.setdefault("r0", r0)
        return cls(band=band, **overrides)


@dataclass(frozen=True)
class RScore:
    value: float
    band: Band

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class MosScore:
    value: float

    def __float__(self):
        return float(self.value)


def _check_ppl(ppl: float) -> float:
    ppl = float(ppl)
    if not 0.0 <= ppl <= 100.0:
        raise ValueError(f"ppl must be a percentage in [0, 100], got {ppl}")
    if ppl > PPL_PERMITTED_MAX:
        warnings.warn(
            f"Ppl={ppl:.3g}% exceeds the permitted random-loss range (0-20%)",
            PlanningWarning,
            stacklevel=3,
        )
    return ppl


def _require_band(profile: CodecProfile, band: Band):
    if profile.band is not band:
        raise ValueError(f"{profile.name} is a {profile.band.value} profile, expected {band.value}")


def effective_impairment_nb(profile: CodecProfile, ppl: float, burst_r: float | None = None) -> float:
    """Ie,eff = Ie + (95 - Ie) * Ppl / (Ppl/BurstR + Bpl).

    Parameters
    ----------
    profile : CodecProfile
        NB codec profile.
    ppl : float
        Packet-loss probability in percent.
    burst_r : float, optional
        Burst ratio, defaults to the profile's; 1 for random loss.
    """
    _require_band(profile, Band.NB)
    ppl = _check_ppl(ppl)
    if burst_r is None:
        burst_r = profile.default_burst_r
    if not burst_r >= 1.0:
        raise ValueError(f"burst_r must be >= 1, got {burst_r}")
    ie = profile.ie
    return ie + (IE_MAX - ie) * ppl / (ppl / burst_r + profile.bpl)


def effective_impairment_wb(profile: CodecProfile, ppl: float) -> float:
    """Ie,eff,WB = Ie,WB + (95 - Ie,WB) * Ppl / (Ppl + Bpl_WB)."""
    _require_band(profile, Band.WB)
    ppl = _check_ppl(ppl)
    ie = profile.ie
    return ie + (IE_MAX - ie) * ppl / (ppl + profile.bpl)


def effective_impairment(profile: CodecProfile, ppl: float, burst_r: float | None = None) -> float:
    """Dispatch on the profile band."""
    if profile.band is Band.NB:
        return effective_impairment_nb(profile, ppl, burst_r)
    if burst_r not in (None, 1, 1.0):
        raise ValueError("burst_r does not apply to WB profiles")
    return effective_impairment_wb(profile, ppl)


def r_score(params: TransmissionParams, ie_eff: float) -> RScore:
    """R = R0 - Is - Id - Ie,eff + A, clamped to the band's scale."""
    if not math.isfinite(ie_eff) or not 0.0 <= ie_eff <= IE_MAX:
        raise ValueError(f"ie_eff must lie in [0, 95], got {ie_eff}")
    raw = params.r0 - params.is_ - params.id_ - ie_eff + params.advantage
    return RScore(min(max(raw, 0.0), R_MAX[params.band.value]), params.band)


def wb_to_nb(r: RScore) -> RScore:
    """Map a WB rating (0-129) linearly onto the NB scale (0-100)."""
    if r.band is not Band.WB:
        raise ValueError("wb_to_nb expects a WB rating")
    if not 0.0 <= r.value <= R_MAX["WB"]:
        raise ValueError(f"WB rating must lie in [0, 129], got {r.value}")
    return RScore(r.value * 100.0 / R_MAX["WB"], Band.NB)


def r_to_mos(r: "RScore | float") -> MosScore:
    """G.107 R-to-MOS cubic. Plain floats are taken as NB ratings."""
    if isinstance(r, RScore):
        if r.band is not Band.NB:
            raise ValueError("r_to_mos is defined on the NB scale; apply wb_to_nb first")
        r = r.value
    r = float(r)
    if r < 0.0:
        return MosScore(1.0)
    if r > 100.0:
        return MosScore(4.5)
    return MosScore(1.0 + 0.035 * r + r * (r - 60.0) * (100.0 - r) * 7e-6)


def load_codec_registry(path) -> dict[str, CodecProfile]:
    """Read a JSON array of ``{name, band, ie, bpl, burst_r}`` records."""
    with open(path) as fh:
        records = json.load(fh)
    if not isinstance(records, list):
        raise ValueError(f"{path}: codec registry must be a JSON array")
    profiles = {}
    for rec in records:
        prof = CodecProfile.from_json(rec)
        if prof.name in profiles:
            raise ValueError(f"{path}: duplicate codec profile {prof.name!r}")
        profiles[prof.name] = prof
    return profiles


def save_codec_registry(profiles, path):
    items = profiles.values() if isinstance(profiles, dict) else profiles
    Path(path).write_text(json.dumps([p.to_json() for p in items], indent=2) + "\n")


def default_registry_path() -> Path:
    return Path(__file__).parent / "data" / "codecs.example.json"
