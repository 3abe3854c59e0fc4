"""Glue between the simulator, the fitter and the E-model.

These functions back the CLI subcommands and are usable directly.
"""

from __future__ import annotations

import logging
import math
import warnings
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .emodel import (
    PPL_PERMITTED_MAX,
    Band,
    CodecProfile,
    PlanningWarning,
    TransmissionParams,
    effective_impairment,
    r_score,
    r_to_mos,
    wb_to_nb,
)
from .fitting import ComparisonStats, DataSeries, FitResult, compare, fit_power_law, fit_window
from .linksim.sweep import PplMeasurement
from .pplmodel import (
    AntennaSet,
    CoefficientRow,
    CoefficientTable,
    ModulationScheme,
    WirelessConfig,
    estimate_ppl,
)

__all__ = ["Prediction", "predict", "pool_measurements", "fit_sweep", "rating_from_ppl", "validate", "GroupFit"]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Prediction:
    config: WirelessConfig
    codec: str
    band: Band
    ppl_prime_pct: float
    ie_eff: float
    r_score: float
    r_nb: float
    mos: float

    def to_json(self) -> dict:
        return {
            "modulation": self.config.modulation.value,
            "n_tx": self.config.antennas.n_tx,
            "m_rx": self.config.antennas.m_rx,
            "snr_db": self.config.snr_db,
            "codec": self.codec,
            "band": self.band.value,
            "ppl_prime_pct": self.ppl_prime_pct,
            "ie_eff": self.ie_eff,
            "r_score": self.r_score,
            "r_nb": self.r_nb,
            "mos": self.mos,
        }


def rating_from_ppl(profile: CodecProfile, ppl: float, params: TransmissionParams | None = None, burst_r=None):
    """(ie_eff, R on the profile's own scale, R on the NB scale, MOS) for a loss rate."""
    params = params or TransmissionParams.default(profile.band)
    if params.band is not profile.band:
        raise ValueError("transmission parameters and codec profile are for different bands")
    ie = effective_impairment(profile, ppl, burst_r)
    r = r_score(params, ie)
    r_nb = wb_to_nb(r) if r.band is Band.WB else r
    return ie, r.value, r_nb.value, r_to_mos(r_nb).value


def predict(profile: CodecProfile, config: WirelessConfig, table: CoefficientTable,
            params: TransmissionParams | None = None, burst_r=None) -> Prediction:
    """Wireless parameters -> Ppl' -> Ie,eff -> R -> MOS. Never simulates."""
    ppl = estimate_ppl(config, table)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PlanningWarning)
        ie, r, r_nb, mos = rating_from_ppl(profile, ppl, params, burst_r)
    return Prediction(config, profile.name, profile.band, ppl, ie, r, r_nb, mos)


def pool_measurements(measurements):
    """Merge measurements of the same (modulation, antennas, channel, snr).

    Returns ``{(modulation, antennas, channel): [(snr, frames, lost), ...]}``
    with SNRs ascending.
    """
    acc = defaultdict(lambda: [0, 0])
    for m in measurements:
        key = (m.config.modulation, m.config.antennas, m.channel, float(m.config.snr_db))
        acc[key][0] += m.frames_sent
        acc[key][1] += m.frames_lost
    groups = defaultdict(list)
    for (mod, ant, ch, snr), (n, lost) in acc.items():
        groups[(mod, ant, ch)].append((snr, n, lost))
    for v in groups.values():
        v.sort()
    return dict(sorted(groups.items(), key=lambda kv: (list(ModulationScheme).index(kv[0][0]), kv[0][1], kv[0][2].value)))


@dataclass(frozen=True)
class GroupFit:
    modulation: ModulationScheme
    antennas: AntennaSet
    channel: str
    fit: FitResult
    window: tuple

    def to_json(self) -> dict:
        c = self.fit.coeffs
        return {
            "modulation": self.modulation.value,
            "n_tx": self.antennas.n_tx,
            "m_rx": self.antennas.m_rx,
            "channel": self.channel,
            "a": c.a,
            "b": c.b,
            "c": c.c,
            "r2": self.fit.r_squared if self.fit.r_squared_defined else None,
            "r2_pct": 100.0 * self.fit.r_squared if self.fit.r_squared_defined else None,
            "rmse": self.fit.rmse,
            "n_points": self.fit.n_points,
            "converged": self.fit.converged,
            "fit_window": {"snr_db_min": self.window[0], "snr_db_max": self.window[1],
                           "ppl_pct_max": self.window[2], "samples": "per-SNR pooled mean"},
        }


def fit_sweep(measurements, ppl_limit: float = PPL_PERMITTED_MAX):
    """Fit one power law per (modulation, antenna set) group.

    Groups with fewer than three usable points are skipped with a warning.
    Returns ``(fits, table)``; the table rows carry provenance ``fitted``.
    """
    fits = []
    for (mod, ant, ch), pts in pool_measurements(measurements).items():
        snr = np.array([p[0] for p in pts])
        ppl = np.array([100.0 * p[2] / p[1] for p in pts])
        x, y = fit_window(snr, ppl, ppl_limit)
        if x.size < 3:
            warnings.warn(f"skipping {mod.value} {ant} ({ch.value}): only {x.size} points in the fit window",
                          PlanningWarning, stacklevel=2)
            continue
        res = fit_power_law(DataSeries(x, y))
        fits.append(GroupFit(mod, ant, ch.value, res, (float(x.min()), float(x.max()), ppl_limit)))
    keys = [(f.modulation, f.antennas) for f in fits]
    if len(set(keys)) != len(keys):
        raise ValueError("sweep mixes channel variants for the same (modulation, antennas); fit them separately")
    table = CoefficientTable(CoefficientRow(f.modulation, f.antennas, f.fit.coeffs, "fitted") for f in fits)
    return fits, table


def validate(measurements_by_codec: dict, table: CoefficientTable, profiles: dict,
             ppl_limit: float | None = PPL_PERMITTED_MAX, burst_r=None):
    """E-model(Ppl) against E-model(Ppl') over every usable grid point.

    ``measurements_by_codec`` maps a profile name to its measurements.
    Points at SNR <= 0 (outside the power law's domain), points whose
    measured Ppl exceeds ``ppl_limit`` and points without a coefficient
    row are left out. Returns ``(per_codec, pooled, points)``.
    """
    per_codec = {}
    points = []
    all_r, all_rp = [], []
    for name, measurements in measurements_by_codec.items():
        profile = profiles[name]
        params = TransmissionParams.default(profile.band)
        rs, rps = [], []
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", PlanningWarning)
            for m in measurements:
                cfg = m.config
                if not cfg.snr_db > 0 or not math.isfinite(cfg.snr_db):
                    continue
                if ppl_limit is not None and m.ppl_pct > ppl_limit:
                    continue
                if (cfg.modulation, cfg.antennas) not in table:
                    continue
                ppl_p = estimate_ppl(cfg, table)
                _, r, _, _ = rating_from_ppl(profile, m.ppl_pct, params, burst_r)
                _, rp, _, _ = rating_from_ppl(profile, ppl_p, params, burst_r)
                rs.append(r)
                rps.append(rp)
                points.append({"codec": name, "modulation": cfg.modulation.value, "n_tx": cfg.antennas.n_tx,
                               "m_rx": cfg.antennas.m_rx, "snr_db": cfg.snr_db, "ppl_pct": m.ppl_pct,
                               "ppl_prime_pct": ppl_p, "r_ppl": r, "r_ppl_prime": rp})
        if len(rs) < 2:
            raise ValueError(f"{name}: fewer than two comparable grid points")
        per_codec[name] = compare(rs, rps)
        all_r += rs
        all_rp += rps
    pooled = compare(all_r, all_rp)
    return per_codec, pooled, points


def stats_json(stats: ComparisonStats) -> dict:
    return {"pcc": stats.pcc, "rmse": stats.rmse, "n": stats.n}
