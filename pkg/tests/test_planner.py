import pytest

from wiremodel.emodel import Band, CodecProfile, PlanningWarning, r_to_mos
from wiremodel.linksim import PplMeasurement
from wiremodel.linksim.channel import ChannelVariant
from wiremodel.planner import fit_sweep, pool_measurements, predict, rating_from_ppl, validate
from wiremodel.pplmodel import AntennaSet, ModulationScheme, WirelessConfig, builtin_table

QPSK = ModulationScheme.QPSK


def meas(snr, lost, frames=1000, n=1, seed=0):
    cfg = WirelessConfig(QPSK, AntennaSet(n, n), float(snr))
    return PplMeasurement(cfg, ChannelVariant.RAYLEIGH, frames, lost, 100 * lost / frames, 0.0, seed)


def test_rating_nb(nb_profile):
    ie, r, r_nb, mos = rating_from_ppl(nb_profile, 2.0)
    assert ie == pytest.approx(10 + 85 * 2 / 6.3)
    assert r == r_nb == pytest.approx(93.2 - ie)
    assert mos == pytest.approx(r_to_mos(r).value)


def test_rating_wb(wb_profile):
    ie, r, r_nb, mos = rating_from_ppl(wb_profile, 0.0)
    assert (ie, r) == (10.0, pytest.approx(119.0))
    assert r_nb == pytest.approx(119 * 100 / 129)


def test_predict(wb_profile):
    cfg = WirelessConfig(QPSK, AntennaSet(1, 1), 10.0)
    p = predict(wb_profile, cfg, builtin_table())
    assert p.ppl_prime_pct == pytest.approx(0.052504269069112305)
    assert p.to_json()["band"] == "WB"


def test_pool_sums_runs():
    pooled = pool_measurements([meas(5, 100), meas(5, 300, seed=1), meas(10, 10)])
    ((key, pts),) = pooled.items()
    assert pts == [(5.0, 2000, 400), (10.0, 1000, 10)]


def test_fit_sweep_skips_thin_groups():
    ms = [meas(s, int(1000 * 0.8 * s**-1.5)) for s in range(2, 20)] + [meas(1, 990, n=2), meas(2, 900, n=2)]
    with pytest.warns(PlanningWarning):
        fits, table = fit_sweep(ms)
    assert len(fits) == 1 and len(table) == 1
    assert table.rows()[0].provenance == "fitted"


def test_validate_filters(nb_profile):
    ms = [meas(0, 1000), meas(3, 500), meas(10, 50), meas(20, 5), meas(30, 0)]
    profiles = {"x": nb_profile}
    per, pooled, points = validate({"x": ms}, builtin_table(), profiles)
    # SNR 0 and Ppl > 20 are dropped
    assert [p["snr_db"] for p in points] == [10.0, 20.0, 30.0]
    assert per["x"].n == 3 and pooled.n == 3
    _, _, points_all = validate({"x": ms}, builtin_table(), profiles, ppl_limit=None)
    assert len(points_all) == 4


def test_validate_identical_is_perfect():
    # measured Ppl equal to the prediction gives PCC 1 and RMSE 0
    t = builtin_table()
    co = t.lookup(QPSK, AntennaSet(1, 1))
    frames = 10**15
    ms = [meas(s, round(co(s) / 100 * frames), frames) for s in range(6, 15)]
    prof = CodecProfile("n", Band.NB, 5, 10)
    _, pooled, _ = validate({"n": ms}, t, {"n": prof})
    assert pooled.pcc == pytest.approx(1.0, abs=1e-9) and pooled.rmse < 1e-6
