import math
import warnings

import numpy as np
import pytest
from _synth import synth
from hypothesis import given, settings
from hypothesis import strategies as st

from wiremodel.fitting import (
    DataSeries,
    compare,
    fit_power_law,
    fit_window,
    pcc,
    r_squared,
    rmse,
)
from wiremodel.pplmodel import builtin_table


def test_synthetic_exact():
    x = np.arange(1.0, 31.0)
    res = fit_power_law(DataSeries(x, 100 * x**-4.0))
    assert res.converged
    assert res.coeffs.a == pytest.approx(100, rel=1e-9)
    assert res.coeffs.b == pytest.approx(-4, rel=1e-9)
    assert res.coeffs.c == pytest.approx(0, abs=1e-9)
    assert res.r_squared == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("row", builtin_table().rows(), ids=lambda r: f"{r.modulation.value}-{r.antennas.n_tx}")
def test_builtin_rows_identifiable(row):
    a, b, c = row.coeffs.a, row.coeffs.b, row.coeffs.c
    x, y = synth(a, b, c)
    res = fit_power_law(DataSeries(x, y))
    assert res.coeffs.a == pytest.approx(a, rel=1e-2)
    assert res.coeffs.b == pytest.approx(b, rel=1e-2)
    assert res.coeffs.c == pytest.approx(c, rel=1e-2, abs=1e-9)
    assert res.r_squared >= 0.999


def test_sse_history_monotone():
    rng = np.random.default_rng(0)
    x = np.arange(1.0, 31.0)
    y = 50 * x**-1.5 - 0.3 + rng.normal(0, 0.2, x.size)
    res = fit_power_law(DataSeries(x, y))
    h = np.array(res.sse_history)
    assert h.size >= 2 and np.all(np.diff(h) <= 0)


def test_matches_scipy():
    scipy_opt = pytest.importorskip("scipy.optimize")
    rng = np.random.default_rng(1)
    x = np.linspace(2, 20, 25)
    y = 300 * x**-2.2 - 0.1 + rng.normal(0, 0.05, x.size)
    ours = fit_power_law(DataSeries(x, y))
    popt, _ = scipy_opt.curve_fit(lambda s, a, b, c: a * s**b + c, x, y, p0=(100, -2, 0), maxfev=20000)
    sse_ours = np.sum((y - ours.coeffs(x)) ** 2)
    sse_ref = np.sum((y - (popt[0] * x ** popt[1] + popt[2])) ** 2)
    assert sse_ours <= sse_ref * (1 + 1e-6)
    assert ours.coeffs.b == pytest.approx(popt[1], rel=1e-3)


def test_flat_series():
    res = fit_power_law(DataSeries([1.0, 2.0, 3.0], [0.0, 0.0, 0.0]))
    assert not res.r_squared_defined and math.isnan(res.r_squared)
    assert res.rmse < 1e-9


def test_window():
    x, y = fit_window([0, 1, 2, 3, 4], [100, 30, 20, 5, 0])
    assert list(x) == [2, 3, 4] and list(y) == [20, 5, 0]


@pytest.mark.parametrize("x,y", [([1, 2], [1, 2]), ([0, 1, 2], [1, 2, 3]), ([1, 1, 2], [1, 2, 3]),
                                 ([1, 2, 3], [1, np.nan, 3])])
def test_series_validation(x, y):
    with pytest.raises(ValueError):
        DataSeries(x, y)


def test_metrics():
    u = np.array([1.0, 2.0, 3.0, 4.0])
    assert pcc(u, u) == pytest.approx(1.0)
    assert pcc(u, -u) == pytest.approx(-1.0)
    assert pcc(u, 3 * u + 2) == pytest.approx(1.0)
    assert rmse(u, u) == 0.0
    assert rmse(u, u + 2) == pytest.approx(2.0)
    assert r_squared(u, u) == 1.0
    assert r_squared(u, np.full(4, u.mean())) == pytest.approx(0.0)
    s = compare(u, u)
    assert (s.pcc, s.rmse, s.n) == (pytest.approx(1.0), 0.0, 4)
    with pytest.raises(ValueError):
        pcc([1, 1, 1], [1, 2, 3])
    with pytest.raises(ValueError):
        rmse([1, 2], [1, 2, 3])


@settings(max_examples=60, deadline=None)
@given(
    a=st.floats(1.0, 1e6),
    b=st.floats(-8.0, -0.5),
    c=st.floats(-0.01, 0.0),
)
def test_recovers_random_laws(a, b, c):
    x = np.linspace(1.0, 30.0, 30)
    y = a * x**b + c
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = fit_power_law(DataSeries(x, y))
    # noiseless data: the fit reproduces the curve
    assert np.max(np.abs(res.coeffs(x) - y)) <= 1e-6 * max(1.0, np.max(np.abs(y)))
    assert np.all(np.diff(res.sse_history) <= 0)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=40))
def test_metric_properties(values):
    u = np.array(values)
    v = u[::-1].copy()
    assert rmse(u, v) == pytest.approx(rmse(v, u))
    assert rmse(u, v) >= 0
    if np.ptp(u) > 1e-6 and np.ptp(v) > 1e-6:
        assert -1.0 <= pcc(u, v) <= 1.0
        assert pcc(u, v) == pytest.approx(pcc(v, u))
