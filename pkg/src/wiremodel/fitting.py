"""Power-law fitting of Ppl against SNR and the validation statistics."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .emodel import PPL_PERMITTED_MAX
from .pplmodel import PowerLawCoefficients

__all__ = [
    "DataSeries",
    "FitResult",
    "ComparisonStats",
    "fit_power_law",
    "fit_window",
    "pcc",
    "rmse",
    "r_squared",
    "compare",
]

MAX_ITER = 200
REL_TOL = 1e-10
LOG_FLOOR = 1e-12


@dataclass(frozen=True)
class DataSeries:
    x: np.ndarray
    y: np.ndarray

    def __init__(self, x, y):
        x = np.asarray(x, dtype=np.float64).ravel()
        y = np.asarray(y, dtype=np.float64).ravel()
        if x.shape != y.shape:
            raise ValueError("x and y must have the same length")
        if x.size < 3:
            raise ValueError(f"need at least 3 points to fit, got {x.size}")
        if np.any(~np.isfinite(x)) or np.any(x <= 0):
            raise ValueError("x values must be finite and strictly positive")
        if np.unique(x).size != x.size:
            raise ValueError("x values must be distinct")
        if np.any(~np.isfinite(y)):
            raise ValueError("y values must be finite")
        order = np.argsort(x)
        object.__setattr__(self, "x", x[order])
        object.__setattr__(self, "y", y[order])

    def __len__(self):
        return self.x.size


@dataclass(frozen=True)
class FitResult:
    coeffs: PowerLawCoefficients
    r_squared: float
    rmse: float
    n_points: int
    converged: bool
    iterations: int = 0
    sse_history: tuple = field(default=(), repr=False)
    # R^2 is undefined when the data has no variance.
    r_squared_defined: bool = True


@dataclass(frozen=True)
class ComparisonStats:
    pcc: float
    rmse: float
    n: int


def fit_window(snr_db, ppl_pct, limit: float = PPL_PERMITTED_MAX):
    """Select the points used for fitting: SNR > 0 and 0 <= Ppl <= limit."""
    x = np.asarray(snr_db, dtype=np.float64)
    y = np.asarray(ppl_pct, dtype=np.float64)
    keep = (x > 0) & np.isfinite(x) & (y >= 0) & (y <= limit)
    return x[keep], y[keep]


def _model(theta, lx):
    # theta = (ln a, b, c)
    return np.exp(theta[0] + theta[1] * lx) + theta[2]


def _jacobian(theta, lx):
    f0 = np.exp(theta[0] + theta[1] * lx)
    return np.column_stack([f0, f0 * lx, np.ones_like(lx)])


def _loglog(x, y, c0):
    z = y - c0
    pos = z > 0
    if pos.sum() >= 2 and np.ptp(np.log(x[pos])) > 0:
        lx, lz = np.log(x[pos]), np.log(z[pos])
    else:
        lx, lz = np.log(x), np.log(np.maximum(z, LOG_FLOOR))
    b, ln_a = np.polyfit(lx, lz, 1)
    return np.array([ln_a, b, c0])


def _initial_guesses(x, y):
    """Log-log line with c = 0, plus one with c just below min(y) when the
    data dips negative or has few positive points."""
    starts = [_loglog(x, y, 0.0)]
    if np.ptp(y) == 0:
        # A flat series is best described by its mean.
        return [np.array([math.log(LOG_FLOOR), -1.0, float(y[0])])]
    if y.min() < 0 or np.count_nonzero(y > 0) < 3:
        starts.append(_loglog(x, y, float(y.min() - 1e-3 * np.ptp(y))))
    return starts


def _levenberg_marquardt(theta, x, y, max_iter):
    lx = np.log(x)

    def sse_of(t):
        with np.errstate(over="ignore", invalid="ignore"):
            r = y - _model(t, lx)
        s = float(r @ r)
        return (s if math.isfinite(s) else math.inf), r

    sse, r = sse_of(theta)
    if not math.isfinite(sse):
        # Fall back to a flat start if the log-log guess overflows.
        theta = np.array([0.0, -1.0, float(np.mean(y))])
        sse, r = sse_of(theta)
    history = [sse]
    lam = 1e-3
    converged = False
    it = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for it in range(1, max_iter + 1):
            J = _jacobian(theta, lx)
            g = J.T @ r
            JtJ = J.T @ J
            diag = np.diag(JtJ).copy()
            diag[diag == 0] = 1.0
            accepted = False
            while lam < 1e16:
                try:
                    step = np.linalg.solve(JtJ + lam * np.diag(diag), g)
                except np.linalg.LinAlgError:
                    lam *= 10.0
                    continue
                cand = theta + step
                cand_sse, cand_r = sse_of(cand)
                if cand_sse <= sse:
                    accepted = True
                    break
                lam *= 10.0
            if not accepted:
                # No descent direction left at machine precision.
                converged = True
                break
            improvement = (sse - cand_sse) / sse if sse > 0 else 0.0
            theta, sse, r = cand, cand_sse, cand_r
            history.append(sse)
            lam = max(lam / 10.0, 1e-15)
            small_step = np.all(np.abs(step) <= 1e-12 * (np.abs(theta) + 1e-12))
            if sse == 0.0 or improvement < REL_TOL and (small_step or improvement == 0.0 or lam <= 1e-6):
                converged = True
                break
    return theta, sse, history, converged, it


def fit_power_law(data: DataSeries, max_iter: int = MAX_ITER) -> FitResult:
    """Least-squares fit of ``y = a * x**b + c`` by Levenberg-Marquardt.

    The amplitude is optimised as ``ln a`` (so ``a > 0``), which keeps the
    problem well scaled for amplitudes spanning many decades. The residual
    is taken in linear space. Only steps that do not increase the SSE are
    accepted; the SSE after every accepted step is kept in
    ``sse_history``. When more than one start is tried the run with the
    lowest final SSE is reported.
    """
    x, y = data.x, data.y
    best = None
    for theta0 in _initial_guesses(x, y):
        if np.ptp(y) == 0:
            # Exact already; iterating would only chase ln a towards -inf.
            sse = float(np.sum((y - _model(theta0, np.log(x))) ** 2))
            best = (theta0, sse, [sse], True, 0)
            break
        run = _levenberg_marquardt(theta0, x, y, max_iter)
        if best is None or run[1] < best[1]:
            best = run
    theta, sse, history, converged, it = best
    a, b, c = math.exp(theta[0]), float(theta[1]), float(theta[2])
    pred = _model(theta, np.log(x))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    defined = ss_tot > 0
    r2 = 1.0 - sse / ss_tot if defined else math.nan
    if not converged:
        warnings.warn("power-law fit hit the iteration cap before converging", RuntimeWarning, stacklevel=2)
    return FitResult(
        coeffs=PowerLawCoefficients(a, b, c),
        r_squared=r2,
        rmse=float(np.sqrt(np.mean((y - pred) ** 2))),
        n_points=int(x.size),
        converged=converged,
        iterations=it,
        sse_history=tuple(history),
        r_squared_defined=defined,
    )


def _pair(u, v, min_len=1):
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    if u.shape != v.shape:
        raise ValueError("series must have equal length")
    if u.size < min_len:
        raise ValueError(f"need at least {min_len} points")
    return u, v


def pcc(u, v) -> float:
    """Pearson product-moment correlation."""
    u, v = _pair(u, v, 2)
    du, dv = u - u.mean(), v - v.mean()
    su, sv = math.sqrt(du @ du), math.sqrt(dv @ dv)
    if su == 0 or sv == 0:
        raise ValueError("pcc is undefined for a zero-variance series")
    return float(np.clip((du @ dv) / (su * sv), -1.0, 1.0))


def rmse(u, v) -> float:
    u, v = _pair(u, v, 1)
    d = u - v
    return float(math.sqrt(d @ d / d.size))


def r_squared(observed, predicted) -> float:
    """1 - SS_res / SS_tot with SS_tot taken about the observed mean."""
    y, f = _pair(observed, predicted, 2)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0:
        raise ValueError("R^2 is undefined for a zero-variance observed series")
    return 1.0 - float(np.sum((y - f) ** 2)) / ss_tot


def compare(u, v) -> ComparisonStats:
    return ComparisonStats(pcc(u, v), rmse(u, v), int(np.asarray(u).size))
