"""Down-run and forward-wait statistics plus autocorrelation-corrected errors.

Input traces are boolean up/down indicators sampled every ``dt`` seconds.
A down run is a maximal block of zeros; a block still open at the last epoch
is right-censored and never reported. The forward wait at an epoch is the
time until the indicator is next up (zero if it already is) and ``inf`` when
that never happens inside the trace.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class InsufficientEventsError(ValueError):
    pass


class DegenerateSeriesError(ValueError):
    pass


@dataclass(frozen=True)
class DownRunSet:
    durations: np.ndarray  # seconds
    starts: np.ndarray  # start epoch index of each run
    dt: float = 1.0
    censored_tail: bool = False

    @property
    def count(self) -> int:
        return len(self.durations)


@dataclass(frozen=True)
class WaitStats:
    count: int
    mean: float | None
    std: float | None
    p10: float | None
    p50: float | None
    p90: float | None
    forward_wait_mean: float  # inf when no finite sample exists
    censored: int
    inspection_wait: float | None
    always_up: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class AutocorrEstimate:
    tau_int: float
    n_eff: float
    sem: float


def _runs(bools: np.ndarray):
    """Start/end (exclusive) indices of maximal zero blocks."""
    down = ~bools
    edges = np.diff(np.concatenate([[0], down.astype(np.int8), [0]]))
    return np.nonzero(edges == 1)[0], np.nonzero(edges == -1)[0]


def extract_down_runs(bools, dt: float = 1.0) -> DownRunSet:
    u = np.asarray(bools, dtype=bool)
    if u.size == 0:
        raise ValueError("empty indicator trace")
    starts, ends = _runs(u)
    censored = bool(len(ends) and ends[-1] == len(u))
    if censored:
        starts, ends = starts[:-1], ends[:-1]
    return DownRunSet((ends - starts) * dt, starts, dt, censored)


def forward_waits(bools, dt: float = 1.0) -> np.ndarray:
    """Residual wait per epoch; ``inf`` marks right-censored samples."""
    u = np.asarray(bools, dtype=bool)
    if u.size == 0:
        raise ValueError("empty indicator trace")
    k = np.arange(len(u))
    ups = np.nonzero(u)[0]
    if len(ups) == 0:
        return np.full(len(u), np.inf)
    nxt = np.searchsorted(ups, k, side="left")
    out = np.full(len(u), np.inf)
    ok = nxt < len(ups)
    out[ok] = (ups[nxt[ok]] - k[ok]) * dt
    return out


def nearest_rank(values, q: float) -> float:
    """Nearest-rank quantile: the ``ceil(q*n)``-th smallest value (q in [0, 1])."""
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        raise ValueError("no values")
    rank = max(1, math.ceil(q * len(v) - 1e-12))
    return float(v[min(rank, len(v)) - 1])


def inspection_corrected_wait(runs) -> float:
    """Mean residual wait seen from a down epoch: ``mu/2 + var/(2 mu)``."""
    d = runs.durations if isinstance(runs, DownRunSet) else np.asarray(runs, dtype=float)
    if len(d) < 2:
        raise InsufficientEventsError(f"need at least two down runs, got {len(d)}")
    mu = float(np.mean(d))
    var = float(np.var(d, ddof=1))
    return mu / 2.0 + var / (2.0 * mu)


def wait_summary(runs: DownRunSet, waits) -> WaitStats:
    waits = np.asarray(waits, dtype=float)
    finite = waits[np.isfinite(waits)]
    fwd = float(np.mean(finite)) if finite.size else math.inf
    censored = int(waits.size - finite.size)
    d = runs.durations
    m = len(d)
    if m == 0:
        always_up = censored == 0
        return WaitStats(0, None, None, None, None, None, fwd, censored, None, always_up)
    std = float(np.std(d, ddof=1)) if m >= 2 else None
    return WaitStats(
        count=m,
        mean=float(np.mean(d)),
        std=std,
        p10=nearest_rank(d, 0.10),
        p50=nearest_rank(d, 0.50),
        p90=nearest_rank(d, 0.90),
        forward_wait_mean=fwd,
        censored=censored,
        inspection_wait=inspection_corrected_wait(runs) if m >= 2 else None,
        always_up=False,
    )


def autocorrelation(series, max_lag: int) -> np.ndarray:
    """Biased sample autocorrelation ``rho(0..max_lag)`` via FFT."""
    x = np.asarray(series, dtype=float)
    x = x - x.mean()
    n = len(x)
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, size)
    acov = np.fft.irfft(f * np.conj(f), size)[: max_lag + 1] / n
    if acov[0] <= 0:
        raise DegenerateSeriesError("series has zero variance")
    return acov / acov[0]


def ips_tau_int(series) -> float:
    """Integrated autocorrelation time with initial-positive-sequence truncation.

    Sums ``rho(1), rho(2), ...`` up to the lag before the first non-positive
    value, scanning at most ``min(N - 1, N // 10)`` lags.
    """
    x = np.asarray(series, dtype=float)
    n = len(x)
    if n < 10:
        raise ValueError(f"need at least 10 samples, got {n}")
    if np.ptp(x) == 0:
        raise DegenerateSeriesError("series has zero variance")
    max_lag = min(n - 1, n // 10)
    rho = autocorrelation(x, max_lag)[1:]
    nonpos = np.nonzero(rho <= 0)[0]
    cut = nonpos[0] if len(nonpos) else len(rho)
    return 0.5 + float(np.sum(rho[:cut]))


def n_eff_sem(series, tau_int: float) -> tuple[float, float]:
    if tau_int < 0.5:
        raise ValueError(f"tau_int must be >= 0.5, got {tau_int}")
    x = np.asarray(series, dtype=float)
    n = len(x)
    n_eff = n / (2.0 * tau_int)
    sigma = float(np.std(x, ddof=1)) if n >= 2 else 0.0
    return n_eff, sigma / math.sqrt(n_eff)


def autocorr_estimate(series) -> AutocorrEstimate:
    """IPS estimate with fallbacks: empty series give ``n_eff = 0``, others that
    cannot support the estimator give NaN."""
    x = np.asarray(series, dtype=float)
    if x.size == 0:
        return AutocorrEstimate(math.nan, 0.0, math.nan)
    try:
        tau = ips_tau_int(x)
    except ValueError:
        return AutocorrEstimate(math.nan, math.nan, math.nan)
    n_eff, sem = n_eff_sem(x, tau)
    return AutocorrEstimate(tau, n_eff, sem)


def phase_binned_runs(runs: DownRunSet, period: float, n_bins: int = 12,
                      t_start: float = 0.0) -> list[dict]:
    """Down-run count and mean per start-phase bin, phase = ``t_start_of_run mod period``."""
    if not period > 0 or n_bins < 1:
        raise ValueError("period must be positive and n_bins >= 1")
    t0 = t_start + runs.starts * runs.dt
    bins = np.floor((t0 % period) / period * n_bins).astype(int) % n_bins
    out = []
    for b in range(n_bins):
        d = runs.durations[bins == b]
        out.append({
            "bin": b,
            "phase_lo": b * period / n_bins,
            "phase_hi": (b + 1) * period / n_bins,
            "count": int(d.size),
            "mean": float(np.mean(d)) if d.size else None,
        })
    return out
