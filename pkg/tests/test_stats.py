import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qsatnet.stats import (DegenerateSeriesError, InsufficientEventsError, autocorr_estimate,
                           autocorrelation, extract_down_runs, forward_waits,
                           inspection_corrected_wait, ips_tau_int, n_eff_sem, nearest_rank,
                           phase_binned_runs, wait_summary)


def bools(s):
    return np.array([c == "1" for c in s])


def test_down_runs_hand_case():
    r = extract_down_runs(bools("1100101000"), dt=2.0)
    assert r.durations.tolist() == [4.0, 2.0]
    assert r.starts.tolist() == [2, 5]
    assert r.censored_tail
    r = extract_down_runs(bools("0011"))
    assert r.durations.tolist() == [2.0] and not r.censored_tail
    with pytest.raises(ValueError):
        extract_down_runs([])


def test_forward_waits_hand_case():
    assert forward_waits(bools("0010100")).tolist() == [2, 1, 0, 1, 0, np.inf, np.inf]
    assert forward_waits(bools("000")).tolist() == [np.inf] * 3
    assert forward_waits(bools("01"), dt=0.5).tolist() == [0.5, 0.0]


def test_nearest_rank():
    v = [15, 20, 35, 40, 50]
    assert nearest_rank(v, 0.05) == 15
    assert nearest_rank(v, 0.30) == 20
    assert nearest_rank(v, 0.40) == 20
    assert nearest_rank(v, 0.50) == 35
    assert nearest_rank(v, 1.00) == 50
    with pytest.raises(ValueError):
        nearest_rank([], 0.5)


def test_inspection_wait_formula():
    d = np.array([2.0, 4.0, 6.0])
    assert inspection_corrected_wait(d) == pytest.approx(2.0 + 4.0 / 8.0)
    with pytest.raises(InsufficientEventsError):
        inspection_corrected_wait([3.0])


def test_wait_summary_cases():
    up = bools("1001000110")
    s = wait_summary(extract_down_runs(up), forward_waits(up))
    assert s.count == 2 and s.mean == 2.5 and s.censored == 1
    assert s.forward_wait_mean == pytest.approx(np.mean([0, 2, 1, 0, 3, 2, 1, 0, 0]))
    one = bools("101")
    s1 = wait_summary(extract_down_runs(one), forward_waits(one))
    assert s1.count == 1 and s1.std is None and s1.inspection_wait is None
    ones = bools("111")
    assert wait_summary(extract_down_runs(ones), forward_waits(ones)).always_up
    zeros = bools("000")
    sz = wait_summary(extract_down_runs(zeros), forward_waits(zeros))
    assert not sz.always_up and sz.forward_wait_mean == math.inf and sz.censored == 3


def test_autocorrelation_matches_direct_sum():
    x = np.random.default_rng(5).normal(size=200)
    rho = autocorrelation(x, 10)
    xc = x - x.mean()
    direct = [np.sum(xc[: len(x) - k] * xc[k:]) / np.sum(xc * xc) for k in range(11)]
    np.testing.assert_allclose(rho, direct, atol=1e-12)


def test_ips_on_white_noise_and_ar1(rng):
    assert ips_tau_int(rng.normal(size=20000)) == pytest.approx(0.5, abs=0.05)
    phi, n = 0.8, 50000
    e = rng.normal(size=n)
    x = np.empty(n)
    x[0] = e[0]
    for k in range(1, n):
        x[k] = phi * x[k - 1] + e[k]
    # tau_int = (1 + phi) / (2 (1 - phi)) = 4.5
    assert ips_tau_int(x) == pytest.approx(4.5, rel=0.15)


def test_ips_errors_and_fallbacks():
    with pytest.raises(ValueError):
        ips_tau_int(np.arange(5.0))
    with pytest.raises(DegenerateSeriesError):
        ips_tau_int(np.ones(50))
    assert math.isnan(autocorr_estimate(np.ones(50)).tau_int)
    e = autocorr_estimate([])
    assert e.n_eff == 0 and math.isnan(e.sem)


def test_n_eff_sem_reference():
    x = np.arange(14400.0)
    n_eff, sem = n_eff_sem(x, 18.5)
    assert n_eff == pytest.approx(14400 / 37)
    assert sem == pytest.approx(np.std(x, ddof=1) / math.sqrt(14400 / 37))
    with pytest.raises(ValueError):
        n_eff_sem(x, 0.4)


def test_phase_bins():
    up = bools("1" + "0" * 3 + "1" * 6 + "0" * 2 + "1")
    runs = extract_down_runs(up)
    rows = phase_binned_runs(runs, period=10.0, n_bins=2)
    assert [r["count"] for r in rows] == [2, 0]
    assert rows[0]["mean"] == 2.5 and rows[1]["mean"] is None
    with pytest.raises(ValueError):
        phase_binned_runs(runs, period=0.0)


@given(st.lists(st.booleans(), min_size=1, max_size=200), st.sampled_from([0.5, 1.0, 2.0]))
def test_run_accounting(trace, dt):
    u = np.array(trace)
    r = extract_down_runs(u, dt)
    censored = int(r.censored_tail) * (len(u) - (np.nonzero(u)[0].max() + 1 if u.any() else 0))
    assert r.durations.sum() / dt + censored == np.count_nonzero(~u)
    assert np.all(r.durations > 0)
    for s, d in zip(r.starts, r.durations):
        n = int(round(d / dt))
        assert not u[s:s + n].any() and u[s + n]
        assert s == 0 or u[s - 1]


@given(st.lists(st.booleans(), min_size=1, max_size=200))
def test_forward_wait_properties(trace):
    u = np.array(trace)
    w = forward_waits(u)
    assert np.all(w[u] == 0)
    fin = np.isfinite(w)
    for k in np.nonzero(fin & ~u)[0]:
        assert w[k] == w[k + 1] + 1  # the wait shrinks by one step per epoch
    # censored samples are exactly the epochs after the last up epoch
    last = np.nonzero(u)[0].max() if u.any() else -1
    assert np.array_equal(~fin, np.arange(len(u)) > last)


@given(st.lists(st.floats(0.0, 1e3), min_size=1, max_size=50), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_nearest_rank_monotone_and_member(values, q1, q2):
    lo, hi = sorted((q1, q2))
    assert nearest_rank(values, lo) <= nearest_rank(values, hi)
    assert nearest_rank(values, hi) in values


@given(st.lists(st.floats(1.0, 100.0), min_size=2, max_size=40))
def test_inspection_wait_at_least_half_mean(d):
    assert inspection_corrected_wait(d) >= np.mean(d) / 2 - 1e-9
