"""End-to-end scenario execution: propagate, service, graph, metrics, statistics."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ..connectivity import (ConnectivityTrace, PairOccurrences, accumulation_waits, city_fraction,
                            component_labels, threshold_trace, windowed_city_fraction)
from ..groundgrid import (GroundStation, LandMask, TrafficMatrix, cities_in_box, generate_lattice,
                          load_cities, map_cities, station_positions)
from ..orbital import constellation_eci, eci_to_ecef, orbital_period
from ..service import EpochGraph, StationGeometry, build_epoch_graph, epoch_link_strength
from ..stats import (AutocorrEstimate, WaitStats, autocorr_estimate, extract_down_runs,
                     forward_waits, nearest_rank, phase_binned_runs, wait_summary)
from .config import ScenarioConfig
from .sweep import Scenario, epoch_clock, optical_params


class ScenarioError(RuntimeError):
    def __init__(self, scenario_id: str, cause: BaseException):
        super().__init__(f"scenario {scenario_id} failed: {type(cause).__name__}: {cause}")
        self.scenario_id = scenario_id


@dataclass
class ScenarioResult:
    scenario: Scenario
    stations: list[GroundStation]
    traffic: TrafficMatrix | None
    trace: ConnectivityTrace
    waits: dict[float, WaitStats]
    event_autocorr: dict[float, AutocorrEstimate]
    series_autocorr: dict[str, AutocorrEstimate]
    latency: list[dict]
    phase_bins: dict[float, list[dict]] = field(default_factory=dict)
    accumulation: dict[float, dict] = field(default_factory=dict)
    graphs: list[EpochGraph] | None = None

    @property
    def scenario_id(self) -> str:
        return self.scenario.scenario_id


@dataclass
class ResultBundle:
    config: ScenarioConfig
    results: list[ScenarioResult]


@lru_cache(maxsize=8)
def _land_mask(spec: str) -> LandMask:
    if spec == "builtin":
        return LandMask.builtin()
    if spec == "all_land":
        return LandMask.uniform(True)
    if spec == "all_water":
        return LandMask.uniform(False)
    return LandMask.load(spec)


@lru_cache(maxsize=4)
def _cities(spec: str) -> tuple:
    return tuple(load_cities(None if spec == "builtin" else spec))


def scenario_stations(cfg: ScenarioConfig, scenario: Scenario) -> list[GroundStation]:
    return generate_lattice(scenario.lattice_spec(cfg), _land_mask(cfg.lattice.land_mask))


def scenario_traffic(cfg: ScenarioConfig, scenario: Scenario, stations) -> TrafficMatrix | None:
    cities = list(_cities(cfg.traffic.cities))
    if cfg.traffic.restrict_to_region:
        cities = cities_in_box(cities, scenario.lattice_spec(cfg))
    if not stations or len(cities) < 2:
        return None
    return map_cities(cities, stations)


def simulate_graphs(cfg: ScenarioConfig, scenario: Scenario, geom: StationGeometry) -> list[EpochGraph]:
    clock = epoch_clock(cfg)
    spec = scenario.constellation(cfg)
    policy = scenario.service_policy()
    params = optical_params(cfg)
    z_max = math.radians(cfg.service.z_max_deg)
    graphs = []
    for k in range(clock.n_steps):
        t = clock.time(k)
        ecef = eci_to_ecef(constellation_eci(spec, t, clock.t_start), t, clock.t_start)
        graphs.append(build_epoch_graph(ecef, geom, policy, params, epoch=k, z_max=z_max))
    return graphs


def _primary_period(cfg: ScenarioConfig, scenario: Scenario) -> float:
    return orbital_period(scenario.altitude_km * 1e3)


def run_scenario(cfg: ScenarioConfig, scenario: Scenario, keep_graphs: bool = False) -> ScenarioResult:
    try:
        return _run(cfg, scenario, keep_graphs)
    except (MemoryError, OSError, ValueError, ArithmeticError) as exc:
        raise ScenarioError(scenario.scenario_id, exc) from exc


def _run(cfg: ScenarioConfig, scenario: Scenario, keep_graphs: bool) -> ScenarioResult:
    clock = epoch_clock(cfg)
    dt = clock.dt
    stations = scenario_stations(cfg, scenario)
    n = len(stations)
    tm = scenario_traffic(cfg, scenario, stations)
    geom = StationGeometry.from_positions(station_positions(stations))
    graphs = simulate_graphs(cfg, scenario, geom)

    K = len(graphs)
    lcc = np.zeros(K)
    city = np.zeros(K)
    strength = np.zeros(K)
    for k, g in enumerate(graphs):
        strength[k] = epoch_link_strength(g).strength
        if n == 0:
            continue
        labels = component_labels(g, n)
        lcc[k] = np.bincount(labels).max() / n
        city[k] = city_fraction(g, tm, labels=labels) if tm is not None else 0.0
    trace = ConnectivityTrace(lcc, city, strength)

    waits, event_ac, phases = {}, {}, {}
    period = _primary_period(cfg, scenario)
    for theta in cfg.metrics.thresholds:
        up = threshold_trace(city, theta)
        runs = extract_down_runs(up, dt)
        waits[theta] = wait_summary(runs, forward_waits(up, dt))
        event_ac[theta] = autocorr_estimate(runs.durations)
        phases[theta] = phase_binned_runs(runs, period, cfg.metrics.phase_bins, clock.t_start)

    series_ac = {
        "S_k": autocorr_estimate(strength),
        "lcc_fraction": autocorr_estimate(lcc),
        "city_fraction": autocorr_estimate(city),
    }

    latency = _latency_table(cfg, graphs, tm, n, waits, trace.mean_strength, dt)
    accum = _accumulation_summary(cfg, graphs, tm, n, dt)
    return ScenarioResult(scenario, stations, tm, trace, waits, event_ac, series_ac, latency,
                          phases, accum, graphs if keep_graphs else None)


def _accumulation_summary(cfg, graphs, tm, n_nodes, dt) -> dict[float, dict]:
    """Mean first-passage time of the growing union graph over strided start epochs."""
    m = cfg.metrics
    stride = max(1, int(round(m.window_stride_s / dt)))
    starts = np.arange(0, len(graphs), stride)
    if tm is None:
        raw = {th: np.full(len(starts), np.inf) for th in m.thresholds}
    else:
        raw = accumulation_waits(graphs, tm, n_nodes, m.thresholds, starts, dt)
    out = {}
    for th in m.thresholds:
        w = raw[float(th)]
        fin = w[np.isfinite(w)]
        out[th] = {
            "starts": int(len(w)),
            "censored": int(len(w) - len(fin)),
            "mean": float(np.mean(fin)) if len(fin) else math.inf,
            "p50": nearest_rank(fin, 0.5) if len(fin) else None,
        }
    return out


def _latency_table(cfg, graphs, tm, n_nodes, waits, s_bar, dt) -> list[dict]:
    """Latency-conditioned strength and union-window availability per (W_max, threshold).

    A configuration meets the latency target when its mean forward wait at the
    threshold is at most ``W_max``; only then is the average strength reported.
    """
    m = cfg.metrics
    stride = max(1, int(round(m.window_stride_s / dt)))
    starts = np.arange(0, len(graphs), stride)
    occ = PairOccurrences(graphs) if tm is not None else None
    rows = []
    for w in m.windows_s:
        if occ is not None:
            wcity = windowed_city_fraction(occ, tm, n_nodes, starts, w, dt)
        else:
            wcity = np.zeros(len(starts))
        for theta in m.thresholds:
            ttc = waits[theta].forward_wait_mean
            meets = bool(ttc <= w)
            rows.append({
                "w_max": w,
                "threshold": theta,
                "time_to_connectivity": ttc,
                "meets": meets,
                "S_bar": s_bar if meets else None,
                "window_availability": float(np.mean(wcity >= theta)) if len(wcity) else 0.0,
            })
    return rows


def _run_one(args):
    cfg, scenario, keep = args
    return run_scenario(cfg, scenario, keep)


def run_sweep(cfg: ScenarioConfig, scenarios, workers: int = 1, keep_graphs: bool = False) -> ResultBundle:
    """Run scenarios, in parallel when ``workers > 1``; output order follows ``scenarios``."""
    jobs = [(cfg, s, keep_graphs) for s in scenarios]
    if workers <= 1 or len(jobs) <= 1:
        results = [_run_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs))
    return ResultBundle(cfg, results)
