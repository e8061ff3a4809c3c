"""Writing a ResultBundle to disk as CSV or JSON tables plus a manifest.

Both formats carry the same numbers: floats are written with ``repr`` so
they round-trip exactly, non-finite values become the strings ``inf`` or
``nan`` and missing values are blank (CSV) or null (JSON). Nothing depends
on wall-clock time or worker count, so identical inputs give identical bytes.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
from importlib import resources
from pathlib import Path

from .runner import ResultBundle, ScenarioResult

EMIT_CHOICES = ("edges", "traces", "stats", "all")
SERIES_KEYS = ("S_k", "lcc_fraction", "city_fraction")


def _num(v):
    if isinstance(v, bool) or v is None:
        return v
    if isinstance(v, float) and not math.isfinite(v):
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if hasattr(v, "item"):  # numpy scalar
        return _num(v.item())
    return v


def _csv_cell(v):
    v = _num(v)
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _input_hashes(cfg) -> dict:
    data = resources.files("qsatnet") / "data"
    mask = cfg.lattice.land_mask
    out = {}
    if mask == "builtin":
        out["land_mask"] = _sha256(data / "land_mask_0p5.txt.gz")
    elif mask not in ("all_land", "all_water"):
        out["land_mask"] = _sha256(mask)
    cities = cfg.traffic.cities
    out["cities"] = _sha256(data / "cities.csv" if cities == "builtin" else cities)
    return out


class Table:
    def __init__(self, name: str, columns: list[str]):
        self.name = name
        self.columns = columns
        self.rows: list[list] = []

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f"{self.name}: expected {len(self.columns)} values")
        self.rows.append(list(values))

    def write(self, directory: Path, fmt: str) -> str:
        path = directory / f"{self.name}.{fmt}"
        path.parent.mkdir(parents=True, exist_ok=True)
        if fmt == "csv":
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(self.columns)
                for row in self.rows:
                    w.writerow([_csv_cell(v) for v in row])
        elif fmt == "json":
            recs = [{c: _num(v) for c, v in zip(self.columns, row)} for row in self.rows]
            path.write_text(json.dumps(recs, indent=1) + "\n")
        else:
            raise ValueError(f"unknown format {fmt!r}")
        return path.relative_to(directory).as_posix()


def trace_tables(results: list[ScenarioResult]) -> list[Table]:
    traces = Table("traces", ["scenario_id", "epoch", "lcc_fraction", "city_fraction", "S_k"])
    out = [traces]
    for r in results:
        t = r.trace
        for k in range(len(t)):
            traces.add(r.scenario_id, k, float(t.lcc_fraction[k]), float(t.city_fraction[k]),
                       float(t.strength[k]))
        st = Table(f"stations/{r.scenario_id}", ["gs_id", "lat_deg", "lon_deg", "city"])
        cities = {}
        if r.traffic is not None:
            for (name, _, _), s in zip(r.traffic.cities, r.traffic.station_index):
                cities.setdefault(int(s), []).append(name)
        for gs in r.stations:
            st.add(gs.gs_id, math.degrees(gs.lat), math.degrees(gs.lon),
                   ";".join(cities.get(gs.gs_id, [])) or None)
        out.append(st)
    return out


def stats_tables(results: list[ScenarioResult]) -> list[Table]:
    waits = Table("wait_stats", [
        "scenario_id", "threshold", "count", "mean", "std", "p10", "p50", "p90",
        "forward_wait_mean", "censored", "inspection_wait", "always_up",
        "tau_int", "n_eff", "sem"])
    series = Table("series_stats", ["scenario_id", "series", "mean", "tau_int", "n_eff", "sem"])
    latency = Table("latency", ["scenario_id", "w_max", "threshold", "time_to_connectivity",
                                "meets", "S_bar", "window_availability"])
    accum = Table("accumulation", ["scenario_id", "threshold", "starts", "censored", "mean", "p50"])
    phases = Table("phase_bins", ["scenario_id", "threshold", "bin", "phase_lo", "phase_hi",
                                  "count", "mean"])
    long = Table("long", ["scenario_id", "metric", "threshold", "w_max", "value"])

    for r in results:
        sid = r.scenario_id
        arrays = {"S_k": r.trace.strength, "lcc_fraction": r.trace.lcc_fraction,
                  "city_fraction": r.trace.city_fraction}
        for key in SERIES_KEYS:
            ac = r.series_autocorr[key]
            mean = float(arrays[key].mean()) if len(arrays[key]) else math.nan
            series.add(sid, key, mean, ac.tau_int, ac.n_eff, ac.sem)
            long.add(sid, f"mean_{key}", None, None, mean)
        for th, w in r.waits.items():
            ac = r.event_autocorr[th]
            waits.add(sid, th, w.count, w.mean, w.std, w.p10, w.p50, w.p90, w.forward_wait_mean,
                      w.censored, w.inspection_wait, w.always_up, ac.tau_int, ac.n_eff, ac.sem)
            long.add(sid, "forward_wait_mean", th, None, w.forward_wait_mean)
            long.add(sid, "down_run_mean", th, None, w.mean)
            for row in r.phase_bins.get(th, []):
                phases.add(sid, th, row["bin"], row["phase_lo"], row["phase_hi"], row["count"],
                           row["mean"])
        for th, a in r.accumulation.items():
            accum.add(sid, th, a["starts"], a["censored"], a["mean"], a["p50"])
            long.add(sid, "accumulation_wait_mean", th, None, a["mean"])
        for row in r.latency:
            latency.add(sid, row["w_max"], row["threshold"], row["time_to_connectivity"],
                        row["meets"], row["S_bar"], row["window_availability"])
            long.add(sid, "S_bar", row["threshold"], row["w_max"], row["S_bar"])
            long.add(sid, "window_availability", row["threshold"], row["w_max"],
                     row["window_availability"])
    return [waits, series, latency, accum, phases, long]


def edge_table(results: list[ScenarioResult]) -> Table:
    edges = Table("edges", ["scenario_id", "epoch", "i", "j", "rate"])
    for r in results:
        if r.graphs is None:
            raise ValueError(f"scenario {r.scenario_id} was run without keeping its graphs")
        for g in r.graphs:
            for (i, j) in sorted(g.edges):
                edges.add(r.scenario_id, g.epoch, i, j, float(g.edges[(i, j)]))
    return edges


def export_bundle(bundle: ResultBundle, out_dir, emit: str = "all", fmt: str = "csv") -> list[str]:
    """Write the selected tables and ``manifest.json``; returns the written paths."""
    if emit not in EMIT_CHOICES:
        raise ValueError(f"emit must be one of {EMIT_CHOICES}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = bundle.results
    tables: list[Table] = []
    if results:
        if emit in ("traces", "all"):
            tables += trace_tables(results)
        if emit in ("stats", "all"):
            tables += stats_tables(results)
        if emit in ("edges", "all"):
            tables.append(edge_table(results))
    written = [t.write(out, fmt) for t in tables]

    manifest = {
        "config": bundle.config.to_dict(),
        "inputs_sha256": _input_hashes(bundle.config),
        "emit": emit,
        "format": fmt,
        "scenarios": [
            {"scenario_id": r.scenario_id, **r.scenario.params(),
             "n_stations": len(r.stations),
             "n_cities": len(r.traffic.cities) if r.traffic is not None else 0}
            for r in results
        ],
        "files": written,
    }
    (out / "manifest.json").write_text(json.dumps(_jsonable(manifest), indent=1) + "\n")
    return written + ["manifest.json"]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return _num(obj)
