"""Connected-component metrics over epoch graphs and windowed union graphs.

Reachability ignores edge weights; weights only feed the strength metrics.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .groundgrid import TrafficMatrix
from .service import EpochGraph


@dataclass
class ConnectivityTrace:
    lcc_fraction: np.ndarray
    city_fraction: np.ndarray
    strength: np.ndarray

    def __post_init__(self):
        n = {len(self.lcc_fraction), len(self.city_fraction), len(self.strength)}
        if len(n) != 1:
            raise ValueError("trace columns must have equal length")

    def __len__(self) -> int:
        return len(self.lcc_fraction)

    @property
    def mean_strength(self) -> float:
        return float(np.mean(self.strength)) if len(self.strength) else 0.0


@dataclass
class UnionWindow:
    start: int
    w_max: float
    edges: dict[tuple[int, int], float] = field(default_factory=dict)

    def as_graph(self) -> EpochGraph:
        return EpochGraph(self.start, dict(self.edges))


def component_labels(edges, n_nodes: int) -> np.ndarray:
    """Component label per node; ``edges`` is an EpochGraph, a dict or an ``(i, j)`` array pair."""
    if isinstance(edges, (EpochGraph, UnionWindow)):
        edges = edges.edges
    if isinstance(edges, dict):
        keys = list(edges)
        i = np.fromiter((k[0] for k in keys), dtype=np.int64, count=len(keys))
        j = np.fromiter((k[1] for k in keys), dtype=np.int64, count=len(keys))
    else:
        i, j = (np.asarray(a, dtype=np.int64) for a in edges)
    adj = coo_matrix((np.ones(len(i), dtype=np.int8), (i, j)), shape=(n_nodes, n_nodes))
    _, labels = connected_components(adj, directed=False)
    return labels


def lcc_fraction(graph, n_nodes: int) -> float:
    if n_nodes < 1:
        raise ValueError("need at least one node")
    labels = component_labels(graph, n_nodes)
    return float(np.bincount(labels).max()) / n_nodes


def city_fraction(graph, tm: TrafficMatrix, n_nodes: int | None = None, labels=None) -> float:
    """Fraction of city pairs whose stations share a component (same station counts)."""
    a, b = tm.pair_stations()
    if len(a) == 0:
        return 1.0
    if labels is None:
        if n_nodes is None:
            n_nodes = int(tm.station_index.max()) + 1
            if isinstance(graph, (EpochGraph, UnionWindow)) and graph.edges:
                n_nodes = max(n_nodes, 1 + max(max(k) for k in graph.edges))
        labels = component_labels(graph, n_nodes)
    return float(np.count_nonzero(labels[a] == labels[b])) / len(a)


def window_epochs(w_max: float, dt: float) -> int:
    """Number of extra epochs a ``w_max``-second window reaches beyond its start."""
    return int(np.floor(w_max / dt + 1e-9))


def union_graph(graphs, start: int, w_max: float, dt: float = 1.0) -> UnionWindow:
    """Merge epochs ``start .. start + w_max/dt`` (inclusive, truncated at the trace end).

    Pair weights are the maximum over the window.
    """
    stop = min(len(graphs), start + window_epochs(w_max, dt) + 1)
    merged: dict[tuple[int, int], float] = {}
    for g in graphs[start:stop]:
        for key, w in g.edges.items():
            if w > merged.get(key, -np.inf):
                merged[key] = w
    return UnionWindow(start, w_max, merged)


def threshold_trace(values, theta: float) -> np.ndarray:
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"threshold {theta} outside [0, 1]")
    return np.asarray(values, dtype=float) >= theta


class PairOccurrences:
    """Per-pair activity epochs, for answering many union-window queries cheaply."""

    def __init__(self, graphs):
        per_pair: dict[tuple[int, int], list[int]] = {}
        for k, g in enumerate(graphs):
            for key in g.edges:
                per_pair.setdefault(key, []).append(k)
        self.keys = sorted(per_pair)
        self.epochs = [np.asarray(per_pair[key]) for key in self.keys]
        self.n_epochs = len(graphs)

    def active_in(self, starts, w_epochs: int) -> np.ndarray:
        """Boolean ``(n_pairs, n_starts)``: pair active somewhere in ``[start, start + w_epochs]``."""
        starts = np.asarray(starts)
        out = np.zeros((len(self.keys), len(starts)), dtype=bool)
        for p, ep in enumerate(self.epochs):
            idx = np.searchsorted(ep, starts, side="left")
            ok = idx < len(ep)
            nxt = np.where(ok, ep[np.minimum(idx, len(ep) - 1)], np.iinfo(np.int64).max)
            out[p] = ok & (nxt <= starts + w_epochs)
        return out

    def pair_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.keys:
            return np.zeros(0, np.int64), np.zeros(0, np.int64)
        ij = np.asarray(self.keys, dtype=np.int64)
        return ij[:, 0], ij[:, 1]


def windowed_city_fraction(occ: PairOccurrences, tm: TrafficMatrix, n_nodes: int, starts,
                           w_max: float, dt: float) -> np.ndarray:
    """City fraction of the union graph at each start epoch."""
    active = occ.active_in(starts, window_epochs(w_max, dt))
    i, j = occ.pair_arrays()
    out = np.empty(len(starts))
    for c in range(len(starts)):
        sel = active[:, c]
        labels = component_labels((i[sel], j[sel]), n_nodes)
        out[c] = city_fraction(None, tm, labels=labels)
    return out


def write_trace(path, trace: ConnectivityTrace, scenario_id: str | None = None) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        head = ["epoch", "lcc_fraction", "city_fraction", "S_k"]
        w.writerow((["scenario_id"] if scenario_id else []) + head)
        for k in range(len(trace)):
            row = [k, repr(float(trace.lcc_fraction[k])), repr(float(trace.city_fraction[k])),
                   repr(float(trace.strength[k]))]
            w.writerow(([scenario_id] if scenario_id else []) + row)


class _DisjointSet:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if ra < rb:
                ra, rb = rb, ra
            self.parent[ra] = rb


def _connected_pair_fraction(ds: _DisjointSet, city_stations, n_pairs: int) -> float:
    counts: dict[int, int] = {}
    for s in city_stations:
        r = ds.find(s)
        counts[r] = counts.get(r, 0) + 1
    return sum(c * (c - 1) // 2 for c in counts.values()) / n_pairs


def accumulation_waits(graphs, tm: TrafficMatrix, n_nodes: int, thetas, starts,
                       dt: float = 1.0) -> dict[float, np.ndarray]:
    """First-passage time of the growing union graph.

    For each start epoch ``t`` the smallest ``w`` such that the union of epochs
    ``t .. t + w/dt`` connects at least a fraction ``theta`` of the city pairs;
    ``inf`` when the trace ends first.
    """
    thetas = [float(th) for th in thetas]
    out = {th: np.full(len(starts), np.inf) for th in thetas}
    city_st = [int(s) for s in tm.station_index]
    n_pairs = len(city_st) * (len(city_st) - 1) // 2
    if n_pairs == 0:
        for th in thetas:
            out[th][:] = 0.0
        return out
    for c, t0 in enumerate(starts):
        ds = _DisjointSet(n_nodes)
        pending = sorted(thetas)
        for k in range(int(t0), len(graphs)):
            for i, j in graphs[k].edges:
                ds.union(i, j)
            frac = _connected_pair_fraction(ds, city_st, n_pairs)
            while pending and frac >= pending[0]:
                out[pending.pop(0)][c] = (k - t0) * dt
            if not pending:
                break
    return out
