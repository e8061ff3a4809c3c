"""Satellite service policies and per-epoch ground-station graphs.

Each satellite picks up to ``T`` of its visible stations, nearest first. Under
BPC it serves the single pair among its two nearest stations; under MPC the
nearest station becomes a hub with spokes to the others plus a ring through
the non-hub members ordered by azimuth around the hub. Edges whose expected
pair rate is below the rate floor are dropped, and when several satellites
offer the same station pair only the fastest one is kept.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .linkmodel import DEFAULT_OPTICS, OpticalParams, eta_atm, eta_geo
from .orbital import enu_basis

Z_MAX_DEFAULT = math.radians(57.0)


class PolicyKind(str, enum.Enum):
    BPC = "BPC"
    MPC = "MPC"


@dataclass(frozen=True)
class ServicePolicy:
    kind: PolicyKind
    terminals: int = 2

    def __post_init__(self):
        kind = PolicyKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is PolicyKind.BPC and self.terminals != 2:
            raise ValueError("BPC service uses exactly two terminals")
        if kind is PolicyKind.MPC and not 3 <= self.terminals <= 7:
            raise ValueError(f"MPC needs 3 <= terminals <= 7, got {self.terminals}")

    @classmethod
    def bpc(cls) -> ServicePolicy:
        return cls(PolicyKind.BPC, 2)

    @classmethod
    def mpc(cls, terminals: int = 7) -> ServicePolicy:
        return cls(PolicyKind.MPC, terminals)


@dataclass
class EpochGraph:
    """Undirected weighted edges keyed by ``(i, j)`` with ``i < j``; weights in pairs/s."""

    epoch: int
    edges: dict[tuple[int, int], float] = field(default_factory=dict)

    def add(self, i: int, j: int, weight: float) -> None:
        if i == j:
            raise ValueError("self-loops are not allowed")
        key = (i, j) if i < j else (j, i)
        if weight > self.edges.get(key, -math.inf):
            self.edges[key] = weight

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Sorted ``(i, j, w)`` arrays."""
        if not self.edges:
            return np.zeros(0, int), np.zeros(0, int), np.zeros(0)
        keys = sorted(self.edges)
        ij = np.array(keys, dtype=int)
        return ij[:, 0], ij[:, 1], np.array([self.edges[k] for k in keys])

    def __len__(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class LinkStrengthSample:
    epoch: int
    strength: float


@dataclass(frozen=True)
class StationGeometry:
    """Precomputed station positions and local frames, indexed by ``gs_id``."""

    pos: np.ndarray
    east: np.ndarray
    north: np.ndarray
    up: np.ndarray

    @classmethod
    def from_positions(cls, pos) -> StationGeometry:
        pos = np.asarray(pos, dtype=float).reshape(-1, 3)
        if len(pos) == 0:
            empty = np.zeros((0, 3))
            return cls(pos, empty, empty, empty)
        east, north, up = enu_basis(pos)
        return cls(pos, east, north, up)

    def __len__(self) -> int:
        return len(self.pos)


def look_angles(sat_ecef, geom: StationGeometry) -> tuple[np.ndarray, np.ndarray]:
    """Slant ranges and zenith angles, each shaped ``(n_stations, n_sats)``."""
    sat = np.asarray(sat_ecef, dtype=float).reshape(-1, 3)
    d = sat[None, :, :] - geom.pos[:, None, :]
    rng = np.linalg.norm(d, axis=-1)
    cos_z = np.einsum("gsk,gk->gs", d, geom.up) / rng
    return rng, np.arccos(np.clip(cos_z, -1.0, 1.0))


def visible_mask(zenith, z_max: float = Z_MAX_DEFAULT, z_min: float = 0.0) -> np.ndarray:
    """Closed-interval zenith test; anything at or beyond 90 deg has no line of sight."""
    z = np.asarray(zenith)
    return (z >= z_min) & (z <= z_max) & (z < math.pi / 2)


def visible_set(sat_ecef, geom: StationGeometry, z_max: float = Z_MAX_DEFAULT) -> set[int]:
    _, zen = look_angles(sat_ecef, geom)
    return set(np.nonzero(visible_mask(zen[:, 0], z_max))[0].tolist())


def service_subset(ranges, ids, T: int) -> list[int]:
    """The ``T`` nearest stations by slant range, ties to the lower id; hub first."""
    if T < 2:
        raise ValueError(f"T must be >= 2, got {T}")
    ranges = np.asarray(ranges, dtype=float)
    ids = np.asarray(ids, dtype=int)
    order = np.lexsort((ids, ranges))[:T]
    return ids[order].tolist()


def _pair_rate(eta: dict[int, float], a: int, b: int, params: OpticalParams) -> float:
    return params.source_rate * eta[a] * eta[b]


def induce_edges_bpc(subset, eta: dict[int, float], params: OpticalParams = DEFAULT_OPTICS):
    """At most one edge: the pair formed by a two-station service subset."""
    subset = list(subset)
    if len(subset) > 2:
        raise ValueError("BPC service subsets hold at most two stations")
    if len(subset) < 2:
        return []
    a, b = subset
    r = _pair_rate(eta, a, b, params)
    return [(min(a, b), max(a, b), r)] if r >= params.rate_floor else []


def ring_order(hub: int, members, geom: StationGeometry) -> list[int]:
    """Non-hub members sorted by azimuth about the hub (clockwise from north), ties by id."""
    if not members:
        return []
    members = np.asarray(members, dtype=int)
    v = geom.pos[members] - geom.pos[hub]
    az = np.arctan2(v @ geom.east[hub], v @ geom.north[hub]) % (2 * math.pi)
    return members[np.lexsort((members, az))].tolist()


def hub_spoke_ring_pairs(subset, geom: StationGeometry) -> list[tuple[int, int]]:
    """Candidate station pairs for an MPC subset whose first element is the hub."""
    subset = list(subset)
    if len(subset) < 2:
        return []
    hub, rest = subset[0], subset[1:]
    pairs = [(hub, m) for m in rest]
    ring = ring_order(hub, rest, geom)
    if len(ring) == 2:
        pairs.append((ring[0], ring[1]))
    elif len(ring) >= 3:
        pairs.extend((ring[k], ring[(k + 1) % len(ring)]) for k in range(len(ring)))
    return pairs


def induce_edges_mpc(subset, eta: dict[int, float], geom: StationGeometry,
                     params: OpticalParams = DEFAULT_OPTICS):
    out = []
    for a, b in hub_spoke_ring_pairs(subset, geom):
        r = _pair_rate(eta, a, b, params)
        if r >= params.rate_floor:
            out.append((min(a, b), max(a, b), r))
    return out


def build_epoch_graph(sat_ecef, geom: StationGeometry, policy: ServicePolicy,
                      params: OpticalParams = DEFAULT_OPTICS, epoch: int = 0,
                      z_max: float = Z_MAX_DEFAULT) -> EpochGraph:
    """Union of every satellite's induced edges with per-pair max-rate retention."""
    graph = EpochGraph(epoch)
    sat = np.asarray(sat_ecef, dtype=float).reshape(-1, 3)
    if len(sat) == 0 or len(geom) == 0:
        return graph
    rng, zen = look_angles(sat, geom)
    vis = visible_mask(zen, z_max)
    candidates = np.nonzero(vis.sum(axis=0) >= 2)[0]
    for s in candidates:
        ids = np.nonzero(vis[:, s])[0]
        subset = service_subset(rng[ids, s], ids, policy.terminals)
        sub = np.asarray(subset)
        eff = eta_geo(rng[sub, s], params) * eta_atm(zen[sub, s], params)
        eta = dict(zip(subset, np.atleast_1d(eff).tolist()))
        if policy.kind is PolicyKind.BPC:
            edges = induce_edges_bpc(subset, eta, params)
        else:
            edges = induce_edges_mpc(subset, eta, geom, params)
        for i, j, w in edges:
            graph.add(i, j, w)
    return graph


def epoch_link_strength(graph: EpochGraph) -> LinkStrengthSample:
    if not graph.edges:
        return LinkStrengthSample(graph.epoch, 0.0)
    # fsum is exactly rounded, so the result does not depend on edge order
    return LinkStrengthSample(graph.epoch, math.fsum(graph.edges.values()) / len(graph.edges))


def write_edges(path, graphs) -> None:
    """Dump ``epoch,gs_i,gs_j,weight`` rows for a sequence of graphs."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", "gs_i", "gs_j", "weight"])
        for g in graphs:
            for (i, j), wt in sorted(g.edges.items()):
                w.writerow([g.epoch, i, j, repr(float(wt))])
