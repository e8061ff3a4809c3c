"""Anisotropic triangular ground-station lattices, land snapping and city mapping."""
from __future__ import annotations

import csv
import gzip
import itertools
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .constants import R_EARTH
from .orbital import geodetic_to_ecef

HALF_PI = math.pi / 2


@dataclass(frozen=True)
class LatticeSpec:
    """Lattice parameters; the bounding box (degrees) restricts generation to a region."""

    d_eq: float = 4.0e5
    alpha: float = 0.8
    ns_step: float = 3.6  # degrees
    snap_radius: float = 1.0e5
    spacing_floor: float = 5.0e4
    lat_min: float = -90.0
    lat_max: float = 90.0
    lon_min: float = -180.0
    lon_max: float = 180.0

    def __post_init__(self):
        if not self.d_eq > 0:
            raise ValueError("d_eq must be positive")
        if not self.ns_step > 0:
            raise ValueError("ns_step must be positive")
        if not self.spacing_floor > 0:
            raise ValueError("spacing_floor must be positive")
        if self.snap_radius < 0:
            raise ValueError("snap_radius must be non-negative")
        if not -90.0 <= self.lat_min <= self.lat_max <= 90.0:
            raise ValueError("latitude bounds must satisfy -90 <= lat_min <= lat_max <= 90")
        if not -180.0 <= self.lon_min <= self.lon_max <= 180.0:
            raise ValueError("longitude bounds must satisfy -180 <= lon_min <= lon_max <= 180")


@dataclass(frozen=True)
class GroundStation:
    gs_id: int
    lat: float
    lon: float
    pos_ecef: np.ndarray = field(repr=False, compare=False)


@dataclass(frozen=True, eq=False)
class LandMask:
    """Boolean land raster; row 0 is the southernmost band, column 0 starts at -180 deg."""

    resolution: float
    grid: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=bool)
        n_lat, n_lon = round(180 / self.resolution), round(360 / self.resolution)
        if grid.shape != (n_lat, n_lon):
            raise ValueError(f"grid shape {grid.shape} does not cover the globe at "
                             f"{self.resolution} deg (expected {(n_lat, n_lon)})")
        object.__setattr__(self, "grid", grid)

    @classmethod
    def uniform(cls, land: bool, resolution: float = 0.5) -> LandMask:
        shape = (round(180 / resolution), round(360 / resolution))
        return cls(resolution, np.full(shape, land))

    @classmethod
    def load(cls, path) -> LandMask:
        path = Path(path)
        opener = gzip.open if path.suffix == ".gz" else open
        with opener(path, "rt") as fh:
            return cls._parse(fh.read().split())

    @classmethod
    def builtin(cls) -> LandMask:
        ref = resources.files("qsatnet") / "data" / "land_mask_0p5.txt.gz"
        with ref.open("rb") as raw, gzip.open(raw, "rt") as fh:
            return cls._parse(fh.read().split())

    @classmethod
    def _parse(cls, tokens) -> LandMask:
        if len(tokens) < 2 or tokens[0] != "resolution":
            raise ValueError("land mask must start with 'resolution <degrees>'")
        res = float(tokens[1])
        rows = tokens[2:]
        grid = np.array([[c == "1" for c in row] for row in rows], dtype=bool)
        return cls(res, grid)

    def save(self, path) -> None:
        path = Path(path)
        opener = gzip.open if path.suffix == ".gz" else open
        with opener(path, "wt") as fh:
            fh.write(f"resolution {self.resolution!r}\n")
            for row in self.grid:
                fh.write("".join("1" if v else "0" for v in row) + "\n")

    def cell_index(self, lat_deg, lon_deg):
        n_lat, n_lon = self.grid.shape
        i = np.clip(np.floor((np.asarray(lat_deg) + 90.0) / self.resolution).astype(int), 0, n_lat - 1)
        j = np.floor((np.asarray(lon_deg) + 180.0) / self.resolution).astype(int) % n_lon
        return i, j

    def is_land(self, lat_deg, lon_deg):
        i, j = self.cell_index(lat_deg, lon_deg)
        return self.grid[i, j]

    def land_cell_centres(self) -> tuple[np.ndarray, np.ndarray]:
        """Latitudes and longitudes (degrees) of all land cell centres."""
        i, j = np.nonzero(self.grid)
        return -90.0 + (i + 0.5) * self.resolution, -180.0 + (j + 0.5) * self.resolution


@dataclass(frozen=True)
class TrafficMatrix:
    cities: tuple[tuple[str, float, float], ...]  # (name, lat_deg, lon_deg)
    station_index: np.ndarray = field(repr=False)  # gs_id for each city, aligned with cities

    @property
    def station_of_city(self) -> dict[str, int]:
        return {c[0]: int(g) for c, g in zip(self.cities, self.station_index)}

    @property
    def pairs(self) -> list[tuple[int, int]]:
        """Unordered city pairs as index tuples ``(a, b)`` with ``a < b``."""
        return list(itertools.combinations(range(len(self.cities)), 2))

    def pair_stations(self) -> tuple[np.ndarray, np.ndarray]:
        a, b = np.triu_indices(len(self.cities), k=1)
        return self.station_index[a], self.station_index[b]


def ew_spacing(lat: float, alpha: float, spec: LatticeSpec) -> float:
    """East-West spacing ``max(floor, d_eq / cos(lat)**alpha)``; the floor alone at the poles."""
    c = math.cos(lat)
    if abs(lat) >= HALF_PI or c <= 1e-12:
        return spec.spacing_floor
    return max(spec.spacing_floor, spec.d_eq / c**alpha)


def lon_step(lat: float, spec: LatticeSpec) -> float:
    """Angular longitude step (radians) in the row at ``lat``; ``inf`` at a pole."""
    c = math.cos(lat)
    if abs(lat) >= HALF_PI or c <= 1e-12:
        return math.inf
    return ew_spacing(lat, spec.alpha, spec) / (R_EARTH * c)


def lattice_rows(spec: LatticeSpec) -> list[tuple[float, np.ndarray]]:
    """Candidate rows as ``(lat_deg, lon_deg array)`` before any land handling.

    Rows sit at integer multiples of ``ns_step``. Each row starts at -180 deg
    (shifted by half a step on odd rows) and holds ``floor(2*pi/step)``
    points at the exact step, leaving any remainder as a seam at the
    antimeridian.
    """
    k_lo = math.ceil(spec.lat_min / spec.ns_step - 1e-9)
    k_hi = math.floor(spec.lat_max / spec.ns_step + 1e-9)
    rows = []
    for k in range(k_lo, k_hi + 1):
        lat_deg = k * spec.ns_step
        if abs(lat_deg) > 90.0 + 1e-9:
            continue
        lat_deg = max(-90.0, min(90.0, lat_deg))
        step = lon_step(math.radians(lat_deg), spec)
        if math.isinf(step):
            lons = np.array([0.0])
        else:
            step_deg = math.degrees(step)
            n = max(1, math.floor(360.0 / step_deg + 1e-9))
            offset = 0.5 * step_deg if k % 2 else 0.0
            lons = -180.0 + offset + step_deg * np.arange(n)
            lons = lons[lons < 180.0]
        lons = lons[(lons >= spec.lon_min) & (lons <= spec.lon_max)]
        if len(lons):
            rows.append((lat_deg, lons))
    return rows


def _unit_vectors(lat_deg, lon_deg) -> np.ndarray:
    return geodetic_to_ecef(np.radians(lat_deg), np.radians(lon_deg), radius=1.0)


def generate_lattice(spec: LatticeSpec, mask: LandMask) -> list[GroundStation]:
    """Build the land-snapped lattice.

    Candidates on land are kept in place. Candidates over water move to the
    centre of the nearest land cell within ``snap_radius`` (great-circle), or
    are dropped.
    """
    rows = lattice_rows(spec)
    if not rows:
        return []
    lat = np.concatenate([np.full(len(lons), la) for la, lons in rows])
    lon = np.concatenate([lons for _, lons in rows])
    on_land = mask.is_land(lat, lon)

    land_lat, land_lon = mask.land_cell_centres()
    final_lat, final_lon = lat.copy(), lon.copy()
    keep = on_land.copy()
    water = np.nonzero(~on_land)[0]
    if len(water) and len(land_lat) and spec.snap_radius > 0:
        tree = cKDTree(_unit_vectors(land_lat, land_lon))
        chord_max = 2.0 * math.sin(min(spec.snap_radius / R_EARTH, math.pi) / 2.0)
        dist, idx = tree.query(_unit_vectors(lat[water], lon[water]), k=1)
        ok = dist <= chord_max
        final_lat[water[ok]] = land_lat[idx[ok]]
        final_lon[water[ok]] = land_lon[idx[ok]]
        keep[water[ok]] = True

    stations: list[GroundStation] = []
    for n in np.nonzero(keep)[0]:
        la, lo = math.radians(final_lat[n]), math.radians(final_lon[n])
        stations.append(GroundStation(len(stations), la, lo, geodetic_to_ecef(la, lo)))
    return stations


def station_positions(stations) -> np.ndarray:
    if not stations:
        return np.zeros((0, 3))
    return np.stack([s.pos_ecef for s in stations])


def great_circle_distance(lat1, lon1, lat2, lon2, radius: float = R_EARTH):
    """Haversine distance; inputs in radians, broadcastable."""
    dlat = np.asarray(lat2) - lat1
    dlon = np.asarray(lon2) - lon1
    h = np.sin(dlat / 2) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin(dlon / 2) ** 2
    return 2.0 * radius * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0)))


def map_cities(cities, stations) -> TrafficMatrix:
    """Assign each ``(name, lat_deg, lon_deg)`` city to its great-circle-nearest station.

    Equidistant stations resolve to the lower ``gs_id``.
    """
    if not stations:
        raise ValueError("cannot map cities onto an empty station list")
    cities = tuple((str(n), float(la), float(lo)) for n, la, lo in cities)
    s_lat = np.array([s.lat for s in stations])
    s_lon = np.array([s.lon for s in stations])
    idx = np.empty(len(cities), dtype=int)
    for c, (_, la, lo) in enumerate(cities):
        d = great_circle_distance(math.radians(la), math.radians(lo), s_lat, s_lon)
        idx[c] = int(np.argmin(d))  # argmin returns the first minimum
    return TrafficMatrix(cities, idx)


def load_cities(path=None) -> list[tuple[str, float, float]]:
    """Read a ``name,lat,lon`` CSV (degrees); ``None`` loads the bundled 120-city list."""
    if path is None:
        text = (resources.files("qsatnet") / "data" / "cities.csv").read_text()
    else:
        text = Path(path).read_text()
    reader = csv.DictReader(line for line in text.splitlines() if line and not line.startswith("#"))
    return [(row["name"], float(row["lat"]), float(row["lon"])) for row in reader]


def cities_in_box(cities, spec: LatticeSpec, margin: float = 0.0):
    return [c for c in cities
            if spec.lat_min - margin <= c[1] <= spec.lat_max + margin
            and spec.lon_min - margin <= c[2] <= spec.lon_max + margin]


def write_stations(path, stations) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["gs_id", "lat_deg", "lon_deg"])
        for s in stations:
            w.writerow([s.gs_id, repr(math.degrees(s.lat)), repr(math.degrees(s.lon))])


def read_stations(path) -> list[GroundStation]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for row in rows:
        la, lo = math.radians(float(row["lat_deg"])), math.radians(float(row["lon_deg"]))
        out.append(GroundStation(int(row["gs_id"]), la, lo, geodetic_to_ecef(la, lo)))
    return out
