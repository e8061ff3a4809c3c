"""Circular two-body constellation geometry and frame transforms.

Satellites move on circular Keplerian orbits around a spherical Earth.
Positions are produced in an Earth-centred inertial (ECI) frame, rotated into
the Earth-fixed (ECEF) frame with a constant spin rate, and finally evaluated
in the local East-North-Up frame of a ground station.

All angles are radians and all distances metres unless a name says otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import MU_EARTH, OMEGA_EARTH, R_EARTH

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class EpochClock:
    """Uniform discrete-time sampling ``t_k = t_start + k * dt`` for ``k < K``."""

    t_start: float = 0.0
    dt: float = 1.0
    horizon: float = 14400.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.n_steps < 1:
            raise ValueError(f"horizon {self.horizon} shorter than one step of {self.dt}")
        if not math.isclose(self.n_steps * self.dt, self.horizon, rel_tol=1e-12, abs_tol=1e-9):
            raise ValueError(f"horizon {self.horizon} is not a whole number of {self.dt} s steps")

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.dt))

    def time(self, k: int) -> float:
        return self.t_start + k * self.dt

    def times(self) -> np.ndarray:
        return self.t_start + np.arange(self.n_steps) * self.dt


@dataclass(frozen=True)
class ShellSpec:
    """Planes sharing one altitude and inclination.

    ``raan_offsets`` defaults to ``2*pi*p/P``. ``phase_stagger`` is the
    Walker-style inter-plane factor F; plane ``p`` is shifted by
    ``2*pi*F*p/(P*S)`` along-track.
    """

    altitude: float
    inclination: float
    n_planes: int
    sats_per_plane: int
    raan_offsets: tuple[float, ...] | None = None
    phase_stagger: float = 0.0

    def __post_init__(self):
        if not self.altitude > 0:
            raise ValueError(f"altitude must be positive, got {self.altitude}")
        if not 0.0 <= self.inclination <= math.pi:
            raise ValueError(f"inclination {self.inclination} outside [0, pi]")
        if self.n_planes < 1 or self.sats_per_plane < 1:
            raise ValueError("a shell needs at least one plane and one satellite per plane")
        if self.raan_offsets is None:
            raans = tuple(TWO_PI * p / self.n_planes for p in range(self.n_planes))
            object.__setattr__(self, "raan_offsets", raans)
        else:
            raans = tuple(float(r) for r in self.raan_offsets)
            if len(raans) != self.n_planes:
                raise ValueError(f"expected {self.n_planes} RAAN offsets, got {len(raans)}")
            if any(not 0.0 <= r < TWO_PI for r in raans):
                raise ValueError("RAAN offsets must lie in [0, 2*pi)")
            object.__setattr__(self, "raan_offsets", raans)

    @property
    def n_sats(self) -> int:
        return self.n_planes * self.sats_per_plane

    @property
    def radius(self) -> float:
        return R_EARTH + self.altitude


@dataclass(frozen=True)
class ConstellationSpec:
    shells: tuple[ShellSpec, ...]
    polar_fraction: float = 0.10
    terminals: int = 7
    source_rate: float = 1e8
    budget: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "shells", tuple(self.shells))
        if self.terminals < 2:
            raise ValueError(f"terminals must be >= 2, got {self.terminals}")
        if self.budget is not None and self.budget != self.n_sats:
            raise ValueError(f"shells hold {self.n_sats} satellites but budget is {self.budget}")

    @property
    def n_sats(self) -> int:
        return sum(s.n_sats for s in self.shells)

    @property
    def n_terminals(self) -> int:
        return self.n_sats * self.terminals


@dataclass(frozen=True)
class SatState:
    sat_id: int
    pos_eci: np.ndarray = field(repr=False)
    pos_ecef: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class Topocentric:
    elevation: float
    azimuth: float
    zenith: float
    slant_range: float


def single_shell(altitude, inclination, n_planes, sats_per_plane, *, terminals=7,
                 source_rate=1e8, phase_stagger=0.0) -> ConstellationSpec:
    shell = ShellSpec(altitude, inclination, n_planes, sats_per_plane, phase_stagger=phase_stagger)
    return ConstellationSpec((shell,), polar_fraction=0.0, terminals=terminals,
                             source_rate=source_rate, budget=shell.n_sats)


def augmented_dual_shell(altitude, n_planes, sats_per_plane, polar_fraction=0.10, *,
                         inclination=math.radians(53.0), polar_inclination=math.radians(98.0),
                         terminals=7, source_rate=1e8, phase_stagger=0.0) -> ConstellationSpec:
    """Split a ``n_planes x sats_per_plane`` budget into a primary and a polar shell.

    The split is done by whole planes: ``round(polar_fraction * n_planes)`` planes
    (at least one when the fraction is positive) move to the polar inclination,
    so the satellite budget is preserved exactly.
    """
    if not 0.0 <= polar_fraction < 1.0:
        raise ValueError(f"polar_fraction must lie in [0, 1), got {polar_fraction}")
    n_polar = int(round(polar_fraction * n_planes))
    if polar_fraction > 0:
        n_polar = max(1, n_polar)
    n_polar = min(n_polar, n_planes - 1)
    budget = n_planes * sats_per_plane
    if n_polar == 0:
        spec = single_shell(altitude, inclination, n_planes, sats_per_plane, terminals=terminals,
                            source_rate=source_rate, phase_stagger=phase_stagger)
        return ConstellationSpec(spec.shells, polar_fraction=polar_fraction, terminals=terminals,
                                 source_rate=source_rate, budget=budget)
    shells = (
        ShellSpec(altitude, inclination, n_planes - n_polar, sats_per_plane, phase_stagger=phase_stagger),
        ShellSpec(altitude, polar_inclination, n_polar, sats_per_plane, phase_stagger=phase_stagger),
    )
    return ConstellationSpec(shells, polar_fraction=polar_fraction, terminals=terminals,
                             source_rate=source_rate, budget=budget)


def mean_motion(altitude: float) -> float:
    """Circular-orbit angular rate ``sqrt(mu / a^3)`` in rad/s."""
    if not altitude > 0:
        raise ValueError(f"altitude must be positive, got {altitude}")
    a = R_EARTH + altitude
    return math.sqrt(MU_EARTH / a**3)


def orbital_period(altitude: float) -> float:
    return TWO_PI / mean_motion(altitude)


def _argument_of_latitude(shell: ShellSpec, plane_index, sat_index, t, t_start):
    P, S = shell.n_planes, shell.sats_per_plane
    phase = TWO_PI * np.asarray(sat_index) / S
    stagger = TWO_PI * shell.phase_stagger * np.asarray(plane_index) / (P * S)
    return phase + stagger + mean_motion(shell.altitude) * (t - t_start)


def _orbit_to_eci(radius, raan, inclination, u):
    cos_o, sin_o = np.cos(raan), np.sin(raan)
    cos_u, sin_u = np.cos(u), np.sin(u)
    cos_i, sin_i = math.cos(inclination), math.sin(inclination)
    x = cos_o * cos_u - sin_o * sin_u * cos_i
    y = sin_o * cos_u + cos_o * sin_u * cos_i
    z = sin_u * sin_i
    return radius * np.stack([x, y, z], axis=-1)


def propagate_eci(shell: ShellSpec, plane_index: int, sat_index: int, t: float,
                  t_start: float = 0.0) -> np.ndarray:
    """ECI position of satellite ``sat_index`` in plane ``plane_index`` at time ``t``."""
    if not 0 <= plane_index < shell.n_planes:
        raise IndexError(f"plane index {plane_index} out of range")
    if not 0 <= sat_index < shell.sats_per_plane:
        raise IndexError(f"satellite index {sat_index} out of range")
    u = _argument_of_latitude(shell, plane_index, sat_index, t, t_start)
    return _orbit_to_eci(shell.radius, shell.raan_offsets[plane_index], shell.inclination, u)


def shell_eci(shell: ShellSpec, t: float, t_start: float = 0.0) -> np.ndarray:
    """Positions of every satellite in ``shell``, plane-major, shape ``(P*S, 3)``."""
    p_idx, s_idx = np.divmod(np.arange(shell.n_sats), shell.sats_per_plane)
    u = _argument_of_latitude(shell, p_idx, s_idx, t, t_start)
    raan = np.asarray(shell.raan_offsets)[p_idx]
    return _orbit_to_eci(shell.radius, raan, shell.inclination, u)


def constellation_eci(spec: ConstellationSpec, t: float, t_start: float = 0.0) -> np.ndarray:
    """Shell-major stack of all satellite ECI positions; ids follow row order."""
    if spec.n_sats == 0:
        return np.zeros((0, 3))
    return np.concatenate([shell_eci(s, t, t_start) for s in spec.shells], axis=0)


def earth_rotation_angle(t: float, t_start: float = 0.0) -> float:
    return OMEGA_EARTH * (t - t_start)


def eci_to_ecef(pos_eci, t: float, t_start: float = 0.0) -> np.ndarray:
    """Rotate ECI vectors (``(3,)`` or ``(n, 3)``) into the Earth-fixed frame."""
    theta = earth_rotation_angle(t, t_start)
    c, s = math.cos(theta), math.sin(theta)
    pos = np.asarray(pos_eci, dtype=float)
    x, y, z = pos[..., 0], pos[..., 1], pos[..., 2]
    return np.stack([c * x + s * y, -s * x + c * y, z], axis=-1)


def constellation_states(spec: ConstellationSpec, t: float, t_start: float = 0.0) -> list[SatState]:
    eci = constellation_eci(spec, t, t_start)
    ecef = eci_to_ecef(eci, t, t_start)
    return [SatState(i, eci[i], ecef[i]) for i in range(len(eci))]


def geodetic_to_ecef(lat, lon, radius: float = R_EARTH) -> np.ndarray:
    lat = np.asarray(lat, dtype=float)
    lon = np.asarray(lon, dtype=float)
    cl = np.cos(lat)
    return radius * np.stack([cl * np.cos(lon), cl * np.sin(lon), np.sin(lat)], axis=-1)


def enu_basis(pos_ecef) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """East, north and up unit vectors at points on the sphere (spherical Earth)."""
    p = np.asarray(pos_ecef, dtype=float)
    up = p / np.linalg.norm(p, axis=-1, keepdims=True)
    lon = np.arctan2(p[..., 1], p[..., 0])
    east = np.stack([-np.sin(lon), np.cos(lon), np.zeros_like(lon)], axis=-1)
    north = np.cross(up, east)
    return east, north, up


def topocentric(gs_ecef, sat_ecef) -> Topocentric:
    gs = np.asarray(gs_ecef, dtype=float)
    d = np.asarray(sat_ecef, dtype=float) - gs
    rng = float(np.linalg.norm(d))
    if rng == 0.0:
        raise ValueError("station and satellite coincide; line of sight undefined")
    east, north, up = enu_basis(gs)
    e, n, u = float(d @ east), float(d @ north), float(d @ up)
    elevation = math.asin(max(-1.0, min(1.0, u / rng)))
    azimuth = math.atan2(e, n) % TWO_PI
    return Topocentric(elevation, azimuth, math.pi / 2 - elevation, rng)


def footprint_diameter(altitude: float, min_elevation: float) -> float:
    """Great-circle diameter of the ground region seeing the satellite above ``min_elevation``."""
    if not 0.0 <= min_elevation <= math.pi / 2:
        raise ValueError(f"min_elevation {min_elevation} outside [0, pi/2]")
    ratio = R_EARTH / (R_EARTH + altitude)
    psi = math.acos(ratio * math.cos(min_elevation)) - min_elevation
    return 2.0 * R_EARTH * max(psi, 0.0)
