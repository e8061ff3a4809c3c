"""Scenario configuration: TOML ingestion, defaults and validation.

Every section maps onto a frozen dataclass. List-valued fields are sweep
axes; everything else is shared by all scenarios of a run. Distances in the
file are kilometres and angles degrees, as the key names say.
"""
from __future__ import annotations

import dataclasses
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


@dataclass(frozen=True)
class ClockSection:
    t_start: float = 0.0
    dt: float = 1.0
    horizon: float = 14400.0


@dataclass(frozen=True)
class LatticeSection:
    d_eq_km: float = 400.0
    alpha: tuple[float, ...] = (0.8,)
    ns_step_deg: float = 3.6
    snap_radius_km: float = 100.0
    spacing_floor_km: float = 50.0
    lat_min: float = -90.0
    lat_max: float = 90.0
    lon_min: float = -180.0
    lon_max: float = 180.0
    land_mask: str = "builtin"  # "builtin", "all_land", "all_water" or a raster path


@dataclass(frozen=True)
class ConstellationSection:
    altitude_km: tuple[float, ...] = (700.0,)
    planes: tuple[int, ...] = (120,)
    sats_per_plane: tuple[int, ...] = (18,)
    polar_fraction: tuple[float, ...] = (0.10,)
    inclination_deg: float = 53.0
    polar_inclination_deg: float = 98.0
    phase_stagger: float = 0.0


@dataclass(frozen=True)
class ServiceSection:
    policy: tuple[str, ...] = ("MPC",)
    terminals: tuple[int, ...] = (7,)
    z_max_deg: float = 57.0


@dataclass(frozen=True)
class OpticsSection:
    aperture_radius_m: float = 0.5
    beam_waist_m: float = 0.10
    wavelength_nm: float = 810.0
    eta_zenith: float = 0.8
    source_rate_hz: float = 1e8
    rate_floor_hz: float = 1.0


@dataclass(frozen=True)
class TrafficSection:
    cities: str = "builtin"
    restrict_to_region: bool = True


@dataclass(frozen=True)
class MetricsSection:
    thresholds: tuple[float, ...] = (0.5, 0.6, 0.7, 0.8, 0.9)
    windows_s: tuple[float, ...] = (1.0, 10.0, 60.0, 3600.0, 14400.0)
    window_stride_s: float = 60.0
    phase_bins: int = 12


@dataclass(frozen=True)
class OutputSection:
    dir: str = "results"


@dataclass(frozen=True)
class ScenarioConfig:
    clock: ClockSection = field(default_factory=ClockSection)
    lattice: LatticeSection = field(default_factory=LatticeSection)
    constellation: ConstellationSection = field(default_factory=ConstellationSection)
    service: ServiceSection = field(default_factory=ServiceSection)
    optics: OpticsSection = field(default_factory=OpticsSection)
    traffic: TrafficSection = field(default_factory=TrafficSection)
    metrics: MetricsSection = field(default_factory=MetricsSection)
    output: OutputSection = field(default_factory=OutputSection)

    @classmethod
    def from_dict(cls, data: dict, base_dir: Path | None = None) -> ScenarioConfig:
        if not isinstance(data, dict):
            raise ConfigError("configuration root must be a table")
        kwargs = {}
        for name, raw in data.items():
            if name not in _SECTION_TYPES:
                raise ConfigError(f"unknown section [{name}]")
            if not isinstance(raw, dict):
                raise ConfigError(f"[{name}] must be a table")
            kwargs[name] = _build_section(_SECTION_TYPES[name], name, raw)
        cfg = cls(**kwargs)
        if base_dir is not None:
            cfg = _resolve_paths(cfg, Path(base_dir))
        validate(cfg)
        return cfg

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            sec = getattr(self, f.name)
            out[f.name] = {k: list(v) if isinstance(v, tuple) else v
                           for k, v in dataclasses.asdict(sec).items()}
        return out


_SECTION_TYPES = {
    "clock": ClockSection,
    "lattice": LatticeSection,
    "constellation": ConstellationSection,
    "service": ServiceSection,
    "optics": OpticsSection,
    "traffic": TrafficSection,
    "metrics": MetricsSection,
    "output": OutputSection,
}


def _coerce(section: str, key: str, default, value):
    where = f"{section}.{key}"
    if isinstance(default, tuple):
        items = value if isinstance(value, list) else [value]
        if not items:
            raise ConfigError(f"{where}: sweep list must be non-empty")
        return tuple(_coerce(section, key, default[0], v) for v in items)
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected true/false, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string, got {value!r}")
        return value
    raise ConfigError(f"{where}: unsupported value {value!r}")


def _build_section(cls, name: str, raw: dict):
    defaults = cls()
    known = {f.name for f in fields(cls)}
    kwargs = {}
    for key, value in raw.items():
        if key not in known:
            raise ConfigError(f"unknown key {name}.{key}")
        kwargs[key] = _coerce(name, key, getattr(defaults, key), value)
    return cls(**kwargs)


def _resolve_paths(cfg: ScenarioConfig, base: Path) -> ScenarioConfig:
    lat, tr = cfg.lattice, cfg.traffic
    if lat.land_mask not in ("builtin", "all_land", "all_water") and not Path(lat.land_mask).is_absolute():
        lat = dataclasses.replace(lat, land_mask=str((base / lat.land_mask).resolve()))
    if tr.cities != "builtin" and not Path(tr.cities).is_absolute():
        tr = dataclasses.replace(tr, cities=str((base / tr.cities).resolve()))
    return dataclasses.replace(cfg, lattice=lat, traffic=tr)


def _check(cond: bool, key: str, msg: str):
    if not cond:
        raise ConfigError(f"{key}: {msg}")


def _check_all(values, key, pred, msg):
    for v in values:
        _check(pred(v), key, f"{v!r} {msg}")


ALTITUDE_RANGE_KM = (285.0, 2000.0)


def validate(cfg: ScenarioConfig) -> None:
    c = cfg.clock
    _check(c.dt > 0, "clock.dt", "must be positive")
    _check(c.horizon >= c.dt, "clock.horizon", "must cover at least one step")
    _check(math.isclose(round(c.horizon / c.dt) * c.dt, c.horizon, rel_tol=1e-12),
           "clock.horizon", "must be a whole number of steps")

    la = cfg.lattice
    _check(la.d_eq_km > 0, "lattice.d_eq_km", "must be positive")
    _check_all(la.alpha, "lattice.alpha", lambda a: -1.0 <= a <= 3.0, "outside [-1, 3]")
    _check(la.ns_step_deg > 0, "lattice.ns_step_deg", "must be positive")
    _check(la.snap_radius_km >= 0, "lattice.snap_radius_km", "must be non-negative")
    _check(la.spacing_floor_km > 0, "lattice.spacing_floor_km", "must be positive")
    _check(-90 <= la.lat_min <= la.lat_max <= 90, "lattice.lat_min", "latitude bounds out of order")
    _check(-180 <= la.lon_min <= la.lon_max <= 180, "lattice.lon_min", "longitude bounds out of order")
    if la.land_mask not in ("builtin", "all_land", "all_water"):
        _check(Path(la.land_mask).exists(), "lattice.land_mask", f"file {la.land_mask} not found")

    co = cfg.constellation
    lo, hi = ALTITUDE_RANGE_KM
    _check_all(co.altitude_km, "constellation.altitude_km", lambda h: lo <= h <= hi,
               f"outside [{lo:g}, {hi:g}] km")
    _check_all(co.planes, "constellation.planes", lambda p: 0 <= p <= 1000, "outside [0, 1000]")
    _check_all(co.sats_per_plane, "constellation.sats_per_plane", lambda s: 0 <= s <= 200,
               "outside [0, 200]")
    _check_all(co.polar_fraction, "constellation.polar_fraction", lambda f: 0.0 <= f <= 0.5,
               "outside [0, 0.5]")
    _check(0 <= co.inclination_deg <= 180, "constellation.inclination_deg", "outside [0, 180]")
    _check(0 <= co.polar_inclination_deg <= 180, "constellation.polar_inclination_deg",
           "outside [0, 180]")

    sv = cfg.service
    _check_all(sv.policy, "service.policy", lambda p: p in ("BPC", "MPC"), "is not BPC or MPC")
    _check_all(sv.terminals, "service.terminals", lambda t: 2 <= t <= 7, "outside [2, 7]")
    if "MPC" in sv.policy:
        _check(any(t >= 3 for t in sv.terminals), "service.terminals", "MPC needs at least 3 terminals")
    _check(0 < sv.z_max_deg < 90, "service.z_max_deg", "outside (0, 90)")

    op = cfg.optics
    for key in ("aperture_radius_m", "beam_waist_m", "wavelength_nm", "source_rate_hz", "rate_floor_hz"):
        _check(getattr(op, key) > 0, f"optics.{key}", "must be positive")
    _check(0 < op.eta_zenith <= 1, "optics.eta_zenith", "outside (0, 1]")

    tr = cfg.traffic
    if tr.cities != "builtin":
        _check(Path(tr.cities).exists(), "traffic.cities", f"file {tr.cities} not found")

    m = cfg.metrics
    _check_all(m.thresholds, "metrics.thresholds", lambda t: 0 <= t <= 1, "outside [0, 1]")
    _check_all(m.windows_s, "metrics.windows_s", lambda w: w >= 0, "must be non-negative")
    _check(m.window_stride_s >= c.dt, "metrics.window_stride_s", "must be at least one step")
    _check(m.phase_bins >= 1, "metrics.phase_bins", "must be >= 1")


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: malformed TOML ({exc})") from exc
    return ScenarioConfig.from_dict(data, base_dir=path.parent)


def dumps_config(cfg: ScenarioConfig) -> str:
    return tomli_w.dumps(cfg.to_dict())


def save_config(cfg: ScenarioConfig, path) -> None:
    Path(path).write_text(dumps_config(cfg))
