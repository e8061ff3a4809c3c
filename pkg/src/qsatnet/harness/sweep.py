"""Expansion of a configuration into concrete, uniquely identified scenarios."""
from __future__ import annotations

import fnmatch
import itertools
import math
import warnings
from dataclasses import asdict, dataclass

from ..groundgrid import LatticeSpec
from ..linkmodel import OpticalParams
from ..orbital import ConstellationSpec, EpochClock, augmented_dual_shell
from ..service import ServicePolicy
from .config import ScenarioConfig


@dataclass(frozen=True)
class Scenario:
    altitude_km: float
    planes: int
    sats_per_plane: int
    polar_fraction: float
    alpha: float
    policy: str
    terminals: int

    @property
    def scenario_id(self) -> str:
        return (f"h{self.altitude_km:g}-P{self.planes}-S{self.sats_per_plane}"
                f"-f{self.polar_fraction:g}-a{self.alpha:g}-{self.policy}{self.terminals}")

    def params(self) -> dict:
        return asdict(self)

    def constellation(self, cfg: ScenarioConfig) -> ConstellationSpec:
        co = cfg.constellation
        if self.planes * self.sats_per_plane == 0:
            return ConstellationSpec((), polar_fraction=self.polar_fraction, terminals=self.terminals,
                                     source_rate=cfg.optics.source_rate_hz, budget=0)
        if self.planes == 1:
            pf = 0.0  # a single plane cannot be split between shells
        else:
            pf = self.polar_fraction
        return augmented_dual_shell(
            self.altitude_km * 1e3, self.planes, self.sats_per_plane, pf,
            inclination=math.radians(co.inclination_deg),
            polar_inclination=math.radians(co.polar_inclination_deg),
            terminals=self.terminals, source_rate=cfg.optics.source_rate_hz,
            phase_stagger=co.phase_stagger)

    def lattice_spec(self, cfg: ScenarioConfig) -> LatticeSpec:
        la = cfg.lattice
        return LatticeSpec(d_eq=la.d_eq_km * 1e3, alpha=self.alpha, ns_step=la.ns_step_deg,
                           snap_radius=la.snap_radius_km * 1e3,
                           spacing_floor=la.spacing_floor_km * 1e3,
                           lat_min=la.lat_min, lat_max=la.lat_max,
                           lon_min=la.lon_min, lon_max=la.lon_max)

    def service_policy(self) -> ServicePolicy:
        return ServicePolicy(self.policy, self.terminals)


def optical_params(cfg: ScenarioConfig) -> OpticalParams:
    op = cfg.optics
    return OpticalParams(aperture_radius=op.aperture_radius_m, beam_waist=op.beam_waist_m,
                         wavelength=op.wavelength_nm * 1e-9, eta_zenith=op.eta_zenith,
                         source_rate=op.source_rate_hz, rate_floor=op.rate_floor_hz)


def epoch_clock(cfg: ScenarioConfig) -> EpochClock:
    c = cfg.clock
    return EpochClock(c.t_start, c.dt, c.horizon)


def _dedupe(name: str, values) -> list:
    out = []
    for v in values:
        if v in out:
            warnings.warn(f"duplicate value {v!r} in sweep axis {name} ignored", stacklevel=3)
            continue
        out.append(v)
    return out


def enumerate_sweep(cfg: ScenarioConfig) -> list[Scenario]:
    """Cartesian product of the sweep axes in declaration order.

    BPC always uses two terminals, so BPC crossed with several terminal counts
    collapses to one scenario.
    """
    co, sv = cfg.constellation, cfg.service
    axes = [
        _dedupe("altitude_km", co.altitude_km),
        _dedupe("planes", co.planes),
        _dedupe("sats_per_plane", co.sats_per_plane),
        _dedupe("polar_fraction", co.polar_fraction),
        _dedupe("alpha", cfg.lattice.alpha),
        _dedupe("policy", sv.policy),
        _dedupe("terminals", sv.terminals),
    ]
    scenarios: list[Scenario] = []
    seen = set()
    for h, p, s, f, a, pol, t in itertools.product(*axes):
        if pol == "BPC":
            t = 2
        elif t < 3:
            continue
        sc = Scenario(h, p, s, f, a, pol, t)
        if sc.scenario_id in seen:
            continue
        seen.add(sc.scenario_id)
        scenarios.append(sc)
    return scenarios


def filter_scenarios(scenarios, expr: str | None) -> list[Scenario]:
    """Keep scenarios matching ``expr``.

    ``expr`` is either a glob on the scenario id (``"*MPC7"``) or
    comma-separated ``field=value`` terms that must all hold
    (``"policy=MPC,alpha=1"``).
    """
    if not expr:
        return list(scenarios)
    if "=" not in expr:
        return [s for s in scenarios if fnmatch.fnmatchcase(s.scenario_id, expr)]
    terms = []
    for part in expr.split(","):
        key, _, val = part.partition("=")
        key, val = key.strip(), val.strip()
        if key not in Scenario.__dataclass_fields__:
            raise ValueError(f"unknown scenario field {key!r} in filter")
        terms.append((key, val))

    def match(s: Scenario) -> bool:
        for key, val in terms:
            cur = getattr(s, key)
            if isinstance(cur, str):
                if cur != val:
                    return False
            elif float(cur) != float(val):
                return False
        return True

    return [s for s in scenarios if match(s)]
