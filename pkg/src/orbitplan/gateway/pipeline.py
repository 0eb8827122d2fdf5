"""End-to-end planning: element set and workload in, execution plan out."""

from __future__ import annotations

import hashlib
import math
import time
from dataclasses import asdict, dataclass, field, fields
from typing import Callable

from orbitplan.errors import RequestError
from orbitplan.gateway.cache import PlanCache
from orbitplan.gateway.tle_source import TleSource
from orbitplan.groundlink import DEFAULT_STATIONS, LinkParams, predict_passes
from orbitplan.orbitcore import Tle, to_unix
from orbitplan.placement import PlacementConfig, place
from orbitplan.presets import load_preset
from orbitplan.propagator import PropagationConfig, propagate_trajectory
from orbitplan.scheduler import ExecutionPlan, assemble_plan, canonical_json, schedule
from orbitplan.skymodel import eclipse_windows
from orbitplan.timeline import EnvelopeConfig, build_timeline
from orbitplan.transfer import insert_transfers
from orbitplan.workload import Workload, validate, workload_from_dict, workload_to_dict

STEP_S = 30.0
MIN_HORIZON_H = 1.0
MAX_HORIZON_H = 168.0


@dataclass(frozen=True)
class PlanConfig:
    envelope: EnvelopeConfig = field(default_factory=EnvelopeConfig)
    placement: PlacementConfig = field(default_factory=PlacementConfig)
    link: LinkParams = field(default_factory=LinkParams)

    def to_dict(self) -> dict:
        return {"envelope": asdict(self.envelope), "placement": asdict(self.placement), "link": asdict(self.link)}


def _override(cls, doc: dict, section: str):
    if not isinstance(doc, dict):
        raise RequestError(f"config section {section!r} must be an object")
    known = {f.name for f in fields(cls)}
    extra = set(doc) - known
    if extra:
        raise RequestError(f"unknown {section} settings: {sorted(extra)}")
    try:
        return cls(**doc)
    except (TypeError, ValueError) as exc:
        raise RequestError(f"invalid {section} settings: {exc}") from None


def config_from_dict(doc: dict | None) -> PlanConfig:
    """Build a :class:`PlanConfig` from ``{"envelope": {...}, "placement": {...}, "link": {...}}``."""
    doc = doc or {}
    extra = set(doc) - {"envelope", "placement", "link"}
    if extra:
        raise RequestError(f"unknown config sections: {sorted(extra)}")
    return PlanConfig(
        envelope=_override(EnvelopeConfig, doc.get("envelope", {}), "envelope"),
        placement=_override(PlacementConfig, doc.get("placement", {}), "placement"),
        link=_override(LinkParams, doc.get("link", {}), "link"),
    )


@dataclass(frozen=True)
class PlanRequest:
    norad: int | None
    workload: str | dict | Workload
    tle_source: TleSource
    horizon_hours: float = 12.0
    start: float | str = "now"
    config: PlanConfig = field(default_factory=PlanConfig)

    def __post_init__(self):
        if not MIN_HORIZON_H <= self.horizon_hours <= MAX_HORIZON_H:
            raise RequestError(f"horizon must lie in [{MIN_HORIZON_H:g}, {MAX_HORIZON_H:g}] hours")
        if self.tle_source is None:
            raise RequestError("a TLE source is required")

    def resolve_start(self, now: Callable[[], float] = time.time) -> float:
        """Absolute start; ``"now"`` is floored to the minute so nearby requests coalesce."""
        if self.start == "now":
            return math.floor(now() / 60.0) * 60.0
        try:
            return to_unix(self.start)
        except ValueError:
            raise RequestError(f"cannot parse start time {self.start!r}") from None

    def resolve_workload(self) -> Workload:
        if isinstance(self.workload, Workload):
            return self.workload
        if isinstance(self.workload, dict):
            return workload_from_dict(self.workload)
        return load_preset(self.workload)


def cache_key(req: PlanRequest, start: float) -> str:
    w = req.workload
    if isinstance(w, Workload):
        ident = workload_to_dict(w)
    elif isinstance(w, dict):
        ident = w
    else:
        ident = {"preset": w}
    doc = {
        "norad": req.norad,
        "workload": ident,
        "start_minute": math.floor(start / 60.0),
        "start": start,
        "horizon_hours": float(req.horizon_hours),
        "config": req.config.to_dict(),
        "source": repr(req.tle_source),
    }
    return hashlib.sha256(canonical_json(doc).encode()).hexdigest()


def _timed(timings: dict, name: str, fn, *args, **kw):
    t = time.perf_counter()
    out = fn(*args, **kw)
    timings[name] = (time.perf_counter() - t) * 1000.0
    return out


def run_pipeline(
    tle: Tle,
    workload: Workload,
    start: float,
    horizon_hours: float = 12.0,
    config: PlanConfig = PlanConfig(),
    stations=DEFAULT_STATIONS,
) -> ExecutionPlan:
    """Propagate, build windows, place, insert transfers, schedule and assemble."""
    ms: dict[str, float] = {}
    t_all = time.perf_counter()
    validate(workload)
    traj = _timed(ms, "propagate", propagate_trajectory, tle, PropagationConfig(start, horizon_hours * 3600.0, STEP_S))
    illum = _timed(ms, "illumination", eclipse_windows, traj)
    passes = _timed(ms, "passes", predict_passes, traj, stations, config.link)
    timeline = _timed(ms, "timeline", build_timeline, illum, passes, config.envelope)
    decisions = _timed(ms, "placement", place, workload, config.envelope.thermal_limit, config.placement)
    rewired, transfers = _timed(
        ms, "transfers", insert_transfers, workload, decisions, passes, config.placement.assumed_mean_rate
    )
    scheduled = _timed(
        ms, "schedule", schedule, rewired, timeline, decisions, workload.deadline_orbits, tle.period
    )
    plan = _timed(
        ms,
        "assemble",
        assemble_plan,
        satellite={"norad": tle.catalog_number, "name": tle.name},
        workload_name=workload.name,
        horizon=(traj.start, traj.end),
        timeline=timeline,
        decisions=decisions,
        transfers=transfers,
        scheduled=scheduled,
    )
    ms["total"] = (time.perf_counter() - t_all) * 1000.0
    plan.extras["timings_ms"] = ms
    plan.extras["passes"] = passes
    return plan


class Planner:
    """Request-level entry point with TTL caching of finished plans."""

    def __init__(self, cache: PlanCache | None = None, now: Callable[[], float] = time.time, stations=DEFAULT_STATIONS):
        self.cache = cache if cache is not None else PlanCache()
        self._now = now
        self.stations = tuple(stations)

    def plan(self, req: PlanRequest) -> ExecutionPlan:
        start = req.resolve_start(self._now)
        key = cache_key(req, start)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        workload = req.resolve_workload()
        tle = req.tle_source.fetch(req.norad)
        plan = run_pipeline(tle, workload, start, req.horizon_hours, req.config, self.stations)
        plan.extras["cache_key"] = key
        self.cache.put(key, plan)
        return plan


def plan(req: PlanRequest) -> ExecutionPlan:
    return _DEFAULT_PLANNER.plan(req)


_DEFAULT_PLANNER = Planner()
