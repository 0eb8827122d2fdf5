"""Greedy first-fit window scheduling and execution-plan assembly."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

from orbitplan.errors import DeadlineExceededError, NoFeasibleWindowError
from orbitplan.orbitcore import isoformat
from orbitplan.workload import DOWNLINK, GROUND, ONBOARD, UPLINK, ProcessingStep, Workload, topo_sort

PLAN_SCHEMA_VERSION = "1.0"
BASE_CONFIDENCE = 0.99
DEGRADE_FACTOR = 0.9


@dataclass(frozen=True)
class ScheduledStep:
    step_id: str
    window_id: int | None
    t_start: float
    t_end: float
    location: str
    # a window passed the resource checks but the dependency-delayed start
    # overflowed it, so the step slipped to a later window
    deferred: bool = False
    is_transfer: bool = False

    def to_dict(self) -> dict:
        return {
            "step_id": self.step_id,
            "window_id": self.window_id,
            "t_start": isoformat(self.t_start),
            "t_end": isoformat(self.t_end),
            "duration_s": self.t_end - self.t_start,
            "location": self.location,
            "deferred": self.deferred,
            "is_transfer": self.is_transfer,
        }


def feasible(step: ProcessingStep, w, used: float) -> bool:
    """Whether ``step`` fits window ``w`` that already has ``used`` seconds allocated."""
    return (
        step.duration <= (w.t_end - w.t_start) - used
        and step.power <= w.power
        and step.thermal <= w.thermal_limit
        and step.compute <= w.compute
        and (not step.needs_comms or w.comms_rate > 0)
    )


def schedule(
    w: Workload,
    timeline,
    decisions,
    deadline_orbits: float,
    orbital_period: float,
    t0: float | None = None,
) -> list[ScheduledStep]:
    """Assign every step a time slot, in topological order.

    Ground steps start as soon as their inputs exist and consume no window
    time. Everything else takes the first window that satisfies the resource
    checks and can hold the step after its dependencies finish.
    """
    locations = {d.step_id: d.location for d in decisions}
    steps = w.step_map()
    preds = w.predecessors()
    if t0 is None:
        if not timeline:
            t0 = 0.0
        else:
            t0 = timeline[0].t_start
    t_max = t0 + deadline_orbits * orbital_period
    used = [0.0] * len(timeline)
    # end of the last step placed in each window; equals t_start + used
    # unless a dependency wait left idle time inside the window
    cursor = [win.t_start for win in timeline]
    end_of: dict[str, float] = {}
    out = []

    for sid in topo_sort(w):
        step = steps[sid]
        loc = ONBOARD if step.is_transfer else locations.get(sid, step.location)
        ready = max((end_of[u] for u in preds[sid]), default=t0)
        if loc == GROUND:
            start = max(t0, ready)
            end_of[sid] = start + step.duration
            out.append(ScheduledStep(sid, None, start, end_of[sid], GROUND))
            continue

        placed = None
        deferred = False
        for idx, win in enumerate(timeline):
            if win.t_end <= ready:
                continue
            if win.t_start > t_max:
                raise DeadlineExceededError(
                    f"step {sid!r} cannot be placed before the deadline of {deadline_orbits:g} orbits", sid
                )
            if not feasible(step, win, used[idx]):
                continue
            start = max(cursor[idx], ready)
            if start + step.duration > win.t_end:
                deferred = True
                continue
            placed = ScheduledStep(sid, win.id, start, start + step.duration, ONBOARD, deferred, step.is_transfer)
            used[idx] += step.duration
            cursor[idx] = placed.t_end
            break
        if placed is None:
            raise NoFeasibleWindowError(f"no window within the horizon can host step {sid!r}", sid)
        end_of[sid] = placed.t_end
        out.append(placed)
    return out


# -- plan assembly --------------------------------------------------------------


def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, no whitespace, floats with six decimals."""
    if isinstance(obj, dict):
        items = sorted(obj.items())
        return "{" + ",".join(json.dumps(str(k)) + ":" + canonical_json(v) for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(canonical_json(v) for v in obj) + "]"
    if obj is None or isinstance(obj, (bool, str)):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError("non-finite number in plan")
        text = f"{obj:.6f}"
        return "0.000000" if text == "-0.000000" else text
    raise TypeError(f"cannot serialize {type(obj).__name__}")


@dataclass
class ExecutionPlan:
    satellite: dict
    workload: str
    generated_at: float
    horizon_start: float
    horizon_end: float
    timeline: list
    decisions: list
    transfers: list
    schedule: list
    metrics: dict
    confidence: float
    determinism_hash: str = ""
    extras: dict = field(default_factory=dict)

    def body(self) -> dict:
        return {
            "schema_version": PLAN_SCHEMA_VERSION,
            "satellite": self.satellite,
            "workload": self.workload,
            "generated_at": isoformat(self.generated_at),
            "horizon": {
                "start": isoformat(self.horizon_start),
                "end": isoformat(self.horizon_end),
                "seconds": self.horizon_end - self.horizon_start,
            },
            "timeline": [w.to_dict() for w in self.timeline],
            "decisions": [d.to_dict() for d in self.decisions],
            "transfers": [t.to_dict() for t in self.transfers],
            "schedule": [s.to_dict() for s in self.schedule],
            "metrics": self.metrics,
            "confidence": self.confidence,
        }

    def to_dict(self) -> dict:
        doc = self.body()
        doc["determinism_hash"] = self.determinism_hash
        return doc

    def to_json(self) -> str:
        return canonical_json(self.to_dict())


def plan_metrics(transfers, scheduled) -> dict:
    def total(direction, attr):
        return sum(getattr(t, attr) for t in transfers if t.direction == direction)

    if scheduled:
        makespan = max(s.t_end for s in scheduled) - min(s.t_start for s in scheduled)
    else:
        makespan = 0.0
    return {
        "payload_downlink_mb": float(total(DOWNLINK, "raw")),
        "payload_uplink_mb": float(total(UPLINK, "raw")),
        "channel_downlink_mb": float(total(DOWNLINK, "total")),
        "channel_uplink_mb": float(total(UPLINK, "total")),
        "planned_downlink_mb": float(total(DOWNLINK, "planned")),
        "planned_uplink_mb": float(total(UPLINK, "planned")),
        "transfer_count": len(transfers),
        "shortfall_mb": float(sum(t.shortfall for t in transfers)),
        "step_count": len(scheduled),
        "makespan_s": float(makespan),
    }


def plan_confidence(transfers, scheduled) -> float:
    """Heuristic plan quality score, not a probability.

    1.0 for an empty plan and 0.99 for a clean one. Each transfer with
    unallocated volume, and each step that slipped past a window it
    overflowed, costs a factor of 0.9.
    """
    if not scheduled:
        return 1.0
    penalties = sum(1 for t in transfers if t.shortfall > 0) + sum(1 for s in scheduled if s.deferred)
    return round(BASE_CONFIDENCE * DEGRADE_FACTOR**penalties, 6)


def assemble_plan(
    *,
    satellite: dict,
    workload_name: str,
    horizon: tuple[float, float],
    timeline,
    decisions,
    transfers,
    scheduled,
    generated_at: float | None = None,
) -> ExecutionPlan:
    plan = ExecutionPlan(
        satellite=satellite,
        workload=workload_name,
        generated_at=horizon[0] if generated_at is None else generated_at,
        horizon_start=horizon[0],
        horizon_end=horizon[1],
        timeline=list(timeline),
        decisions=list(decisions),
        transfers=list(transfers),
        schedule=list(scheduled),
        metrics=plan_metrics(transfers, scheduled),
        confidence=plan_confidence(transfers, scheduled),
    )
    plan.determinism_hash = hashlib.sha256(canonical_json(plan.body()).encode()).hexdigest()
    return plan
