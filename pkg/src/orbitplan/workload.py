"""Workload DAG model, validation and deterministic topological ordering."""

from __future__ import annotations

import heapq
import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from orbitplan.errors import CycleError, DanglingEdgeError, DuplicateStepError, WorkloadError

ONBOARD = "onboard"
GROUND = "ground"
EITHER = "either"
LOCATIONS = (ONBOARD, GROUND, EITHER)

RETRY_POLICIES = ("none", "retry_same_window", "retry_next_window")
ENCRYPTION_SCHEMES = ("none", "aes128", "aes256")
INTEGRITY_SCHEMES = ("none", "crc32", "sha256")

DOWNLINK = "downlink"
UPLINK = "uplink"


@dataclass(frozen=True)
class ProcessingStep:
    id: str
    duration: float  # s
    power: float = 0.0  # W
    compute: float = 0.0  # normalized
    thermal: float = 0.0  # W
    memory: float = 0.0  # MB
    storage: float = 0.0  # MB
    data_in: float = 0.0  # MB
    data_out: float = 0.0  # MB
    location: str = EITHER
    needs_comms: bool = False
    retry_policy: str = "none"
    max_retries: int = 0
    checkpoint_interval: float | None = None
    encryption: str = "none"
    integrity: str = "none"
    # output already carries FEC and encryption; transfers must not add them again
    channel_ready: bool = False
    transfer_direction: str | None = None
    description: str = ""

    @property
    def is_transfer(self) -> bool:
        return self.transfer_direction is not None

    def check(self) -> None:
        if not self.id:
            raise WorkloadError("step id must be non-empty")
        if not self.duration > 0:
            raise WorkloadError(f"step {self.id}: duration must be positive")
        for name in ("power", "compute", "thermal", "memory", "storage", "data_in", "data_out"):
            if getattr(self, name) < 0:
                raise WorkloadError(f"step {self.id}: {name} must be non-negative")
        if self.compute > 1.0:
            raise WorkloadError(f"step {self.id}: compute must lie in [0, 1]")
        if self.location not in LOCATIONS:
            raise WorkloadError(f"step {self.id}: unknown location {self.location!r}")
        if self.retry_policy not in RETRY_POLICIES:
            raise WorkloadError(f"step {self.id}: unknown retry policy {self.retry_policy!r}")
        if self.max_retries < 0:
            raise WorkloadError(f"step {self.id}: max_retries must be >= 0")
        if self.encryption not in ENCRYPTION_SCHEMES:
            raise WorkloadError(f"step {self.id}: unknown encryption {self.encryption!r}")
        if self.integrity not in INTEGRITY_SCHEMES:
            raise WorkloadError(f"step {self.id}: unknown integrity check {self.integrity!r}")
        if self.transfer_direction not in (None, DOWNLINK, UPLINK):
            raise WorkloadError(f"step {self.id}: unknown transfer direction {self.transfer_direction!r}")


@dataclass(frozen=True)
class Workload:
    name: str
    steps: tuple[ProcessingStep, ...]
    edges: tuple[tuple[str, str], ...] = ()
    deadline_orbits: float = 8.0
    # where the workload's final outputs are consumed; "ground" implies a
    # downlink for every on-board exit step
    sink: str = ONBOARD
    description: str = ""

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        object.__setattr__(self, "edges", tuple((str(u), str(v)) for u, v in self.edges))

    def step(self, step_id: str) -> ProcessingStep:
        return self.step_map()[step_id]

    def step_map(self) -> dict[str, ProcessingStep]:
        return {s.id: s for s in self.steps}

    def predecessors(self) -> dict[str, list[str]]:
        preds: dict[str, list[str]] = {s.id: [] for s in self.steps}
        for u, v in self.edges:
            preds[v].append(u)
        return preds

    def successors(self) -> dict[str, list[str]]:
        succ: dict[str, list[str]] = {s.id: [] for s in self.steps}
        for u, v in self.edges:
            succ[u].append(v)
        return succ


def _find_cycle(ids, edges) -> list[str]:
    succ: dict[str, list[str]] = {i: [] for i in ids}
    for u, v in edges:
        succ[u].append(v)
    for k in succ:
        succ[k].sort()
    state = dict.fromkeys(ids, 0)  # 0 new, 1 on stack, 2 done
    for root in sorted(ids):
        if state[root]:
            continue
        path = [root]
        iters = [iter(succ[root])]
        state[root] = 1
        while iters:
            nxt = next(iters[-1], None)
            if nxt is None:
                state[path.pop()] = 2
                iters.pop()
            elif state[nxt] == 1:
                return path[path.index(nxt) :]
            elif state[nxt] == 0:
                state[nxt] = 1
                path.append(nxt)
                iters.append(iter(succ[nxt]))
    return []


def validate(w: Workload) -> None:
    """Raise on duplicate ids, dangling edges, cycles or out-of-range step fields."""
    seen: set[str] = set()
    for s in w.steps:
        if s.id in seen:
            raise DuplicateStepError(f"duplicate step id {s.id!r}")
        seen.add(s.id)
        s.check()
    for u, v in w.edges:
        for end in (u, v):
            if end not in seen:
                raise DanglingEdgeError(f"edge ({u!r}, {v!r}) references unknown step {end!r}")
    if not w.deadline_orbits > 0:
        raise WorkloadError("deadline_orbits must be positive")
    if w.sink not in (ONBOARD, GROUND):
        raise WorkloadError(f"unknown sink {w.sink!r}")
    cycle = _find_cycle(list(seen), w.edges)
    if cycle:
        raise CycleError(cycle)


def topo_sort(w: Workload) -> list[str]:
    """Kahn's algorithm; among ready steps the lexicographically smallest id goes first."""
    ids = [s.id for s in w.steps]
    indeg = dict.fromkeys(ids, 0)
    succ: dict[str, list[str]] = {i: [] for i in ids}
    for u, v in w.edges:
        succ[u].append(v)
        indeg[v] += 1
    ready = [i for i in ids if indeg[i] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        node = heapq.heappop(ready)
        order.append(node)
        for nxt in succ[node]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                heapq.heappush(ready, nxt)
    if len(order) != len(ids):
        raise CycleError(_find_cycle(ids, w.edges))
    return order


# -- JSON documents -------------------------------------------------------------

_STEP_FIELDS = {f.name for f in fields(ProcessingStep)}


def step_from_dict(doc: dict) -> ProcessingStep:
    extra = set(doc) - _STEP_FIELDS
    if extra:
        raise WorkloadError(f"unknown step fields: {sorted(extra)}")
    if "id" not in doc or "duration" not in doc:
        raise WorkloadError("each step needs at least 'id' and 'duration'")
    try:
        return ProcessingStep(**doc)
    except TypeError as exc:
        raise WorkloadError(str(exc)) from None


def workload_from_dict(doc: dict) -> Workload:
    if not isinstance(doc, dict) or "steps" not in doc:
        raise WorkloadError("workload document must be an object with a 'steps' list")
    edges = []
    for e in doc.get("edges", []):
        if isinstance(e, dict):
            edges.append((e["from"], e["to"]))
        elif isinstance(e, (list, tuple)) and len(e) == 2:
            edges.append((e[0], e[1]))
        else:
            raise WorkloadError(f"malformed edge {e!r}")
    return Workload(
        name=doc.get("name", "custom"),
        steps=tuple(step_from_dict(s) for s in doc["steps"]),
        edges=tuple(edges),
        deadline_orbits=float(doc.get("deadline_orbits", 8.0)),
        sink=doc.get("sink", ONBOARD),
        description=doc.get("description", ""),
    )


def workload_to_dict(w: Workload) -> dict:
    return {
        "name": w.name,
        "description": w.description,
        "deadline_orbits": w.deadline_orbits,
        "sink": w.sink,
        "steps": [asdict(s) for s in w.steps],
        "edges": [list(e) for e in w.edges],
    }


def load_workload_file(path: str | Path) -> Workload:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise WorkloadError(f"workload file is not valid JSON: {exc}") from None
    return workload_from_dict(doc)

