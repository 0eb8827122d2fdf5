"""Transfer insertion at space-ground boundaries and multi-pass allocation.

Channel volume for a transfer of ``raw`` MB::

    parity = raw * (1 / fec_rate - 1)
    total  = (raw + parity) * (1 + enc + integrity + framing)
    planned = total * (1 + reserve)

``planned`` is what gets allocated against pass capacity; the reserve is
head-room for retransmissions and is kept out of ``total``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from orbitplan.errors import NoCapacityError
from orbitplan.groundlink import worst_ber
from orbitplan.workload import DOWNLINK, GROUND, ONBOARD, UPLINK, ProcessingStep, Workload

FRAMING_OVERHEAD = 0.02
ENCRYPTION_OVERHEAD = {"aes256": 0.05, "aes128": 0.03, "none": 0.0}
INTEGRITY_OVERHEAD = {"sha256": 0.008, "crc32": 0.001, "none": 0.0}
CAPACITY_FACTOR = {DOWNLINK: 0.9, UPLINK: 0.5}

TRANSFER_POWER_W = 40.0
TRANSFER_COMPUTE = 0.1
TRANSFER_THERMAL_W = 15.0
TRANSFER_MEMORY_MB = 128.0
TRANSFER_MAX_RETRIES = 3
MIN_TRANSFER_DURATION_S = 5.0


def select_fec(ber: float) -> float:
    """FEC code rate for a channel bit error rate."""
    if ber > 1e-5:
        return 0.5
    if ber > 1e-7:
        return 0.75
    return 0.875


def retransmission_reserve(ber: float) -> float:
    if ber > 1e-5:
        return 0.20
    if ber > 1e-7:
        return 0.05
    return 0.01


def security_overheads(step: ProcessingStep) -> tuple[float, float, float]:
    """(encryption, integrity, framing) expansion fractions for data produced by ``step``."""
    return ENCRYPTION_OVERHEAD[step.encryption], INTEGRITY_OVERHEAD[step.integrity], FRAMING_OVERHEAD


def parity_volume(raw: float, fec_rate: float) -> float:
    return raw * (1.0 / fec_rate - 1.0)


def total_volume(raw: float, fec_rate: float, overheads) -> float:
    if raw < 0:
        raise ValueError("raw volume must be non-negative")
    return (raw + parity_volume(raw, fec_rate)) * (1.0 + sum(overheads))


def allocate_passes(volume: float, passes, direction: str):
    """Greedy chronological fill of ``volume`` MB into pass capacity.

    Each pass offers its capacity times 0.9 (downlink) or 0.5 (uplink).
    Returns ``(allocations, shortfall)`` with allocations as
    ``[(pass_id, MB), ...]``.
    """
    kappa = CAPACITY_FACTOR[direction]
    remaining = volume
    allocations = []
    for p in passes:
        if remaining <= 0:
            break
        effective = p.capacity * kappa
        if effective <= 0:
            continue
        xfer = min(remaining, effective)
        allocations.append((p.id, xfer))
        remaining -= xfer
    return allocations, max(remaining, 0.0)


@dataclass(frozen=True)
class TransferSpec:
    id: str
    direction: str
    producer: str
    consumer: str | None
    raw: float
    fec_rate: float
    parity: float
    enc_overhead: float
    integrity_overhead: float
    framing_overhead: float
    total: float
    reserve_fraction: float
    worst_ber: float
    channel_ready: bool
    allocations: tuple[tuple[str, float], ...] = ()
    shortfall: float = 0.0
    step: ProcessingStep | None = field(default=None, repr=False)

    @property
    def planned(self) -> float:
        return self.total * (1.0 + self.reserve_fraction)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "direction": self.direction,
            "producer": self.producer,
            "consumer": self.consumer,
            "raw_mb": self.raw,
            "fec_rate": self.fec_rate,
            "parity_mb": self.parity,
            "enc_overhead": self.enc_overhead,
            "integrity_overhead": self.integrity_overhead,
            "framing_overhead": self.framing_overhead,
            "total_mb": self.total,
            "reserve_fraction": self.reserve_fraction,
            "planned_mb": self.planned,
            "worst_ber": self.worst_ber,
            "channel_ready": self.channel_ready,
            "allocations": [{"pass_id": pid, "mb": mb} for pid, mb in self.allocations],
            "shortfall_mb": self.shortfall,
            "duration_s": self.step.duration if self.step else None,
        }


def size_transfer(
    transfer_id: str,
    producer: ProcessingStep,
    consumer: str | None,
    direction: str,
    ber: float,
    passes,
    assumed_mean_rate: float = 80.0,
) -> TransferSpec:
    raw = producer.data_out
    reserve = retransmission_reserve(ber)
    if producer.channel_ready:
        fec, enc, integ, frame = 1.0, 0.0, 0.0, 0.0
    else:
        fec = select_fec(ber)
        enc, integ, frame = security_overheads(producer)
    total = total_volume(raw, fec, (enc, integ, frame))
    planned = total * (1.0 + reserve)
    allocations, shortfall = allocate_passes(planned, passes, direction)
    step = ProcessingStep(
        id=transfer_id,
        duration=max(MIN_TRANSFER_DURATION_S, planned / (assumed_mean_rate / 8.0)),
        power=TRANSFER_POWER_W,
        compute=TRANSFER_COMPUTE,
        thermal=TRANSFER_THERMAL_W,
        memory=TRANSFER_MEMORY_MB,
        data_in=raw,
        data_out=raw,
        location=ONBOARD,
        needs_comms=True,
        retry_policy="retry_next_window",
        max_retries=TRANSFER_MAX_RETRIES,
        transfer_direction=direction,
        description=f"{direction} of {producer.id} output",
    )
    return TransferSpec(
        id=transfer_id,
        direction=direction,
        producer=producer.id,
        consumer=consumer,
        raw=raw,
        fec_rate=fec,
        parity=parity_volume(raw, fec),
        enc_overhead=enc,
        integrity_overhead=integ,
        framing_overhead=frame,
        total=total,
        reserve_fraction=reserve,
        worst_ber=ber,
        channel_ready=producer.channel_ready,
        allocations=tuple(allocations),
        shortfall=shortfall,
        step=step,
    )


def boundary_crossings(w: Workload, locations: dict[str, str]) -> list[tuple[str, str | None]]:
    """Edges whose endpoints sit on opposite sides, plus on-board exits of a ground-sink workload."""
    crossings = [(u, v) for u, v in sorted(set(w.edges)) if locations[u] != locations[v]]
    if w.sink == GROUND:
        succ = w.successors()
        crossings += [(s.id, None) for s in sorted(w.steps, key=lambda s: s.id)
                      if not succ[s.id] and locations[s.id] == ONBOARD]
    return crossings


def insert_transfers(
    w: Workload,
    decisions,
    passes,
    assumed_mean_rate: float = 80.0,
) -> tuple[Workload, list[TransferSpec]]:
    """Insert one transfer step per boundary crossing and rewire the DAG through it."""
    locations = {d.step_id: d.location for d in decisions}
    missing = {s.id for s in w.steps} - set(locations)
    if missing:
        raise ValueError(f"no placement decision for steps {sorted(missing)}")
    crossings = boundary_crossings(w, locations)
    if not crossings:
        return w, []
    passes = sorted(passes, key=lambda p: (p.aos, p.station_id, p.id))
    ber = worst_ber(passes)
    if not passes or ber is None:
        raise NoCapacityError("data must cross the space-ground boundary but no ground passes are available")

    steps = w.step_map()
    taken = set(steps)
    transfers = []
    edges = set(w.edges)
    for u, v in crossings:
        direction = DOWNLINK if locations[u] == ONBOARD else UPLINK
        tid = f"xfer-{u}-{v if v is not None else 'ground'}"
        while tid in taken:
            tid += "_"
        taken.add(tid)
        spec = size_transfer(tid, steps[u], v, direction, ber, passes, assumed_mean_rate)
        transfers.append(spec)
        if v is not None:
            edges.discard((u, v))
            edges.add((tid, v))
        edges.add((u, tid))

    rewired = Workload(
        name=w.name,
        steps=w.steps + tuple(t.step for t in transfers),
        edges=tuple(sorted(edges)),
        deadline_orbits=w.deadline_orbits,
        sink=w.sink,
        description=w.description,
    )
    return rewired, transfers
