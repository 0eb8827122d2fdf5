"""On-board vs. ground placement for steps whose location is ``either``.

A step that shrinks its data more than 10:1 stays on-board outright. Other
flexible steps compare an on-board cost (energy, thermal load relative to
the bus limit, window occupancy) with a ground cost (time and volume needed
to ship its input down and its output back up).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from orbitplan.workload import EITHER, GROUND, ONBOARD, ProcessingStep, Workload, topo_sort

FIXED = "fixed"
REDUCTION_HEURISTIC = "reduction_heuristic"
COST_COMPARE = "cost_compare"


def _default_enc():
    return {"aes256": 0.05, "aes128": 0.03, "none": 0.0}


@dataclass(frozen=True)
class PlacementConfig:
    reduction_threshold: float = 0.1
    energy_weight: float = 1.0
    thermal_penalty_scale: float = 500.0
    time_occupancy_weight: float = 0.5  # per second
    transfer_time_weight: float = 10.0
    transfer_volume_weight: float = 2.0  # per MB
    assumed_mean_rate: float = 80.0  # Mbps
    default_fec_rate: float = 0.75
    enc_overhead: dict = field(default_factory=_default_enc)

    def __post_init__(self):
        for name in (
            "reduction_threshold", "energy_weight", "thermal_penalty_scale", "time_occupancy_weight",
            "transfer_time_weight", "transfer_volume_weight", "assumed_mean_rate", "default_fec_rate",
        ):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.enc_overhead.get("none", 0.0) != 0.0:
            raise ValueError("unencrypted overhead must be zero")

    def scaled(self, factor: float) -> PlacementConfig:
        """Copy with every cost weight multiplied by ``factor``."""
        return replace(
            self,
            energy_weight=self.energy_weight * factor,
            thermal_penalty_scale=self.thermal_penalty_scale * factor,
            time_occupancy_weight=self.time_occupancy_weight * factor,
            transfer_time_weight=self.transfer_time_weight * factor,
            transfer_volume_weight=self.transfer_volume_weight * factor,
        )


@dataclass(frozen=True)
class PlacementDecision:
    step_id: str
    location: str
    reason: str
    cost_onboard: float | None = None
    cost_ground: float | None = None

    def to_dict(self) -> dict:
        return {
            "step_id": self.step_id,
            "location": self.location,
            "reason": self.reason,
            "cost_onboard": self.cost_onboard,
            "cost_ground": self.cost_ground,
        }


def cost_onboard(step: ProcessingStep, thermal_limit: float, cfg: PlacementConfig = PlacementConfig()) -> float:
    if thermal_limit <= 0:
        raise ValueError("thermal limit must be positive")
    return (
        cfg.energy_weight * step.power * step.duration
        + step.thermal / thermal_limit * cfg.thermal_penalty_scale
        + step.duration * cfg.time_occupancy_weight
    )


def ground_volumes(step: ProcessingStep, cfg: PlacementConfig = PlacementConfig()) -> tuple[float, float]:
    """Channel volume (MB) to downlink the step's input and uplink its output."""
    factor = (1.0 + cfg.enc_overhead.get(step.encryption, 0.0)) / cfg.default_fec_rate
    return step.data_in * factor, step.data_out * factor


def cost_ground(step: ProcessingStep, cfg: PlacementConfig = PlacementConfig()) -> float:
    down, up = ground_volumes(step, cfg)
    volume = down + up
    return volume / (cfg.assumed_mean_rate / 8.0) * cfg.transfer_time_weight + volume * cfg.transfer_volume_weight


def decide(step: ProcessingStep, thermal_limit: float, cfg: PlacementConfig = PlacementConfig()) -> PlacementDecision:
    if step.location != EITHER:
        return PlacementDecision(step.id, step.location, FIXED)
    on = cost_onboard(step, thermal_limit, cfg)
    gr = cost_ground(step, cfg)
    if step.data_in > 0 and step.data_out / step.data_in < cfg.reduction_threshold:
        return PlacementDecision(step.id, ONBOARD, REDUCTION_HEURISTIC, on, gr)
    return PlacementDecision(step.id, ONBOARD if on <= gr else GROUND, COST_COMPARE, on, gr)


def place(w: Workload, thermal_limit: float, cfg: PlacementConfig = PlacementConfig()) -> list[PlacementDecision]:
    steps = w.step_map()
    return [decide(steps[sid], thermal_limit, cfg) for sid in topo_sort(w)]


def location_map(decisions) -> dict[str, str]:
    return {d.step_id: d.location for d in decisions}
