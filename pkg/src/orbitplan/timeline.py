"""Merge illumination windows and ground passes into the orbital-window timeline."""

from __future__ import annotations

from dataclasses import dataclass

from orbitplan.errors import TimelineIntegrityError
from orbitplan.orbitcore import isoformat
from orbitplan.skymodel import ECLIPSE

ORBIT_SUNLIT = "orbit_sunlit"
ORBIT_ECLIPSE = "orbit_eclipse"
PASS = "pass"


@dataclass(frozen=True)
class EnvelopeConfig:
    sunlit_power: float = 80.0
    eclipse_power: float = 25.0
    sunlit_compute: float = 1.0
    eclipse_compute: float = 0.6
    thermal_limit: float = 40.0
    min_orbit_window: float = 30.0
    min_pass_window: float = 10.0

    def __post_init__(self):
        if not self.eclipse_power < self.sunlit_power:
            raise ValueError("eclipse_power must be below sunlit_power")
        for name in ("sunlit_compute", "eclipse_compute"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.thermal_limit <= 0:
            raise ValueError("thermal_limit must be positive")


@dataclass(frozen=True)
class OrbitalWindow:
    id: int
    t_start: float
    t_end: float
    power: float
    thermal_limit: float
    compute: float
    comms_rate: float = 0.0
    station: str | None = None
    kind: str = ORBIT_SUNLIT
    pass_ref: str | None = None

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "t_start": isoformat(self.t_start),
            "t_end": isoformat(self.t_end),
            "duration_s": self.duration,
            "power_w": self.power,
            "thermal_limit_w": self.thermal_limit,
            "compute": self.compute,
            "comms_rate_mbps": self.comms_rate,
            "station": self.station,
            "kind": self.kind,
            "pass_ref": self.pass_ref,
        }


def _check_tiling(illum) -> None:
    for w in illum:
        if not w.end > w.start:
            raise TimelineIntegrityError(f"illumination window at {w.start} has non-positive duration")
    for a, b in zip(illum, illum[1:]):
        if b.start > a.end:
            raise TimelineIntegrityError(f"gap in illumination coverage between {a.end} and {b.start}")
        if b.start < a.end:
            raise TimelineIntegrityError(f"illumination windows overlap at {b.start}")


def resolve_pass_conflicts(passes, t_lo: float, t_hi: float) -> list[tuple[float, float, object]]:
    """Clip passes to the horizon and drop simultaneous visibility.

    Earlier AOS wins; a later overlapping pass keeps only the part after the
    current contact ends. Returns ``(start, end, pass)`` triples in time order.
    """
    usable = [p for p in passes if p.los > p.aos and (p.mean_data_rate or 0.0) > 0.0]
    usable.sort(key=lambda p: (p.aos, p.station_id, p.id))
    out = []
    cursor = t_lo
    for p in usable:
        start = max(p.aos, cursor)
        end = min(p.los, t_hi)
        if end > start:
            out.append((start, end, p))
            cursor = end
    return out


def build_timeline(illum, passes, cfg: EnvelopeConfig = EnvelopeConfig()) -> list[OrbitalWindow]:
    illum = sorted(illum, key=lambda w: w.start)
    if not illum:
        return []
    _check_tiling(illum)
    contacts = resolve_pass_conflicts(passes, illum[0].start, illum[-1].end)

    windows: list[OrbitalWindow] = []

    def emit(t0, t1, seg_kind, p=None):
        dark = seg_kind == ECLIPSE
        windows.append(
            OrbitalWindow(
                id=len(windows),
                t_start=t0,
                t_end=t1,
                power=cfg.eclipse_power if dark else cfg.sunlit_power,
                thermal_limit=cfg.thermal_limit,
                compute=cfg.eclipse_compute if dark else cfg.sunlit_compute,
                comms_rate=p.mean_data_rate if p is not None else 0.0,
                station=p.station_id if p is not None else None,
                kind=PASS if p is not None else (ORBIT_ECLIPSE if dark else ORBIT_SUNLIT),
                pass_ref=p.id if p is not None else None,
            )
        )

    def emit_orbit(t0, t1, seg_kind):
        if t1 - t0 >= cfg.min_orbit_window:
            emit(t0, t1, seg_kind)

    for seg in illum:
        cursor = seg.start
        for start, end, p in contacts:
            lo, hi = max(start, seg.start), min(end, seg.end)
            if hi - lo < cfg.min_pass_window:
                continue
            emit_orbit(cursor, lo, seg.kind)
            emit(lo, hi, seg.kind, p)
            cursor = hi
        emit_orbit(cursor, seg.end, seg.kind)
    return windows


def timeline_to_json(windows) -> list[dict]:
    return [w.to_dict() for w in windows]
