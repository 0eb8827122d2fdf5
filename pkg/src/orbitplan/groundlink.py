"""Ground-station catalog, pass prediction and per-pass link budgets."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from orbitplan.orbitcore import GeodeticPoint, look_angles_array

RATE_BREAKPOINTS_DEG = np.array([5.0, 10.0, 20.0, 40.0, 60.0])
RATE_TIERS_MBPS = np.array([0.0, 25.0, 50.0, 80.0, 100.0, 120.0])

BER_GOOD = 1e-8
BER_FAIR = 1e-6
BER_POOR = 1e-5


@dataclass(frozen=True)
class GroundStation:
    id: str
    lat: float
    lon: float
    alt: float = 0.0
    provider: str = ""
    bands: tuple[str, ...] = ("S", "X")
    min_elevation: float = 5.0
    name: str = ""

    def __post_init__(self):
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"station {self.id}: latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"station {self.id}: longitude {self.lon} outside [-180, 180]")
        if self.min_elevation < 0.0:
            raise ValueError(f"station {self.id}: negative minimum elevation")
        unknown = set(self.bands) - {"S", "X", "Ka"}
        if unknown:
            raise ValueError(f"station {self.id}: unknown bands {sorted(unknown)}")
        object.__setattr__(self, "bands", tuple(self.bands))

    @property
    def location(self) -> GeodeticPoint:
        return GeodeticPoint(self.lat, self.lon, self.alt)

    @classmethod
    def from_dict(cls, doc: dict) -> GroundStation:
        allowed = {f for f in cls.__dataclass_fields__}
        extra = set(doc) - allowed
        if extra:
            raise ValueError(f"unknown station fields: {sorted(extra)}")
        return cls(**doc)


def load_stations(path: str | Path | None = None) -> list[GroundStation]:
    """Read a station catalog document; the built-in 12-station network by default."""
    if path is None:
        text = resources.files("orbitplan.data").joinpath("stations.json").read_text()
    else:
        text = Path(path).read_text()
    return stations_from_json(json.loads(text))


def stations_from_json(doc) -> list[GroundStation]:
    if isinstance(doc, dict):
        doc = doc.get("stations", [])
    return [GroundStation.from_dict(item) for item in doc]


DEFAULT_STATIONS = tuple(load_stations())


@dataclass(frozen=True)
class LinkParams:
    frequency: float = 8.2  # GHz
    tx_power: float = 10.0  # dBW
    tx_gain: float = 6.0  # dBi
    rx_gain: float = 34.0  # dBi
    impl_loss: float = 2.0
    atm_loss: float = 0.5
    rain_margin: float = 3.0
    # added to the raw margin before the 140/135 dB BER thresholds; stands in
    # for receiver G/T and noise-floor terms the margin sum leaves out
    margin_reference_offset: float = 260.0

    def __post_init__(self):
        if self.frequency <= 0:
            raise ValueError("frequency must be positive")
        if min(self.impl_loss, self.atm_loss, self.rain_margin) < 0:
            raise ValueError("losses must be non-negative")


def fspl(d, f):
    """Free-space path loss in dB for slant range ``d`` (km) and frequency ``f`` (GHz)."""
    return 20.0 * np.log10(d) + 20.0 * np.log10(f) + 92.45


def link_margin(params: LinkParams, d):
    return (
        params.tx_power
        + params.tx_gain
        + params.rx_gain
        - fspl(d, params.frequency)
        - params.impl_loss
        - params.atm_loss
        - params.rain_margin
    )


def data_rate(elevation):
    """Achievable X-band rate (Mbps) for an elevation angle in degrees."""
    idx = np.searchsorted(RATE_BREAKPOINTS_DEG, elevation, side="right")
    out = RATE_TIERS_MBPS[idx]
    return float(out) if np.ndim(out) == 0 else out


def ber_from_margin(m: float, params: LinkParams = LinkParams()) -> float:
    effective = m + params.margin_reference_offset
    if effective > 140.0:
        return BER_GOOD
    if effective > 135.0:
        return BER_FAIR
    return BER_POOR


@dataclass(frozen=True)
class PassSample:
    t: float
    elevation: float
    azimuth: float
    slant_range: float


@dataclass(frozen=True)
class PassPrediction:
    id: str
    station_id: str
    aos: float
    los: float
    peak_elevation: float
    samples: tuple[PassSample, ...] = field(repr=False)
    mean_data_rate: float | None = None  # Mbps
    worst_margin: float | None = None  # dB
    ber: float | None = None
    capacity: float | None = None  # MB

    @property
    def duration(self) -> float:
        return self.los - self.aos

    @property
    def annotated(self) -> bool:
        return self.capacity is not None


def detect_passes_from_profile(
    station: GroundStation, t: np.ndarray, el: np.ndarray, az: np.ndarray, rng: np.ndarray
) -> list[PassPrediction]:
    """Split a sampled elevation profile into maximal above-threshold runs."""
    above = np.asarray(el) >= station.min_elevation
    if not above.any():
        return []
    edges = np.diff(above.astype(np.int8))
    starts = list(np.flatnonzero(edges == 1) + 1)
    ends = list(np.flatnonzero(edges == -1))
    if above[0]:
        starts.insert(0, 0)
    if above[-1]:
        ends.append(len(above) - 1)
    passes = []
    for k, (s, e) in enumerate(zip(starts, ends)):
        samples = tuple(
            PassSample(float(t[i]), float(el[i]), float(az[i]), float(rng[i])) for i in range(s, e + 1)
        )
        passes.append(
            PassPrediction(
                id=f"{station.id}#{k}",
                station_id=station.id,
                aos=float(t[s]),
                los=float(t[e]),
                peak_elevation=float(np.max(el[s : e + 1])),
                samples=samples,
            )
        )
    return passes


def detect_passes(traj, station: GroundStation) -> list[PassPrediction]:
    if len(traj.t) == 0:
        raise ValueError("trajectory is empty")
    el, az, rng = look_angles_array(station.location, traj.r_ecf)
    return detect_passes_from_profile(station, traj.t, el, az, rng)


def annotate_link_budget(p: PassPrediction, params: LinkParams = LinkParams()) -> PassPrediction:
    if not p.samples:
        raise ValueError("pass has no samples")
    elev = np.array([s.elevation for s in p.samples])
    rng = np.array([s.slant_range for s in p.samples])
    mean_rate = float(np.mean(data_rate(elev)))
    worst = float(np.min(link_margin(params, rng)))
    return replace(
        p,
        mean_data_rate=mean_rate,
        worst_margin=worst,
        ber=ber_from_margin(worst, params),
        capacity=pass_capacity(mean_rate, p.duration),
    )


def pass_capacity(mean_rate_mbps: float, duration_s: float) -> float:
    """Deliverable volume in MB at a mean rate over a contact duration."""
    return mean_rate_mbps * duration_s / 8.0


def predict_passes(
    traj, stations=DEFAULT_STATIONS, params: LinkParams = LinkParams()
) -> list[PassPrediction]:
    """Annotated passes over every station, sorted by (AOS, station id)."""
    out = []
    for station in stations:
        out.extend(annotate_link_budget(p, params) for p in detect_passes(traj, station))
    out.sort(key=lambda p: (p.aos, p.station_id))
    return out


def worst_ber(passes) -> float | None:
    bers = [p.ber for p in passes if p.ber is not None]
    return max(bers) if bers else None

