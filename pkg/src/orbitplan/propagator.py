"""Trajectory generation from TLE mean elements.

The built-in propagator is a two-body Kepler solution with J2 secular drift
of RAAN, argument of perigee and mean anomaly. Drag and short-period terms
are omitted. Anything implementing :class:`Propagator` (for instance a full
SGP4 wrapper) can be passed to :func:`propagate_trajectory` instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from orbitplan import _accel
from orbitplan.errors import DecayedOrbitError, KeplerConvergenceError, PropagationRangeError
from orbitplan.orbitcore import (
    EARTH_RADIUS_KM,
    J2,
    MU_EARTH,
    SECONDS_PER_DAY,
    StateVector,
    Tle,
    ecf_to_geodetic_array,
    gmst_array,
    to_unix,
)

MAX_EPOCH_OFFSET_S = 7 * SECONDS_PER_DAY
MIN_RADIUS_KM = 6378.0 + 100.0
MAX_SAMPLES = 10080


@dataclass(frozen=True)
class PropagationConfig:
    start: float
    horizon: float = 43200.0
    step: float = 30.0

    def __post_init__(self):
        object.__setattr__(self, "start", to_unix(self.start))
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.horizon < self.step:
            raise ValueError("horizon must be at least one step")
        if self.horizon / self.step > MAX_SAMPLES:
            raise ValueError(f"horizon/step exceeds {MAX_SAMPLES} samples")

    @property
    def count(self) -> int:
        return int(round(self.horizon / self.step)) + 1


@dataclass(frozen=True)
class MeanElements:
    """Secular element set derived from a TLE (radians, km, seconds)."""

    epoch: float
    a: float
    e: float
    inc: float
    raan: float
    argp: float
    m0: float
    n: float
    raan_dot: float
    argp_dot: float
    m_dot: float

    @classmethod
    def from_tle(cls, tle: Tle) -> MeanElements:
        n = tle.mean_motion * 2.0 * math.pi / SECONDS_PER_DAY
        a = (MU_EARTH / (n * n)) ** (1.0 / 3.0)
        e = tle.eccentricity
        inc = math.radians(tle.inclination)
        p = a * (1.0 - e * e)
        k = 0.75 * n * J2 * (EARTH_RADIUS_KM / p) ** 2
        ci = math.cos(inc)
        return cls(
            epoch=tle.epoch,
            a=a,
            e=e,
            inc=inc,
            raan=math.radians(tle.raan),
            argp=math.radians(tle.arg_perigee),
            m0=math.radians(tle.mean_anomaly),
            n=n,
            raan_dot=-2.0 * k * ci,
            argp_dot=k * (5.0 * ci * ci - 1.0),
            m_dot=n + k * math.sqrt(1.0 - e * e) * (3.0 * ci * ci - 1.0),
        )


class Propagator(Protocol):
    def states(self, tle: Tle, times: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """ECI position (km) and velocity (km/s) arrays of shape (N, 3)."""


class KeplerJ2Propagator:
    def states(self, tle: Tle, times: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        times = np.asarray(times, dtype=float)
        if np.any(np.abs(times - tle.epoch) > MAX_EPOCH_OFFSET_S):
            raise PropagationRangeError("requested time is more than 7 days from the TLE epoch")
        el = MeanElements.from_tle(tle)
        r, v, ok = _accel.kernels.kepler_states(
            times - el.epoch, el.a, el.e, el.inc, el.raan, el.argp, el.m0, el.n, el.raan_dot, el.argp_dot, el.m_dot
        )
        if not ok:
            raise KeplerConvergenceError("Kepler's equation did not converge in 50 iterations")
        if np.any(np.linalg.norm(r, axis=1) < MIN_RADIUS_KM):
            raise DecayedOrbitError(f"orbit radius below {MIN_RADIUS_KM} km")
        return r, v


DEFAULT_PROPAGATOR = KeplerJ2Propagator()


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Uniformly sampled states; arrays are row-aligned with ``t``."""

    t: np.ndarray
    r_eci: np.ndarray
    v_eci: np.ndarray
    r_ecf: np.ndarray
    geodetic: np.ndarray
    orbital_period: float
    step: float = 30.0

    def __len__(self) -> int:
        return len(self.t)

    @property
    def start(self) -> float:
        return float(self.t[0])

    @property
    def end(self) -> float:
        return float(self.t[-1])

    def sample(self, k: int) -> StateVector:
        return StateVector(
            t=float(self.t[k]),
            r_eci=self.r_eci[k],
            v_eci=self.v_eci[k],
            r_ecf=self.r_ecf[k],
            geodetic=tuple(float(x) for x in self.geodetic[k]),
        )

    @property
    def samples(self) -> list[StateVector]:
        return [self.sample(k) for k in range(len(self.t))]


def _assemble(times: np.ndarray, r: np.ndarray, v: np.ndarray, period: float, step: float) -> Trajectory:
    r_ecf = _accel.kernels.rotate_z(np.ascontiguousarray(r), gmst_array(times))
    return Trajectory(
        t=times,
        r_eci=r,
        v_eci=v,
        r_ecf=r_ecf,
        geodetic=ecf_to_geodetic_array(r_ecf),
        orbital_period=period,
        step=step,
    )


def propagate(tle: Tle, t, propagator: Propagator = DEFAULT_PROPAGATOR) -> StateVector:
    times = np.array([to_unix(t)])
    r, v = propagator.states(tle, times)
    return _assemble(times, r, v, tle.period, 0.0).sample(0)


def propagate_trajectory(
    tle: Tle, cfg: PropagationConfig, propagator: Propagator = DEFAULT_PROPAGATOR
) -> Trajectory:
    times = np.round(cfg.start + cfg.step * np.arange(cfg.count, dtype=float), 3)
    r, v = propagator.states(tle, times)
    return _assemble(times, r, v, tle.period, cfg.step)
