"""Low-precision solar ephemeris and cylindrical-shadow eclipse windows."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from orbitplan import _accel
from orbitplan.orbitcore import EARTH_RADIUS_KM, JD_J2000, julian_date, to_unix

AU_KM = 149_597_870.7

ECLIPSE = "eclipse"
SUNLIT = "sunlit"


@dataclass(frozen=True)
class SunState:
    t: float
    r_sun_eci: np.ndarray
    ecliptic_longitude: float  # degrees
    obliquity: float  # degrees
    distance: float  # AU
    mean_anomaly: float  # degrees
    mean_longitude: float  # degrees


@dataclass(frozen=True)
class IlluminationWindow:
    start: float
    end: float
    kind: str

    @property
    def duration(self) -> float:
        return self.end - self.start


def _sun_terms(jd):
    """Mean anomaly, mean longitude, ecliptic longitude, obliquity (deg) and distance (AU)."""
    cent = (np.asarray(jd, dtype=float) - JD_J2000) / 36525.0
    mean_anom = np.mod(357.5291 + 35999.0503 * cent, 360.0)
    mean_lon = np.mod(280.4664 + 36000.7698 * cent, 360.0)
    m_rad = np.radians(mean_anom)
    ecl_lon = np.mod(mean_lon + 1.9146 * np.sin(m_rad) + 0.02 * np.sin(2.0 * m_rad), 360.0)
    obliq = 23.4393 - 0.0130 * cent
    dist = 1.00014 - 0.01671 * np.cos(m_rad) - 0.00014 * np.cos(2.0 * m_rad)
    return mean_anom, mean_lon, ecl_lon, obliq, dist


def _sun_vectors(ecl_lon, obliq, dist):
    lam = np.radians(ecl_lon)
    eps = np.radians(obliq)
    r_km = np.asarray(dist) * AU_KM
    return np.stack([r_km * np.cos(lam), r_km * np.sin(lam) * np.cos(eps), r_km * np.sin(lam) * np.sin(eps)], axis=-1)


def sun_position(t) -> SunState:
    t = to_unix(t)
    m, lon, lam, eps, dist = (float(x) for x in _sun_terms(julian_date(t)))
    return SunState(
        t=t,
        r_sun_eci=_sun_vectors(lam, eps, dist),
        ecliptic_longitude=lam,
        obliquity=eps,
        distance=dist,
        mean_anomaly=m,
        mean_longitude=lon,
    )


def sun_positions(t_unix: np.ndarray) -> np.ndarray:
    """(N, 3) solar ECI positions in km for an array of POSIX times."""
    jd = np.asarray(t_unix, dtype=float) / 86400.0 + 2440587.5
    _, _, lam, eps, dist = _sun_terms(jd)
    return _sun_vectors(lam, eps, dist)


def is_eclipsed(r_sat, r_sun) -> bool:
    r_sat = np.asarray(r_sat, dtype=float)
    s_hat = np.asarray(r_sun, dtype=float) / np.linalg.norm(r_sun)
    d = float(r_sat @ s_hat)
    return d < 0.0 and float(np.linalg.norm(r_sat - d * s_hat)) < EARTH_RADIUS_KM


def eclipse_mask(traj) -> np.ndarray:
    r_sun = sun_positions(traj.t)
    return _accel.kernels.eclipse_mask(np.ascontiguousarray(traj.r_eci), r_sun, EARTH_RADIUS_KM)


def windows_from_mask(t: np.ndarray, mask: np.ndarray) -> list[IlluminationWindow]:
    """Merge per-sample states into alternating windows.

    Sample ``k`` stands for the interval ``[t[k], t[k+1])``; the final
    sample only closes the horizon. A single-sample input yields nothing.
    """
    t = np.asarray(t, dtype=float)
    mask = np.asarray(mask, dtype=bool)
    if len(t) < 2:
        return []
    states = mask[:-1]
    cuts = np.flatnonzero(states[1:] != states[:-1]) + 1
    starts = np.concatenate(([0], cuts))
    ends = np.concatenate((cuts, [len(t) - 1]))
    return [
        IlluminationWindow(float(t[s]), float(t[e]), ECLIPSE if states[s] else SUNLIT)
        for s, e in zip(starts, ends)
    ]


def eclipse_windows(traj) -> list[IlluminationWindow]:
    if len(traj.t) == 0:
        raise ValueError("trajectory is empty")
    return windows_from_mask(traj.t, eclipse_mask(traj))


def eclipse_fraction_per_orbit(traj, mask: np.ndarray | None = None) -> list[float]:
    """Fraction of eclipsed samples in each complete orbital period of ``traj``."""
    if mask is None:
        mask = eclipse_mask(traj)
    per_orbit = traj.orbital_period / traj.step
    n_orbits = int(math.floor((len(traj.t) - 1) / per_orbit))
    out = []
    for k in range(n_orbits):
        lo = int(round(k * per_orbit))
        hi = int(round((k + 1) * per_orbit))
        out.append(float(np.mean(mask[lo:hi])))
    return out
