"""Time systems, reference frames, TLE handling and topocentric geometry.

Absolute times are UTC POSIX seconds (``float``) rounded to milliseconds;
leap seconds are ignored. ECI here means the TLE's TEME-like frame, which is
treated as identical to J2000 for planning purposes. Earth rotation uses the
IAU-1982 GMST polynomial::

    GMST[s] = 67310.54841 + (876600 h + 8640184.812866) T
              + 0.093104 T^2 - 6.2e-6 T^3,    T = (JD - 2451545) / 36525

Earth shape is WGS-84 throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

import numpy as np

from orbitplan import _accel
from orbitplan._accel import WGS84_A, WGS84_E2, WGS84_F  # noqa: F401  (re-exported)
from orbitplan.errors import (
    GeodeticConvergenceError,
    TleCatalogMismatchError,
    TleChecksumError,
    TleFieldError,
    TleLengthError,
)

EARTH_RADIUS_KM = WGS84_A
MU_EARTH = 398600.4418  # km^3/s^2
J2 = 1.08262668e-3
JD_UNIX_EPOCH = 2440587.5
JD_J2000 = 2451545.0
SECONDS_PER_DAY = 86400.0
SIDEREAL_DAY_S = 86164.0905
TWO_PI = 2.0 * math.pi

# ---------------------------------------------------------------------------
# time
# ---------------------------------------------------------------------------


def to_unix(t) -> float:
    """Coerce a datetime, ISO-8601 string or POSIX seconds to ms-rounded POSIX seconds."""
    if isinstance(t, str):
        text = t.strip()
        if text.endswith("Z"):
            text = text[:-1] + "+00:00"
        t = datetime.fromisoformat(text)
    if isinstance(t, datetime):
        if t.tzinfo is None:
            t = t.replace(tzinfo=timezone.utc)
        t = t.timestamp()
    return round(float(t), 3)


def to_datetime(t: float) -> datetime:
    return datetime(1970, 1, 1, tzinfo=timezone.utc) + timedelta(milliseconds=round(t * 1000.0))


def isoformat(t: float) -> str:
    """ISO-8601 UTC text with millisecond precision, e.g. ``2024-03-20T00:00:00.000Z``."""
    return to_datetime(t).strftime("%Y-%m-%dT%H:%M:%S.%f")[:-3] + "Z"


def julian_date(t) -> float:
    """Astronomical Julian date of an absolute time."""
    return to_unix(t) / SECONDS_PER_DAY + JD_UNIX_EPOCH


def _julian_date_array(t_unix: np.ndarray) -> np.ndarray:
    return np.asarray(t_unix, dtype=float) / SECONDS_PER_DAY + JD_UNIX_EPOCH


def julian_centuries(t) -> float:
    return (julian_date(t) - JD_J2000) / 36525.0


def _gmst_from_jd(jd):
    tu = (jd - JD_J2000) / 36525.0
    seconds = 67310.54841 + (876600.0 * 3600.0 + 8640184.812866) * tu + (0.093104 - 6.2e-6 * tu) * tu * tu
    return np.mod(np.deg2rad(np.mod(seconds, SECONDS_PER_DAY) / 240.0), TWO_PI)


def gmst(t) -> float:
    """Greenwich mean sidereal time in radians, in ``[0, 2*pi)``."""
    return float(_gmst_from_jd(julian_date(t)))


def gmst_array(t_unix: np.ndarray) -> np.ndarray:
    return _gmst_from_jd(_julian_date_array(t_unix))


# ---------------------------------------------------------------------------
# frames
# ---------------------------------------------------------------------------


def rotate_z(r, theta: float) -> np.ndarray:
    """Rotate vector(s) into a frame turned by ``theta`` about +Z."""
    arr = np.atleast_2d(np.asarray(r, dtype=float))
    out = _accel.kernels.rotate_z(arr, np.full(arr.shape[0], float(theta)))
    return out[0] if np.ndim(r) == 1 else out


def eci_to_ecf(r_eci, t) -> np.ndarray:
    return rotate_z(r_eci, gmst(t))


@dataclass(frozen=True)
class GeodeticPoint:
    lat: float  # degrees
    lon: float  # degrees
    alt: float = 0.0  # km


def geodetic_to_ecf(point: GeodeticPoint) -> np.ndarray:
    phi = math.radians(point.lat)
    lam = math.radians(point.lon)
    n = WGS84_A / math.sqrt(1.0 - WGS84_E2 * math.sin(phi) ** 2)
    return np.array(
        [
            (n + point.alt) * math.cos(phi) * math.cos(lam),
            (n + point.alt) * math.cos(phi) * math.sin(lam),
            (n * (1.0 - WGS84_E2) + point.alt) * math.sin(phi),
        ]
    )


def ecf_to_geodetic_array(r_ecf: np.ndarray) -> np.ndarray:
    """(N, 3) ECF km -> (N, 3) of (lat deg, lon deg, alt km)."""
    out, ok = _accel.kernels.geodetic(np.ascontiguousarray(r_ecf, dtype=float))
    if not ok:
        raise GeodeticConvergenceError("geodetic conversion did not converge within 10 iterations")
    out[:, 0] = np.degrees(out[:, 0])
    out[:, 1] = np.degrees(out[:, 1])
    return out


def ecf_to_geodetic(r_ecf) -> tuple[float, float, float]:
    lat, lon, alt = ecf_to_geodetic_array(np.asarray(r_ecf, dtype=float).reshape(1, 3))[0]
    return float(lat), float(lon), float(alt)


@dataclass(frozen=True)
class LookAngles:
    elevation: float  # degrees
    azimuth: float  # degrees, [0, 360)
    slant_range: float  # km


def look_angles_array(station: GeodeticPoint, r_ecf: np.ndarray):
    """Elevation/azimuth (degrees) and slant range (km) for each ECF row."""
    site = geodetic_to_ecf(station)
    el, az, rng = _accel.kernels.look_angles(
        site, math.radians(station.lat), math.radians(station.lon), np.ascontiguousarray(r_ecf, dtype=float)
    )
    return np.degrees(el), np.mod(np.degrees(az), 360.0), rng


def look_angles(station: GeodeticPoint, r_ecf) -> LookAngles:
    el, az, rng = look_angles_array(station, np.asarray(r_ecf, dtype=float).reshape(1, 3))
    return LookAngles(float(el[0]), float(az[0]), float(rng[0]))


@dataclass(frozen=True)
class StateVector:
    t: float
    r_eci: np.ndarray
    v_eci: np.ndarray
    r_ecf: np.ndarray
    geodetic: tuple[float, float, float]


# ---------------------------------------------------------------------------
# TLE
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Tle:
    catalog_number: int
    epoch: float
    inclination: float
    raan: float
    eccentricity: float
    arg_perigee: float
    mean_anomaly: float
    mean_motion: float
    bstar: float
    line1: str
    line2: str
    name: str = ""

    @property
    def period(self) -> float:
        """Nominal orbital period in seconds."""
        return SECONDS_PER_DAY / self.mean_motion


def tle_checksum(line: str) -> int:
    total = 0
    for ch in line[:68]:
        if ch.isdigit():
            total += int(ch)
        elif ch == "-":
            total += 1
    return total % 10


def _check_line(line: str, number: str) -> None:
    if len(line) != 69:
        raise TleLengthError(f"TLE line {number} has {len(line)} characters, expected 69")
    if line[0] != number:
        raise TleFieldError(f"TLE line {number} must start with {number!r}")
    if not line[68].isdigit() or int(line[68]) != tle_checksum(line):
        raise TleChecksumError(f"TLE line {number} checksum mismatch (expected {tle_checksum(line)})")


def _float_field(text: str, what: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise TleFieldError(f"cannot parse {what} from {text!r}") from None


def _exp_field(text: str, what: str) -> float:
    """Decode the assumed-decimal exponent notation, e.g. ' 30082-3' -> 0.30082e-3."""
    s = text.strip()
    if not s:
        return 0.0
    sign = -1.0 if s[0] == "-" else 1.0
    if s[0] in "+-":
        s = s[1:]
    mantissa, exponent = s[:-2], s[-2:]
    try:
        return sign * float("0." + mantissa.strip()) * 10.0 ** int(exponent)
    except ValueError:
        raise TleFieldError(f"cannot parse {what} from {text!r}") from None


def _epoch(yy: str, doy: str) -> float:
    try:
        year = int(yy)
    except ValueError:
        raise TleFieldError(f"cannot parse epoch year from {yy!r}") from None
    year += 2000 if year < 57 else 1900
    day = _float_field(doy, "epoch day")
    start = datetime(year, 1, 1, tzinfo=timezone.utc).timestamp()
    return round(start + (day - 1.0) * SECONDS_PER_DAY, 3)


def parse_tle(line1: str, line2: str, name: str = "") -> Tle:
    """Parse a two-line element set in the standard fixed-column layout."""
    line1 = line1.rstrip("\r\n")
    line2 = line2.rstrip("\r\n")
    if not line1 or not line2:
        raise TleLengthError("TLE lines must be non-empty")
    _check_line(line1, "1")
    _check_line(line2, "2")

    try:
        cat1 = int(line1[2:7])
        cat2 = int(line2[2:7])
    except ValueError:
        raise TleFieldError("cannot parse catalog number") from None
    if cat1 != cat2:
        raise TleCatalogMismatchError(f"catalog numbers differ between lines: {cat1} vs {cat2}")

    ecc_text = line2[26:33].strip()
    if not ecc_text.isdigit():
        raise TleFieldError(f"cannot parse eccentricity from {line2[26:33]!r}")

    tle = Tle(
        catalog_number=cat1,
        epoch=_epoch(line1[18:20], line1[20:32]),
        inclination=_float_field(line2[8:16], "inclination"),
        raan=_float_field(line2[17:25], "RAAN"),
        eccentricity=float("0." + ecc_text),
        arg_perigee=_float_field(line2[34:42], "argument of perigee"),
        mean_anomaly=_float_field(line2[43:51], "mean anomaly"),
        mean_motion=_float_field(line2[52:63], "mean motion"),
        bstar=_exp_field(line1[53:61], "bstar"),
        line1=line1,
        line2=line2,
        name=name.strip(),
    )
    if not 0.0 <= tle.inclination <= 180.0:
        raise TleFieldError(f"inclination {tle.inclination} outside [0, 180]")
    if tle.mean_motion <= 0.0:
        raise TleFieldError("mean motion must be positive")
    return tle


def _format_exp(value: float) -> str:
    if value == 0.0:
        return " 00000+0"
    exp = math.floor(math.log10(abs(value))) + 1
    mant = round(abs(value) / 10.0**exp * 1e5)
    if mant >= 100000:
        mant //= 10
        exp += 1
    sign = "-" if value < 0 else " "
    esign = "-" if exp < 0 else "+"
    return f"{sign}{mant:05d}{esign}{abs(exp):d}"


def format_tle(
    catalog_number: int,
    epoch,
    inclination: float,
    raan: float,
    eccentricity: float,
    arg_perigee: float,
    mean_anomaly: float,
    mean_motion: float,
    bstar: float = 0.0,
    *,
    classification: str = "U",
    intl_designator: str = "",
    ndot: float = 0.0,
    element_number: int = 999,
    rev_number: int = 0,
) -> tuple[str, str]:
    """Serialize mean elements into two checksummed 69-character TLE lines."""
    dt = to_datetime(to_unix(epoch))
    start = datetime(dt.year, 1, 1, tzinfo=timezone.utc)
    doy = (dt - start).total_seconds() / SECONDS_PER_DAY + 1.0
    ndot_text = f"{abs(ndot):.8f}"[1:]
    body1 = (
        f"1 {catalog_number:05d}{classification} {intl_designator:<8.8s} "
        f"{dt.year % 100:02d}{doy:012.8f} {'-' if ndot < 0 else ' '}{ndot_text} "
        f" 00000+0 {_format_exp(bstar)} 0 {element_number % 10000:4d}"
    )
    ecc_digits = f"{eccentricity:.7f}"[2:]
    body2 = (
        f"2 {catalog_number:05d} {inclination:8.4f} {raan % 360.0:8.4f} {ecc_digits} "
        f"{arg_perigee % 360.0:8.4f} {mean_anomaly % 360.0:8.4f} {mean_motion:11.8f}{rev_number % 100000:5d}"
    )
    return body1 + str(tle_checksum(body1)), body2 + str(tle_checksum(body2))
