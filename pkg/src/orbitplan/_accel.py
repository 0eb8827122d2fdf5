"""Hot numeric kernels.

Each kernel exists twice: an explicit loop compiled with ``numba.njit`` and a
vectorized numpy version. The active backend is chosen once at import time:

* ``ORBITPLAN_NUMBA=0`` forces the numpy path;
* otherwise numba is used when importable, numpy when not.

Both backends are always reachable through :data:`numpy_kernels` and
:data:`numba_kernels` (the latter is ``None`` without numba) so tests and the
benchmark can compare them directly.
"""

from __future__ import annotations

import math
import os
from types import SimpleNamespace

import numpy as np

WGS84_A = 6378.137
WGS84_F = 1.0 / 298.257223563
WGS84_E2 = WGS84_F * (2.0 - WGS84_F)

KEPLER_TOL = 1e-10
KEPLER_MAX_ITER = 50
GEODETIC_TOL_KM = 1e-3
GEODETIC_MAX_ITER = 10


# --------------------------------------------------------------------------
# loop implementations (numba-compiled when available)
# --------------------------------------------------------------------------


def _loop_kepler_states(t_rel, a, e, inc, raan0, argp0, m0, n, raan_dot, argp_dot, m_dot):
    count = t_rel.shape[0]
    r = np.empty((count, 3))
    v = np.empty((count, 3))
    ok = True
    ci = math.cos(inc)
    si = math.sin(inc)
    b = a * math.sqrt(1.0 - e * e)
    for k in range(count):
        dt = t_rel[k]
        raan = raan0 + raan_dot * dt
        argp = argp0 + argp_dot * dt
        mean = np.fmod(m0 + m_dot * dt, 2.0 * math.pi)
        ecc_anom = mean if e < 0.8 else math.pi
        converged = False
        for _ in range(KEPLER_MAX_ITER):
            f = ecc_anom - e * math.sin(ecc_anom) - mean
            step = f / (1.0 - e * math.cos(ecc_anom))
            ecc_anom -= step
            if abs(step) < KEPLER_TOL:
                converged = True
                break
        if not converged:
            ok = False
        ce = math.cos(ecc_anom)
        se = math.sin(ecc_anom)
        x = a * (ce - e)
        y = b * se
        rate = n / (1.0 - e * ce)
        vx = -a * se * rate
        vy = b * ce * rate
        co = math.cos(raan)
        so = math.sin(raan)
        cw = math.cos(argp)
        sw = math.sin(argp)
        px = co * cw - so * sw * ci
        py = so * cw + co * sw * ci
        pz = sw * si
        qx = -co * sw - so * cw * ci
        qy = -so * sw + co * cw * ci
        qz = cw * si
        r[k, 0] = x * px + y * qx
        r[k, 1] = x * py + y * qy
        r[k, 2] = x * pz + y * qz
        v[k, 0] = vx * px + vy * qx
        v[k, 1] = vx * py + vy * qy
        v[k, 2] = vx * pz + vy * qz
    return r, v, ok


def _loop_rotate_z(r, theta):
    count = r.shape[0]
    out = np.empty((count, 3))
    for k in range(count):
        c = math.cos(theta[k])
        s = math.sin(theta[k])
        out[k, 0] = c * r[k, 0] + s * r[k, 1]
        out[k, 1] = -s * r[k, 0] + c * r[k, 1]
        out[k, 2] = r[k, 2]
    return out


def _loop_geodetic(r_ecf):
    count = r_ecf.shape[0]
    out = np.empty((count, 3))
    ok = True
    for k in range(count):
        x = r_ecf[k, 0]
        y = r_ecf[k, 1]
        z = r_ecf[k, 2]
        p = math.sqrt(x * x + y * y)
        lat = math.atan2(z, p * (1.0 - WGS84_E2))
        h = 0.0
        converged = False
        for _ in range(GEODETIC_MAX_ITER):
            sl = math.sin(lat)
            cl = math.cos(lat)
            nrad = WGS84_A / math.sqrt(1.0 - WGS84_E2 * sl * sl)
            h_new = p * cl + (z + WGS84_E2 * nrad * sl) * sl - nrad
            lat_new = math.atan2(z, p * (1.0 - WGS84_E2 * nrad / (nrad + h_new)))
            done = abs(lat_new - lat) * WGS84_A < GEODETIC_TOL_KM and abs(h_new - h) < GEODETIC_TOL_KM
            lat = lat_new
            h = h_new
            if done:
                converged = True
                break
        if not converged:
            ok = False
        sl = math.sin(lat)
        nrad = WGS84_A / math.sqrt(1.0 - WGS84_E2 * sl * sl)
        out[k, 0] = lat
        out[k, 1] = math.atan2(y, x)
        out[k, 2] = p * math.cos(lat) + (z + WGS84_E2 * nrad * sl) * sl - nrad
    return out, ok


def _loop_look_angles(site_ecf, lat, lon, r_ecf):
    count = r_ecf.shape[0]
    el = np.empty(count)
    az = np.empty(count)
    rng = np.empty(count)
    sp = math.sin(lat)
    cp = math.cos(lat)
    sl = math.sin(lon)
    cl = math.cos(lon)
    for k in range(count):
        dx = r_ecf[k, 0] - site_ecf[0]
        dy = r_ecf[k, 1] - site_ecf[1]
        dz = r_ecf[k, 2] - site_ecf[2]
        south = sp * cl * dx + sp * sl * dy - cp * dz
        east = -sl * dx + cl * dy
        zen = cp * cl * dx + cp * sl * dy + sp * dz
        d = math.sqrt(dx * dx + dy * dy + dz * dz)
        rng[k] = d
        el[k] = math.asin(max(-1.0, min(1.0, zen / d)))
        a = math.atan2(east, -south)
        if a < 0.0:
            a += 2.0 * math.pi
        az[k] = a
    return el, az, rng


def _loop_eclipse_mask(r_sat, r_sun, body_radius):
    count = r_sat.shape[0]
    out = np.empty(count, dtype=np.bool_)
    for k in range(count):
        sn = math.sqrt(r_sun[k, 0] ** 2 + r_sun[k, 1] ** 2 + r_sun[k, 2] ** 2)
        sx = r_sun[k, 0] / sn
        sy = r_sun[k, 1] / sn
        sz = r_sun[k, 2] / sn
        d = r_sat[k, 0] * sx + r_sat[k, 1] * sy + r_sat[k, 2] * sz
        px = r_sat[k, 0] - d * sx
        py = r_sat[k, 1] - d * sy
        pz = r_sat[k, 2] - d * sz
        out[k] = d < 0.0 and math.sqrt(px * px + py * py + pz * pz) < body_radius
    return out


# --------------------------------------------------------------------------
# numpy implementations
# --------------------------------------------------------------------------


def _np_kepler_states(t_rel, a, e, inc, raan0, argp0, m0, n, raan_dot, argp_dot, m_dot):
    t_rel = np.asarray(t_rel, dtype=float)
    raan = raan0 + raan_dot * t_rel
    argp = argp0 + argp_dot * t_rel
    mean = np.fmod(m0 + m_dot * t_rel, 2.0 * np.pi)
    ecc_anom = mean.copy() if e < 0.8 else np.full_like(mean, np.pi)
    active = np.ones(mean.shape, dtype=bool)
    for _ in range(KEPLER_MAX_ITER):
        if not active.any():
            break
        ea = ecc_anom[active]
        step = (ea - e * np.sin(ea) - mean[active]) / (1.0 - e * np.cos(ea))
        ecc_anom[active] = ea - step
        idx = np.flatnonzero(active)
        active[idx[np.abs(step) < KEPLER_TOL]] = False
    ok = not active.any()

    b = a * math.sqrt(1.0 - e * e)
    ce = np.cos(ecc_anom)
    se = np.sin(ecc_anom)
    x = a * (ce - e)
    y = b * se
    rate = n / (1.0 - e * ce)
    vx = -a * se * rate
    vy = b * ce * rate
    ci, si = math.cos(inc), math.sin(inc)
    co, so = np.cos(raan), np.sin(raan)
    cw, sw = np.cos(argp), np.sin(argp)
    p_vec = np.stack([co * cw - so * sw * ci, so * cw + co * sw * ci, sw * si], axis=1)
    q_vec = np.stack([-co * sw - so * cw * ci, -so * sw + co * cw * ci, cw * si], axis=1)
    r = x[:, None] * p_vec + y[:, None] * q_vec
    v = vx[:, None] * p_vec + vy[:, None] * q_vec
    return r, v, ok


def _np_rotate_z(r, theta):
    c = np.cos(theta)
    s = np.sin(theta)
    out = np.empty_like(r, dtype=float)
    out[:, 0] = c * r[:, 0] + s * r[:, 1]
    out[:, 1] = -s * r[:, 0] + c * r[:, 1]
    out[:, 2] = r[:, 2]
    return out


def _np_geodetic(r_ecf):
    x, y, z = r_ecf[:, 0], r_ecf[:, 1], r_ecf[:, 2]
    p = np.hypot(x, y)
    lat = np.arctan2(z, p * (1.0 - WGS84_E2))
    h = np.zeros_like(lat)
    done = np.zeros(lat.shape, dtype=bool)
    for _ in range(GEODETIC_MAX_ITER):
        sl = np.sin(lat)
        nrad = WGS84_A / np.sqrt(1.0 - WGS84_E2 * sl * sl)
        h_new = p * np.cos(lat) + (z + WGS84_E2 * nrad * sl) * sl - nrad
        lat_new = np.arctan2(z, p * (1.0 - WGS84_E2 * nrad / (nrad + h_new)))
        step_ok = (np.abs(lat_new - lat) * WGS84_A < GEODETIC_TOL_KM) & (np.abs(h_new - h) < GEODETIC_TOL_KM)
        # freeze converged entries so both backends stop at the same iterate
        lat = np.where(done, lat, lat_new)
        h = np.where(done, h, h_new)
        done |= step_ok
        if done.all():
            break
    sl = np.sin(lat)
    nrad = WGS84_A / np.sqrt(1.0 - WGS84_E2 * sl * sl)
    alt = p * np.cos(lat) + (z + WGS84_E2 * nrad * sl) * sl - nrad
    return np.stack([lat, np.arctan2(y, x), alt], axis=1), bool(done.all())


def _np_look_angles(site_ecf, lat, lon, r_ecf):
    d = r_ecf - np.asarray(site_ecf)[None, :]
    sp, cp = math.sin(lat), math.cos(lat)
    sl, cl = math.sin(lon), math.cos(lon)
    south = sp * cl * d[:, 0] + sp * sl * d[:, 1] - cp * d[:, 2]
    east = -sl * d[:, 0] + cl * d[:, 1]
    zen = cp * cl * d[:, 0] + cp * sl * d[:, 1] + sp * d[:, 2]
    rng = np.sqrt(np.einsum("ij,ij->i", d, d))
    el = np.arcsin(np.clip(zen / rng, -1.0, 1.0))
    az = np.mod(np.arctan2(east, -south), 2.0 * np.pi)
    return el, az, rng


def _np_eclipse_mask(r_sat, r_sun, body_radius):
    s_hat = r_sun / np.linalg.norm(r_sun, axis=1)[:, None]
    d = np.einsum("ij,ij->i", r_sat, s_hat)
    perp = r_sat - d[:, None] * s_hat
    return (d < 0.0) & (np.linalg.norm(perp, axis=1) < body_radius)


numpy_kernels = SimpleNamespace(
    name="numpy",
    kepler_states=_np_kepler_states,
    rotate_z=_np_rotate_z,
    geodetic=_np_geodetic,
    look_angles=_np_look_angles,
    eclipse_mask=_np_eclipse_mask,
)

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba_kernels = None
else:
    numba_kernels = SimpleNamespace(
        name="numba",
        kepler_states=njit(cache=True)(_loop_kepler_states),
        rotate_z=njit(cache=True)(_loop_rotate_z),
        geodetic=njit(cache=True)(_loop_geodetic),
        look_angles=njit(cache=True)(_loop_look_angles),
        eclipse_mask=njit(cache=True)(_loop_eclipse_mask),
    )


def _select():
    flag = os.environ.get("ORBITPLAN_NUMBA", "1").strip().lower()
    if flag in ("0", "false", "no", "off") or numba_kernels is None:
        return numpy_kernels
    return numba_kernels


kernels = _select()
BACKEND = kernels.name
