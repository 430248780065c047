"""Compiled Dormand-Prince 5(4) integrator for the two radial systems.

Kept separate so that the numba compilation cache is isolated from the
pure-Python modules.  Only plain arrays and scalars cross this boundary.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

SYSTEM_LINE = 0  # u1' = -W1 u2,           u2' = W2 u1
SYSTEM_RADIAL = 1  # psi1' = W1 psi2 - k/r psi1, psi2' = k/r psi2 - W2 psi1

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_MAX_STEPS = 2
STATUS_NONFINITE = 3

RESCALE_AT = 1e10

# Dormand-Prince tableau
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0,
)


@njit(cache=True, nogil=True)
def potential(r, code, p, tr, tv):
    if code == 0:
        return -p[0] / r
    if code == 1:
        return (-p[0] + p[1] * math.exp(-p[2] * r)) / r
    if code == 2:
        return -p[0] / math.sqrt(r * r + p[1] * p[1])
    if p[0] > 0.0 and r < tr[0]:
        return -p[0] / r
    return np.interp(r, tr, tv)


@njit(cache=True, nogil=True)
def rhs(system, k, E, m, r, y1, y2, code, p, tr, tv):
    v = potential(r, code, p, tr, tv)
    w1 = E + m - v
    w2 = E - m - v
    if system == SYSTEM_LINE:
        return -w1 * y2, w2 * y1
    kr = k / r
    return w1 * y2 - kr * y1, kr * y2 - w2 * y1


@njit(cache=True, nogil=True)
def angular_rate(system, k, E, m, r, code, p, tr, tv):
    """Local oscillation rate sqrt(W1*W2) plus the centrifugal rate |k|/r."""
    v = potential(r, code, p, tr, tv)
    q = (E + m - v) * (E - m - v)
    om = math.sqrt(q) if q > 0.0 else 0.0
    if system == SYSTEM_RADIAL:
        om += abs(k) / r
    return om


@njit(cache=True, nogil=True)
def integrate(system, k, E, m, code, p, tr, tv, r0, r1, y01, y02,
              rtol, atol, rot_cap, max_steps):
    """Integrate from r0 to r1 (either direction).

    Returns ``(r, y, logscale, status, fail_r)``; ``y[i] * exp(logscale[i])``
    is the unrescaled solution.  Every accepted step end is recorded.
    """
    cap = 1024
    rs = np.empty(cap)
    ys = np.empty((cap, 2))
    ls = np.empty(cap)

    direction = 1.0 if r1 > r0 else -1.0
    span = abs(r1 - r0)
    r = r0
    y1 = y01
    y2 = y02
    mag = max(abs(y1), abs(y2))
    logs = 0.0
    if mag > 0.0:
        y1 /= mag
        y2 /= mag
        logs = math.log(mag)
    ymax = 1.0

    rs[0] = r
    ys[0, 0] = y1
    ys[0, 1] = y2
    ls[0] = logs
    n = 1

    # r0 may be 0 for the line system only; rate is finite there
    om = angular_rate(system, k, E, m, max(r, 1e-300), code, p, tr, tv)
    h = 0.01 * span
    if om > 0.0:
        h = min(0.1 * rot_cap / om, h)
    k1a, k1b = rhs(system, k, E, m, r, y1, y2, code, p, tr, tv)
    status = STATUS_OK
    steps = 0

    while True:
        remaining = (r1 - r) * direction
        if remaining <= 1e-14 * max(abs(r1), 1e-300):
            break
        if steps >= max_steps:
            status = STATUS_MAX_STEPS
            break
        # rotation cap evaluated at both ends of the trial step
        om = angular_rate(system, k, E, m, max(r, 1e-300), code, p, tr, tv)
        if om > 0.0 and h * om > rot_cap:
            h = rot_cap / om
        om2 = angular_rate(system, k, E, m, r + direction * h, code, p, tr, tv)
        if h * om2 > rot_cap:
            h = rot_cap / om2
        last = False
        if h >= remaining:
            h = remaining
            last = True
        if h < 4e-16 * max(abs(r), 1e-300):
            status = STATUS_UNDERFLOW
            break
        s = direction * h

        k2a, k2b = rhs(system, k, E, m, r + _C2 * s,
                       y1 + s * _A21 * k1a, y2 + s * _A21 * k1b, code, p, tr, tv)
        k3a, k3b = rhs(system, k, E, m, r + _C3 * s,
                       y1 + s * (_A31 * k1a + _A32 * k2a),
                       y2 + s * (_A31 * k1b + _A32 * k2b), code, p, tr, tv)
        k4a, k4b = rhs(system, k, E, m, r + _C4 * s,
                       y1 + s * (_A41 * k1a + _A42 * k2a + _A43 * k3a),
                       y2 + s * (_A41 * k1b + _A42 * k2b + _A43 * k3b), code, p, tr, tv)
        k5a, k5b = rhs(system, k, E, m, r + _C5 * s,
                       y1 + s * (_A51 * k1a + _A52 * k2a + _A53 * k3a + _A54 * k4a),
                       y2 + s * (_A51 * k1b + _A52 * k2b + _A53 * k3b + _A54 * k4b),
                       code, p, tr, tv)
        k6a, k6b = rhs(system, k, E, m, r + s,
                       y1 + s * (_A61 * k1a + _A62 * k2a + _A63 * k3a + _A64 * k4a + _A65 * k5a),
                       y2 + s * (_A61 * k1b + _A62 * k2b + _A63 * k3b + _A64 * k4b + _A65 * k5b),
                       code, p, tr, tv)
        n1 = y1 + s * (_B1 * k1a + _B3 * k3a + _B4 * k4a + _B5 * k5a + _B6 * k6a)
        n2 = y2 + s * (_B1 * k1b + _B3 * k3b + _B4 * k4b + _B5 * k5b + _B6 * k6b)
        rn = r1 if last else r + s
        k7a, k7b = rhs(system, k, E, m, rn, n1, n2, code, p, tr, tv)
        e1 = s * (_E1 * k1a + _E3 * k3a + _E4 * k4a + _E5 * k5a + _E6 * k6a + _E7 * k7a)
        e2 = s * (_E1 * k1b + _E3 * k3b + _E4 * k4b + _E5 * k5b + _E6 * k6b + _E7 * k7b)

        floor = atol * ymax
        sc1 = floor + rtol * max(abs(y1), abs(n1))
        sc2 = floor + rtol * max(abs(y2), abs(n2))
        err = math.sqrt(0.5 * ((e1 / sc1) ** 2 + (e2 / sc2) ** 2))
        steps += 1
        if not math.isfinite(err):
            h *= 0.25
            continue
        if err <= 1.0:
            r = rn
            y1 = n1
            y2 = n2
            k1a = k7a
            k1b = k7b
            mag = max(abs(y1), abs(y2))
            if mag > RESCALE_AT:
                y1 /= mag
                y2 /= mag
                k1a /= mag
                k1b /= mag
                logs += math.log(mag)
                ymax /= mag
                mag = 1.0
            if mag > ymax:
                ymax = mag
            if n == cap:
                cap *= 2
                rs2 = np.empty(cap)
                ys2 = np.empty((cap, 2))
                ls2 = np.empty(cap)
                rs2[:n] = rs[:n]
                ys2[:n] = ys[:n]
                ls2[:n] = ls[:n]
                rs = rs2
                ys = ys2
                ls = ls2
            rs[n] = r
            ys[n, 0] = y1
            ys[n, 1] = y2
            ls[n] = logs
            n += 1
            if last:
                break
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            h *= fac
        else:
            h *= max(0.2, 0.9 * err ** -0.2)

    return rs[:n].copy(), ys[:n].copy(), ls[:n].copy(), status, r
