"""Jitted integration kernel for the plug field.

The field has no radial component, so a trajectory is a curve
t -> (theta(t), z(t)) at fixed radius r, parametrized by arclength in the
metric with |d/dtheta| = r.  One kernel call advances a trajectory until
the first enabled guard event (section crossing, face crossing, annulus
crossing, top/bottom face) or until ``t_end``.

Guard events are localized by scanning each accepted step on a fixed
subdivision and bisecting the bracketing fraction down to ``event_tol``
arclength; the returned point sits just past the crossing so the caller
can resume without retriggering.
"""

from __future__ import annotations

import math

from numba import njit

# guard enable bits
GUARD_SECTION = 1
GUARD_FACES = 2
GUARD_ANNULUS = 4

# status codes
TIME_UP = 0
HIT_TOP = 1
HIT_BOTTOM = 2
HIT_SECTION = 3
HIT_FACE1 = 4
HIT_FACE2 = 5
HIT_ANNULUS = 6
STALLED = 7

# parameter vector layout
P_EPS0 = 0
P_GMAX = 1
P_THETA0 = 2
P_FACE_W = 3
P_FACE_WR = 4
P_LAM_H = 5
P_THF1 = 6
P_THF2 = 7
P_RTOL = 8
P_HMAX = 9
P_EVENT_TOL = 10
NPAR = 11

_TWO_PI = 2.0 * math.pi
_CLIP_M = 0.05  # face-height soft-clip margin

# f-profile breakpoints, mirroring profiles.py
_B0L = 1.05
_B1L = 1.25
_B1H = 2.75
_B0H = 2.95
_S1L = 0.25
_S1H = 1.75
_S0H = 1.95


@njit(cache=True, inline="always")
def _sstep5(u):
    if u <= 0.0:
        return 0.0
    if u >= 1.0:
        return 1.0
    return u * u * u * (u * (u * 6.0 - 15.0) + 10.0)


@njit(cache=True, inline="always")
def _sstep3(u):
    if u <= 0.0:
        return 0.0
    if u >= 1.0:
        return 1.0
    return u * u * (3.0 - 2.0 * u)


@njit(cache=True, inline="always")
def _f_ang(r, z):
    if r <= _B0L:
        b = 0.0
    elif r < _B1L:
        b = _sstep5((r - _B0L) / (_B1L - _B0L))
    elif r <= _B1H:
        b = 1.0
    elif r < _B0H:
        b = _sstep5((_B0H - r) / (_B0H - _B1H))
    else:
        b = 0.0
    u = -z if z <= 0.0 else z
    if u <= 0.0:
        s = 0.0
    elif u < _S1L:
        s = _sstep5(u / _S1L)
    elif u <= _S1H:
        s = 1.0
    elif u < _S0H:
        s = _sstep5((_S0H - u) / (_S0H - _S1H))
    else:
        s = 0.0
    if z > 0.0:
        s = -s
    return b * s


@njit(cache=True, inline="always")
def _g_vert(r, z, eps0, g_max):
    dz = abs(z) - 1.0
    d = math.sqrt((r - 2.0) * (r - 2.0) + dz * dz)
    if d >= eps0:
        return g_max
    return g_max * _sstep3(d / eps0)


@njit(cache=True, inline="always")
def _rhs(r, z, direction, eps0, g_max):
    """Unit-speed field components (dtheta/dt, dz/dt)."""
    f = _f_ang(r, z)
    g = _g_vert(r, z, eps0, g_max)
    s = math.sqrt(r * r * f * f + g * g)
    return direction * f / s, direction * g / s


@njit(cache=True)
def _ck_step(r, z, h, direction, eps0, g_max):
    """One Cash-Karp step of size h; returns (dtheta, dz, err).

    The field is rotation invariant, so the increments depend on z only.
    """
    k1t, k1z = _rhs(r, z, direction, eps0, g_max)
    k2t, k2z = _rhs(r, z + h * (0.2 * k1z), direction, eps0, g_max)
    k3t, k3z = _rhs(r, z + h * (0.075 * k1z + 0.225 * k2z), direction, eps0, g_max)
    k4t, k4z = _rhs(r, z + h * (0.3 * k1z - 0.9 * k2z + 1.2 * k3z), direction, eps0, g_max)
    k5t, k5z = _rhs(
        r,
        z + h * ((-11.0 / 54.0) * k1z + 2.5 * k2z + (-70.0 / 27.0) * k3z + (35.0 / 27.0) * k4z),
        direction,
        eps0,
        g_max,
    )
    k6t, k6z = _rhs(
        r,
        z
        + h
        * (
            (1631.0 / 55296.0) * k1z
            + (175.0 / 512.0) * k2z
            + (575.0 / 13824.0) * k3z
            + (44275.0 / 110592.0) * k4z
            + (253.0 / 4096.0) * k5z
        ),
        direction,
        eps0,
        g_max,
    )
    c1 = 37.0 / 378.0
    c3 = 250.0 / 621.0
    c4 = 125.0 / 594.0
    c6 = 512.0 / 1771.0
    dth = h * (c1 * k1t + c3 * k3t + c4 * k4t + c6 * k6t)
    dz = h * (c1 * k1z + c3 * k3z + c4 * k4z + c6 * k6z)
    e1 = c1 - 2825.0 / 27648.0
    e3 = c3 - 18575.0 / 48384.0
    e4 = c4 - 13525.0 / 55296.0
    e5 = -277.0 / 14336.0
    e6 = c6 - 0.25
    errt = h * (e1 * k1t + e3 * k3t + e4 * k4t + e5 * k5t + e6 * k6t)
    errz = h * (e1 * k1z + e3 * k3z + e4 * k4z + e5 * k5z + e6 * k6z)
    err = math.sqrt(errt * errt + errz * errz)
    return dth, dz, err


@njit(cache=True, inline="always")
def _wrap_pi(x):
    """Wrap to (-pi, pi]."""
    y = (x + math.pi) % _TWO_PI
    if y == 0.0:
        y = _TWO_PI
    return y - math.pi


@njit(cache=True, inline="always")
def _soft_clip(x, lo, hi):
    m = _CLIP_M
    if x > hi - 2.0 * m:
        return hi - 2.0 * m + m * (1.0 - math.exp(-(x - hi + 2.0 * m) / m))
    if x < lo + 2.0 * m:
        return lo + 2.0 * m - m * (1.0 - math.exp((x - lo - 2.0 * m) / m))
    return x


@njit(cache=True, inline="always")
def _face_height(i, th, par):
    """Height of entry face i at angle th (soft-clipped linear ramp)."""
    if i == 1:
        dw = _wrap_pi(th - par[P_THF1])
        return _soft_clip(-1.0 - par[P_LAM_H] * dw, -2.0, 0.0)
    dw = _wrap_pi(th - par[P_THF2])
    return _soft_clip(1.0 + par[P_LAM_H] * dw, 0.0, 2.0)


@njit(cache=True, inline="always")
def _face_gap(i, r, th, z, par):
    """Guard value z - h_i(th) and in-footprint flag."""
    if abs(r - 2.0) > par[P_FACE_WR]:
        return 0.0, False
    if i == 1:
        dw = _wrap_pi(th - par[P_THF1])
    else:
        dw = _wrap_pi(th - par[P_THF2])
    if abs(dw) > par[P_FACE_W]:
        return 0.0, False
    return z - _face_height(i, th, par), True


@njit(cache=True)
def _eval_at(r, th0, z0, frac, h, direction, eps0, g_max):
    dth, dz, _ = _ck_step(r, z0, frac * h, direction, eps0, g_max)
    return th0 + dth, z0 + dz


@njit(cache=True)
def _locate(r, th0, z0, h, direction, par, kind, face_i, lo, hi):
    """Bisect a guard crossing inside step fraction (lo, hi]; returns
    (fraction, th, z) just past the crossing."""
    eps0 = par[P_EPS0]
    g_max = par[P_GMAX]
    tol = par[P_EVENT_TOL]
    th_lo, z_lo = _eval_at(r, th0, z0, lo, h, direction, eps0, g_max)
    th_hi, z_hi = _eval_at(r, th0, z0, hi, h, direction, eps0, g_max)
    level = 0.0
    if kind == 0:  # section: theta crossing of a fixed level
        base = math.floor((th_lo - par[P_THETA0]) / _TWO_PI + 0.5)
        level = par[P_THETA0] + _TWO_PI * base
        if (th_lo - level) * (th_hi - level) > 0.0:
            base = math.floor((th_hi - par[P_THETA0]) / _TWO_PI + 0.5)
            level = par[P_THETA0] + _TWO_PI * base
        g_lo = th_lo - level
    elif kind == 1:  # face face_i
        g_lo, _ = _face_gap(face_i, r, th_lo, z_lo, par)
    else:  # annulus z = 0
        g_lo = z_lo
    if abs(g_lo) < 1e-13:
        # the bracket starts exactly on the guard surface
        return lo, th_lo, z_lo
    for _ in range(80):
        if (hi - lo) * abs(h) <= tol:
            break
        mid = 0.5 * (lo + hi)
        th_m, z_m = _eval_at(r, th0, z0, mid, h, direction, eps0, g_max)
        if kind == 0:
            g_m = th_m - level
        elif kind == 1:
            g_m, _ = _face_gap(face_i, r, th_m, z_m, par)
        else:
            g_m = z_m
        if (g_lo <= 0.0) == (g_m <= 0.0):
            lo = mid
            g_lo = g_m
        else:
            hi = mid
    th_e, z_e = _eval_at(r, th0, z0, hi, h, direction, eps0, g_max)
    return hi, th_e, z_e


@njit(cache=True)
def advance(r, th, z, t, t_end, direction, guards, par):
    """Advance from (th, z) at arclength t until a guard or t_end.

    Returns (status, th, z, t).
    """
    eps0 = par[P_EPS0]
    g_max = par[P_GMAX]
    rtol = par[P_RTOL]
    hmax = par[P_HMAX]
    h = min(hmax, 1e-3)
    t_call0 = t
    want_section = (guards & GUARD_SECTION) != 0
    want_faces = (guards & GUARD_FACES) != 0
    want_annulus = (guards & GUARD_ANNULUS) != 0
    face_ok = abs(r - 2.0) <= par[P_FACE_WR]

    while t < t_end:
        if h > t_end - t:
            h = t_end - t
        if h < 1e-13:
            return STALLED, th, z, t
        dth, dz, err = _ck_step(r, z, h, direction, eps0, g_max)
        th1 = th + dth
        z1 = z + dz
        tol = rtol * h + 1e-14
        if err > tol and h > 1e-12:
            h *= max(0.2, 0.9 * (tol / err) ** 0.25)
            continue

        # top/bottom boundary: localize z = +-2 within the step
        if z1 > 2.0 or z1 < -2.0:
            zb = 2.0 if z1 > 2.0 else -2.0
            lo = 0.0
            hi = 1.0
            for _ in range(80):
                if (hi - lo) * h <= par[P_EVENT_TOL]:
                    break
                mid = 0.5 * (lo + hi)
                th_m, z_m = _eval_at(r, th, z, mid, h, direction, eps0, g_max)
                if (z_m - zb) * (z1 - zb) > 0.0:
                    hi = mid
                else:
                    lo = mid
            th_e, z_e = _eval_at(r, th, z, hi, h, direction, eps0, g_max)
            status = HIT_TOP if zb > 0.0 else HIT_BOTTOM
            return status, th_e, zb, t + hi * h

        # cheap proximity check: can any guard trigger within this step?
        scan = False
        if want_section:
            if abs(_wrap_pi(th - par[P_THETA0])) <= 1.25 * h:
                scan = True
        if not scan and want_annulus and abs(z) <= 1.25 * h:
            scan = True
        if not scan and want_faces and face_ok:
            d1 = abs(_wrap_pi(th - par[P_THF1])) - par[P_FACE_W]
            d2 = abs(_wrap_pi(th - par[P_THF2])) - par[P_FACE_W]
            if d1 <= 1.25 * h or d2 <= 1.25 * h:
                scan = True

        if scan:
            best_frac = 2.0
            best_kind = -1
            best_face = 0
            n_sub = 8
            p_th = th
            p_z = z
            if want_faces and face_ok:
                p_g1, p_in1 = _face_gap(1, r, p_th, p_z, par)
                p_g2, p_in2 = _face_gap(2, r, p_th, p_z, par)
            else:
                p_g1, p_in1, p_g2, p_in2 = 0.0, False, 0.0, False
            for j in range(1, n_sub + 1):
                frac = j / n_sub
                if j == n_sub:
                    c_th, c_z = th1, z1
                else:
                    c_th, c_z = _eval_at(r, th, z, frac, h, direction, eps0, g_max)
                if want_section and best_kind < 0:
                    k1 = math.floor((c_th - par[P_THETA0]) / _TWO_PI)
                    k0 = math.floor((p_th - par[P_THETA0]) / _TWO_PI)
                    if k1 != k0:
                        best_frac = frac
                        best_kind = 0
                if want_faces and face_ok and best_kind < 0:
                    c_g1, c_in1 = _face_gap(1, r, c_th, c_z, par)
                    c_g2, c_in2 = _face_gap(2, r, c_th, c_z, par)
                    if p_in1 and c_in1 and (p_g1 <= 0.0) != (c_g1 <= 0.0):
                        best_frac = frac
                        best_kind = 1
                        best_face = 1
                    elif p_in2 and c_in2 and (p_g2 <= 0.0) != (c_g2 <= 0.0):
                        best_frac = frac
                        best_kind = 1
                        best_face = 2
                    p_g1, p_in1 = c_g1, c_in1
                    p_g2, p_in2 = c_g2, c_in2
                if want_annulus and best_kind < 0:
                    if (p_z < 0.0) != (c_z < 0.0):
                        best_frac = frac
                        best_kind = 2
                if best_kind >= 0:
                    break
                p_th = c_th
                p_z = c_z

            if best_kind >= 0:
                lo = best_frac - 1.0 / n_sub
                if lo < 0.0:
                    lo = 0.0
                frac, th_e, z_e = _locate(
                    r, th, z, h, direction, par, best_kind, best_face, lo, best_frac
                )
                t_e = t + frac * h
                # a section/annulus "crossing" localized at the very start
                # of this call is the departure of a start sitting exactly
                # on the guard surface, not a return: accept the whole step
                if best_kind == 1 or t_e - t_call0 > 1e-9:
                    if best_kind == 0:
                        return HIT_SECTION, th_e, z_e, t_e
                    if best_kind == 1:
                        st = HIT_FACE1 if best_face == 1 else HIT_FACE2
                        return st, th_e, z_e, t_e
                    return HIT_ANNULUS, th_e, z_e, t_e

        th = th1
        z = z1
        t += h
        if err > 0.0:
            fac = 0.9 * (tol / err) ** 0.2
            if fac > 5.0:
                fac = 5.0
            h = min(hmax, h * fac)
        else:
            h = min(hmax, h * 5.0)
    return TIME_UP, th, z, t


@njit(cache=True)
def theta_advance_to_tip(r, th, z, t_max, par):
    """Unwrapped theta advance from (th, z) to the annulus z = 0 (the
    propeller tip).  Returns (theta_total, arclength, reached_flag)."""
    status, th1, z1, t1 = advance(r, th, z, 0.0, t_max, 1.0, GUARD_ANNULUS, par)
    if status == HIT_ANNULUS:
        return th1 - th, t1, True
    return th1 - th, t1, False
