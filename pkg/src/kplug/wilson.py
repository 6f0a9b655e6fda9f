"""Wilson-level flow: integration, events, and the section return map.

All operations here use the unmodified rotationally symmetric field (no
insertion jumps); the radius coordinate is carried as an exact constant
of motion by the integrator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernel as K
from .insertion import wrap_angle, wrap_pi
from .plug import Plug
from .profiles import WilsonParams

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PointW:
    """Cylindrical point (r, theta, z) in the plug."""

    r: float
    theta: float
    z: float

    def __post_init__(self):
        if not (1.0 <= self.r <= 3.0):
            raise ValueError(f"radius {self.r} outside [1, 3]")
        if not (-2.0 <= self.z <= 2.0):
            raise ValueError(f"height {self.z} outside [-2, 2]")
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.r, self.theta, self.z)


@dataclass(frozen=True)
class WilsonEvent:
    kind: str                  # hit-top-face | hit-bottom-face | cross-section |
    #                            cross-annulus | hit-entry-face(i) | horizon
    point: PointW
    time: float
    face: int = 0              # which entry face, for hit-entry-face
    tangential: bool = False


@dataclass
class WilsonFragment:
    """One integrated arc at constant radius."""

    start: PointW
    end: PointW
    t0: float
    t1: float

    @property
    def length(self) -> float:
        return self.t1 - self.t0


def wilson_vector(p: PointW, params: WilsonParams) -> tuple[float, float, float]:
    """Unit-speed field at p: (dr, dtheta, dz) with dr identically 0."""
    f = params.f(p.r, p.z)
    g = params.g(p.r, p.z)
    s = math.hypot(p.r * f, g)
    return (0.0, f / s, g / s)


_STATUS_KIND = {
    K.TIME_UP: "horizon",
    K.HIT_TOP: "hit-top-face",
    K.HIT_BOTTOM: "hit-bottom-face",
    K.HIT_SECTION: "cross-section",
    K.HIT_FACE1: "hit-entry-face",
    K.HIT_FACE2: "hit-entry-face",
    K.HIT_ANNULUS: "cross-annulus",
    K.STALLED: "stalled",
}

_GUARD_BITS = {
    "cross-section": K.GUARD_SECTION,
    "hit-entry-face": K.GUARD_FACES,
    "cross-annulus": K.GUARD_ANNULUS,
}


def integrate_wilson(
    plug: Plug,
    p: PointW,
    horizon: float,
    guards: tuple[str, ...] = ("cross-section",),
    direction: int = 1,
    theta_unwrapped: float | None = None,
) -> tuple[WilsonFragment, WilsonEvent]:
    """Integrate the Wilson flow until the first guard event.

    ``guards`` selects from {"cross-section", "hit-entry-face",
    "cross-annulus"}; top/bottom hits and the horizon always terminate.
    Returns the integrated fragment and the terminating event.
    """
    par = plug.kernel_params()
    bits = 0
    for gname in guards:
        bits |= _GUARD_BITS[gname]
    th0 = p.theta if theta_unwrapped is None else theta_unwrapped
    status, th, z, t = K.advance(p.r, th0, p.z, 0.0, horizon, float(direction), bits, par)
    q = PointW(p.r, wrap_angle(th), min(2.0, max(-2.0, z)))
    kind = _STATUS_KIND[status]
    face = 1 if status == K.HIT_FACE1 else (2 if status == K.HIT_FACE2 else 0)
    tang = False
    if status == K.HIT_SECTION:
        fval = plug.wilson.f(q.r, q.z)
        tang = abs(fval) < 1e-8
    ev = WilsonEvent(kind=kind, point=q, time=t, face=face, tangential=tang)
    frag = WilsonFragment(start=p, end=q, t0=0.0, t1=t)
    return frag, ev


@dataclass(frozen=True)
class ReturnResult:
    point: PointW | None
    time: float
    domain_tag: str       # D--, D-+, D++ per the continuity decomposition
    escaped: bool
    tangential: bool = False


def wilson_return_map(plug: Plug, p: PointW, horizon: float = 1e4,
                      direction: int = 1) -> ReturnResult:
    """First return of the Wilson flow to the section theta = pi.

    The radius is preserved exactly.  Escape (top/bottom exit before a
    return) is reported, not raised.
    """
    if abs(wrap_pi(p.theta - plug.section_angle)) > 1e-9:
        raise ValueError("wilson_return_map expects a point on the section")
    z0 = p.z
    frag, ev = integrate_wilson(plug, p, horizon, guards=("cross-section",),
                                direction=direction)
    if ev.kind != "cross-section":
        return ReturnResult(None, ev.time, "", True)
    z1 = ev.point.z
    if z0 < 0.0 and z1 <= 0.0:
        tag = "D--"
    elif z0 < 0.0:
        tag = "D-+"
    else:
        tag = "D++"
    return ReturnResult(ev.point, ev.time, tag, False, ev.tangential)


# --- measurement helpers -------------------------------------------------

def theta_advance(plug: Plug, r: float, t_max: float = 1e6) -> float:
    """Total unwrapped angle advance Theta(r) from the bottom face to the
    tip (annulus crossing) of the orbit at radius r > 2."""
    par = plug.kernel_params()
    dth, _t, ok = K.theta_advance_to_tip(r, 0.0, -2.0, t_max, par)
    if not ok:
        raise RuntimeError(f"orbit at r={r} did not reach the annulus in {t_max}")
    return float(dth)


def winding_number(plug: Plug, r: float, t_max: float = 1e6) -> int:
    """Delta(r) = floor(Theta(r) / 2 pi)."""
    return int(math.floor(theta_advance(plug, r, t_max) / TWO_PI))


def transit_length(plug: Plug, r: float, t_max: float = 1e6) -> float:
    """Arclength of the full transit from z=-2 to z=+2 at radius r != 2."""
    par = plug.kernel_params()
    status, _th, _z, t = K.advance(r, 0.0, -2.0, 0.0, t_max, 1.0, 0, par)
    if status != K.HIT_TOP:
        raise RuntimeError(f"orbit at r={r} did not exit within {t_max}")
    return float(t)


def escape_length_table(plug: Plug, eps_grid) -> list[tuple[float, float]]:
    """L(eps): maximal transit length over |r-2| >= eps (attained at the
    band edge by monotonicity), tabulated on the given eps grid."""
    out = []
    for eps in eps_grid:
        lo = transit_length(plug, 2.0 - eps) if 2.0 - eps > 1.0 else 0.0
        hi = transit_length(plug, 2.0 + eps) if 2.0 + eps < 3.0 else 0.0
        out.append((float(eps), max(lo, hi)))
    return out
