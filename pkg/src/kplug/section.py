"""Return map to the section rectangle and the five generator actions.

The section is the rectangle {theta = pi}; points on it carry (r, z)
coordinates.  The first-return map of the hybrid flow restricts, on
suitable domains, to five named generators: the Wilson return (level
preserving) and the four single-transition maps through the two entry
and exit faces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kflow import OrbitTrace, flow_k
from .plug import Plug
from .wilson import PointW, wilson_return_map

GENERATOR_NAMES = ("psi", "phi1_plus", "phi1_minus", "phi2_plus", "phi2_minus")


class NotInDomain(ValueError):
    """The requested generator is not defined at the given section point."""


class EscapedPlug(RuntimeError):
    """The orbit left the plug before returning to the section."""


@dataclass(frozen=True)
class SectionPoint:
    r: float
    z: float

    def to_point(self, plug: Plug) -> PointW:
        return PointW(self.r, plug.section_angle, self.z)

    def dist(self, other: "SectionPoint") -> float:
        return math.hypot(self.r - other.r, self.z - other.z)


@dataclass(frozen=True)
class GeneratorTag:
    name: str
    inverse: bool = False

    def __post_init__(self):
        if self.name not in GENERATOR_NAMES:
            raise ValueError(f"unknown generator {self.name}")

    @property
    def level_step(self) -> int:
        if self.name == "psi":
            return 0
        step = 1 if self.name.endswith("plus") else -1
        return -step if self.inverse else step

    def __str__(self):
        return self.name + ("^-1" if self.inverse else "")


@dataclass(frozen=True)
class ReturnStep:
    point: SectionPoint
    time: float
    transitions: tuple            # (kind, face) pairs traversed
    net_level: int
    tangential: bool


def _from_point(p: PointW) -> SectionPoint:
    return SectionPoint(p.r, p.z)


def return_map(plug: Plug, sp: SectionPoint, horizon: float = 1e3,
               direction: int = 1) -> ReturnStep:
    """First return of the hybrid flow to the section (either direction)."""
    tr = flow_k(plug, sp.to_point(plug), horizon, direction=direction,
                record_sections=True, stop_after_sections=1)
    if tr.outcome != "section-stop":
        raise EscapedPlug(f"orbit from {sp} left the plug ({tr.outcome})")
    hit = tr.section_hits[0]
    trans = tuple((e.kind, e.face) for e in tr.transitions)
    net = sum(+1 if k == "secondary-entry" else -1 for k, _ in trans)
    if direction < 0:
        net = -net
    return ReturnStep(SectionPoint(hit.r, hit.z), hit.time, trans, net, hit.tangential)


def apply_generator(plug: Plug, tag: GeneratorTag, sp: SectionPoint,
                    horizon: float = 1e3) -> SectionPoint:
    """Apply one of the five generators; domain membership is decided from
    the recorded transition summary, never from section geometry alone."""
    direction = -1 if tag.inverse else 1
    if tag.name == "psi":
        res = wilson_return_map(plug, sp.to_point(plug), horizon, direction=direction)
        if res.escaped or res.point is None:
            raise NotInDomain(f"psi undefined at {sp}: Wilson orbit escapes")
        return _from_point(res.point)
    step = return_map(plug, sp, horizon, direction=direction)
    want_kind = "secondary-entry" if tag.name.endswith("plus") else "secondary-exit"
    want_face = 1 if tag.name.startswith("phi1") else 2
    if len(step.transitions) != 1 or step.transitions[0] != (want_kind, want_face):
        raise NotInDomain(
            f"{tag} undefined at {sp}: transition summary {step.transitions}"
        )
    return step.point


def apply_word(plug: Plug, word, sp: SectionPoint, horizon: float = 1e3) -> SectionPoint:
    """Apply a composition (right-to-left list of GeneratorTag)."""
    q = sp
    for tag in reversed(list(word)):
        q = apply_generator(plug, tag, q, horizon)
    return q


@dataclass(frozen=True)
class Factorization:
    tag: GeneratorTag | None
    status: str                 # ok | radius-band-violated | not-single-step


def generator_factorization(plug: Plug, p: SectionPoint, q: SectionPoint,
                            horizon: float = 1e3, tol: float = 1e-6) -> Factorization:
    """Identify the generator realizing the return step p -> q.

    Requires 2 <= radius <= r_e along the step; outside that band the
    factorization legitimately fails (flagged, not an error).
    """
    tr = flow_k(plug, p.to_point(plug), horizon, record_sections=True,
                stop_after_sections=1)
    if tr.outcome != "section-stop":
        return Factorization(None, "escapes")
    hit = tr.section_hits[0]
    if abs(hit.r - q.r) > tol or abs(hit.z - q.z) > tol:
        return Factorization(None, "not-the-return-step")
    radii = [r for r, _, _ in tr.arcs]
    if any(r > plug.r_exceptional + 1e-12 or r < 2.0 - 1e-9 for r in radii):
        return Factorization(None, "radius-band-violated")
    trans = [(e.kind, e.face) for e in tr.transitions]
    if not trans:
        return Factorization(GeneratorTag("psi"), "ok")
    if len(trans) == 1:
        kind, face = trans[0]
        name = f"phi{face}_" + ("plus" if kind == "secondary-entry" else "minus")
        return Factorization(GeneratorTag(name), "ok")
    # multiple transitions inside the radius band: the step is a Wilson
    # return assembled from short-cuts
    res = wilson_return_map(plug, p.to_point(plug), horizon)
    if (not res.escaped and res.point is not None
            and abs(res.point.r - q.r) <= 10 * tol
            and abs(res.point.z - q.z) <= 10 * tol):
        return Factorization(GeneratorTag("psi"), "ok")
    return Factorization(None, "not-single-step")


@dataclass(frozen=True)
class GapStats:
    max_gap: float
    mean_gap: float
    count: int
    gaps: tuple


def syndetic_stats(trace: OrbitTrace, r_max: float | None = None,
                   t_total: float | None = None) -> GapStats:
    """Gap statistics of the section-crossing times of a trace.

    With ``r_max`` the crossings are restricted to radius < r_max (the
    band visible to the generator pseudo-star-group).
    """
    times = [h.time for h in trace.section_hits
             if r_max is None or h.r < r_max]
    t_end = t_total if t_total is not None else trace.t_final
    pts = [0.0] + sorted(times) + [t_end]
    gaps = tuple(b - a for a, b in zip(pts, pts[1:]))
    if not gaps:
        return GapStats(math.inf, math.inf, 0, ())
    return GapStats(max(gaps), sum(gaps) / len(gaps), len(times), gaps)


# --- continuity domains of the return-map powers --------------------------

def _orbit_code(plug: Plug, z0: float, n: int, horizon: float) -> tuple:
    """Symbol sequence of the return orbit of (2, z0): for each step the
    sign of z and the transition summary, both directions, |k| <= n."""
    code = []
    for direction in (1, -1):
        sp = SectionPoint(2.0, z0)
        for _ in range(n):
            try:
                step = return_map(plug, sp, horizon, direction=direction)
            except EscapedPlug:
                code.append(("esc",))
                break
            code.append((step.point.z >= 0.0, step.transitions))
            sp = step.point
    return tuple(code)


def continuity_domains(plug: Plug, n: int, resolution: int = 400,
                       z_lo: float = -1.0, z_hi: float = 1.0,
                       horizon: float = 1e3, refine: int = 12) -> dict:
    """Estimate the number of maximal continuity intervals of the return
    map powers on the core segment of the section.

    Cell boundaries are pullbacks of the tangency line z = 0; they are
    located by bisecting on code changes along a fine sample.
    """
    if n == 0:
        return {"count": 1, "boundaries": [], "resolution_limited": False}
    zs = np.linspace(z_lo + 1e-6, z_hi - 1e-6, resolution)
    codes = [_orbit_code(plug, float(z), n, horizon) for z in zs]
    boundaries = []
    for i in range(len(zs) - 1):
        if codes[i] != codes[i + 1]:
            lo, hi = float(zs[i]), float(zs[i + 1])
            clo = codes[i]
            for _ in range(refine):
                mid = 0.5 * (lo + hi)
                if _orbit_code(plug, mid, n, horizon) == clo:
                    lo = mid
                else:
                    hi = mid
            boundaries.append(0.5 * (lo + hi))
    limited = any(b2 - b1 < 2.0 * (zs[1] - zs[0]) for b1, b2 in zip(boundaries, boundaries[1:]))
    return {
        "count": len(boundaries) + 1,
        "boundaries": boundaries,
        "resolution_limited": limited,
    }


def aux_section_angles(plug: Plug, count: int = 5) -> list[float]:
    """Auxiliary section angles avoiding the face footprints and discs."""
    forbidden = []
    for ins in plug.insertions:
        forbidden.append((ins.face_center, ins.footprint_halfwidth))
        forbidden.append((ins.zeta, ins.arcs.arc_halfwidth))
    out = []
    k = 0
    while len(out) < count and k < 1000:
        cand = (plug.section_angle + (k + 1) * 2.0 * math.pi / (count + 2)) % (2 * math.pi)
        k += 1
        ok = all(abs(((cand - c + math.pi) % (2 * math.pi)) - math.pi) > w + 0.05
                 for c, w in forbidden)
        if ok:
            out.append(cand)
    return out
