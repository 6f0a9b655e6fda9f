"""Hybrid plug flow: Wilson arcs alternating with insertion jumps.

Forward rules:
  * entry-face crossing -> jump through the face map to the bottom face
    of the domain disc (level +1);
  * top-face hit inside a domain disc -> jump back to the matching entry
    face point and continue just past it (level -1), which realizes the
    exit face as the tau_ins-flow image of the entry face;
  * top-face hit outside the discs -> primary exit (stop).
Backward rules are the exact inverses (field negated).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import _kernel as K
from .insertion import OutOfFootprint, wrap_angle
from .plug import Plug
from .wilson import PointW

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TransitionEvent:
    kind: str                  # primary-entry | primary-exit | secondary-entry | secondary-exit
    face: int                  # 1 or 2 for secondary events, 0 otherwise
    time: float
    point_before: PointW
    point_after: PointW | None
    level_after: int
    shortcut: bool = False


@dataclass(frozen=True)
class SectionHit:
    time: float
    r: float
    z: float
    level: int
    tangential: bool = False


@dataclass
class OrbitTrace:
    start: PointW
    direction: int
    events: list = field(default_factory=list)
    section_hits: list = field(default_factory=list)
    arcs: list = field(default_factory=list)       # (r, t0, t1)
    outcome: str = "horizon"                       # exit-top | exit-bottom | horizon | section-stop | stalled
    final_point: PointW | None = None
    t_final: float = 0.0
    tangential: bool = False
    shortcuts: int = 0
    facing_residual: float = 0.0   # worst matched-exit deviation before restoration

    @property
    def trapped(self) -> bool:
        return self.outcome == "horizon"

    @property
    def transitions(self):
        return [e for e in self.events if e.kind.startswith("secondary")]

    def min_radius(self) -> float:
        return min(r for r, _, _ in self.arcs)

    def max_radius(self) -> float:
        return max(r for r, _, _ in self.arcs)

    def level_range(self) -> tuple[int, int]:
        levels = [0] + [e.level_after for e in self.events]
        return min(levels), max(levels)


def level_function(trace: OrbitTrace, t: float) -> int:
    """n_x(t): running secondary-entry minus secondary-exit count."""
    n = 0
    for e in trace.events:
        if e.time <= t and e.kind.startswith("secondary"):
            n = e.level_after
        elif e.time > t:
            break
    return n


def facing_point(p: PointW) -> PointW:
    """The facing point (r, theta, -z)."""
    return PointW(p.r, p.theta, -p.z)


def wrap_pi_diff(a: float, b: float) -> float:
    """Angle difference wrapped to (-pi, pi]."""
    y = math.fmod(a - b + math.pi, TWO_PI)
    if y <= 0.0:
        y += TWO_PI
    return y - math.pi


def flow_k(
    plug: Plug,
    p: PointW,
    horizon: float,
    *,
    direction: int = 1,
    record_sections: bool = False,
    stop_after_sections: int | None = None,
    shortcut_facing: bool = False,
    start_is_primary_entry: bool = False,
) -> OrbitTrace:
    """Run the hybrid flow from p until exit, horizon, or section stop."""
    par = plug.kernel_params()
    tau = plug.insertion(1).tube_time
    tr = OrbitTrace(start=p, direction=direction)
    if start_is_primary_entry:
        for ins in plug.insertions:
            if ins.arcs.contains(p.r, p.theta):
                raise ValueError("primary entries must start outside the domain discs")
        tr.events.append(
            TransitionEvent("primary-entry", 0, 0.0, p, p, 0)
        )

    guards = K.GUARD_FACES
    if record_sections or stop_after_sections is not None:
        guards |= K.GUARD_SECTION

    r = p.r
    th = p.theta
    z = p.z
    t = 0.0
    level = 0
    arc_t0 = 0.0
    n_sections = 0
    suppress_until = -1.0
    d = float(direction)
    # pending insertion crossings nest LIFO; a matched exit restores the
    # recorded entry point exactly so numerical noise cannot compound
    # through nested excursions
    pending: list = []

    while t < horizon:
        bits = guards
        if t < suppress_until:
            bits &= ~K.GUARD_FACES
            t_end = min(horizon, suppress_until)
        else:
            t_end = horizon
        status, th, z, t = K.advance(r, th, z, t, t_end, d, bits, par)

        if status == K.TIME_UP:
            if t >= horizon:
                break
            continue  # suppression window ended; re-enable face guards

        if status == K.HIT_SECTION:
            fval = plug.wilson.f(r, z)
            tang = abs(fval) < 1e-8
            if tang:
                tr.tangential = True
            tr.section_hits.append(SectionHit(t, r, z, level, tang))
            n_sections += 1
            if stop_after_sections is not None and n_sections >= stop_after_sections:
                tr.outcome = "section-stop"
                tr.arcs.append((r, arc_t0, t))
                tr.final_point = PointW(r, wrap_angle(th), z)
                tr.t_final = t
                return tr
            continue

        if status in (K.HIT_FACE1, K.HIT_FACE2):
            i = 1 if status == K.HIT_FACE1 else 2
            ins = plug.insertion(i)
            before = PointW(r, wrap_angle(th), z)
            if d > 0:
                # forward secondary entry through face i
                big_r, big_th = ins.face_map(r, wrap_angle(th))
                if shortcut_facing and big_r > 2.0:
                    # facing short-cut: entry + facing exit collapsed
                    level += 1
                    tr.events.append(TransitionEvent(
                        "secondary-entry", i, t, before,
                        PointW(big_r, big_th, -2.0), level, shortcut=True))
                    level -= 1
                    tr.events.append(TransitionEvent(
                        "secondary-exit", i, t, PointW(big_r, big_th, 2.0),
                        before, level, shortcut=True))
                    tr.shortcuts += 1
                    suppress_until = t + tau
                    continue
                tr.arcs.append((r, arc_t0, t))
                arc_t0 = t
                level += 1
                after = PointW(big_r, big_th, -2.0)
                tr.events.append(TransitionEvent(
                    "secondary-entry", i, t, before, after, level))
                pending.append((i, before, big_r, big_th))
                r, th, z = big_r, big_th, -2.0
                continue
            # backward: crossing the face surface inverts a forward exit
            big_r, big_th = ins.face_map(r, wrap_angle(th))
            tr.arcs.append((r, arc_t0, t))
            arc_t0 = t
            level += 1
            after = PointW(big_r, big_th, 2.0)
            tr.events.append(TransitionEvent(
                "secondary-exit", i, t, before, after, level))
            pending.append((i, before, big_r, big_th))
            r, th, z = big_r, big_th, 2.0
            continue

        if status == K.HIT_TOP:
            before = PointW(r, wrap_angle(th), 2.0)
            hit_disc = 0
            for ins in plug.insertions:
                if ins.arcs.contains(r, before.theta):
                    hit_disc = ins.index
                    break
            if hit_disc == 0 or d < 0:
                tr.outcome = "exit-top"
                tr.arcs.append((r, arc_t0, t))
                tr.events.append(TransitionEvent(
                    "primary-exit", 0, t, before, None, level))
                tr.final_point = before
                tr.t_final = t
                return tr
            # forward secondary exit: jump back to the matching face point
            ins = plug.insertion(hit_disc)
            after = None
            if pending:
                pi, pbefore, pr, pth = pending[-1]
                resid = math.hypot(r - pr, wrap_pi_diff(before.theta, pth))
                if pi == hit_disc and resid < 1e-5:
                    pending.pop()
                    tr.facing_residual = max(tr.facing_residual, resid)
                    after = pbefore
            if after is None:
                try:
                    rp, thp = ins.face_map_inverse(r, before.theta)
                except OutOfFootprint:
                    tr.outcome = "stalled"
                    tr.final_point = before
                    tr.t_final = t
                    return tr
                after = PointW(rp, thp, ins.height(rp, thp))
            tr.arcs.append((r, arc_t0, t))
            arc_t0 = t
            level -= 1
            tr.events.append(TransitionEvent(
                "secondary-exit", hit_disc, t, before, after, level))
            r, th, z = after.r, after.theta, after.z
            suppress_until = t + tau
            continue

        if status == K.HIT_BOTTOM:
            before = PointW(r, wrap_angle(th), -2.0)
            hit_disc = 0
            for ins in plug.insertions:
                if ins.arcs.contains(r, before.theta):
                    hit_disc = ins.index
                    break
            if hit_disc == 0 or d > 0:
                tr.outcome = "exit-bottom"
                tr.arcs.append((r, arc_t0, t))
                tr.events.append(TransitionEvent(
                    "primary-entry" if d < 0 else "primary-exit",
                    0, t, before, None, level))
                tr.final_point = before
                tr.t_final = t
                return tr
            # backward secondary entry inverse: bottom disc -> face point
            ins = plug.insertion(hit_disc)
            after = None
            if pending:
                pi, pbefore, pr, pth = pending[-1]
                resid = math.hypot(r - pr, wrap_pi_diff(before.theta, pth))
                if pi == hit_disc and resid < 1e-5:
                    pending.pop()
                    tr.facing_residual = max(tr.facing_residual, resid)
                    after = pbefore
            if after is None:
                try:
                    rp, thp = ins.face_map_inverse(r, before.theta)
                except OutOfFootprint:
                    tr.outcome = "stalled"
                    tr.final_point = before
                    tr.t_final = t
                    return tr
                after = PointW(rp, thp, ins.height(rp, thp))
            tr.arcs.append((r, arc_t0, t))
            arc_t0 = t
            level -= 1
            tr.events.append(TransitionEvent(
                "secondary-entry", hit_disc, t, before, after, level))
            r, th, z = after.r, after.theta, after.z
            continue

        if status == K.STALLED:
            tr.outcome = "stalled"
            break

    tr.arcs.append((r, arc_t0, t))
    tr.final_point = PointW(r, wrap_angle(th), z)
    tr.t_final = t
    return tr


@dataclass(frozen=True)
class OrbitClass:
    category: str              # finite | forward-trapped | backward-trapped | infinite
    conclusive: bool
    forward: OrbitTrace
    backward: OrbitTrace

    @property
    def diagnostics(self) -> dict:
        return {
            "min_radius": min(self.forward.min_radius(), self.backward.min_radius()),
            "max_radius": max(self.forward.max_radius(), self.backward.max_radius()),
            "level_range": (
                min(self.forward.level_range()[0], -self.backward.level_range()[1]),
                max(self.forward.level_range()[1], -self.backward.level_range()[0]),
            ),
        }


def classify_orbit(plug: Plug, p: PointW, horizon: float = 1e4,
                   shortcut_facing: bool = False) -> OrbitClass:
    """Integrate both ways and classify by escape events."""
    fwd = flow_k(plug, p, horizon, direction=1, shortcut_facing=shortcut_facing)
    bwd = flow_k(plug, p, horizon, direction=-1, shortcut_facing=shortcut_facing)
    ffree = fwd.outcome == "exit-top"
    bfree = bwd.outcome == "exit-bottom"
    if ffree and bfree:
        cat = "finite"
    elif ffree:
        cat = "backward-trapped"
    elif bfree:
        cat = "forward-trapped"
    else:
        cat = "infinite"
    conclusive = ffree and bfree
    return OrbitClass(cat, conclusive, fwd, bwd)
