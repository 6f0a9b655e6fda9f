"""Propeller traces in the section rectangle: arcs, nested ellipses,
envelope curves, notch classification, and the transversal point set.

Every curve is reconstructed from seed parameters carried along the
flow: a base curve in the bottom face is sampled, each seed is flowed
(pure Wilson flow, with face hits recorded but not acted on), and the
j-th section crossings of the seeds assemble into the j-th ring of the
propeller trace.  The upper halves of rings are exact mirror images of
the lower halves by the field's z-anti-symmetry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernel as K
from .insertion import wrap_angle, wrap_pi
from .kflow import flow_k
from .plug import Plug
from .wilson import PointW

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CurveLabel:
    family: str                 # gamma | lambda | kappa | chi | Gamma | Lambda | G | L
    pairs: tuple = ()           # insertion history ((i_1, l_1), ...)
    final: int = 0              # last ring index (label convention: a-offset applied)

    @property
    def level(self) -> int:
        return len(self.pairs) + 1

    def text(self) -> str:
        inner = ";".join(f"{i},{l}" for i, l in self.pairs)
        if inner:
            return f"{self.family}0({inner};{self.final})"
        return f"{self.family}0({self.final})"


@dataclass
class PlanarCurve:
    label: CurveLabel
    samples: np.ndarray          # (n, 2) array of (r, z)
    closed: bool
    tip_r: float = math.nan      # radius of the z=0 crossing (transversal point)
    vertex_lo: tuple | None = None   # (r, z) endpoint / vertex below the core
    vertex_hi: tuple | None = None
    truncated: bool = False

    def arclength(self) -> float:
        d = np.diff(self.samples, axis=0)
        return float(np.hypot(d[:, 0], d[:, 1]).sum())

    def contains(self, r: float, z: float) -> bool:
        """Point-in-region test for closed curves (even-odd rule)."""
        from matplotlib.path import Path

        return bool(Path(self.samples).contains_point((r, z)))


@dataclass
class SeedTrace:
    s: float
    r: float
    theta: float
    below: list                  # (r, z) section crossings before the tip
    above: list                  # section crossings after the tip (full mode)
    face_hits: dict              # i -> list of (r, theta, z, t)
    reached_tip: bool
    truncated: bool


def seed_trace(plug: Plug, s: float, r: float, theta: float, *,
               max_below: int = 80, full: bool = False,
               t_max: float = 5e4) -> SeedTrace:
    """Wilson-flow one bottom-face seed, recording section crossings and
    face hits (hits are recorded, never acted on)."""
    par = plug.kernel_params()
    guards = K.GUARD_SECTION | K.GUARD_FACES | K.GUARD_ANNULUS
    th = theta
    z = -2.0
    t = 0.0
    below: list = []
    above: list = []
    hits: dict = {1: [], 2: []}
    reached = False
    truncated = False
    while True:
        status, th, z, t = K.advance(r, th, z, t, t_max, 1.0, guards, par)
        if status == K.HIT_SECTION:
            (above if reached else below).append((r, z))
            if not full and not reached and len(below) >= max_below:
                truncated = True
                break
        elif status in (K.HIT_FACE1, K.HIT_FACE2):
            i = 1 if status == K.HIT_FACE1 else 2
            hits[i].append((r, wrap_angle(th), z, t))
        elif status == K.HIT_ANNULUS:
            reached = True
            if not full:
                break
        elif status == K.HIT_TOP:
            break
        else:  # horizon / stalled
            truncated = True
            break
    return SeedTrace(s, r, theta, below, above, hits, reached, truncated)


@dataclass
class BaseCurve:
    """A sampled curve in the bottom face, possibly cyclic."""

    family: str
    pairs: tuple
    s: np.ndarray
    r: np.ndarray
    theta: np.ndarray
    cyclic: bool = False
    vertex_s: float | None = None     # parameter of the minimal-radius point


def base_parabola(plug: Plug, i: int, n: int = 400) -> BaseCurve:
    """The full parabolic base curve: image under the face map of the
    core-radius line of entry face i.  Its two halves are the simple base
    curves; the midpoint is the special point."""
    ins = plug.insertion(i)
    w = ins.footprint_halfwidth
    dth = np.linspace(-w, w, n)
    rr = np.empty(n)
    tt = np.empty(n)
    for k, d in enumerate(dth):
        big_r, big_th = ins.face_map(2.0, ins.face_center + d)
        rr[k] = big_r
        tt[k] = big_th
    s = np.linspace(0.0, 2.0, n)
    fam = "Gamma" if i == 1 else "Lambda"
    vtx = float(s[np.argmin(rr)])
    return BaseCurve(fam, (), s, rr, tt, cyclic=False, vertex_s=vtx)


def base_half(plug: Plug, i: int, half: str, n: int = 200) -> BaseCurve:
    """One half of the parabolic base: gamma/lambda is the half whose face
    heights lie above the periodic orbit, kappa/chi the other."""
    ins = plug.insertion(i)
    w = ins.footprint_halfwidth
    # face height crosses the periodic orbit at the face center; for both
    # insertions the core-cylinder half lies at theta' <= center
    if half in ("gamma", "lambda"):
        dth = np.linspace(-w, 0.0, n)
    else:
        dth = np.linspace(0.0, w, n)
    rr = np.empty(n)
    tt = np.empty(n)
    for k, d in enumerate(dth):
        big_r, big_th = ins.face_map(2.0, ins.face_center + d)
        rr[k] = big_r
        tt[k] = big_th
    order = np.argsort(-rr)  # deep end (small radius) last
    rr, tt = rr[order], tt[order]
    fam = half
    return BaseCurve(fam, (), np.linspace(0, 1, n), rr, tt, vertex_s=1.0)


def _refine(plug: Plug, base: BaseCurve, traces: list, max_below: int,
            jump: float = 0.02, rounds: int = 2) -> list:
    """Insert midpoint seeds where the first-ring crossing jumps."""
    for _ in range(rounds):
        inserts = []
        for a, b in zip(traces, traces[1:]):
            if not a.below or not b.below:
                continue
            d = math.hypot(a.below[0][0] - b.below[0][0],
                           a.below[0][1] - b.below[0][1])
            if d > jump or abs(len(a.below) - len(b.below)) > 2:
                inserts.append((a, b))
        if not inserts:
            break
        for a, b in inserts:
            sm = 0.5 * (a.s + b.s)
            rm = 0.5 * (a.r + b.r)
            thm = a.theta + 0.5 * wrap_pi(b.theta - a.theta)
            traces.append(seed_trace(plug, sm, rm, thm, max_below=max_below))
        traces.sort(key=lambda tr: tr.s)
    return traces


def trace_base(plug: Plug, base: BaseCurve, *, max_rings: int = 40,
               radius_floor: float = 2.0 + 1e-4, refine: bool = True,
               special_cap: int | None = None) -> list[SeedTrace]:
    """Flow all seeds of a base curve (half-transit, mirror completion)."""
    cap = special_cap if special_cap is not None else max_rings + 2
    traces = []
    for s, r, th in zip(base.s, base.r, base.theta):
        r = float(r)
        if r < 2.0 - 1e-9:
            continue
        r = max(r, 2.0)
        if r < radius_floor:
            if r <= 2.0:
                # core seeds never reach the tip: cap the crossing count
                traces.append(seed_trace(plug, float(s), r, float(th),
                                         max_below=cap))
            continue
        traces.append(seed_trace(plug, float(s), r, float(th),
                                 max_below=max_rings + 2))
    if refine:
        traces = _refine(plug, base, traces, max_rings + 2)
    return traces


def assemble_rings(base: BaseCurve, traces: list, label_family: str,
                   pairs: tuple, a_index: int, max_rings: int,
                   closed: bool) -> list[PlanarCurve]:
    """Group the j-th crossings into rings; mirror for the upper halves.

    A ring of a two-sided (parabolic) base is a genuinely closed curve
    only when its shallow turnaround lies strictly inside the base; rings
    running off the base endpoints are emitted open and flagged.
    """
    out = []
    n_tr = len(traces)
    for j in range(max_rings):
        idx = [k for k, tr in enumerate(traces) if len(tr.below) > j]
        if len(idx) < 2:
            break
        lower = [(traces[k].s, traces[k].below[j][0], traces[k].below[j][1])
                 for k in idx]
        lower.sort(key=lambda p: p[0])
        pts = np.array([(r, z) for _, r, z in lower])
        interior = (0 not in idx) and (n_tr - 1 not in idx)
        ring_closed = closed and interior
        # tip estimate: the shallow-end crossing approaches the core plane
        tip_r = pts[np.argmax(pts[:, 1]), 0]
        upper = pts[::-1].copy()
        upper[:, 1] = -upper[:, 1]
        if ring_closed:
            samples = np.vstack([pts, upper, pts[:1]])
        else:
            samples = np.vstack([pts, upper])
        kv = int(np.argmin(pts[:, 0]))
        curve = PlanarCurve(
            label=CurveLabel(label_family, pairs, a_index + j),
            samples=samples,
            closed=ring_closed,
            tip_r=float(tip_r),
            vertex_lo=(float(pts[kv, 0]), float(pts[kv, 1])),
            vertex_hi=(float(pts[kv, 0]), float(-pts[kv, 1])),
            truncated=any(tr.truncated for tr in traces),
        )
        out.append(curve)
    return out


def special_ladder_hits(plug: Plug, i_from: int, face: int, count: int,
                        backward: bool = False) -> list[tuple]:
    """Face hits of the special orbit continuation: the points where the
    core-radius orbit of the insertion image meets an entry face."""
    ins = plug.insertion(i_from)
    par = plug.kernel_params()
    th = ins.zeta
    z = 2.0 if backward else -2.0
    t = 0.0
    d = -1.0 if backward else 1.0
    hits = []
    want = K.HIT_FACE1 if face == 1 else K.HIT_FACE2
    while len(hits) < count:
        status, th, z, t = K.advance(2.0, th, z, t, t + 5e3, d, K.GUARD_FACES, par)
        if status == want:
            hits.append((2.0, wrap_angle(th), z, t))
        elif status not in (K.HIT_FACE1, K.HIT_FACE2):
            break
    return hits


def face_hit_curve(traces: list, face: int, k: int) -> list[tuple]:
    """The k-th face hits over the seeds: a sampled curve in the face."""
    pts = [(tr.s, tr.face_hits[face][k]) for tr in traces
           if len(tr.face_hits[face]) > k]
    pts.sort(key=lambda p: p[0])
    return pts


def child_base(plug: Plug, traces: list, i_parent_pairs: tuple, face: int,
               k: int) -> BaseCurve | None:
    """Map the k-th face-hit curve through the face map: the base curve of
    the level-(n+1) propeller with history pairs + ((face, k),)."""
    ins = plug.insertion(face)
    pts = face_hit_curve(traces, face, k)
    if len(pts) < 3:
        return None
    ss, rr, tt = [], [], []
    for s, (r, th, z, _t) in pts:
        try:
            big_r, big_th = ins.face_map(r, th)
        except Exception:
            continue
        ss.append(s)
        rr.append(big_r)
        tt.append(big_th)
    if len(ss) < 3:
        return None
    fam = "Gamma" if face == 1 else "Lambda"
    rr = np.array(rr)
    base = BaseCurve(fam, i_parent_pairs + ((face, k),), np.array(ss), rr,
                     np.array(tt), vertex_s=float(ss[int(np.argmin(rr))]))
    return base


@dataclass
class EllipseFamilies:
    level1: dict                 # family name -> list[PlanarCurve]
    level2: dict                 # (family, i1, l1) -> list[PlanarCurve]
    a_index: int

    def all_curves(self) -> list[PlanarCurve]:
        out = []
        for v in self.level1.values():
            out.extend(v)
        for v in self.level2.values():
            out.extend(v)
        return out


def trace_double_ellipses(plug: Plug, *, max_rings: int = 12,
                          level_cap: int = 2, l1_values: tuple = (0, 1),
                          n_seeds: int = 320, a_index: int = -1,
                          radius_floor: float = 2.0 + 1e-4) -> EllipseFamilies:
    """Closed nested rings of the two double propellers and (optionally)
    their level-2 children through both faces."""
    level1 = {}
    traces_by_i = {}
    for i, fam in ((1, "Gamma"), (2, "Lambda")):
        base = base_parabola(plug, i, n_seeds)
        # full transits so both faces' hit curves are collected
        traces = [seed_trace(plug, float(s), float(r), float(th), full=True)
                  for s, r, th in zip(base.s, base.r, base.theta)
                  if r >= max(radius_floor, 2.0 + 2e-4)]
        traces = _refine(plug, base, traces, max_rings + 2)
        traces_by_i[i] = traces
        level1[fam] = assemble_rings(base, traces, fam, (), a_index,
                                     max_rings, closed=True)
    level2 = {}
    if level_cap >= 2:
        for i1 in (1, 2):
            for face in (1, 2):
                fam = "Gamma" if i1 == 1 else "Lambda"
                for l1 in l1_values:
                    cb = child_base(plug, traces_by_i[i1], (), face, l1)
                    if cb is None:
                        continue
                    traces = trace_base(plug, cb, max_rings=max_rings,
                                        radius_floor=radius_floor)
                    rings = assemble_rings(cb, traces, fam, ((face, l1),),
                                           a_index, max_rings, closed=True)
                    level2[(fam, face, l1)] = rings
    return EllipseFamilies(level1, level2, a_index)


def closed_rings(rings: list[PlanarCurve]) -> list[PlanarCurve]:
    return [c for c in rings if c.closed]


@dataclass
class SimpleFamilies:
    curves: dict                 # (family, pairs) -> list[PlanarCurve]
    a_index: int

    def all_curves(self) -> list[PlanarCurve]:
        out = []
        for v in self.curves.values():
            out.extend(v)
        return out


def trace_m0(plug: Plug, *, level_cap: int = 2, max_rings: int = 12,
             l1_values: tuple = (0, 1), n_seeds: int = 200,
             a_index: int = -1,
             radius_floor: float = 2.0 + 1e-4) -> SimpleFamilies:
    """Arcs of the simple propellers: the section trace of the orbit of
    the notched core cylinder, labeled by insertion history."""
    curves = {}
    for i, fam in ((1, "gamma"), (2, "lambda")):
        base = base_half(plug, i, fam, n_seeds)
        traces = trace_base(plug, base, max_rings=max_rings,
                            radius_floor=radius_floor)
        curves[(fam, ())] = assemble_rings(base, traces, fam, (), a_index,
                                           max_rings, closed=False)
        if level_cap >= 2:
            for face in (1, 2):
                for l1 in l1_values:
                    cb = child_base(plug, traces, (), face, l1)
                    if cb is None:
                        continue
                    tr2 = trace_base(plug, cb, max_rings=max_rings,
                                     radius_floor=radius_floor)
                    curves[(fam, ((face, l1),))] = assemble_rings(
                        cb, tr2, fam, ((face, l1),), a_index, max_rings,
                        closed=False)
    return SimpleFamilies(curves, a_index)


# --- envelope curves -------------------------------------------------------

def base_envelope(plug: Plug, i: int, n: int = 240) -> BaseCurve:
    """The envelope base loop: image of the boundary of the part of the
    face with jump radius >= 2.  It contains two arcs of the core circle
    (the image of the tangency locus) joined at the special point."""
    ins = plug.insertion(i)
    w = ins.footprint_halfwidth
    wr = ins.footprint_radial
    prof = ins.profile

    def tangency_halfwidth(rp):
        gap = 2.0 - prof(rp)
        return math.sqrt(gap / ins.bend_coeff) if gap > 0 else 0.0

    # radius where the below-core region swallows the whole band
    lo, hi = 2.0 - wr, 2.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if tangency_halfwidth(mid) > w - ins.offset_coeff * abs(mid - 2.0):
            lo = mid
        else:
            hi = mid
    r_cut = 0.5 * (lo + hi)

    pieces = []
    m = max(8, n // 6)
    # left band edge, outer edge, right band edge (face coordinates)
    rs = np.linspace(r_cut, 2.0 + wr, m)
    pieces.append([(float(r), ins.face_center - w) for r in rs])
    ths = np.linspace(-w, w, m)
    pieces.append([(2.0 + wr, ins.face_center + float(d)) for d in ths])
    rs = np.linspace(2.0 + wr, r_cut, m)
    pieces.append([(float(r), ins.face_center + w) for r in rs])
    # tangency-locus branches meeting at the special point
    rs = np.linspace(r_cut, 2.0, 2 * m)
    branch_r = [(float(r), ins.vertex_angle(r) + tangency_halfwidth(float(r)))
                for r in rs]
    branch_l = [(float(r), ins.vertex_angle(r) - tangency_halfwidth(float(r)))
                for r in rs[::-1]]
    pieces.append(branch_r)
    pieces.append(branch_l)
    pts = [q for piece in pieces for q in piece]
    rr, tt = [], []
    for rp, thp in pts:
        thp = ins.face_center + max(-w, min(w, wrap_pi(thp - ins.face_center)))
        try:
            big_r, big_th = ins.face_map(rp, thp)
        except Exception:
            continue
        rr.append(big_r)
        tt.append(big_th)
    fam = "G" if i == 1 else "L"
    rr = np.array(rr)
    return BaseCurve(fam, (), np.linspace(0, 1, len(rr)), rr, np.array(tt),
                     cyclic=True)


def trace_envelopes(plug: Plug, *, max_rings: int = 10, n_seeds: int = 240,
                    a_index: int = -1,
                    radius_floor: float = 2.0 + 1e-4) -> dict:
    """Level-1 envelope traces G0(l), L0(l)."""
    out = {}
    for i, fam in ((1, "G"), (2, "L")):
        base = base_envelope(plug, i, n_seeds)
        traces = trace_base(plug, base, max_rings=max_rings,
                            radius_floor=radius_floor)
        out[fam] = assemble_rings(base, traces, fam, (), a_index,
                                  max_rings, closed=True)
    return out


@dataclass
class RegionClassifier:
    """The escape trichotomy on the section, from the level-1 curves."""

    envelopes: dict
    ellipses: EllipseFamilies

    def classify(self, r: float, z: float) -> dict:
        inside_env = []
        for fam, rings in self.envelopes.items():
            for c in rings:
                if c.contains(r, z):
                    inside_env.append(c.label)
        inside_ell = []
        for fam, rings in self.ellipses.level1.items():
            for c in rings:
                if c.contains(r, z):
                    inside_ell.append(c.label)
        if not inside_env:
            return {"level": 0, "prediction": "escapes-both-ways",
                    "envelopes": (), "ellipses": tuple(inside_ell)}
        matched = any(
            any(e.family in ("Gamma" if env.family == "G" else "Lambda",)
                and e.final == env.final for e in inside_ell)
            for env in inside_env)
        if matched:
            return {"level": len(inside_env), "prediction": "escapes-both-ways",
                    "envelopes": tuple(inside_env), "ellipses": tuple(inside_ell)}
        return {"level": len(inside_env), "prediction": "backward-radius-drop",
                "envelopes": tuple(inside_env), "ellipses": tuple(inside_ell)}


# --- notches and bubbles ---------------------------------------------------

@dataclass(frozen=True)
class NotchReport:
    kind: str                   # boundary | interior
    bubble_levels: tuple | None
    level_band: tuple | None    # predicted (n+1, N_hat+n) band for interior


def classify_notch(plug: Plug, face: int, curve_pts: list, base_level: int = 1,
                   n_hat: int | None = None, horizon: float = 2e5) -> NotchReport:
    """Classify a component of a propeller's face intersection.

    ``curve_pts`` holds (r', theta') face points.  A component with both
    endpoints on the footprint boundary is an interior notch and spawns a
    compact bubble, whose level range is measured by flowing it.
    """
    ins = plug.insertion(face)
    w = ins.footprint_halfwidth
    wr = ins.footprint_radial

    def on_boundary(rp, thp):
        dw = abs(wrap_pi(thp - ins.face_center))
        return (w - dw) < 1e-6 or (wr - abs(rp - 2.0)) < 1e-6

    b0 = on_boundary(*curve_pts[0])
    b1 = on_boundary(*curve_pts[-1])
    if not (b0 and b1):
        return NotchReport("boundary", None, None)
    # interior notch: flow the generated bubble and record its levels
    levels = []
    for rp, thp in curve_pts[:: max(1, len(curve_pts) // 12)]:
        big_r, big_th = ins.face_map(rp, thp)
        tr = flow_k(plug, PointW(big_r, big_th, -2.0), horizon)
        lo, hi = tr.level_range()
        levels.extend((lo, hi))
    if not levels:
        return NotchReport("interior", None, None)
    measured = (base_level + 1 + min(levels), base_level + 1 + max(levels))
    band = None
    if n_hat is not None:
        band = (base_level + 1, n_hat + base_level)
    return NotchReport("interior", measured, band)


# --- transversal sampling --------------------------------------------------

@dataclass(frozen=True)
class TransversalPoint:
    r: float
    label: CurveLabel | None     # None marks the level-0 base point


def cantor_transversal(plug: Plug, *, level_cap: int = 2,
                       families: SimpleFamilies | None = None,
                       **kw) -> list[TransversalPoint]:
    """Crossings of the simple curves with the core line z = 0, with the
    base point of the core cylinder at r = 2 included at level 0."""
    fams = families if families is not None else trace_m0(
        plug, level_cap=level_cap, **kw)
    pts = [TransversalPoint(2.0, None)]
    for (fam, pairs), curve_list in fams.curves.items():
        for c in curve_list:
            if math.isfinite(c.tip_r):
                pts.append(TransversalPoint(c.tip_r, c.label))
    return pts
