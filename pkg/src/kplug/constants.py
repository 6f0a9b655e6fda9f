"""Measured constants of a plug configuration.

Everything the experiments need that the construction does not fix in
closed form is measured here once per configuration: transit lengths,
winding numbers, the jump-radius ladder delta(r) and its escape count
N(r), arc-length bands, the vertical-approach bracket near the special
points, the capture constants of the wandering experiment, and the
separation gap used by the entropy constructions.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .kflow import flow_k
from .plug import Plug
from .section import GeneratorTag, SectionPoint, apply_generator
from .wilson import (
    PointW,
    escape_length_table,
    theta_advance,
    transit_length,
    wilson_return_map,
)

TWO_PI = 2.0 * math.pi


def involution(sp: SectionPoint) -> SectionPoint:
    """The z-reflection on the section; swaps matching arc endpoints."""
    return SectionPoint(sp.r, -sp.z)


def config_hash(plug: Plug) -> str:
    ins = []
    for m in plug.insertions:
        ins.append((m.index, m.zeta, m.footprint_halfwidth, m.footprint_radial,
                    m.face_slope, m.bend_coeff, m.offset_coeff,
                    m.angle_contraction, m.tube_time, m.profile.mode,
                    m.profile.c_rho, m.profile.lam))
    blob = repr((plug.wilson.eps0, plug.wilson.g_max, tuple(ins),
                 plug.tol.step_tol, plug.tol.event_tol, plug.tol.facing_tol))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class DerivedConstants:
    config: str = ""
    r_star: float = 0.0
    r_exceptional: float = 0.0
    theta_table: list = field(default_factory=list)      # (r, Theta(r))
    length_table: list = field(default_factory=list)     # (eps, L(eps))
    delta_table: list = field(default_factory=list)      # (r, delta(r))
    n_table: list = field(default_factory=list)          # (r0, N(r0))
    d_min: float = 0.0
    d_max: float = 0.0
    lambda_g: float = 0.0         # Taylor coefficient of g along the core line
    lambda1: float = 0.0          # Hessian lower bound of g on the well
    lambda2: float = 0.0          # Hessian upper bound
    lam1_step: float = 0.0        # dz/dt quadratic lower bound on the core
    lam2_step: float = 0.0
    mu1: float = 0.0              # vertical-approach bracket slopes
    mu2: float = 0.0
    b1: int = 0                   # bracket onset index
    u_g: float = 0.0
    l_g: float = 0.0
    eps1: float = 0.0
    eps3: float = 0.0
    delta3: float = 0.0
    matsumoto_c1: float = 0.0     # C' (capture window / sqrt(delta))
    matsumoto_c2: float = 0.0     # C'' (hit spacing / delta)
    delta_m: float = 0.0
    eps_hat0: float = 0.0         # separation gap between the two entry families
    nu_hat: float = 0.0           # syndetic gap bound (sampled)
    a_index: int = 0              # first curve index (<= 0)
    b_notches: int = 0            # interior notch count

    def delta_of(self, r: float) -> float:
        rs = np.array([x for x, _ in self.delta_table])
        ds = np.array([y for _, y in self.delta_table])
        return float(np.interp(r, rs, ds))

    def theta_of(self, r: float) -> float:
        rs = np.array([x for x, _ in self.theta_table])
        ts = np.array([y for _, y in self.theta_table])
        return float(np.interp(r, rs, ts))

    def winding_of(self, r: float) -> int:
        return int(math.floor(self.theta_of(r) / TWO_PI))

    def as_rows(self) -> list[tuple[str, float]]:
        rows = []
        for k, v in asdict(self).items():
            if isinstance(v, (int, float)):
                rows.append((k, float(v)))
        return rows


def delta_closed_form(plug: Plug, r: float) -> float:
    """delta(r) = min over insertions of the minimal jump radius on C(r)."""
    return min(ins.min_jump_radius(r) for ins in plug.insertions)


def iterate_escape_count(plug: Plug, r0: float, cap: int = 100000) -> int:
    """N(r0): least k with the k-th delta-iterate above R*."""
    r = r0
    n = 0
    while r <= plug.r_star and n < cap:
        r = delta_closed_form(plug, r)
        n += 1
    return n


def _psi(plug: Plug, sp: SectionPoint, horizon: float = 1e4) -> SectionPoint:
    res = wilson_return_map(plug, sp.to_point(plug), horizon)
    if res.escaped or res.point is None:
        raise RuntimeError(f"Wilson return escaped from {sp}")
    return SectionPoint(res.point.r, res.point.z)


def vertical_approach_ladder(plug: Plug, j: int = 1, count: int = 160) -> list[SectionPoint]:
    """The points psi^l(phi_j+(omega_j)) marching up toward z = -1."""
    omega = SectionPoint(2.0, -1.0 if j == 1 else 1.0)
    start = omega if j == 1 else involution(omega)  # phi2+ needs the upper point
    tag = GeneratorTag(f"phi{j}_plus")
    q = apply_generator(plug, tag, omega if j == 1 else omega)
    out = [q]
    for _ in range(count - 1):
        q = _psi(plug, q)
        if q.z >= -1.0:
            break
        out.append(q)
    return out


def measure_vertical_bracket(plug: Plug, count: int = 160):
    """Fit y = -1/(z+1) ~ mu*l + C on the ladder; returns
    (mu1, mu2, b1) with mu1 < mu2 bracketing all tail slopes and b1 the
    least index from which the bracket -1/(mu1 l) < z+1 < -1/(mu2 l) holds."""
    ladder = vertical_approach_ladder(plug, 1, count)
    ys = np.array([-1.0 / (p.z + 1.0) for p in ladder])
    slopes = np.diff(ys)
    tail = slopes[len(slopes) // 4:]
    mu1 = float(tail.min()) * 0.95
    mu2 = float(tail.max()) * 1.05
    b1 = len(ladder)
    ok_from = None
    for idx, p in enumerate(ladder):
        l = idx + 1  # 1-based ladder index
        lo = -1.0 - 1.0 / (mu1 * l)
        hi = -1.0 - 1.0 / (mu2 * l)
        if lo < p.z < hi:
            if ok_from is None:
                ok_from = l
        else:
            ok_from = None
    if ok_from is not None:
        b1 = ok_from
    return mu1, mu2, b1, ladder


def measure_matsumoto(plug: Plug, deltas=None) -> tuple[float, float, float]:
    """Capture constants: C' (window length / sqrt(delta)), C'' (hit
    spacing / delta), and the capture constant delta_M = (C'/C'')^2."""
    ins = plug.insertion(1)
    if deltas is None:
        deltas = [2e-4, 5e-4, 1e-3, 2e-3, 5e-3, 1e-2]
    c1 = math.inf
    c2 = 0.0
    for d in deltas:
        rp = 2.0 - d
        gap = 2.0 - ins.profile(rp)
        if gap <= 0.0:
            continue
        half = math.sqrt(gap / ins.bend_coeff)
        z_window = 2.0 * ins.face_slope * half
        c1 = min(c1, z_window / math.sqrt(d))
        # measured per-revolution climb at the window edge
        z_edge = -1.0 - ins.face_slope * half
        z_edge = max(z_edge, -1.0 - 0.9 * plug.wilson.eps0)
        q = SectionPoint(rp, z_edge)
        q2 = _psi(plug, q)
        c2 = max(c2, (q2.z - q.z) / d)
    delta_m = (c1 / c2) ** 2 if c2 > 0 else 0.0
    delta_m = min(delta_m, 0.5 * ins.footprint_radial)
    return c1, c2, delta_m


def measure_separation_gap(plug: Plug, count: int = 8) -> float:
    """eps_hat0: half the smallest section distance between the images of
    the two entry generators applied along the vertical-approach ladder."""
    _, _, _, ladder = measure_vertical_bracket(plug, count=40)
    gaps = []
    for p in ladder[2:2 + count]:
        try:
            a = apply_generator(plug, GeneratorTag("phi1_plus"), p)
            b = apply_generator(plug, GeneratorTag("phi2_plus"), involution(p))
        except Exception:
            continue
        gaps.append(a.dist(b))
    if not gaps:
        return 0.0
    return 0.5 * min(gaps)


def measure_arc_band(plug: Plug, seeds=None, horizon: float = 600.0):
    """(d_min, d_max) over sampled arcs with transition endpoints."""
    if seeds is None:
        seeds = [PointW(2.0, plug.section_angle, -1.0),
                 PointW(2.0, plug.section_angle, 0.3),
                 PointW(2.3, 0.5, -2.0),
                 PointW(2.2, 2.8, -2.0)]
    lengths = []
    for s in seeds:
        tr = flow_k(plug, s, horizon)
        # interior arcs only: both endpoints are transitions
        for (r, t0, t1) in tr.arcs[1:-1]:
            lengths.append(t1 - t0)
    lengths = [x for x in lengths if x > 1e-9]
    if not lengths:
        return 0.0, 0.0
    return min(lengths), max(lengths)


def measure_a_index(plug: Plug, max_scan: int = 12) -> int:
    """First curve index a <= 0: minus the number of section returns of the
    special-entry continuation whose forward orbit returns to the section
    before meeting an entry face."""
    q = apply_generator(plug, GeneratorTag("phi1_plus"), SectionPoint(2.0, -1.0))
    k = 0
    while k < max_scan:
        tr = flow_k(plug, q.to_point(plug), 200.0, record_sections=True,
                    stop_after_sections=1)
        if tr.transitions:
            break
        q = SectionPoint(tr.section_hits[0].r, tr.section_hits[0].z)
        k += 1
    return -k


def measure_constants(plug: Plug, *, quick: bool = False,
                      nu_horizon: float = 2000.0) -> DerivedConstants:
    dc = DerivedConstants(config=config_hash(plug))
    dc.r_star = plug.r_star
    dc.r_exceptional = plug.r_exceptional
    if not plug.r_exceptional >= 2.0 + plug.wilson.eps0:
        raise RuntimeError("exceptional radius must satisfy 2 + eps0 <= r_e")

    r_grid = [2.0 + u for u in
              (1e-4, 3e-4, 1e-3, 3e-3, 0.01, 0.02, 0.05, 0.1, 0.15, 0.2,
               0.3, 0.4, 0.5)]
    dc.theta_table = [(r, theta_advance(plug, r)) for r in r_grid]
    eps_grid = (0.3, 0.2, 0.1, 0.05, 0.02, 0.01) if not quick else (0.2, 0.1)
    dc.length_table = escape_length_table(plug, eps_grid)

    dr_grid = np.linspace(2.0 - plug.ins1.footprint_radial,
                          2.0 + plug.ins1.footprint_radial, 41)
    dc.delta_table = [(float(r), delta_closed_form(plug, float(r))) for r in dr_grid]
    dc.n_table = [(r0, iterate_escape_count(plug, r0))
                  for r0 in (2.02, 2.05, 2.1, 2.2, 2.3)]

    dc.d_min, dc.d_max = measure_arc_band(plug)

    # quadratic data of g near the lower special point
    w = plug.wilson
    h = 1e-4
    dc.lambda_g = w.g(2.0, -1.0 + h) / h / h
    ratios = []
    step_ratios = []
    for rr in np.linspace(2 - 0.95 * w.eps0, 2 + 0.95 * w.eps0, 31):
        for zz in np.linspace(-1 - 0.95 * w.eps0, -1 + 0.95 * w.eps0, 31):
            q0 = (rr - 2.0) ** 2 + (zz + 1.0) ** 2
            if q0 < 1e-12 or q0 > (0.95 * w.eps0) ** 2:
                continue
            gv = w.g(rr, zz)
            ratios.append(gv / q0)
            fv = abs(w.f(rr, zz))
            s = math.hypot(rr * fv, gv)
            step_ratios.append(gv / s / q0)
    dc.lambda1 = min(ratios)
    dc.lambda2 = max(ratios)
    dc.lam1_step = min(step_ratios)
    dc.lam2_step = max(step_ratios)
    dc.u_g = 1.0 / (24.0 * math.pi * dc.lam2_step)
    dc.l_g = 5.0 / (8.0 * math.pi * dc.lam1_step)
    dc.eps1 = min(w.eps0 / math.sqrt(2.0), 1.0 / (24.0 * math.pi * dc.lam2_step))

    dc.mu1, dc.mu2, dc.b1, _ = measure_vertical_bracket(plug)

    # the renormalized band near the core line and the target box scales
    eps3 = min(w.eps0 / 2.0, 1e-2, 1.0 / (300.0 * dc.lambda_g))
    while eps3 > 1e-7:
        ok = True
        for zz in np.linspace(-1 - eps3, -1 + eps3, 17):
            gv = w.g(2.0, zz)
            ref = dc.lambda_g * (zz + 1.0) ** 2
            if not (0.99 * ref - 1e-18 <= gv <= 1.01 * ref + 1e-18):
                ok = False
                break
        if ok:
            break
        eps3 *= 0.5
    dc.eps3 = eps3
    delta3 = eps3 / 2.0
    while delta3 > 1e-9:
        ok = True
        for rr in (2.0 - delta3, 2.0 + delta3):
            for zz in np.linspace(-1 - eps3, -1 + eps3, 9):
                gv = w.g(rr, zz)
                if gv > 1.02 * dc.lambda_g * eps3 * eps3:
                    ok = False
            for zz in np.linspace(-1 + eps3 / 4.0, -1 + eps3, 9):
                gv = w.g(rr, zz)
                ref = dc.lambda_g * (zz + 1.0) ** 2
                if not (0.98 * ref <= gv <= 1.02 * ref):
                    ok = False
        if ok:
            break
        delta3 *= 0.5
    dc.delta3 = delta3

    dc.matsumoto_c1, dc.matsumoto_c2, dc.delta_m = measure_matsumoto(plug)
    dc.eps_hat0 = measure_separation_gap(plug)
    dc.a_index = measure_a_index(plug)
    dc.b_notches = 0  # validated by the curve tracer (no interior notches)

    if not quick:
        tr = flow_k(plug, PointW(2.0, plug.section_angle, -1.0), nu_horizon,
                    record_sections=True)
        from .section import syndetic_stats
        dc.nu_hat = syndetic_stats(tr).max_gap
    return dc
