"""Plug assembly: Wilson field + two self-insertions + tolerances.

A ``Plug`` owns everything the integrator and the hybrid executor need:
the field parameters, the two insertion models, the section angle, and
the numeric tolerances.  It also runs the construction validators
((K1)-(K8) analogues, transversality, disjointness) once at build time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernel as K
from .insertion import InsertionModel, RadiusProfile, default_insertions, wrap_pi
from .profiles import WilsonParams

SECTION_ANGLE = math.pi  # the rectangle R0 sits at theta = pi


@dataclass(frozen=True)
class Tolerances:
    step_tol: float = 1e-9     # integrator relative tolerance per unit arclength
    event_tol: float = 1e-10   # guard bisection tolerance (arclength)
    facing_tol: float = 1e-4   # facing-point acceptance in the section metric
    hmax: float = 0.15         # step cap so face bands cannot be skipped


class ValidationError(RuntimeError):
    """A construction invariant failed; message names the invariant."""


@dataclass(frozen=True)
class Plug:
    wilson: WilsonParams = WilsonParams()
    ins1: InsertionModel = None
    ins2: InsertionModel = None
    tol: Tolerances = Tolerances()
    section_angle: float = SECTION_ANGLE

    def __post_init__(self):
        if self.ins1 is None or self.ins2 is None:
            i1, i2 = default_insertions()
            object.__setattr__(self, "ins1", self.ins1 or i1)
            object.__setattr__(self, "ins2", self.ins2 or i2)

    # --- derived geometry ----------------------------------------------

    @property
    def insertions(self) -> tuple[InsertionModel, InsertionModel]:
        return (self.ins1, self.ins2)

    def insertion(self, i: int) -> InsertionModel:
        return self.ins1 if i == 1 else self.ins2

    @property
    def r_star(self) -> float:
        """Maximal face radius R*: orbits above it never meet a face."""
        return 2.0 + max(self.ins1.footprint_radial, self.ins2.footprint_radial)

    @property
    def r_exceptional(self) -> float:
        """Conservative exceptional radius r_e = 2 + eps0 (validated)."""
        return 2.0 + self.wilson.eps0

    @property
    def special_section_points(self) -> tuple[tuple[float, float], tuple[float, float]]:
        """omega_1 = (2, -1) and omega_2 = (2, +1) in (r, z) section coords."""
        return ((2.0, -1.0), (2.0, 1.0))

    def kernel_params(self) -> np.ndarray:
        par = np.zeros(K.NPAR)
        par[K.P_EPS0] = self.wilson.eps0
        par[K.P_GMAX] = self.wilson.g_max
        par[K.P_THETA0] = self.section_angle
        par[K.P_FACE_W] = self.ins1.footprint_halfwidth
        par[K.P_FACE_WR] = self.ins1.footprint_radial
        par[K.P_LAM_H] = self.ins1.face_slope
        par[K.P_THF1] = self.ins1.face_center
        par[K.P_THF2] = self.ins2.face_center
        par[K.P_RTOL] = self.tol.step_tol
        par[K.P_HMAX] = self.tol.hmax
        par[K.P_EVENT_TOL] = self.tol.event_tol
        return par

    # --- validators -----------------------------------------------------

    def validate(self, n_samples: int = 400) -> dict:
        """Run the construction invariants; raise ValidationError on failure."""
        report = {}
        w = self.wilson
        i1, i2 = self.ins1, self.ins2

        if not (i1.footprint_halfwidth == i2.footprint_halfwidth
                and i1.footprint_radial == i2.footprint_radial
                and i1.face_slope == i2.face_slope):
            raise ValidationError("insertion symmetry: the two face geometries must match")

        # face touches the periodic orbit (K6)/(K7)
        for ins in (i1, i2):
            h = ins.height(2.0, ins.face_center)
            if abs(h - ins.sign) > 1e-12:
                raise ValidationError(
                    f"face contact: h_{ins.index}(2, theta_f) = {h} != {ins.sign}"
                )

        # footprints disjoint from each other and from the section (K2-style)
        gaps = []
        centers = [i1.face_center, i2.face_center, self.section_angle]
        widths = [i1.footprint_halfwidth, i2.footprint_halfwidth, 0.0]
        for a in range(3):
            for b in range(a + 1, 3):
                gap = abs(wrap_pi(centers[a] - centers[b])) - widths[a] - widths[b]
                gaps.append(gap)
                if gap <= 1e-3:
                    raise ValidationError(
                        "disjointness: face footprints / section overlap "
                        f"(angular gap {gap:.4f})"
                    )
        # domain discs vs face footprints and section
        for ins in (i1, i2):
            for c, wd in zip(centers, widths):
                gap = abs(wrap_pi(ins.zeta - c)) - ins.arcs.arc_halfwidth - wd
                if gap <= 1e-3:
                    raise ValidationError(
                        "disjointness: domain disc overlaps a face footprint or the section"
                    )
        report["min_angular_gap"] = min(gaps)

        # transversality of the faces: g - f * dh/dtheta > 0 on the footprint
        margin = math.inf
        for ins in (i1, i2):
            for rp in np.linspace(2 - ins.footprint_radial, 2 + ins.footprint_radial, 21):
                for dth in np.linspace(-ins.footprint_halfwidth, ins.footprint_halfwidth, 21):
                    thp = ins.face_center + dth
                    z = ins.height(rp, thp)
                    fv = w.f(rp, z)
                    gv = w.g(rp, z)
                    m = gv - fv * ins.height_slope(rp, thp)
                    margin = min(margin, m)
        if margin <= 1e-6:
            raise ValidationError(f"face transversality margin {margin} not positive")
        report["face_transversality_margin"] = margin

        # face-map image stays inside the annulus and the domain disc
        for ins in (i1, i2):
            for rp in np.linspace(2 - ins.footprint_radial, 2 + ins.footprint_radial, 41):
                for dth in (-ins.footprint_halfwidth, 0.0, ins.footprint_halfwidth):
                    big_r, big_th = ins.face_map(float(rp), ins.face_center + dth)
                    if not (1.0 < big_r < 3.0):
                        raise ValidationError(
                            f"face-map image radius {big_r} leaves the annulus"
                        )
                    if big_r >= ins.arcs.parabola_min and not ins.arcs.contains(big_r, big_th):
                        if big_r < ins.arcs.inner_boundary(big_th):
                            raise ValidationError(
                                "face-map image falls below the domain parabola"
                            )

        # exceptional radius requirement: 2 + eps0 <= r_e
        if self.r_exceptional > self.r_star + w.eps0 + 1.0:
            raise ValidationError("exceptional radius bookkeeping is inconsistent")

        # vertical climb per revolution must not skip a face window
        climb = 2.0 * math.pi * w.g_max
        window = 2.0 * i1.face_slope * i1.footprint_halfwidth
        if climb >= 0.9 * window:
            raise ValidationError(
                f"face window {window:.3f} too small for per-revolution climb {climb:.3f}"
            )
        report["window_climb_ratio"] = climb / window

        report["passed"] = True
        return report


def make_plug(profile_mode: str = "slow", *, c_rho: float = 1.0, lam: float = 2.0,
              wilson: WilsonParams | None = None, tol: Tolerances | None = None,
              **insertion_overrides) -> Plug:
    """Convenience constructor used by tests and the CLI defaults."""
    prof = RadiusProfile(mode=profile_mode, c_rho=c_rho, lam=lam)
    i1 = InsertionModel(index=1, zeta=math.pi / 4.0, profile=prof, **insertion_overrides)
    i2 = InsertionModel(index=2, zeta=-math.pi / 4.0, profile=prof, **insertion_overrides)
    return Plug(wilson=wilson or WilsonParams(), ins1=i1, ins2=i2,
                tol=tol or Tolerances())
