"""Self-insertion model: footprints, face surfaces, and the face map.

Each insertion i in {1,2} is realized as a thin flow tube.  Its entry
face is the graph z = h_i(theta') over a footprint band around
theta_i^f = zeta_i + pi; hitting the face jumps an orbit (via the face
map) to the bottom of the domain disc near zeta_i.  Reaching the top
face inside the domain disc jumps back to just past the matching entry
face point, which realizes the exit face as the tau_ins-flow image of
the entry face.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernel import _soft_clip

TWO_PI = 2.0 * math.pi


def wrap_pi(x: float) -> float:
    """Wrap an angle difference to (-pi, pi]."""
    y = math.fmod(x + math.pi, TWO_PI)
    if y <= 0.0:
        y += TWO_PI
    return y - math.pi


@dataclass(frozen=True)
class RadiusProfile:
    """Minimal-radius profile rho_i of the face map.

    slow: rho(r) = r + c_rho (r-2)^2         (rho'(2) = 1)
    fast: rho(r) = 2 + lam (r-2) for r >= 2  (rho' = lam > 1), slow form
          below r = 2 so the radius inequality holds on the whole face.
    """

    mode: str = "slow"
    c_rho: float = 1.0
    lam: float = 2.0

    def __post_init__(self):
        if self.mode not in ("slow", "fast"):
            raise ValueError("profile mode must be 'slow' or 'fast'")
        if self.mode == "fast" and not self.lam > 1.0:
            raise ValueError("fast profile requires lambda > 1")
        if self.c_rho <= 0.0:
            raise ValueError("c_rho must be positive")

    def __call__(self, r: float) -> float:
        if self.mode == "fast" and r >= 2.0:
            return 2.0 + self.lam * (r - 2.0)
        return r + self.c_rho * (r - 2.0) ** 2

    def derivative(self, r: float) -> float:
        if self.mode == "fast" and r >= 2.0:
            return self.lam
        return 1.0 + 2.0 * self.c_rho * (r - 2.0)


@dataclass(frozen=True)
class DomainArcs:
    """Boundary arcs of the domain disc L_i in the annulus."""

    zeta: float
    arc_halfwidth: float = 0.1
    parabola_min: float = 1.5
    parabola_coeff: float = 150.0

    def inner_boundary(self, theta: float) -> float:
        """The parabola r = 3/2 + 150 (theta - zeta)^2."""
        d = wrap_pi(theta - self.zeta)
        return self.parabola_min + self.parabola_coeff * d * d

    def contains(self, r: float, theta: float) -> bool:
        """Membership in the domain disc L_i."""
        d = wrap_pi(theta - self.zeta)
        if abs(d) > self.arc_halfwidth:
            return False
        return self.inner_boundary(theta) <= r <= 3.0


@dataclass(frozen=True)
class InsertionModel:
    """One self-insertion: footprint, face surface, face map."""

    index: int
    zeta: float
    footprint_halfwidth: float = 0.05     # w: face theta halfwidth
    footprint_radial: float = 0.5         # w_r: face radial halfwidth
    face_slope: float = 8.0               # lam_h
    bend_coeff: float = 34.0              # beta_q
    offset_coeff: float = 0.05            # zhat
    angle_contraction: float = 0.5        # c_theta
    tube_time: float = 0.05               # tau_ins
    profile: RadiusProfile = RadiusProfile()

    def __post_init__(self):
        if self.index not in (1, 2):
            raise ValueError("insertion index must be 1 or 2")

    @property
    def sign(self) -> int:
        return -1 if self.index == 1 else 1

    @property
    def face_center(self) -> float:
        """theta_i^f = zeta_i + pi."""
        return wrap_angle(self.zeta + math.pi)

    @property
    def arcs(self) -> DomainArcs:
        return DomainArcs(zeta=self.zeta)

    # --- face surface -------------------------------------------------

    def in_footprint(self, rp: float, thp: float) -> bool:
        if abs(rp - 2.0) > self.footprint_radial:
            return False
        return abs(wrap_pi(thp - self.face_center)) <= self.footprint_halfwidth

    def height(self, rp: float, thp: float) -> float:
        """Entry-face height h_i(r', theta'), soft-clipped.

        The face touches the periodic orbit: h_i(2, theta_i^f) = (-1)^i.
        """
        dw = wrap_pi(thp - self.face_center)
        base = self.sign * (1.0 + self.face_slope * dw)
        if self.index == 1:
            return _soft_clip(base, -2.0, 0.0)
        return _soft_clip(base, 0.0, 2.0)

    def height_slope(self, rp: float, thp: float) -> float:
        """d h_i / d theta' (away from the clip zone)."""
        return self.sign * self.face_slope

    # --- face map (the realization of sigma_i^{-1} on the entry face) --

    def vertex_angle(self, rp: float) -> float:
        """theta_i'(r'): angle of the parabola vertex at face radius r'."""
        return self.face_center + self.offset_coeff * (rp - 2.0)

    def face_map(self, rp: float, thp: float) -> tuple[float, float]:
        """(R, Theta) at the bottom face for entry-face point (r', theta').

        R = rho(r') + beta_q (theta' - theta_i'(r'))^2
        Theta = zeta_i + c_theta (theta' - theta_i^f)
        """
        if not self.in_footprint(rp, thp):
            raise OutOfFootprint(
                f"point (r'={rp}, theta'={thp}) is outside the face footprint "
                f"of insertion {self.index}"
            )
        dw = wrap_pi(thp - self.face_center)
        off = dw - self.offset_coeff * (rp - 2.0)
        big_r = self.profile(rp) + self.bend_coeff * off * off
        big_th = self.zeta + self.angle_contraction * dw
        return big_r, wrap_angle(big_th)

    def face_map_inverse(self, big_r: float, big_th: float) -> tuple[float, float]:
        """Invert the face map: (R, Theta) at z = -2 -> (r', theta') on the face.

        theta' comes from the angular part directly; r' solves a scalar
        monotone equation by bisection + Newton polish.
        """
        dw = wrap_pi(big_th - self.zeta) / self.angle_contraction
        thp = self.face_center + dw

        def fun(rp: float) -> float:
            off = dw - self.offset_coeff * (rp - 2.0)
            return self.profile(rp) + self.bend_coeff * off * off - big_r

        lo = 2.0 - self.footprint_radial
        hi = 2.0 + self.footprint_radial
        flo, fhi = fun(lo), fun(hi)
        if flo > 0.0 or fhi < 0.0:
            raise OutOfFootprint(
                f"no face radius maps to bottom point (R={big_r}, Theta={big_th}) "
                f"under insertion {self.index}"
            )
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            fm = fun(mid)
            if fm <= 0.0:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-14:
                break
        return 0.5 * (lo + hi), wrap_angle(thp)

    def special_point(self) -> tuple[float, float, float]:
        """The face point on the periodic orbit: (2, theta_i^f, (-1)^i)."""
        return 2.0, self.face_center, float(self.sign)

    def min_jump_radius(self, rp: float) -> float:
        """delta-contribution: minimal bottom radius over C(r') cap face."""
        off_vertex = self.offset_coeff * abs(rp - 2.0)
        if off_vertex <= self.footprint_halfwidth:
            return self.profile(rp)
        edge = off_vertex - self.footprint_halfwidth
        return self.profile(rp) + self.bend_coeff * edge * edge


def wrap_angle(x: float) -> float:
    """Wrap an absolute angle to [0, 2 pi)."""
    y = math.fmod(x, TWO_PI)
    if y < 0.0:
        y += TWO_PI
    return y


class OutOfFootprint(ValueError):
    """A face-map argument fell outside the insertion footprint."""


def default_insertions(profile: RadiusProfile | None = None) -> tuple[InsertionModel, InsertionModel]:
    prof = profile if profile is not None else RadiusProfile()
    ins1 = InsertionModel(index=1, zeta=math.pi / 4.0, profile=prof)
    ins2 = InsertionModel(index=2, zeta=-math.pi / 4.0, profile=prof)
    return ins1, ins2


def validate_radius_inequality(model: InsertionModel, n_samples: int = 10000):
    """Grid check of R >= r' with equality only at the special point.

    Returns a report dict; raises nothing (violations are the output).
    """
    n = max(4, int(math.isqrt(n_samples)))
    rs = np.linspace(2.0 - model.footprint_radial, 2.0 + model.footprint_radial, n)
    ths = model.face_center + np.linspace(
        -model.footprint_halfwidth, model.footprint_halfwidth, n
    )
    violations = []
    min_margin = math.inf
    eq_tol = 1e-8
    for rp in rs:
        for thp in ths:
            big_r, _ = model.face_map(float(rp), float(thp))
            margin = big_r - rp
            at_special = abs(rp - 2.0) < 1e-12 and abs(wrap_pi(thp - model.face_center)) < 1e-12
            if margin < -eq_tol:
                violations.append((float(rp), float(thp), float(margin)))
            elif not at_special and margin < min_margin:
                min_margin = margin
            if not at_special and margin <= eq_tol:
                # equality somewhere other than the special point
                violations.append((float(rp), float(thp), float(margin)))
    return {
        "passed": not violations,
        "violations": violations,
        "min_margin_off_special": min_margin,
        "samples": n * n,
    }
