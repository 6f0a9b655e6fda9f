"""Smooth profile functions for the plug vector field.

The vector field on the annular cylinder W = [1,3] x S^1 x [-2,2] is
    W = g(r,z) d/dz + f(r,z) d/dtheta
with f built from C^2 smootherstep ramps (plateau value 1 on the block
5/4 <= r <= 11/4, -7/4 <= z <= -1/4, mirrored with opposite sign above
z = 0, zero near the boundary) and g a radially symmetric well vanishing
quadratically at the two singular points (r,z) = (2,-1), (2,+1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

# f-profile breakpoints (fixed by the plateau block and boundary margins)
_B_ZERO_LO = 1.05    # B == 0 on [1, 1.05]
_B_ONE_LO = 1.25     # B == 1 on [1.25, 2.75]
_B_ONE_HI = 2.75
_B_ZERO_HI = 2.95    # B == 0 on [2.95, 3]
_S_ONE_LO = 0.25     # s == 1 on [0.25, 1.75] (in u = -z for z <= 0)
_S_ONE_HI = 1.75
_S_ZERO_HI = 1.95    # s == 0 on [1.95, 2]


def smootherstep(u: float) -> float:
    """C^2 ramp 6u^5 - 15u^4 + 10u^3, clamped to [0,1]."""
    if u <= 0.0:
        return 0.0
    if u >= 1.0:
        return 1.0
    return u * u * u * (u * (u * 6.0 - 15.0) + 10.0)


def smoothstep(u: float) -> float:
    """C^1 ramp 3u^2 - 2u^3, clamped to [0,1]; exactly quadratic at 0."""
    if u <= 0.0:
        return 0.0
    if u >= 1.0:
        return 1.0
    return u * u * (3.0 - 2.0 * u)


def radial_plateau(r: float) -> float:
    """B(r): 0 near r in {1,3}, 1 on [5/4, 11/4], smootherstep ramps."""
    if r <= _B_ZERO_LO:
        return 0.0
    if r < _B_ONE_LO:
        return smootherstep((r - _B_ZERO_LO) / (_B_ONE_LO - _B_ZERO_LO))
    if r <= _B_ONE_HI:
        return 1.0
    if r < _B_ZERO_HI:
        return smootherstep((_B_ZERO_HI - r) / (_B_ZERO_HI - _B_ONE_HI))
    return 0.0


def odd_height_profile(z: float) -> float:
    """S(z): odd in z, +1 on [-7/4,-1/4], 0 at z in {-2,0,2}."""
    u = -z if z <= 0.0 else z
    if u <= 0.0:
        s = 0.0
    elif u < _S_ONE_LO:
        s = smootherstep(u / _S_ONE_LO)
    elif u <= _S_ONE_HI:
        s = 1.0
    elif u < _S_ZERO_HI:
        s = smootherstep((_S_ZERO_HI - u) / (_S_ZERO_HI - _S_ONE_HI))
    else:
        s = 0.0
    return s if z <= 0.0 else -s


def angular_speed(r: float, z: float) -> float:
    """f(r,z) = B(r) * S(z); satisfies (W1)-(W6)."""
    return radial_plateau(r) * odd_height_profile(z)


def vertical_speed(r: float, z: float, eps0: float, g_max: float) -> float:
    """g(r,z): radially symmetric quadratic well at (2, +-1).

    g = g_max * k(d/eps0) with d the distance to the nearest singular
    point and k(u) = 3u^2 - 2u^3; g == g_max for d >= eps0.
    """
    dz = abs(z) - 1.0
    d = math.hypot(r - 2.0, dz)
    if d >= eps0:
        return g_max
    return g_max * smoothstep(d / eps0)


@dataclass(frozen=True)
class WilsonParams:
    """Parameters of the rotationally symmetric plug field.

    eps0: radius of the singular neighborhoods of (2, +-1), 0 < eps0 <= 1/4.
    g_max: vertical speed cap (g == g_max outside the eps0-wells).
    """

    eps0: float = 0.25
    g_max: float = 0.1
    f_profile: str = "smootherstep-plateau"
    g_profile: str = "smoothstep-well"

    def __post_init__(self):
        if not (0.0 < self.eps0 <= 0.25):
            raise ValueError("eps0 must satisfy 0 < eps0 <= 1/4")
        if not (0.0 < self.g_max <= 1.0):
            raise ValueError("g_max must satisfy 0 < g_max <= 1")

    def f(self, r: float, z: float) -> float:
        return angular_speed(r, z)

    def g(self, r: float, z: float) -> float:
        return vertical_speed(r, z, self.eps0, self.g_max)

    @property
    def lambda_g(self) -> float:
        """Quadratic coefficient of g at the singular points: 3*g_max/eps0^2."""
        return 3.0 * self.g_max / (self.eps0 * self.eps0)
