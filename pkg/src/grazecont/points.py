"""Small value types for states and points on the impact surface / section.

Times are kept unwrapped (``t``); the forcing phase ``z`` is the wrapped
value ``omega * t mod 2*pi`` and is what gets reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi


def wrap_phase(z: float) -> float:
    """Reduce a phase to [0, 2*pi)."""
    w = math.fmod(z, TWO_PI)
    if w < 0.0:
        w += TWO_PI
    if w >= TWO_PI:
        w = 0.0
    return w


def wrap_centered(dz: float) -> float:
    """Reduce a phase difference to (-pi, pi]."""
    w = dz - TWO_PI * math.floor(dz / TWO_PI + 0.5)
    if w <= -math.pi:
        w += TWO_PI
    return w


@dataclass(frozen=True)
class State:
    """Full state (x, y) at unwrapped time t."""

    x: float
    y: float
    t: float

    def phase(self, omega: float) -> float:
        return wrap_phase(omega * self.t)


@dataclass(frozen=True)
class ImpactPoint:
    """Point (y, z) on the impacting surface x = 0.

    ``y > 0`` is incoming (physical impact), ``y < 0`` outgoing or virtual,
    ``y == 0`` grazing.  ``t`` optionally pins the unwrapped time; when it is
    ``None`` the time ``z / omega`` is used.
    """

    y: float
    z: float
    t: float | None = None

    def time(self, omega: float) -> float:
        return self.z / omega if self.t is None else self.t


@dataclass(frozen=True)
class SectionPoint:
    """Point (x, z) on the section y = 0 (a local maximum of displacement)."""

    x: float
    z: float
    t: float | None = None

    def time(self, omega: float) -> float:
        return self.z / omega if self.t is None else self.t
