"""Harmonically forced, damped linear oscillator with a hard wall at x = 0.

Between impacts the displacement obeys

    x'' + 2*zeta*x' + x + 1 = A*cos(omega*t),    x < 0,

and at the wall the velocity is reset, x' -> -eps*x'.  The flow is known in
closed form (particular plus homogeneous solution), so every derivative the
continuation needs is written out here by hand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .points import ImpactPoint, State


def omega1_of(zeta: float) -> float:
    """Damped natural frequency sqrt(1 - zeta**2)."""
    return math.sqrt(1.0 - zeta * zeta)


def a_graz(omega, zeta):
    """Forcing amplitude at which the non-impacting orbit touches the wall.

    Accepts scalars or arrays of ``omega``.
    """
    omega = np.asarray(omega, dtype=float)
    out = np.sqrt((1.0 - omega**2) ** 2 + 4.0 * zeta**2 * omega**2)
    return float(out) if out.ndim == 0 else out


def z_graz(omega, zeta):
    """Forcing phase at which the non-impacting orbit touches the wall.

    The two-argument arctangent puts the result in (0, pi) for every
    omega > 0 (pi/2 exactly at omega = 1).
    """
    omega = np.asarray(omega, dtype=float)
    out = np.arctan2(2.0 * zeta * omega, 1.0 - omega**2)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ModelParams:
    """Oscillator parameters; also serves as the hybrid model object."""

    zeta: float
    eps: float
    omega: float
    amp: float

    def __post_init__(self):
        for name in ("zeta", "eps", "omega", "amp"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not 0.0 < self.zeta < 1.0:
            raise ValueError(f"zeta must lie in (0, 1), got {self.zeta}")
        if not 0.0 < self.eps <= 1.0:
            raise ValueError(f"eps must lie in (0, 1], got {self.eps}")
        if self.omega <= 0.0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if self.amp <= 0.0:
            raise ValueError(f"amp must be positive, got {self.amp}")

    @property
    def omega1(self) -> float:
        return omega1_of(self.zeta)

    @property
    def a_graz(self) -> float:
        return a_graz(self.omega, self.zeta)

    @property
    def z_graz(self) -> float:
        return z_graz(self.omega, self.zeta)

    @property
    def mu(self) -> float:
        return self.amp - self.a_graz

    def with_amp(self, amp: float) -> ModelParams:
        return replace(self, amp=amp)

    def with_mu(self, mu: float) -> ModelParams:
        return self.with_amp(mu + self.a_graz)

    def with_omega(self, omega: float) -> ModelParams:
        return replace(self, omega=omega)

    def at_grazing(self) -> ModelParams:
        return self.with_amp(self.a_graz)

    # hybrid-model interface
    def trajectory(self, x0: float, y0: float, t0: float) -> Trajectory:
        return Trajectory(self, x0, y0, t0)

    def flow(self, t, x0: float, y0: float, t0: float) -> FlowJet:
        return flow(t, x0, y0, t0, self)

    def vector_field(self, s: State):
        return vector_field(s, self)

    def reset(self, p: ImpactPoint) -> ImpactPoint:
        return reset(p, self)

    def reset_jacobian(self):
        return reset_jacobian(self)


@dataclass(frozen=True)
class FlowJet:
    """Flow value and the partial derivatives used by the map Jacobians.

    Derivatives are with respect to the evaluation time t, the initial data
    (x0, y0, t0) and the forcing amplitude A; ``*_dt`` fields are the mixed
    second partials with t.
    """

    value: float
    dt: float
    dtt: float
    dx0: float
    dy0: float
    dt0: float
    dA: float
    dx0_dt: float
    dy0_dt: float
    dt0_dt: float
    dA_dt: float


class Trajectory:
    """Closed-form solution through (x0, y0) at time t0, ignoring the wall.

    All methods accept scalar or array ``t``; ``t < t0`` is fine.
    """

    __slots__ = ("params", "x0", "y0", "t0", "_u", "_v", "_shape")

    def __init__(self, params: ModelParams, x0: float, y0: float, t0: float):
        self.params = params
        self.x0 = x0
        self.y0 = y0
        self.t0 = t0
        zeta, om, amp = params.zeta, params.omega, params.amp
        d2 = (1.0 - om * om) ** 2 + 4.0 * zeta * zeta * om * om
        # forced response per unit amplitude: g = c1*cos(om t) + c2*sin(om t)
        self._shape = ((1.0 - om * om) / d2, 2.0 * zeta * om / d2)
        g0, g0d, _ = self._forced(t0)
        self._u = x0 + 1.0 - amp * g0
        self._v = y0 - amp * g0d

    def _forced(self, t):
        om = self.params.omega
        c1, c2 = self._shape
        c, s = np.cos(om * t), np.sin(om * t)
        g = c1 * c + c2 * s
        gd = om * (c2 * c - c1 * s)
        return g, gd, -om * om * g

    def _homogeneous(self, t):
        # h1: unit displacement, zero velocity; h2: zero displacement, unit velocity
        zeta = self.params.zeta
        w1 = math.sqrt(1.0 - zeta * zeta)
        tau = t - self.t0
        e = np.exp(-zeta * tau)
        c, s = np.cos(w1 * tau), np.sin(w1 * tau)
        h2 = e * s / w1
        h1 = e * c + zeta * h2
        h1d = -h2
        h2d = e * c - zeta * h2
        h1dd = -2.0 * zeta * h1d - h1
        h2dd = -2.0 * zeta * h2d - h2
        return h1, h2, h1d, h2d, h1dd, h2dd

    def position(self, t):
        h1, h2, *_ = self._homogeneous(t)
        g, _, _ = self._forced(t)
        return h1 * self._u + h2 * self._v - 1.0 + self.params.amp * g

    def velocity(self, t):
        _, _, h1d, h2d, _, _ = self._homogeneous(t)
        _, gd, _ = self._forced(t)
        return h1d * self._u + h2d * self._v + self.params.amp * gd

    def acceleration(self, t):
        _, _, _, _, h1dd, h2dd = self._homogeneous(t)
        _, _, gdd = self._forced(t)
        return h1dd * self._u + h2dd * self._v + self.params.amp * gdd

    def state(self, t):
        """(x, y, y') at t."""
        h1, h2, h1d, h2d, h1dd, h2dd = self._homogeneous(t)
        g, gd, gdd = self._forced(t)
        u, v, amp = self._u, self._v, self.params.amp
        return (
            h1 * u + h2 * v - 1.0 + amp * g,
            h1d * u + h2d * v + amp * gd,
            h1dd * u + h2dd * v + amp * gdd,
        )

    def jet(self, t) -> FlowJet:
        h1, h2, h1d, h2d, h1dd, h2dd = self._homogeneous(t)
        g, gd, gdd = self._forced(t)
        g0, g0d, g0dd = self._forced(self.t0)
        u, v, amp = self._u, self._v, self.params.amp
        hom = h1 * u + h2 * v
        hom_d = h1d * u + h2d * v
        hom_dd = h1dd * u + h2dd * v
        # t0 enters through tau = t - t0 and through u, v (via the forced terms)
        return FlowJet(
            value=hom - 1.0 + amp * g,
            dt=hom_d + amp * gd,
            dtt=hom_dd + amp * gdd,
            dx0=h1,
            dy0=h2,
            dt0=-hom_d - amp * (h1 * g0d + h2 * g0dd),
            dA=g - h1 * g0 - h2 * g0d,
            dx0_dt=h1d,
            dy0_dt=h2d,
            dt0_dt=-hom_dd - amp * (h1d * g0d + h2d * g0dd),
            dA_dt=gd - h1d * g0 - h2d * g0d,
        )


def flow(t, x0: float, y0: float, t0: float, params: ModelParams) -> FlowJet:
    """Closed-form flow jet at time t from (x0, y0) given at time t0."""
    return Trajectory(params, x0, y0, t0).jet(t)


def particular(t, params: ModelParams):
    """Periodic (non-impacting) response and its time derivative."""
    traj = Trajectory(params, 0.0, 0.0, 0.0)
    g, gd, _ = traj._forced(t)
    return -1.0 + params.amp * g, params.amp * gd


def vector_field(s: State, params: ModelParams):
    """Right-hand side (x', y', z') of the autonomous system at state s."""
    z = params.omega * s.t
    return (
        s.y,
        -s.x - 2.0 * params.zeta * s.y - 1.0 + params.amp * math.cos(z),
        params.omega,
    )


def reset(p: ImpactPoint, params: ModelParams) -> ImpactPoint:
    """Impact law (y, z) -> (-eps*y, z); extends smoothly to y <= 0."""
    return ImpactPoint(-params.eps * p.y, p.z, p.t)


def reset_jacobian(params: ModelParams):
    """Jacobian of the impact law in (y, z) and its derivative in mu."""
    return np.array([[-params.eps, 0.0], [0.0, 1.0]]), np.zeros(2)


def resonance_frequency(zeta: float, ratio: float) -> float:
    """Forcing frequency at which omega1 / omega equals ``ratio``."""
    if ratio <= 0:
        raise ValueError("ratio must be positive")
    return math.sqrt(1.0 - zeta * zeta) / ratio
