"""The VIVID function, its derivatives, Newton's method and multipliers.

For an impact point (y, z) the function is

    V(y, z; mu) = P_global^p(P_virt(Phi(y, z))) - P_virt(y, z),

built only from maps that are smooth near grazing (the inverse of P_virt is
never needed).  Its zeros are exactly the impact points of p-loop maximal
periodic orbits, continued smoothly through y = 0 into virtual orbits.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import (MaxIterExceeded, NearGrazingSingularity, SingularJacobian)
from .maps import (DEFAULT_CROSSING, CrossingSolverConfig, _global_jacobian,
                   _global_times, _virt, _virt_jacobian)
from .oscillator import ModelParams
from .points import ImpactPoint, SectionPoint, wrap_centered, wrap_phase


NORMS = ("max", "l2")


@dataclass(frozen=True)
class VividValue:
    v1: float  # displacement mismatch
    v2: float  # phase mismatch, reduced to (-pi, pi]

    def norm(self, kind: str = "max") -> float:
        if kind == "max":
            return max(abs(self.v1), abs(self.v2))
        if kind == "l2":
            return math.hypot(self.v1, self.v2)
        raise ValueError(f"unknown norm {kind!r}; expected 'max' or 'l2'")

    def as_array(self):
        return np.array([self.v1, self.v2])


@dataclass(frozen=True)
class NewtonConfig:
    tol: float = 1e-10
    max_iter: int = 20
    damping: bool = False
    norm: str = "max"

    def __post_init__(self):
        if self.norm not in NORMS:
            raise ValueError(f"norm must be one of {NORMS}")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass(frozen=True)
class Multipliers:
    """Eigenvalues of DQ.

    Real pairs are ordered by decreasing value (so ``lambda2`` is the one
    heading to -infinity near grazing and crossing -1 at period doubling);
    a complex pair lists the positive imaginary part first.
    """

    lambda1: complex
    lambda2: complex

    @property
    def is_real(self) -> bool:
        return self.lambda1.imag == 0.0 and self.lambda2.imag == 0.0

    @property
    def stable(self) -> bool:
        return abs(self.lambda1) < 1.0 and abs(self.lambda2) < 1.0


@dataclass(frozen=True)
class VividEval:
    """Everything computed along one evaluation of V at an impact point."""

    point: ImpactPoint
    p_loops: int
    value: VividValue
    x0: float
    t0: float
    x3: float
    t3: float
    loops: tuple  # ((x, t), ...) section crossings after each global loop
    jac: np.ndarray | None = None
    dmu: np.ndarray | None = None
    d_virt_in: np.ndarray | None = None
    d_virt_out: np.ndarray | None = None
    d_global: np.ndarray | None = None
    d_reset: np.ndarray | None = None

    @property
    def x4(self) -> float:
        return self.loops[-1][0]

    @property
    def t4(self) -> float:
        return self.loops[-1][1]

    def monodromy(self) -> np.ndarray:
        """DQ = DP_global^p DP_virt(y2) DPhi DP_virt(y1)^-1."""
        dv1 = self.d_virt_in
        det = dv1[0, 0] * dv1[1, 1] - dv1[0, 1] * dv1[1, 0]
        if abs(det) < 1e-12:
            raise NearGrazingSingularity(
                f"DP_virt at y={self.point.y:.3g} has determinant {det:.3g}"
            )
        inv = np.array([[dv1[1, 1], -dv1[0, 1]], [-dv1[1, 0], dv1[0, 0]]]) / det
        return self.d_global @ self.d_virt_out @ self.d_reset @ inv


def evaluate(p: ImpactPoint, p_loops: int, params: ModelParams,
             cfg: CrossingSolverConfig = DEFAULT_CROSSING,
             jacobian: bool = True) -> VividEval:
    if p_loops < 1:
        raise ValueError("p_loops must be >= 1")
    om = params.omega
    t1 = p.time(om)
    x0, t0 = _virt(p.y, t1, params, cfg)
    out = params.reset(p)
    x3, t3 = _virt(out.y, t1, params, cfg)
    pts = _global_times(x3, t3, p_loops, params, cfg)
    x4, t4 = pts[-1]
    value = VividValue(x4 - x0, wrap_centered(om * (t4 - t0)))
    ev = dict(point=p, p_loops=p_loops, value=value, x0=x0, t0=t0, x3=x3,
              t3=t3, loops=tuple(pts[1:]))
    if jacobian:
        dphi, dphi_mu = params.reset_jacobian()
        dv1, dv1_mu = _virt_jacobian(p.y, t1, t0, params)
        dv2, dv2_mu = _virt_jacobian(out.y, t1, t3, params)
        dg, dg_mu = _global_jacobian(pts, params)
        jac = dg @ dv2 @ dphi - dv1
        dmu = dg @ dv2 @ dphi_mu + dg @ dv2_mu + dg_mu - dv1_mu
        ev.update(jac=jac, dmu=dmu, d_virt_in=dv1, d_virt_out=dv2,
                  d_global=dg, d_reset=dphi)
    return VividEval(**ev)


def vivid(p: ImpactPoint, p_loops: int, params: ModelParams,
          cfg: CrossingSolverConfig = DEFAULT_CROSSING) -> VividValue:
    """Value of V at impact point ``p``."""
    return evaluate(p, p_loops, params, cfg, jacobian=False).value


def vivid_jacobian(p: ImpactPoint, p_loops: int, params: ModelParams,
                   cfg: CrossingSolverConfig = DEFAULT_CROSSING):
    """(DV over (y, z), dV/dmu) by the chain rule through the smooth pieces."""
    ev = evaluate(p, p_loops, params, cfg)
    return ev.jac, ev.dmu


def eigenvalues_2x2(m) -> Multipliers:
    tr = float(m[0, 0] + m[1, 1])
    det = float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    disc = tr * tr - 4.0 * det
    if disc >= 0.0:
        # avoid cancellation when one root is much larger than the other
        q = -0.5 * (tr + math.copysign(math.sqrt(disc), tr))
        if q == 0.0:
            r1 = r2 = 0.0
        else:
            r1, r2 = -q, -det / q
        hi, lo = max(r1, r2), min(r1, r2)
        return Multipliers(complex(hi), complex(lo))
    half = 0.5 * cmath.sqrt(disc).imag
    return Multipliers(complex(0.5 * tr, abs(half)), complex(0.5 * tr, -abs(half)))


def stability_multipliers(p: ImpactPoint, p_loops: int, params: ModelParams,
                          cfg: CrossingSolverConfig = DEFAULT_CROSSING) -> Multipliers:
    """Multipliers of the maximal orbit with impact point ``p`` (needs y != 0)."""
    return eigenvalues_2x2(evaluate(p, p_loops, params, cfg).monodromy())


@dataclass(frozen=True)
class NewtonResult:
    z: float
    amp: float
    iterations: int
    residual: float
    evaluation: VividEval


def newton_solve(y_imp: float, z0: float, amp0: float, p_loops: int,
                 params: ModelParams, cfg: NewtonConfig = NewtonConfig(),
                 crossing: CrossingSolverConfig = DEFAULT_CROSSING) -> NewtonResult:
    """Solve V(y_imp, z; A - A_graz) = 0 for (z, A) at fixed y_imp.

    ``params`` supplies zeta, eps and omega; its amplitude is ignored.
    """
    z, amp = z0, amp0

    def at(z, amp):
        try:
            pars = params.with_amp(amp)
        except ValueError as exc:
            raise MaxIterExceeded(f"Newton left the parameter domain: {exc}",
                                  z=z, amp=amp) from None
        return evaluate(ImpactPoint(y_imp, wrap_phase(z)), p_loops, pars, crossing)

    ev = at(z, amp)
    res = ev.value.norm(cfg.norm)
    for it in range(cfg.max_iter + 1):
        if res < cfg.tol:
            return NewtonResult(wrap_phase(float(z)), float(amp), it, float(res), ev)
        if it == cfg.max_iter:
            break
        m = np.array([[ev.jac[0, 1], ev.dmu[0]], [ev.jac[1, 1], ev.dmu[1]]])
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if abs(det) < 1e-14:
            raise SingularJacobian(f"Newton matrix singular (det={det:.3g}) at y_imp={y_imp}")
        v = ev.value.as_array()
        dz = (m[1, 1] * v[0] - m[0, 1] * v[1]) / det
        da = (-m[1, 0] * v[0] + m[0, 0] * v[1]) / det
        scale = 1.0
        while True:
            zt, at_ = z - scale * dz, amp - scale * da
            evt = at(zt, at_)
            rt = evt.value.norm(cfg.norm)
            if not cfg.damping or rt <= res or scale < 1e-3:
                break
            scale *= 0.5
        z, amp, ev, res = float(zt), float(at_), evt, rt
    raise MaxIterExceeded(
        f"Newton did not reach |V| < {cfg.tol:g} in {cfg.max_iter} iterations "
        f"(|V| = {res:.3g})", z=wrap_phase(z), amp=amp, residual=res)


def section_point(ev: VividEval, params: ModelParams) -> SectionPoint:
    """The virtual section point P_virt(y, z) of an evaluation."""
    return SectionPoint(ev.x0, wrap_phase(params.omega * ev.t0), ev.t0)
