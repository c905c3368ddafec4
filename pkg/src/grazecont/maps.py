"""Maps between the impact surface x = 0 and the section y = 0.

A "section crossing" is a zero of the velocity with negative acceleration,
i.e. a local maximum of displacement.  Flow through the wall is the smooth
extension of the vector field; impacts are only applied by
:func:`full_poincare_step`.

The only numerical approximation is the one-dimensional root-finding for
crossing times; all Jacobians are assembled from the closed-form flow jet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InverseBranchFailure, NoCrossingFound, SingularCrossing
from .oscillator import FlowJet, ModelParams
from .points import ImpactPoint, SectionPoint, State, wrap_phase

FORWARD = 1
BACKWARD = -1

_CHUNK = 64

LOOP_RULES = ("crossing", "period")


@dataclass(frozen=True)
class CrossingSolverConfig:
    """Tolerances for locating crossing times.

    ``bracket_dt`` of ``None`` means a sixty-fourth of the forcing period.

    ``loop_rule`` fixes what ends a loop of the smooth flow.  With
    ``"crossing"`` every displacement maximum does.  With ``"period"`` a
    loop started at t_k ends at the highest maximum inside
    (t_k + T/2, t_k + 3T/2], T the forcing period, so ripples inside long
    excursions far from the wall do not change the loop count.

    ``wall_tol`` is how far above the wall a section point must lie before
    the full hybrid map treats it as impacting; it keeps rounding noise on
    a grazing orbit from being amplified by the square-root term.
    """

    time_tol: float = 1e-12
    max_bracket_steps: int = 1024
    bracket_dt: float | None = None
    loop_rule: str = "period"
    wall_tol: float = 1e-13

    def __post_init__(self):
        if self.time_tol <= 0:
            raise ValueError("time_tol must be positive")
        if self.bracket_dt is not None and self.bracket_dt <= 0:
            raise ValueError("bracket_dt must be positive")
        if self.max_bracket_steps < 1:
            raise ValueError("max_bracket_steps must be >= 1")
        if self.wall_tol < 0:
            raise ValueError("wall_tol must be >= 0")
        if self.loop_rule not in LOOP_RULES:
            raise ValueError(f"loop_rule must be one of {LOOP_RULES}")

    def step(self, omega: float) -> float:
        return self.bracket_dt if self.bracket_dt is not None else 2.0 * math.pi / (64.0 * omega)


DEFAULT_CROSSING = CrossingSolverConfig()


def _refine_root(fun, lo, hi, f_lo_positive, tol):
    """Safeguarded Newton for a root of ``fun`` in [lo, hi].

    ``fun(t)`` returns (f, f'); the sign of f at ``lo`` is given by
    ``f_lo_positive``.
    """
    t = 0.5 * (lo + hi)
    for _ in range(200):
        f, df = fun(t)
        if f == 0.0:
            return t
        if (f > 0.0) == f_lo_positive:
            lo = t
        else:
            hi = t
        t_new = t - f / df if df != 0.0 else math.nan
        if not lo < t_new < hi:
            t_new = 0.5 * (lo + hi)
        step = abs(t_new - t)
        t = t_new
        if step <= tol or hi - lo <= tol:
            # one more Newton step costs nothing and lands at machine precision
            f, df = fun(t)
            if df != 0.0 and abs(f / df) < tol:
                t -= f / df
            return t
    return t


def _find_max(traj, direction, skip_current, params, cfg, time_tol):
    """Time of the first local displacement maximum of ``traj`` from its t0."""
    t0 = traj.t0
    dt = cfg.step(params.omega)
    y0 = traj.y0
    if not skip_current and y0 == 0.0:
        if traj.acceleration(t0) < 0.0:
            return t0
        skip_current = True
    k_first = 1 if skip_current else 0
    k = k_first
    prev_t = prev_y = None
    while k <= cfg.max_bracket_steps:
        ks = np.arange(k, min(k + _CHUNK, cfg.max_bracket_steps + 1))
        ts = t0 + direction * dt * ks
        ys = traj.velocity(ts)
        if ks[0] == 0:
            ys[0] = y0
        if prev_t is not None:
            ts = np.concatenate(([prev_t], ts))
            ys = np.concatenate(([prev_y], ys))
        if direction == FORWARD:
            hits = np.nonzero((ys[:-1] > 0.0) & (ys[1:] <= 0.0))[0]
        else:
            hits = np.nonzero((ys[1:] > 0.0) & (ys[:-1] <= 0.0))[0]
        if hits.size:
            i = hits[0]
            a, b = (ts[i], ts[i + 1]) if direction == FORWARD else (ts[i + 1], ts[i])
            if ys[i + 1] == 0.0 and direction == FORWARD:
                return ts[i + 1]
            if ys[i] == 0.0 and direction == BACKWARD:
                return ts[i]

            def fun(t):
                _, y, acc = traj.state(t)
                return y, acc

            return _refine_root(fun, a, b, True, time_tol)
        prev_t, prev_y = ts[-1], ys[-1]
        k = ks[-1] + 1
    raise NoCrossingFound(
        f"no displacement maximum within {cfg.max_bracket_steps} steps of {dt:.3g} "
        f"({'forward' if direction == FORWARD else 'backward'}) from t={t0:.6g}"
    )


def next_section_crossing(start: State, direction: int, params: ModelParams,
                          cfg: CrossingSolverConfig = DEFAULT_CROSSING,
                          skip_current: bool = False):
    """First section crossing reached from ``start`` in the given direction.

    Returns the State at the crossing and its (unwrapped) time.  With
    ``skip_current`` a crossing at the start itself is ignored.
    """
    if direction not in (FORWARD, BACKWARD):
        raise ValueError("direction must be FORWARD (+1) or BACKWARD (-1)")
    traj = params.trajectory(start.x, start.y, start.t)
    t = _find_max(traj, direction, skip_current, params, cfg, cfg.time_tol)
    x, y, _ = traj.state(t)
    return State(float(x), float(y), float(t)), float(t)


# -- P_virt -----------------------------------------------------------------

def _virt(y, t, params, cfg):
    """(x, t) of the section point reached from (0, y) at time t."""
    if y == 0.0:
        return 0.0, t
    traj = params.trajectory(0.0, y, t)
    direction = FORWARD if y > 0.0 else BACKWARD
    t3 = float(_find_max(traj, direction, False, params, cfg, cfg.time_tol))
    return float(traj.position(t3)), t3


def p_virt(p: ImpactPoint, params: ModelParams,
           cfg: CrossingSolverConfig = DEFAULT_CROSSING) -> SectionPoint:
    """Follow the flow from the wall to the section.

    Forwards in time for ``p.y > 0``, backwards for ``p.y < 0``, identity
    for ``p.y == 0``.
    """
    x, t = _virt(p.y, p.time(params.omega), params, cfg)
    return SectionPoint(x, wrap_phase(params.omega * t), t)


def crossing_jacobian(jet: FlowJet, omega: float, first: str):
    """Jacobian of an arrival on the section from a transversality argument.

    ``first`` names the jet partial for the first column (``"dx0"`` when the
    departure coordinate is displacement, ``"dy0"`` for velocity).  The
    second column is the departure phase, and the returned vector is the
    derivative in the forcing amplitude.
    """
    if abs(jet.dtt) < 1e-10:
        raise SingularCrossing(f"tangential arrival at the section (x''={jet.dtt:.3g})")
    d1 = getattr(jet, first)
    d1_t = getattr(jet, first + "_dt")
    r = jet.dt / jet.dtt
    jac = np.array([
        [d1 - r * d1_t, (jet.dt0 - r * jet.dt0_dt) / omega],
        [-omega * d1_t / jet.dtt, -jet.dt0_dt / jet.dtt],
    ])
    dmu = np.array([jet.dA - r * jet.dA_dt, -omega * jet.dA_dt / jet.dtt])
    return jac, dmu


def _virt_jacobian(y, t_start, t_arrival, params):
    jet = params.trajectory(0.0, y, t_start).jet(t_arrival)
    return crossing_jacobian(jet, params.omega, "dy0")


def p_virt_jacobian(p: ImpactPoint, params: ModelParams,
                    cfg: CrossingSolverConfig = DEFAULT_CROSSING):
    """Jacobian of :func:`p_virt` in (y, z) and its derivative in mu."""
    t2 = p.time(params.omega)
    _, t3 = _virt(p.y, t2, params, cfg)
    return _virt_jacobian(p.y, t2, t3, params)


# -- P_global ---------------------------------------------------------------

def _next_loop(x, t, params, cfg):
    traj = params.trajectory(x, 0.0, t)
    tn = float(_find_max(traj, FORWARD, True, params, cfg, cfg.time_tol))
    xn = float(traj.position(tn))
    if cfg.loop_rule == "crossing":
        return xn, tn
    period = 2.0 * math.pi / params.omega
    best = None
    while tn <= t + 1.5 * period:
        if tn > t + 0.5 * period and (best is None or xn > best[0]):
            best = (xn, tn)
        tn = float(_find_max(params.trajectory(xn, 0.0, tn), FORWARD, True,
                             params, cfg, cfg.time_tol))
        xn = float(traj.position(tn))
    if best is None:
        raise NoCrossingFound(f"no displacement maximum one period after t={t:.6g}")
    return best


def _global_times(x, t, p_loops, params, cfg):
    """Successive loop ends [(x_k, t_k)] for k = 0..p of the smooth flow."""
    if p_loops < 1:
        raise ValueError("p_loops must be >= 1")
    out = [(x, t)]
    for _ in range(p_loops):
        out.append(_next_loop(*out[-1], params, cfg))
    return out


def p_global_p(s: SectionPoint, p_loops: int, params: ModelParams,
               cfg: CrossingSolverConfig = DEFAULT_CROSSING) -> SectionPoint:
    """The p-th subsequent section crossing of the smooth (wall-free) flow."""
    x, t = _global_times(s.x, s.time(params.omega), p_loops, params, cfg)[-1]
    return SectionPoint(x, wrap_phase(params.omega * t), t)


def _global_jacobian(points, params, direct=False):
    om = params.omega
    if direct:
        (x3, t3), (_, t4) = points[0], points[-1]
        jet = params.trajectory(x3, 0.0, t3).jet(t4)
        return crossing_jacobian(jet, om, "dx0")
    jac = np.eye(2)
    dmu = np.zeros(2)
    for (xk, tk), (_, tn) in zip(points[:-1], points[1:]):
        jet = params.trajectory(xk, 0.0, tk).jet(tn)
        jl, dl = crossing_jacobian(jet, om, "dx0")
        dmu = jl @ dmu + dl
        jac = jl @ jac
    return jac, dmu


def p_global_p_jacobian(s: SectionPoint, p_loops: int, params: ModelParams,
                        cfg: CrossingSolverConfig = DEFAULT_CROSSING, direct=False):
    """Jacobian of :func:`p_global_p` in (x, z) and its derivative in mu.

    Per-loop Jacobians are chained; ``direct=True`` instead differentiates
    the p-loop map in one go (used as a cross-check).
    """
    points = _global_times(s.x, s.time(params.omega), p_loops, params, cfg)
    return _global_jacobian(points, params, direct=direct)


# -- full hybrid Poincare map -----------------------------------------------

def _incoming_preimage(x, t, params, cfg):
    """Time and velocity where the trajectory through the section point
    (x > 0, 0) at time t last crossed the wall going in."""
    traj = params.trajectory(x, 0.0, t)
    dt = cfg.step(params.omega)
    prev_t, prev_x = t, x
    for k in range(1, cfg.max_bracket_steps + 1):
        tk = t - k * dt
        xk, yk, _ = traj.state(tk)
        if xk <= 0.0:
            def fun(s):
                xs, ys, _ = traj.state(s)
                return xs, ys

            t1 = _refine_root(fun, tk, prev_t, False, cfg.time_tol)
            y1 = float(traj.velocity(t1))
            if y1 <= 0.0:
                break
            return float(t1), y1
        if yk <= 0.0:
            break
        prev_t, prev_x = tk, xk
    raise InverseBranchFailure(
        f"no incoming wall crossing behind section point x={x:.3g}, t={t:.6g}"
    )


def full_poincare_step(s: SectionPoint, params: ModelParams,
                       cfg: CrossingSolverConfig = DEFAULT_CROSSING):
    """One iterate of P = P_global o P_disc of the hybrid system.

    Returns the next section point and the impact that occurred on the way
    (``None`` when ``s.x <= 0``).
    """
    om = params.omega
    t = s.time(om)
    impact = None
    x = s.x
    if x > cfg.wall_tol:
        t1, y1 = _incoming_preimage(x, t, params, cfg)
        impact = ImpactPoint(y1, wrap_phase(om * t1), t1)
        y2 = params.reset(impact).y
        x, t = _virt(y2, t1, params, cfg)
    xn, tn = _global_times(x, t, 1, params, cfg)[-1]
    return SectionPoint(xn, wrap_phase(om * tn), tn), impact


def disc_correction(s: SectionPoint, params: ModelParams,
                    cfg: CrossingSolverConfig = DEFAULT_CROSSING) -> SectionPoint:
    """The right piece of the discontinuity map at a virtual point (x > 0)."""
    if s.x <= cfg.wall_tol:
        return s
    om = params.omega
    t1, y1 = _incoming_preimage(s.x, s.time(om), params, cfg)
    y2 = params.reset(ImpactPoint(y1, wrap_phase(om * t1), t1)).y
    x3, t3 = _virt(y2, t1, params, cfg)
    return SectionPoint(x3, wrap_phase(om * t3), t3)


def simulate_hybrid(s0: SectionPoint, n_steps: int, params: ModelParams,
                    cfg: CrossingSolverConfig = DEFAULT_CROSSING):
    """Iterate :func:`full_poincare_step` ``n_steps`` times.

    Each step restarts from the wrapped phase so unwrapped times stay small.
    Returns a list of (section point, impact or None).
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    out = []
    s = SectionPoint(s0.x, wrap_phase(params.omega * s0.time(params.omega)))
    for _ in range(n_steps):
        nxt, impact = full_poincare_step(s, params, cfg)
        out.append((nxt, impact))
        s = SectionPoint(nxt.x, nxt.z)
    return out


def loop_maxima(p: ImpactPoint, p_loops: int, params: ModelParams,
                cfg: CrossingSolverConfig = DEFAULT_CROSSING):
    """Section crossings of the orbit leaving the wall at the reset of ``p``.

    Returns the crossings reached after loops 1..p of the smooth flow.
    """
    t1 = p.time(params.omega)
    y2 = params.reset(p).y
    x3, t3 = _virt(y2, t1, params, cfg)
    pts = _global_times(x3, t3, p_loops, params, cfg)[1:]
    return [SectionPoint(x, wrap_phase(params.omega * t), t) for x, t in pts]
