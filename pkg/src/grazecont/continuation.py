"""Continuation of maximal periodic orbits and their bifurcations.

One-parameter branches are traced by fixing the impact velocity y_imp at
each step and solving V = 0 for (z_imp, A).  Period-doubling (PD) and
saddle-node (SN) points are refined by bisection in y_imp, and followed in
(omega, A) by stepping omega and re-bisecting at each step.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (GrazeContError, NearGrazingSingularity, NoBracket,
                     NoPeriodicAttractor, StepFailed)
from .maps import DEFAULT_CROSSING, CrossingSolverConfig, loop_maxima, simulate_hybrid
from .oscillator import ModelParams, a_graz, z_graz
from .points import ImpactPoint, SectionPoint, wrap_centered, wrap_phase
from .vivid import (Multipliers, NewtonConfig, NewtonResult, eigenvalues_2x2,
                    newton_solve)

log = logging.getLogger(__name__)

PD, SN, GRAZE, GRAZE2, RESONANCE = "PD", "SN", "GRAZE", "GRAZE2", "RESONANCE"


@dataclass(frozen=True)
class ContinuationConfig:
    newton: NewtonConfig = field(default_factory=NewtonConfig)
    crossing: CrossingSolverConfig = DEFAULT_CROSSING
    bif_tol: float = 1e-8
    y_tol: float = 1e-12
    multiplier_guard: float = 1e-6
    resonance_y: float = 1e-5
    max_bisect: int = 200


DEFAULT_CONTINUATION = ContinuationConfig()


@dataclass(frozen=True)
class BranchPoint:
    y_imp: float
    z_imp: float
    amp: float
    omega: float
    lambda1: complex | None
    lambda2: complex | None
    stable: bool
    virtual: bool
    halved: bool = False
    iterations: int = 0

    @property
    def multipliers_skipped(self) -> bool:
        return self.lambda1 is None

    @property
    def impact(self) -> ImpactPoint:
        return ImpactPoint(self.y_imp, self.z_imp)


@dataclass(frozen=True)
class BifPoint:
    kind: str
    omega: float
    amp: float
    y_imp: float
    z_imp: float
    note: str = ""


@dataclass
class Codim2Curve:
    kind: str
    points: list
    stop_reason: str

    @property
    def terminal(self) -> BifPoint:
        return self.points[-1]


def _branch_point(y, nr: NewtonResult, params, cfg, halved=False) -> BranchPoint:
    virtual = y < 0.0
    l1 = l2 = None
    if abs(y) >= cfg.multiplier_guard:
        try:
            m = eigenvalues_2x2(nr.evaluation.monodromy())
            l1, l2 = m.lambda1, m.lambda2
        except NearGrazingSingularity:
            pass
    stable = (not virtual and l1 is not None
              and abs(l1) < 1.0 and abs(l2) < 1.0)
    return BranchPoint(y, nr.z, nr.amp, params.omega, l1, l2, stable, virtual,
                       halved, nr.iterations)


def polish(y, z, amp, params: ModelParams, p_loops=2,
           cfg: ContinuationConfig = DEFAULT_CONTINUATION, halved=False) -> BranchPoint:
    """Newton-solve V = 0 at fixed y_imp from the guess (z, amp)."""
    nr = newton_solve(y, z, amp, p_loops, params, cfg.newton, cfg.crossing)
    return _branch_point(y, nr, params, cfg, halved)


def _extrapolate(xs, ys, x):
    """Lagrange extrapolation through at most the last three points."""
    xs, ys = xs[-3:], ys[-3:]
    total = 0.0
    for i, (xi, yi) in enumerate(zip(xs, ys)):
        w = 1.0
        for j, xj in enumerate(xs):
            if j != i:
                w *= (x - xj) / (xi - xj)
        total += w * yi
    return total


def seed_by_simulation(params: ModelParams, p_loops=2, sim_steps=40,
                       transient_steps=600, start: SectionPoint | None = None,
                       crossing: CrossingSolverConfig = DEFAULT_CROSSING,
                       rec_tol=1e-6) -> ImpactPoint:
    """Impact point of a stable p-loop maximal orbit, from long-time simulation."""
    if start is None:
        start = SectionPoint(-0.05, params.z_graz)
    steps = simulate_hybrid(start, transient_steps + sim_steps, params, crossing)
    tail = steps[transient_steps:]
    hits = [(i, imp) for i, (_, imp) in enumerate(tail) if imp is not None]
    if len(hits) < 2:
        raise NoPeriodicAttractor(f"{len(hits)} impacts in the last {sim_steps} steps")
    for (i, a), (j, b) in zip(hits[:-1], hits[1:]):
        if j - i != p_loops:
            raise NoPeriodicAttractor(f"impacts {j - i} steps apart, expected {p_loops}")
        if abs(a.y - b.y) > rec_tol or abs(wrap_centered(a.z - b.z)) > rec_tol:
            raise NoPeriodicAttractor("impact points do not recur")
    ys = [imp.y for _, imp in hits]
    z_ref = hits[0][1].z
    dz = [wrap_centered(imp.z - z_ref) for _, imp in hits]
    return ImpactPoint(float(np.mean(ys)), wrap_phase(z_ref + float(np.mean(dz))))


def continue_branch(seed: BranchPoint, dy: float, n_steps: int, params: ModelParams,
                    p_loops=2, cfg: ContinuationConfig = DEFAULT_CONTINUATION,
                    until=None):
    """Step y_imp by ``dy`` (signed) ``n_steps`` times from ``seed``.

    Returns the accepted points, seed first.  A failed step is retried once at
    half the step; a second failure raises :class:`StepFailed` carrying the
    points accepted so far.  ``until(point)`` returning true ends the branch
    early (the point is kept).
    """
    if dy == 0.0:
        raise ValueError("dy must be nonzero")
    pars = params.with_omega(seed.omega)
    branch = [seed]
    ys, zs, amps = [seed.y_imp], [seed.z_imp], [seed.amp]
    for i in range(1, n_steps + 1):
        for frac in (1.0, 0.5):
            y = ys[-1] + frac * dy
            z0 = _extrapolate(ys, zs, y)
            a0 = _extrapolate(ys, amps, y)
            try:
                bp = polish(y, z0, a0, pars, p_loops, cfg, halved=frac != 1.0)
                break
            except GrazeContError as exc:
                log.debug("step %d at y=%g failed: %s", i, y, exc)
        else:
            raise StepFailed(f"continuation step {i} failed at y_imp={y:g}", i,
                             branch[-1], branch)
        branch.append(bp)
        ys.append(y)
        zs.append(zs[-1] + wrap_centered(bp.z_imp - zs[-1]))
        amps.append(bp.amp)
        if until is not None and until(bp):
            break
    return branch


def branch_from_impact(impact: ImpactPoint, params: ModelParams, p_loops=2,
                       cfg: ContinuationConfig = DEFAULT_CONTINUATION) -> BranchPoint:
    """Newton-polish an approximate impact point into a branch point."""
    return polish(impact.y, impact.z, params.amp, params, p_loops, cfg)


# -- codimension one ----------------------------------------------------------

def _test_value(bp: BranchPoint, kind):
    if bp.lambda1 is None:
        return None
    if kind == PD:
        return bp.lambda2.real + 1.0
    if kind == SN:
        return bp.lambda1.real - 1.0
    raise ValueError(f"unknown bifurcation kind {kind!r}")


def _is_real(bp):
    return bp.lambda1 is not None and bp.lambda1.imag == 0.0 and bp.lambda2.imag == 0.0


def _bracketable(a, b):
    # multipliers diverge at grazing, so never bracket across y_imp = 0
    return _is_real(a) and _is_real(b) and a.y_imp * b.y_imp > 0


def _bisect(a: BranchPoint, b: BranchPoint, fun, params, p_loops, cfg):
    """Bisect in y_imp between branch points with opposite signs of ``fun``.

    Each trial point is Newton-polished from the linear interpolant of its
    neighbours.  Stops when |fun| < bif_tol or the interval is below y_tol.
    """
    fa, fb = fun(a), fun(b)
    if fa is None or fb is None or fa * fb > 0:
        raise NoBracket("end points do not bracket a sign change")
    best = a if abs(fa) < abs(fb) else b
    for _ in range(cfg.max_bisect):
        if min(abs(fa), abs(fb)) < cfg.bif_tol:
            break
        if abs(b.y_imp - a.y_imp) < cfg.y_tol:
            break
        y = 0.5 * (a.y_imp + b.y_imp)
        z = a.z_imp + 0.5 * wrap_centered(b.z_imp - a.z_imp)
        m = polish(y, z, 0.5 * (a.amp + b.amp), params, p_loops, cfg)
        fm = fun(m)
        if fm is None:
            raise NoBracket("test function undefined inside the bracket")
        if abs(fm) < min(abs(fa), abs(fb)):
            best = m
        if fm * fa > 0:
            a, fa = m, fm
        else:
            b, fb = m, fm
    if abs(fa) < abs(fun(best)):
        best = a
    if abs(fb) < abs(fun(best)):
        best = b
    return best


def detect_codim1(branch, kind, params: ModelParams, p_loops=2,
                  cfg: ContinuationConfig = DEFAULT_CONTINUATION) -> BifPoint:
    """Locate the first PD (lambda2 = -1) or SN (lambda1 = 1) point on a branch."""
    fun = lambda bp: _test_value(bp, kind)  # noqa: E731
    for a, b in zip(branch[:-1], branch[1:]):
        if not _bracketable(a, b):
            continue
        fa, fb = fun(a), fun(b)
        if fa * fb <= 0:
            pars = params.with_omega(a.omega)
            bp = _bisect(a, b, fun, pars, p_loops, cfg)
            return BifPoint(kind, bp.omega, bp.amp, bp.y_imp, bp.z_imp)
    raise NoBracket(f"no sign change of the {kind} test function along the branch")


def detect_all_codim1(branch, kind, params: ModelParams, p_loops=2,
                      cfg: ContinuationConfig = DEFAULT_CONTINUATION):
    """Every PD or SN point along a branch, in branch order."""
    fun = lambda bp: _test_value(bp, kind)  # noqa: E731
    found = []
    for a, b in zip(branch[:-1], branch[1:]):
        if not _bracketable(a, b):
            continue
        fa, fb = fun(a), fun(b)
        if fa * fb <= 0 and not (fa == 0.0 and found and found[-1].y_imp == a.y_imp):
            bp = _bisect(a, b, fun, params.with_omega(a.omega), p_loops, cfg)
            found.append(BifPoint(kind, bp.omega, bp.amp, bp.y_imp, bp.z_imp))
    return found


def refine_codim1(bif: BifPoint, params: ModelParams, p_loops=2,
                  cfg: ContinuationConfig = DEFAULT_CONTINUATION) -> BranchPoint:
    """Branch point (with multipliers) at a bifurcation point."""
    return polish(bif.y_imp, bif.z_imp, bif.amp, params.with_omega(bif.omega), p_loops, cfg)


# -- secondary grazing --------------------------------------------------------

def detect_secondary_grazing(bp: BranchPoint, params: ModelParams, p_loops=2,
                             cfg: ContinuationConfig = DEFAULT_CONTINUATION) -> float:
    """Largest displacement reached on the p - 1 non-impacting loops.

    Zero marks a secondary grazing; ``-inf`` when p = 1 (no such loop).
    """
    if p_loops < 2:
        return -math.inf
    pars = params.with_omega(bp.omega).with_amp(bp.amp)
    maxima = loop_maxima(bp.impact, p_loops, pars, cfg.crossing)
    return max(s.x for s in maxima[:-1])


def detect_secondary_on_branch(branch, params: ModelParams, p_loops=2,
                               cfg: ContinuationConfig = DEFAULT_CONTINUATION) -> BifPoint:
    """First point of a branch where a non-impacting loop reaches the wall."""
    pars = params.with_omega(branch[0].omega)
    fun = lambda bp: detect_secondary_grazing(bp, pars, p_loops, cfg)  # noqa: E731
    for a, b in zip(branch[:-1], branch[1:]):
        if fun(a) * fun(b) <= 0:
            bp = _bisect(a, b, fun, pars, p_loops, cfg)
            return BifPoint(GRAZE2, bp.omega, bp.amp, bp.y_imp, bp.z_imp)
    raise NoBracket("no secondary grazing along the branch")


def stability_margin(bp: BranchPoint) -> float | None:
    """max |lambda| - 1; negative for a stable orbit."""
    if bp.lambda1 is None:
        return None
    return max(abs(bp.lambda1), abs(bp.lambda2)) - 1.0


# -- codimension two ----------------------------------------------------------

class _Locator:
    """Solves for a codim-1 point at fixed omega by bracketing and bisection."""

    def __init__(self, kind, params, p_loops, cfg):
        self.kind = kind
        self.params = params
        self.p_loops = p_loops
        self.cfg = cfg

    def fun(self, bp):
        if self.kind == GRAZE2:
            return detect_secondary_grazing(bp, self.params, self.p_loops, self.cfg)
        return _test_value(bp, self.kind)

    def locate(self, y0, z0, a0, y_floor):
        pars, cfg = self.params, self.cfg
        first = polish(y0, z0, a0, pars, self.p_loops, cfg)
        f0 = self.fun(first)
        if f0 is None:
            raise NoBracket("test function undefined at the predictor")
        if abs(f0) < cfg.bif_tol:
            return first
        # secant probe for the direction, then expand until the sign flips
        h = max(1e-3 * abs(y0), 10 * cfg.y_tol)
        prev, fprev = first, f0
        probe = polish(y0 + h, first.z_imp, first.amp, pars, self.p_loops, cfg)
        fp = self.fun(probe)
        if fp is None:
            raise NoBracket("test function undefined at the probe")
        if fp * f0 <= 0:
            return _bisect(first, probe, self.fun, pars, self.p_loops, cfg)
        slope = (fp - f0) / h
        step = -f0 / slope if slope != 0 else -h
        if step > 0:
            prev, fprev = probe, fp
        step = 1.5 * step
        for _ in range(40):
            y = prev.y_imp + step
            if y < y_floor:
                y = 0.5 * (prev.y_imp + y_floor)
                if prev.y_imp - y_floor < 1e-3 * y_floor:
                    raise NoBracket("bracket search reached the y_imp floor")
            # predictor: the nearest solved point
            nxt = polish(y, prev.z_imp, prev.amp, pars, self.p_loops, cfg)
            fn = self.fun(nxt)
            if fn is None:
                raise NoBracket("test function undefined during bracket search")
            if fn * fprev <= 0:
                return _bisect(prev, nxt, self.fun, pars, self.p_loops, cfg)
            prev, fprev = nxt, fn
            step *= 2.0
        raise NoBracket("bracket search did not find a sign change")


def locate_at_omega(kind, omega, y0, z0, a0, params: ModelParams, p_loops=2,
                    cfg: ContinuationConfig = DEFAULT_CONTINUATION, y_floor=None) -> BranchPoint:
    """Branch point at forcing frequency ``omega`` where the ``kind`` condition holds."""
    if y_floor is None:
        y_floor = 2.0 * cfg.multiplier_guard
    loc = _Locator(kind, params.with_omega(omega), p_loops, cfg)
    return loc.locate(y0, z0, a0, y_floor)


def continue_codim2(start: BifPoint, kind, domega: float, params: ModelParams,
                    p_loops=2, cfg: ContinuationConfig = DEFAULT_CONTINUATION,
                    omega_min=0.0, omega_max=math.inf, max_steps=10_000,
                    min_domega=1e-9, watch_secondary=None,
                    watch_stability=None) -> Codim2Curve:
    """Follow a PD, SN or GRAZE2 curve in (omega, A) by stepping omega.

    Stop rules: y_imp below ``cfg.resonance_y`` (resonance), the step in
    omega shrinking below ``min_domega`` (bracket collapse), omega leaving
    [omega_min, omega_max], the non-impacting loop reaching the wall
    (``watch_secondary``, default for SN) and the orbit on the curve losing
    stability (``watch_stability``, default for GRAZE2).  The last two end
    with a point bisected in omega onto the event.
    """
    if watch_secondary is None:
        watch_secondary = kind == SN
    if watch_stability is None:
        watch_stability = kind == GRAZE2
    pts = [start]
    ws, ys, zs, amps = [start.omega], [start.y_imp], [start.z_imp], [start.amp]
    h = domega
    reason = "max_steps"
    y_floor = 0.5 * cfg.resonance_y
    event = None
    if watch_secondary and kind != GRAZE2:
        event = ("secondary_grazing",
                 lambda bp: detect_secondary_grazing(bp, params, p_loops, cfg))
    elif watch_stability:
        event = ("stability_loss", stability_margin)
    f_prev = None
    if event is not None:
        f_prev = event[1](locate_at_omega(kind, start.omega, start.y_imp, start.z_imp,
                                          start.amp, params, p_loops, cfg, y_floor))
    for _ in range(max_steps):
        w = ws[-1] + h
        if not omega_min <= w <= omega_max:
            if abs(h) > min_domega and (ws[-1] != omega_min and ws[-1] != omega_max):
                w = min(max(w, omega_min), omega_max)
            else:
                reason = "omega_window"
                break
        yp = _extrapolate(ws, ys, w)
        if yp <= y_floor:
            yp = 0.5 * (ys[-1] + y_floor)
        zp = _extrapolate(ws, zs, w)
        ap = _extrapolate(ws, amps, w)
        try:
            bp = locate_at_omega(kind, w, yp, zp, ap, params, p_loops, cfg, y_floor)
        except GrazeContError as exc:
            log.debug("codim-2 step to omega=%.10g failed: %s", w, exc)
            h *= 0.5
            if abs(h) < min_domega:
                reason = "resonance" if ys[-1] < 100 * cfg.resonance_y else "bracket_collapsed"
                break
            continue
        if event is not None:
            f = event[1](bp)
            if f is not None and f_prev is not None and f * f_prev <= 0 and f != f_prev:
                pts.append(_event_terminus(kind, event, ws[-1], w, pts[-1], bp,
                                           params, p_loops, cfg))
                reason = event[0]
                break
            f_prev = f
        pts.append(BifPoint(kind, w, bp.amp, bp.y_imp, bp.z_imp))
        ws.append(w)
        ys.append(bp.y_imp)
        zs.append(zs[-1] + wrap_centered(bp.z_imp - zs[-1]))
        amps.append(bp.amp)
        if bp.y_imp < cfg.resonance_y:
            reason = "resonance"
            break
        if abs(h) < abs(domega):
            h = math.copysign(min(abs(domega), 2 * abs(h)), domega)
        if w in (omega_min, omega_max):
            reason = "omega_window"
            break
    if reason == "resonance":
        pts.append(_resonance_point(pts))
    return Codim2Curve(kind, pts, reason)


def trace_both_ways(start: BifPoint, kind, domega: float, params: ModelParams,
                    p_loops=2, cfg: ContinuationConfig = DEFAULT_CONTINUATION,
                    omega_min=0.0, omega_max=math.inf, max_steps=10_000):
    """Follow a codim-2 curve from ``start`` towards lower and higher omega.

    Returns the points ordered by the walk from the low-omega end to the
    high-omega end, and the two stop reasons (low end, high end).
    """
    step = abs(domega)
    down = continue_codim2(start, kind, -step, params, p_loops, cfg,
                           omega_min, omega_max, max_steps)
    up = continue_codim2(start, kind, step, params, p_loops, cfg,
                         omega_min, omega_max, max_steps)
    pts = down.points[::-1] + up.points[1:]
    return pts, (down.stop_reason, up.stop_reason)


def _resonance_point(pts) -> BifPoint:
    """Extrapolate (omega, A) of a curve to y_imp = 0."""
    tail = pts[-3:]
    ys = [p.y_imp for p in tail]
    if len(tail) >= 2 and len(set(ys)) == len(ys):
        w = _extrapolate(ys, [p.omega for p in tail], 0.0)
        a = _extrapolate(ys, [p.amp for p in tail], 0.0)
    else:
        w, a = tail[-1].omega, tail[-1].amp
    z = tail[-1].z_imp
    return BifPoint(RESONANCE, w, a, 0.0, z, note="resonance")


def _event_terminus(kind, event, w_in, w_out, p_in, bp_out, params, p_loops, cfg):
    """Bisect in omega for the point where a codim-2 curve meets ``event``."""
    name, fun = event
    lo, hi = w_in, w_out
    lo_pt = p_in
    hi_pt = BifPoint(kind, w_out, bp_out.amp, bp_out.y_imp, bp_out.z_imp)
    f_hi = fun(bp_out)
    best, f_best = hi_pt, f_hi
    for _ in range(60):
        if abs(hi - lo) < 1e-10 or abs(f_best) < cfg.bif_tol:
            break
        w = 0.5 * (lo + hi)
        bp = locate_at_omega(kind, w, 0.5 * (lo_pt.y_imp + hi_pt.y_imp),
                             lo_pt.z_imp + 0.5 * wrap_centered(hi_pt.z_imp - lo_pt.z_imp),
                             0.5 * (lo_pt.amp + hi_pt.amp), params, p_loops, cfg)
        f = fun(bp)
        pt = BifPoint(kind, w, bp.amp, bp.y_imp, bp.z_imp)
        if f * f_hi > 0:
            hi, hi_pt = w, pt
        else:
            lo, lo_pt = w, pt
        if abs(f) <= abs(f_best):
            best, f_best = pt, f
    return replace(best, note=name)


def grazing_curve(omega_min, omega_max, n_samples, zeta):
    """Samples (omega, A_graz(omega)) of the grazing curve."""
    if n_samples <= 0:
        return []
    if omega_min <= 0 or omega_max <= 0:
        raise ValueError("omega range must be positive")
    ws = np.linspace(omega_min, omega_max, n_samples) if n_samples > 1 else np.array([omega_min])
    return [(float(w), float(a_graz(w, zeta))) for w in ws]


def grazing_points(omega_min, omega_max, n_samples, zeta):
    """The grazing curve as GRAZE bifurcation records."""
    return [BifPoint(GRAZE, w, a, 0.0, float(z_graz(w, zeta)))
            for w, a in grazing_curve(omega_min, omega_max, n_samples, zeta)]
