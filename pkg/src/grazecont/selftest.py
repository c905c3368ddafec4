"""Quick self-checks of the numerics, used by ``graze-cont selftest``.

Each check returns a :class:`Check`; none of them raises on a numerical
failure, so one broken piece does not hide the others.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GrazeContError
from .maps import CrossingSolverConfig, disc_correction, next_section_crossing
from .oscillator import FlowJet, ModelParams, flow
from .points import ImpactPoint, SectionPoint, State, wrap_centered
from .vivid import evaluate

SEED = 20240601


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


def _params(cfg):
    return ModelParams(cfg.zeta, cfg.eps, cfg.omega, cfg.amp)


def _random_tuples(rng, n, params):
    for _ in range(n):
        t0 = rng.uniform(-10.0, 10.0)
        yield (t0 + rng.uniform(-15.0, 15.0), rng.uniform(-2.0, 1.0),
               rng.uniform(-1.5, 1.5), t0)


def ode_residual(cfg, n=1000) -> Check:
    params = _params(cfg)
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for t, x0, y0, t0 in _random_tuples(rng, n, params):
        j = flow(t, x0, y0, t0, params)
        res = j.dtt + 2 * params.zeta * j.dt + j.value + 1 - params.amp * math.cos(params.omega * t)
        worst = max(worst, abs(res))
    return Check("ode_residual", worst < 1e-12, f"max residual {worst:.2e}")


_PARTIALS = ("dt", "dtt", "dx0", "dy0", "dt0", "dA", "dx0_dt", "dy0_dt", "dt0_dt", "dA_dt")


def fd_jet(t, x0, y0, t0, params: ModelParams, h=1e-6) -> FlowJet:
    """Central finite differences of the flow, field by field."""

    def val(t=t, x0=x0, y0=y0, t0=t0, amp=params.amp):
        return flow(t, x0, y0, t0, params.with_amp(amp))

    def d(key, attr):
        plus = val(**{key: _base[key] + h})
        minus = val(**{key: _base[key] - h})
        return (getattr(plus, attr) - getattr(minus, attr)) / (2 * h)

    _base = dict(t=t, x0=x0, y0=y0, t0=t0, amp=params.amp)
    return FlowJet(
        value=val().value,
        dt=d("t", "value"), dtt=d("t", "dt"),
        dx0=d("x0", "value"), dy0=d("y0", "value"), dt0=d("t0", "value"),
        dA=d("amp", "value"),
        dx0_dt=d("x0", "dt"), dy0_dt=d("y0", "dt"), dt0_dt=d("t0", "dt"),
        dA_dt=d("amp", "dt"),
    )


def flow_partials(cfg, n=200) -> Check:
    params = _params(cfg)
    rng = np.random.default_rng(SEED + 1)
    worst, where = 0.0, ""
    for t, x0, y0, t0 in _random_tuples(rng, n, params):
        an = flow(t, x0, y0, t0, params)
        fd = fd_jet(t, x0, y0, t0, params)
        for name in _PARTIALS:
            a, b = getattr(an, name), getattr(fd, name)
            err = abs(a - b) / max(abs(a), 1.0)
            if err > worst:
                worst, where = err, name
    return Check("flow_partials", worst < 1e-6, f"max rel err {worst:.2e} ({where})")


def section_membership(cfg, n=200) -> Check:
    params = _params(cfg)
    crossing = CrossingSolverConfig(time_tol=cfg.time_tol)
    rng = np.random.default_rng(SEED + 2)
    worst_v, worst_a = 0.0, -math.inf
    try:
        for _ in range(n):
            s = State(rng.uniform(-2.0, 0.5), rng.uniform(-1.5, 1.5), rng.uniform(0, 20))
            for direction in (1, -1):
                st, _ = next_section_crossing(s, direction, params, crossing)
                acc = params.trajectory(s.x, s.y, s.t).acceleration(st.t)
                worst_v = max(worst_v, abs(st.y))
                worst_a = max(worst_a, float(acc))
    except GrazeContError as exc:
        return Check("section_membership", False, str(exc))
    ok = worst_v < 1e-10 and worst_a < 0
    return Check("section_membership", ok, f"max |y| {worst_v:.2e}, max accel {worst_a:.3g}")


def vivid_jacobian_fd(cfg, n=20, h=1e-6) -> Check:
    base = _params(cfg).at_grazing()
    rng = np.random.default_rng(SEED + 3)
    worst = 0.0
    try:
        for _ in range(n):
            y = rng.uniform(-0.05, 0.05)
            z = base.z_graz + rng.uniform(-0.05, 0.05)
            params = base.with_mu(rng.uniform(0.0, 0.01))
            ev = evaluate(ImpactPoint(y, z), cfg.p_loops, params)

            def v(y=y, z=z, mu=params.mu):
                return evaluate(ImpactPoint(y, z), cfg.p_loops, base.with_mu(mu),
                                jacobian=False).value.as_array()

            cols = [(v(y=y + h) - v(y=y - h)) / (2 * h),
                    (v(z=z + h) - v(z=z - h)) / (2 * h),
                    (v(mu=params.mu + h) - v(mu=params.mu - h)) / (2 * h)]
            an = [ev.jac[:, 0], ev.jac[:, 1], ev.dmu]
            for a, b in zip(an, cols):
                worst = max(worst, float(np.max(np.abs(a - b)) / max(np.max(np.abs(a)), 1.0)))
    except GrazeContError as exc:
        return Check("vivid_jacobian", False, str(exc))
    return Check("vivid_jacobian", worst < 1e-5, f"max rel err {worst:.2e}")


def grazing_smoothness(cfg, n=41) -> Check:
    params = _params(cfg).at_grazing().with_mu(1e-4)
    ys = np.linspace(-1e-3, 1e-3, n)
    try:
        vals = np.array([evaluate(ImpactPoint(float(y), params.z_graz), cfg.p_loops, params,
                                  jacobian=False).value.as_array() for y in ys])
    except GrazeContError as exc:
        return Check("grazing_smoothness", False, str(exc))
    worst = 0.0
    for k in range(2):
        coef = np.polyfit(ys, vals[:, k], 3)
        worst = max(worst, float(np.max(np.abs(np.polyval(coef, ys) - vals[:, k]))))
    return Check("grazing_smoothness", worst < 1e-12, f"cubic fit residual {worst:.2e}")


def disc_asymptotics(cfg) -> Check:
    params = _params(cfg).at_grazing()
    eps = params.eps
    errs = []
    try:
        for x in (1e-4, 1e-6, 1e-8):
            s = SectionPoint(x, params.z_graz)
            r = disc_correction(s, params)
            e1 = abs(r.x / (eps * eps * x) - 1)
            e2 = abs(wrap_centered(r.z - s.z) / (-math.sqrt(2) * (1 + eps) * math.sqrt(x)) - 1)
            errs.append(max(e1, e2))
    except GrazeContError as exc:
        return Check("disc_asymptotics", False, str(exc))
    ok = errs[1] < 0.05 and errs[0] > errs[1] > errs[2]
    return Check("disc_asymptotics", ok,
                 "rel err " + " ".join(f"{e:.1e}" for e in errs) + " at x=1e-4,1e-6,1e-8")


CHECKS = (ode_residual, flow_partials, section_membership, vivid_jacobian_fd,
          grazing_smoothness, disc_asymptotics)


def run_all(cfg):
    out = []
    for check in CHECKS:
        try:
            out.append(check(cfg))
        except (ValueError, ArithmeticError) as exc:
            out.append(Check(check.__name__, False, f"{type(exc).__name__}: {exc}"))
    return out
