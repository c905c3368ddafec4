import math

import numpy as np
import pytest

from grazecont import (ImpactPoint, MaxIterExceeded, ModelParams, NearGrazingSingularity,
                       NewtonConfig, SectionPoint, SingularJacobian, eigenvalues_2x2,
                       evaluate, full_poincare_step, newton_solve, stability_multipliers,
                       VividValue, vivid, vivid_jacobian, wrap_centered)
from grazecont.vivid import section_point

P = ModelParams(0.02, 0.9, 0.81, 0.355)
G = P.at_grazing()


def fd_vivid(y, z, mu, p_loops=2, h=1e-6):
    def v(y, z, mu):
        return vivid(ImpactPoint(y, z), p_loops, G.with_mu(mu)).as_array()

    jac = np.column_stack([(v(y + h, z, mu) - v(y - h, z, mu)) / (2 * h),
                           (v(y, z + h, mu) - v(y, z - h, mu)) / (2 * h)])
    return jac, (v(y, z, mu + h) - v(y, z, mu - h)) / (2 * h)


@pytest.mark.parametrize("p_loops", [1, 2, 3])
def test_zero_at_grazing(p_loops):
    v = vivid(ImpactPoint(0.0, G.z_graz), p_loops, G)
    assert v.norm() < 1e-8


def test_requires_loops():
    with pytest.raises(ValueError):
        vivid(ImpactPoint(0.0, G.z_graz), 0, G)


def test_jacobian_matches_finite_differences():
    rng = np.random.default_rng(11)
    for _ in range(100):
        y = rng.uniform(-0.05, 0.1)
        z = G.z_graz + rng.uniform(-0.05, 0.05)
        mu = rng.uniform(0.0, 0.01)
        jac, dmu = vivid_jacobian(ImpactPoint(y, z), 2, G.with_mu(mu))
        fj, fm = fd_vivid(y, z, mu)
        scale = max(np.max(np.abs(jac)), np.max(np.abs(dmu)), 1.0)
        assert np.max(np.abs(jac - fj)) < 1e-5 * scale
        assert np.max(np.abs(dmu - fm)) < 1e-5 * scale


def test_jacobian_finite_and_smooth_at_grazing():
    jac, dmu = vivid_jacobian(ImpactPoint(0.0, G.z_graz), 2, G)
    assert np.all(np.isfinite(jac)) and np.all(np.isfinite(dmu))
    # regression anchor for the parameter derivative at the grazing zero
    assert dmu == pytest.approx([4.96835475, 0.51311325], rel=1e-6)
    for y in (-2e-4, -1e-5, 1e-5, 2e-4):
        fj, fm = fd_vivid(y, G.z_graz, 0.0)
        j, m = vivid_jacobian(ImpactPoint(y, G.z_graz), 2, G)
        assert np.max(np.abs(j - fj)) < 1e-5 * np.max(np.abs(j))
        assert np.max(np.abs(m - fm)) < 1e-5 * np.max(np.abs(m))


def test_value_is_polynomial_through_grazing():
    ys = np.linspace(-1e-3, 1e-3, 41)
    vals = np.array([vivid(ImpactPoint(float(y), G.z_graz), 2, G).as_array() for y in ys])
    for k in range(2):
        coef = np.polyfit(ys, vals[:, k], 3)
        assert np.max(np.abs(np.polyval(coef, ys) - vals[:, k])) < 1e-12


def test_newton_at_grazing_is_immediate():
    r = newton_solve(0.0, G.z_graz, G.a_graz, 2, G)
    assert r.iterations <= 1
    assert r.z == pytest.approx(G.z_graz, abs=1e-12)
    assert r.amp == pytest.approx(G.a_graz, abs=1e-12)


def test_newton_small_impact():
    r = newton_solve(0.01, G.z_graz, G.a_graz, 2, G)
    assert r.iterations <= 6
    assert r.residual < 1e-10
    assert r.amp > G.a_graz
    assert isinstance(r.amp, float) and isinstance(r.z, float)


def test_newton_poor_guess_reports_what_it_did():
    try:
        r = newton_solve(0.01, G.z_graz + math.pi, G.a_graz, 2, G)
    except MaxIterExceeded as exc:
        assert exc.z is not None and exc.amp is not None
    else:
        assert vivid(ImpactPoint(0.01, r.z), 2, G.with_amp(r.amp)).norm() < 1e-10


def test_newton_damping_monotone():
    cfg = NewtonConfig(damping=True, max_iter=30)
    r = newton_solve(0.05, G.z_graz - 0.05, G.a_graz, 2, G, cfg)
    assert r.residual < 1e-10


def test_newton_config_validation():
    with pytest.raises(ValueError):
        NewtonConfig(tol=0)
    with pytest.raises(ValueError):
        NewtonConfig(max_iter=0)
    with pytest.raises(ValueError):
        NewtonConfig(norm="l1")


def test_residual_norms():
    v = VividValue(3.0, -4.0)
    assert v.norm() == 4.0 and v.norm("l2") == 5.0
    with pytest.raises(ValueError):
        v.norm("l1")
    r = newton_solve(0.01, G.z_graz, G.a_graz, 2, G, NewtonConfig(norm="l2"))
    assert math.hypot(*r.evaluation.value.as_array()) == r.residual < 1e-10


def test_singular_jacobian(monkeypatch):
    import sys

    vmod = sys.modules["grazecont.vivid"]
    real = vmod.evaluate

    def flat(*args, **kw):
        ev = real(*args, **kw)
        return vmod.VividEval(**{**ev.__dict__, "jac": np.zeros((2, 2)),
                                 "dmu": np.zeros(2)})

    monkeypatch.setattr(vmod, "evaluate", flat)
    with pytest.raises(SingularJacobian):
        newton_solve(0.01, G.z_graz, G.a_graz, 2, G)


def test_converged_orbit_round_trip(pd_case_seed, pd_case_params):
    params = pd_case_params.with_amp(pd_case_seed.amp)
    ev = evaluate(pd_case_seed.impact, 2, params)
    assert ev.value.norm() < 1e-10
    s = section_point(ev, params)
    a, imp_a = full_poincare_step(SectionPoint(s.x, s.z), params)
    b, imp_b = full_poincare_step(SectionPoint(a.x, a.z), params)
    assert imp_a is not None and imp_b is None
    assert imp_a.y == pytest.approx(pd_case_seed.y_imp, abs=1e-8)
    assert abs(wrap_centered(imp_a.z - pd_case_seed.z_imp)) < 1e-8
    assert b.x == pytest.approx(s.x, abs=1e-8)


def test_eigenvalues_of_2x2():
    rng = np.random.default_rng(3)
    for _ in range(200):
        m = rng.normal(size=(2, 2)) * rng.choice([1e-3, 1, 1e3])
        mult = eigenvalues_2x2(m)
        ref = np.linalg.eigvals(m)
        assert mult.lambda1 + mult.lambda2 == pytest.approx(np.trace(m), rel=1e-12, abs=1e-12)
        assert mult.lambda1 * mult.lambda2 == pytest.approx(np.linalg.det(m), rel=1e-10, abs=1e-12)
        assert sorted(abs(ref)) == pytest.approx(sorted([abs(mult.lambda1), abs(mult.lambda2)]),
                                                 rel=1e-8)
        if mult.is_real:
            assert mult.lambda1.real >= mult.lambda2.real
        else:
            assert mult.lambda1 == mult.lambda2.conjugate() and mult.lambda1.imag > 0


def test_multipliers_match_monodromy(pd_case_branch):
    for bp in pd_case_branch[::20]:
        if bp.lambda1 is None or bp.y_imp <= 0:
            continue
        params = ModelParams(0.02, 0.9, bp.omega, bp.amp)
        dq = evaluate(bp.impact, 2, params).monodromy()
        m = stability_multipliers(bp.impact, 2, params)
        assert m.lambda1 + m.lambda2 == pytest.approx(np.trace(dq), abs=1e-12 * max(1, abs(np.trace(dq))))
        assert m.lambda1 * m.lambda2 == pytest.approx(np.linalg.det(dq), abs=1e-12)


def test_multipliers_change_from_complex_to_real(pd_case_branch):
    kinds = [bp.lambda1.imag == 0 for bp in pd_case_branch if bp.lambda1 is not None and bp.y_imp > 0]
    assert not kinds[0] and kinds[-1]
    flips = sum(a != b for a, b in zip(kinds[:-1], kinds[1:]))
    assert flips == 1


def test_near_grazing_singularity():
    with pytest.raises(NearGrazingSingularity):
        stability_multipliers(ImpactPoint(0.0, G.z_graz), 2, G)


def test_multipliers_agree_with_finite_difference_map(pd_case_branch, pd_case_params):
    bp = next(b for b in pd_case_branch if b.y_imp < 0.05)
    params = pd_case_params.with_amp(bp.amp)
    s = section_point(evaluate(bp.impact, 2, params), params)

    def p2(x, z):
        a, _ = full_poincare_step(SectionPoint(x, z), params)
        b, _ = full_poincare_step(SectionPoint(a.x, a.z), params)
        return np.array([b.x, b.z])

    h = 1e-3 * s.x
    jac = np.column_stack([(p2(s.x + h, s.z) - p2(s.x - h, s.z)) / (2 * h),
                           (p2(s.x, s.z + h) - p2(s.x, s.z - h)) / (2 * h)])
    ref = sorted(np.linalg.eigvals(jac).real)
    assert sorted([bp.lambda1.real, bp.lambda2.real]) == pytest.approx(ref, rel=1e-4)
