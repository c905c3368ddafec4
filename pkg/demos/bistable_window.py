"""Coexistence of an impacting orbit with the non-impacting one.

At omega = 0.799 the two-loop branch leaves grazing towards smaller A and
folds back at a saddle-node point, so for A_SN < A < A_graz a stable
impacting orbit coexists with the stable non-impacting orbit.  Both are
found here by simulating from two different starting points: the maximum
of the non-impacting orbit (x = A / A_graz - 1 at z_graz) and a point near
the impacting orbit.
"""

from grazecont import (SN, ModelParams, SectionPoint, branch_from_impact, continue_branch,
                       detect_codim1, seed_by_simulation, simulate_hybrid)


def impacts_per_step(params, start, steps=400, tail=40):
    out = simulate_hybrid(start, steps, params)
    return sum(imp is not None for _, imp in out[-tail:]) / tail


def main():
    ref = ModelParams(0.02, 0.9, 0.799, 0.368)
    seed = branch_from_impact(seed_by_simulation(ref), ref)
    branch = continue_branch(seed, -2e-3, int(seed.y_imp / 2e-3) + 5, ref)
    sn = detect_codim1(branch, SN, ref)
    print(f"A_SN = {sn.amp:.8f}, A_graz = {ref.a_graz:.8f}")

    amp = 0.5 * (sn.amp + ref.a_graz)
    params = ref.with_amp(amp)
    near = min((bp for bp in branch if bp.stable), key=lambda bp: abs(bp.amp - amp))
    print(f"A = {amp:.8f}: stable branch point near y_imp = {near.y_imp:.4f}")

    quiet = impacts_per_step(params, SectionPoint(amp / ref.a_graz - 1.0, params.z_graz))
    loud = impacts_per_step(params, SectionPoint(0.05, near.z_imp))
    print(f"impacts per loop from the non-impacting orbit: {quiet:.2f}")
    print(f"impacts per loop from near the impacting orbit: {loud:.2f}")


if __name__ == "__main__":
    main()
