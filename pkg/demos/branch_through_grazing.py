"""Follow a two-loop maximal orbit from a stable seed down through grazing.

Prints the branch every few steps and any period-doubling or saddle-node
point on it.  Try omega = 0.799, amp = 0.368 for a saddle-node.

    python3 demos/branch_through_grazing.py [omega] [amp]
"""

import sys

from grazecont import (PD, SN, ModelParams, NoBracket, branch_from_impact, continue_branch,
                       detect_codim1, seed_by_simulation)


def main(omega=0.81, amp=0.355):
    params = ModelParams(0.02, 0.9, omega, amp)
    seed = branch_from_impact(seed_by_simulation(params), params)
    print(f"seed: y_imp={seed.y_imp:.8f} z_imp={seed.z_imp:.8f} stable={seed.stable}")
    branch = continue_branch(seed, -2e-3, int(seed.y_imp / 2e-3) + 15, params)

    print(f"\nA_graz = {params.a_graz:.10f}")
    print(f"{'y_imp':>10} {'A':>13} {'|l1|':>10} {'|l2|':>10}  stable")
    for bp in branch[::10]:
        if bp.lambda1 is None:
            mult = f"{'-':>10} {'-':>10}"
        else:
            mult = f"{abs(bp.lambda1):10.4f} {abs(bp.lambda2):10.4f}"
        print(f"{bp.y_imp:10.5f} {bp.amp:13.10f} {mult}  {bp.stable}")

    for kind in (PD, SN):
        try:
            bif = detect_codim1(branch, kind, params)
        except NoBracket:
            continue
        print(f"\n{kind} at y_imp={bif.y_imp:.8f}, A={bif.amp:.10f} "
              f"(A - A_graz = {bif.amp - params.a_graz:+.3e})")


if __name__ == "__main__":
    main(*(float(a) for a in sys.argv[1:3]))
