"""Continuation of maximal periodic orbits of a forced impact oscillator.

Periodic orbits with one impact per ``p`` forcing loops are found as zeros of
a smooth "VIVID" function built from maps that stay regular at grazing, so
branches can be followed into and through a grazing bifurcation.
"""

from .continuation import (GRAZE, GRAZE2, PD, RESONANCE, SN, BifPoint, BranchPoint,
                           Codim2Curve, ContinuationConfig, branch_from_impact,
                           continue_branch, continue_codim2, detect_all_codim1,
                           detect_codim1, detect_secondary_grazing,
                           detect_secondary_on_branch, grazing_curve, grazing_points,
                           locate_at_omega, polish, refine_codim1, seed_by_simulation,
                           stability_margin, trace_both_ways)
from .errors import (GrazeContError, InverseBranchFailure, MaxIterExceeded,
                     NearGrazingSingularity, NoBracket, NoCrossingFound,
                     NoPeriodicAttractor, SingularCrossing, SingularJacobian, StepFailed)
from .maps import (BACKWARD, FORWARD, CrossingSolverConfig, disc_correction,
                   full_poincare_step, loop_maxima, next_section_crossing,
                   p_global_p, p_global_p_jacobian, p_virt, p_virt_jacobian,
                   simulate_hybrid)
from .oscillator import (FlowJet, ModelParams, Trajectory, a_graz, flow, omega1_of,
                         particular, reset, reset_jacobian, resonance_frequency,
                         vector_field, z_graz)
from .points import ImpactPoint, SectionPoint, State, wrap_centered, wrap_phase
from .vivid import (Multipliers, NewtonConfig, NewtonResult, VividValue,
                    eigenvalues_2x2, evaluate, newton_solve, stability_multipliers,
                    vivid, vivid_jacobian)

__version__ = "0.1.0"
