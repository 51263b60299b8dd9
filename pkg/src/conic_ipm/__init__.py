"""Primal-dual interior-point solver for quadratic conic programs.

Problems are given in the canonical form

    minimize    (1/2) x'Px + q'x
    subject to  Ax + s = b,   s in K,

where K is a product of zero, nonnegative, second-order, exponential,
power and (small) PSD cones.  The solver runs a homogeneous-embedding
predictor-corrector method and returns either an optimal primal-dual pair
or a strong infeasibility certificate.
"""
from .errors import (BadConeSpec, ConicError, DegenerateDenominator,
                     DimensionMismatch, DomainError, FactorizationFailure,
                     LostInterior, NonFiniteData, NonSymmetricP,
                     PatternMismatch, ScalingFailure, StepTooSmall,
                     ValidationError)
from .generators import (GenSpec, InfeasibleBoxBudget, gen_entropy, gen_huber,
                         gen_multistage_portfolio, gen_portfolio)
from .io import read_problem, write_problem
from .ipm import (IterateState, Residuals, SolveResult, Solver,
                  SolverSettings, Status, centering, solve)
from .kkt.system import (FULL, MIXED, KKTSystem, RefinementSettings, assemble)
from .metrics import perf_profiles, shifted_geomean
from .problem import (ConeSpec, Equilibration, ProblemData, equilibrate,
                      exp_cone, nonneg_cone, pow_cone, psd_cone,
                      reorder_cones, soc_cone, unscale_solution, validate,
                      zero_cone)
from .cones.set import (ConeSet, barrier_gradient, barrier_value, degree,
                        is_in_cone, is_in_dual_cone, membership_violation,
                        unit_init)
from .cones.scaling import (ScalingState, apply_H, combined_ds,
                            neighborhood_ok, shadow_iterates, update_scaling)
from .cones.steps import StepLengthRequest, soc_residuals_batch, step_length
from .sparse import CsrMatrix

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
