"""Predictor-corrector interior-point loop on the homogeneous embedding.

The embedding trades (x, s) optimality and strong-infeasibility detection
for one root-finding problem in (x, z, s, tau, kappa):

    G(v) = [0; s; kappa] - [P A' q; -A 0 b; -q' -b' 0] [x; z; tau]
                         + [0; 0; x'Px/tau] = 0,

smoothed blockwise by s = -mu grad f(z), tau*kappa = mu.  Each iteration
linearizes G, solves the reduced quasi-definite system with two right-hand
sides, recovers the tau component by the P-norm formula, and takes an
affine (predictor) plus combined (corrector) step with a neighborhood
check.  Termination, infeasibility tests and returned iterates are always
evaluated against the original (unscaled) data.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (ConicError, DegenerateDenominator, LostInterior,
                     PatternMismatch, StepTooSmall)
from .kkt.system import FULL, KKTSystem, RefinementSettings, assemble
from .problem import (Equilibration, ProblemData, equilibrate, reorder_cones,
                      unscale_solution, validate)
from .cones.scaling import (ScalingState, apply_H, combined_ds,
                            neighborhood_ok, update_scaling)
from .cones.set import ConeSet, is_in_cone, is_in_dual_cone, unit_init
from .cones.steps import StepLengthRequest, step_length

MIN_COMBINED_STEP = 1e-11
DENOM_GUARD = 1e-14
STALL_WINDOW = 5
STALL_IMPROVEMENT = 0.99
ALMOST_OPTIMAL_FACTOR = 10.0


class Status:
    OPTIMAL = "optimal"
    PRIMAL_INFEASIBLE = "primal_infeasible"
    DUAL_INFEASIBLE = "dual_infeasible"
    ALMOST_OPTIMAL = "almost_optimal"
    MAX_ITERATIONS = "max_iterations"
    TIME_LIMIT = "time_limit"
    NUMERICAL_ERROR = "numerical_error"
    INSUFFICIENT_PROGRESS = "insufficient_progress"


TERMINAL_OK = (Status.OPTIMAL, Status.PRIMAL_INFEASIBLE, Status.DUAL_INFEASIBLE)


@dataclass
class SolverSettings:
    eps_feas: float = 1e-6
    eps_inf: float = 1e-8
    max_iter: int = 200
    time_limit: float = np.inf
    precision: str = FULL
    delta_s: float | None = None
    delta_d: float | None = None
    beta: float = 1e-6
    backtrack: float = 0.8
    step_scale: float = 0.99
    do_equilibrate: bool = True
    verbose: bool = False
    refinement: RefinementSettings = field(default_factory=RefinementSettings)

    def __post_init__(self):
        if not (0.0 < self.step_scale < 1.0):
            raise ValueError("step_scale must lie in (0, 1)")
        for name in ("eps_feas", "eps_inf", "max_iter", "time_limit", "beta", "backtrack"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


@dataclass
class IterateState:
    """Homogeneous-embedding iterate in the scaled, reordered space."""

    x: np.ndarray
    z: np.ndarray
    s: np.ndarray
    tau: float
    kappa: float
    mu: float

    @property
    def xi(self) -> np.ndarray:
        return self.x / self.tau

    def copy(self) -> "IterateState":
        return IterateState(self.x.copy(), self.z.copy(), self.s.copy(),
                            self.tau, self.kappa, self.mu)


@dataclass
class Residuals:
    """Unscaled residuals, objectives and the norm caches used by Eq-style tests."""

    r_p: np.ndarray
    r_d: np.ndarray
    g_p: float
    g_d: float
    norm_rp: float
    norm_rd: float
    norm_xbar: float
    norm_sbar: float
    norm_zbar: float

    @property
    def gap(self) -> float:
        return abs(self.g_p - self.g_d)


@dataclass
class SolveResult:
    status: str
    x: np.ndarray
    z: np.ndarray
    s: np.ndarray
    certificate: np.ndarray | None
    obj_primal: float
    obj_dual: float
    iterations: int
    setup_seconds: float
    solve_seconds: float
    norm_rp: float
    norm_rd: float
    gap: float
    tau: float
    kappa: float
    mu_initial: float
    mu_final: float

    @property
    def is_terminal_ok(self) -> bool:
        return self.status in TERMINAL_OK


def centering(alpha_affine: float) -> float:
    """Centering parameter sigma = (1 - alpha_a)^3."""
    return (1.0 - alpha_affine) ** 3


class Solver:
    """One problem instance: setup once, solve and re-solve with new values."""

    def __init__(self, problem: ProblemData, settings: SolverSettings | None = None):
        self.settings = settings or SolverSettings()
        t0 = time.perf_counter()
        validate(problem)
        self._original = problem.copy()
        reordered, perm = reorder_cones(problem)
        self._perm = perm
        self._reordered = reordered
        if self.settings.do_equilibrate:
            self._scaled, self._equil = equilibrate(reordered)
        else:
            self._scaled = reordered.copy()
            self._equil = Equilibration.identity(reordered.m, reordered.n)
        self.cones = ConeSet.from_specs(self._scaled.cones)
        self.nu = self.cones.degree
        self._refresh_operators()
        self.kkt = assemble(self._scaled.P, self._scaled.A, self.cones,
                            precision=self.settings.precision,
                            delta_s=self.settings.delta_s,
                            delta_d=self.settings.delta_d)
        self.kkt.symbolic_factor()
        self.setup_seconds = time.perf_counter() - t0

    # -- data plumbing ---------------------------------------------------------

    def _refresh_operators(self) -> None:
        self._P_s = self._scaled.P.to_scipy()
        self._A_s = self._scaled.A.to_scipy()
        self._q_s = self._scaled.q
        self._b_s = self._scaled.b
        self._P_r = self._reordered.P.to_scipy()
        self._A_r = self._reordered.A.to_scipy()
        self._q_r = self._reordered.q
        self._b_r = self._reordered.b
        self._norm_q = float(np.max(np.abs(self._q_r))) if self._q_r.size else 0.0
        self._norm_b = float(np.max(np.abs(self._b_r))) if self._b_r.size else 0.0

    def update_data(self, P=None, A=None, q=None, b=None) -> None:
        """Swap in new values with unchanged patterns and cone structure.

        Equilibration is recomputed from scratch (cheap); the symbolic
        factorization and all solver allocations are reused.
        """
        prob = self._original
        if P is not None:
            if (not np.array_equal(P.rowptr, prob.P.rowptr)
                    or not np.array_equal(P.colidx, prob.P.colidx)):
                raise PatternMismatch("P pattern differs from the setup pattern")
            prob.P = P.copy()
        if A is not None:
            if (not np.array_equal(A.rowptr, prob.A.rowptr)
                    or not np.array_equal(A.colidx, prob.A.colidx)):
                raise PatternMismatch("A pattern differs from the setup pattern")
            prob.A = A.copy()
        if q is not None:
            if len(q) != prob.n:
                raise PatternMismatch("q length changed")
            prob.q = np.asarray(q, dtype=np.float64).copy()
        if b is not None:
            if len(b) != prob.m:
                raise PatternMismatch("b length changed")
            prob.b = np.asarray(b, dtype=np.float64).copy()
        validate(prob)
        reordered, _ = reorder_cones(prob)
        self._reordered = reordered
        if self.settings.do_equilibrate:
            self._scaled, self._equil = equilibrate(reordered)
        else:
            self._scaled = reordered.copy()
            self._equil = Equilibration.identity(reordered.m, reordered.n)
        self._refresh_operators()
        self.kkt.set_matrices(self._scaled.P, self._scaled.A)

    def _unscale(self, state: IterateState):
        return unscale_solution(state.x, state.z, state.s, self._equil)

    def _to_user_rows(self, v: np.ndarray) -> np.ndarray:
        out = np.empty_like(v)
        out[self._perm] = v
        return out

    # -- residuals, termination, infeasibility ---------------------------------

    def compute_residuals(self, state: IterateState) -> Residuals:
        """Residuals and objectives of the normalized iterate on original data."""
        x_u, z_u, s_u = self._unscale(state)
        tau = state.tau
        xb, zb, sb = x_u / tau, z_u / tau, s_u / tau
        px = self._P_r @ xb
        r_p = -(self._A_r @ xb) - sb + self._b_r
        r_d = px + self._A_r.T @ zb + self._q_r
        half_quad = 0.5 * float(xb @ px)
        g_p = half_quad + float(self._q_r @ xb)
        g_d = -half_quad - float(self._b_r @ zb)
        return Residuals(
            r_p=r_p, r_d=r_d, g_p=g_p, g_d=g_d,
            norm_rp=float(np.max(np.abs(r_p))) if r_p.size else 0.0,
            norm_rd=float(np.max(np.abs(r_d))) if r_d.size else 0.0,
            norm_xbar=float(np.max(np.abs(xb))) if xb.size else 0.0,
            norm_sbar=float(np.max(np.abs(sb))) if sb.size else 0.0,
            norm_zbar=float(np.max(np.abs(zb))) if zb.size else 0.0,
        )

    def _termination_ratios(self, res: Residuals) -> tuple[float, float, float]:
        rp_scale = max(1.0, self._norm_b + res.norm_xbar + res.norm_sbar)
        rd_scale = max(1.0, self._norm_q + res.norm_xbar + res.norm_zbar)
        gap_scale = max(1.0, min(abs(res.g_p), abs(res.g_d)))
        return (res.norm_rp / rp_scale, res.norm_rd / rd_scale, res.gap / gap_scale)

    def check_termination(self, res: Residuals, eps: float) -> bool:
        rp, rd, gap = self._termination_ratios(res)
        return rp < eps and rd < eps and gap < eps

    def check_infeasibility(self, state: IterateState) -> str | None:
        eps = self.settings.eps_inf
        x_u, z_u, s_u = self._unscale(state)
        bz = float(self._b_r @ z_u)
        qx = float(self._q_r @ x_u)
        norm_x = float(np.max(np.abs(x_u))) if x_u.size else 0.0
        norm_z = float(np.max(np.abs(z_u))) if z_u.size else 0.0
        norm_s = float(np.max(np.abs(s_u))) if s_u.size else 0.0
        atz = float(np.max(np.abs(self._A_r.T @ z_u))) if x_u.size else 0.0
        if atz < -eps * max(1.0, norm_x + norm_z) * bz and bz < -eps:
            return Status.PRIMAL_INFEASIBLE
        px = float(np.max(np.abs(self._P_r @ x_u))) if x_u.size else 0.0
        axs = float(np.max(np.abs(self._A_r @ x_u + s_u)))
        if (px < -eps * max(1.0, norm_x) * bz
                and axs < -eps * max(1.0, norm_x + norm_s) * qx
                and qx < -eps):
            return Status.DUAL_INFEASIBLE
        return None

    # -- directions -------------------------------------------------------------

    def _g_vector(self, state: IterateState):
        """The three residual rows of G(v) in the scaled space."""
        x, z, tau = state.x, state.z, state.tau
        px = self._P_s @ x
        g_x = -(px + self._A_s.T @ z + self._q_s * tau)
        g_z = state.s + self._A_s @ x - self._b_s * tau
        g_tau = state.kappa + float(self._q_s @ x) + float(self._b_s @ z) \
            + float(x @ px) / tau
        return g_x, g_z, g_tau

    def affine_rhs(self, state: IterateState):
        """Predictor right-hand side d = (G(v), kappa*tau, s)."""
        g_x, g_z, g_tau = self._g_vector(state)
        return g_x, g_z, g_tau, state.s.copy(), state.kappa * state.tau

    def combined_rhs(self, state: IterateState, scaling: ScalingState,
                     delta_aff, sigma: float):
        dx_a, dz_a, dtau_a, ds_a, dkappa_a = delta_aff
        g_x, g_z, g_tau = self._g_vector(state)
        f = 1.0 - sigma
        d_s = combined_ds(scaling, self.cones, state.s, state.z, dz_a, ds_a,
                          sigma, state.mu)
        d_kappa = state.kappa * state.tau + dkappa_a * dtau_a - sigma * state.mu
        return f * g_x, f * g_z, f * g_tau, d_s, d_kappa

    def solve_directions(self, state: IterateState, scaling: ScalingState, d,
                         col2: tuple[np.ndarray, np.ndarray]):
        """Recover the full direction from the two reduced solves.

        The tau step uses the P-norm form of the recovery formula (plus the
        kappa/tau term, without which the unreduced system is not satisfied).
        """
        d_x, d_z, d_tau, d_s, d_kappa = d
        n = self._scaled.n
        rhs1 = np.concatenate([d_x, -(d_z - d_s)])
        sol1 = self.kkt.solve_refined(rhs1, self.settings.refinement)
        dx1, dz1 = sol1.x[:n], sol1.x[n:]
        dx2, dz2 = col2
        tau, kappa = state.tau, state.kappa
        xi = state.xi
        p_dx1 = self._P_s @ dx1
        num = (d_tau - d_kappa / tau + float(self._q_s @ dx1)
               + float(self._b_s @ dz1) + 2.0 * float(xi @ p_dx1))
        diff = dx2 - xi
        den = (kappa / tau
               + float(diff @ (self._P_s @ diff)) - float(dx2 @ (self._P_s @ dx2))
               - float(self._q_s @ dx2) - float(self._b_s @ dz2))
        if abs(den) < DENOM_GUARD:
            raise DegenerateDenominator(f"tau-step denominator {den:.3e}")
        d_tau_step = num / den
        dx = dx1 + d_tau_step * dx2
        dz = dz1 + d_tau_step * dz2
        ds = -d_s - apply_H(scaling, dz)
        d_kappa_step = -(d_kappa + kappa * d_tau_step) / tau
        return dx, dz, d_tau_step, ds, d_kappa_step

    # -- steps -------------------------------------------------------------------

    def _step_request(self, state: IterateState, delta, alpha_max: float = 1.0):
        dx, dz, dtau, ds, dkappa = delta
        return StepLengthRequest(z=state.z, s=state.s, dz=dz, ds=ds,
                                 tau=state.tau, kappa=state.kappa,
                                 dtau=dtau, dkappa=dkappa,
                                 alpha_max=alpha_max,
                                 backtrack=self.settings.backtrack)

    def combined_step_size(self, state: IterateState, delta) -> float:
        """Cone step bound then neighborhood backtracking at the scaled trial point."""
        alpha = step_length(self._step_request(state, delta), self.cones)
        scale = self.settings.step_scale
        dx, dz, dtau, ds, dkappa = delta
        while True:
            a = scale * alpha
            s_t = state.s + a * ds
            z_t = state.z + a * dz
            tau_t = state.tau + a * dtau
            kappa_t = state.kappa + a * dkappa
            mu_t = (float(s_t @ z_t) + tau_t * kappa_t) / (self.nu + 1)
            if neighborhood_ok(self.cones, s_t, z_t, mu_t, self.settings.beta):
                return alpha
            alpha *= self.settings.backtrack
            if alpha < MIN_COMBINED_STEP:
                raise StepTooSmall("neighborhood backtracking fell below the minimum step")

    def take_step(self, state: IterateState, delta, alpha: float) -> IterateState:
        a = self.settings.step_scale * alpha
        dx, dz, dtau, ds, dkappa = delta
        new = IterateState(
            x=state.x + a * dx, z=state.z + a * dz, s=state.s + a * ds,
            tau=state.tau + a * dtau, kappa=state.kappa + a * dkappa, mu=0.0)
        if new.tau <= 0.0 or new.kappa <= 0.0 \
                or not is_in_cone(self.cones, new.s, strict=True) \
                or not is_in_dual_cone(self.cones, new.z, strict=True):
            raise LostInterior("accepted step left the cone interior")
        new.mu = (float(new.s @ new.z) + new.tau * new.kappa) / (self.nu + 1)
        return new

    # -- recovery -----------------------------------------------------------------

    def recover(self, state: IterateState, res: Residuals, status: str,
                iterations: int, solve_seconds: float) -> SolveResult:
        x_u, z_u, s_u = self._unscale(state)
        certificate = None
        if status not in (Status.PRIMAL_INFEASIBLE, Status.DUAL_INFEASIBLE):
            x_out = x_u / state.tau
            z_out = self._to_user_rows(z_u / state.tau)
            s_out = self._to_user_rows(s_u / state.tau)
        else:
            x_out = x_u
            z_out = self._to_user_rows(z_u)
            s_out = self._to_user_rows(s_u)
            if status == Status.PRIMAL_INFEASIBLE:
                bz = float(self._original.b @ z_out)
                certificate = z_out / abs(bz)
            else:
                qx = float(self._original.q @ x_out)
                certificate = x_out / abs(qx)
        return SolveResult(
            status=status, x=x_out, z=z_out, s=s_out, certificate=certificate,
            obj_primal=res.g_p, obj_dual=res.g_d, iterations=iterations,
            setup_seconds=self.setup_seconds, solve_seconds=solve_seconds,
            norm_rp=res.norm_rp, norm_rd=res.norm_rd, gap=res.gap,
            tau=state.tau, kappa=state.kappa,
            mu_initial=self._mu_initial, mu_final=state.mu)

    # -- main loop ------------------------------------------------------------------

    def solve(self, observer=None) -> SolveResult:
        t_start = time.perf_counter()
        settings = self.settings
        s0, z0 = unit_init(self.cones)
        state = IterateState(x=np.zeros(self._scaled.n), z=z0, s=s0,
                             tau=1.0, kappa=1.0, mu=0.0)
        state.mu = (float(s0 @ z0) + 1.0) / (self.nu + 1)
        self._mu_initial = state.mu

        best = (np.inf, state.copy(), self.compute_residuals(state))
        stall = {"mu": np.inf, "rp": np.inf, "rd": np.inf, "count": 0}
        res = best[2]
        status = None
        iterations = 0

        try:
            for it in range(settings.max_iter + 1):
                res = self.compute_residuals(state)
                score = max(self._termination_ratios(res))
                if score < best[0]:
                    best = (score, state.copy(), res)
                if settings.verbose:
                    print(f"iter {it:3d}  mu={state.mu:9.2e}  rp={res.norm_rp:9.2e}  "
                          f"rd={res.norm_rd:9.2e}  gap={res.gap:9.2e}  tau={state.tau:8.2e}")
                if self.check_termination(res, settings.eps_feas):
                    status = Status.OPTIMAL
                    break
                inf_status = self.check_infeasibility(state)
                if inf_status is not None:
                    status = inf_status
                    break
                if it >= settings.max_iter:
                    status = Status.MAX_ITERATIONS
                    break
                if time.perf_counter() - t_start > settings.time_limit:
                    status = Status.TIME_LIMIT
                    break
                improved = (state.mu < STALL_IMPROVEMENT * stall["mu"]
                            or res.norm_rp < STALL_IMPROVEMENT * stall["rp"]
                            or res.norm_rd < STALL_IMPROVEMENT * stall["rd"])
                stall["mu"] = min(stall["mu"], state.mu)
                stall["rp"] = min(stall["rp"], res.norm_rp)
                stall["rd"] = min(stall["rd"], res.norm_rd)
                stall["count"] = 0 if improved else stall["count"] + 1
                if stall["count"] >= STALL_WINDOW:
                    status = Status.INSUFFICIENT_PROGRESS
                    break

                scaling = update_scaling(self.cones, state.s, state.z, state.mu)
                diag, blocks = scaling.kkt_values()
                self.kkt.set_scaling(diag, blocks)
                self.kkt.numeric_factor()
                rhs2 = np.concatenate([-self._q_s, self._b_s])
                sol2 = self.kkt.solve_refined(rhs2, settings.refinement)
                col2 = (sol2.x[:self._scaled.n], sol2.x[self._scaled.n:])

                d_aff = self.affine_rhs(state)
                delta_aff = self.solve_directions(state, scaling, d_aff, col2)
                alpha_aff = step_length(self._step_request(state, delta_aff),
                                        self.cones)
                sigma = centering(alpha_aff)
                d_comb = self.combined_rhs(state, scaling, delta_aff, sigma)
                delta_comb = self.solve_directions(state, scaling, d_comb, col2)
                alpha_comb = self.combined_step_size(state, delta_comb)
                if observer is not None:
                    observer(dict(iteration=it, state=state.copy(), scaling=scaling,
                                  d_affine=d_aff, delta_affine=delta_aff,
                                  d_combined=d_comb, delta_combined=delta_comb,
                                  alpha_affine=alpha_aff, sigma=sigma,
                                  alpha_combined=alpha_comb))
                state = self.take_step(state, delta_comb, alpha_comb)
                iterations = it + 1
        except (ConicError, np.linalg.LinAlgError) as err:
            if settings.verbose:
                print(f"numerical error: {err}")
            status = Status.NUMERICAL_ERROR

        solve_seconds = time.perf_counter() - t_start
        if status in (Status.OPTIMAL, Status.PRIMAL_INFEASIBLE, Status.DUAL_INFEASIBLE):
            return self.recover(state, res, status, iterations, solve_seconds)
        # limit / error statuses report the best iterate seen, upgraded to
        # almost-optimal when it meets ten times the feasibility tolerance
        _, best_state, best_res = best
        if self.check_termination(best_res, ALMOST_OPTIMAL_FACTOR * settings.eps_feas):
            status = Status.ALMOST_OPTIMAL
        return self.recover(best_state, best_res, status, iterations, solve_seconds)


def solve(problem: ProblemData, settings: SolverSettings | None = None,
          observer=None) -> SolveResult:
    """Validate, set up and solve one problem instance."""
    return Solver(problem, settings).solve(observer=observer)
