"""Reference solvers for the same constrained problem.

cp_solve is a primal-dual (Chambolle-Pock style) iteration on the saddle
formulation min_f max_u <u, phi f> - <x, u> - eps ||u|| + c(f).  acp_solve
is an accelerated primal-dual method on the strongly concave saddle problem
min_h max_lam 2 l(lam) - <lam, phi h> over the unit l1 ball and a truncated
dual region.  csalsa_solve is an ADMM splitting with an l1 shrink and a
ball projection.  pagd_solve is accelerated projected gradient descent on
the smooth objective with a fixed small step.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ConeViolation, NotInCone, NotInLambda, StepSizeViolation
from .geometry import block_soft_threshold, l1_project, soft_threshold
from .objective import e_residual, evaluate, l_value
from .trace import SolverTrace, ref_distance


@dataclass
class CpConfig:
    sigma_step: float
    tau_step: float
    theta: float = 0.6
    max_iters: int = 500
    tol: float = 0.0


def default_cp_config(inst, max_iters=500, theta=0.6, tol=0.0):
    """sigma = tau = 1 / ||phi||_op keeps sigma tau ||phi||^2 at one."""
    step = 1.0 / inst.op.op_norm()
    return CpConfig(sigma_step=step, tau_step=step, theta=theta,
                    max_iters=max_iters, tol=tol)


def cp_solve(inst, cfg, f_ref=None):
    """Primal-dual iteration; returns the last primal iterate.

    The ergodic primal average is kept in ``trace.extras["ergodic"]``.
    """
    op_norm_sq = inst.op.op_norm() ** 2
    if cfg.sigma_step * cfg.tau_step * op_norm_sq > 1.0 + 1e-9:
        raise StepSizeViolation(
            f"sigma*tau*||phi||^2 = {cfg.sigma_step * cfg.tau_step * op_norm_sq}"
        )
    n = inst.op.signal_dim
    f = np.zeros(n)
    f_bar = f.copy()
    u = np.zeros(inst.op.measurement_dim)
    f_sum = np.zeros(n)
    trace = SolverTrace(solver="cp")
    t0 = time.perf_counter()
    for k in range(1, cfg.max_iters + 1):
        u_prev = u
        u = block_soft_threshold(
            u + cfg.sigma_step * (inst.op.apply(f_bar) - inst.x),
            cfg.sigma_step * inst.eps,
        )
        f_prev = f
        f = soft_threshold(f - cfg.tau_step * inst.op.adjoint(u), cfg.tau_step)
        f_bar = f + cfg.theta * (f - f_prev)
        f_sum += f
        trace.record(k, inst.cost.value(f), np.nan,
                     time.perf_counter() - t0, ref_distance(f, f_ref))
        if (cfg.tol > 0.0
                and np.linalg.norm(f - f_prev) <= cfg.tol
                and np.linalg.norm(u - u_prev) <= cfg.tol):
            break
    trace.extras["ergodic"] = f_sum / max(len(trace), 1)
    return f, trace


@dataclass
class AcpConfig:
    eta_bar: float
    bound_B: float
    alpha_prime: float
    beta_prime: float
    op_norm_sq: float
    max_iters: int = 1000
    theta0: float = 1.0
    t0: float = field(init=False)
    s0: float = field(init=False)

    def __post_init__(self):
        self.t0 = 1.0 / (2.0 * self.beta_prime)
        self.s0 = self.beta_prime / self.op_norm_sq


def acp_config_from_constants(inst, reg, max_iters=1000):
    return AcpConfig(
        eta_bar=reg.eta_bar,
        bound_B=reg.bound_B,
        alpha_prime=reg.alpha_prime,
        beta_prime=reg.beta_prime,
        op_norm_sq=inst.op.op_norm() ** 2,
        max_iters=max_iters,
    )


@dataclass(frozen=True)
class LambdaBarSet:
    """Dual region {lam : l(lam) >= eta_bar, ||lam|| <= B} for given data."""

    x: np.ndarray
    eps: float
    eta_bar: float
    bound_B: float

    def contains(self, lam, tol=1e-9):
        if float(np.linalg.norm(lam)) > self.bound_B * (1.0 + tol):
            return False
        try:
            lv = l_value(self.x, self.eps, lam)
        except NotInLambda:
            return False
        return lv >= self.eta_bar * (1.0 - tol)


def lambda_bar_project(lbar, lam, max_rounds=50):
    """Approximate projection onto the dual region.

    Ball projection first; if the level constraint l(lam) >= eta_bar fails,
    alternate between a halfspace cut (the level set linearized at the
    current point) and the ball.  The level constraint is asymptotically
    inactive for the iterates that use this projection, so a bounded
    refinement suffices.
    """
    lam = np.asarray(lam, dtype=float)
    x = np.asarray(lbar.x, dtype=float)
    level = lbar.eta_bar**2  # l(lam) >= eta_bar iff <lam,x> - eps||lam|| >= level

    def ball(v):
        nv = float(np.linalg.norm(v))
        return v if nv <= lbar.bound_B else (lbar.bound_B / nv) * v

    def level_ok(v):
        nv = float(np.linalg.norm(v))
        return float(v @ x) - lbar.eps * nv >= level * (1.0 - 1e-12)

    lam = ball(lam)
    if level_ok(lam):
        return lam
    # anchor strictly inside the level set, used when the cuts stall
    anchor = (lbar.bound_B / np.linalg.norm(x)) * x
    for _ in range(max_rounds):
        nv = float(np.linalg.norm(lam))
        if nv == 0.0:
            lam = anchor.copy()
        else:
            # halfspace cut <g, v> >= level + <g,lam> - g(lam) with
            # g = x - eps lam/||lam|| the gradient of the concave level fn
            g = x - lbar.eps * lam / nv
            val = float(lam @ x) - lbar.eps * nv
            gap = level - val
            gn_sq = float(g @ g)
            if gn_sq == 0.0:
                lam = anchor.copy()
            else:
                lam = lam + (gap / gn_sq) * g
        lam = ball(lam)
        if level_ok(lam):
            return lam
    # fall back to a bisection toward the interior anchor
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        cand = ball((1.0 - mid) * lam + mid * anchor)
        if level_ok(cand):
            hi = mid
        else:
            lo = mid
    return ball((1.0 - hi) * lam + hi * anchor)


def acp_solve(inst, cfg, f_ref=None, record_gap=True):
    """Accelerated primal-dual iteration; returns (h, lam, trace).

    The trace eta column holds the duality gap
    eta(h_k) - (2 l(lam_k) - ||phi^a lam_k||_inf); pass record_gap=False
    to skip its evaluation (long reference runs).
    """
    n = inst.op.signal_dim
    lbar = LambdaBarSet(x=inst.x, eps=inst.eps, eta_bar=cfg.eta_bar,
                        bound_B=cfg.bound_B)
    f_init = inst.least_squares()
    h = l1_project(f_init / inst.cost.value(f_init), 1.0)
    lam = lambda_bar_project(lbar, (cfg.bound_B / inst.norm_x) * inst.x)
    lam_prev = lam.copy()
    theta, t, s = cfg.theta0, cfg.t0, cfg.s0
    trace = SolverTrace(solver="acp")
    t0 = time.perf_counter()
    for k in range(1, cfg.max_iters + 1):
        mom = lam + theta * (lam - lam_prev)
        h = l1_project(h + s * inst.op.adjoint(mom), 1.0)
        lv = l_value(inst.x, inst.eps, lam)
        nlam = float(np.linalg.norm(lam))
        ascent = inst.x - (inst.eps / nlam) * lam - lv * inst.op.apply(h)
        lam_prev = lam
        lam = lambda_bar_project(lbar, lam + (t / lv) * ascent)
        grow = np.sqrt(1.0 + cfg.alpha_prime * t)
        theta, t, s = 1.0 / grow, t / grow, s * grow
        gap = duality_gap(inst, h, lam) if record_gap else np.nan
        dist = np.nan
        if f_ref is not None:
            try:
                dist = ref_distance(evaluate(inst, h).eta * h, f_ref)
            except NotInCone:
                pass
        trace.record(k, gap, np.nan, time.perf_counter() - t0, dist)
    return h, lam, trace


def duality_gap(inst, h, lam):
    """Primal minus dual value of the strongly concave saddle problem.

    Outside the cone the primal value is +inf (no positive scaling of
    phi(h) is feasible), so the gap is +inf there.
    """
    try:
        primal = evaluate(inst, h).eta
    except NotInCone:
        return np.inf
    dual = 2.0 * l_value(inst.x, inst.eps, lam) - inst.cost.dual_value(
        inst.op.adjoint(lam)
    )
    return primal - dual


@dataclass
class CsalsaConfig:
    mu: float = 2.5
    max_iters: int = 200
    tol: float = 0.0


def default_csalsa_config(inst, max_iters=200, tol=0.0):
    mu = 2.5 if inst.op.signal_dim < 64 else 3.0
    return CsalsaConfig(mu=mu, max_iters=max_iters, tol=tol)


def csalsa_solve(inst, cfg, f_ref=None):
    """ADMM splitting with variables u1 = f (shrink) and u2 = phi f
    (ball projection); returns (f, trace)."""
    op = inst.op
    n, m = op.signal_dim, op.measurement_dim
    dense_chol = None
    if not op.is_unitary:
        a = op.matrix
        dense_chol = scipy.linalg.cho_factor(np.eye(n) + a.T @ a)
    u1, d1 = np.zeros(n), np.zeros(n)
    u2, d2 = np.zeros(m), np.zeros(m)
    f = np.zeros(n)
    trace = SolverTrace(solver="csalsa")
    t0 = time.perf_counter()
    for k in range(1, cfg.max_iters + 1):
        rhs = u1 + d1 + op.adjoint(u2 + d2)
        f_prev = f
        if op.is_unitary:
            f = 0.5 * rhs
        else:
            f = scipy.linalg.cho_solve(dense_chol, rhs)
        phi_f = op.apply(f)
        u1_prev = u1
        u1 = soft_threshold(f - d1, 1.0 / cfg.mu)
        v = phi_f - d2 - inst.x
        nv = float(np.linalg.norm(v))
        u2_prev = u2
        u2 = inst.x + (v if nv <= inst.eps else (inst.eps / nv) * v)
        d1 = d1 - (f - u1)
        d2 = d2 - (phi_f - u2)
        trace.record(k, inst.cost.value(f), np.nan,
                     time.perf_counter() - t0, ref_distance(f, f_ref))
        if (cfg.tol > 0.0
                and np.linalg.norm(f - f_prev) <= cfg.tol
                and np.linalg.norm(u1 - u1_prev) <= cfg.tol
                and np.linalg.norm(u2 - u2_prev) <= cfg.tol):
            break
    return f, trace


def pagd_default_step(inst):
    """Step 1/b from the largest curvature eigenvalue at the scaled least
    squares initialization; keeps small-step iterates inside the cone."""
    from .objective import m_matrix_extreme_eigs

    f_init = inst.least_squares()
    h0 = f_init / inst.cost.value(f_init)
    _, m_hi = m_matrix_extreme_eigs(inst, h0)
    eig_max = inst.op.gram_extreme_eigs()[1]
    return 1.0 / (m_hi * eig_max)


def pagd_solve(inst, inv_b, max_iters=1000, f_ref=None, tol=0.0):
    """Accelerated projected gradient descent on eta; returns (h, trace).

    Cone membership is not enforced by the projection; a small step keeps
    the iterates inside, and leaving the tightened cone raises
    ConeViolation.
    """
    f_init = inst.least_squares()
    h = l1_project(f_init / inst.cost.value(f_init), 1.0)
    z_prev = h.copy()
    t = 1.0
    trace = SolverTrace(solver="pagd")
    t0 = time.perf_counter()
    for k in range(1, max_iters + 1):
        if e_residual(inst, h) >= inst.eps_bar**2:
            raise ConeViolation(
                f"iterate {k} left the tightened cone; shrink the step"
            )
        ev = evaluate(inst, h, need_grad=True)
        z = l1_project(h - inv_b * ev.grad, 1.0)
        if e_residual(inst, z) >= inst.eps_bar**2:
            raise ConeViolation(
                f"gradient step {k} left the tightened cone; shrink the step"
            )
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        h = z + ((t - 1.0) / t_next) * (z - z_prev)
        moved = float(np.linalg.norm(z - z_prev))
        z_prev, t = z, t_next
        ev_z = evaluate(inst, z)
        trace.record(k, ev_z.eta, np.nan, time.perf_counter() - t0,
                     ref_distance(ev_z.eta * z, f_ref))
        if tol > 0.0 and moved <= tol and k > 1:
            break
    return z_prev, trace
