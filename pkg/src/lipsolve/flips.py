"""Oracle-based solver with exact line search on the smooth reformulation.

Each iteration picks a direction toward an oracle point g(h) in the unit
l1 ball, then moves by the exact minimizer of eta(h + gamma (g - h)) over
the step range keeping the iterate inside the tightened cone K(eps_bar).
The output signal is f* = eta(h) h.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import BoundaryOfCone, DegenerateDirection, Infeasible
from .geometry import l1_lmo, l1_project
from .objective import BOUNDARY_SLACK, evaluate
from .trace import SolverTrace, ref_distance

ORACLES = ("linear", "quadratic", "accelerated-quadratic")


@dataclass
class FlipsConfig:
    oracle: str = "quadratic"
    inv_beta: float = 1e-3
    rho: float = 0.7
    max_iters: int = 50
    tol_h: float = 0.0
    # relative linearization-gap stop for the linear oracle; 0 disables
    tol_gap: float = 0.0

    def __post_init__(self):
        if self.oracle not in ORACLES:
            raise ValueError(f"unknown oracle {self.oracle!r}")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must lie in [0, 1)")
        if self.inv_beta <= 0.0:
            raise ValueError("inv_beta must be positive")


def direction_linear(inst, ev):
    """Vertex of the l1 ball minimizing the linearized objective."""
    return l1_lmo(ev.grad)


def direction_quadratic(inst, ev, inv_beta):
    """Projected gradient target inside the l1 ball."""
    return l1_project(ev.h - inv_beta * ev.grad, 1.0)


def direction_accelerated(inst, ev, d_prev, inv_beta, rho):
    """Momentum variant; returns (g, d_next) with d_next = g - h."""
    g = l1_project(ev.h - inv_beta * (ev.grad + rho * d_prev), 1.0)
    return g, g - ev.h


def _line_stats(inst, ev, d):
    """Inner products driving the 1-D restriction eta(h + gamma d)."""
    phi_d = inst.op.apply(np.asarray(d, dtype=float))
    return {
        "p0": ev.ip,
        "p1": float(inst.x @ phi_d),
        "n0": ev.nphi**2,
        "n1": float(ev.phi_h @ phi_d),
        "n2": float(phi_d @ phi_d),
    }


def gamma_max(inst, h, d, ev=None, stats=None):
    """Largest step in [0, 1] keeping h + gamma d inside K(eps_bar).

    Along the ray the membership condition is a quadratic
    q(gamma) = a gamma^2 + b gamma + c >= 0 with c >= 0 at gamma = 0; the
    bound is the smaller positive root when the quadratic opens downward,
    clipped to the unit line-search range.
    """
    if ev is None:
        ev = evaluate(inst, h)
    if stats is None:
        stats = _line_stats(inst, ev, d)
    return _gamma_max_from_stats(inst, stats)


def _gamma_max_from_stats(inst, stats):
    return _gamma_max_sc(inst, stats["p0"], stats["p1"], stats["n0"],
                         stats["n1"], stats["n2"])


def _gamma_max_sc(inst, p0, p1, n0, n1, n2):
    kbar = inst.norm_x_sq - inst.eps_bar**2
    a = p1 * p1 - kbar * n2
    b = 2.0 * (p0 * p1 - kbar * n1)
    c = p0 * p0 - kbar * n0
    # Membership needs q(gamma) = a g^2 + b g + c >= 0 together with
    # p(gamma) >= 0; starting inside, the feasible gammas form one interval
    # ending at the first positive root of q (p cannot vanish while q > 0).
    if a == 0.0:
        if b >= 0.0:
            return 1.0
        return min(1.0, max(-c / b, 0.0))
    disc = b * b - 4.0 * a * c
    if disc <= 0.0:
        if a > 0.0:
            # q > 0 along the whole segment
            return 1.0
        # tangent case with a < 0: already at the extreme point
        return 0.0 if c <= 0.0 else min(1.0, -b / (2.0 * a))
    root = (-b - math.sqrt(disc)) / (2.0 * a)
    if a > 0.0 and root <= 0.0:
        # both crossings lie behind the start point
        return 1.0
    return min(1.0, max(root, 0.0))


def _eta_line_derivative_sign(inst, stats, gamma):
    """Sign of d/dgamma eta(h + gamma d) without forming the iterate."""
    return _deriv_sign_sc(inst, stats["p0"], stats["p1"], stats["n0"],
                          stats["n1"], stats["n2"], gamma)


def _deriv_sign_sc(inst, p0, p1, n0, n1, n2, gamma):
    k = inst.gap_sq
    p = p0 + gamma * p1
    n = n0 + gamma * (2.0 * n1 + gamma * n2)
    q = p * p - k * n
    if q <= 0.0:
        return 0.0
    # eta = K / (p + sqrt(q)); derivative sign is the sign of -(p + sqrt(q))'
    d_denom = p1 + (p * p1 - k * (n1 + gamma * n2)) / math.sqrt(q)
    if d_denom > 0.0:
        return -1.0
    if d_denom < 0.0:
        return 1.0
    return 0.0


def gamma_opt(inst, h, d, ev=None):
    """Exact minimizer of eta(h + gamma d) over [0, gamma_max]."""
    if ev is None:
        ev = evaluate(inst, h)
    stats = _line_stats(inst, ev, d)
    if stats["n2"] == 0.0:
        raise DegenerateDirection("direction is annihilated by the operator")
    return _gamma_opt_from_stats(inst, stats)


def _gamma_opt_from_stats(inst, stats):
    return _gamma_opt_sc(inst, stats["p0"], stats["p1"], stats["n0"],
                         stats["n1"], stats["n2"])


def _gamma_opt_sc(inst, p0, p1, n0, n1, n2):
    g_hat = _gamma_max_sc(inst, p0, p1, n0, n1, n2)
    if g_hat <= 0.0:
        return 0.0
    if _deriv_sign_sc(inst, p0, p1, n0, n1, n2, 0.0) >= 0.0:
        return 0.0
    if _deriv_sign_sc(inst, p0, p1, n0, n1, n2, g_hat) <= 0.0:
        return g_hat
    # interior stationary point: root of r g^2 + s g + u = 0
    k = inst.gap_sq
    r = p1 * p1 - k * n2
    s = 2.0 * (p0 * p1 - k * n1)
    u = (2.0 * p0 * p1 * n1 - p1 * p1 * n0 - k * n1 * n1) / n2
    if r == 0.0:
        roots = [-u / s] if s != 0.0 else []
    else:
        disc = s * s - 4.0 * r * u
        if disc < 0.0:
            roots = []
        else:
            sq = math.sqrt(disc)
            roots = [(-s - sq) / (2.0 * r), (-s + sq) / (2.0 * r)]
    inside = [g for g in roots if 0.0 < g < g_hat]
    if not inside:
        # numerically collapsed bracket: fall back to bisection on the sign
        lo, hi = 0.0, g_hat
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            if _deriv_sign_sc(inst, p0, p1, n0, n1, n2, mid) < 0.0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)
    if len(inside) == 1:
        return float(inside[0])

    def eta_at(g):
        p = p0 + g * p1
        n = n0 + g * (2.0 * n1 + g * n2)
        return k / (p + math.sqrt(max(p * p - k * n, 0.0)))

    return float(min(inside, key=eta_at))


def stopping(cfg, g, h_prev, gamma):
    """Movement-based stop; momentum runs are stopped by the budget only.

    ``h_prev`` is the iterate the direction was computed at, before the
    step was taken.
    """
    if cfg.oracle == "accelerated-quadratic":
        return False
    if gamma == 0.0:
        return True
    if cfg.tol_h <= 0.0:
        # g = h exactly surfaces as a zero step, caught above
        return False
    return float(np.linalg.norm(g - h_prev, ord=1)) <= cfg.tol_h


def flips_solve(inst, cfg, f_ref=None, h_log=None):
    """Run the solver and return (f_star, trace).

    When ``h_log`` is a list, every iterate h_k is appended to it.
    """
    f_init = inst.least_squares()
    resid = float(np.linalg.norm(inst.x - inst.op.apply(f_init)))
    if resid >= inst.eps:
        raise Infeasible(
            f"least squares residual {resid} is not below eps={inst.eps}"
        )
    h = f_init / inst.cost.value(f_init)
    d_prev = np.zeros(inst.op.signal_dim)
    trace = SolverTrace(solver=f"flips-{cfg.oracle}")
    t0 = time.perf_counter()
    x = inst.x
    k_gap = inst.gap_sq
    slack = BOUNDARY_SLACK * inst.eps**2

    def state_of(h):
        """(phi_h, p0, n0) forming the 1-D line-search statistics base."""
        phi_h = inst.op.apply(h)
        return phi_h, float(x @ phi_h), float(phi_h @ phi_h)

    def eta_grad_of(phi_h, p0, n0):
        """(eta, grad) from the cached inner products."""
        e = inst.norm_x_sq - p0 * p0 / n0
        rad_sq = inst.eps**2 - e
        if p0 <= 0.0 or rad_sq < slack:
            # fall back to the checked path for the error message
            raise BoundaryOfCone(
                "eta is not differentiable at the cone boundary"
            )
        rad = math.sqrt(n0 * rad_sq)
        et = k_gap / (p0 + rad)
        # grad = -phi^a lam with lam = (et/rad)(x - et phi_h)
        return et, inst.op.adjoint((et / rad) * (et * phi_h - x))

    phi_h, p0, n0 = state_of(h)
    et, grad = eta_grad_of(phi_h, p0, n0)
    trace.record(0, et, np.nan, 0.0, ref_distance(et * h, f_ref))
    if h_log is not None:
        h_log.append(h.copy())
    linear = cfg.oracle == "linear"
    for k in range(1, cfg.max_iters + 1):
        if linear:
            mag = np.abs(grad)
            i_top = int(mag.argmax())
            top = float(mag[i_top])
            if cfg.tol_gap > 0.0 and top - et <= cfg.tol_gap * et:
                # linearization gap <grad, h - g> = ||grad||_inf - eta
                # (Euler identity) upper-bounds eta - eta*
                trace.record(k, et, 0.0, time.perf_counter() - t0,
                             ref_distance(et * h, f_ref))
                break
            ties = mag >= top * (1.0 - 1e-14)
            n_ties = int(ties.sum())
            g = np.zeros_like(grad)
            if n_ties == 1:
                g[i_top] = -1.0 if grad[i_top] > 0.0 else 1.0
            else:
                g[ties] = -np.sign(grad[ties]) / n_ties
        elif cfg.oracle == "quadratic":
            g = l1_project(h - cfg.inv_beta * grad, 1.0)
        else:
            g = l1_project(h - cfg.inv_beta * (grad + cfg.rho * d_prev), 1.0)
            d_prev = g - h
        d = g - h
        phi_d = inst.op.apply(d)
        p1 = float(x @ phi_d)
        n1 = float(phi_h @ phi_d)
        n2 = float(phi_d @ phi_d)
        if n2 == 0.0:
            gamma = 0.0
        else:
            gamma = _gamma_opt_sc(inst, p0, p1, n0, n1, n2)
        h_prev = h
        if gamma > 0.0:
            h = h + gamma * d
            phi_h = phi_h + gamma * phi_d
            p0 = p0 + gamma * p1
            n0 = n0 + gamma * (2.0 * n1 + gamma * n2)
            if k % 256 == 0:
                # refresh the incremental statistics against drift
                phi_h, p0, n0 = state_of(h)
            et_next, grad_next = eta_grad_of(phi_h, p0, n0)
            if cfg.oracle != "accelerated-quadratic" and et_next > et:
                # exact line search makes ascent impossible up to roundoff
                h = h_prev
                phi_h, p0, n0 = state_of(h)
                gamma = 0.0
            else:
                et, grad = et_next, grad_next
        trace.record(k, et, gamma, time.perf_counter() - t0,
                     ref_distance(et * h, f_ref))
        if h_log is not None:
            h_log.append(h.copy())
        if stopping(cfg, g, h_prev, gamma):
            break
    return et * h, trace
