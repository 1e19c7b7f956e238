"""Smooth reformulation of the constrained linear inverse problem.

For a problem min c(f) s.t. ||x - phi(f)|| <= eps, the feasibility cone and
the scaling objective eta(h) give an equivalent smooth minimization.  This
module evaluates eta, its gradient and Hessian, the dual building block
l(lambda), closed-form extreme eigenvalues, and the regularity constants
used by the accelerated solvers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BoundaryOfCone,
    InvalidBounds,
    NotInCone,
    NotInLambda,
)
from .geometry import L1Cost, soft_threshold
from .operators import LinearOperator, least_squares_init

# Relative slack below which eps^2 - e(h) is treated as the cone boundary.
BOUNDARY_SLACK = 1e-12


@dataclass(frozen=True)
class LipInstance:
    """One inverse problem: measurement x, operator, residual level eps and
    the slightly tighter cone level eps_bar used for line searches."""

    x: np.ndarray
    op: LinearOperator
    eps: float
    eps_bar: float
    cost: L1Cost
    phi_a_x: np.ndarray = field(init=False, repr=False)
    norm_x: float = field(init=False)
    norm_x_sq: float = field(init=False)
    gap_sq: float = field(init=False)  # ||x||^2 - eps^2

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        object.__setattr__(self, "x", x)
        norm_x = float(np.linalg.norm(x))
        if not (norm_x > self.eps > self.eps_bar > 0.0):
            raise InvalidBounds(
                f"need ||x|| > eps > eps_bar > 0, got ||x||={norm_x}, "
                f"eps={self.eps}, eps_bar={self.eps_bar}"
            )
        object.__setattr__(self, "phi_a_x", self.op.adjoint(x))
        object.__setattr__(self, "norm_x", norm_x)
        object.__setattr__(self, "norm_x_sq", norm_x**2)
        object.__setattr__(self, "gap_sq", norm_x**2 - self.eps**2)

    def least_squares(self):
        return least_squares_init(self.op, self.x)

    def strictly_feasible(self):
        f = self.least_squares()
        return float(np.linalg.norm(self.x - self.op.apply(f))) < self.eps


def make_instance(x, op, eps, eps_bar=None, eps_bar_ratio=0.99):
    """Convenience constructor; eps_bar defaults to eps_bar_ratio * eps."""
    if eps_bar is None:
        eps_bar = eps_bar_ratio * eps
    x = np.asarray(x, dtype=float)
    return LipInstance(x=x, op=op, eps=float(eps), eps_bar=float(eps_bar),
                       cost=L1Cost(op.signal_dim))


@dataclass
class EtaEval:
    """Cached quantities of one objective evaluation at h."""

    h: np.ndarray
    phi_h: np.ndarray
    ip: float          # <x, phi(h)>
    nphi: float        # ||phi(h)||
    e: float           # squared distance from x to the ray of phi(h)
    eta: float | None = None
    lam: np.ndarray | None = None
    grad: np.ndarray | None = None


def e_residual(inst, h):
    """Squared distance from x to the line spanned by phi(h)."""
    phi_h = inst.op.apply(np.asarray(h, dtype=float))
    return _e_from_stats(inst, float(inst.x @ phi_h), float(phi_h @ phi_h))


def _e_from_stats(inst, ip, nphi_sq):
    if nphi_sq == 0.0:
        return inst.norm_x_sq
    e = inst.norm_x_sq - ip * ip / nphi_sq
    return float(min(max(e, 0.0), inst.norm_x_sq))


def cone_member(inst, h, eps_level=None):
    """Membership test <x, phi h> >= ||phi h|| sqrt(||x||^2 - eps_level^2)."""
    if eps_level is None:
        eps_level = inst.eps
    if not (0.0 < eps_level <= inst.eps):
        raise ValueError("eps_level must lie in (0, eps]")
    phi_h = inst.op.apply(np.asarray(h, dtype=float))
    ip = float(inst.x @ phi_h)
    nphi = float(np.linalg.norm(phi_h))
    slack = BOUNDARY_SLACK * inst.norm_x_sq
    return ip + slack >= nphi * np.sqrt(inst.norm_x_sq - eps_level**2)


def evaluate(inst, h, need_grad=False):
    """Evaluate eta (and optionally lambda(h) and the gradient) at h.

    Raises NotInCone if h is outside the feasibility cone, and
    BoundaryOfCone if the gradient is requested at the cone boundary.
    """
    h = np.asarray(h, dtype=float)
    phi_h = inst.op.apply(h)
    ip = float(inst.x @ phi_h)
    nphi_sq = float(phi_h @ phi_h)
    nphi = float(np.sqrt(nphi_sq))
    e = _e_from_stats(inst, ip, nphi_sq)
    ev = EtaEval(h=h, phi_h=phi_h, ip=ip, nphi=nphi, e=e)

    rad_sq = inst.eps**2 - e
    if ip <= 0.0 or rad_sq < -BOUNDARY_SLACK * inst.eps**2:
        raise NotInCone(f"h outside the cone: <x,phi h>={ip}, e(h)={e}")
    rad = nphi * np.sqrt(max(rad_sq, 0.0))
    ev.eta = inst.gap_sq / (ip + rad)

    if need_grad:
        if rad_sq < BOUNDARY_SLACK * inst.eps**2:
            raise BoundaryOfCone("eta is not differentiable at the cone boundary")
        resid = inst.x - ev.eta * phi_h
        ev.lam = (ev.eta / rad) * resid
        ev.grad = -inst.op.adjoint(ev.lam)
    return ev


def eta(inst, h):
    return evaluate(inst, h).eta


def lambda_of_h(inst, h):
    """Unique dual maximizer at an interior cone point h."""
    return evaluate(inst, h, need_grad=True).lam


def grad_eta(inst, h):
    return evaluate(inst, h, need_grad=True).grad


def l_value(x, eps, lam):
    """sqrt(<lam, x> - eps ||lam||), the concave dual building block."""
    lam = np.asarray(lam, dtype=float)
    arg = float(lam @ np.asarray(x, dtype=float)) - eps * float(np.linalg.norm(lam))
    if arg <= 0.0:
        raise NotInLambda(f"<lam,x> - eps||lam|| = {arg} <= 0")
    return float(np.sqrt(arg))


def l_grad(x, eps, lam):
    lam = np.asarray(lam, dtype=float)
    lv = l_value(x, eps, lam)
    return (np.asarray(x, dtype=float) - (eps / np.linalg.norm(lam)) * lam) / (2.0 * lv)


def m_matrix(inst, h):
    """Curvature matrix M(h): the Hessian of eta is adjoint o M(h) o apply."""
    ev = evaluate(inst, h, need_grad=True)
    lam = ev.lam
    nlam = float(np.linalg.norm(lam))
    et = ev.eta
    r = 2.0 * inst.eps / nlam + inst.gap_sq / et**2
    outer_ll = np.outer(lam, lam)
    outer_lx = np.outer(lam, inst.x)
    n = lam.size
    m = (nlam / (inst.eps * et)) * (
        et**2 * np.eye(n) + r * outer_ll - (outer_lx + outer_lx.T)
    )
    return m


def hessian_apply(inst, h, v):
    """Hessian-vector product of eta at h."""
    m = m_matrix(inst, h)
    return inst.op.adjoint(m @ inst.op.apply(np.asarray(v, dtype=float)))


def m_matrix_extreme_eigs(inst, h):
    """Closed-form (min, max) eigenvalues of M(h)."""
    ev = evaluate(inst, h, need_grad=True)
    nlam = float(np.linalg.norm(ev.lam))
    et = ev.eta
    lead = inst.gap_sq * nlam**3 / (2.0 * inst.eps * et**3)
    disc = 1.0 - 8.0 * inst.eps * et**6 / (inst.gap_sq**2 * nlam**3)
    root = np.sqrt(max(disc, 0.0))
    return (lead * (1.0 - root), lead * (1.0 + root))


def l_hessian(x, eps, lam):
    """Hessian of l at lam (negative semidefinite)."""
    lam = np.asarray(lam, dtype=float)
    x = np.asarray(x, dtype=float)
    lv = l_value(x, eps, lam)
    nlam = float(np.linalg.norm(lam))
    n = lam.size
    radial = x - (eps / nlam) * lam
    return (
        (-eps / (2.0 * lv * nlam)) * (np.eye(n) - np.outer(lam, lam) / nlam**2)
        - np.outer(radial, radial) / (4.0 * lv**3)
    )


def l_hessian_extreme_eigs(x, eps, lam):
    """Closed-form (min, max) absolute eigenvalues of the Hessian of l."""
    lam = np.asarray(lam, dtype=float)
    x = np.asarray(x, dtype=float)
    lv = l_value(x, eps, lam)
    nlam = float(np.linalg.norm(lam))
    gap_sq = float(x @ x) - eps**2
    lead = gap_sq / (8.0 * lv**3)
    disc = 1.0 - 8.0 * eps * lv**6 / (gap_sq**2 * nlam**3)
    root = np.sqrt(max(disc, 0.0))
    return (lead * (1.0 - root), lead * (1.0 + root))


@dataclass(frozen=True)
class RegularityConstants:
    alpha: float
    beta: float
    alpha_prime: float
    beta_prime: float
    bound_B: float
    eta_hat: float
    eta_bar: float
    eig_min: float
    eig_max: float


def regularity_constants(inst, eta_bar, eta_hat):
    """Strong convexity / smoothness constants of the smooth objective and
    of the dual map, from the problem data and the bracket
    eta_bar <= optimal cost <= eta_hat."""
    if not (0.0 < eta_bar <= eta_hat):
        raise InvalidBounds(f"need 0 < eta_bar <= eta_hat, got {eta_bar}, {eta_hat}")
    eig_min, eig_max = inst.op.gram_extreme_eigs()
    eps, eps_bar = inst.eps, inst.eps_bar
    gap_sq = inst.gap_sq
    cone_gap = eps**2 - eps_bar**2
    alpha = 2.0 * eta_bar**3 * eig_min / gap_sq
    beta = (
        eps**2 * eta_hat**3 * (inst.norm_x + eps) * eig_max
        / (cone_gap**1.5 * (inst.norm_x - eps) ** 2)
    )
    # ||lam(h)|| <= eta eps / (||phi h|| sqrt(eps^2 - e)) together with
    # eta ||phi h|| >= ||x|| - eps gives this dual-norm bound
    bound_b = eps * eta_hat**2 / ((inst.norm_x - eps) * np.sqrt(cone_gap))
    alpha_prime = eps * (eta_bar / bound_b) ** 3 / gap_sq
    beta_prime = gap_sq / (2.0 * eta_bar**3)
    return RegularityConstants(
        alpha=alpha,
        beta=beta,
        alpha_prime=alpha_prime,
        beta_prime=beta_prime,
        bound_B=bound_b,
        eta_hat=eta_hat,
        eta_bar=eta_bar,
        eig_min=eig_min,
        eig_max=eig_max,
    )


def eta_hat_candidate(inst):
    """Upper bound on the optimal cost from the least squares point."""
    f = inst.least_squares()
    x_prime = inst.op.apply(f)
    nx_prime_sq = float(x_prime @ x_prime)
    cost_f = inst.cost.value(f)
    arg = 1.0 - inst.gap_sq / nx_prime_sq
    return cost_f * (1.0 - np.sqrt(max(arg, 0.0)))


def eta_bar_lower(inst):
    """Positive lower bound on the optimal cost via the dual norm."""
    return inst.norm_x * (inst.norm_x - inst.eps) / inst.cost.dual_value(inst.phi_a_x)


def identity_oracle_solution(x, eps, tol=1e-12):
    """Analytic optimum for phi = identity: soft threshold x at the tau with
    ||x - f|| = eps, found by bisection.  Test/reference oracle."""
    x = np.asarray(x, dtype=float)

    def resid(tau):
        return float(np.linalg.norm(x - soft_threshold(x, tau))) - eps

    lo, hi = 0.0, float(np.abs(x).max())
    # resid(0) = -eps < 0 and resid(max|x|) = ||x|| - eps > 0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if resid(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return soft_threshold(x, 0.5 * (lo + hi))
