"""Shared helpers for the test suite."""

import numpy as np

from lipsolve.objective import evaluate, identity_oracle_solution, make_instance
from lipsolve.operators import IdentityOperator


def identity_suite(n_instances=20, seed=1, eps_ratio=0.6):
    """Seeded random identity-operator instances with their analytic optima."""
    rng = np.random.default_rng(seed)
    suite = []
    for _ in range(n_instances):
        n = int(rng.integers(8, 33))
        x = rng.standard_normal(n)
        eps = eps_ratio * float(np.linalg.norm(x))
        inst = make_instance(x, IdentityOperator(n), eps)
        suite.append((inst, identity_oracle_solution(x, eps)))
    return suite


def interior_point(inst, rng):
    """Random point well inside the tightened cone, near the least squares
    direction; shrinks the perturbation until a valid sample is found."""
    h0 = inst.least_squares()
    h0 = h0 / np.abs(h0).sum()
    scale = float(np.linalg.norm(h0))
    for spread in (0.3, 0.1, 0.03, 0.01, 0.003, 0.001):
        for _ in range(60):
            h = h0 + spread * scale * rng.standard_normal(h0.size)
            try:
                ev = evaluate(inst, h, need_grad=True)
            except Exception:
                continue
            if ev.e < 0.6 * inst.eps_bar**2 and ev.ip > 0:
                return h
    raise RuntimeError("no interior point found")


def rel_cost_error(inst, f, f_ref):
    c = inst.cost.value
    return abs(c(f) - c(f_ref)) / c(f_ref)
