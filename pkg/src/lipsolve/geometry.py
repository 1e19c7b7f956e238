"""The l1 cost geometry: value, unit-ball projection, linear minimization
oracle, dual norm, and the shrinkage primitives used by the solvers."""

from __future__ import annotations

import numpy as np

from .errors import ZeroGradient


def soft_threshold(v, tau):
    """Componentwise shrink sgn(v_i) * max(|v_i| - tau, 0)."""
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def block_soft_threshold(v, tau):
    """Scale v by max(0, 1 - tau/||v||); returns 0 for v = 0."""
    v = np.asarray(v, dtype=float)
    nv = np.linalg.norm(v)
    if nv == 0.0:
        return np.zeros_like(v)
    return max(0.0, 1.0 - tau / nv) * v


def l1_project(f, radius=1.0):
    """Euclidean projection onto the l1 ball of a given radius.

    Sort-based exact method, O(d log d).
    """
    f = np.asarray(f, dtype=float)
    if radius <= 0:
        raise ValueError("radius must be positive")
    if np.abs(f).sum() <= radius:
        return f.copy()
    mag = np.sort(np.abs(f))[::-1]
    cumsum = np.cumsum(mag)
    idx = np.arange(1, mag.size + 1)
    shifted = mag - (cumsum - radius) / idx
    rho = int(np.nonzero(shifted > 0)[0][-1])
    theta = (cumsum[rho] - radius) / (rho + 1)
    return soft_threshold(f, theta)


def l1_lmo(gradient):
    """Minimizer of <gradient, g> over the unit l1 ball.

    Puts mass -sgn(gradient_i) on the coordinates attaining the max
    absolute entry, split equally over ties.
    """
    gradient = np.asarray(gradient, dtype=float)
    mag = np.abs(gradient)
    top = mag.max() if mag.size else 0.0
    if top == 0.0:
        raise ZeroGradient("LMO undefined for zero gradient")
    ties = mag >= top * (1.0 - 1e-14)
    g = np.zeros_like(gradient)
    g[ties] = -np.sign(gradient[ties]) / ties.sum()
    return g


class L1Cost:
    """The l1 norm as atomic cost: positively homogeneous with the cross
    polytope as its compact unit sub-level set."""

    kind = "l1"

    def __init__(self, dim):
        self.dim = int(dim)

    def value(self, f):
        return float(np.abs(np.asarray(f, dtype=float)).sum())

    def project(self, f, radius=1.0):
        return l1_project(f, radius)

    def lmo(self, gradient):
        return l1_lmo(gradient)

    def dual_value(self, f):
        """Dual norm (l-infinity for the l1 cost)."""
        return float(np.abs(np.asarray(f, dtype=float)).max())
