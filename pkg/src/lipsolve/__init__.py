"""Solvers for l1-constrained linear inverse problems.

The core objects are a measurement operator, the smooth scaling objective
eta, an oracle-based solver with exact line search, four baseline solvers,
and a sliding-patch image denoising harness.
"""

from .baselines import (
    AcpConfig,
    CpConfig,
    CsalsaConfig,
    LambdaBarSet,
    acp_solve,
    cp_solve,
    csalsa_solve,
    pagd_solve,
)
from .flips import FlipsConfig, flips_solve
from .geometry import L1Cost, l1_lmo, l1_project, soft_threshold
from .objective import LipInstance, eta, grad_eta, make_instance
from .operators import DenseOperator, IdentityOperator, InverseDct2Operator
from .trace import SolverTrace

__all__ = [
    "AcpConfig",
    "CpConfig",
    "CsalsaConfig",
    "DenseOperator",
    "FlipsConfig",
    "IdentityOperator",
    "InverseDct2Operator",
    "L1Cost",
    "LambdaBarSet",
    "LipInstance",
    "SolverTrace",
    "acp_solve",
    "cp_solve",
    "csalsa_solve",
    "eta",
    "flips_solve",
    "grad_eta",
    "l1_lmo",
    "l1_project",
    "make_instance",
    "pagd_solve",
    "soft_threshold",
]

__version__ = "0.1.0"
