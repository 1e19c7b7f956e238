import time

import numpy as np
import pytest

from lipsolve import baselines, denoise, flips
from lipsolve.objective import (
    eta_bar_lower,
    eta_hat_candidate,
    evaluate,
    regularity_constants,
)

from _util import identity_suite


@pytest.fixture(scope="session")
def suite():
    return identity_suite()


def _acp_signal(inst, max_iters):
    reg = regularity_constants(inst, eta_bar_lower(inst), eta_hat_candidate(inst))
    cfg = baselines.acp_config_from_constants(inst, reg, max_iters=max_iters)
    h, _, trace = baselines.acp_solve(inst, cfg, record_gap=False)
    return evaluate(inst, h).eta * h, trace


def _pagd_signal(inst, max_iters, tol):
    z, trace = baselines.pagd_solve(inst, baselines.pagd_default_step(inst),
                                    max_iters=max_iters, tol=tol)
    return evaluate(inst, z).eta * z, trace


SUITE_SOLVERS = {
    "flips-linear": lambda inst: flips.flips_solve(
        inst, flips.FlipsConfig(oracle="linear", max_iters=20000, tol_gap=8e-4)),
    "flips-quadratic": lambda inst: flips.flips_solve(
        inst, flips.FlipsConfig(oracle="quadratic", inv_beta=1e-1, max_iters=300)),
    "flips-accelerated": lambda inst: flips.flips_solve(
        inst, flips.FlipsConfig(oracle="accelerated-quadratic", inv_beta=1e-1,
                                max_iters=300)),
    "cp": lambda inst: baselines.cp_solve(
        inst, baselines.default_cp_config(inst, max_iters=2000, tol=1e-8)),
    "csalsa": lambda inst: baselines.csalsa_solve(
        inst, baselines.CsalsaConfig(mu=2.5, max_iters=300, tol=1e-9)),
    "pagd": lambda inst: _pagd_signal(inst, 2000, 1e-12),
    "acp": lambda inst: _acp_signal(inst, 1500),
}


@pytest.fixture(scope="session")
def suite_runs(suite):
    """Every solver on every suite instance: {name: [(f, trace), ...]} plus
    the total solve wall time under "_elapsed"."""
    runs = {}
    t0 = time.perf_counter()
    for name, solve in SUITE_SOLVERS.items():
        runs[name] = [solve(inst) for inst, _ in suite]
    runs["_elapsed"] = time.perf_counter() - t0
    return runs


@pytest.fixture(scope="session")
def denoise16():
    """Shared m=16 denoise run on the built-in image (seeded noise)."""
    clean = denoise.synthetic_image(64, seed=0)
    noisy = denoise.add_gaussian_noise(clean, 0.0055, 42)
    recovered, report = denoise.denoise(noisy, 16, solver="flips",
                                        sigma_var=0.0055, img_clean=clean)
    return clean, noisy, recovered, report
