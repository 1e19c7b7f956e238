import numpy as np
import pytest

from lipsolve import flips
from lipsolve.errors import DegenerateDirection, Infeasible
from lipsolve.flips import FlipsConfig, flips_solve, gamma_max, gamma_opt
from lipsolve.objective import evaluate, make_instance
from lipsolve.operators import DenseOperator, IdentityOperator

rng = np.random.default_rng(17)


@pytest.fixture
def toy():
    return make_instance(np.array([1.0, 0.0]), IdentityOperator(2), 0.5)


def test_toy_solution(toy):
    f, trace = flips_solve(toy, FlipsConfig(oracle="quadratic", inv_beta=1e-1,
                                            max_iters=50))
    assert np.allclose(f, [0.5, 0.0], atol=1e-10)
    assert len(trace) >= 1


def test_config_validation():
    with pytest.raises(ValueError):
        FlipsConfig(oracle="newton")
    with pytest.raises(ValueError):
        FlipsConfig(rho=1.0)
    with pytest.raises(ValueError):
        FlipsConfig(inv_beta=0.0)


def test_direction_linear_example(toy):
    ev = evaluate(toy, np.array([2.0, 1.0]), need_grad=True)
    ev.grad = np.array([0.5, -0.2])
    assert np.allclose(flips.direction_linear(toy, ev), [-1.0, 0.0])


def test_gamma_max_along_own_ray(toy):
    h = np.array([2.0, 1.0])
    # moving toward the origin along h keeps the ray, hence the cone
    assert gamma_max(toy, h, h) == 1.0


def test_gamma_max_zero_outside_step(toy):
    h = np.array([1.0, 0.0])
    d = np.array([-1.0, 5.0]) - h
    g_hat = gamma_max(toy, h, d)
    assert 0.0 < g_hat < 1.0
    from lipsolve.objective import cone_member

    assert cone_member(toy, h + (g_hat - 1e-9) * d, eps_level=toy.eps_bar)
    assert not cone_member(toy, h + (g_hat + 1e-6) * d, eps_level=toy.eps_bar)


def test_gamma_opt_zero_at_optimum(toy):
    h = np.array([1.0, 0.0])  # already the optimal direction
    d = np.array([0.5, 0.1]) - h
    g = gamma_opt(toy, h, d)
    ev = evaluate(toy, h)
    if g > 0.0:
        assert evaluate(toy, h + g * d).eta <= ev.eta + 1e-12


def test_gamma_opt_degenerate_direction():
    inst = make_instance(np.array([1.0]), DenseOperator(np.array([[1.0, 0.0]])),
                         0.5)
    with pytest.raises(DegenerateDirection):
        gamma_opt(inst, np.array([1.0, 0.0]), np.array([0.0, 1.0]))


def test_infeasible_instance():
    # measurement orthogonal to the operator range, residual above eps
    op = DenseOperator(np.array([[1.0], [0.0]]))
    inst = make_instance(np.array([0.0, 1.0]), op, 0.5)
    with pytest.raises(Infeasible):
        flips_solve(inst, FlipsConfig())


def test_iterates_stay_in_unit_ball():
    x = rng.standard_normal(10)
    inst = make_instance(x, IdentityOperator(10), 0.5 * np.linalg.norm(x))
    for oracle in ("linear", "quadratic", "accelerated-quadratic"):
        h_log = []
        flips_solve(inst, FlipsConfig(oracle=oracle, inv_beta=1e-1,
                                      max_iters=100), h_log=h_log)
        for h in h_log:
            assert np.abs(h).sum() <= 1.0 + 1e-9


def test_accelerated_runs_full_budget():
    x = rng.standard_normal(8)
    inst = make_instance(x, IdentityOperator(8), 0.5 * np.linalg.norm(x))
    cfg = FlipsConfig(oracle="accelerated-quadratic", inv_beta=1e-1,
                      max_iters=30)
    _, trace = flips_solve(inst, cfg)
    assert len(trace) == 31  # initial record plus every iteration


def test_quadratic_oracle_stops_at_fixed_point(toy):
    cfg = FlipsConfig(oracle="quadratic", inv_beta=1e-1, max_iters=500)
    _, trace = flips_solve(toy, cfg)
    assert len(trace) < 500


def test_linear_gap_stop_certifies_accuracy():
    x = rng.standard_normal(12)
    inst = make_instance(x, IdentityOperator(12), 0.5 * np.linalg.norm(x))
    cfg = FlipsConfig(oracle="linear", max_iters=100000, tol_gap=1e-4)
    f, trace = flips_solve(inst, cfg)
    assert len(trace) < 100001  # the certificate fired, not the budget
    ref, _ = flips_solve(inst, FlipsConfig(oracle="quadratic", inv_beta=1e-1,
                                           max_iters=300))
    c = inst.cost.value
    assert abs(c(f) - c(ref)) / c(ref) <= 1e-4


def test_solution_feasible_across_oracles():
    x = rng.standard_normal(9)
    eps = 0.6 * float(np.linalg.norm(x))
    inst = make_instance(x, IdentityOperator(9), eps)
    for oracle in ("linear", "quadratic", "accelerated-quadratic"):
        cfg = FlipsConfig(oracle=oracle, inv_beta=1e-1, max_iters=2000,
                          tol_gap=1e-4)
        f, _ = flips_solve(inst, cfg)
        assert np.linalg.norm(x - f) <= eps + 1e-8
