import numpy as np
import pytest

from lipsolve.errors import (
    BoundaryOfCone,
    InvalidBounds,
    NotInCone,
    NotInLambda,
)
from lipsolve.objective import (
    cone_member,
    e_residual,
    eta,
    eta_bar_lower,
    eta_hat_candidate,
    evaluate,
    grad_eta,
    identity_oracle_solution,
    l_grad,
    l_value,
    lambda_of_h,
    m_matrix,
    make_instance,
    regularity_constants,
)
from lipsolve.operators import IdentityOperator

rng = np.random.default_rng(9)


@pytest.fixture
def toy():
    """x = (1, 0), eps = 0.5, identity operator."""
    return make_instance(np.array([1.0, 0.0]), IdentityOperator(2), 0.5)


def test_eta_toy_values(toy):
    assert np.isclose(eta(toy, np.array([1.0, 0.0])), 0.5)
    assert np.isclose(eta(toy, np.array([2.0, 1.0])), 0.3)


def test_lambda_toy_values(toy):
    assert np.allclose(lambda_of_h(toy, np.array([2.0, 1.0])), [0.24, -0.18])
    assert np.allclose(lambda_of_h(toy, np.array([1.0, 0.0])), [0.5, 0.0])


def test_gradient_is_minus_adjoint_lambda(toy):
    h = np.array([2.0, 1.0])
    assert np.allclose(grad_eta(toy, h), -lambda_of_h(toy, h))


def test_eta_scaling_inverse_homogeneous(toy):
    h = np.array([2.0, 1.0])
    assert np.isclose(eta(toy, 2.0 * h), 0.5 * eta(toy, h))


def test_quadratic_invariant(toy):
    for h in (np.array([1.0, 0.0]), np.array([2.0, 1.0]), np.array([3.0, -1.0])):
        et = eta(toy, h)
        assert np.isclose(np.linalg.norm(toy.x - et * h), toy.eps)


def test_e_residual(toy):
    assert np.isclose(e_residual(toy, np.array([2.0, 1.0])), 0.2)
    assert np.isclose(e_residual(toy, np.array([5.0, 0.0])), 0.0)
    # zero image falls back to the full squared norm
    assert np.isclose(e_residual(toy, np.zeros(2)), 1.0)


def test_cone_membership(toy):
    assert cone_member(toy, np.array([1.0, 0.0]))
    assert not cone_member(toy, np.array([0.0, 1.0]))
    assert not cone_member(toy, np.array([-1.0, 0.0]))
    with pytest.raises(ValueError):
        cone_member(toy, np.array([1.0, 0.0]), eps_level=1.0)


def test_evaluate_outside_cone_raises(toy):
    with pytest.raises(NotInCone):
        evaluate(toy, np.array([0.0, 1.0]))


def test_gradient_at_boundary_raises(toy):
    # e(h) = eps^2 exactly at a 30-degree rotation of x
    h = np.array([np.sqrt(3.0) / 2.0, 0.5])
    ev = evaluate(toy, h)
    assert np.isclose(ev.e, toy.eps**2)
    with pytest.raises(BoundaryOfCone):
        evaluate(toy, h, need_grad=True)


def test_make_instance_bounds():
    with pytest.raises(InvalidBounds):
        make_instance(np.array([0.1, 0.0]), IdentityOperator(2), 0.5)
    with pytest.raises(InvalidBounds):
        make_instance(np.array([1.0, 0.0]), IdentityOperator(2), 0.5,
                      eps_bar=0.6)


def test_strictly_feasible(toy):
    assert toy.strictly_feasible()


def test_l_value_and_grad(toy):
    lam = np.array([0.4, 0.1])
    expected = lam @ toy.x - 0.5 * np.linalg.norm(lam)
    assert np.isclose(l_value(toy.x, toy.eps, lam) ** 2, expected)
    delta = 1e-7
    g = l_grad(toy.x, toy.eps, lam)
    for i in range(2):
        ei = np.zeros(2)
        ei[i] = delta
        fd = (l_value(toy.x, toy.eps, lam + ei)
              - l_value(toy.x, toy.eps, lam - ei)) / (2.0 * delta)
        assert np.isclose(g[i], fd, atol=1e-6)


def test_l_value_outside_domain(toy):
    with pytest.raises(NotInLambda):
        l_value(toy.x, toy.eps, np.array([0.0, 1.0]))


def test_lambda_maximizes_dual(toy):
    h = np.array([2.0, 1.0])
    lam = lambda_of_h(toy, h)
    # eta(h) equals the dual value 2 l(lam) - <lam, phi h> at the maximizer
    val = 2.0 * l_value(toy.x, toy.eps, lam) - float(lam @ h)
    assert np.isclose(val, eta(toy, h))
    for _ in range(50):
        cand = lam + 0.01 * rng.standard_normal(2)
        try:
            other = 2.0 * l_value(toy.x, toy.eps, cand) - float(cand @ h)
        except NotInLambda:
            continue
        assert other <= val + 1e-12


def test_m_matrix_symmetric(toy):
    m = m_matrix(toy, np.array([2.0, 1.0]))
    assert np.allclose(m, m.T)


def test_cost_bracket_toy(toy):
    assert np.isclose(eta_bar_lower(toy), 0.5)
    assert np.isclose(eta_hat_candidate(toy), 0.5)


def test_regularity_constants_toy(toy):
    reg = regularity_constants(toy, 0.5, 0.5)
    assert np.isclose(reg.alpha, 1.0 / 3.0)
    assert np.isclose(reg.beta_prime, 3.0)
    assert reg.alpha_prime > 0.0
    assert reg.bound_B > 0.0
    with pytest.raises(InvalidBounds):
        regularity_constants(toy, 1.0, 0.5)


def test_cost_bracket_brackets_optimum():
    for _ in range(10):
        n = int(rng.integers(4, 17))
        x = rng.standard_normal(n)
        eps = 0.5 * float(np.linalg.norm(x))
        inst = make_instance(x, IdentityOperator(n), eps)
        c_star = inst.cost.value(identity_oracle_solution(x, eps))
        assert eta_bar_lower(inst) <= c_star * (1.0 + 1e-9)
        assert eta_hat_candidate(inst) >= c_star * (1.0 - 1e-9)


def test_identity_oracle_solution_properties():
    for _ in range(10):
        x = rng.standard_normal(12)
        eps = 0.4 * float(np.linalg.norm(x))
        f = identity_oracle_solution(x, eps)
        assert np.isclose(np.linalg.norm(x - f), eps, atol=1e-8)
        # soft threshold structure: signs match x, magnitudes shrink
        assert np.all(np.sign(f[f != 0.0]) == np.sign(x[f != 0.0]))
        assert np.all(np.abs(f) <= np.abs(x) + 1e-12)
