import numpy as np
import pytest

from corrdrift.bases import cosine_basis, design_matrix, hermite_basis
from corrdrift.correlation import identity, toeplitz
from corrdrift.estimator import (GateSpec, NestedDesign, empirical_gram,
                                 empirical_norm_sq, empirical_norm_sq_fn,
                                 empirical_target, fit_fixed_m, noise_vector)
from corrdrift.models import custom_model, get_model
from corrdrift.simulate import simulate_ensemble, subsample


def constant_ensemble(x0=0.5, n_paths=4, n_steps=10):
    model = custom_model(lambda x: np.zeros_like(x), lambda x: np.zeros_like(x),
                         x0=x0, interval=(0, 1))
    return simulate_ensemble(model, n_paths, n_steps * 0.1, 0.1,
                             identity(n_paths), seed=0)


def ex1_ensemble(n_paths=20, horizon=20.0, seed=2, rho=0.0):
    R = identity(n_paths) if rho == 0.0 else toeplitz(n_paths, rho)
    return simulate_ensemble(get_model("ex1"), n_paths, horizon, 0.1, R, seed=seed)


def test_gram_constant_basis_inside_support():
    ens = constant_ensemble()
    grams = empirical_gram(ens, cosine_basis(0.0, 1.0, m_max=1), 1)
    assert grams.psi_hat[0, 0] == pytest.approx(1.0)  # 1/(b-a) with b-a = 1


def test_gram_constant_sigma_factors_out():
    ens = ex1_ensemble()
    basis = hermite_basis(5)
    grams = empirical_gram(ens, basis, 5, sigma=lambda x: 3.0 * np.ones_like(x))
    np.testing.assert_allclose(grams.psi_hat_sigma, 9.0 * grams.psi_hat,
                               rtol=1e-12)


def test_gram_matches_naive_double_loop():
    ens = ex1_ensemble(n_paths=3, horizon=4.0)
    basis = hermite_basis(3)
    grams = empirical_gram(ens, basis, 3, sigma=get_model("ex1").diffusion)
    nt = ens.n_paths * ens.horizon
    naive = np.zeros((3, 3))
    naive_sigma = np.zeros((3, 3))
    sig = get_model("ex1").diffusion
    for i in range(ens.n_paths):
        for k in range(ens.n_steps):
            x = ens.values[i, k]
            phi = design_matrix(basis, 3, np.array([x]))[0]
            naive += np.outer(phi, phi) * ens.dt / nt
            naive_sigma += float(sig(np.array([x]))[0]) ** 2 \
                * np.outer(phi, phi) * ens.dt / nt
    np.testing.assert_allclose(grams.psi_hat, naive, atol=1e-12)
    np.testing.assert_allclose(grams.psi_hat_sigma, naive_sigma, atol=1e-12)


def test_target_zero_for_constant_paths():
    ens = constant_ensemble()
    target = empirical_target(ens, cosine_basis(0.0, 1.0, m_max=3), 3)
    np.testing.assert_array_equal(target, np.zeros(3))


def test_target_telescopes_for_constant_function():
    # ex2 paths live in (-1, 1); with the basis supported there, the first
    # component is (b-a)^{-1/2} (1/(NT)) sum_i (X_T^i - X_0^i)
    ens = simulate_ensemble(get_model("ex2"), 10, 10.0, 0.1, identity(10), seed=4)
    basis = cosine_basis(-1.0, 1.0, m_max=2)
    target = empirical_target(ens, basis, 2)
    expected = (ens.values[:, -1] - ens.values[:, 0]).sum() \
        / np.sqrt(2.0) / (ens.n_paths * ens.horizon)
    assert target[0] == pytest.approx(expected, rel=1e-12)


def test_target_noiseless_decomposition_is_exact():
    # with sigma = 0 and Euler data, increments are exactly b(X_k) dt, so
    # the target equals the empirical inner products of b with the basis
    basis = cosine_basis(0.0, 1.0, m_max=3)
    theta_true = np.array([2.0, 1.0])

    def b(x):
        return design_matrix(basis, 2, x) @ theta_true

    model = custom_model(b, lambda x: np.zeros_like(x), x0=0.0, interval=(0, 1))
    ens = simulate_ensemble(model, 5, 1.0, 0.01, identity(5), seed=1)
    target = empirical_target(ens, basis, 3)
    states = ens.values[:, :-1].reshape(-1)
    phi = design_matrix(basis, 3, states)
    inner = phi.T @ b(states) / states.size
    np.testing.assert_allclose(target, inner, atol=1e-15)


def test_noiseless_recovery_and_dt_refinement():
    basis = cosine_basis(0.0, 1.0, m_max=4)
    theta_true = np.array([2.0, 1.0])

    def b(x):
        return design_matrix(basis, 2, x) @ theta_true

    def sigma0(x):
        return np.zeros_like(x)

    model = custom_model(b, sigma0, x0=0.0, interval=(0.0, 1.0))

    def fit_at(dt_obs, stride=64):
        fine = simulate_ensemble(model, 10, 1.0, dt_obs / stride,
                                 identity(10), seed=3)
        est = fit_fixed_m(subsample(fine, stride), basis, 2, sigma=sigma0)
        return est, np.abs(est.theta - theta_true).max()

    est, err = fit_at(1e-3)
    assert err < 1e-2
    _, err_half = fit_at(5e-4)
    assert err / err_half >= 1.8
    grid = np.linspace(0.0, 1.0, 2000)
    mise = np.trapezoid((est(grid) - b(grid)) ** 2, grid)
    assert mise < 1e-4


def test_gate_override_forces_truncation():
    ens = ex1_ensemble()
    est = fit_fixed_m(ens, hermite_basis(4), 4,
                      gate=GateSpec(threshold_override=0.0))
    assert est.truncated
    np.testing.assert_array_equal(est.theta, np.zeros(4))
    np.testing.assert_array_equal(est(np.linspace(-1, 1, 5)), np.zeros(5))


def test_singular_gram_despite_gate_warns_and_truncates():
    # constant paths outside the support give an all-zero Gram; an infinite
    # override lets it through the gate and the factorization must fail
    ens = constant_ensemble(x0=5.0)
    basis = cosine_basis(0.0, 1.0, m_max=2)
    with pytest.warns(RuntimeWarning):
        est = fit_fixed_m(ens, basis, 2, gate=GateSpec(threshold_override=np.inf))
    assert est.truncated
    assert est.diagnostics.get("singular")


def test_least_squares_identity():
    # gamma_N(b_hat) = -||b_hat||_N^2 up to solver roundoff
    ens = ex1_ensemble(n_paths=50, horizon=50.0)
    basis = hermite_basis(8)
    design = NestedDesign(ens, basis, 8)
    for m in (1, 4, 8):
        theta = design.solve(m)
        gamma = theta @ design.gram(m) @ theta - 2.0 * theta @ design.target(m)
        assert abs(gamma + design.norm_sq(theta)) < 1e-10


def test_empirical_norm_of_unit_function():
    ens = ex1_ensemble()
    assert empirical_norm_sq_fn(ens, lambda x: np.ones_like(x)) == pytest.approx(1.0)


def test_norm_coefficient_and_function_forms_agree():
    ens = ex1_ensemble()
    basis = hermite_basis(6)
    est = fit_fixed_m(ens, basis, 6)
    coef = empirical_norm_sq(ens, basis, est.theta)
    fn = empirical_norm_sq_fn(ens, est)
    assert coef == pytest.approx(fn, abs=1e-12)


def test_fitted_norms_monotone_in_dimension():
    ens = ex1_ensemble(n_paths=50, horizon=50.0)
    basis = hermite_basis(8)
    design = NestedDesign(ens, basis, 8)
    norms = [design.norm_sq(design.solve(m)) for m in range(1, 9)]
    assert all(a <= b + 1e-14 for a, b in zip(norms, norms[1:]))


def test_gram_nesting():
    ens = ex1_ensemble()
    basis = hermite_basis(7)
    full = empirical_gram(ens, basis, 7).psi_hat
    for m in (1, 3, 5):
        sub = empirical_gram(ens, basis, m).psi_hat
        np.testing.assert_allclose(sub, full[:m, :m], rtol=1e-13, atol=1e-16)


def test_truncation_contract():
    ens = ex1_ensemble()
    basis = hermite_basis(4)
    for override, expect_truncated in ((0.0, True), (np.inf, False)):
        est = fit_fixed_m(ens, basis, 4,
                          gate=GateSpec(threshold_override=override))
        assert est.truncated == expect_truncated
        assert est.truncated == bool(np.all(est.theta == 0.0))


def test_gate_kinds():
    ens = ex1_ensemble(n_paths=50, horizon=50.0)
    basis = hermite_basis(5)
    emp = fit_fixed_m(ens, basis, 5, gate=GateSpec(kind="empirical"))
    theo = fit_fixed_m(ens, basis, 5, gate=GateSpec(kind="theoretical", p=12.0))
    assert not emp.truncated
    assert emp.diagnostics["gate_kind"] == "empirical"
    assert theo.diagnostics["gate_kind"] == "theoretical"
    assert theo.diagnostics["gate_threshold"] != emp.diagnostics["gate_threshold"]
    with pytest.raises(ValueError):
        GateSpec(kind="theoretical", p=4.0)
    with pytest.raises(ValueError):
        GateSpec(kind="bogus")


def test_noise_vector_zero_sigma():
    ens = ex1_ensemble()
    vec = noise_vector(ens, hermite_basis(3), 3, lambda x: np.zeros_like(x))
    np.testing.assert_array_equal(vec, np.zeros(3))


def test_noise_vector_requires_increments():
    ens = ex1_ensemble()
    stripped = type(ens)(values=ens.values, dt=ens.dt, seed=ens.seed,
                         model_id=ens.model_id,
                         correlation_descriptor=ens.correlation_descriptor,
                         increments=None)
    with pytest.raises(ValueError):
        noise_vector(stripped, hermite_basis(3), 3, lambda x: np.ones_like(x))
