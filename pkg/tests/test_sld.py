import numpy as np
import pytest

from qfisher import catalog
from qfisher.classical import classical_fisher_matrix
from qfisher.errors import PreconditionError, SolverError, ValidationError
from qfisher.geometry import hermitian_tensor
from qfisher.models import probability_to_density, pure_to_density, pure_to_probability
from qfisher.numdiff import differentiate
from qfisher.sld import (
    pure_state_identities, purity_check, qfi_pure_fast, qfi_tensor, qfi_via_trace, sld_solve,
)

from conftest import random_pure_models


def sld_by_kronecker(rho, drho):
    """Brute force: solve (rho (x) I + I (x) rho^T) vec(L) = 2 vec(drho) as one n^2 system."""
    n = rho.shape[0]
    eye = np.eye(n)
    A = np.kron(rho, eye) + np.kron(eye, rho.T)
    return np.linalg.solve(A, 2 * drho.reshape(-1)).reshape(n, n)


def random_traceless_hermitian(rng, n):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    A = (A + A.conj().T) / 2
    return A - np.trace(A) / n * np.eye(n)


def test_maximally_mixed_gives_twice_drho(rng):
    rho = np.eye(2) / 2
    d = random_traceless_hermitian(rng, 2)
    L = sld_solve(rho, d).matrices[0]
    np.testing.assert_allclose(L, 2 * d, atol=1e-14)


def test_diagonal_state_gives_classical_score():
    p = np.array([0.2, 0.5, 0.3])
    dp = np.array([0.1, -0.3, 0.2])
    out = sld_solve(np.diag(p), np.diag(dp))
    np.testing.assert_allclose(out.matrices[0], np.diag(dp / p), atol=1e-15)
    assert out.support_rank == 3


def test_pure_state_sld_is_twice_drho():
    model = catalog.make_random_pure(5, 2, seed=3)
    dens = pure_to_density(model)
    diff = differentiate(dens, [0.3, 0.8])
    out = sld_solve(diff.value, diff)
    assert out.support_rank == 1
    for L, d in zip(out.matrices, diff.per_parameter):
        rho = diff.value
        np.testing.assert_allclose(rho @ L + L @ rho, 2 * d, atol=1e-12)
        # the kernel block of drho vanishes for pure states, so the zero-kernel choice matches entrywise
        np.testing.assert_allclose(L, 2 * d, atol=1e-12)


def test_full_rank_matches_kronecker_oracle():
    for seed in range(10):
        model = catalog.make_random_density(4 + seed % 4, 2, seed)
        diff = differentiate(model, [0.2, -0.6])
        out = sld_solve(diff.value, diff)
        for L, d in zip(out.matrices, diff.per_parameter):
            np.testing.assert_allclose(L, sld_by_kronecker(diff.value, d), atol=1e-9)
            np.testing.assert_allclose(L, L.conj().T, atol=1e-14)
        assert np.max(out.residuals) <= 1e-10


def test_sld_input_validation(rng):
    rho = np.diag([0.6, 0.4])
    with pytest.raises(ValidationError, match="Hermitian"):
        sld_solve(rho, np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValidationError, match="traceless"):
        sld_solve(rho, np.eye(2))
    with pytest.raises(ValidationError, match="dimension"):
        sld_solve(rho, np.zeros((1, 3, 3)))
    with pytest.raises(ValidationError):
        sld_solve(np.diag([0.7, 0.4]), np.zeros((2, 2)))


def test_sld_residual_gate_raises():
    model = catalog.make_random_density(3, 1, seed=0)
    diff = differentiate(model, [0.1])
    with pytest.raises(SolverError):
        sld_solve(diff.value, diff, sld_tol=-1.0)


# -- qfi tensor ---------------------------------------------------------------------

@pytest.mark.parametrize("theta", [0.5, 0.3, 0.8])
def test_bernoulli_embedded_as_diagonal_state(bernoulli, theta):
    dens = probability_to_density(bernoulli)
    diff = differentiate(dens, [theta])
    Q = qfi_tensor(diff.value, sld_solve(diff.value, diff))
    assert Q.metric_part[0, 0] == pytest.approx(1 / (theta * (1 - theta)), abs=1e-12)
    assert Q.metric_part[0, 0] == pytest.approx(classical_fisher_matrix(bernoulli, [theta])[0, 0], abs=1e-12)


@pytest.mark.parametrize("theta", [np.pi / 2, 0.6, 2.4])
def test_qubit_qfi_via_sld(qubit, theta):
    dens = pure_to_density(qubit)
    diff = differentiate(dens, [theta, 0.3])
    Q = qfi_tensor(diff.value, sld_solve(diff.value, diff))
    np.testing.assert_allclose(Q.metric_part, np.diag([1.0, np.sin(theta) ** 2]), atol=1e-12)
    shortcut = qfi_via_trace(diff.value, diff)
    np.testing.assert_allclose(Q.entries, shortcut.entries, atol=1e-12)


def test_parameter_independent_state_has_zero_qfi():
    rho = np.diag([0.5, 0.3, 0.2]).astype(complex)
    Q = qfi_tensor(rho, sld_solve(rho, np.zeros((2, 3, 3))))
    np.testing.assert_array_equal(Q.entries, np.zeros((2, 2)))


def test_qfi_dimension_mismatch():
    rho = np.eye(2) / 2
    slds = sld_solve(rho, np.zeros((1, 2, 2)))
    with pytest.raises(ValidationError):
        qfi_tensor(np.eye(3) / 3, slds)


def test_qfi_tensor_hermitian_and_psd():
    for seed in range(20):
        model = catalog.make_random_density(5, 3, seed)
        diff = differentiate(model, [0.1, 0.4, -0.2])
        Q = qfi_tensor(diff.value, sld_solve(diff.value, diff))
        np.testing.assert_allclose(Q.entries, Q.entries.conj().T, atol=1e-10)
        assert np.linalg.eigvalsh(Q.metric_part).min() >= -1e-9 * np.max(np.abs(Q.metric_part))


# -- pure-state identities ----------------------------------------------------------

def test_identities_exact_for_qubit(qubit, rng):
    dens = pure_to_density(qubit)
    for _ in range(10):
        diff = differentiate(dens, rng.uniform(-3, 3, size=2))
        assert np.max(pure_state_identities(diff.value, diff)) <= 1e-12


def test_identities_fd_random():
    for model, th in random_pure_models(20, seed=41):
        diff = differentiate(pure_to_density(model).with_fd(), th)
        assert np.max(pure_state_identities(diff.value, diff)) <= 1e-6


def test_identities_fail_for_mixed_state(rng):
    rho = np.diag([0.6, 0.4]).astype(complex)
    d = np.array([[0.5, 0.3 - 0.2j], [0.3 + 0.2j, -0.5]])
    with pytest.raises(PreconditionError):
        pure_state_identities(rho, d)
    res = pure_state_identities(rho, d, require_pure=False)
    assert res[0, 0] > 0.05


def test_purity_check_values():
    psi = np.array([0.6, 0.8j])
    assert purity_check(np.outer(psi, psi.conj())) <= 1e-14
    assert purity_check(np.eye(2) / 2) == pytest.approx(0.25)
    assert purity_check(np.diag([0.9, 0.1])) == pytest.approx(0.09)


# -- fast pure-state path -----------------------------------------------------------

def test_fast_path_qubit(qubit):
    Q = qfi_pure_fast(qubit, [np.pi / 2, 0.0])
    np.testing.assert_allclose(Q.metric_part, np.eye(2), atol=1e-15)
    np.testing.assert_allclose(Q.entries, 4 * hermitian_tensor(qubit, [np.pi / 2, 0.0]).entries)


def test_fast_path_real_model_equals_classical():
    for model, th in random_pure_models(10, seed=42, real=True):
        F = classical_fisher_matrix(pure_to_probability(model), th)
        np.testing.assert_allclose(qfi_pure_fast(model, th).metric_part, F, atol=1e-8)


def test_fast_path_phase_encoding(phase_model):
    # 4 Var_p(x) with p = (1/4, 1/2, 1/4) on x = (-1, 0, 1)
    assert qfi_pure_fast(phase_model, [1.7]).metric_part[0, 0] == pytest.approx(4 * 0.5, abs=1e-9)


def test_three_paths_agree_including_asymmetric_part():
    for model, th in random_pure_models(50, seed=43):
        diff = differentiate(pure_to_density(model), th)
        Q_sld = qfi_tensor(diff.value, sld_solve(diff.value, diff))
        Q_trace = qfi_via_trace(diff.value, diff)
        Q_fast = qfi_pure_fast(model, th)
        np.testing.assert_allclose(Q_sld.entries, Q_fast.entries, atol=1e-7)
        np.testing.assert_allclose(Q_trace.entries, Q_fast.entries, atol=1e-7)


def test_quantum_dominates_classical():
    for model, th in random_pure_models(50, seed=44):
        Q = qfi_pure_fast(model, th).metric_part
        F = classical_fisher_matrix(pure_to_probability(model), th)
        assert np.linalg.eigvalsh(Q - F).min() >= -1e-9


def test_diagonal_fast_path_matches_general_path(rng):
    # a random unitary rotation forces the eigendecomposition route; the QFI is unitarily invariant
    p = rng.dirichlet(np.ones(5))
    d = rng.normal(size=(2, 5, 5)) + 1j * rng.normal(size=(2, 5, 5))
    d = d + np.conj(np.swapaxes(d, 1, 2))
    d -= np.trace(d, axis1=1, axis2=2)[:, None, None] * np.eye(5) / 5
    U, _ = np.linalg.qr(rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5)))
    rho = np.diag(p).astype(complex)
    fast = qfi_tensor(rho, sld_solve(rho, d))
    rho_u = U @ rho @ U.conj().T
    d_u = U[None] @ d @ U.conj().T[None]
    slow = qfi_tensor(rho_u, sld_solve(rho_u, d_u))
    np.testing.assert_allclose(fast.entries, slow.entries, atol=1e-12)
