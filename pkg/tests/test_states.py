import numpy as np
import pytest

from sldkit import states
from sldkit.errors import DimMismatch, NotNormalized
from sldkit.states import DensityMatrix, MeasBasis

from oracles import ENTROPY_91, ENTROPY_4321, SX, SY, SZ


def bloch_state(z: float) -> DensityMatrix:
    return DensityMatrix(0.5 * (np.eye(2, dtype=complex) + z * SZ))


def pauli_basis(op) -> MeasBasis:
    w, v = np.linalg.eigh(op)
    return MeasBasis(v[:, np.argsort(-w)])


def test_density_matrix_validation():
    with pytest.raises(NotNormalized):
        DensityMatrix(np.eye(2, dtype=complex))  # trace 2
    with pytest.raises(NotNormalized):
        DensityMatrix(np.diag([1.5, -0.5]).astype(complex))  # not PSD
    dm = DensityMatrix.pure(np.array([1.0, 1.0]) / np.sqrt(2.0))
    assert dm.dim == 2


def test_probs_computational_on_pure():
    dm = DensityMatrix.pure(np.array([1.0, 0.0, 0.0]))
    p = states.probs(dm, MeasBasis.computational(3))
    assert np.allclose(p, [1.0, 0.0, 0.0])


def test_probs_uniform_on_maximally_mixed():
    rng = np.random.default_rng(2)
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    q, _ = np.linalg.qr(a)
    p = states.probs(DensityMatrix.maximally_mixed(4), MeasBasis(q))
    assert np.abs(p - 0.25).max() < 1e-12


def test_probs_bloch_in_y_basis():
    p = states.probs(bloch_state(0.8), pauli_basis(SY))
    assert np.abs(p - 0.5).max() < 1e-12


def test_probs_dim_mismatch():
    with pytest.raises(DimMismatch):
        states.probs(bloch_state(0.5), MeasBasis.computational(3))


def test_probs_sum_to_one():
    rng = np.random.default_rng(9)
    for _ in range(20):
        n = int(rng.integers(2, 7))
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        rho = a @ a.conj().T
        rho /= np.trace(rho).real
        q, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
        p = states.probs(DensityMatrix(rho), MeasBasis(q))
        assert abs(p.sum() - 1.0) <= 1e-9


def test_von_neumann_values():
    assert states.von_neumann(DensityMatrix.pure(np.array([1.0, 0.0]))) == 0.0
    assert abs(states.von_neumann(DensityMatrix.maximally_mixed(2)) - np.log(2.0)) < 1e-14
    dm = DensityMatrix.diagonal([0.4, 0.3, 0.2, 0.1])
    assert abs(states.von_neumann(dm) - ENTROPY_4321) < 1e-13


def test_coherence_incoherent_state():
    dm = DensityMatrix.diagonal([0.7, 0.3])
    assert abs(states.coherence(dm, MeasBasis.computational(2))) < 1e-14


def test_coherence_plus_state():
    dm = DensityMatrix.pure(np.array([1.0, 1.0]) / np.sqrt(2.0))
    value = states.coherence(dm, MeasBasis.computational(2))
    assert abs(value - np.log(2.0)) < 1e-12


def test_coherence_bloch_x_basis():
    # z = 0.8 probe measured along x: H(1/2,1/2) - V(rho) with
    # V(rho) = H(0.9, 0.1) in nats
    value = states.coherence(bloch_state(0.8), pauli_basis(SX))
    assert abs(value - (np.log(2.0) - ENTROPY_91)) < 1e-12


def test_coherence_nonnegative_random():
    rng = np.random.default_rng(31)
    for _ in range(40):
        n = int(rng.integers(2, 7))
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        rho = a @ a.conj().T
        rho /= np.trace(rho).real
        q, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
        assert states.coherence(DensityMatrix(rho), MeasBasis(q)) >= -1e-9


def test_coherence_invariant_under_basis_relabeling():
    rng = np.random.default_rng(12)
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    rho = a @ a.conj().T
    rho /= np.trace(rho).real
    dm = DensityMatrix(rho)
    q, _ = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    base = states.coherence(dm, MeasBasis(q))
    perm = q[:, [2, 0, 3, 1]]
    phases = q * np.exp(1j * rng.uniform(0, 2 * np.pi, size=4))
    assert abs(states.coherence(dm, MeasBasis(perm)) - base) < 1e-12
    assert abs(states.coherence(dm, MeasBasis(phases)) - base) < 1e-12
