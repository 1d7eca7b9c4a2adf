"""Independent numerical oracles used by the test suite.

These deliberately re-derive physics through routes different from the
library implementation: truncated series for matrix exponentials,
Uhlmann fidelity finite differences for the QFI, a brute-force Lindblad
integrator built directly from Kronecker products, and an unaggregated
per-sector simulation of the transverse-noise GHZ dynamics.
"""
from __future__ import annotations

import numpy as np
from scipy import sparse
from scipy.integrate import solve_ivp
from scipy.sparse.linalg import expm_multiply

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SY = np.array([[0.0, -1.0j], [1.0j, 0.0]])
SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

# frozen high-precision constants (30-digit evaluation)
ENTROPY_4321 = 1.27985422583366746718218576215   # H(0.4,0.3,0.2,0.1), nats
ENTROPY_91 = 0.325082973391448239506550028224    # H(0.9,0.1), nats


def taylor_expm(generator: np.ndarray, lam: float, terms: int = 8) -> np.ndarray:
    """Truncated series for exp(-i lam G)."""
    dim = generator.shape[0]
    out = np.eye(dim, dtype=complex)
    term = np.eye(dim, dtype=complex)
    for n in range(1, terms):
        term = term @ (-1j * lam * generator) / n
        out = out + term
    return out


def uhlmann_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """F = Tr sqrt(sqrt(rho) sigma sqrt(rho)) via eigensolves."""
    w, v = np.linalg.eigh(rho)
    sq = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    inner = sq @ sigma @ sq
    ev = np.linalg.eigvalsh((inner + inner.conj().T) / 2.0)
    return float(np.sqrt(np.clip(ev, 0.0, None)).sum())


def qfi_by_fidelity(state_fn, lam: float, h: float = 1e-4) -> float:
    """QFI ~ 8 (1 - F(rho(lam-h), rho(lam+h))) / (2h)^2."""
    f = uhlmann_fidelity(state_fn(lam - h), state_fn(lam + h))
    return 8.0 * (1.0 - f) / (2.0 * h) ** 2


def embed_qubit_op(op: np.ndarray, site: int, qubits: int) -> np.ndarray:
    """site 0 is the most significant bit of the computational index."""
    mats = [np.eye(2, dtype=complex)] * qubits
    mats[site] = op
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def lindblad_evolve(hamiltonian, jumps, rho0, t):
    """Propagate drho = -i[H, rho] + sum_j (L rho L+ - (L+L rho + rho L+L)/2)
    by applying the exponential of the sparse Liouvillian to vec(rho)."""
    dim = rho0.shape[0]
    eye = sparse.identity(dim, format="csr", dtype=complex)
    ham = sparse.csr_matrix(hamiltonian)
    liouville = -1j * (sparse.kron(ham, eye) - sparse.kron(eye, ham.T))
    for op in jumps:
        op = sparse.csr_matrix(op)
        opsq = (op.conj().T @ op).tocsr()
        liouville = liouville + sparse.kron(op, op.conj())
        liouville = liouville - 0.5 * (sparse.kron(opsq, eye) + sparse.kron(eye, opsq.T))
    out = expm_multiply(liouville.tocsc() * t, rho0.astype(complex).ravel())
    return out.reshape(dim, dim)


def ghz_vector(qubits: int) -> np.ndarray:
    dim = 1 << qubits
    psi = np.zeros(dim, dtype=complex)
    psi[0] = psi[-1] = 1.0 / np.sqrt(2.0)
    return psi


def transverse_dense_state(qubits, omega, gamma, t):
    """Full 2^M solution of
    drho = -i (omega/2)[sum sz, rho] - (gamma/2) sum_h (rho - sx_h rho sx_h)."""
    ham = 0.5 * omega * sum(embed_qubit_op(SZ, s, qubits) for s in range(qubits))
    jumps = [np.sqrt(gamma / 2.0) * embed_qubit_op(SX, s, qubits) for s in range(qubits)]
    rho0 = np.outer(ghz_vector(qubits), ghz_vector(qubits).conj())
    return lindblad_evolve(ham, jumps, rho0, t)


def parallel_dense_state(qubits, omega, gamma, t):
    """Full 2^M solution with sigma_z jumps instead of sigma_x."""
    ham = 0.5 * omega * sum(embed_qubit_op(SZ, s, qubits) for s in range(qubits))
    jumps = [np.sqrt(gamma / 2.0) * embed_qubit_op(SZ, s, qubits) for s in range(qubits)]
    rho0 = np.outer(ghz_vector(qubits), ghz_vector(qubits).conj())
    return lindblad_evolve(ham, jumps, rho0, t)


def sector_block(rho: np.ndarray, qubits: int, k: int) -> np.ndarray:
    """2x2 block of sector k in the pair basis (|a_+>, |a_->) with
    |a_{+-}> = ((1 -+ i)|k> + (1 +- i)|kbar>)/2."""
    kbar = ((1 << qubits) - 1) ^ k
    a_plus = np.zeros(rho.shape[0], dtype=complex)
    a_plus[k] = (1.0 - 1.0j) / 2.0
    a_plus[kbar] = (1.0 + 1.0j) / 2.0
    a_minus = np.conj(a_plus)
    cols = (a_plus, a_minus)
    out = np.empty((2, 2), dtype=complex)
    for i, vi in enumerate(cols):
        for j, vj in enumerate(cols):
            out[i, j] = vi.conj() @ rho @ vj
    return out


QX = np.array([[0.0, -1.0j], [1.0j, 0.0]])
QZ = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def unaggregated_sector_evolve(qubits, omega, gamma, t, rtol=1e-11, atol=1e-13):
    """Evolve every one of the 2^(M-1) transverse-noise sector blocks.

    Labels carry bits 0..M-2; qubit M-1 is the one whose flip maps a
    sector to its bit-complement partner with a Q_Z conjugation.
    Returns an array u[k] of per-sector 2x2 blocks.
    """
    n_sectors = 1 << (qubits - 1)
    labels = np.arange(n_sectors)
    hamming = np.array([bin(k).count("1") for k in labels])
    flips = [labels ^ (1 << h) for h in range(qubits - 1)]
    complement = (n_sectors - 1) ^ labels

    u0 = np.zeros((n_sectors, 2, 2), dtype=complex)
    u0[0] = 0.5 * np.array([[1.0, 1.0], [1.0, 1.0]])
    coeff = 0.5j * omega * (qubits - 2.0 * hamming)

    def rhs(_, y):
        u = y.reshape(n_sectors, 2, 2)
        out = coeff[:, None, None] * (QX @ u - u @ QX)
        out -= 0.5 * gamma * qubits * u
        gain = np.zeros_like(u)
        for idx in flips:
            gain += u[idx]
        gain += QZ @ u[complement] @ QZ
        out += 0.5 * gamma * gain
        return out.ravel()

    sol = solve_ivp(rhs, (0.0, t), u0.ravel(), rtol=rtol, atol=atol)
    assert sol.success, sol.message
    return sol.y[:, -1].reshape(n_sectors, 2, 2)


def random_qualifying_family(rng: np.random.Generator, dim: int, pure: bool = False):
    """Unitary family satisfying the pairing hypotheses: diagonal rho0
    (full rank unless pure) and a real symmetric generator."""
    from sldkit.estimation import StateFamily

    if pure:
        populations = np.zeros(dim)
        populations[0] = 1.0
    else:
        populations = rng.uniform(0.2, 1.0, size=dim)
        populations = populations / populations.sum()
    a = rng.standard_normal((dim, dim))
    generator = (a + a.T) / 2.0
    family = StateFamily.unitary(np.diag(populations).astype(complex),
                                 generator.astype(complex))
    return family, populations, generator
