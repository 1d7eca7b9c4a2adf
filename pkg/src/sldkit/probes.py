"""Closed-form probe families with analytic Fisher-information records:
single-qubit Bloch probes, the norm-constrained optimal generator,
separable (generally discordant) sector mixtures, GHZ mixtures, and
NOON mixtures.

GHZ mixtures are stored by Hamming class j = |k| in [0, M-1] with the
binomial multiplicity C(M-1, j) folded into the weight, since every
closed form depends on k only through |k|; this keeps the analytic
record O(M) and usable up to M ~ 1e6.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import DegenerateDenominator, DimTooLarge, NotDescending, NotNormalized
from .estimation import StateFamily
from .states import MeasBasis
from .tps import TpsDecomposition

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

FULL_SPACE_LIMIT = 14  # largest qubit count for dense 2^M constructions


def _pauli_dot(vec) -> np.ndarray:
    return vec[0] * SIGMA_X + vec[1] * SIGMA_Y + vec[2] * SIGMA_Z


# ---------------------------------------------------------------------------
# single-qubit Bloch probe
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlochQubit:
    """Probe rho0 = (1 + z sigma_z)/2 with generator gamma (ghat . sigma),
    ghat = (sin delta, 0, cos delta), measured along bhat(theta, phi)."""

    z: float
    delta: float
    gamma: float
    theta: float = np.pi / 2
    phi: float = np.pi / 2

    def __post_init__(self):
        if not 0.0 <= self.z <= 1.0:
            raise NotNormalized(f"Bloch length {self.z} outside [0, 1]")
        if self.gamma <= 0:
            raise NotNormalized("generator strength must be positive")

    def bloch_vector(self) -> np.ndarray:
        return np.array([0.0, 0.0, self.z])

    def generator_axis(self) -> np.ndarray:
        return np.array([np.sin(self.delta), 0.0, np.cos(self.delta)])

    def measurement_axis(self) -> np.ndarray:
        st, ct = np.sin(self.theta), np.cos(self.theta)
        return np.array([st * np.cos(self.phi), st * np.sin(self.phi), ct])

    def rho0(self) -> np.ndarray:
        return 0.5 * (np.eye(2, dtype=complex) + self.z * SIGMA_Z)

    def generator(self) -> np.ndarray:
        return self.gamma * _pauli_dot(self.generator_axis())

    def family(self) -> StateFamily:
        return StateFamily.unitary(self.rho0(), self.generator())

    def measurement_basis(self) -> MeasBasis:
        b = self.measurement_axis()
        # eigenvectors of bhat . sigma, +1 column first
        op = _pauli_dot(b)
        w, v = np.linalg.eigh(op)
        order = np.argsort(-w)
        return MeasBasis(v[:, order], check=False)


def qubit_fi_closed(q: BlochQubit) -> float:
    """FI(bhat) = 4 (gvec x zvec . bhat)^2 / (1 - (zvec . bhat)^2) at lam = 0."""
    zvec = q.bloch_vector()
    gvec = q.gamma * q.generator_axis()
    b = q.measurement_axis()
    denom = 1.0 - float(np.dot(zvec, b)) ** 2
    if denom <= 1e-12:
        raise DegenerateDenominator("measurement axis aligned with the Bloch vector")
    cross = np.cross(gvec, zvec)
    return 4.0 * float(np.dot(cross, b)) ** 2 / denom


def qubit_qfi_closed(q: BlochQubit) -> float:
    """QFI = 4 z^2 gamma^2 sin^2 delta (equals 2 z^2 Tr[G^2] at delta = pi/2)."""
    return 4.0 * q.z**2 * q.gamma**2 * np.sin(q.delta) ** 2


def qubit_robustness(q: BlochQubit, dlam: float) -> float:
    """First-order Fisher information of a pure probe measured slightly
    off the optimal basis after a residual shift dlam:

        F ~ 4 g^2 sin^2 phi - g^3 (16 cos^2 phi sin phi cot theta) dlam
    """
    if abs(q.z - 1.0) > 1e-12:
        raise NotNormalized("robustness expansion applies to pure probes (z = 1)")
    g = q.gamma
    leading = 4.0 * g**2 * np.sin(q.phi) ** 2
    correction = 16.0 * g**3 * np.cos(q.phi) ** 2 * np.sin(q.phi) / np.tan(q.theta)
    return float(leading - correction * dlam)


# ---------------------------------------------------------------------------
# norm-constrained optimal generator
# ---------------------------------------------------------------------------

def max_qfi_generator(populations, gamma: float):
    """Optimal generator at fixed Tr[G^2] = 2 gamma^2 for a diagonal state.

    Returns (G, qfi_max) with G = gamma (|1><N| + |N><1|) and
    qfi_max = 4 gamma^2 (p_1 - p_N)^2 / (p_1 + p_N).
    """
    p = np.asarray(populations, dtype=float)
    if p.size < 2:
        raise NotDescending("need at least two populations")
    if np.any(np.diff(p) > 0):
        raise NotDescending("populations must be sorted in descending order")
    if p.min() <= 0:
        raise NotDescending("populations must be strictly positive")
    n = p.size
    g = np.zeros((n, n), dtype=complex)
    g[0, -1] = g[-1, 0] = gamma
    qfi_max = 4.0 * gamma**2 * (p[0] - p[-1]) ** 2 / (p[0] + p[-1])
    return g, qfi_max


# ---------------------------------------------------------------------------
# separable sector mixtures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SeparableClass:
    """Mixture sum_k p_k tau_k (x) |k><k| of single-qubit states with
    Bloch vectors h_k (sin d_k cos f_k, sin d_k sin f_k, cos d_k);
    tilts d_k = pi/2 put the qubits in the equatorial plane."""

    weights: np.ndarray
    lengths: np.ndarray
    azimuths: np.ndarray
    tilts: np.ndarray

    def __post_init__(self):
        for name in ("weights", "lengths", "azimuths", "tilts"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if abs(self.weights.sum() - 1.0) > 1e-9:
            raise NotNormalized("sector weights must sum to 1")
        if np.any(self.lengths < 0) or np.any(self.lengths > 1 + 1e-12):
            raise NotNormalized("Bloch lengths must lie in [0, 1]")

    @property
    def n_sectors(self) -> int:
        return self.weights.size

    def bloch_vector(self, k: int) -> np.ndarray:
        h, f, d = self.lengths[k], self.azimuths[k], self.tilts[k]
        return h * np.array([np.sin(d) * np.cos(f), np.sin(d) * np.sin(f), np.cos(d)])


def separable_qfi(sc: SeparableClass) -> float:
    """QFI under G = sigma_z (x) 1: weighted sum 4 sum_k p_k h_k^2 sin^2 d_k."""
    return float(4.0 * (sc.weights * sc.lengths**2 * np.sin(sc.tilts) ** 2).sum())


def separable_family(sc: SeparableClass) -> StateFamily:
    """Full-space unitary family on dim 2 * n_sectors with G = sigma_z (x) 1."""
    k = sc.n_sectors
    dim = 2 * k
    rho0 = np.zeros((dim, dim), dtype=complex)
    for i in range(k):
        tau = 0.5 * (np.eye(2, dtype=complex) + _pauli_dot(sc.bloch_vector(i)))
        rho0[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = sc.weights[i] * tau
    generator = np.kron(np.eye(k, dtype=complex), SIGMA_Z)
    # basis ordering (qubit within sector): rho0 built block-by-block above
    return StateFamily.unitary(rho0, generator)


def separable_structural_tps(sc: SeparableClass) -> TpsDecomposition:
    """Sector-wise SLD pairing |a_{+-,k}> = |+-ahat_k> (x) |k> with
    ahat_k along zhat x nhat_k and alphas 2 h_k sin(tilt_k).

    This pairing is structural: when the azimuths differ across sectors
    the generator is not real in the state eigenbasis and the
    antisymmetric standard form does not apply, but the probability
    machinery of the split theorem only needs the paired eigenvectors.
    Sectors with a vanishing in-plane component are zero modes and pair
    the two tau_k eigenvectors.
    """
    k = sc.n_sectors
    dim = 2 * k
    alphas = np.empty(k)
    plus = np.zeros((dim, k), dtype=complex)
    minus = np.zeros((dim, k), dtype=complex)
    zhat = np.array([0.0, 0.0, 1.0])
    for i in range(k):
        n_vec = sc.bloch_vector(i)
        axis = np.cross(zhat, n_vec)
        norm = np.linalg.norm(axis)
        if norm < 1e-14:
            # zero mode: pair the computational states of the sector
            alphas[i] = 0.0
            plus[2 * i, i] = 1.0
            minus[2 * i + 1, i] = 1.0
            continue
        w, v = np.linalg.eigh(_pauli_dot(axis / norm))
        order = np.argsort(-w)
        from .linalg import fix_phases
        v = fix_phases(v[:, order])
        alphas[i] = 2.0 * norm
        plus[2 * i : 2 * i + 2, i] = v[:, 0]
        minus[2 * i : 2 * i + 2, i] = v[:, 1]
    return TpsDecomposition.from_pairs(alphas, plus, minus)


# ---------------------------------------------------------------------------
# GHZ mixtures
# ---------------------------------------------------------------------------

def _log_binom(n: int, k: np.ndarray) -> np.ndarray:
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


@dataclass(frozen=True)
class GhzMixture:
    """Mixture of M-qubit GHZ basis states, aggregated by Hamming class.

    weights[j] is the total probability of the classes with |k| = j
    (binomial multiplicity folded in), j = 0 .. M-1.
    """

    qubits: int
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        if self.qubits < 1:
            raise NotNormalized("need at least one qubit")
        if self.weights.size != self.qubits:
            raise NotNormalized(f"expected {self.qubits} class weights")
        if self.weights.min() < 0 or abs(self.weights.sum() - 1.0) > 1e-9:
            raise NotNormalized("class weights must be a probability vector")

    @classmethod
    def pure(cls, qubits: int) -> "GhzMixture":
        w = np.zeros(qubits)
        w[0] = 1.0
        return cls(qubits, w)

    @classmethod
    def uniform_over_sectors(cls, qubits: int) -> "GhzMixture":
        """Equal weight on each of the 2^(M-1) sectors."""
        j = np.arange(qubits)
        return cls(qubits, np.exp(_log_binom(qubits - 1, j) - (qubits - 1) * np.log(2.0)))

    def sector_weights(self) -> np.ndarray:
        """Per-sector probability p_k = w_j / C(M-1, j) for |k| = j."""
        j = np.arange(self.qubits)
        return self.weights * np.exp(-_log_binom(self.qubits - 1, j))


@dataclass(frozen=True)
class GhzAnalytic:
    """Closed forms: QFI = 4 <Oz^2>, FI2 = 4 <Oz>^2, d2M = 4 Var(Oz),
    where Oz has eigenvalue (M - 2j) on class j."""

    qfi: float
    fi2: float
    oz_mean: float
    oz_variance: float

    @property
    def mi_curvature(self) -> float:
        return 4.0 * self.oz_variance


def ghz_analytic(g: GhzMixture) -> GhzAnalytic:
    m = np.asarray(g.qubits - 2 * np.arange(g.qubits), dtype=float)
    mean = float((g.weights * m).sum())
    second = float((g.weights * m * m).sum())
    return GhzAnalytic(
        qfi=4.0 * second,
        fi2=4.0 * mean**2,
        oz_mean=mean,
        oz_variance=second - mean**2,
    )


def ghz_basis_vectors(qubits: int, sector: int):
    """(|GHZ_k^+>, |GHZ_k^->) columns in the computational basis."""
    dim = 1 << qubits
    kbar = (dim - 1) ^ sector
    plus = np.zeros(dim, dtype=complex)
    minus = np.zeros(dim, dtype=complex)
    plus[sector] = plus[kbar] = 1.0 / np.sqrt(2.0)
    minus[sector] = 1.0 / np.sqrt(2.0)
    minus[kbar] = -1.0 / np.sqrt(2.0)
    return plus, minus


def collective_z(qubits: int) -> np.ndarray:
    """G = sum_h sigma_z^h, diagonal with entries M - 2 popcount."""
    dim = 1 << qubits
    pop = np.array([bin(i).count("1") for i in range(dim)], dtype=float)
    return np.diag(qubits - 2.0 * pop).astype(complex)


def ghz_family(g: GhzMixture) -> StateFamily:
    """Materialize the full 2^M unitary family (M <= FULL_SPACE_LIMIT)."""
    if g.qubits > FULL_SPACE_LIMIT:
        raise DimTooLarge(f"dense construction limited to M <= {FULL_SPACE_LIMIT}")
    dim = 1 << g.qubits
    p_k = g.sector_weights()
    rho0 = np.zeros((dim, dim), dtype=complex)
    for k in range(dim // 2):
        j = bin(k).count("1")
        if p_k[j] == 0.0:
            continue
        plus, _ = ghz_basis_vectors(g.qubits, k)
        rho0 += p_k[j] * np.outer(plus, plus.conj())
    return StateFamily.unitary(rho0, collective_z(g.qubits))


def ghz_structural_tps(qubits: int) -> TpsDecomposition:
    """The GHZ-aligned pairing |a_{+-,k}> = (|GHZ_k^+> -+ i |GHZ_k^->)/sqrt2
    with signed alphas 2(M - 2|k|).

    This is the pairing under which the sector probabilities read
    p_{+-,k} = (1 +- sin(2 lam (M-2|k|))) p_k / 2 and the single-qubit
    Fisher term takes its closed form FI2 = 4 (sum_k (M-2|k|) p_k)^2.
    """
    if qubits > FULL_SPACE_LIMIT:
        raise DimTooLarge(f"dense construction limited to M <= {FULL_SPACE_LIMIT}")
    dim = 1 << qubits
    alphas = []
    plus_cols = []
    for k in range(dim // 2):
        plus, minus = ghz_basis_vectors(qubits, k)
        plus_cols.append((plus - 1j * minus) / np.sqrt(2.0))
        alphas.append(2.0 * (qubits - 2 * bin(k).count("1")))
    return TpsDecomposition.from_pairs(np.array(alphas), np.column_stack(plus_cols))


# ---------------------------------------------------------------------------
# NOON mixtures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NoonMixture:
    """Two-mode mixture with weight p_k and coherence eta_k in the
    k-photon sector (k = 0 is the vacuum); |eta_k| <= 1/2 keeps each
    2x2 sector block positive."""

    weights: np.ndarray
    coherences: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        object.__setattr__(self, "coherences", np.asarray(self.coherences, dtype=complex))
        if self.weights.size != self.coherences.size:
            raise NotNormalized("weights and coherences must have equal length")
        if abs(self.weights.sum() - 1.0) > 1e-9 or self.weights.min() < 0:
            raise NotNormalized("weights must be a probability vector")
        if np.any(np.abs(self.coherences) > 0.5 + 1e-12):
            raise NotNormalized("|eta_k| <= 1/2 required for positivity")

    @property
    def cutoff(self) -> int:
        return self.weights.size - 1


def noon_qfi(n: NoonMixture) -> float:
    """QFI = sum_k p_k k^2 (2 |eta_k|)^2; the vacuum sector contributes 0."""
    k = np.arange(n.weights.size, dtype=float)
    return float((n.weights * k**2 * (2.0 * np.abs(n.coherences)) ** 2).sum())


def noon_sector_family(n: NoonMixture, k: int) -> StateFamily:
    """The 2x2 unitary family of sector k: tau_k with eta -> eta e^{-ik lam},
    generated by (k/2) sigma_z."""
    if not 1 <= k <= n.cutoff:
        raise DimTooLarge(f"sector {k} outside 1..{n.cutoff}")
    eta = complex(n.coherences[k])
    tau = np.array([[0.5, eta], [np.conj(eta), 0.5]], dtype=complex)
    return StateFamily.unitary(tau, (k / 2.0) * SIGMA_Z)
