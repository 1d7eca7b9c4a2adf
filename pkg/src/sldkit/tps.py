"""Tensor product structure induced by a paired-spectrum SLD.

For an even-dimensional system whose SLD is purely imaginary in the
reference eigenbasis (real generator hypothesis), the SLD spectrum comes
in opposite pairs (+a_k, -a_k) and its eigenvectors split the space into
a qubit factor times an N/2-dimensional sector factor.  This module
builds that factorization, the embedded qubit Pauli operators and sector
projectors, joint/marginal outcome probabilities, the classical mutual
information between the two factors, the QFI = FI2 + d2M split, and the
single-qubit reduced state with its bound chain FI2 <= QFI(xi) <= QFI.

Qubit frame convention: in the (+, -) eigenvector basis of each sector,
S_y = diag(1, -1) (the SLD direction), S_z has matrix [[0,1],[1,0]] and
S_x has [[0,-i],[i,0]], a right-handed Pauli triple.  With this frame a
sector evolving under generator a S_x traces Bloch (0, sin 2a lam,
cos 2a lam) starting from the +z state, matching the closed forms used
by the GHZ probe families.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import finitediff, linalg
from .errors import DimMismatch, NotAntisymmetric, OddDimension
from .estimation import SldResult, StateFamily, qfi_trace, sld
from .states import DensityMatrix, MeasBasis

ZERO_MODE_RTOL = 1e-10
PAIR_TOL = 1e-9


@dataclass(frozen=True)
class TpsDecomposition:
    """SLD-induced qubit (x) sector factorization.

    alphas[k] is the (signed) eigenvalue attached to the '+' member of
    pair k; the '-' member has -alphas[k].  plus_vectors / minus_vectors
    hold the paired eigenvectors as columns, real_basis the real vectors
    l_{2k-1}, l_{2k} with |a_{+-,k}> = (l_{2k-1} +- i l_{2k}) / sqrt 2.
    """

    alphas: np.ndarray
    plus_vectors: np.ndarray
    minus_vectors: np.ndarray
    real_basis: np.ndarray | None
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray
    projectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.plus_vectors.shape[0]

    @property
    def n_sectors(self) -> int:
        return self.plus_vectors.shape[1]

    def lmatrix(self) -> np.ndarray:
        """Reconstruct the SLD as sum_k alpha_k (P_{+,k} - P_{-,k})."""
        vp, vm = self.plus_vectors, self.minus_vectors
        return (vp * self.alphas) @ vp.conj().T - (vm * self.alphas) @ vm.conj().T

    def joint_basis(self) -> MeasBasis:
        """Columns ordered (+, k=1..N/2) then (-, k=1..N/2)."""
        return MeasBasis(np.hstack([self.plus_vectors, self.minus_vectors]), check=False)

    @classmethod
    def from_pairs(cls, alphas, plus_vectors, minus_vectors=None) -> "TpsDecomposition":
        """Build a decomposition from an explicit pairing.

        minus_vectors defaults to the complex conjugates of plus_vectors,
        which is the exact partner choice whenever the SLD is purely
        imaginary in the ambient basis.  Signed alphas are allowed: the
        '+' label is a structural choice, not a sign convention.  The
        real standard-form basis is attached when the pairs are
        conjugate partners; pairings that exist only structurally (e.g.
        sector mixtures with unequal azimuths) carry real_basis = None.
        """
        alphas = np.asarray(alphas, dtype=float)
        vp = np.asarray(plus_vectors, dtype=complex)
        vm = np.conj(vp) if minus_vectors is None else np.asarray(minus_vectors, dtype=complex)
        n, k = vp.shape
        if n != 2 * k:
            raise DimMismatch(f"{k} pairs cannot span dimension {n}")
        cols = np.hstack([vp, vm])
        gram = cols.conj().T @ cols
        defect = float(np.abs(gram - np.eye(n)).max())
        if defect > PAIR_TOL:
            raise NotAntisymmetric(f"pair vectors not orthonormal (defect {defect:.3e})")

        l1 = (vp + vm) / np.sqrt(2.0)
        l2 = (vp - vm) / (1j * np.sqrt(2.0))
        imag_part = max(float(np.abs(l1.imag).max()), float(np.abs(l2.imag).max()))
        if imag_part > PAIR_TOL:
            real_basis = None
        else:
            real_basis = np.empty((n, n))
            real_basis[:, 0::2] = l1.real
            real_basis[:, 1::2] = l2.real

        pp = np.einsum("ik,jk->kij", vp, vp.conj())
        mm = np.einsum("ik,jk->kij", vm, vm.conj())
        pm = np.einsum("ik,jk->kij", vp, vm.conj())
        mp = np.einsum("ik,jk->kij", vm, vp.conj())
        return cls(
            alphas=alphas,
            plus_vectors=vp,
            minus_vectors=vm,
            real_basis=real_basis,
            sx=(-1j * pm + 1j * mp).sum(axis=0),
            sy=(pp - mm).sum(axis=0),
            sz=(pm + mp).sum(axis=0),
            projectors=pp + mm,
        )


def tps_decompose(sld_result: SldResult) -> TpsDecomposition:
    """Standard-form pairing of an SLD given in the reference eigenbasis.

    Eigenvalues are paired (+a, -a) by descending |a| with ties broken
    by original eigenindex; the '-' partner of each '+' eigenvector is
    its complex conjugate.  Zero modes (rank-deficient SLD) are paired
    among themselves through a real orthonormal basis of the kernel; the
    split identities are pairing-independent, determinism is what
    matters here.
    """
    l = sld_result.lmatrix
    n = l.shape[0]
    if n % 2:
        raise OddDimension(f"dimension {n} is odd")
    scale = max(1.0, float(np.abs(l).max()))
    re_part = float(np.abs(l.real).max())
    if re_part > 1e-8 * scale:
        raise NotAntisymmetric(
            f"Re part {re_part:.3e} exceeds tolerance; generator not real "
            "in the reference basis"
        )

    # work with the exactly antisymmetric part i*Im(L)
    dec = linalg.eigh(1j * l.imag)
    w, v = dec.eigenvalues, dec.eigenvectors
    zero_tol = ZERO_MODE_RTOL * scale
    pos = np.flatnonzero(w > zero_tol)
    pos = pos[np.lexsort((pos, -w[pos]))]

    alphas = list(w[pos])
    plus_cols = [v[:, i] for i in pos]

    n_zero = n - 2 * len(pos)
    if n_zero:
        kernel = v[:, np.abs(w) <= zero_tol]
        stacked = np.hstack([kernel.real, kernel.imag])
        u, s, _ = np.linalg.svd(stacked, full_matrices=False)
        basis = u[:, :n_zero]
        basis = linalg.fix_phases(basis.astype(complex)).real
        for k in range(0, n_zero, 2):
            u1, u2 = basis[:, k], basis[:, k + 1]
            plus_cols.append((u1 + 1j * u2) / np.sqrt(2.0))
            alphas.append(0.0)

    return TpsDecomposition.from_pairs(np.array(alphas), np.column_stack(plus_cols))


@dataclass(frozen=True)
class ProbTable:
    """Joint outcome probabilities p[i, k], row 0 = '+', row 1 = '-'."""

    joint: np.ndarray

    @property
    def qubit_marginal(self) -> np.ndarray:
        return self.joint.sum(axis=1)

    @property
    def sector_marginal(self) -> np.ndarray:
        return self.joint.sum(axis=0)

    @property
    def total(self) -> float:
        return float(self.joint.sum())


def joint_probs(rho, tps: TpsDecomposition) -> ProbTable:
    """p_{+-,k} = <alpha_{+-,k}| rho |alpha_{+-,k}>."""
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if mat.shape[0] != tps.dim:
        raise DimMismatch(f"state dim {mat.shape[0]} vs TPS dim {tps.dim}")
    p_plus = np.einsum("ik,ij,jk->k", tps.plus_vectors.conj(), mat, tps.plus_vectors).real
    p_minus = np.einsum("ik,ij,jk->k", tps.minus_vectors.conj(), mat, tps.minus_vectors).real
    return ProbTable(np.clip(np.vstack([p_plus, p_minus]), 0.0, 1.0))


def mutual_info(table: ProbTable) -> float:
    """Classical mutual information H(p_+-) + H(p_k) - H(p_{+-,k}), nats."""
    h_q = linalg.entropy_unchecked(table.qubit_marginal)
    h_s = linalg.entropy_unchecked(table.sector_marginal)
    h_j = linalg.entropy_unchecked(table.joint.ravel())
    return h_q + h_s - h_j


@dataclass(frozen=True)
class QfiSplitReport:
    """QFI against its single-qubit + correlation split (Eq.-28-type).

    fi2 + mi_curvature = qfi within finite-difference tolerance;
    mutual information and its slope vanish at the reference point.
    """

    fi2: float
    mi_curvature: float
    qfi: float
    mutual_at_center: float
    mutual_slope: float


def qfi_split(family: StateFamily, tps: TpsDecomposition, lam0: float,
              h: float | None = None) -> QfiSplitReport:
    h = finitediff.default_step(lam0) if h is None else h

    tables = finitediff.SampledCurve.sample(
        lambda lam: joint_probs(family.state(lam), tps).joint, lam0, h
    )
    p0 = tables.at_center()
    dp_h, dp_h2 = tables.first()

    def fi2_of(dp):
        pq = p0.sum(axis=1)
        dq = dp.sum(axis=1)
        keep = pq > 1e-12
        return float((dq[keep] ** 2 / pq[keep]).sum())

    fi2_h, fi2_h2 = fi2_of(dp_h), fi2_of(dp_h2)
    finitediff.check_pair(fi2_h, fi2_h2, "FI2")

    mi_curve = finitediff.SampledCurve.sample(
        lambda lam: mutual_info(joint_probs(family.state(lam), tps)), lam0, h
    )
    m_h, m_h2 = mi_curve.second()
    finitediff.check_pair(m_h, m_h2, "mutual-information curvature")
    dm_h, dm_h2 = mi_curve.first()
    finitediff.check_pair(dm_h, dm_h2, "mutual-information slope")

    sr = sld(family.state(lam0), family.derivative(lam0, h))
    return QfiSplitReport(
        fi2=fi2_h2,
        mi_curvature=float(m_h2),
        qfi=qfi_trace(family.state(lam0), sr),
        mutual_at_center=float(mi_curve.at_center()),
        mutual_slope=float(dm_h2),
    )


def reduced_qubit(rho, tps: TpsDecomposition) -> DensityMatrix:
    """Trace out the sector factor: xi_ij = sum_k <a_{i,k}|rho|a_{j,k}>."""
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if mat.shape[0] != tps.dim:
        raise DimMismatch(f"state dim {mat.shape[0]} vs TPS dim {tps.dim}")
    cols = (tps.plus_vectors, tps.minus_vectors)
    xi = np.empty((2, 2), dtype=complex)
    for i, vi in enumerate(cols):
        for j, vj in enumerate(cols):
            xi[i, j] = np.einsum("ik,ij,jk->", vi.conj(), mat, vj)
    xi = (xi + xi.conj().T) / 2.0
    return DensityMatrix(xi, check=False)


def reduced_qubit_family(family: StateFamily, tps: TpsDecomposition) -> StateFamily:
    """The 2x2 family lam -> Tr_sector[rho_lam] (general kind)."""
    return StateFamily.general(lambda lam: reduced_qubit(family.state(lam), tps).matrix)


def reduced_qubit_qfi(family: StateFamily, tps: TpsDecomposition, lam0: float,
                      h: float | None = None) -> float:
    xi_family = reduced_qubit_family(family, tps)
    sr = sld(xi_family.state(lam0), xi_family.derivative(lam0, h))
    return qfi_trace(xi_family.state(lam0), sr)
