"""Quantum states, projective measurement bases, and the relative
entropy of coherence Coh_B(rho) = -V(rho) + H(p) (nats)."""
from __future__ import annotations

from dataclasses import InitVar, dataclass

import numpy as np

from . import linalg
from .errors import DimMismatch, NonHermitian, NotNormalized

TRACE_TOL = 1e-9
PSD_TOL = -1e-9
NORM_TOL = 1e-10
GRAM_TOL = 1e-9


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite matrix."""

    matrix: np.ndarray
    check: InitVar[bool] = True

    def __post_init__(self, check: bool) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        if not check:
            return
        linalg.require_hermitian(m)
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > TRACE_TOL:
            raise NotNormalized(f"trace {tr!r} deviates from 1")
        w = np.linalg.eigvalsh(m)
        if w.min() < PSD_TOL:
            raise NotNormalized(f"negative eigenvalue {w.min():.3e}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def pure(cls, vector: np.ndarray) -> "DensityMatrix":
        v = np.asarray(vector, dtype=complex)
        return cls(np.outer(v, v.conj()) / float(np.vdot(v, v).real))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim, dtype=complex) / dim)

    @classmethod
    def diagonal(cls, populations: np.ndarray) -> "DensityMatrix":
        return cls(np.diag(np.asarray(populations, dtype=complex)))


@dataclass(frozen=True)
class PureState:
    """Unit-norm complex amplitude vector."""

    vector: np.ndarray
    check: InitVar[bool] = True

    def __post_init__(self, check: bool) -> None:
        v = np.asarray(self.vector, dtype=complex)
        object.__setattr__(self, "vector", v)
        if check:
            n = float(np.linalg.norm(v))
            if abs(n - 1.0) > NORM_TOL:
                raise NotNormalized(f"norm {n!r} deviates from 1")

    @property
    def dim(self) -> int:
        return self.vector.shape[0]

    def density(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.vector, self.vector.conj()), check=False)


@dataclass(frozen=True)
class MeasBasis:
    """Orthonormal basis stored as matrix columns."""

    vectors: np.ndarray
    check: InitVar[bool] = True

    def __post_init__(self, check: bool) -> None:
        v = np.asarray(self.vectors, dtype=complex)
        object.__setattr__(self, "vectors", v)
        if check:
            gram = v.conj().T @ v
            defect = float(np.abs(gram - np.eye(v.shape[1])).max())
            if defect > GRAM_TOL:
                raise NotNormalized(f"Gram defect {defect:.3e}")

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @classmethod
    def computational(cls, dim: int) -> "MeasBasis":
        return cls(np.eye(dim, dtype=complex), check=False)


def probs(rho: DensityMatrix, basis: MeasBasis) -> np.ndarray:
    """Outcome probabilities p_x = <x|rho|x>, clipped and renormalized."""
    if rho.dim != basis.dim:
        raise DimMismatch(f"state dim {rho.dim} vs basis dim {basis.dim}")
    return probs_matrix(rho.matrix, basis.vectors)


def probs_matrix(matrix: np.ndarray, columns: np.ndarray) -> np.ndarray:
    """probs() on raw arrays; used by finite-difference inner loops."""
    if matrix.shape[0] != columns.shape[0]:
        raise DimMismatch(f"state dim {matrix.shape[0]} vs basis dim {columns.shape[0]}")
    p = np.einsum("ix,ij,jx->x", columns.conj(), matrix, columns).real
    p = np.clip(p, 0.0, 1.0)
    total = float(p.sum())
    if abs(total - 1.0) > TRACE_TOL:
        raise NotNormalized(f"probabilities sum to {total!r}")
    return p / total


def von_neumann(rho: DensityMatrix) -> float:
    """Von Neumann entropy in nats."""
    dec = linalg.eigh(rho.matrix)
    return linalg.entropy_unchecked(dec.eigenvalues)


def coherence(rho: DensityMatrix, basis: MeasBasis) -> float:
    """Relative entropy of coherence of `basis` with respect to `rho`."""
    return -von_neumann(rho) + linalg.entropy_unchecked(probs(rho, basis))


def coherence_matrix(matrix: np.ndarray, columns: np.ndarray) -> float:
    """coherence() on raw arrays (skips input validation)."""
    ev = np.linalg.eigvalsh(matrix)
    return -linalg.entropy_unchecked(ev) + linalg.entropy_unchecked(
        probs_matrix(matrix, columns)
    )
