"""Dense complex linear algebra primitives.

Hermitian eigendecomposition with a deterministic phase convention,
unitary synthesis from Hermitian generators, and stable entropy sums.
All logarithms throughout the package are natural logarithms: the
identities between coherence curvature and Fisher information hold
exactly only in nats.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, NonHermitian, NotNormalized

HERM_RTOL = 1e-12
PHASE_THRESHOLD = 1e-8
ENTROPY_CLIP = 1e-15
NORM_TOL = 1e-9


def herm_defect(a: np.ndarray) -> float:
    """Max-norm distance from a to its Hermitian part, relative to max|a|."""
    scale = float(np.abs(a).max()) or 1.0
    return float(np.abs(a - a.conj().T).max()) / scale


def require_hermitian(a: np.ndarray, rtol: float = HERM_RTOL) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonHermitian(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a.view(float))):
        raise NonHermitian("matrix has non-finite entries")
    defect = herm_defect(a)
    if defect > rtol:
        raise NonHermitian(f"Hermiticity defect {defect:.3e} exceeds {rtol:.1e}")
    return a


def fix_phases(vectors: np.ndarray, threshold: float = PHASE_THRESHOLD) -> np.ndarray:
    """Rotate each column so its first component with modulus > threshold
    is real and positive.  Makes eigenbases reproducible run to run."""
    out = np.array(vectors, dtype=complex, copy=True)
    for k in range(out.shape[1]):
        col = out[:, k]
        idx = np.flatnonzero(np.abs(col) > threshold)
        if idx.size == 0:
            idx = [int(np.argmax(np.abs(col)))]
        pivot = col[idx[0]]
        if pivot != 0:
            out[:, k] = col * (np.conj(pivot) / np.abs(pivot))
    return out


@dataclass(frozen=True)
class EigDecomposition:
    """Eigenvalues in ascending order, orthonormal eigenvectors as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def eigh(a: np.ndarray, rtol: float = HERM_RTOL) -> EigDecomposition:
    """Hermitian eigendecomposition with the package phase convention.

    Real symmetric inputs take the (faster) real solver and come back
    with real eigenvectors.  Raises NonHermitian if the input violates
    the Hermiticity tolerance and NoConvergence if the underlying
    iterative solver gives up.
    """
    a = require_hermitian(a, rtol)
    try:
        if np.abs(a.imag).max() == 0.0:
            w, v = np.linalg.eigh(a.real)
            v = v.astype(complex)
        else:
            w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails
        raise NoConvergence(str(exc)) from exc
    return EigDecomposition(w, fix_phases(v))


def unitary_from_generator(generator: np.ndarray, lam: float) -> np.ndarray:
    """exp(-i lam G) for Hermitian G, via eigendecomposition."""
    dec = eigh(generator)
    phases = np.exp(-1j * lam * dec.eigenvalues)
    return (dec.eigenvectors * phases) @ dec.eigenvectors.conj().T


def xlogx_sum(p: np.ndarray, norm_tol: float = NORM_TOL) -> float:
    """Shannon entropy -sum p ln p in nats, with 0 ln 0 = 0.

    Entries below -1e-12 or a total off 1 beyond norm_tol raise
    NotNormalized.  Entries below ENTROPY_CLIP contribute exactly 0,
    which stabilizes finite-difference curvatures near pure states.
    """
    p = np.asarray(p, dtype=float)
    if p.size and p.min() < -1e-12:
        raise NotNormalized(f"negative probability {p.min():.3e}")
    total = float(p.sum())
    if abs(total - 1.0) > norm_tol:
        raise NotNormalized(f"probabilities sum to {total!r}")
    q = np.clip(p, 0.0, None)
    q = q[q > ENTROPY_CLIP]
    return float(-(q * np.log(q)).sum())


def entropy_unchecked(p: np.ndarray) -> float:
    """Entropy sum without the normalization gate (internal FD use)."""
    q = np.clip(np.asarray(p, dtype=float), 0.0, None)
    q = q[q > ENTROPY_CLIP]
    return float(-(q * np.log(q)).sum())
