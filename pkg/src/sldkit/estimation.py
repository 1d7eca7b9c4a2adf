"""SLD, quantum Fisher information by independent routes, classical
Fisher information of a measurement, coherence curvature, and the
decomposition of the curvature into Fisher and entropy-variation terms.

Conventions
-----------
A one-parameter family is a map lam -> density matrix.  Unitary
families carry (rho0, G) with rho(lam) = exp(-i lam G) rho0 exp(i lam G);
their state derivative is computed exactly as -i[G, rho(lam)].  General
families are differentiated by gated five-point finite differences.

For a family differentiable at lam0 with SLD eigenbasis B, in nats,

    -d2/dlam2 Coh_B(rho_lam) |_lam0  =  QFI + f,
    f = f_chi + f_eps - QFI_c,

where f_chi collects the cross-entropy curvature of the outcome
probabilities, and f_eps / QFI_c come from the variation of the state's
eigenvalues (both vanish identically for unitary families).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import finitediff, linalg
from .errors import (
    DimMismatch,
    EigTrackFailure,
    NormalizationDrift,
    SupportViolation,
)
from .linalg import ENTROPY_CLIP
from .states import DensityMatrix, MeasBasis, PureState, probs_matrix

SUPPORT_CUT = 1e-10
PROB_FLOOR = 1e-12
DERIV_FLOOR = 1e-8
TRACELESS_TOL = 1e-9
NULL_WEIGHT_TOL = 1e-6


def _matrix(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


@dataclass
class StateFamily:
    """One-parameter family of density matrices."""

    at: Callable[[float], np.ndarray]
    kind: str = "general"
    rho0: np.ndarray | None = None
    generator: np.ndarray | None = None

    @classmethod
    def unitary(cls, rho0, generator) -> "StateFamily":
        rho0 = _matrix(rho0)
        generator = linalg.require_hermitian(np.asarray(generator, dtype=complex))
        if rho0.shape != generator.shape:
            raise DimMismatch("state and generator dimensions differ")

        def evolve(lam: float) -> np.ndarray:
            u = linalg.unitary_from_generator(generator, lam)
            return u @ rho0 @ u.conj().T

        return cls(at=evolve, kind="unitary", rho0=rho0, generator=generator)

    @classmethod
    def general(cls, fn: Callable[[float], np.ndarray]) -> "StateFamily":
        return cls(at=lambda lam: _matrix(fn(lam)), kind="general")

    def state(self, lam: float) -> np.ndarray:
        return _matrix(self.at(lam))

    def derivative(self, lam: float, h: float | None = None) -> np.ndarray:
        """d rho / d lam; exact commutator for unitary families."""
        if self.kind == "unitary":
            rho = self.state(lam)
            g = self.generator
            return -1j * (g @ rho - rho @ g)
        h = finitediff.default_step(lam) if h is None else h
        parts = finitediff.SampledCurve.sample(
            lambda x: self.state(x).view(float), lam, h
        )
        coarse, fine = parts.first()
        finitediff.check_pair(coarse, fine, "state derivative")
        return np.ascontiguousarray(fine).view(complex)


@dataclass(frozen=True)
class SldResult:
    """SLD with its eigendecomposition, eigenvalues by descending |alpha|."""

    lmatrix: np.ndarray
    alphas: np.ndarray
    vectors: np.ndarray
    support_rank: int

    @property
    def dim(self) -> int:
        return self.lmatrix.shape[0]

    def basis(self) -> MeasBasis:
        return MeasBasis(self.vectors, check=False)


def sld(rho, drho, support_cut: float = SUPPORT_CUT) -> SldResult:
    """Solve (rho L + L rho)/2 = drho on the support of rho.

    In the eigenbasis of rho, L_nm = 2 drho_nm / (p_n + p_m) whenever
    p_n + p_m exceeds support_cut, and 0 otherwise.  Raises
    SupportViolation if drho has weight on the fully null subspace,
    where the parameter is not identifiable.
    """
    rho_m = _matrix(rho)
    drho = linalg.require_hermitian(np.asarray(drho, dtype=complex), rtol=1e-9)
    if rho_m.shape != drho.shape:
        raise DimMismatch("state and derivative dimensions differ")
    tr = abs(np.trace(drho))
    if tr > TRACELESS_TOL * max(1.0, float(np.abs(drho).max())):
        raise NormalizationDrift(f"Tr drho = {tr:.3e}, expected 0")

    dec = linalg.eigh(rho_m)
    p = np.clip(dec.eigenvalues, 0.0, None)
    v = dec.eigenvectors
    d_in_basis = v.conj().T @ drho @ v

    null = p <= support_cut / 2.0
    if null.any():
        block = d_in_basis[np.ix_(null, null)]
        weight = float(np.abs(block).max()) if block.size else 0.0
        if weight > NULL_WEIGHT_TOL:
            raise SupportViolation(
                f"derivative weight {weight:.3e} on the null subspace"
            )

    denom = p[:, None] + p[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        l_in_basis = np.where(denom > support_cut, 2.0 * d_in_basis / denom, 0.0)
    lmatrix = v @ l_in_basis @ v.conj().T
    lmatrix = (lmatrix + lmatrix.conj().T) / 2.0

    ldec = linalg.eigh(lmatrix)
    order = np.lexsort((np.arange(ldec.dim), -np.abs(ldec.eigenvalues)))
    return SldResult(
        lmatrix=lmatrix,
        alphas=ldec.eigenvalues[order],
        vectors=ldec.eigenvectors[:, order],
        support_rank=int((p > support_cut).sum()),
    )


def sld_of_family(family: StateFamily, lam0: float, h: float | None = None) -> SldResult:
    return sld(family.state(lam0), family.derivative(lam0, h))


def qfi_trace(rho, sld_result: SldResult) -> float:
    """QFI = Tr[rho L^2]."""
    rho_m = _matrix(rho)
    if rho_m.shape != sld_result.lmatrix.shape:
        raise DimMismatch("state and SLD dimensions differ")
    l = sld_result.lmatrix
    return float(np.trace(rho_m @ l @ l).real)


def qfi_spectral(rho0, generator, support_cut: float = SUPPORT_CUT) -> float:
    """QFI of a unitary family from the spectral data of rho0:

        QFI = 2 sum_{n != m} (p_n - p_m)^2 / (p_n + p_m) |<n|G|m>|^2
    """
    rho_m = _matrix(rho0)
    g = linalg.require_hermitian(np.asarray(generator, dtype=complex))
    if rho_m.shape != g.shape:
        raise DimMismatch("state and generator dimensions differ")
    dec = linalg.eigh(rho_m)
    p = np.clip(dec.eigenvalues, 0.0, None)
    gmat = dec.eigenvectors.conj().T @ g @ dec.eigenvectors
    num = (p[:, None] - p[None, :]) ** 2
    den = p[:, None] + p[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        weight = np.where(den > support_cut, num / den, 0.0)
    return float(2.0 * (weight * np.abs(gmat) ** 2).sum())


def qfi_pure(psi, dpsi) -> float:
    """Pure-state QFI = 4 (<v|v> - |<v|psi>|^2) for v = d psi / d lam."""
    v = psi.vector if isinstance(psi, PureState) else np.asarray(psi, dtype=complex)
    dv = np.asarray(dpsi, dtype=complex)
    if v.shape != dv.shape:
        raise DimMismatch("state and tangent dimensions differ")
    overlap = complex(np.vdot(v, dv))
    if abs(overlap.real) > 1e-8:
        raise NormalizationDrift(
            f"Re<psi|dpsi> = {overlap.real:.3e}; family not norm-preserving"
        )
    return float(4.0 * (np.vdot(dv, dv).real - abs(overlap) ** 2))


def _fisher_from(dp: np.ndarray, p0: np.ndarray) -> float:
    keep = p0 >= PROB_FLOOR
    dropped = ~keep
    if np.any(dropped & (np.abs(dp) >= DERIV_FLOOR)):
        raise SupportViolation(
            "outcome with vanishing probability has non-vanishing derivative"
        )
    return float((dp[keep] ** 2 / p0[keep]).sum())


def fisher_info(family: StateFamily, basis: MeasBasis, lam0: float,
                h: float | None = None) -> float:
    """Classical Fisher information of a fixed projective measurement,
    with outcome derivatives by gated five-point differences."""
    h = finitediff.default_step(lam0) if h is None else h
    curve = finitediff.SampledCurve.sample(
        lambda lam: probs_matrix(family.state(lam), basis.vectors), lam0, h
    )
    p0 = curve.at_center()
    dp_h, dp_h2 = curve.first()
    fi_h, fi_h2 = _fisher_from(dp_h, p0), _fisher_from(dp_h2, p0)
    finitediff.check_pair(fi_h, fi_h2, "Fisher information")
    return fi_h2


class CurvatureReport(NamedTuple):
    curvature: float  # -d2 Coh / dlam2 at lam0
    slope: float      # d Coh / dlam at lam0


def coherence_curvature(family: StateFamily, basis: MeasBasis, lam0: float,
                        h: float | None = None) -> CurvatureReport:
    """Second-order variation of Coh_basis along the family.

    The slope should vanish when `basis` is the SLD eigenbasis at lam0;
    it is reported so callers can check.
    """
    from .states import coherence_matrix

    h = finitediff.default_step(lam0) if h is None else h
    curve = finitediff.SampledCurve.sample(
        lambda lam: coherence_matrix(family.state(lam), basis.vectors), lam0, h
    )
    s_h, s_h2 = curve.second()
    finitediff.check_pair(s_h, s_h2, "coherence curvature")
    d_h, d_h2 = curve.first()
    finitediff.check_pair(d_h, d_h2, "coherence slope")
    return CurvatureReport(curvature=-float(s_h2), slope=float(d_h2))


def _tracked_eigenvalues(family: StateFamily, lam0: float, h: float):
    """Eigenvalue curves over the stencil nodes, matched to the lam0
    eigenvectors by maximal overlap (crossing-safe)."""
    points = finitediff.stencil_points(lam0, h)
    decs = [linalg.eigh(family.state(x)) for x in points]
    center = decs[finitediff.ALL_OFFSETS.index(0)]
    values: dict[int, np.ndarray] = {}
    for offset, dec in zip(finitediff.ALL_OFFSETS, decs):
        overlap = np.abs(center.eigenvectors.conj().T @ dec.eigenvectors)
        rows, cols = linear_sum_assignment(-overlap)
        matched = overlap[rows, cols]
        if matched.min() < 0.5:
            raise EigTrackFailure(
                f"eigenvector overlap {matched.min():.3f} below 0.5 at offset {offset}"
            )
        perm = np.empty_like(cols)
        perm[rows] = cols
        values[offset] = dec.eigenvalues[perm]
    return finitediff.SampledCurve(values, h)


@dataclass(frozen=True)
class Prop1Report:
    """Coherence curvature against its Fisher/entropy decomposition.

    curvature = qfi + f_total  and  f_total = f_chi + f_eps - qfi_classical
    hold within finite-difference tolerance; for unitary families
    f_eps = qfi_classical = 0 exactly.
    """

    curvature: float
    coh_slope: float
    qfi: float
    f_total: float
    f_chi: float
    f_eps: float
    qfi_classical: float
    qfi_quantum: float


def prop1_decompose(family: StateFamily, lam0: float,
                    h: float | None = None) -> Prop1Report:
    h = finitediff.default_step(lam0) if h is None else h
    rho0 = family.state(lam0)
    drho = family.derivative(lam0, h)
    sr = sld(rho0, drho)
    basis = sr.basis()

    report = coherence_curvature(family, basis, lam0, h)
    qfi = qfi_trace(rho0, sr)

    prob_curve = finitediff.SampledCurve.sample(
        lambda lam: probs_matrix(family.state(lam), basis.vectors), lam0, h
    )
    p0 = prob_curve.at_center()
    d2p_h, d2p_h2 = prob_curve.second()
    keep = p0 > ENTROPY_CLIP
    logs = np.where(keep, np.log(np.where(keep, p0, 1.0)), 0.0)
    f_chi_h = float((d2p_h * logs).sum())
    f_chi_h2 = float((d2p_h2 * logs).sum())
    finitediff.check_pair(f_chi_h, f_chi_h2, "cross-entropy curvature")
    f_chi = f_chi_h2

    if family.kind == "unitary":
        f_eps, qfi_c = 0.0, 0.0
    else:
        eps_curve = _tracked_eigenvalues(family, lam0, h)
        eps0 = np.clip(eps_curve.at_center(), 0.0, None)
        de_h, de_h2 = eps_curve.first()
        d2e_h, d2e_h2 = eps_curve.second()
        keep_log = eps0 > ENTROPY_CLIP
        eps_logs = np.where(keep_log, np.log(np.where(keep_log, eps0, 1.0)), 0.0)
        f_eps_h = float(-(d2e_h * eps_logs).sum())
        f_eps_h2 = float(-(d2e_h2 * eps_logs).sum())
        finitediff.check_pair(f_eps_h, f_eps_h2, "eigenvalue-entropy curvature")
        f_eps = f_eps_h2
        keep_c = eps0 > PROB_FLOOR
        qfi_c_h = float((de_h[keep_c] ** 2 / eps0[keep_c]).sum())
        qfi_c_h2 = float((de_h2[keep_c] ** 2 / eps0[keep_c]).sum())
        finitediff.check_pair(qfi_c_h, qfi_c_h2, "classical QFI term")
        qfi_c = qfi_c_h2

    return Prop1Report(
        curvature=report.curvature,
        coh_slope=report.slope,
        qfi=qfi,
        f_total=f_chi + f_eps - qfi_c,
        f_chi=f_chi,
        f_eps=f_eps,
        qfi_classical=qfi_c,
        qfi_quantum=qfi - qfi_c,
    )
