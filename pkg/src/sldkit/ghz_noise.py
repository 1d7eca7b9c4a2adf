"""Noisy GHZ frequency estimation with local Pauli noise.

The M-qubit probe starts in (|0..0> + |1..1>)/sqrt2 and evolves under

    d rho/dt = -i (omega/2) [sum_h sigma_z^h, rho]
               - (gamma/2) sum_h (rho - sum_a alpha_a sigma_a^h rho sigma_a^h)

with alpha_x + alpha_y + alpha_z = 1.  For purely transverse noise
(alpha_x = 1) the state stays block diagonal over the GHZ sectors and
the 2^(M-1) sector blocks collapse, by permutation symmetry, onto M
Hamming classes j = |k| with multiplicity C(M-1, j): an O(M)
representation of the full dynamics.

Note on conventions: a Kraus table for the one-qubit channel circulates
in the literature with doubled rates (arguments gamma t and zeta t
instead of gamma t/2, zeta t/2).  That normalization is not trace
preserving together with the master equation above and breaks the
published optimal-time formula t_opt = (3 / (gamma omega^2 M))^(1/3);
everything here solves the master equation exactly as written, which is
also the normalization under which the parallel-noise closed forms
below are exact.  See kraus_coeffs for the resulting coefficients.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import gammaln, logsumexp

from . import finitediff
from .errors import (
    DegenerateDenominator,
    DimTooLarge,
    NotNormalized,
    StiffnessFailure,
    UnderflowWarning,
)
from .estimation import Prop1Report, StateFamily, prop1_decompose, qfi_trace, sld
from .probes import SIGMA_X, SIGMA_Y, SIGMA_Z

WEIGHT_FLOOR = 1e-12
DENSE_LIMIT = 10

# 2x2 operators of the embedded TPS qubit, written in the (+, -) pair
# basis: Q_Y is the SLD direction, Q_Z points along the GHZ_+ states,
# and the sector Hamiltonian is proportional to Q_X.
Q_X = np.array([[0.0, -1.0j], [1.0j, 0.0]])
Q_Z = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


@dataclass(frozen=True)
class NoiseParams:
    """Frequency omega, rate gamma, and the noise direction weights."""

    omega: float
    gamma: float
    alpha_x: float = 1.0
    alpha_y: float = 0.0
    alpha_z: float = 0.0

    def __post_init__(self):
        if self.gamma < 0:
            raise NotNormalized("decoherence rate must be nonnegative")
        alphas = (self.alpha_x, self.alpha_y, self.alpha_z)
        if min(alphas) < 0 or abs(sum(alphas) - 1.0) > 1e-12:
            raise NotNormalized("noise weights must be nonnegative and sum to 1")

    @property
    def transverse(self) -> bool:
        return self.alpha_x == 1.0

    @property
    def parallel(self) -> bool:
        return self.alpha_z == 1.0


@dataclass(frozen=True)
class KrausCoeffs:
    """One-qubit transverse-channel coefficients at time t.

    a, d propagate populations (|0><0| -> a |0><0| + d |1><1|), while
    b, c, f propagate coherences (|0><1| -> (b - ic)|0><1| + f |1><0|).
    zeta_sq = 4 omega^2 - gamma^2; underdamped for zeta_sq > 0.
    """

    a: float
    b: float
    c: float
    d: float
    f: float
    zeta_sq: float


def kraus_coeffs(omega: float, gamma: float, t: float) -> KrausCoeffs:
    """Coefficients of the one-qubit map solving
    d rho/dt = -i (omega/2)[sigma_z, rho] - (gamma/2)(rho - sigma_x rho sigma_x):

        a = (1 + e^{-gamma t}) / 2            d = (1 - e^{-gamma t}) / 2
        b = e^{-gamma t/2} cos(zeta t / 2)    zeta = sqrt(4 omega^2 - gamma^2)
        c = (2 omega / zeta) e^{-gamma t/2} sin(zeta t / 2)
        f = (gamma / zeta) e^{-gamma t/2} sin(zeta t / 2)

    For 4 omega^2 < gamma^2 the trigonometric pair continues to
    cosh/sinh of |zeta| t / 2, and sin(zeta t/2)/zeta -> t/2 as zeta -> 0.
    Trace preservation is a + d = 1 identically.
    """
    if t < 0:
        raise NotNormalized("time must be nonnegative")
    zeta_sq = 4.0 * omega**2 - gamma**2
    envelope = np.exp(-0.5 * gamma * t)
    if zeta_sq > 0:
        zeta = np.sqrt(zeta_sq)
        cos_term = np.cos(0.5 * zeta * t)
        sinc_term = np.sin(0.5 * zeta * t) / zeta
    elif zeta_sq < 0:
        zeta = np.sqrt(-zeta_sq)
        cos_term = np.cosh(0.5 * zeta * t)
        sinc_term = np.sinh(0.5 * zeta * t) / zeta
    else:
        cos_term = 1.0
        sinc_term = 0.5 * t
    return KrausCoeffs(
        a=0.5 * (1.0 + np.exp(-gamma * t)),
        b=envelope * cos_term,
        c=2.0 * omega * envelope * sinc_term,
        d=0.5 * (1.0 - np.exp(-gamma * t)),
        f=gamma * envelope * sinc_term,
        zeta_sq=zeta_sq,
    )


def _log_binom(n: int, k: np.ndarray) -> np.ndarray:
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def _signed_log_power(base: float, exponents: np.ndarray):
    """(sign, log|base^n|) with base^0 = 1 even for base = 0."""
    n = exponents
    if base == 0.0:
        return np.where(n == 0, 1.0, 0.0), np.where(n == 0, 0.0, -np.inf)
    sign = np.where(n % 2 == 0, 1.0, np.sign(base))
    return sign, n * np.log(abs(base))


def _complex_power(value: complex, exponents: np.ndarray) -> np.ndarray:
    """value**n for integer n >= 0 via log magnitude and phase."""
    n = exponents
    if value == 0.0:
        return np.where(n == 0, 1.0 + 0.0j, 0.0j)
    logmag = n * np.log(abs(value))
    phase = n * np.angle(value)
    return np.exp(logmag) * np.exp(1j * phase)


@dataclass(frozen=True)
class SectorEnsemble:
    """Hamming-class aggregation of the transverse-noise GHZ state.

    Class j holds the C(M-1, j) sectors with |k| = j; each sector's
    2x2 block in the pair basis is

        [[r - Im s, Re s], [Re s, r + Im s]],

    class weight = multiplicity * 2 r.  log_weights stores the class
    weights in the log domain so that very large M cannot underflow.
    """

    qubits: int
    rs: np.ndarray
    ss: np.ndarray
    log_weights: np.ndarray
    omega: float
    gamma: float
    t: float
    underflow: bool = False

    @property
    def classes(self) -> np.ndarray:
        return np.arange(self.qubits)

    def multiplicities(self) -> np.ndarray:
        return np.exp(_log_binom(self.qubits - 1, self.classes))

    def class_weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    def normalization(self) -> float:
        return float(np.exp(logsumexp(self.log_weights)))

    def block(self, j: int) -> np.ndarray:
        """Unnormalized per-sector 2x2 block of class j."""
        r, s = self.rs[j], self.ss[j]
        return np.array(
            [[r - s.imag, s.real], [s.real, r + s.imag]], dtype=complex
        )

    def tau(self, j: int) -> np.ndarray:
        """Normalized per-sector qubit state of class j."""
        r = self.rs[j]
        if r <= 0:
            raise NotNormalized(f"class {j} has no population")
        return self.block(j) / (2.0 * r)

    def bloch(self, j: int) -> np.ndarray:
        """Bloch vector (0, vy, vz) of tau(j) in the TPS qubit frame."""
        q = self.ss[j] / (2.0 * self.rs[j])
        return np.array([0.0, -2.0 * q.imag, 2.0 * q.real])

    def reduced_qubit(self) -> np.ndarray:
        """xi = sum over classes of multiplicity * block (unit trace)."""
        w = self.class_weights()
        xi = np.zeros((2, 2), dtype=complex)
        for j in range(self.qubits):
            if w[j] <= 0 or self.rs[j] <= 0:
                continue
            xi += w[j] * self.tau(j)
        return xi


def ghz_noisy_state(qubits: int, omega: float, gamma: float, t: float) -> SectorEnsemble:
    """Closed-form transverse-noise state, aggregated by Hamming class:

        r_j = (d^j a^(M-j) + a^j d^(M-j)) / 2
        s_j = (f^j (b - ic)^(M-j) + f^(M-j) (b + ic)^j) / 2

    evaluated in the log domain with sign tracking so that M of a few
    hundred does not underflow the intermediate powers.
    """
    if qubits < 1:
        raise DimTooLarge("need at least one qubit")
    k = kraus_coeffs(omega, gamma, t)
    j = np.arange(qubits)

    sign_dj, log_dj = _signed_log_power(k.d, j)
    sign_am, log_am = _signed_log_power(k.a, qubits - j)
    sign_aj, log_aj = _signed_log_power(k.a, j)
    sign_dm, log_dm = _signed_log_power(k.d, qubits - j)
    rs = 0.5 * (
        sign_dj * sign_am * np.exp(log_dj + log_am)
        + sign_aj * sign_dm * np.exp(log_aj + log_dm)
    )

    sign_fj, log_fj = _signed_log_power(k.f, j)
    sign_fm, log_fm = _signed_log_power(k.f, qubits - j)
    bc = complex(k.b, -k.c)
    term1 = sign_fj * np.exp(log_fj) * _complex_power(bc, qubits - j)
    term2 = sign_fm * np.exp(log_fm) * _complex_power(np.conj(bc), j)
    ss = 0.5 * (term1 + term2)

    with np.errstate(divide="ignore"):
        log_weights = _log_binom(qubits - 1, j) + np.log(2.0 * np.clip(rs, 0.0, None))
    # structurally empty classes carry log weight -inf and are not underflow
    underflow = bool(np.any(np.isfinite(log_weights) & (log_weights < np.log(1e-300))))
    if underflow:
        warnings.warn("sector class weights below 1e-300", UnderflowWarning)
    return SectorEnsemble(
        qubits=qubits, rs=rs, ss=ss, log_weights=log_weights,
        omega=omega, gamma=gamma, t=t, underflow=underflow,
    )


# ---------------------------------------------------------------------------
# sector-resolved QFI and coherence curvature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SectorRow:
    """Per-class quantities at fixed t, derivatives taken in omega."""

    hamming: int
    weight: float
    qfi: float
    curvature: float
    f_chi: float
    f_eps: float
    qfi_classical: float

    @property
    def qfi_quantum(self) -> float:
        return self.qfi - self.qfi_classical


@dataclass(frozen=True)
class SectorAverageReport:
    avg_qfi: float
    avg_curvature: float
    rows: tuple

    def averages(self):
        """Weighted averages of the decomposition terms."""
        w = np.array([r.weight for r in self.rows])
        pick = lambda name: float(
            (w * np.array([getattr(r, name) for r in self.rows])).sum()
        )
        return {
            "qfi": pick("qfi"),
            "curvature": pick("curvature"),
            "f_chi": pick("f_chi"),
            "f_eps": pick("f_eps"),
            "qfi_classical": pick("qfi_classical"),
            "qfi_quantum": pick("qfi_quantum"),
        }


def _node_ensembles(qubits, omega, gamma, t, h):
    points = finitediff.stencil_points(omega, h)
    return {x: ghz_noisy_state(qubits, x, gamma, t) for x in points}


def _class_family(nodes, j, qubits, gamma, t) -> StateFamily:
    def tau_at(w: float) -> np.ndarray:
        ens = nodes.get(w)
        if ens is None:  # off-stencil query; compute fresh
            ens = ghz_noisy_state(qubits, w, gamma, t)
        return ens.tau(j)

    return StateFamily.general(tau_at)


def sector_qfi_avg(ens: SectorEnsemble, h: float | None = None) -> SectorAverageReport:
    """Average single-qubit QFI and coherence curvature over the classes.

    For each populated class (weight >= 1e-12) the 2x2 state is treated
    as a general family in omega at fixed t: its SLD, QFI, coherence
    curvature in the SLD eigenbasis, and the entropy-variation terms
    (f_chi, f_eps, classical QFI) are computed by gated differences.
    """
    h = 1e-3 * max(1.0, abs(ens.omega)) if h is None else h
    nodes = _node_ensembles(ens.qubits, ens.omega, ens.gamma, ens.t, h)
    weights = ens.class_weights()
    rows = []
    for j in range(ens.qubits):
        if weights[j] < WEIGHT_FLOOR:
            continue
        family = _class_family(nodes, j, ens.qubits, ens.gamma, ens.t)
        rep = prop1_decompose(family, ens.omega, h)
        rows.append(SectorRow(
            hamming=j, weight=float(weights[j]), qfi=rep.qfi,
            curvature=rep.curvature, f_chi=rep.f_chi, f_eps=rep.f_eps,
            qfi_classical=rep.qfi_classical,
        ))
    w = np.array([r.weight for r in rows])
    avg_qfi = float((w * np.array([r.qfi for r in rows])).sum())
    avg_curv = float((w * np.array([r.curvature for r in rows])).sum())
    return SectorAverageReport(avg_qfi=avg_qfi, avg_curvature=avg_curv, rows=tuple(rows))


def avg_qfi(qubits: int, omega: float, gamma: float, t: float,
            h: float | None = None) -> float:
    """Average sector QFI without the per-class decomposition (fast path)."""
    h = 1e-3 * max(1.0, abs(omega)) if h is None else h
    nodes = _node_ensembles(qubits, omega, gamma, t, h)
    center = nodes[omega]
    weights = center.class_weights()
    total = 0.0
    for j in range(qubits):
        if weights[j] < WEIGHT_FLOOR:
            continue
        curve = finitediff.SampledCurve(
            {k: nodes[x].bloch(j) for k, x in
             zip(finitediff.ALL_OFFSETS, finitediff.stencil_points(omega, h))}, h
        )
        v = curve.at_center()
        dv_h, dv_h2 = curve.first()
        finitediff.check_pair(dv_h, dv_h2, f"class {j} Bloch derivative")
        n2 = float(v @ v)
        qfi_j = float(dv_h2 @ dv_h2)
        if n2 < 1.0 - 1e-12:
            qfi_j += float(v @ dv_h2) ** 2 / (1.0 - n2)
        total += weights[j] * qfi_j
    return total


# ---------------------------------------------------------------------------
# optimal interrogation time and scaling sweeps
# ---------------------------------------------------------------------------

def t_opt(qubits: int, omega: float, gamma: float) -> float:
    """Asymptotic optimal interrogation time (3 / (gamma omega^2 M))^(1/3)."""
    if qubits < 1 or omega <= 0 or gamma <= 0:
        raise DegenerateDenominator("t_opt requires positive M, omega, gamma")
    return (3.0 / (gamma * omega**2 * qubits)) ** (1.0 / 3.0)


def _golden_max(fn, lo: float, hi: float, iters: int = 60) -> float:
    """Golden-section maximizer of a unimodal function on [lo, hi]."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def t_opt_numeric(qubits: int, omega: float, gamma: float) -> float:
    """Golden-section maximizer of avg QFI(t)/t on [1e-4, 10 t_opt]."""
    t_ref = t_opt(qubits, omega, gamma)
    return _golden_max(lambda t: avg_qfi(qubits, omega, gamma, t) / t, 1e-4, 10.0 * t_ref)


@dataclass(frozen=True)
class SweepRow:
    qubits: int
    inv_qfi_rate: float
    inv_coh_rate: float
    bound: float


def _fit_top_half(m_values, inv_values):
    m = np.asarray(m_values, dtype=float)
    y = np.asarray(inv_values, dtype=float)
    cut = m >= 0.5 * m.max()
    slope = float(np.polyfit(np.log(m[cut]), np.log(y[cut]), 1)[0])
    return slope


def _bound(m: int, omega: float, gamma: float) -> float:
    return (9.0 / 8.0 * gamma * omega**2) ** (1.0 / 3.0) * m ** (-5.0 / 3.0)


def transverse_point(m: int, omega: float, gamma: float) -> SweepRow:
    """One sweep row: inverse rates of the class-averaged quantities at t_opt."""
    t_star = t_opt(m, omega, gamma)
    report = sector_qfi_avg(ghz_noisy_state(m, omega, gamma, t_star))
    return SweepRow(
        qubits=m,
        inv_qfi_rate=t_star / report.avg_qfi,
        inv_coh_rate=t_star / report.avg_curvature,
        bound=_bound(m, omega, gamma),
    )


def transverse_sweep(m_list, omega: float, gamma: float):
    """(rows, fitted_slope) of the inverse rates at t_opt vs qubit count.

    The bound column is the reference curve (9/8 gamma omega^2)^(1/3)
    M^(-5/3); the slope is fitted over the top half of m_list.
    """
    m_list = [int(m) for m in m_list]
    if sorted(m_list) != m_list or len(m_list) < 2:
        raise DegenerateDenominator("need an ascending list of at least two sizes")
    if omega <= 0 or gamma <= 0:
        raise DegenerateDenominator("sweep requires positive omega and gamma")
    rows = [transverse_point(m, omega, gamma) for m in m_list]
    slope = _fit_top_half([r.qubits for r in rows], [r.inv_qfi_rate for r in rows])
    return rows, slope


# ---------------------------------------------------------------------------
# parallel (commuting) noise: exact single-sector reduction
# ---------------------------------------------------------------------------

def parallel_bloch(qubits: int, omega: float, gamma: float, t: float) -> np.ndarray:
    """Bloch vector (0, e^{-M gamma t} sin(M omega t), e^{-M gamma t} cos(M omega t))
    of the k = 0 sector qubit under parallel noise."""
    envelope = np.exp(-qubits * gamma * t)
    return np.array([0.0, envelope * np.sin(qubits * omega * t),
                     envelope * np.cos(qubits * omega * t)])


def parallel_family(qubits: int, omega: float, gamma: float, t: float) -> StateFamily:
    """2x2 family in omega at fixed t for the parallel-noise sector qubit,
    represented in the TPS qubit frame (Q_X, Q_Y = diag, Q_Z)."""

    def tau(w: float) -> np.ndarray:
        v = parallel_bloch(qubits, omega=w, gamma=gamma, t=t)
        return 0.5 * (np.eye(2, dtype=complex) + v[0] * Q_X
                      + v[1] * np.diag([1.0, -1.0]) + v[2] * Q_Z)

    return StateFamily.general(tau)


def parallel_qfi(qubits: int, omega: float, gamma: float, t: float) -> float:
    """Closed form QFI_omega = M^2 t^2 e^{-2 M gamma t}."""
    return qubits**2 * t**2 * np.exp(-2.0 * qubits * gamma * t)


def parallel_sweep(m_list, omega: float, gamma: float):
    """(rows, fitted_slope) of max_t QFI/t vs qubit count (SQL slope +1).

    Rows mirror the transverse sweep: inverse optimized rates and the
    reference bound column.
    """
    m_list = [int(m) for m in m_list]
    if sorted(m_list) != m_list or len(m_list) < 2:
        raise DegenerateDenominator("need an ascending list of at least two sizes")
    if omega <= 0 or gamma <= 0:
        raise DegenerateDenominator("sweep requires positive omega and gamma")
    rows = []
    best_rates = []
    for m in m_list:
        t_ref = 1.0 / (2.0 * m * gamma)
        t_star = _golden_max(lambda t: parallel_qfi(m, omega, gamma, t) / t,
                             0.01 * t_ref, 10.0 * t_ref)
        rate = parallel_qfi(m, omega, gamma, t_star) / t_star
        best_rates.append(rate)
        rows.append(SweepRow(
            qubits=m, inv_qfi_rate=1.0 / rate, inv_coh_rate=1.0 / rate,
            bound=_bound(m, omega, gamma),
        ))
    slope = _fit_top_half(m_list, best_rates)
    return rows, slope


# ---------------------------------------------------------------------------
# class-resolved ODE integration (transverse noise)
# ---------------------------------------------------------------------------

def sector_ode_evolve(qubits: int, params: NoiseParams, t: float,
                      rtol: float = 1e-10, atol: float = 1e-12) -> SectorEnsemble:
    """Integrate the M coupled 2x2 class equations for transverse noise:

        du_j/dt = +i (omega/2)(M - 2j) [Q_X, u_j]
                  - (gamma/2) (M u_j - j u_{j-1} - (M-1-j) u_{j+1}
                               - Q_Z u_{M-1-j} Q_Z)

    where u_j is the per-sector block of Hamming class j.  The rotation
    sign matches the TPS qubit frame (it mirrors the printed form, which
    is written in the opposite chirality).  Agrees with ghz_noisy_state
    to integration tolerance; the class closure itself is validated
    against the unaggregated 2^(M-1)-sector simulation in the tests.
    """
    if not params.transverse:
        raise NotNormalized("class closure requires purely transverse noise")
    m, omega, gamma = qubits, params.omega, params.gamma

    u0 = np.zeros((m, 2, 2), dtype=complex)
    u0[0] = 0.5 * np.array([[1.0, 1.0], [1.0, 1.0]])  # pure GHZ qubit, +z frame

    coeff = 1j * 0.5 * omega * (m - 2.0 * np.arange(m))

    def rhs(_, y):
        u = y.reshape(m, 2, 2)
        comm = Q_X @ u - u @ Q_X
        out = coeff[:, None, None] * comm
        out -= 0.5 * gamma * m * u
        gain = np.zeros_like(u)
        gain[1:] += np.arange(1, m)[:, None, None] * u[:-1]
        gain[:-1] += (m - 1.0 - np.arange(m - 1))[:, None, None] * u[1:]
        gain += Q_Z @ u[::-1] @ Q_Z
        out += 0.5 * gamma * gain
        return out.ravel()

    sol = solve_ivp(rhs, (0.0, t), u0.ravel(), rtol=rtol, atol=atol,
                    dense_output=False)
    if not sol.success:
        raise StiffnessFailure(sol.message)
    u = sol.y[:, -1].reshape(m, 2, 2)

    rs = 0.25 * np.real(u[:, 0, 0] + u[:, 1, 1]) * 2.0
    ss = 0.5 * np.real(u[:, 0, 1] + u[:, 1, 0]) + 0.5j * np.real(u[:, 1, 1] - u[:, 0, 0])
    with np.errstate(divide="ignore"):
        log_weights = _log_binom(m - 1, np.arange(m)) + np.log(
            np.clip(2.0 * rs, 1e-300, None)
        )
    return SectorEnsemble(qubits=m, rs=rs, ss=ss, log_weights=log_weights,
                          omega=omega, gamma=gamma, t=t)


def dense_evolve(qubits: int, params: NoiseParams, t: float,
                 rtol: float = 1e-10, atol: float = 1e-12) -> np.ndarray:
    """Integrate the full 2^M master equation for any noise direction.

    Supports general (alpha_x, alpha_y, alpha_z) mixtures at small M;
    the extremal channels additionally have closed forms above.
    """
    if qubits > DENSE_LIMIT:
        raise DimTooLarge(f"dense integration limited to M <= {DENSE_LIMIT}")
    dim = 1 << qubits
    eye = np.eye(2, dtype=complex)

    def embed(op, h):
        mats = [eye] * qubits
        mats[h] = op
        out = mats[0]
        for mat in mats[1:]:
            out = np.kron(out, mat)
        return out

    sz_ops = [embed(SIGMA_Z, h) for h in range(qubits)]
    jumps = []
    for weight, op in ((params.alpha_x, SIGMA_X), (params.alpha_y, SIGMA_Y),
                       (params.alpha_z, SIGMA_Z)):
        if weight > 0:
            jumps.extend((weight, embed(op, h)) for h in range(qubits))
    hamiltonian = sum(sz_ops)

    ghz = np.zeros(dim, dtype=complex)
    ghz[0] = ghz[-1] = 1.0 / np.sqrt(2.0)
    rho0 = np.outer(ghz, ghz.conj())

    def rhs(_, y):
        rho = y.reshape(dim, dim)
        out = -0.5j * params.omega * (hamiltonian @ rho - rho @ hamiltonian)
        out -= 0.5 * params.gamma * qubits * rho
        for weight, op in jumps:
            out += 0.5 * params.gamma * weight * (op @ rho @ op)
        return out.ravel()

    sol = solve_ivp(rhs, (0.0, t), rho0.ravel(), rtol=rtol, atol=atol)
    if not sol.success:
        raise StiffnessFailure(sol.message)
    return sol.y[:, -1].reshape(dim, dim)


# ---------------------------------------------------------------------------
# Bloch-direction ansatz diagnostic
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AnsatzRow:
    hamming: int
    weight: float
    target_angle: float  # ansatz direction (m_j - 1) omega t from the z axis
    deviation: float     # radians between the ODE Bloch direction and the ansatz
    bloch_length: float


def ansatz_check(qubits: int, omega: float, gamma: float, t: float,
                 weight_floor: float = 1e-3):
    """Angular deviation of each populated class's Bloch direction from
    the rotating-frame ansatz (0, sin[(m_j - 1) omega t], cos[(m_j - 1)
    omega t]) with m_j = max(j, M - j).  Diagnostic only: the ansatz is
    approximate and carries no error bound."""
    ens = sector_ode_evolve(qubits, NoiseParams(omega=omega, gamma=gamma), t)
    weights = ens.class_weights()
    rows = []
    for j in range(qubits):
        if weights[j] < weight_floor:
            continue
        v = ens.bloch(j)
        length = float(np.linalg.norm(v))
        m_j = max(j, qubits - j)
        target_angle = (m_j - 1) * omega * t
        target = np.array([0.0, np.sin(target_angle), np.cos(target_angle)])
        if length == 0.0:
            deviation = np.pi / 2.0
        else:
            cosang = float(np.clip(v @ target / length, -1.0, 1.0))
            deviation = float(np.arccos(cosang))
        rows.append(AnsatzRow(hamming=j, weight=float(weights[j]),
                              target_angle=float(target_angle),
                              deviation=deviation, bloch_length=length))
    return rows


# ---------------------------------------------------------------------------
# reduced qubit and its sweep
# ---------------------------------------------------------------------------

def reduced_qubit_family(qubits: int, omega: float, gamma: float, t: float) -> StateFamily:
    """xi(omega) = Tr_sector[rho] as a 2x2 general family at fixed t."""
    return StateFamily.general(
        lambda w: ghz_noisy_state(qubits, w, gamma, t).reduced_qubit()
    )


@dataclass(frozen=True)
class ReducedQubitReport:
    xi: np.ndarray
    qfi: float
    curvature: float


def reduced_qubit_noisy(qubits: int, omega: float, gamma: float, t: float,
                        h: float | None = None) -> ReducedQubitReport:
    """QFI and coherence curvature of the reduced qubit state."""
    family = reduced_qubit_family(qubits, omega, gamma, t)
    rep = prop1_decompose(family, omega, h)
    return ReducedQubitReport(xi=family.state(omega), qfi=rep.qfi,
                              curvature=rep.curvature)


def reduced_qubit_sweep(m_list, omega: float, gamma: float):
    """(rows, fitted_slope) of the reduced-qubit inverse rates at t_opt."""
    m_list = [int(m) for m in m_list]
    if sorted(m_list) != m_list or len(m_list) < 2:
        raise DegenerateDenominator("need an ascending list of at least two sizes")
    rows = []
    for m in m_list:
        t_star = t_opt(m, omega, gamma)
        rep = reduced_qubit_noisy(m, omega, gamma, t_star)
        rows.append(SweepRow(
            qubits=m,
            inv_qfi_rate=t_star / rep.qfi,
            inv_coh_rate=t_star / rep.curvature,
            bound=_bound(m, omega, gamma),
        ))
    slope = _fit_top_half([r.qubits for r in rows], [r.inv_qfi_rate for r in rows])
    return rows, slope
