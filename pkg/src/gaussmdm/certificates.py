"""Machine-checkable optimality certificates for the fixed-gain trade-off.

Two independent arguments are checked numerically.

*Dual certificate.*  Noise operators ``tau = (n_cl_x, m_out_x, n_cl_p, m_out_p)``
with ``m_out = g n_out`` obey ``[tau_i, tau_j] = 2i Gamma_ij``, so every
admissible noise matrix satisfies ``N + i Gamma >= 0``.  A Hermitian ``Z >= 0``
with ``Tr(Z N) = a nu_cl + b sigma_out`` then bounds the objective from below
by ``-i Tr(Z Gamma)``, and ``Z (N_tel + i Gamma) = 0`` shows teleportation
attains the bound.

*Symplectic mapping.*  ``Gamma = M Omega M^T`` turns any admissible ``N`` into a
two-mode covariance ``M^-1 N M^-T``; the objective becomes the expectation of
a quadratic observable that a two-mode squeezer diagonalizes, with the
squeezed vacuum as ground state.

Note the weight convention of the observable: in :func:`observable_matrix`
``a`` multiplies the output noise and ``b`` the classical noise, the reverse
of :func:`build_certificate`.  :func:`proof2_weights` converts.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from .quadalg import CovarianceSpec, symplectic_form, two_mode_squeezer
from .tradeoff import UNBOUNDED, _check_gain, _check_nu_cl, optimality_window, tradeoff_nu_out

#: PSD tolerance, relative to max(1, ||H||_F)
PSD_TOL = 1e-9
#: acceptance threshold on slackness, gap and trace residuals
RESIDUAL_TOL = 1e-9
#: Hermiticity tolerance on inputs to check_psd_hermitian
HERMITIAN_TOL = 1e-12
#: relative tolerance for snapping nu_cl onto a window endpoint
ENDPOINT_TOL = 1e-12


# -- linear algebra -----------------------------------------------------------


def jacobi_eigvalsh(S: np.ndarray, tol: float = 1e-15, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations."""
    A = np.array(S, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    scale = max(np.linalg.norm(A), 1e-300)
    for _ in range(max_sweeps):
        off = math.sqrt(max(np.sum(A * A) - np.sum(np.diag(A) ** 2), 0.0))
        if off <= tol * scale:
            break
        for p_ in range(n - 1):
            for q in range(p_ + 1, n):
                apq = A[p_, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (A[q, q] - A[p_, p_]) / (2 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1))
                c = 1 / math.sqrt(t * t + 1)
                s = t * c
                rp, rq = A[p_, :].copy(), A[q, :].copy()
                A[p_, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                cp, cq = A[:, p_].copy(), A[:, q].copy()
                A[:, p_] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
    return np.sort(np.diag(A))


def real_embedding(H: np.ndarray) -> np.ndarray:
    """``[[Re H, -Im H], [Im H, Re H]]``; same spectrum as ``H``, each eigenvalue twice."""
    H = np.asarray(H, dtype=complex)
    return np.block([[H.real, -H.imag], [H.imag, H.real]])


def check_psd_hermitian(H, tol: float = PSD_TOL) -> tuple[float, bool]:
    """Smallest eigenvalue of a complex Hermitian matrix and whether it is PSD.

    PSD means ``min_eig >= -tol * max(1, ||H||_F)``.
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("matrix must be square")
    if np.abs(H - H.conj().T).max(initial=0.0) > HERMITIAN_TOL * max(1.0, np.abs(H).max(initial=0.0)):
        raise ValueError("matrix is not Hermitian")
    H = (H + H.conj().T) / 2
    min_eig = float(jacobi_eigvalsh(real_embedding(H))[0])
    return min_eig, min_eig >= -tol * max(1.0, float(np.linalg.norm(H)))


# -- Gamma, noise matrices ------------------------------------------------------


@dataclass(frozen=True)
class GammaMatrix:
    g: float
    matrix: np.ndarray

    @property
    def block(self) -> np.ndarray:
        return self.matrix[2:, :2]


def gamma(g: float) -> GammaMatrix:
    """Commutator matrix of ``tau`` in the ordering ``(n_cl_x, m_out_x, n_cl_p, m_out_p)``."""
    g = _check_gain(g)
    G = np.array([[1.0, g], [g, -(1 - g * g)]])
    Z = np.zeros((2, 2))
    M = np.block([[Z, -G], [G, Z]])
    M.setflags(write=False)
    return GammaMatrix(g, M)


@dataclass(frozen=True)
class NoiseMatrix:
    """``N_ij = <{tau_i, tau_j}>`` over ``(n_cl_x, m_out_x, n_cl_p, m_out_p)``."""

    matrix: np.ndarray

    def __post_init__(self):
        N = np.array(self.matrix, dtype=float)
        if N.shape != (4, 4):
            raise ValueError("noise matrix must be 4x4")
        if not np.allclose(N, N.T, atol=1e-12, rtol=0):
            raise ValueError("noise matrix must be symmetric")
        N = (N + N.T) / 2
        N.setflags(write=False)
        object.__setattr__(self, "matrix", N)

    @property
    def nu_cl(self) -> float:
        return (self.matrix[0, 0] + self.matrix[2, 2]) / 2

    @property
    def sigma_out(self) -> float:
        return (self.matrix[1, 1] + self.matrix[3, 3]) / 2

    def heisenberg(self, g: float) -> np.ndarray:
        return self.matrix + 1j * gamma(g).matrix

    def heisenberg_min_eig(self, g: float) -> float:
        return check_psd_hermitian(self.heisenberg(g))[0]


def teleportation_block(nu_cl: float, g: float) -> np.ndarray:
    nu_cl = _check_nu_cl(nu_cl)
    g = _check_gain(g)
    s = math.sqrt(nu_cl * nu_cl - 1)
    return np.array(
        [
            [nu_cl, g * nu_cl - s],
            [g * nu_cl - s, (1 + g * g) * nu_cl - 2 * g * s],
        ]
    )


def n_tel(nu_cl: float, g: float) -> NoiseMatrix:
    """Noise matrix of gain-``g`` teleportation with ``cosh 2r = nu_cl``."""
    A = teleportation_block(nu_cl, g)
    N = np.zeros((4, 4))
    N[:2, :2] = A
    N[2:, 2:] = A
    return NoiseMatrix(N)


# -- dual certificate -----------------------------------------------------------


@dataclass(frozen=True)
class ZCertificate:
    g: float
    nu_cl: float
    a: float
    b: float
    P: np.ndarray
    Q: np.ndarray
    Z: np.ndarray
    case: str  # classical-endpoint | output-endpoint | interior
    q_asymmetry: float

    @property
    def rank(self) -> int:
        ev = np.linalg.eigvalsh(self.Z)
        return int(np.sum(ev > 1e-9 * max(1.0, ev.max())))


def z_from_blocks(P, Q) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    return 0.5 * np.block([[P, 1j * Q], [-1j * Q, P]])


def multiplier_ratio(nu_cl: float, g: float) -> float:
    """Bracket ``2 g nu_cl - (1+g^2) sqrt(nu_cl^2-1)`` fixing the ratio a/b."""
    return 2 * g * nu_cl - (1 + g * g) * math.sqrt(nu_cl * nu_cl - 1)


def build_certificate(nu_cl: float, g: float, b: float = 1.0) -> ZCertificate:
    """Dual matrix certifying the trade-off at ``(nu_cl, g)``.

    Interior points use weight ``b`` on the output noise and the tied weight
    ``a`` on the classical noise.  The window endpoints use the degenerate
    ``(a, 0)`` and ``(0, b)`` certificates.  Points outside the optimality
    window raise ``ValueError``.
    """
    nu_cl = _check_nu_cl(nu_cl)
    g = _check_gain(g)
    win = optimality_window(g)
    hi = win.nu_cl_max
    if hi is not UNBOUNDED and nu_cl > hi * (1 + ENDPOINT_TOL):
        raise ValueError(f"nu_cl={nu_cl} outside the optimality window (max {hi}) at g={g}")

    if nu_cl <= 1.0 + ENDPOINT_TOL:
        nu_cl, a, b, case = 1.0, 1.0, 0.0, "classical-endpoint"
    elif hi is not UNBOUNDED and nu_cl >= hi * (1 - ENDPOINT_TOL):
        nu_cl, a, case = float(hi), 0.0, "output-endpoint"
    else:
        s = math.sqrt(nu_cl * nu_cl - 1)
        a = b * multiplier_ratio(nu_cl, g) / s
        case = "interior"

    s = math.sqrt(nu_cl * nu_cl - 1)
    P = np.diag([a, b])
    Q = np.array(
        [
            [a * (nu_cl - g * s), a * s],
            [b * multiplier_ratio(nu_cl, g), b * (g * s - nu_cl)],
        ]
    )
    asym = float(abs(Q[0, 1] - Q[1, 0]))
    if asym > 1e-9 * max(1.0, np.abs(Q).max()):
        raise ValueError(f"Q not symmetric (|Q12-Q21|={asym}); a-b relation violated")
    Q = (Q + Q.T) / 2
    return ZCertificate(g, nu_cl, a, b, P, Q, z_from_blocks(P, Q), case, asym)


@dataclass(frozen=True)
class CertificateReport:
    g: float
    nu_cl: float
    a: float
    b: float
    min_eig_Z: float
    psd: bool
    slackness_norm: float
    duality_gap: float
    trace_identity_residual: float
    bound: float
    objective: float
    valid: bool

    def to_record(self) -> dict:
        return asdict(self)


def verify_certificate(cert: ZCertificate, N: NoiseMatrix, g: Optional[float] = None) -> CertificateReport:
    """Check PSD-ness, complementary slackness and the duality gap of ``cert`` against ``N``."""
    g = cert.g if g is None else _check_gain(g)
    Gm = gamma(g).matrix
    Z = cert.Z
    min_eig, psd = check_psd_hermitian(Z)
    slack = float(np.linalg.norm(Z @ (N.matrix + 1j * Gm)))
    objective = complex(np.trace(Z @ N.matrix))
    bound = complex(-1j * np.trace(Z @ Gm))
    gap = objective.real - bound.real
    identity = abs(objective.real - (cert.a * N.nu_cl + cert.b * N.sigma_out)) + abs(objective.imag)
    valid = (
        psd
        and slack < RESIDUAL_TOL
        and abs(gap) < RESIDUAL_TOL
        and identity < RESIDUAL_TOL
        and abs(bound.imag) < RESIDUAL_TOL
    )
    return CertificateReport(
        g=g,
        nu_cl=cert.nu_cl,
        a=cert.a,
        b=cert.b,
        min_eig_Z=min_eig,
        psd=psd,
        slackness_norm=slack,
        duality_gap=gap,
        trace_identity_residual=identity,
        bound=bound.real,
        objective=objective.real,
        valid=bool(valid),
    )


def certify(nu_cl: float, g: float) -> CertificateReport:
    cert = build_certificate(nu_cl, g)
    return verify_certificate(cert, n_tel(cert.nu_cl, g), g)


# -- symplectic mapping -----------------------------------------------------------


@dataclass(frozen=True)
class MappingMatrix:
    g: float
    M: np.ndarray
    omega: np.ndarray

    def gamma_residual(self) -> float:
        return float(np.abs(gamma(self.g).matrix - self.M @ self.omega @ self.M.T).max())


def mapping_matrix(g: float) -> MappingMatrix:
    """``tau = M xi`` for teleportation, ``xi = (x_A, p_A, x_B, p_B)``."""
    g = _check_gain(g)
    M = np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [g, 0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
            [0.0, -g, 0.0, 1.0],
        ]
    )
    M.setflags(write=False)
    return MappingMatrix(g, M, symplectic_form(2))


@dataclass(frozen=True)
class InducedCovariance:
    matrix: np.ndarray
    heisenberg_min_eig: float
    physical: bool

    def as_covariance(self) -> CovarianceSpec:
        return CovarianceSpec(("A", "B"), self.matrix)


def induced_covariance(N: NoiseMatrix, g: float) -> InducedCovariance:
    """Two-mode covariance ``M^-1 N M^-T``; physicality is reported, not enforced."""
    mm = mapping_matrix(g)
    Minv = np.linalg.inv(mm.M)
    V = Minv @ N.matrix @ Minv.T
    V = (V + V.T) / 2
    min_eig, ok = check_psd_hermitian(V + 1j * mm.omega)
    return InducedCovariance(V, min_eig, ok)


@dataclass(frozen=True)
class ObservableMatrix:
    a: float
    b: float
    g: float
    K: np.ndarray

    def expectation(self, V) -> float:
        """``<O> = Tr(K V) / 2`` for a two-mode covariance ``V``."""
        V = V.matrix if isinstance(V, CovarianceSpec) else np.asarray(V)
        return float(np.trace(self.K @ V)) / 2


def observable_matrix(a: float, b: float, g: float) -> ObservableMatrix:
    """Quadratic observable whose mean is ``a sigma_out + b nu_cl`` on the resource.

    Over ``xi = (x_A, p_A, x_B, p_B)``; ``a`` weights the output noise and
    ``b`` the classical noise.
    """
    g = _check_gain(g)
    a, b = float(a), float(b)
    if a < 0 or b < 0 or (a == 0 and b == 0):
        raise ValueError("weights must be non-negative and not both zero")
    d = a * g * g + b
    K = np.array(
        [
            [d, 0, a * g, 0],
            [0, d, 0, -a * g],
            [a * g, 0, a, 0],
            [0, -a * g, 0, a],
        ]
    )
    K.setflags(write=False)
    return ObservableMatrix(a, b, g, K)


def proof2_weights(cert_a: float, cert_b: float) -> tuple[float, float]:
    """Observable weights matching a dual certificate's ``(a, b)``."""
    return cert_b, cert_a


def diagonalizing_squeezing(a: float, b: float, g: float) -> float:
    """Squeezing ``r`` with ``tanh 2r = 2ga / (a(g^2+1) + b)``."""
    g = _check_gain(g)
    if a < 0 or b < 0 or (a == 0 and b == 0):
        raise ValueError("weights must be non-negative and not both zero")
    arg = 2 * g * a / (a * (g * g + 1) + b)
    if arg >= 1.0:
        raise ValueError("no finite squeezing diagonalizes the observable (b=0, g=1)")
    return math.atanh(arg) / 2


def symplectic_spectrum(K: np.ndarray) -> np.ndarray:
    """Williamson normal-form values of a positive definite 4x4 ``K``."""
    ev = np.linalg.eigvals(1j * symplectic_form(2) @ K)
    return np.sort(np.abs(ev.real))[::2]


_TMSV_PATTERN = np.array(
    [
        [0.0, 0.0, -1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
    ]
)


@dataclass(frozen=True)
class Proof2Report:
    a: float
    b: float
    g: float
    grid_step: float
    r_argmin: float
    r_star: float
    f_min: float
    f_expected: float
    value_residual: float
    second_difference: float
    diagonal_residual: float
    mode_energies: Optional[tuple[float, float]]
    ground_energy_residual: Optional[float]
    ok: bool

    def to_record(self) -> dict:
        return asdict(self)


def proof2_minimum_check(
    a: float, b: float, g: float, r_max: float = 2.0, step: float = 1e-4, r_grid: Optional[Sequence[float]] = None
) -> Proof2Report:
    """Scan ``<O>`` over squeezed-vacuum resources and compare with the analytic optimum.

    ``f(r) = Tr(K V_TMSV(r))/2`` on a uniform grid; the argmin must fall within
    one grid step of :func:`diagonalizing_squeezing` and ``f`` there must
    equal ``b nu_cl + a sigma_out`` on the trade-off curve at
    ``nu_cl = cosh 2r*``.  The squeezer at ``r*`` must also bring ``K`` to
    the diagonal form ``diag(x, x, y, y)``.
    """
    obs = observable_matrix(a, b, g)
    r_star = diagonalizing_squeezing(a, b, g)
    rs = np.arange(0.0, r_max + step / 2, step) if r_grid is None else np.asarray(r_grid, dtype=float)
    if len(rs) >= 2:
        step = float(np.max(np.diff(rs)))
    c, s = np.cosh(2 * rs), np.sinh(2 * rs)
    # V(r) = cosh(2r) I + sinh(2r) X
    f = 0.5 * (c * np.trace(obs.K) + s * np.sum(obs.K * _TMSV_PATTERN))
    k = int(np.argmin(f))
    nu = math.cosh(2 * r_star)
    f_expected = b * nu + a * tradeoff_nu_out(nu, g) * g * g
    if 0 < k < len(rs) - 1:
        d2 = float(f[k - 1] - 2 * f[k] + f[k + 1])
    else:
        d2 = float("nan")
    S = two_mode_squeezer(r_star).matrix
    Kd = S.T @ obs.K @ S
    off = Kd - np.diag(np.diag(Kd))
    diag_res = float(max(np.abs(off).max(), abs(Kd[0, 0] - Kd[1, 1]), abs(Kd[2, 2] - Kd[3, 3])))
    energies = ground_res = None
    if np.linalg.eigvalsh(obs.K).min() > 1e-12:
        # vacuum expectation of the diagonal form is the sum of its mode energies
        sp = symplectic_spectrum(obs.K)
        energies = (float(sp[0]), float(sp[1]))
        ground_res = abs(sum(energies) - f_expected)
    value_res = abs(float(f[k]) - f_expected)
    ok = abs(rs[k] - r_star) <= step and value_res < 1e-6 and diag_res < 1e-9
    if ground_res is not None:
        ok = ok and ground_res < 1e-9 * max(1.0, f_expected)
    if 0 < k < len(rs) - 1:
        ok = ok and d2 > 0
    return Proof2Report(
        a=obs.a,
        b=obs.b,
        g=obs.g,
        grid_step=step,
        r_argmin=float(rs[k]),
        r_star=r_star,
        f_min=float(f[k]),
        f_expected=f_expected,
        value_residual=value_res,
        second_difference=d2,
        diagonal_residual=diag_res,
        mode_energies=energies,
        ground_energy_residual=ground_res,
        ok=bool(ok),
    )
