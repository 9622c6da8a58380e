import math

import numpy as np
import pytest

from gaussmdm import certificates as C
from gaussmdm.models import teleportation_mdm, teleportation_noise
from gaussmdm.quadalg import commutator, covariance, two_mode_squeezed_cov, two_mode_squeezer
from gaussmdm.tradeoff import optimality_window, tradeoff_nu_out

GAINS = [0.5, 0.8, 1.0, 1.3, 2.0]


def grid_points(gains=(0.5, 0.8, 1.3, 2.0, 1.0), n=10):
    for g in gains:
        w = optimality_window(g)
        hi = w.nu_cl_max if w.bounded else 10.0
        for nu in np.linspace(1, hi, n + 2)[1:-1]:
            yield float(nu), g


# -- eigen-solver and PSD check --------------------------------------------------------


def test_jacobi_matches_numpy():
    rng = np.random.default_rng(0)
    for n in (2, 4, 8, 11):
        A = rng.normal(size=(n, n))
        S = A + A.T
        np.testing.assert_allclose(C.jacobi_eigvalsh(S), np.linalg.eigvalsh(S), atol=1e-12)


def test_jacobi_diagonal_input():
    np.testing.assert_array_equal(C.jacobi_eigvalsh(np.diag([3.0, -1.0, 2.0])), [-1.0, 2.0, 3.0])


def test_real_embedding_doubles_spectrum():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    H = X + X.conj().T
    ev = np.sort(np.concatenate([np.linalg.eigvalsh(H)] * 2))
    np.testing.assert_allclose(np.linalg.eigvalsh(C.real_embedding(H)), ev, atol=1e-12)


def test_check_psd_examples():
    assert C.check_psd_hermitian(np.eye(4)) == (pytest.approx(1.0), True)
    Y = np.zeros((4, 4), dtype=complex)
    Y[:2, :2] = [[0, 1j], [-1j, 0]]
    m, ok = C.check_psd_hermitian(Y)
    assert m == pytest.approx(-1.0, abs=1e-14) and not ok


def test_check_psd_rejects_non_hermitian():
    with pytest.raises(ValueError):
        C.check_psd_hermitian(np.array([[1.0, 1.0], [0.0, 1.0]]))


# -- Gamma and noise matrices ------------------------------------------------------------


def test_gamma_examples():
    np.testing.assert_array_equal(C.gamma(1.0).block, [[1, 1], [1, 0]])
    np.testing.assert_array_equal(C.gamma(2.0).block, [[1, 2], [2, 3]])
    for g in np.random.default_rng(2).uniform(0.1, 5, 10):
        G = C.gamma(g).matrix
        np.testing.assert_array_equal(G.T, -G)


def _tau(g):
    n = teleportation_noise(g)
    return [n["n_cl_x"], g * n["n_out_x"], n["n_cl_p"], g * n["n_out_p"]]


@pytest.mark.parametrize("g", GAINS)
def test_gamma_reproduces_commutators(g):
    tau = _tau(g)
    G = C.gamma(g).matrix
    c = np.array([[commutator(u, v) for v in tau] for u in tau])
    np.testing.assert_allclose(c, G, atol=1e-12)


def test_n_tel_examples():
    for g in GAINS:
        np.testing.assert_allclose(C.n_tel(1.0, g).matrix[:2, :2], [[1, g], [g, 1 + g * g]])
    r3 = math.sqrt(3)
    np.testing.assert_allclose(C.n_tel(2.0, 1.0).matrix[:2, :2], [[2, 2 - r3], [2 - r3, 4 - 2 * r3]], atol=1e-14)


@pytest.mark.parametrize("nu,g", [(1.0, 2.0), (1.5, 2.0), (2.0, 1.0), (4.0, 0.8), (1.3, 1.3)])
def test_n_tel_matches_second_moments(nu, g):
    # oracle: symmetrized moments of the teleportation noise under the TMSV
    tau = _tau(g)
    V = two_mode_squeezed_cov(math.acosh(nu) / 2)
    N = np.array([[covariance(u, v, V) for v in tau] for u in tau])
    np.testing.assert_allclose(C.n_tel(nu, g).matrix, N, atol=1e-12)
    assert C.n_tel(nu, g).sigma_out / g**2 == pytest.approx(tradeoff_nu_out(nu, g), rel=1e-12)


@pytest.mark.parametrize("nu,g", list(grid_points(n=6)))
def test_heisenberg_feasible_and_singular(nu, g):
    H = C.n_tel(nu, g).heisenberg(g)
    m, ok = C.check_psd_hermitian(H)
    assert ok and abs(m) < 1e-9
    assert abs(np.linalg.det(H)) < 1e-9


def test_n_tel_rejects_low_nucl():
    with pytest.raises(ValueError):
        C.n_tel(0.99, 1.0)


# -- dual certificates ---------------------------------------------------------------------


@pytest.mark.parametrize("g", [0.5, 0.8, 2.0])
def test_classical_endpoint_certificate(g):
    z = C.build_certificate(1.0, g)
    assert (z.a, z.b) == (1.0, 0.0) and z.case == "classical-endpoint"
    np.testing.assert_allclose(z.P, np.diag([z.a, 0]))
    np.testing.assert_allclose(z.Q, np.diag([z.a, 0]))
    np.testing.assert_allclose(np.linalg.eigvalsh(z.Z), [0, 0, 0, z.a], atol=1e-14)


@pytest.mark.parametrize("g", [0.5, 0.8, 2.0])
def test_output_endpoint_certificate(g):
    z = C.build_certificate(optimality_window(g).nu_cl_max, g)
    assert z.a == 0.0 and z.case == "output-endpoint"
    sign = 1.0 if g > 1 else -1.0
    np.testing.assert_allclose(z.Q, np.diag([0, sign * z.b]), atol=1e-12)
    np.testing.assert_allclose(np.linalg.eigvalsh(z.Z), [0, 0, 0, z.b], atol=1e-12)


def test_interior_certificate_example():
    z = C.build_certificate(1.2, 2.0)
    s = math.sqrt(0.44)
    assert z.a == pytest.approx((4.8 - 5 * s) / s, rel=1e-14)
    assert z.a == pytest.approx(2.23627, abs=1e-5)
    assert z.b == 1.0
    assert C.verify_certificate(z, C.n_tel(1.2, 2.0)).valid


@pytest.mark.parametrize("nu,g", list(grid_points()))
def test_certificate_grid_valid(nu, g):
    z = C.build_certificate(nu, g)
    rep = C.verify_certificate(z, C.n_tel(z.nu_cl, g), g)
    assert rep.valid, rep
    assert rep.min_eig_Z >= -1e-9
    assert z.rank == 2
    assert rep.objective == pytest.approx(z.a * nu + z.b * g * g * tradeoff_nu_out(nu, g), rel=1e-12)


def test_certificate_rejects_outside_window():
    with pytest.raises(ValueError):
        C.build_certificate(2.0, 2.0)


def test_perturbed_output_noise_opens_gap():
    g = 1.0
    z = C.build_certificate(2.0, g)
    N = C.n_tel(2.0, g).matrix.copy()
    # output noise up by 0.1: sigma_out = g^2 nu_out grows by 0.1 g^2
    N[1, 1] += 0.1 * g * g
    N[3, 3] += 0.1 * g * g
    rep = C.verify_certificate(z, C.NoiseMatrix(N), g)
    assert rep.duality_gap == pytest.approx(z.b * 0.1 * g * g, abs=1e-12)
    assert not rep.valid


def random_feasible_noise(rng, g):
    r = rng.uniform(0, 2)
    N = C.n_tel(math.cosh(2 * r), g).matrix
    X = rng.normal(size=(4, 4)) * rng.uniform(0, 1)
    return C.NoiseMatrix(N + X @ X.T)


def test_dual_bound_on_random_feasible_noise():
    rng = np.random.default_rng(7)
    certs = [C.build_certificate(nu, g) for nu, g in grid_points(gains=(0.5, 2.0), n=4)]
    for _ in range(250):
        g = certs[rng.integers(len(certs))].g
        N = random_feasible_noise(rng, g)
        assert N.heisenberg_min_eig(g) >= -1e-9
        for z in certs:
            if z.g != g:
                continue
            rep = C.verify_certificate(z, N, g)
            assert rep.objective >= rep.bound - 1e-9


# -- symplectic mapping argument ----------------------------------------------------------


def test_mapping_matrix_examples():
    M = C.mapping_matrix(1.0).M
    np.testing.assert_array_equal(M, [[1, 0, 0, 0], [1, 0, 1, 0], [0, -1, 0, 0], [0, -1, 0, 1]])
    for g in (0.5, 1.0, 2.0, 3.7):
        mm = C.mapping_matrix(g)
        assert mm.gamma_residual() < 1e-14
        assert np.linalg.det(mm.M) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("r,g", [(0.0, 1.0), (0.4, 2.0), (1.1, 0.5)])
def test_induced_covariance_is_tmsv(r, g):
    ic = C.induced_covariance(C.n_tel(math.cosh(2 * r), g), g)
    np.testing.assert_allclose(ic.matrix, two_mode_squeezed_cov(r).matrix, atol=1e-10)
    assert ic.physical


def test_induced_covariance_reports_violation():
    N = C.NoiseMatrix(0.5 * C.n_tel(1.0, 1.0).matrix)
    ic = C.induced_covariance(N, 1.0)
    assert not ic.physical and ic.heisenberg_min_eig < 0


def test_induced_covariance_monotone_in_extra_noise():
    base = C.n_tel(1.5, 1.3).matrix
    mins = [C.induced_covariance(C.NoiseMatrix(base + e * np.eye(4)), 1.3).heisenberg_min_eig for e in (0, 0.1, 0.5, 1)]
    assert all(b > a for a, b in zip(mins, mins[1:]))


def test_observable_matrix_examples():
    np.testing.assert_array_equal(C.observable_matrix(0, 1, 2).K, np.diag([1, 1, 0, 0]))
    np.testing.assert_array_equal(
        C.observable_matrix(1, 0, 1).K, [[1, 0, 1, 0], [0, 1, 0, -1], [1, 0, 1, 0], [0, -1, 0, 1]]
    )
    with pytest.raises(ValueError):
        C.observable_matrix(0, 0, 1)


@pytest.mark.parametrize("a,b,g,nu", [(1, 1, 2, 2.0), (0.3, 2.0, 0.8, 3.0), (2.0, 0.5, 1.0, 5.0)])
def test_observable_trace_identity(a, b, g, nu):
    # the observable's a weights the output noise and b the classical noise
    obs = C.observable_matrix(a, b, g)
    V = C.induced_covariance(C.n_tel(nu, g), g).matrix
    ch = teleportation_mdm(math.acosh(nu) / 2, g)
    assert obs.expectation(V) == pytest.approx(b * ch.nu_cl + a * g * g * ch.nu_out, rel=1e-12)
    assert np.linalg.eigvalsh(obs.K).min() >= -1e-12


def test_diagonalizing_squeezing_examples():
    assert C.diagonalizing_squeezing(0, 1, 2) == 0.0
    r = C.diagonalizing_squeezing(1, 0, 2)
    assert math.tanh(2 * r) == pytest.approx(0.8)
    assert r == pytest.approx(0.54931, abs=1e-5)
    assert math.cosh(2 * r) == pytest.approx(optimality_window(2.0).nu_cl_max)
    assert math.tanh(2 * C.diagonalizing_squeezing(1, 1, 1)) == pytest.approx(2 / 3)
    with pytest.raises(ValueError):
        C.diagonalizing_squeezing(1, 0, 1)


@pytest.mark.parametrize("nu,g", list(grid_points(gains=(0.5, 1.0, 2.0), n=5)))
def test_proof2_tie_matches_certificate(nu, g):
    z = C.build_certificate(nu, g)
    a, b = C.proof2_weights(z.a, z.b)
    assert math.cosh(2 * C.diagonalizing_squeezing(a, b, g)) == pytest.approx(nu, rel=1e-10)


def test_proof2_scan_example():
    rep = C.proof2_minimum_check(1, 1, 2)
    assert rep.ok
    assert abs(rep.r_argmin - rep.r_star) <= 1e-4
    assert rep.second_difference > 0
    assert rep.ground_energy_residual < 1e-9


def test_proof2_zero_a_minimum_at_origin():
    rep = C.proof2_minimum_check(0, 1, 1.5)
    assert rep.r_argmin == 0.0 and rep.r_star == 0.0 and rep.ok


@pytest.mark.parametrize("nu,g", list(grid_points(gains=(0.5, 2.0), n=4)))
def test_proof_cross_agreement(nu, g):
    rep1 = C.certify(nu, g)
    z = C.build_certificate(nu, g)
    rep2 = C.proof2_minimum_check(*C.proof2_weights(z.a, z.b), g)
    assert rep2.ok
    assert abs(rep2.f_min - rep1.bound) < 1e-6


def test_symplectic_spectrum_gives_diagonal_form():
    K = C.observable_matrix(1.0, 1.0, 2.0).K
    r = C.diagonalizing_squeezing(1.0, 1.0, 2.0)
    S = two_mode_squeezer(r).matrix
    d = np.diag(S.T @ K @ S)
    np.testing.assert_allclose(sorted(C.symplectic_spectrum(K)), sorted([d[0], d[2]]), atol=1e-12)
