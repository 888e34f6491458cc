import numpy as np
import pytest

from steklov.bie import steklov_eigenvalues, trusted_mask
from steklov.conformal import BandCoefficients, PolynomialConformalMap, band_coefficients, certify
from steklov.disk import assemble_pencil, eigenspace, harmonic_extension, pullback_fourier, rotate_pair, solve_disk
from steklov.errors import NotPositiveDefinite


def test_pencil_examples():
    with pytest.raises(ValueError):
        assemble_pencil(BandCoefficients.disk(1.0), 0)
    D, A = assemble_pencil(BandCoefficients.disk(1.0), 2)
    assert np.allclose(np.diag(D), [2, 1, 0, 1, 2]) and np.allclose(A, np.eye(5))
    a = band_coefficients(PolynomialConformalMap([-2.0, 1.0]))
    D, A = assemble_pencil(a, 6)
    assert np.allclose(np.diag(A), 5) and np.allclose(np.diag(A, 1), -2) and np.allclose(np.diag(A, -1), -2)
    assert np.allclose(np.triu(A, 2), 0)


def test_rfe_band_matrix_positive_definite(rfe):
    _, A = assemble_pencil(band_coefficients(rfe), 128)
    assert np.allclose(A, A.conj().T)
    assert np.linalg.eigvalsh(A).min() > 0


def test_not_positive_definite():
    bad = BandCoefficients(np.array([2.0, 1.0, 2.0], dtype=complex), 1)  # 1 + 4 cos(theta) changes sign
    with pytest.raises(NotPositiveDefinite):
        assemble_pencil(bad, 8)


def test_disk_spectrum_exact():
    sp = solve_disk(BandCoefficients.disk(1.0), 40)
    expect = np.ceil(np.arange(len(sp.sigma)) / 2)
    assert np.allclose(sp.sigma, expect, atol=1e-12)
    j = 6  # sigma = 3
    u = pullback_fourier(sp, j)
    k = sp.modes
    assert np.allclose(u[np.abs(k) != 3], 0, atol=1e-14)
    assert len(eigenspace(sp, j)) == 2


def test_rfe_invariants(rfe_spectrum):
    sp = rfe_spectrum
    a = sp.band
    D, A = assemble_pencil(a, sp.N_tr)
    U = sp.uhat[:, : sp.j_max + 1]
    res = np.linalg.norm(D @ U - (A @ U) * sp.sigma[None, : sp.j_max + 1], axis=0)
    assert res.max() < 1e-10
    assert np.allclose(np.linalg.norm(U, axis=0), 1)
    # realness: u(-k) = conj(u(k))
    assert np.allclose(U[::-1], U.conj(), atol=1e-14)
    assert np.all(sp.sigma >= 0)


def test_truncation_stability(rfe):
    a = band_coefficients(rfe)
    s1 = solve_disk(a, 300, trust_check=False).sigma[:40]
    s2 = solve_disk(a, 600, trust_check=False).sigma[:40]
    assert np.max(np.abs(s1 - s2)) < 1e-10


def test_cross_solver_small_map():
    fmap = certify(PolynomialConformalMap([1.0, 0.3, 0.1j]))
    ds = solve_disk(band_coefficients(fmap), sigma_target=12)
    curve = fmap.boundary_curve()
    bs = steklov_eigenvalues(curve, 256).sigma
    mask = trusted_mask(curve, 256, bs)
    k = int(min(mask.sum(), ds.j_max + 1, 40))
    assert k > 20
    assert np.max(np.abs(bs[:k] - ds.sigma[:k])) < 1e-8


def test_harmonic_extension_matches_direct_sum(rng):
    N = 6
    u = rng.normal(size=2 * N + 1) + 1j * rng.normal(size=2 * N + 1)
    z = 0.3 - 0.5j
    r, th = abs(z), np.angle(z)
    direct = sum(u[N + k] * r ** abs(k) * np.exp(1j * k * th) for k in range(-N, N + 1))
    assert np.isclose(harmonic_extension(u, z), direct)


def test_rotate_pair_unit():
    v1 = np.array([1.0, 0, 0])
    v2 = np.array([0, 1.0, 0])
    vs = rotate_pair(v1, v2)
    assert len(vs) == 32 and np.allclose([np.linalg.norm(v) for v in vs], 1)
