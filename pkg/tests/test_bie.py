import numpy as np
import pytest

from steklov.bie import assemble, interior_eval_direct, pencil, solve_steklov, steklov_eigenvalues, trusted_mask
from steklov.curves import circle, ellipse, kite
from steklov.errors import OutsideDomain, SingularRHS, TooFewConverged


@pytest.fixture(scope="module")
def unit():
    return assemble(circle(1.0), 128)


def test_single_layer_symbol_on_circle(unit):
    th = unit.t
    for n in range(1, 30):
        e = np.exp(1j * n * th)
        assert np.allclose(unit.S_mat @ e, e / (2 * n), atol=1e-13)
    assert np.allclose(unit.S_mat @ np.ones(128), 0, atol=1e-13)


def test_double_layer_constant(unit):
    assert np.allclose((0.5 * np.eye(128) + unit.T_mat) @ np.ones(128), 0, atol=1e-13)


def test_averaging_rows_sum_to_one():
    s = assemble(kite(), 64)
    assert np.allclose(s.W.sum(axis=1), 1)


def test_circle_spectrum(unit):
    sp = solve_steklov(unit, n_keep=11)
    assert np.allclose(sp.sigma, [0, 1, 1, 2, 2, 3, 3, 4, 4, 5, 5], atol=1e-10)
    assert np.all(sp.sigma >= 0)


def test_formulations_agree_on_ellipse():
    s = assemble(ellipse(2, 1), 128)
    a = solve_steklov(s, "regularized", 20).sigma
    b = solve_steklov(s, "naive", 20).sigma
    assert np.allclose(a, b, atol=1e-8)


def test_naive_fails_at_unit_capacity(unit):
    with pytest.raises(SingularRHS):
        solve_steklov(unit, "naive")


def test_too_few_converged(unit):
    with pytest.raises(TooFewConverged):
        solve_steklov(unit, n_keep=1000)


def test_spectral_convergence_kite():
    a = steklov_eigenvalues(kite(), 128, 20).sigma
    b = steklov_eigenvalues(kite(), 256, 20).sigma
    assert np.max(np.abs(a - b)) < 1e-10


def test_trace_orthogonality_kite():
    sp = steklov_eigenvalues(kite(), 128, 15)
    s = sp.system
    _, rhs = pencil(s, "regularized")
    tr = rhs @ sp.densities
    w = s.speed * 2 * np.pi / s.n_nodes
    G = tr.T @ (tr * w[:, None])
    d = np.sqrt(np.diag(G))
    G = G / np.outer(d, d)
    distinct = np.abs(sp.sigma[:, None] - sp.sigma[None, :]) > 1e-6
    assert np.max(np.abs(G[distinct])) < 1e-8


def test_trusted_mask():
    sp = steklov_eigenvalues(kite(), 256)
    mask = trusted_mask(kite(), 256, sp.sigma)
    assert mask[:10].all() and not mask.all()
    assert not np.any(np.diff(mask.astype(int)) > 0)  # trusted prefix


def test_direct_evaluation_examples(unit):
    dens = np.cos(unit.t)
    for r in (0.2, 0.5, 0.7):
        assert np.isclose(interior_eval_direct(unit, dens, (r, 0.0)), r / 2, atol=1e-13)
    s = assemble(kite(), 128)
    assert np.isclose(interior_eval_direct(s, np.full(128, 3.0), (0.1, 0.2)), 3.0)
    with pytest.raises(OutsideDomain):
        interior_eval_direct(unit, dens, (1.5, 0.0))


def test_direct_eval_solves_steklov_on_circle():
    # eigen-density of sigma = 2 yields r^2 cos(2 theta)/4 scaled
    s = assemble(circle(1.0), 64)
    sp = solve_steklov(s, n_keep=6)
    dens = sp.densities[:, 3]
    x = (0.3, 0.4)
    u = interior_eval_direct(s, dens, x)
    # harmonic extension of the boundary trace S[phi]
    _, rhs = pencil(s, "regularized")
    trace = rhs @ dens
    c = np.fft.fft(trace) / 64
    z = 0.3 + 0.4j
    ext = c[0] + sum(c[k] * z**k + c[-k] * np.conj(z) ** k for k in range(1, 10))
    assert np.isclose(u, ext.real, atol=1e-12)
