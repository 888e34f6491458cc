import numpy as np
import pytest
from scipy.stats import qmc

from steklov.bie import assemble, interior_eval_direct, solve_steklov
from steklov.conformal import PolynomialConformalMap
from steklov.curves import circle, ellipse, kite, points_in_domain
from steklov.errors import BranchJump, InteriorRequired
from steklov.reconstruction import (
    DensitySpectrum,
    b_coefficient,
    b_coefficients,
    b_coefficients_critical,
    build_field_grid,
    continuous_log,
    evaluate_field,
    field_grid_from_disk,
    fourier_density,
    lambda_closed_form,
    lambda_many,
    lambda_of,
    log_weight_fourier,
    _contour_h,
)

PRESETS = [circle(1.0), ellipse(2.0, 1.0), ellipse(1.0, 1.01), kite()]


def interior_points(curve, n, seed=0):
    _, x, y, *_ = curve.samples(256)
    lo, hi = np.array([x.min(), y.min()]), np.array([x.max(), y.max()])
    sob = qmc.Sobol(2, seed=seed)
    out = []
    while len(out) < n:
        p = lo + (hi - lo) * sob.random(64)
        ok = points_in_domain(curve, p[:, 0], p[:, 1])
        # stay a little away from the boundary so the strip is not razor thin
        for q in p[ok]:
            if lambda_of(curve, q).lam > 0.05:
                out.append(tuple(q))
    return out[:n]


def test_density_examples():
    c = circle(1.0)
    d = fourier_density(np.ones(64), c)
    assert d.mean == pytest.approx(1) and np.allclose(d.A, 0)
    t = 2 * np.pi * np.arange(64) / 64
    d = fourier_density(np.cos(t), c)
    assert np.isclose(d[1], 0.5) and np.isclose(d[-1], 0.5)
    assert np.allclose(np.delete(d.A, [d.n_half - 1, d.n_half + 1]), 0, atol=1e-15)


def test_density_ellipse_dft_oracle():
    e = ellipse(2, 1)
    n = 64
    t = 2 * np.pi * np.arange(n) / n
    d = fourier_density(np.cos(t), e)
    f = np.cos(t) * np.sqrt(4 * np.sin(t) ** 2 + np.cos(t) ** 2)
    for k in range(-10, 11):
        oracle = np.sum(f * np.exp(-1j * k * t)) / n
        assert np.isclose(d[k], oracle, atol=1e-14)
    assert abs(d[0]) < 1e-12
    assert np.allclose(d.A[::-1], np.conj(d.A))


def test_lambda_examples():
    assert lambda_of(circle(1.0), (0.5, 0)).lam == pytest.approx(np.log(2), abs=1e-14)
    assert lambda_of(circle(1.0), (0.5, 0), method="newton").lam == pytest.approx(np.log(2), abs=1e-12)
    r = lambda_of(ellipse(2, 1), (0, 0), method="newton")
    assert r.lam == pytest.approx(np.arccosh(2 / np.sqrt(3)), abs=1e-12)
    with pytest.raises(InteriorRequired):
        lambda_of(ellipse(2, 1), (3, 0))


def test_lambda_kite_stable_under_start_refinement():
    k = kite()
    for p in interior_points(k, 8, seed=3):
        a = lambda_of(k, p, poly_seeds=False).lam
        b = lambda_of(k, p, poly_seeds=False, n_t_starts=64).lam
        c = lambda_of(k, p).lam
        assert abs(a - b) < 1e-12 and abs(b - c) < 1e-12


@pytest.mark.parametrize("curve", PRESETS[1:], ids=lambda c: c.name)
def test_lambda_witness_and_strip(curve):
    for p in interior_points(curve, 5, seed=5):
        r = lambda_of(curve, p, method="newton")
        c1, c2 = curve.eval(r.root)
        assert abs((p[0] - c1) ** 2 + (p[1] - c2) ** 2) < 1e-10
        assert abs(abs(r.root.imag) - r.lam) < 1e-12
        # zero-free strip: the contour logarithm closes just inside lambda
        continuous_log(_contour_h(curve, p, 0.99 * r.lam, 2048))
        assert np.isclose(lambda_many(curve, [p[0]], [p[1]])[0], r.lam, atol=1e-11)


def test_b_circle_closed_form():
    for r in (0.2, 0.5, 0.9):
        B = b_coefficients(circle(1.0), (r, 0.0), 0.0, 40)
        n = np.arange(1, 41)
        assert np.allclose(B, r**n / (2 * n), atol=1e-16)
    assert b_coefficient(circle(1.0), (0.5, 0), 0.0, -3) == pytest.approx(0.5**3 / 6)


def test_branch_jump_beyond_strip():
    with pytest.raises(BranchJump):
        b_coefficients(kite(), (0.1, 0.2), 1.2 * lambda_of(kite(), (0.1, 0.2)).lam, 20)


# the plain coefficients are trapezoid sums of O(1) values; their absolute
# round-off floor is a few 1e-17, which bounds the attainable relative error
B0_FLOOR = 1e-15


@pytest.mark.parametrize("curve", PRESETS, ids=lambda c: c.name)
def test_cauchy_identity(curve):
    n = np.arange(1, 31)
    for p in interior_points(curve, 20, seed=11):
        lr = lambda_of(curve, p, method="newton")
        if not np.isfinite(lr.lam):
            continue
        B0 = b_coefficients(curve, p, 0.0, 30)
        keep = np.abs(B0) > 1e-12
        tol = 1e-9 * np.abs(B0[keep]) + B0_FLOOR
        for frac in (0.3, 0.8):
            s = frac * lr.lam
            dev = np.abs(np.exp(-n * s) * b_coefficients(curve, p, s, 30) - B0)[keep]
            assert np.all(dev <= tol), (p, frac)
        dev = np.abs(np.exp(-n * lr.lam) * b_coefficients_critical(curve, p, 30, lr) - B0)[keep]
        assert np.all(dev <= tol), (p, "critical")


def test_critical_coefficients_bounded_and_stable():
    e = ellipse(2, 1)
    for p in [(0.3, 0.2), (-1.0, 0.1), (0.5, -0.6)]:
        lr = lambda_of(e, p, method="newton")
        a = np.arange(1, 201) * np.abs(b_coefficients_critical(e, p, 200, lr))
        b = np.arange(1, 201) * np.abs(b_coefficients_critical(e, p, 200, lr, M=3200))
        assert np.isfinite(a).all()
        assert abs(a.max() - b.max()) < 0.01 * b.max()


def test_log_weight_integral_asymptotics():
    x = np.array([20.0, 40.0, 80.0, 160.0])
    rem = np.array([log_weight_fourier(v) for v in x]) + np.pi / x
    # remainder behaves like 2 cos(x) / x^2
    assert np.all(np.abs(rem) * x**2 <= 2.0 + 4.0 / x)


def test_field_circle_closed_form():
    c = circle(1.0)
    t = 2 * np.pi * np.arange(64) / 64
    d = fourier_density(np.cos(t), c)
    for r in (0.3, 0.7):
        for alpha in (0.0, 0.5, 0.8, 1.0):
            assert evaluate_field(c, d, (r, 0.0), alpha) == pytest.approx(r / 2, abs=1e-14)


@pytest.fixture(scope="module")
def ellipse_sp():
    e = ellipse(2, 1)
    return e, solve_steklov(assemble(e, 128))


@pytest.mark.filterwarnings("ignore:evaluation point is close")
def test_field_alpha_zero_matches_direct(ellipse_sp):
    e, sp = ellipse_sp
    for j in (5, 12):
        d = fourier_density(sp.densities[:, j], e)
        for p in [(0.1, 0.1), (1.2, -0.3), (-0.5, 0.5)]:
            direct = interior_eval_direct(sp.system, sp.densities[:, j], p)
            assert evaluate_field(e, d, p, 0.0) == pytest.approx(direct, rel=1e-10, abs=1e-14)


def test_field_alpha_invariance(ellipse_sp):
    e, sp = ellipse_sp
    d = fourier_density(sp.densities[:, 20], e)
    norm = np.max(np.abs(sp.densities[:, 20]))
    for p in [(0.1, 0.1), (1.2, -0.3), (-0.5, 0.5), (0.0, 0.0)]:
        vals = [evaluate_field(e, d, p, a) for a in (0.5, 0.8, 1.0)]
        if abs(vals[1]) > 1e-12 * norm:
            assert np.allclose(vals, vals[1], rtol=1e-9, atol=0)


def test_field_grid_circle_signs():
    c = circle(1.0)
    t = 2 * np.pi * np.arange(64) / 64
    g = build_field_grid(c, fourier_density(np.cos(t), c), (-1.1, 1.1, -1.1, 1.1), 64)
    X, _ = np.meshgrid(g.xs, g.ys)
    assert np.all(g.sign[g.inside & (X > 1e-9)] == 1)
    assert np.all(g.sign[g.inside & (X < -1e-9)] == -1)
    assert np.all(np.isfinite(g.u[g.inside]))


def test_field_grid_from_disk_identity():
    N = 8
    u = np.zeros(2 * N + 1, complex)
    u[N + 3] = u[N - 3] = 0.5
    g = field_grid_from_disk(PolynomialConformalMap([1.0]), u, (-1, 1, -1, 1), 32)
    X, Y = np.meshgrid(g.xs, g.ys)
    ref = np.real((X + 1j * Y) ** 3)
    assert np.allclose(g.u[g.inside], ref[g.inside], atol=1e-13)


def test_field_resolves_sub_roundoff_magnitudes():
    e = ellipse(1.0, 1.01)
    sp = solve_steklov(assemble(e, 256))
    d = fourier_density(sp.densities[:, 30], e)
    lam = lambda_of(e, (0.0, 0.0)).lam
    u = evaluate_field(e, d, (0.0, 0.02))
    assert np.isfinite(u) and 0 < abs(u) < 1e-10
    assert np.log(abs(u)) < -0.5 * sp.sigma[30] * lam
