import numpy as np
import pytest

from steklov.analysis import nonvanishing_ball
from steklov.bie import assemble, interior_eval_direct, solve_steklov
from steklov.conformal import PolynomialConformalMap, certify
from steklov.curves import ellipse
from steklov.nodal import nodal_extract, rays_crossing_circle
from steklov.reconstruction import build_field_grid, field_grid_from_disk, fourier_density


def cos_mode(n, N=12):
    u = np.zeros(2 * N + 1, dtype=complex)
    u[N + n] = u[N - n] = 0.5
    return u


def disk_grid(n, resolution=129):
    fmap = certify(PolynomialConformalMap([1.0], 0.0))
    return field_grid_from_disk(fmap, cos_mode(n), (-0.9, 0.9, -0.9, 0.9), resolution)


def test_cos2_gives_four_radial_segments():
    grid = disk_grid(2)
    lines = nodal_extract(grid)
    assert rays_crossing_circle(lines, (0, 0), 0.5) == 4
    # every vertex lies on a diagonal: cos(2 theta) = 0
    pts = np.vstack(lines)
    r = np.hypot(pts[:, 0], pts[:, 1])
    far = r > 0.05
    th = np.arctan2(pts[far, 1], pts[far, 0])
    assert np.max(np.abs(np.cos(2 * th))) < 0.05


@pytest.mark.parametrize("n", [1, 3, 4, 6])
def test_cos_n_has_2n_rays(n):
    lines = nodal_extract(disk_grid(n, 161))
    assert rays_crossing_circle(lines, (0, 0), 0.5) == 2 * n


def test_no_lines_for_constant_sign():
    fmap = certify(PolynomialConformalMap([1.0], 0.0))
    grid = field_grid_from_disk(fmap, cos_mode(0), (-0.5, 0.5, -0.5, 0.5), 32)
    assert nodal_extract(grid) == []


@pytest.fixture(scope="module")
def ellipse21():
    c = ellipse(2.0, 1.0)
    system = assemble(c, 256)
    return c, system, solve_steklov(system)


def test_polylines_match_direct_sign_changes(ellipse21):
    c, system, sp = ellipse21
    j = 5
    dens = fourier_density(sp.densities[:, j], c)
    box = (-1.6, 1.6, -0.7, 0.7)
    grid = build_field_grid(c, dens, box, 96)
    lines = nodal_extract(grid)
    assert lines
    hx = grid.xs[1] - grid.xs[0]
    hy = grid.ys[1] - grid.ys[0]
    pts = np.vstack(lines)
    pts = pts[(pts[:, 0] / 1.6) ** 2 + (pts[:, 1] / 0.7) ** 2 < 1]
    for x, y in pts[:: max(1, len(pts) // 40)]:
        corners = [(x + sx * hx, y + sy * hy) for sx in (-1, 1) for sy in (-1, 1)]
        vals = [interior_eval_direct(system, sp.densities[:, j], p) for p in corners]
        assert min(vals) < 0 < max(vals)


def test_opening_appears_at_higher_eigenvalue():
    c = ellipse(1.0, 1.01)
    sp = solve_steklov(assemble(c, 256))
    box = (-0.5, 0.5, -0.5, 0.5)
    r1 = {}
    for j in (20, 30):
        grid = build_field_grid(c, fourier_density(sp.densities[:, j], c), box, 128)
        r1[j] = nonvanishing_ball(grid, (0.0, 0.0), 0.2).radius
    assert r1[30] > r1[20]
