"""Closed analytic curves stored as finite Fourier series.

A curve is ``C(t) = (C1(t), C2(t))`` with ``Cj(t) = sum_k c_jk exp(i k t)``
for ``|k| <= d``.  Because the series is finite, ``C`` is entire in ``t`` and
can be evaluated off the real axis, which the interior reconstruction needs.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from matplotlib.path import Path

from .errors import BoundaryAmbiguous, DegenerateCurve

BOUNDARY_TOL = 1e-12  # relative to the curve diameter


@dataclass(frozen=True, eq=False)
class AnalyticCurve:
    """Finite Fourier parametrization, normalized to counterclockwise.

    ``coeffs_x[k + d]`` and ``coeffs_y[k + d]`` hold the coefficient of
    ``exp(i k t)`` for ``k = -d..d``.  Use :meth:`from_coeffs` to build one;
    it fixes the orientation.
    """

    coeffs_x: np.ndarray
    coeffs_y: np.ndarray
    name: str = "custom"
    params: tuple = field(default=())

    @property
    def degree(self) -> int:
        return (len(self.coeffs_x) - 1) // 2

    @property
    def modes(self) -> np.ndarray:
        d = self.degree
        return np.arange(-d, d + 1)

    @classmethod
    def from_coeffs(cls, coeffs_x, coeffs_y, name="custom", params=(), orient=True):
        cx = np.asarray(coeffs_x, dtype=complex).ravel()
        cy = np.asarray(coeffs_y, dtype=complex).ravel()
        if len(cx) != len(cy) or len(cx) % 2 != 1:
            raise ValueError("coefficient arrays must have equal odd length 2d+1")
        curve = cls(cx, cy, name, tuple(params))
        if orient and signed_area(curve) < 0:
            # t -> -t reverses orientation and keeps C(0)
            curve = cls(cx[::-1].copy(), cy[::-1].copy(), name, tuple(params))
        return curve

    @classmethod
    def from_complex_series(cls, coeffs, name="custom", params=(), orient=True):
        """Curve ``C1 + i C2 = sum_k coeffs[k+d] exp(ikt)`` (complex-valued form)."""
        z = np.asarray(coeffs, dtype=complex).ravel()
        zr = np.conj(z[::-1])  # coefficients of conj(C1 + i C2)
        return cls.from_coeffs((z + zr) / 2, (z - zr) / 2j, name, params, orient)

    def eval(self, t):
        t = np.asarray(t)
        e = np.exp(1j * np.multiply.outer(t, self.modes))
        return e @ self.coeffs_x, e @ self.coeffs_y

    def derivative(self, t, order=1):
        if order not in (1, 2):
            raise ValueError("order must be 1 or 2")
        t = np.asarray(t)
        k = self.modes
        fac = (1j * k) ** order
        e = np.exp(1j * np.multiply.outer(t, k))
        return e @ (fac * self.coeffs_x), e @ (fac * self.coeffs_y)

    def complex_form(self):
        """Coefficients of ``C1 + i C2`` and ``C1 - i C2`` as Laurent series in exp(it)."""
        return self.coeffs_x + 1j * self.coeffs_y, self.coeffs_x - 1j * self.coeffs_y

    def samples(self, n):
        """Real points, speed and curvature-type data at ``t_j = 2 pi j / n``."""
        t = 2 * np.pi * np.arange(n) / n
        x, y = self.eval(t)
        dx, dy = self.derivative(t, 1)
        ddx, ddy = self.derivative(t, 2)
        return t, x.real, y.real, dx.real, dy.real, ddx.real, ddy.real


def curve_eval(curve: AnalyticCurve, t):
    """Complex pair ``(C1(t), C2(t))``; ``t`` may be complex."""
    return curve.eval(t)


def curve_derivative(curve: AnalyticCurve, t, order=1):
    return curve.derivative(t, order)


def outward_normal(curve: AnalyticCurve, t):
    dx, dy = curve.derivative(np.asarray(t, dtype=float), 1)
    dx, dy = dx.real, dy.real
    speed = np.hypot(dx, dy)
    if np.any(speed == 0):
        raise DegenerateCurve("zero speed in parametrization")
    return dy / speed, -dx / speed


def signed_area(curve: AnalyticCurve, n=None):
    n = n or 4 * curve.degree + 64
    _, x, y, dx, dy, _, _ = curve.samples(n)
    return 0.5 * np.mean(x * dy - y * dx) * 2 * np.pi


def _sample_n(curve):
    return max(4096, 64 * curve.degree)


def diameter(curve: AnalyticCurve) -> float:
    _, x, y, *_ = curve.samples(512)
    pts = x + 1j * y
    return float(np.max(np.abs(pts[:, None] - pts[None, :])))


def nearest_point(curve: AnalyticCurve, p):
    """Parameter and distance of the boundary point closest to ``p``."""
    n = _sample_n(curve)
    t, x, y, *_ = curve.samples(n)
    d2 = (x - p[0]) ** 2 + (y - p[1]) ** 2
    tk = t[np.argmin(d2)]
    for _ in range(50):
        (cx, cy), (dx, dy), (ddx, ddy) = (
            [v.real for v in curve.eval(tk)],
            [v.real for v in curve.derivative(tk, 1)],
            [v.real for v in curve.derivative(tk, 2)],
        )
        rx, ry = p[0] - cx, p[1] - cy
        g = -(rx * dx + ry * dy)
        gp = dx * dx + dy * dy - (rx * ddx + ry * ddy)
        if gp <= 0:
            break
        step = g / gp
        tk -= step
        if abs(step) < 1e-15:
            break
    cx, cy = [v.real for v in curve.eval(tk)]
    return float(tk), float(np.hypot(p[0] - cx, p[1] - cy))


def point_in_domain(curve: AnalyticCurve, p) -> bool:
    """Winding-number inside test; raises BoundaryAmbiguous on the boundary."""
    p = (float(p[0]), float(p[1]))
    tk, dist = nearest_point(curve, p)
    if dist < BOUNDARY_TOL * diameter(curve):
        raise BoundaryAmbiguous(f"point {p} lies on the boundary (distance {dist:.3e})")
    n = _sample_n(curve)
    _, x, y, *_ = curve.samples(n)
    seg = np.hypot(np.diff(x), np.diff(y)).max()
    if dist < seg:
        # polygon may misclassify; use the normal side of the nearest point
        cx, cy = [v.real for v in curve.eval(tk)]
        nx, ny = outward_normal(curve, tk)
        return bool((p[0] - cx) * nx + (p[1] - cy) * ny < 0)
    winding = winding_number(curve, p, n)
    return abs(winding) == 1


def points_in_domain(curve: AnalyticCurve, xs, ys):
    """Vectorized inside mask for many points (polygon test, refined near the boundary)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    n = _sample_n(curve)
    _, x, y, *_ = curve.samples(n)
    poly = Path(np.column_stack([x, y]), closed=False)
    pts = np.column_stack([xs.ravel(), ys.ravel()])
    seg = np.hypot(np.diff(x), np.diff(y)).max()
    inside = poly.contains_points(pts)
    wide_in = poly.contains_points(pts, radius=-2 * seg)
    wide_out = poly.contains_points(pts, radius=2 * seg)
    unsure = np.nonzero(wide_in != wide_out)[0]
    for i in unsure:
        try:
            inside[i] = point_in_domain(curve, pts[i])
        except BoundaryAmbiguous:
            inside[i] = False
    return inside.reshape(xs.shape)


def winding_number(curve: AnalyticCurve, p, n=None) -> int:
    n = n or _sample_n(curve)
    _, x, y, *_ = curve.samples(n)
    z = (x - p[0]) + 1j * (y - p[1])
    dtheta = np.angle(np.roll(z, -1) / z)
    return int(round(dtheta.sum() / (2 * np.pi)))


def check_curve(curve: AnalyticCurve, n=512):
    """Raise DegenerateCurve if the speed vanishes or the curve self-intersects."""
    _, x, y, dx, dy, _, _ = curve.samples(n)
    speed = np.hypot(dx, dy)
    if speed.min() <= 1e-12 * speed.max():
        raise DegenerateCurve("parametrization speed vanishes")
    p = np.column_stack([x, y])
    q = np.roll(p, -1, axis=0)
    i, j = np.triu_indices(n, k=2)
    keep = ~((i == 0) & (j == n - 1))
    i, j = i[keep], j[keep]

    def orient(a, b, c):
        return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])

    o1 = orient(p[i], q[i], p[j])
    o2 = orient(p[i], q[i], q[j])
    o3 = orient(p[j], q[j], p[i])
    o4 = orient(p[j], q[j], q[i])
    if np.any((o1 * o2 < 0) & (o3 * o4 < 0)):
        raise DegenerateCurve("curve self-intersects")
    return curve


# presets ---------------------------------------------------------------

def circle(r=1.0, center=(0.0, 0.0)):
    cx = np.array([r / 2, center[0], r / 2], dtype=complex)
    cy = np.array([-r / 2j, center[1], r / 2j], dtype=complex)
    return AnalyticCurve.from_coeffs(cx, cy, "circle", (r,))


def ellipse(a, b):
    """``(a cos t, b sin t)``."""
    cx = np.array([a / 2, 0, a / 2], dtype=complex)
    cy = np.array([-b / 2j, 0, b / 2j], dtype=complex)
    return AnalyticCurve.from_coeffs(cx, cy, "ellipse", (a, b))


def kite():
    """``(cos t + 0.65 cos 2t - 0.65, 1.5 sin t)``."""
    cx = np.array([0.325, 0.5, -0.65, 0.5, 0.325], dtype=complex)
    cy = np.array([0, -0.75 / 1j, 0, 0.75 / 1j, 0], dtype=complex)
    return AnalyticCurve.from_coeffs(cx, cy, "kite", ())
