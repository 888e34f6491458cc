"""Polynomial-square conformal maps ``f(z) = int_0^z p(w)^2 dw + f(0)``.

``|f'| = |p|^2`` on the unit circle is a trigonometric polynomial, so these
maps have band-limited boundary stretch.  The module also builds such maps
from a target map by truncating the Taylor series of ``sqrt(f')`` and
measures how far the resulting boundary sits from the target boundary.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .curves import AnalyticCurve, outward_normal
from .errors import NoIntersection, RootInsideDisk
from .series import PowerSeries, sqrt_series

ROOT_MARGIN = 1e-9
ADJUST_DELTA = 1e-3
BAND_TOL = 1e-15


@dataclass(frozen=True, eq=False)
class PolynomialConformalMap:
    p_coeffs: np.ndarray  # c_0..c_d of p
    f0: complex = 0.0
    certified: bool = False

    def __post_init__(self):
        c = np.trim_zeros(np.asarray(self.p_coeffs, dtype=complex).ravel(), "b")
        object.__setattr__(self, "p_coeffs", c if len(c) else np.zeros(1, complex))
        object.__setattr__(self, "f0", complex(self.f0))

    @property
    def degree(self) -> int:
        return len(self.p_coeffs) - 1

    def p(self, z):
        return np.polyval(self.p_coeffs[::-1], z)

    def derivative_coeffs(self):
        """Coefficients of ``f' = p^2``."""
        return np.convolve(self.p_coeffs, self.p_coeffs)

    def antiderivative_coeffs(self):
        """Taylor coefficients ``F_0..F_{2d+1}`` of ``f`` (``F_0 = f(0)``)."""
        q = self.derivative_coeffs()
        return np.concatenate([[self.f0], q / np.arange(1, len(q) + 1)])

    def roots(self):
        if self.degree == 0:
            return np.zeros(0, dtype=complex)
        return np.roots(self.p_coeffs[::-1])

    def boundary_curve(self, name="bblcn") -> AnalyticCurve:
        """Image of the unit circle as a finite Fourier curve."""
        F = self.antiderivative_coeffs()
        n = len(F) - 1
        z = np.concatenate([np.zeros(n, complex), F])
        return AnalyticCurve.from_complex_series(z, name=name, orient=False)

    def to_json(self):
        return {
            "p_coeffs": [[c.real, c.imag] for c in self.p_coeffs],
            "f0": [self.f0.real, self.f0.imag],
        }


def map_eval(fmap: PolynomialConformalMap, z):
    F = fmap.antiderivative_coeffs()
    return np.polyval(F[::-1], z)


def certify(fmap: PolynomialConformalMap, margin=ROOT_MARGIN) -> PolynomialConformalMap:
    """Return a copy flagged certified, or raise RootInsideDisk."""
    r = fmap.roots()
    bad = r[np.abs(r) <= 1 + margin]
    if len(bad) or not np.any(fmap.p_coeffs):
        raise RootInsideDisk(f"{len(bad)} root(s) of p in the closed unit disk", bad)
    return PolynomialConformalMap(fmap.p_coeffs, fmap.f0, True)


@dataclass(frozen=True, eq=False)
class BandCoefficients:
    """Fourier coefficients ``a_m`` of ``|f'(e^{i theta})|`` for ``|m| <= m0``."""

    a: np.ndarray  # a[m0 + m] for m = -m0..m0
    m0: int

    def __getitem__(self, m):
        if abs(m) > self.m0:
            return 0.0
        return self.a[self.m0 + m]

    @property
    def a0(self) -> float:
        return float(self.a[self.m0].real)

    def evaluate(self, theta):
        m = np.arange(-self.m0, self.m0 + 1)
        return (np.exp(1j * np.multiply.outer(np.asarray(theta), m)) @ self.a).real

    @classmethod
    def disk(cls, a0=1.0):
        return cls(np.array([a0], dtype=complex), 0)


def band_coefficients(fmap: PolynomialConformalMap, tol=BAND_TOL) -> BandCoefficients:
    """Autocorrelation ``a_m = sum_k c_{k+m} conj(c_k)`` of the coefficients of p."""
    c = fmap.p_coeffs
    d = len(c) - 1
    pos = np.array([np.dot(c[m:], np.conj(c[: d + 1 - m])) for m in range(d + 1)])
    nz = np.nonzero(np.abs(pos) > tol * abs(pos[0]))[0]
    m0 = int(nz.max()) if len(nz) else 0
    pos = pos[: m0 + 1]
    pos[0] = pos[0].real
    a = np.concatenate([np.conj(pos[:0:-1]), pos])
    return BandCoefficients(a, m0)


def ensure_nonconstant(fmap: PolynomialConformalMap, delta=ADJUST_DELTA) -> PolynomialConformalMap:
    """Make ``|p|`` non-constant on the circle by appending a small top term.

    Only acts when every ``a_m`` with ``m != 0`` vanishes.  The new term is
    ``delta * c_d * z**(d+1)``; the result is re-certified.
    """
    if band_coefficients(fmap).m0 > 0:
        return fmap
    c = fmap.p_coeffs
    new = np.concatenate([c, [delta * c[-1]]])
    return certify(PolynomialConformalMap(new, fmap.f0))


def truncate_and_certify(w: PowerSeries, N: int, f0=0.0, margin=ROOT_MARGIN) -> PolynomialConformalMap:
    """Degree-N truncation of ``w`` as ``p``; roots must lie outside ``|z| <= 1``."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    return certify(PolynomialConformalMap(w.truncate(N).coeffs, f0), margin)


def approximate_map(target: PowerSeries, N: int) -> PolynomialConformalMap:
    """Square-root/truncation approximant of a target map given by its Taylor series."""
    g = target.deriv()
    w = sqrt_series(g, N)
    return truncate_and_certify(w, N, target[0])


def mobius_series(a: complex, order=400) -> PowerSeries:
    """Taylor series of ``(z - a)/(conj(a) z - 1)``, a disk automorphism."""
    ab = np.conj(a)
    j = np.arange(1, order + 1)
    c = np.concatenate([[a], ab ** (j - 1) * (abs(a) ** 2 - 1)])
    return PowerSeries(c)


def rfe_map(a=0.8, N=20) -> PolynomialConformalMap:
    """``p(z) = i sqrt(1-|a|^2) sum_{j<=N} (conj(a) z)^j``, ``f(0) = a``."""
    c = 1j * np.sqrt(1 - abs(a) ** 2) * np.conj(a) ** np.arange(N + 1)
    return certify(PolynomialConformalMap(c, a))


def series_curve(series: PowerSeries, name="target") -> AnalyticCurve:
    """Boundary ``f(e^{it})`` of a map given by a (long) truncated Taylor series."""
    F = series.coeffs
    n = len(F) - 1
    return AnalyticCurve.from_complex_series(np.concatenate([np.zeros(n, complex), F]), name=name, orient=False)


@dataclass
class OffsetProfile:
    theta: np.ndarray
    s: np.ndarray
    omega: np.ndarray
    sup_s: float
    sup_ds: float


def _offset_at(target, approx, th, w0, tol=1e-14, maxit=50):
    (tx, ty) = [v.real for v in target.eval(th)]
    nx, ny = outward_normal(target, th)
    w, s = w0, 0.0
    for _ in range(maxit):
        ax, ay = [v.real for v in approx.eval(th + w)]
        dx, dy = [v.real for v in approx.derivative(th + w, 1)]
        rx, ry = ax - tx - s * nx, ay - ty - s * ny
        det = dx * (-ny) - (-nx) * dy
        if det == 0:
            break
        dw = (rx * (-ny) - (-nx) * ry) / det
        ds = (dx * ry - dy * rx) / det
        w -= dw
        s -= ds
        if abs(dw) + abs(ds) < tol:
            return w, s
    ax, ay = [v.real for v in approx.eval(th + w)]
    if np.hypot(ax - tx - s * nx, ay - ty - s * ny) < 1e-10:
        return w, s
    raise NoIntersection(f"normal line at theta={th:.6g} does not meet the approximant")


def boundary_offset(target: AnalyticCurve, approx: AnalyticCurve, n_theta=512) -> OffsetProfile:
    """Signed offset of ``approx`` along the outward normals of ``target``.

    For each grid angle solves ``approx(theta + omega) = target(theta) + s nu(theta)``
    by Newton in ``(omega, s)``.  The sup of ``|s|`` is refined between grid
    points; ``|s'|`` comes from periodic central differences.
    """
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    dense = 8 * n_theta
    td = 2 * np.pi * np.arange(dense) / dense
    ax, ay = [v.real for v in approx.eval(td)]
    tx, ty = [v.real for v in target.eval(theta)]
    s = np.empty(n_theta)
    om = np.empty(n_theta)
    prev = None
    for i, th in enumerate(theta):
        if prev is None:
            j = np.argmin((ax - tx[i]) ** 2 + (ay - ty[i]) ** 2)
            prev = (td[j] - th + np.pi) % (2 * np.pi) - np.pi
        try:
            om[i], s[i] = _offset_at(target, approx, th, prev)
        except NoIntersection:
            j = np.argmin((ax - tx[i]) ** 2 + (ay - ty[i]) ** 2)
            om[i], s[i] = _offset_at(target, approx, th, (td[j] - th + np.pi) % (2 * np.pi) - np.pi)
        prev = om[i]
    h = 2 * np.pi / n_theta
    ds = (np.roll(s, -1) - np.roll(s, 1)) / (2 * h)
    i = int(np.argmax(np.abs(s)))
    sup = abs(s[i])
    if sup > 0:
        res = minimize_scalar(
            lambda th: -abs(_offset_at(target, approx, th, om[i])[1]),
            bounds=(theta[i] - h, theta[i] + h),
            method="bounded",
            options={"xatol": 1e-12},
        )
        sup = max(sup, -res.fun)
    return OffsetProfile(theta, s, om, float(sup), float(np.max(np.abs(ds))))
