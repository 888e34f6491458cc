"""Interior eigenfunction values that keep their exponential decay.

The Kress potential of a density ``phi`` on ``C(t)`` expands as

    u(x) = mean + sum_{n != 0} A_n B_n^0(x),

with ``A_n`` the Fourier coefficients of ``(phi - mean)|C'|`` and
``B_n^0 = -(1/4 pi) int log h(t) e^{int} dt``, ``h(z) = (x1 - C1(z))^2 + (x2 - C2(z))^2``.
Because ``h`` has no zeros in the strip ``|Im z| < lambda(x)``, the contour can
be lifted to ``t + i s sgn(n)`` with ``|s| <= lambda``, which pulls the factor
``exp(-|n s|)`` out of the integral explicitly instead of recovering it by
cancellation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft
from scipy.spatial import cKDTree

from .curves import AnalyticCurve, point_in_domain, points_in_domain
from .errors import BranchJump, InteriorRequired, NewtonFailed

DEFAULT_ALPHA = 0.8
CLOSURE_TOL = 1e-6
ROOT_TOL = 1e-13
N_T_STARTS = 16
_S_STARTS = np.array([-1.0, -0.6, -0.3, -0.1, 0.1, 0.3, 0.6, 1.0])


# ---------------------------------------------------------------- densities

@dataclass(frozen=True, eq=False)
class DensitySpectrum:
    """``(phi - mean)|C'| = sum_n A[n_nodes//2 + n] e^{int}``."""

    A: np.ndarray
    mean: float

    @property
    def n_half(self):
        return (len(self.A) - 1) // 2

    def __getitem__(self, n):
        if abs(n) > self.n_half:
            return 0.0
        return self.A[self.n_half + n]

    def positive(self, n_max):
        """``A_1 .. A_{n_max}``."""
        n_max = min(n_max, self.n_half)
        return self.A[self.n_half + 1 : self.n_half + 1 + n_max]


def fourier_density(density, curve: AnalyticCurve) -> DensitySpectrum:
    """DFT of ``(phi - mean)|C'|`` at the equispaced Nystrom nodes."""
    density = np.asarray(density, dtype=float)
    n = len(density)
    _, _, _, dx, dy, _, _ = curve.samples(n)
    J = np.hypot(dx, dy)
    mean = float(np.sum(density * J) / np.sum(J))
    c = np.fft.fft((density - mean) * J) / n
    half = n // 2
    A = np.zeros(2 * half + 1, dtype=complex)
    k = np.arange(-half + 1, half)
    A[half + k] = c[k % n]
    # Nyquist mode shared symmetrically
    A[0] = A[-1] = c[half] / 2
    return DensitySpectrum(A, mean)


# ---------------------------------------------------------------- lambda(x)

@dataclass
class LambdaResult:
    lam: float
    root: complex
    method: str
    roots: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))

    @property
    def lambda_(self):
        return self.lam


def _h_and_dh(curve: AnalyticCurve, x, z):
    c1, c2 = curve.eval(z)
    d1, d2 = curve.derivative(z, 1)
    r1, r2 = x[0] - c1, x[1] - c2
    return r1 * r1 + r2 * r2, -2 * (r1 * d1 + r2 * d2)


def _laurent_polys(curve: AnalyticCurve):
    """``(coeffs, lo, hi, sign)`` for ``C1 + i C2`` and ``C1 - i C2`` as polynomials in ``w = exp(iz)``.

    Only the constant term (index ``d``) depends on the evaluation point, so
    the span of nonzero coefficients is fixed per curve.
    """
    d = curve.degree
    out = []
    for coeffs, sign in zip(curve.complex_form(), (1, -1)):
        nz = np.nonzero(np.abs(coeffs) > 0)[0]
        lo = min(int(nz.min()) if len(nz) else d, d)
        hi = max(int(nz.max()) if len(nz) else d, d)
        out.append((coeffs, lo, hi, sign))
    return out


def laurent_roots(curve: AnalyticCurve, x):
    """All finite roots of ``h`` in one period, from ``C1 +- i C2 = x1 +- i x2``."""
    d = curve.degree
    out = []
    for coeffs, lo, hi, sign in _laurent_polys(curve):
        c = coeffs[lo : hi + 1].copy()
        c[d - lo] -= x[0] + sign * 1j * x[1]
        if hi == lo:
            continue
        w = np.roots(c[::-1])
        w = w[np.abs(w) > 0]
        out.append(-1j * np.log(w))
    return np.concatenate(out) if out else np.zeros(0, complex)


def _newton(curve, x, z, maxit=60):
    z = np.array(z, dtype=complex)
    h, dh = _h_and_dh(curve, x, z)
    scale = 1.0 + np.abs(x[0]) + np.abs(x[1])
    for _ in range(maxit):
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(dh != 0, h / np.where(dh != 0, dh, 1), 0)
        step = np.where(np.abs(step) > 1.0, step / np.maximum(np.abs(step), 1.0), step)  # damp wild steps
        z = z - step
        z = (z.real % (2 * np.pi)) + 1j * z.imag
        h, dh = _h_and_dh(curve, x, z)
        if np.all(np.abs(step) < 1e-15 * (1 + np.abs(z))):
            break
    ok = np.isfinite(z) & (np.abs(step) < 1e-10) & (np.abs(h) <= 1e-8 * scale**2)
    return z, ok


def _dedupe(z, tol=1e-8):
    out = []
    for v in sorted(z, key=lambda w: (round(w.imag, 6), w.real)):
        if not any(abs(v.imag - u.imag) < tol and abs(((v.real - u.real + np.pi) % (2 * np.pi)) - np.pi) < tol for u in out):
            out.append(v)
    return np.array(out, dtype=complex)


def lambda_closed_form(curve: AnalyticCurve, x):
    if curve.name == "circle":
        r = curve.params[0]
        c = (curve.coeffs_x[1].real, curve.coeffs_y[1].real)
        with np.errstate(divide="ignore"):
            return -np.log(np.hypot(x[0] - c[0], x[1] - c[1]) / r)
    if curve.name == "ellipse":
        a, b = curve.params
        x1, x2 = x
        if np.isclose(a, b):
            return -np.log(np.hypot(x1, x2) / a)
        if b > a:
            a, b, x1, x2 = b, a, x2, x1
        g = np.sqrt(a * a - b * b)
        return float(np.arccosh(a / g) - np.arccosh((x1 + 1j * x2) / g).real)
    raise ValueError(f"no closed form for curve {curve.name!r}")


def lambda_of(
    curve: AnalyticCurve, x, method="auto", seed=None, poly_seeds=True, check_inside=True, n_t_starts=N_T_STARTS
) -> LambdaResult:
    """Half-width of the zero-free strip of ``h`` around the real axis.

    ``method="auto"`` uses the closed forms for circle and ellipse presets and
    multi-start Newton otherwise; ``"newton"`` forces the Newton path.
    """
    x = (float(x[0]), float(x[1]))
    if check_inside and not point_in_domain(curve, x):
        raise InteriorRequired(f"point {x} is not inside the domain")
    if method in ("auto", "closed") and curve.name in ("circle", "ellipse"):
        lam = lambda_closed_form(curve, x)
        return LambdaResult(float(lam), complex(np.nan), curve.name)
    if method == "closed":
        raise ValueError("closed form unavailable for this curve")

    t_starts = 2 * np.pi * np.arange(n_t_starts) / n_t_starts
    starts = (t_starts[:, None] + 1j * _S_STARTS[None, :]).ravel()
    if seed is not None:
        starts = np.concatenate([[seed], starts])
    if poly_seeds:
        poly = laurent_roots(curve, x)
        if not len(poly):
            # h is zero-free in the whole plane
            return LambdaResult(float("inf"), complex(np.nan), "newton")
        starts = np.concatenate([poly, starts])
    z, ok = _newton(curve, x, starts)
    if not ok.any():
        raise NewtonFailed(f"Newton did not converge for x={x}", {"starts": len(starts)})
    roots = _dedupe(z[ok])
    i = int(np.argmin(np.abs(roots.imag)))
    lam = abs(roots[i].imag)
    # report the witness on the upper side of the strip
    up = roots[np.abs(roots.imag - lam) < 1e-9 * (1 + lam)]
    root = up[0] if len(up) else roots[i]
    return LambdaResult(float(lam), complex(root), "newton", roots)


def lambda_many(curve: AnalyticCurve, xs, ys):
    """Vectorized ``lambda`` for interior points (closed forms where available)."""
    xs = np.asarray(xs, dtype=float).ravel()
    ys = np.asarray(ys, dtype=float).ravel()
    if curve.name in ("circle", "ellipse"):
        return np.array([lambda_closed_form(curve, (a, b)) for a, b in zip(xs, ys)])
    d = curve.degree
    out = np.full(len(xs), np.inf)
    for coeffs, lo, hi, sign in _laurent_polys(curve):
        if hi == lo:
            continue
        deg = hi - lo
        c = np.tile(coeffs[lo : hi + 1], (len(xs), 1))
        c[:, d - lo] -= xs + sign * 1j * ys
        # batched companion matrices of sum_k c[k] w^k
        comp = np.zeros((len(xs), deg, deg), dtype=complex)
        if deg > 1:
            comp[:, 1:, :-1] = np.eye(deg - 1)
        lead = c[:, -1:]
        bad = np.abs(lead[:, 0]) <= 1e-14 * np.abs(c).max(axis=1)
        comp[:, :, -1] = -c[:, :-1] / np.where(bad[:, None], 1.0, lead)
        w = np.linalg.eigvals(comp)
        for i in np.nonzero(bad)[0]:
            # degree drops at this point; fall back to a per-point solve
            r = np.roots(np.trim_zeros(c[i, ::-1], "f"))
            w[i] = np.concatenate([r, np.full(deg - len(r), np.inf)])
        with np.errstate(divide="ignore", invalid="ignore"):
            z = -1j * np.log(w)
            for _ in range(3):
                h, dh = _h_and_dh_vec(curve, xs, ys, np.where(np.isfinite(z), z, 0))
                z = np.where(np.isfinite(z) & (dh != 0), z - h / np.where(dh != 0, dh, 1), z)
        lam = np.where(np.isfinite(z), np.abs(z.imag), np.inf)
        out = np.minimum(out, lam.min(axis=1))
    return out


def _h_and_dh_vec(curve, xs, ys, z):
    c1, c2 = curve.eval(z)
    d1, d2 = curve.derivative(z, 1)
    r1 = xs[:, None] - c1
    r2 = ys[:, None] - c2
    return r1 * r1 + r2 * r2, -2 * (r1 * d1 + r2 * d2)


# ---------------------------------------------------------------- B_n

M_MAX = 1 << 15


def quadrature_size(n_max, margin=None):
    """Trapezoid nodes for ``B_1..B_{n_max}``.

    The base count is ``8 max(n_max, 64)``.  When the contour passes within
    ``margin`` (in ``Im t``) of a zero of ``h`` the trapezoid error behaves like
    ``exp(-M margin)``, so the count is raised to ``40 / margin`` (capped at
    ``M_MAX``) and rounded up to a power of two.
    """
    M = 8 * max(int(n_max), 64)
    if margin is not None and np.isfinite(margin) and margin > 0:
        M = max(M, min(int(np.ceil(40.0 / margin)), M_MAX))
    return 1 << int(np.ceil(np.log2(M)))


def _contour_h(curve: AnalyticCurve, x, s, M):
    """``h(t_j + i s)`` at ``M`` equispaced ``t_j`` via FFT of damped coefficients."""
    k = curve.modes
    damp = np.exp(-k * s)
    X = np.zeros(M, dtype=complex)
    Y = np.zeros(M, dtype=complex)
    X[k % M] = curve.coeffs_x * damp
    Y[k % M] = curve.coeffs_y * damp
    c1 = np.fft.ifft(X) * M
    c2 = np.fft.ifft(Y) * M
    return (x[0] - c1) ** 2 + (x[1] - c2) ** 2


def continuous_log(h):
    """Logarithm of samples around a closed contour, continuous in ``t``."""
    mod = np.log(np.abs(h))
    ph = np.unwrap(np.angle(h))
    closure = ph[-1] + np.angle(h[0] / h[-1]) - ph[0]
    if abs(closure) > CLOSURE_TOL:
        raise BranchJump(f"log h does not close periodically (winding {closure / (2 * np.pi):.3g})")
    return mod + 1j * ph


def b_coefficients(curve: AnalyticCurve, x, s, n_max, M=None):
    """``B_n(x, s)`` for ``n = 1..n_max`` (contour ``t + i|s|``).

    For real curves and real ``x``, ``B_{-n}(x, s) = conj(B_n(x, s))``.
    """
    if M is None:
        lam = lambda_of(curve, x, check_inside=False).lam
        M = quadrature_size(n_max, lam - abs(s) if lam > abs(s) else None)
    if n_max >= M // 2:
        raise ValueError("quadrature too coarse for requested n_max")
    L = continuous_log(_contour_h(curve, x, abs(s), M))
    return -0.5 * np.fft.ifft(L)[1 : n_max + 1]


def b_coefficient(curve: AnalyticCurve, x, s, n, M=None):
    """Single ``B_n(x1, x2, s)``; ``s = 0`` gives ``B_n^0``."""
    if n == 0:
        raise ValueError("n must be nonzero")
    b = b_coefficients(curve, x, s, abs(n), M)[-1]
    return b if n > 0 else np.conj(b)


def b_coefficients_critical(curve: AnalyticCurve, x, n_max, lam: LambdaResult | None = None, M=None):
    """``B_n(x, lambda(x))`` for ``n = 1..n_max`` on the contour through the zeros of ``h``.

    The zeros ``t_j + i lambda`` make ``log h`` singular on the contour.  Each
    is divided out with ``1 - exp(-i(z - z_j))``, whose logarithm has the exact
    coefficients ``-2 pi e^{i n t_j} / n``; the smooth quotient goes through
    the trapezoid rule.
    """
    if lam is None or not len(lam.roots):
        lam = lambda_of(curve, x, method="newton")
    s = lam.lam
    close = np.abs(lam.roots.imag - s) < 1e-9 * (1 + s)
    on_line = lam.roots[close]
    if M is None:
        off = np.abs(lam.roots[~close].imag - s)
        M = quadrature_size(n_max, off.min() if len(off) else None)
    tj = np.mod(on_line.real, 2 * np.pi)
    t = 2 * np.pi * np.arange(M) / M
    h = _contour_h(curve, x, s, M)
    q = np.ones(M, dtype=complex)
    for t0 in tj:
        q = q * (1 - np.exp(-1j * (t - t0)))
    r = np.empty(M, dtype=complex)
    near = np.zeros(M, dtype=bool)
    for t0 in tj:
        near |= np.abs(((t - t0 + np.pi) % (2 * np.pi)) - np.pi) < 1e-10
    r[~near] = h[~near] / q[~near]
    for i in np.nonzero(near)[0]:
        # removable point: h'(z0) / q'(z0) with q'(z0) = i, other factors as they are
        j0 = int(np.argmin(np.abs(((t[i] - tj + np.pi) % (2 * np.pi)) - np.pi)))
        _, dh = _h_and_dh(curve, x, tj[j0] + 1j * s)
        others = np.prod([1 - np.exp(-1j * (tj[j0] - tk)) for k, tk in enumerate(tj) if k != j0])
        r[i] = dh / 1j / others
    L = continuous_log(r)
    n = np.arange(1, n_max + 1)
    smooth = -0.5 * np.fft.ifft(L)[1 : n_max + 1]
    sing = np.exp(1j * np.outer(n, tj)).sum(axis=1) / (2 * n)
    return smooth + sing


# ---------------------------------------------------------------- fields

def default_n_max(sigma):
    return int(4 * sigma + 64)


def _contour_h_batch(curve: AnalyticCurve, pts, s, M):
    k = curve.modes
    damp = np.exp(-np.outer(s, k))
    X = np.zeros((len(pts), M), dtype=complex)
    Y = np.zeros((len(pts), M), dtype=complex)
    X[:, k % M] = curve.coeffs_x * damp
    Y[:, k % M] = curve.coeffs_y * damp
    c1 = sfft.ifft(X, axis=1, workers=-1) * M
    c2 = sfft.ifft(Y, axis=1, workers=-1) * M
    return (pts[:, 0:1] - c1) ** 2 + (pts[:, 1:2] - c2) ** 2


def _field_values(curve, dens: DensitySpectrum, pts, lams, alpha, n_max, M, chunk=256):
    """Values at many points; a point whose contour logarithm fails to close gets NaN."""
    A = dens.positive(n_max)
    n_max = len(A)
    n = np.arange(1, n_max + 1)
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    s_all = alpha * np.asarray(lams, dtype=float)
    s_all = np.where(np.isfinite(s_all), s_all, 0.0)  # lambda = inf: any contour works
    u = np.empty(len(pts))
    for lo in range(0, len(pts), chunk):
        s = s_all[lo : lo + chunk]
        h = _contour_h_batch(curve, pts[lo : lo + chunk], s, M)
        ph = np.unwrap(np.angle(h), axis=1)
        closure = ph[:, -1] + np.angle(h[:, 0] / h[:, -1]) - ph[:, 0]
        L = np.log(np.abs(h)) + 1j * ph
        B = -0.5 * sfft.ifft(L, axis=1, workers=-1)[:, 1 : n_max + 1]
        val = dens.mean + 2 * np.real((B * np.exp(-np.outer(s, n))) @ A)
        val[np.abs(closure) > CLOSURE_TOL] = np.nan
        u[lo : lo + chunk] = val
    return u


def evaluate_field(curve: AnalyticCurve, dens: DensitySpectrum, x, alpha=DEFAULT_ALPHA, n_max=None, lam=None, M=None):
    """``u(x) = mean + sum_{n != 0} A_n exp(-|n alpha| lambda) B_n(x, alpha lambda)``.

    ``|alpha| = 1`` puts the contour through the zeros of ``h`` and uses the
    singularity-subtracted coefficients.
    """
    if not 0 <= abs(alpha) <= 1:
        raise ValueError("|alpha| must not exceed 1")
    if n_max is None:
        n_max = dens.n_half - 1
    n_max = min(n_max, dens.n_half)
    if abs(alpha) == 1:
        lr = lam if isinstance(lam, LambdaResult) and len(lam.roots) else lambda_of(curve, x, method="newton")
        if not np.isfinite(lr.lam):
            return evaluate_field(curve, dens, x, 0.0, n_max, lr, M)
        A = dens.positive(n_max)
        n = np.arange(1, len(A) + 1)
        B = b_coefficients_critical(curve, x, len(A), lr, M)
        return float(dens.mean + 2 * np.real(np.sum(A * np.exp(-n * lr.lam) * B)))
    if isinstance(lam, LambdaResult):
        lam = lam.lam
    if lam is None:
        lam = lambda_of(curve, x).lam
    M = M or quadrature_size(n_max, (1 - abs(alpha)) * lam)
    u = float(_field_values(curve, dens, [x], [lam], abs(alpha), n_max, M)[0])
    if np.isnan(u):
        raise BranchJump(f"log h does not close periodically at x={tuple(x)}")
    return u


def log_weight_fourier(x):
    """``int_{-1}^{1} log|t| e^{ixt} dt`` by adaptive oscillatory quadrature."""
    from scipy.integrate import quad

    # log singularity at t = 0 handled by the algebraic-log weight
    val, _ = quad(lambda t: np.cos(x * t), 0.0, 1.0, weight="alg-loga", wvar=(0.0, 0.0), limit=500)
    return 2.0 * val


@dataclass
class FieldGrid:
    xs: np.ndarray
    ys: np.ndarray
    inside: np.ndarray  # shape (len(ys), len(xs)); row 0 is ys[0]
    lam: np.ndarray
    u: np.ndarray
    sign: np.ndarray
    reliable: np.ndarray

    @property
    def spacing(self):
        return float(self.xs[1] - self.xs[0])


def _grid(box, resolution):
    if resolution < 16:
        raise ValueError("resolution must be at least 16")
    x0, x1, y0, y1 = box
    xs = np.linspace(x0, x1, resolution)
    ys = np.linspace(y0, y1, resolution)
    return xs, ys, *np.meshgrid(xs, ys)


def sign_of(u, zero_tol=0.0):
    s = np.sign(u)
    s[np.abs(u) <= zero_tol] = 0
    s[~np.isfinite(u)] = 0
    return s.astype(np.int8)


def build_field_grid(curve: AnalyticCurve, dens: DensitySpectrum, box, resolution, alpha=DEFAULT_ALPHA, n_max=None, zero_tol=0.0):
    """Sample the reconstructed eigenfunction on a regular grid.

    Cells whose truncated tail ``sum_{n > n_max} |A_n| e^{-n lambda}`` is not
    negligible (too close to the boundary for ``n_max``) are marked
    unreliable.  Per-cell failures leave NaN.
    """
    xs, ys, X, Y = _grid(box, resolution)
    inside = points_in_domain(curve, X, Y)
    if n_max is None:
        n_max = dens.n_half - 1
    n_max = min(n_max, dens.n_half)
    lam = np.full(X.shape, np.nan)
    u = np.full(X.shape, np.nan)
    idx = np.nonzero(inside.ravel())[0]
    px, py = X.ravel()[idx], Y.ravel()[idx]
    lam_flat = lam.ravel()
    lam_flat[idx] = lambda_many(curve, px, py)
    u_flat = u.ravel()
    margin = (1 - abs(alpha)) * lam_flat[idx]
    Ms = np.array([quadrature_size(n_max, m) for m in margin])
    resolved = np.ones(X.size, dtype=bool)
    resolved[idx] = ~(margin * M_MAX < 40.0)
    pts = np.column_stack([px, py])
    for M in np.unique(Ms):
        g = Ms == M
        u_flat[idx[g]] = _field_values(curve, dens, pts[g], lam_flat[idx[g]], abs(alpha), n_max, int(M))
    lam = lam_flat.reshape(X.shape)
    u = u_flat.reshape(X.shape)

    tailA = np.abs(dens.A[dens.n_half + n_max + 1 :])
    ntail = np.arange(n_max + 1, n_max + 1 + len(tailA))
    total = np.abs(dens.A).sum() or 1.0
    with np.errstate(over="ignore", invalid="ignore"):
        tail = np.array([np.sum(tailA * np.exp(-ntail * l)) if np.isfinite(l) else np.inf for l in lam.ravel()]).reshape(lam.shape)
        trunc = np.abs(dens.A[dens.n_half + n_max]) * np.exp(-n_max * lam)
    reliable = inside & np.isfinite(u) & (tail + trunc <= 1e-14 * total) & resolved.reshape(X.shape)
    return FieldGrid(xs, ys, inside, lam, u, sign_of(u, zero_tol), reliable)


def map_inverse(fmap, x, y, iters=60):
    """Solve ``f(z) = x + iy`` on the closed disk by Newton from a polar-grid seed."""
    from .conformal import map_eval

    target = np.asarray(x, dtype=float) + 1j * np.asarray(y, dtype=float)
    shape = target.shape
    target = target.ravel()
    rr, tt = np.meshgrid(np.linspace(0, 1, 65), 2 * np.pi * np.arange(256) / 256)
    seeds = (rr * np.exp(1j * tt)).ravel()
    fs = map_eval(fmap, seeds)
    _, nearest = cKDTree(np.column_stack([fs.real, fs.imag])).query(np.column_stack([target.real, target.imag]))
    z = seeds[nearest]
    for _ in range(iters):
        step = (map_eval(fmap, z) - target) / fmap.p(z) ** 2
        z = z - step
        if np.all(np.abs(step) < 1e-15):
            break
    return z.reshape(shape)


def field_grid_from_disk(fmap, uhat, box, resolution, zero_tol=0.0):
    """Grid of ``phi = u o f^{-1}`` using the harmonic extension of the disk eigenvector.

    ``lambda`` is not computed on this path (left NaN).
    """
    from .disk import harmonic_extension

    xs, ys, X, Y = _grid(box, resolution)
    curve = fmap.boundary_curve()
    inside = points_in_domain(curve, X, Y)
    u = np.full(X.shape, np.nan)
    z = map_inverse(fmap, X[inside], Y[inside])
    u[inside] = harmonic_extension(uhat, z).real
    lam = np.full(X.shape, np.nan)
    reliable = inside.copy()
    reliable[inside] = np.abs(z) < 1.0
    return FieldGrid(xs, ys, inside, lam, u, sign_of(u, zero_tol), reliable)
