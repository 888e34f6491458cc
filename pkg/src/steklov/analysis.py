"""Numerical evidence for tunneling, remainder decay and nonvanishing balls.

All statistics work on boundary Fourier coefficients ``uhat`` indexed
``k = -N..N`` (``uhat[N + k]``), as produced by the disk solver.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .disk import DiskSpectrum, eigenspace, rotate_pair
from .errors import NoSignConstantCell
from .reconstruction import FieldGrid

DEFAULT_K = 2.0


def _half(uhat):
    return (len(uhat) - 1) // 2


def band_mass(uhat, m, m0):
    """``A_m = (sum_{k=m-m0}^{m+m0} |uhat(k)|^2)^{1/2}``."""
    N = _half(uhat)
    k = np.arange(max(m - m0, -N), min(m + m0, N) + 1)
    return float(np.sqrt(np.sum(np.abs(uhat[N + k]) ** 2)))


@dataclass
class TunnelingEntry:
    sigma: float
    m: int
    K: float
    A_m: float
    C0: float
    C_low: float
    C0_raw: float  # before clamping at 1
    slope: float  # least-squares slope of log|uhat(k)| against |k - m|


def tunneling_constants(uhat, sigma, m, m0, K=DEFAULT_K) -> TunnelingEntry:
    """Smallest ``C0 >= 1`` with ``|uhat(k)| <= C0^{|k-m|} A_m`` for ``|k| <= K sigma``."""
    uhat = np.asarray(uhat)
    N = _half(uhat)
    nrm = np.linalg.norm(uhat)
    uhat = uhat / nrm if nrm > 0 else uhat
    Am = band_mass(uhat, m, m0)
    k = np.arange(-N, N + 1)
    sel = (k != m) & (np.abs(k) <= K * sigma)
    mag = np.abs(uhat[sel])
    dist = np.abs(k[sel] - m)
    if Am == 0:
        raw = np.inf if np.any(mag > 0) else 1.0
    elif len(mag):
        raw = float(np.max((mag / Am) ** (1.0 / dist)))
    else:
        raw = 0.0
    C0 = max(1.0, raw)
    if Am == 0 and np.any(mag > 0):
        C0 = np.inf
    pos = mag > 0
    slope = np.nan
    if len(np.unique(dist[pos])) >= 3:
        slope = float(np.polyfit(dist[pos], np.log(mag[pos]), 1)[0])
    return TunnelingEntry(float(sigma), m, K, Am, C0, lower_bound_rate(uhat, sigma, m, m0), raw, slope)


def lower_bound_rate(uhat, sigma, m, m0) -> float:
    """``C_low = -ln(A_m / ||uhat||) / sigma`` (``inf`` when ``A_m = 0``, ``0`` at ``sigma = 0``)."""
    uhat = np.asarray(uhat)
    nrm = np.linalg.norm(uhat)
    Am = band_mass(uhat, m, m0) / nrm
    if Am == 0:
        return np.inf
    if sigma == 0:
        return 0.0
    return float(-np.log(Am) / sigma)


@dataclass
class TunnelingReport:
    entries: list = field(default_factory=list)  # one per eigenvalue (worst case over eigenspaces)
    indices: list = field(default_factory=list)

    def block_maxima(self, start=1.0):
        """Maximum ``C0`` over dyadic blocks ``[start 2^i, start 2^{i+1})`` of ``sigma``."""
        sig = np.array([e.sigma for e in self.entries])
        c0 = np.array([e.C0 for e in self.entries])
        out = []
        lo = start
        while lo <= sig.max(initial=0):
            sel = (sig >= lo) & (sig < 2 * lo)
            if sel.any():
                out.append((lo, float(c0[sel].max())))
            lo *= 2
        return out


def _worst_over_rotations(spectrum: DiskSpectrum, j, fn, key):
    cols = eigenspace(spectrum, j)
    if len(cols) == 2:
        vecs = rotate_pair(spectrum.uhat[:, cols[0]], spectrum.uhat[:, cols[1]])
    else:
        vecs = [spectrum.uhat[:, j]]
    vals = [fn(v) for v in vecs]
    return max(vals, key=key)


def tunneling_report(spectrum: DiskSpectrum, m=0, K=DEFAULT_K, sigma_max=None, trusted_only=True) -> TunnelingReport:
    """Per-eigenvalue tunneling statistics, worst case over 2D eigenspaces."""
    rep = TunnelingReport()
    m0 = spectrum.band.m0
    for j, s in enumerate(spectrum.sigma):
        if trusted_only and j > spectrum.j_max:
            break
        if sigma_max is not None and s > sigma_max:
            break
        e = _worst_over_rotations(
            spectrum, j, lambda v: tunneling_constants(v, s, m, m0, K), key=lambda e: (e.C0, e.C_low)
        )
        rep.entries.append(e)
        rep.indices.append(j)
    return rep


@dataclass
class RemainderEntry:
    sigma: float
    delta: float
    m: int
    N: int
    numerator: float
    denominator: float
    ratio: float
    bound: float = np.nan


def remainder_ratio(uhat, sigma, delta, m, N, m0) -> RemainderEntry:
    """Truncation remainder of the harmonic extension on ``B(0, delta)`` relative to the kept part.

    Numerator: coefficient-sum bound ``sum_{|k|>=m} |uhat(k)| |k|^N delta^{|k|-N}``
    on the ``C^N`` norm of the discarded modes.  Denominator: exact
    ``L^2(B(0, delta))`` norm of the kept modes ``|k| < m``.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if N not in (0, 1, 2):
        raise ValueError("N must be 0, 1 or 2")
    uhat = np.asarray(uhat)
    Nh = _half(uhat)
    k = np.abs(np.arange(-Nh, Nh + 1))
    mag = np.abs(uhat)
    tail = k >= m
    num = float(np.sum(mag[tail] * k[tail].astype(float) ** N * delta ** (k[tail] - N)))
    kept = ~tail
    den = float(np.sqrt(np.sum(mag[kept] ** 2 * 2 * np.pi * delta ** (2 * k[kept] + 2) / (2 * k[kept] + 2))))
    ratio = num / den if den > 0 else (0.0 if num == 0 else np.inf)
    return RemainderEntry(float(sigma), float(delta), int(m), int(N), num, den, ratio)


def fit_remainder_bound(entries, m0, c_grid=None):
    """Fit ``C_N (delta^{m-N-m0-1} + exp(-c sigma))`` as the tightest envelope of the ratios.

    For each trial ``c`` the smallest admissible ``C_N`` is taken; the ``c``
    minimizing the mean log-gap between bound and ratio wins.  Fills
    ``entry.bound`` and returns ``(C_N, c)``.
    """
    c_grid = np.linspace(0.01, 5.0, 500) if c_grid is None else c_grid
    ok = [e for e in entries if e.ratio > 0 and np.isfinite(e.ratio)]
    if not ok:
        for e in entries:
            e.bound = 0.0
        return 0.0, np.nan
    best = None
    for c in c_grid:
        shape = np.array([e.delta ** (e.m - e.N - m0 - 1) + np.exp(-c * e.sigma) for e in ok])
        r = np.array([e.ratio for e in ok])
        CN = float(np.max(r / shape))
        gap = float(np.mean(np.log(CN * shape / r)))
        if best is None or gap < best[0]:
            best = (gap, CN, float(c))
    _, CN, c = best
    for e in entries:
        e.bound = CN * (e.delta ** (e.m - e.N - m0 - 1) + np.exp(-c * e.sigma))
    return CN, c


def remainder_slope(uhat, sigma, delta, ms, N, m0):
    """Least-squares slope of ``log10(ratio)`` against ``m``."""
    r = [remainder_ratio(uhat, sigma, delta, m, N, m0).ratio for m in ms]
    return float(np.polyfit(np.asarray(ms, dtype=float), np.log10(r), 1)[0])


@dataclass
class NonvanishingBall:
    center: tuple
    radius: float
    region_center: tuple
    region_radius: float
    sign: int
    min_abs: float


def nonvanishing_ball(grid: FieldGrid, center, radius) -> NonvanishingBall:
    """Largest disk of constant sign inside ``B(center, radius)``, from a Euclidean distance transform.

    The distance of a cell to the nearest cell that is outside the region,
    outside the domain, of the other sign or zero bounds the radius of a
    sign-constant disk around it (to within one grid spacing).
    """
    X, Y = np.meshgrid(grid.xs, grid.ys)
    region = (np.hypot(X - center[0], Y - center[1]) <= radius) & grid.inside & np.isfinite(grid.u)
    hx = grid.xs[1] - grid.xs[0]
    hy = grid.ys[1] - grid.ys[0]
    best = None
    for s in (1, -1):
        mask = region & (grid.sign == s)
        if not mask.any():
            continue
        # pad so the box edge counts as an obstacle
        dist = ndimage.distance_transform_edt(np.pad(mask, 1), sampling=(hy, hx))[1:-1, 1:-1]
        i = np.unravel_index(np.argmax(dist), dist.shape)
        r = float(dist[i])
        if best is None or r > best[0]:
            best = (r, i, s)
    if best is None or best[0] == 0:
        raise NoSignConstantCell("no sign-constant cell in the region at this resolution")
    r, (iy, ix), s = best
    cx, cy = float(grid.xs[ix]), float(grid.ys[iy])
    # reduce by half a cell so the disk sits within the cells actually tested
    r = max(r - 0.5 * max(hx, hy), 0.0)
    inball = np.hypot(X - cx, Y - cy) <= r
    min_abs = float(np.min(np.abs(grid.u[inball]))) if inball.any() else np.nan
    return NonvanishingBall((cx, cy), r, tuple(center), float(radius), int(s), min_abs)
