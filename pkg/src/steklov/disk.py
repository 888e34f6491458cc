"""Pulled-back Steklov problem on the unit disk for band-limited maps.

With ``u = phi o f`` the boundary condition becomes ``d_r u = sigma |f'| u``
on the circle.  In Fourier variables this reads

    |n| u(n) = sigma * sum_m a_m u(n - m),

a pencil ``D u = sigma A u`` with ``D = diag(|n|)`` and ``A`` the Hermitian
banded Toeplitz matrix of the band coefficients.  ``A`` is positive definite
because ``|f'| > 0`` on the circle.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .conformal import BandCoefficients
from .errors import NotPositiveDefinite

TRUST_TOL = 1e-10
CLUSTER_TOL = 1e-8


def assemble_pencil(a: BandCoefficients, N_tr: int):
    """``(D, A)`` on modes ``n = -N_tr..N_tr``."""
    if a.a0 <= 0:
        raise NotPositiveDefinite("a_0 must be positive")
    if N_tr <= 4 * a.m0:
        raise ValueError("truncation must exceed four times the bandwidth")
    n = np.arange(-N_tr, N_tr + 1)
    D = np.diag(np.abs(n).astype(float))
    col = np.zeros(2 * N_tr + 1, dtype=complex)
    col[: a.m0 + 1] = a.a[a.m0:]
    A = sla.toeplitz(col, np.conj(col))  # A[n, k] = a_{n-k}
    try:
        sla.cholesky(A, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("band matrix is not positive definite") from exc
    return D, A


_S = 1 / np.sqrt(2)


def _to_real(M, N_tr):
    """``Q^H M Q`` where Q maps the real basis (1, sqrt2 cos k, sqrt2 sin k) to exp(ik theta) coefficients."""
    k = np.arange(1, N_tr + 1)
    p, m = N_tr + k, N_tr - k

    def cols(X):
        Y = np.empty(X.shape, dtype=complex)
        Y[:, 0] = X[:, N_tr]
        Y[:, 1::2] = _S * (X[:, p] + X[:, m])
        Y[:, 2::2] = _S * (-1j * X[:, p] + 1j * X[:, m])
        return Y

    MQ = cols(M)
    R = np.empty(M.shape, dtype=complex)
    R[0] = MQ[N_tr]
    R[1::2] = _S * (MQ[p] + MQ[m])
    R[2::2] = _S * (1j * MQ[p] - 1j * MQ[m])
    return R


def _from_real(c, N_tr):
    k = np.arange(1, N_tr + 1)
    u = np.empty(c.shape, dtype=complex)
    u[N_tr] = c[0]
    u[N_tr + k] = _S * (c[1::2] - 1j * c[2::2])
    u[N_tr - k] = _S * (c[1::2] + 1j * c[2::2])
    return u


def _solve(a: BandCoefficients, N_tr: int, vectors=True):
    D, A = assemble_pencil(a, N_tr)
    Dr = _to_real(D, N_tr).real
    Ar = _to_real(A, N_tr).real
    Ar = 0.5 * (Ar + Ar.T)
    if not vectors:
        return np.maximum(sla.eigh(Dr, Ar, eigvals_only=True), 0.0), None
    sigma, c = sla.eigh(Dr, Ar)
    c /= np.linalg.norm(c, axis=0)
    i = 0
    while i < len(sigma):
        j = i + 1
        while j < len(sigma) and sigma[j] - sigma[i] <= CLUSTER_TOL * (1 + sigma[i]):
            j += 1
        if j - i > 1:
            c[:, i:j], _ = np.linalg.qr(c[:, i:j])
        i = j
    return np.maximum(sigma, 0.0), _from_real(c, N_tr)


@dataclass
class DiskSpectrum:
    N_tr: int
    sigma: np.ndarray
    uhat: np.ndarray  # column j holds u_j(n) for n = -N_tr..N_tr
    j_max: int
    band: BandCoefficients

    @property
    def modes(self):
        return np.arange(-self.N_tr, self.N_tr + 1)

    @property
    def trusted(self):
        return np.arange(len(self.sigma)) <= self.j_max

    def coefficient(self, j, k):
        if abs(k) > self.N_tr:
            return 0.0
        return self.uhat[self.N_tr + k, j]


def default_truncation(a: BandCoefficients, sigma_target: float) -> int:
    # eigenvector mass sits at |k| up to about sigma * max|f'|
    stretch = float(np.max(a.evaluate(2 * np.pi * np.arange(1024) / 1024)))
    return int(max(np.ceil(2 * sigma_target * stretch), 4 * a.m0 + 1, 256))


def solve_disk(a: BandCoefficients, N_tr: int | None = None, sigma_target=30.0, trust_check=True) -> DiskSpectrum:
    """Generalized Hermitian-definite solve, with a doubled-truncation trust check."""
    if N_tr is None:
        N_tr = default_truncation(a, sigma_target)
    sigma, uhat = _solve(a, N_tr)
    if trust_check:
        fine, _ = _solve(a, 2 * N_tr, vectors=False)
        moved = np.abs(fine[: len(sigma)] - sigma) >= TRUST_TOL
        j_max = int(np.argmax(moved)) - 1 if moved.any() else len(sigma) - 1
    else:
        j_max = len(sigma) - 1
    return DiskSpectrum(N_tr, sigma, uhat, j_max, a)


def pullback_fourier(spectrum: DiskSpectrum, j: int):
    """Boundary Fourier coefficients ``u_j(k)``, indexed by ``spectrum.modes``."""
    return spectrum.uhat[:, j].copy()


def harmonic_extension(uhat, z, N_tr=None):
    """``sum_k u(k) r^|k| e^{ik theta}`` at complex points ``z`` of the closed disk."""
    uhat = np.asarray(uhat)
    N = (len(uhat) - 1) // 2 if N_tr is None else N_tr
    z = np.asarray(z, dtype=complex)
    pos = uhat[N:][::-1]  # k = N..0
    neg = np.concatenate([uhat[:N], [0]])  # z-bar powers N..1, then the constant slot
    val = np.polyval(pos, z) + np.polyval(neg, np.conj(z))
    return val


def rotate_pair(v1, v2, n_angles=32):
    """Unit vectors ``cos(a) v1 + sin(a) v2`` over ``a`` in ``[0, pi)``."""
    ang = np.pi * np.arange(n_angles) / n_angles
    return [np.cos(t) * v1 + np.sin(t) * v2 for t in ang]


def eigenspace(spectrum: DiskSpectrum, j: int, tol=CLUSTER_TOL):
    """Column indices of the eigenvalue cluster containing ``j``."""
    s = spectrum.sigma
    return [i for i in range(len(s)) if abs(s[i] - s[j]) <= tol * (1 + s[j])]
