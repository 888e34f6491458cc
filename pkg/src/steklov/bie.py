"""Nystrom discretization of the single-layer Steklov eigenproblem.

The boundary operators are

    S[phi](x) = int G(x, y) phi(y) ds(y),     G = -log|x - y| / (2 pi)
    T[phi](x) = int dG/dnu(x) phi(y) ds(y)

sampled at ``t_j = 2 pi j / n``.  The logarithmic singularity of ``S`` is
split off as ``log(4 sin^2((t - tau)/2))`` and integrated exactly against the
trigonometric interpolant; the rest uses the trapezoid rule.  The kernel of
``T`` is smooth on an analytic curve, so plain trapezoid with the curvature
limit on the diagonal is spectrally accurate.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .curves import AnalyticCurve, point_in_domain
from .errors import DegenerateCurve, OutsideDomain, SingularRHS, TooFewConverged

IMAG_TOL = 1e-8
RESIDUAL_TOL = 1e-8
CLUSTER_TOL = 1e-8
COND_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class NystromSystem:
    curve: AnalyticCurve
    n_nodes: int
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    speed: np.ndarray
    S_mat: np.ndarray
    T_mat: np.ndarray
    W: np.ndarray

    @property
    def weights(self):
        return np.full(self.n_nodes, 2 * np.pi / self.n_nodes)

    def mean(self, density):
        """Arclength-weighted average of nodal values."""
        return self.W[0] @ density


def kress_log_weights(n: int) -> np.ndarray:
    """Circulant weights ``R[i, j]`` with ``sum_j R[i, j] f(t_j) ~ int log(4 sin^2((t_i - tau)/2)) f(tau) dtau``."""
    m = np.arange(1, n // 2)
    tau = 2 * np.pi * np.arange(n) / n
    row = -(4 * np.pi / n) * (np.cos(np.outer(tau, m)) / m).sum(axis=1) - (4 * np.pi / n**2) * np.cos(n * tau / 2)
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return row[idx]


def assemble(curve: AnalyticCurve, n_nodes: int) -> NystromSystem:
    if n_nodes % 2 or n_nodes < 16:
        raise ValueError("n_nodes must be even and at least 16")
    t, x, y, dx, dy, ddx, ddy = curve.samples(n_nodes)
    J = np.hypot(dx, dy)
    if np.any(J <= 1e-14 * J.max()):
        raise DegenerateCurve("|C'(t)| vanishes at a node")
    nx, ny = dy / J, -dx / J
    h = 2 * np.pi / n_nodes

    DX = x[:, None] - x[None, :]
    DY = y[:, None] - y[None, :]
    R2 = DX**2 + DY**2
    diag = np.diag_indices(n_nodes)
    sin2 = 4 * np.sin((t[:, None] - t[None, :]) / 2) ** 2
    sin2[diag] = 1.0
    L = np.log(np.where(R2 > 0, R2, 1.0) / sin2)
    L[diag] = np.log(J**2)
    S = -(1 / (4 * np.pi)) * (kress_log_weights(n_nodes) + h * L) * J[None, :]

    R2[diag] = 1.0
    K = -(1 / (2 * np.pi)) * (DX * nx[:, None] + DY * ny[:, None]) / R2
    K[diag] = (ddx * dy - ddy * dx) / (4 * np.pi * J**3)
    T = K * (h * J)[None, :]

    wJ = h * J
    W = np.tile(wJ / wJ.sum(), (n_nodes, 1))
    return NystromSystem(curve, n_nodes, t, x, y, J, S, T, W)


@dataclass
class SteklovSpectrum:
    sigma: np.ndarray
    densities: np.ndarray  # column j is the density of sigma[j]
    residuals: np.ndarray
    formulation: str
    system: NystromSystem | None = None

    def __len__(self):
        return len(self.sigma)


def pencil(system: NystromSystem, formulation="regularized"):
    n = system.n_nodes
    I = np.eye(n)
    half_T = 0.5 * I + system.T_mat
    if formulation == "regularized":
        P = I - system.W
        return half_T @ P, system.S_mat @ P + system.W
    if formulation == "naive":
        return half_T, system.S_mat
    raise ValueError(f"unknown formulation {formulation!r}")


def _orthonormalize_clusters(sigma, vecs):
    i = 0
    while i < len(sigma):
        j = i + 1
        while j < len(sigma) and sigma[j] - sigma[i] <= CLUSTER_TOL * (1 + abs(sigma[i])):
            j += 1
        if j - i > 1:
            q, _ = np.linalg.qr(vecs[:, i:j])
            vecs[:, i:j] = q
        i = j
    return vecs


def solve_steklov(system: NystromSystem, formulation="regularized", n_keep=None) -> SteklovSpectrum:
    """Solve ``LHS phi = sigma RHS phi`` by LU on RHS and a dense eigensolve."""
    lhs, rhs = pencil(system, formulation)
    if formulation == "naive" and np.linalg.cond(rhs) > COND_LIMIT:
        raise SingularRHS("single-layer matrix is numerically singular (logarithmic capacity near one?)")
    lu = sla.lu_factor(rhs)
    M = sla.lu_solve(lu, lhs)
    vals, vecs = np.linalg.eig(M)

    keep = np.abs(vals.imag) <= IMAG_TOL * (1 + np.abs(vals))
    vals, vecs = vals[keep].real, vecs[:, keep]
    # real eigenvalue of a real matrix: rotate the eigenvector to be real
    piv = vecs[np.argmax(np.abs(vecs), axis=0), np.arange(vecs.shape[1])]
    vecs = (vecs * (np.abs(piv) / piv)[None, :]).real
    vecs /= np.linalg.norm(vecs, axis=0)

    scale_l = np.linalg.norm(lhs, np.inf)
    scale_r = np.linalg.norm(rhs, np.inf)
    res = np.linalg.norm(lhs @ vecs - (rhs @ vecs) * vals[None, :], axis=0) / (scale_l + np.abs(vals) * scale_r)
    keep = (res <= RESIDUAL_TOL) & (vals >= -IMAG_TOL)
    vals, vecs, res = vals[keep], vecs[:, keep], res[keep]
    order = np.argsort(vals)
    vals, vecs, res = vals[order], vecs[:, order], res[order]
    vals = np.maximum(vals, 0.0)
    if n_keep is not None:
        if len(vals) < n_keep:
            raise TooFewConverged(f"only {len(vals)} eigenpairs passed the filters, {n_keep} requested")
        vals, vecs, res = vals[:n_keep], vecs[:, :n_keep], res[:n_keep]
    vecs = _orthonormalize_clusters(vals, vecs.copy())
    return SteklovSpectrum(vals, vecs, res, formulation, system)


def steklov_eigenvalues(curve, n_nodes, n_keep=None, formulation="regularized"):
    return solve_steklov(assemble(curve, n_nodes), formulation, n_keep)


def trusted_mask(curve, n_nodes, sigma, tol=1e-8, formulation="regularized"):
    """Flag eigenvalues that agree with a half-resolution solve to ``tol``."""
    coarse = solve_steklov(assemble(curve, n_nodes // 2), formulation).sigma
    k = min(len(coarse), len(sigma))
    mask = np.zeros(len(sigma), dtype=bool)
    mask[:k] = np.abs(np.asarray(sigma)[:k] - coarse[:k]) < tol * (1 + np.abs(np.asarray(sigma)[:k]))
    # once convergence is lost higher entries are not trusted either
    bad = np.nonzero(~mask)[0]
    if len(bad):
        mask[bad[0]:] = False
    return mask


def interior_eval_direct(system: NystromSystem, density, x, check_inside=True) -> float:
    """Kress potential ``u(x) = mean + int G(x, y) (phi - mean) ds`` by the trapezoid rule.

    Accurate only where ``|u|`` is well above round-off relative to the
    density; exponentially small interior values are lost to cancellation.
    """
    density = np.asarray(density, dtype=float)
    if check_inside and not point_in_domain(system.curve, x):
        raise OutsideDomain(f"point {tuple(x)} is outside the domain")
    r2 = (x[0] - system.x) ** 2 + (x[1] - system.y) ** 2
    h = 2 * np.pi / system.n_nodes
    i = int(np.argmin(r2))
    if np.sqrt(r2[i]) < 5 * h * system.speed[i]:
        warnings.warn("evaluation point is close to the boundary; trapezoid rule loses accuracy", stacklevel=2)
    mean = system.mean(density)
    return float(mean - (h / (4 * np.pi)) * np.sum(np.log(r2) * (density - mean) * system.speed))
