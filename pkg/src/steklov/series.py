"""Truncated Taylor series about the origin.

Only what the square-root construction needs: products, quotients,
term-wise differentiation/integration, log and exp.  All operations keep the
truncation order of the shortest operand.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroAtOrigin

ZERO_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class PowerSeries:
    """Coefficients ``c[0] + c[1] z + ... + c[order] z**order``."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=complex).ravel())

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, k):
        return self.coeffs[k]

    def truncate(self, order: int) -> "PowerSeries":
        c = np.zeros(order + 1, dtype=complex)
        m = min(order + 1, len(self.coeffs))
        c[:m] = self.coeffs[:m]
        return PowerSeries(c)

    def __call__(self, z):
        return np.polyval(self.coeffs[::-1], z)

    def __add__(self, other):
        n = min(len(self), len(other))
        return PowerSeries(self.coeffs[:n] + other.coeffs[:n])

    def __sub__(self, other):
        n = min(len(self), len(other))
        return PowerSeries(self.coeffs[:n] - other.coeffs[:n])

    def __mul__(self, other):
        if np.isscalar(other):
            return PowerSeries(self.coeffs * other)
        n = min(len(self), len(other))
        return PowerSeries(np.convolve(self.coeffs[:n], other.coeffs[:n])[:n])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if np.isscalar(other):
            return PowerSeries(self.coeffs / other)
        n = min(len(self), len(other))
        a, b = self.coeffs[:n], other.coeffs[:n]
        if abs(b[0]) < ZERO_TOL:
            raise ZeroAtOrigin("division by a series vanishing at the origin")
        q = np.zeros(n, dtype=complex)
        for k in range(n):
            q[k] = (a[k] - np.dot(q[:k], b[k:0:-1])) / b[0]
        return PowerSeries(q)

    def deriv(self) -> "PowerSeries":
        k = np.arange(1, len(self))
        return PowerSeries(self.coeffs[1:] * k if len(self) > 1 else [0.0])

    def integ(self, const=0.0) -> "PowerSeries":
        k = np.arange(1, len(self) + 1)
        return PowerSeries(np.concatenate([[const], self.coeffs / k]))


def log_series(g: PowerSeries) -> PowerSeries:
    """``int_0^z g'/g + log g(0)`` with the principal value of ``log g(0)``."""
    if abs(g[0]) < ZERO_TOL:
        raise ZeroAtOrigin("log of a series vanishing at the origin")
    return (g.deriv() / g.truncate(g.order - 1) if g.order > 0 else PowerSeries([0.0])).integ(np.log(g[0])).truncate(g.order)


def exp_series(h: PowerSeries) -> PowerSeries:
    # w' = h' w  =>  n w_n = sum_{k=1}^n k h_k w_{n-k}
    n = len(h)
    w = np.zeros(n, dtype=complex)
    w[0] = np.exp(h[0])
    kh = np.arange(n) * h.coeffs
    for m in range(1, n):
        w[m] = np.dot(kh[1 : m + 1], w[m - 1 :: -1][:m]) / m
    return PowerSeries(w)


def sqrt_series(g: PowerSeries, N: int) -> PowerSeries:
    """Taylor coefficients of ``w = exp(log(g)/2)`` through ``z**N``.

    ``w(0)`` is the principal square root of ``g(0)``; the branch elsewhere
    follows by analytic continuation of the series logarithm.
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    g = g.truncate(N)
    return exp_series(log_series(g) * 0.5)
