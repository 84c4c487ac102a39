"""Bessel functions J0, J1 and the radial Fourier kernels for dims 2-5.

J0 and J1 use the power series up to ``SWITCH`` and the Hankel asymptotic
expansion beyond it.  With double-precision series the two branches agree
to about 2e-12 there (the best crossover); see tests/test_bessel.py.
"""
from __future__ import annotations

import math

import numpy as np

SWITCH = 12.5


def _series(x: np.ndarray, nu: int) -> np.ndarray:
    # sum_k (-1)^k (x/2)^(2k+nu) / (k! (k+nu)!)
    half = x / 2.0
    q = -half * half
    term = half**nu / math.factorial(nu)
    total = term.copy()
    for k in range(1, 80):
        term = term * q / (k * (k + nu))
        total += term
        if np.all(np.abs(term) < 1e-18 * np.maximum(1.0, np.abs(total))):
            break
    return total


def _hankel(x: np.ndarray, nu: int) -> np.ndarray:
    mu = 4.0 * nu * nu
    z = 8.0 * x
    p = np.ones_like(x)
    q = np.zeros_like(x)
    term = np.ones_like(x)
    best = np.full_like(x, np.inf)
    live = np.ones(x.shape, dtype=bool)
    for k in range(1, 60):
        term = term * (mu - (2 * k - 1) ** 2) / (k * z)
        mag = np.abs(term)
        # stop each entry once the asymptotic terms start growing
        live &= mag < best
        best = np.where(live, mag, best)
        if k % 2 == 1:
            q = q + np.where(live, term * (-1) ** ((k - 1) // 2), 0.0)
        else:
            p = p + np.where(live, term * (-1) ** (k // 2), 0.0)
        if not live.any() or np.all(mag < 1e-17):
            break
    chi = x - (0.5 * nu + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (p * np.cos(chi) - q * np.sin(chi))


def _jn(x, nu: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = np.empty_like(ax)
    small = ax <= SWITCH
    if small.any():
        out[small] = _series(ax[small], nu)
    if (~small).any():
        out[~small] = _hankel(ax[~small], nu)
    if nu % 2 == 1:
        out = np.where(x < 0, -out, out)
    return out


def j0(x) -> np.ndarray:
    return _jn(x, 0)


def j1(x) -> np.ndarray:
    return _jn(x, 1)


def sphere_area(n: int) -> float:
    """|S^(n-1)| = 2 pi^(n/2) / Gamma(n/2)."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def radial_kernel(n: int, z) -> np.ndarray:
    """K_n(z) = (2 pi)^(n/2) z^(1-n/2) J_{n/2-1}(z), so that

        f^(xi) = int_0^inf f(r) r^(n-1) K_n(|xi| r) dr

    for a radial f on R^n.  K_n(0) = |S^(n-1)|.
    """
    z = np.asarray(z, dtype=float)
    if n == 2:
        return 2.0 * math.pi * j0(z)
    if n == 3:
        with np.errstate(invalid="ignore", divide="ignore"):
            s = np.where(z == 0, 1.0, np.sin(z) / np.where(z == 0, 1.0, z))
        return 4.0 * math.pi * s
    if n == 4:
        small = np.abs(z) < 1e-3
        zz = np.where(small, 1.0, z)
        val = np.where(small, 0.5 - z * z / 16.0, j1(zz) / zz)
        return 4.0 * math.pi**2 * val
    if n == 5:
        small = np.abs(z) < 0.05
        zz = np.where(small, 1.0, z)
        z2 = z * z
        series = 1.0 / 3.0 - z2 / 30.0 + z2 * z2 / 840.0 - z2**3 / 45360.0
        val = np.where(small, series, (np.sin(zz) - zz * np.cos(zz)) / zz**3)
        return 8.0 * math.pi**2 * val
    raise ValueError(f"radial kernel implemented for n in 2..5, got {n}")
