"""Smoothed spectral cutoff h and the composite g(u) = h(sqrt u).

With phi an even plateau bump (1 on [-1/2, 1/2], 0 outside [-1, 1]) and
window width w = lambda^(1 - eta - eps),

    h(tau) = (1/pi) int phi(t w) sin(lambda t)/t cos(t tau) dt
           = Phi((tau + lambda)/w) - Phi((tau - lambda)/w),

    Phi(s)   = 1/2 + (1/pi) int_0^1 phi(t) sin(s t)/t dt,
    kappa(s) = Phi'(s) = (1/pi) int_0^1 phi(t) cos(s t) dt,

so h = 1_[-lambda, lambda] * kappa_w.  Derivatives follow from
Phi^(d)(s) = (1/pi) int_0^1 phi(t) t^(d-1) cos(s t + (d-1) pi/2) dt.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .potential import plateau_bump
from .quadrature import composite_gauss

# beyond this |s| Phi is replaced by its plateau value and derivatives by 0
S_CUTOFF = 1500.0
MAX_ORDER = 16
_TAYLOR_TERMS = 8
# below SERIES_SWITCH * w the closed forms for g', g'' lose digits to cancellation
SERIES_SWITCH = 0.05


class MollifierConfigError(ValueError):
    pass


def default_epsilon(eta: float) -> float:
    return min(eta, 1.0 - eta) / 20.0


@lru_cache(maxsize=1)
def _phi_rule():
    # 1/2 <= t <= 1 carries the smooth step; the plateau part is analytic
    t, w = composite_gauss(np.linspace(0.0, 1.0, 161), 20)
    t.setflags(write=False)
    pw = w * plateau_bump(t, 1.0)
    pw.setflags(write=False)
    return t, pw


def Phi(s, order: int = 0) -> np.ndarray:
    """Phi^(order)(s); Phi^(0) tends to 0 and 1 at -inf and +inf."""
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"derivative order must lie in 0..{MAX_ORDER}")
    s = np.asarray(s, dtype=float)
    flat = s.ravel()
    out = np.empty_like(flat)
    far = np.abs(flat) > S_CUTOFF
    if order == 0:
        out[far] = (flat[far] > 0).astype(float)
    else:
        out[far] = 0.0
    near = np.flatnonzero(~far)
    t, pw = _phi_rule()
    if order == 0:
        wt = pw / t
    else:
        wt = pw * t ** (order - 1)
    shift = (order - 1) * math.pi / 2
    for i in range(0, len(near), 2048):
        idx = near[i : i + 2048]
        arg = flat[idx, None] * t[None, :]
        if order == 0:
            out[idx] = 0.5 + (np.sin(arg) @ wt) / math.pi
        else:
            out[idx] = (np.cos(arg + shift) @ wt) / math.pi
    return out.reshape(s.shape)


def kappa(s) -> np.ndarray:
    return Phi(s, 1)


@dataclass(frozen=True)
class MollifierSpec:
    lam: float
    eta: float
    epsilon: float | None = None

    def __post_init__(self):
        if not 0 < self.eta < 1:
            raise MollifierConfigError("eta in (0,1) required")
        if self.lam <= 0:
            raise MollifierConfigError("lambda must be positive")
        if self.epsilon is None:
            object.__setattr__(self, "epsilon", default_epsilon(self.eta))
        if not 0 < self.epsilon < min(self.eta, 1 - self.eta) / 10:
            raise MollifierConfigError("epsilon in (0, min(eta, 1-eta)/10) required")
        # the window must satisfy 1 <= w <= lambda/2 once lambda >= 4
        if self.lam >= 4 and not 1.0 <= self.width <= self.lam / 2:
            raise MollifierConfigError(f"window width {self.width:g} outside [1, lambda/2]")

    @property
    def width(self) -> float:
        return self.lam ** (1.0 - self.eta - self.epsilon)

    def h(self, tau, order: int = 0) -> np.ndarray:
        """h^(order)(tau)."""
        tau = np.asarray(tau, dtype=float)
        w = self.width
        return (Phi((tau + self.lam) / w, order) - Phi((tau - self.lam) / w, order)) / w**order

    __call__ = h

    @property
    def taylor_at_zero(self) -> np.ndarray:
        """Coefficients c_m = h^(2m)(0)/(2m)! so that g(u) = sum c_m u^m near 0."""
        return _taylor(self.lam, self.eta, self.epsilon)

    def g(self, u, order: int = 0) -> np.ndarray:
        """g^(order)(u) for g(u) = h(sqrt u), u >= 0, order in 0..2."""
        u = np.maximum(np.asarray(u, dtype=float), 0.0)
        tau = np.sqrt(u)
        if order == 0:
            return self.h(tau)
        if order not in (1, 2):
            raise ValueError("g derivatives implemented for order <= 2")
        small = tau < SERIES_SWITCH * self.width
        tt = np.where(small, 1.0, tau)
        h1 = self.h(tt, 1)
        if order == 1:
            big = h1 / (2 * tt)
        else:
            big = (self.h(tt, 2) - h1 / tt) / (4 * tt * tt)
        c = self.taylor_at_zero
        m = np.arange(len(c))
        if order == 1:
            ser = sum(c[k] * k * u ** (k - 1) for k in m[1:])
        else:
            ser = sum(c[k] * k * (k - 1) * u ** (k - 2) for k in m[2:])
        return np.where(small, ser, big)


@lru_cache(maxsize=256)
def _taylor(lam: float, eta: float, epsilon: float) -> np.ndarray:
    spec = MollifierSpec(lam, eta, epsilon)
    return np.array([float(spec.h(0.0, 2 * m)) / math.factorial(2 * m) for m in range(_TAYLOR_TERMS)])


def sharp_cutoff(lam: float):
    """Indicator 1_[0, lambda] as a g-evaluator; no derivatives."""

    def g(u, order: int = 0):
        if order:
            raise ValueError("the sharp cutoff has no derivatives")
        return (np.asarray(u, dtype=float) <= lam * lam).astype(float)

    return g
