"""Radial singular potentials on the flat torus and their Fourier coefficients.

The potential is

    V(x) = gamma * d(x, x0)^(-2 + eta) * bump(d(x, x0)),   0 < eta < 1,

with d the flat-torus distance on [0, 2 pi)^n and a bump supported in
[0, a), a < pi, so the periodization is single valued.  Two bumps exist:

* ``rho``: plateau bump, 1 on [0, a/2], smooth exponential step to 0 at a.
* ``chi``: normalized self-convolution of a plateau bump of radius a/2 in
  R^n.  Its n-dimensional Fourier transform is |b^|^2 >= 0, which makes
  the transform of V strictly positive.

Matrix elements use orthonormal exponentials e_j = (2 pi)^(-n/2) e^{i j.x},
so V_jk = (2 pi)^(-n) V^(j - k) with V^ the Fourier transform over R^n.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
import threading
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from .bessel import radial_kernel, sphere_area
from .lattice import LatticePoint, shell_multiplicity
from .quadrature import composite_gauss, radial_rule

VARIANTS = ("rho", "chi")


class SingularPointError(ValueError):
    """Evaluation requested at the singular center."""


class QuadratureAccuracyError(ArithmeticError):
    """Estimated quadrature error exceeds the configured tolerance."""

    def __init__(self, message: str, estimate: float):
        super().__init__(message)
        self.estimate = estimate


def smooth_step(x):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1, built from exp(-1/x)."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    pos = x > 0
    neg = x < 1
    f = np.zeros_like(x)
    g = np.zeros_like(x)
    f[pos] = np.exp(-1.0 / x[pos])
    g[neg] = np.exp(-1.0 / (1.0 - x[neg]))
    return f / (f + g)


def plateau_bump(r, a: float):
    """1 on [0, a/2], smooth decay to 0 at a, 0 beyond; even in r."""
    r = np.abs(np.asarray(r, dtype=float))
    return np.where(r <= 0.5 * a, 1.0, smooth_step((a - r) / (0.5 * a)))


@lru_cache(maxsize=16)
def _chi_rule(a: float):
    b = 0.5 * a
    s_edges = np.concatenate([np.linspace(0.0, b / 2, 3), np.linspace(b / 2, b, 9)[1:]])
    s, ws = composite_gauss(s_edges, 16)
    th, wt = composite_gauss(np.linspace(0.0, math.pi, 13), 16)
    return s, ws, th, wt


def _autocorrelation(r: np.ndarray, dim: int, a: float) -> np.ndarray:
    # A(r) = |S^(n-2)| int_0^b bump(s) s^(n-1) int_0^pi bump(|x - y|) sin^(n-2) th dth ds
    b = 0.5 * a
    s, ws, th, wt = _chi_rule(a)
    bs = plateau_bump(s, b) * s ** (dim - 1) * ws
    ang = np.sin(th) ** (dim - 2) * wt
    cos_th = np.cos(th)
    out = np.empty(len(r))
    for i in range(0, len(r), 64):
        rr = r[i : i + 64, None, None]
        dist = np.sqrt(np.maximum(rr**2 + s[None, :, None] ** 2
                                  - 2 * rr * s[None, :, None] * cos_th[None, None, :], 0.0))
        inner = (plateau_bump(dist, b) * ang).sum(axis=2)
        out[i : i + 64] = (inner * bs).sum(axis=1)
    return sphere_area(dim - 1) * out


@lru_cache(maxsize=8)
def _chi_norm(dim: int, a: float) -> float:
    return float(_autocorrelation(np.zeros(1), dim, a)[0])


@dataclass(frozen=True)
class BumpProfile:
    support_radius: float = 1.0
    variant: str = "rho"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"bump variant must be one of {VARIANTS}")
        if not 0 < self.support_radius < math.pi:
            raise ValueError("bump support radius must lie in (0, pi)")

    def __call__(self, r, dim: int) -> np.ndarray:
        r = np.abs(np.atleast_1d(np.asarray(r, dtype=float)))
        a = self.support_radius
        if self.variant == "rho":
            return plateau_bump(r, a)
        out = np.zeros_like(r)
        inside = r < a
        if inside.any():
            out[inside] = _autocorrelation(r[inside], dim, a) / _chi_norm(dim, a)
        return out


@dataclass(frozen=True)
class RadialSingularPotential:
    dim: int
    eta: float
    gamma: float = 1.0
    bump: BumpProfile = field(default_factory=BumpProfile)
    center: tuple = ()

    def __post_init__(self):
        if self.dim not in (2, 3, 4, 5):
            raise ValueError("dim must be in 2..5")
        if not 0 < self.eta < 1:
            raise ValueError("eta in (0,1) required")
        if not self.center:
            object.__setattr__(self, "center", (0.0,) * self.dim)
        if len(self.center) != self.dim:
            raise ValueError("center has wrong dimension")
        object.__setattr__(self, "center", tuple(float(c) % (2 * math.pi) for c in self.center))

    def radial(self, r) -> np.ndarray:
        """gamma r^(-2+eta) bump(r) for r > 0."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        return self.gamma * r ** (-2.0 + self.eta) * self.bump(r, self.dim)

    def params(self) -> dict:
        return {"dim": self.dim, "eta": self.eta, "gamma": self.gamma,
                "bump": asdict(self.bump), "center": list(self.center)}


def torus_distance(x, y) -> float:
    """Flat distance on R^n / 2 pi Z^n (coordinate-wise wrapped difference)."""
    d = (np.asarray(x, dtype=float) - np.asarray(y, dtype=float) + math.pi) % (2 * math.pi) - math.pi
    return float(np.sqrt((d * d).sum()))


def eval_potential(V: RadialSingularPotential, x) -> float:
    d = torus_distance(x, V.center)
    if d == 0.0:
        raise SingularPointError("potential is singular at its center")
    return float(V.radial(d)[0])


# ---------------------------------------------------------------------------
# Fourier transform


@dataclass(frozen=True)
class QuadratureSettings:
    order: int = 16
    grading_power: float | None = None  # default 1 / max(eta, 0.25)
    tolerance: float = 1e-8
    min_panels: int = 8
    nodes_per_period: float = 10.0

    def power(self, eta: float) -> float:
        return self.grading_power or 1.0 / max(eta, 0.25)


def _envelope_scale(V: RadialSingularPotential, xi):
    alpha = V.dim - 2 + V.eta
    return abs(V.gamma) * sphere_area(V.dim) * (1.0 + np.asarray(xi, dtype=float)) ** (-alpha)


def radial_fourier(f, dim: int, xi, upper: float, power: float, panels: int, order: int = 16) -> np.ndarray:
    """int_0^upper f(r) r^(n-1) K_n(|xi| r) dr on the graded rule r = upper u^power."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    r, w = radial_rule(upper, power, panels, order)
    fw = f(r) * r ** (dim - 1) * w
    out = np.empty(len(xi))
    for i in range(0, len(xi), 256):
        out[i : i + 256] = radial_kernel(dim, xi[i : i + 256, None] * r[None, :]) @ fw
    return out


def _transform(V: RadialSingularPotential, xi: np.ndarray, panels: int,
               settings: QuadratureSettings) -> np.ndarray:
    return radial_fourier(V.radial, V.dim, xi, V.bump.support_radius, settings.power(V.eta),
                          panels, settings.order)


def fourier_values(V: RadialSingularPotential, xi_norms, settings: QuadratureSettings | None = None,
                   check: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """V^(xi) = int_{R^n} V(x) e^{-i xi.x} dx for radial |xi| values.

    Radial reduction against K_n, graded substitution r = a u^p at the
    singular endpoint, uniform panels sized for `nodes_per_period` nodes per
    kernel period at the largest |xi|.  The error estimate is the change
    between P and 2P panels; the 2P value is returned.
    """
    settings = settings or QuadratureSettings()
    xi = np.atleast_1d(np.asarray(xi_norms, dtype=float))
    if V.gamma == 0:
        return np.zeros(len(xi)), np.zeros(len(xi))
    periods = xi.max(initial=0.0) * V.bump.support_radius * settings.power(V.eta) / (2 * math.pi)
    panels = max(settings.min_panels, math.ceil(settings.nodes_per_period * periods / settings.order))
    coarse = _transform(V, xi, panels, settings)
    fine = _transform(V, xi, 2 * panels, settings)
    err = np.abs(fine - coarse)
    if check:
        bad = err > settings.tolerance * np.maximum(np.abs(fine), _envelope_scale(V, xi))
        if bad.any():
            i = int(np.argmax(bad))
            raise QuadratureAccuracyError(
                f"Fourier quadrature error {err[i]:.3e} at |xi|={xi[i]:.6g} above tolerance", float(err[i]))
    return fine, err


def fourier_value(V: RadialSingularPotential, xi_norm: float,
                  settings: QuadratureSettings | None = None) -> tuple[float, float]:
    v, e = fourier_values(V, [xi_norm], settings)
    return float(v[0]), float(e[0])


class FourierTable:
    """Cache of V^(xi) for lattice offsets, keyed by the integer |xi|^2.

    Extension is guarded by a lock so concurrent readers see either the old
    or the extended table.
    """

    def __init__(self, potential: RadialSingularPotential | None, settings: QuadratureSettings | None = None,
                 *, dim: int | None = None, constant: float | None = None):
        self.potential = potential
        self.settings = settings or QuadratureSettings()
        self.dim = potential.dim if potential is not None else dim
        self.eta = potential.eta if potential is not None else None
        self._constant = constant
        self._values: dict[int, tuple[float, float]] = {}
        self._lock = threading.Lock()

    @classmethod
    def constant(cls, dim: int, c: float) -> "FourierTable":
        """Table of the constant potential V = c (only the zero mode)."""
        return cls(None, dim=dim, constant=float(c))

    @property
    def is_zero(self) -> bool:
        if self._constant is not None:
            return self._constant == 0
        return self.potential.gamma == 0

    def fingerprint(self) -> str:
        if self._constant is not None:
            payload = {"constant": self._constant, "dim": self.dim}
        else:
            payload = {"potential": self.potential.params(), "quadrature": asdict(self.settings)}
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]

    def ensure(self, norm_sqs) -> None:
        need = sorted({int(m) for m in np.atleast_1d(norm_sqs)} - self._values.keys())
        if not need:
            return
        with self._lock:
            need = [m for m in need if m not in self._values]
            if not need:
                return
            if self._constant is not None:
                zero = self._constant * (2 * math.pi) ** self.dim
                new = {m: ((zero if m == 0 else 0.0), 0.0) for m in need}
            else:
                vals, errs = fourier_values(self.potential, np.sqrt(np.asarray(need, dtype=float)), self.settings)
                new = {m: (float(v), float(e)) for m, v, e in zip(need, vals, errs)}
            merged = dict(self._values)
            merged.update(new)
            self._values = merged

    def value(self, norm_sq: int) -> float:
        self.ensure([norm_sq])
        return self._values[int(norm_sq)][0]

    def values(self, norm_sqs) -> np.ndarray:
        ms = np.asarray(norm_sqs, dtype=np.int64)
        self.ensure(np.unique(ms))
        lookup = self._values
        return np.array([lookup[int(m)][0] for m in ms.ravel()]).reshape(ms.shape)

    def lookup_array(self, max_norm_sq: int, needed=None) -> np.ndarray:
        """Dense array a with a[m] = V^(sqrt m) for the needed m <= max_norm_sq."""
        needed = np.arange(max_norm_sq + 1) if needed is None else np.asarray(needed)
        self.ensure(needed)
        out = np.zeros(max_norm_sq + 1)
        for m in needed:
            out[int(m)] = self._values[int(m)][0]
        return out

    def items(self):
        return sorted(self._values.items())

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["xi_norm_sq", "value", "err_estimate"])
            for m, (v, e) in self.items():
                w.writerow([m, f"{v:.17g}", f"{e:.17g}"])

    def load_csv(self, path) -> None:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        with self._lock:
            merged = dict(self._values)
            for row in rows:
                merged[int(row["xi_norm_sq"])] = (float(row["value"]), float(row["err_estimate"]))
            self._values = merged


class ModelTable:
    """The model coefficients U(xi) = (1 + |xi|)^(-n+2-eta), keyed by |xi|^2."""

    def __init__(self, dim: int, eta: float):
        self.dim, self.eta = dim, eta

    def values(self, norm_sqs) -> np.ndarray:
        return (1.0 + np.sqrt(np.asarray(norm_sqs, dtype=float))) ** (-self.dim + 2 - self.eta)

    def value(self, norm_sq: int) -> float:
        return float(self.values([norm_sq])[0])

    def fingerprint(self) -> str:
        return f"model-{self.dim}-{self.eta!r}"


def matrix_entry(table: FourierTable, j: LatticePoint, k: LatticePoint) -> float:
    """V_jk = (2 pi)^(-n) V^(j - k) in the orthonormal exponential basis."""
    if j.dim != table.dim or k.dim != table.dim:
        raise ValueError("lattice point dimension does not match the table")
    m = sum((a - b) ** 2 for a, b in zip(j.coords, k.coords))
    return table.value(m) / (2 * math.pi) ** table.dim


@dataclass
class EnvelopeReport:
    c_min: float
    c_max: float
    worst_offsets: dict
    nonpositive: list


def envelope_report(table: FourierTable, xi_max: float) -> EnvelopeReport:
    """Range of V^(xi) (1 + |xi|)^(n-2+eta) over lattice offsets |xi| <= xi_max."""
    top = int(math.floor(xi_max * xi_max + 1e-9))
    ms = [m for m in range(top + 1) if shell_multiplicity(table.dim, m) > 0]
    vals = table.values(ms)
    alpha = table.dim - 2 + table.eta
    ratio = vals * (1.0 + np.sqrt(np.asarray(ms, dtype=float))) ** alpha
    i_min, i_max = int(np.argmin(ratio)), int(np.argmax(ratio))
    return EnvelopeReport(
        c_min=float(ratio[i_min]),
        c_max=float(ratio[i_max]),
        worst_offsets={"min": ms[i_min], "max": ms[i_max]},
        nonpositive=[m for m, v in zip(ms, vals) if v <= 0],
    )


# ---------------------------------------------------------------------------
# integrability diagnostics


def kato_weight(n: int, r):
    r = np.asarray(r, dtype=float)
    return np.log(2.0 + 1.0 / r) if n == 2 else r ** (2.0 - n)


def kato_modulus(V: RadialSingularPotential, delta: float, panels: int = 16) -> float:
    """int_{d(y, x0) < delta} |V(y)| W_n(d(x0, y)) dy.

    For a radial potential decreasing in |V| away from x0 the supremum over
    x is attained at x = x0, so only that point is integrated.
    """
    if not 0 < delta <= math.pi:
        raise ValueError("delta must lie in (0, pi]")
    n = V.dim
    r, w = radial_rule(delta, 1.0 / V.eta, panels, levels=14)
    vals = np.abs(V.radial(r)) * kato_weight(n, r) * r ** (n - 1)
    return float(sphere_area(n) * (vals * w).sum())


def lp_norm(V: RadialSingularPotential, p: float, panels: int = 32) -> float:
    """||V||_{L^p(T^n)}; returns math.inf when p >= n / (2 - eta).

    With e = (-2 + eta) p + n - 1 > -1 the substitution r = a u^(1/(e+1))
    turns r^e dr into a^(e+1)/(e+1) du exactly, leaving the smooth bump.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    n = V.dim
    if p >= n / (2.0 - V.eta):
        return math.inf
    e = (-2.0 + V.eta) * p + n - 1
    a = V.bump.support_radius
    u, w = composite_gauss(np.linspace(0.0, 1.0, panels + 1), 16)
    r = a * u ** (1.0 / (e + 1.0))
    integral = a ** (e + 1.0) / (e + 1.0) * float((np.abs(V.bump(r, n)) ** p * w).sum())
    return float((abs(V.gamma) ** p * sphere_area(n) * integral) ** (1.0 / p))
