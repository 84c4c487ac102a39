"""Empirical ratios for the auxiliary bounds: unit-band projectors (p = inf),
the rough projector bound and Gaussian heat-kernel domination.

The constants in these bounds are existential, so the reports give the
observed maximum ratio; a threshold only applies when one is configured.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .potential import torus_distance
from .spectral import ReliabilityWarning, SpectralData, TruncationWarning, grid_values, heat_diag

DEFAULT_POINTS_PER_AXIS = 32
DEFAULT_MAX_GRID = 2**15


def sogge_exponent(n: int, p: float) -> float:
    """sigma(p) = max{(n-1)/2 (1/2 - 1/p), (n-1)/2 - n/p}, p in [2, inf]."""
    if p < 2:
        raise ValueError("p >= 2 required")
    inv = 0.0 if math.isinf(p) else 1.0 / p
    return max(0.5 * (n - 1) * (0.5 - inv), 0.5 * (n - 1) - n * inv)


def critical_exponent(n: int, eta: float) -> tuple[float, float]:
    """(p0, sigma(p0)) with p0 = 2n / (n - 2 + eta)."""
    p0 = 2.0 * n / (n - 2 + eta)
    return p0, sogge_exponent(n, p0)


@dataclass
class XGrid:
    """Evaluation points: a uniform G^n lattice plus extra points."""

    dim: int
    points_per_axis: int
    extra: np.ndarray

    @property
    def uniform_points(self) -> np.ndarray:
        g = self.points_per_axis
        axes = np.meshgrid(*([np.arange(g) * 2 * math.pi / g] * self.dim), indexing="ij")
        return np.stack([a.ravel() for a in axes], axis=1)

    @property
    def points(self) -> np.ndarray:
        return np.vstack([self.uniform_points, self.extra]) if len(self.extra) else self.uniform_points

    def __len__(self) -> int:
        return self.points_per_axis**self.dim + len(self.extra)


def x_grid(dim: int, center=None, points_per_axis: int = DEFAULT_POINTS_PER_AXIS,
           max_points: int = DEFAULT_MAX_GRID) -> XGrid:
    """Uniform grid (shrunk to respect `max_points`, kept even) plus the center
    and its antipode when they are not grid points."""
    g = points_per_axis
    while g**dim > max_points and g > 2:
        g -= 2
    c = np.zeros(dim) if center is None else np.asarray(center, dtype=float) % (2 * math.pi)
    anti = (c + math.pi) % (2 * math.pi)
    extra = []
    for p in (c, anti):
        m = p * g / (2 * math.pi)
        if not np.allclose(m, np.round(m), atol=1e-12, rtol=0):
            extra.append(p)
    return XGrid(dim, g, np.array(extra).reshape(-1, dim))


def densities(S: SpectralData, grid: XGrid, columns) -> np.ndarray:
    """|e_k(x)|^2 for x in grid.points and k in columns, shape (len(grid), len(columns))."""
    cols = np.atleast_1d(columns)
    out = np.empty((len(grid), len(cols)))
    m = grid.points_per_axis**grid.dim
    for i in range(0, len(cols), 512):
        c = cols[i : i + 512]
        v = grid_values(S, grid.points_per_axis, c).reshape(m, len(c))
        out[:m, i : i + len(c)] = v.real**2 + v.imag**2
    for r, x in enumerate(grid.extra):
        out[m + r] = S.density_at(x, cols)
    return out


@dataclass
class BoundReport:
    name: str
    params: dict
    grid: list
    max_ratio: float
    argmax: list
    threshold: float | None = None
    flags: list = field(default_factory=list)

    @property
    def passed(self) -> bool | None:
        if not np.isfinite(self.max_ratio):
            return False
        if self.threshold is None:
            return None
        return self.max_ratio <= self.threshold

    def to_record(self) -> dict:
        return {"name": self.name, "params": self.params, "max_ratio": self.max_ratio,
                "argmax": self.argmax, "threshold": self.threshold, "pass": self.passed}

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True, indent=1)


def _finish(name, params, rows, threshold, flags):
    ratios = np.array([r[-1] for r in rows]) if rows else np.zeros(1)
    i = int(np.argmax(ratios))
    argmax = list(rows[i][:-1]) if rows else []
    return BoundReport(name, params, rows, float(ratios[i]), argmax, threshold, flags)


def band_ratio(S: SpectralData, lam: float, grid: XGrid, threshold: float | None = None) -> BoundReport:
    """max_x sum_{tau in [lambda, lambda+1)} |e_tau(x)|^2 / lambda^(n-1)."""
    flags = []
    if lam + 1 > S.cutoff:
        warnings.warn(f"band [{lam:g}, {lam + 1:g}) above reliability cutoff {S.cutoff:g}", ReliabilityWarning, stacklevel=2)
        flags.append("unreliable")
    tau = S.tau
    cols = np.flatnonzero((tau >= lam) & (tau < lam + 1))
    if len(cols) == 0:
        flags.append("empty_band")
        rows = [[i, 0.0] for i in range(len(grid))]
    else:
        vals = densities(S, grid, cols).sum(axis=1) / lam ** (S.dim - 1)
        rows = [[i, float(v)] for i, v in enumerate(vals)]
    return _finish("band_ratio", {"lambda": lam, "grid": len(grid)}, rows, threshold, flags)


def rough_bound_ratio(S: SpectralData, lam: float, grid: XGrid, threshold: float | None = None) -> BoundReport:
    """max_x sum_{tau <= lambda} |e_tau(x)|^2 / lambda^n."""
    flags = []
    if lam > S.cutoff:
        warnings.warn(f"lambda={lam:g} above reliability cutoff {S.cutoff:g}", ReliabilityWarning, stacklevel=2)
        flags.append("unreliable")
    cols = np.flatnonzero(S.tau <= lam)
    if len(cols) == 0:
        vals = np.zeros(len(grid))
    else:
        vals = densities(S, grid, cols).sum(axis=1) / lam**S.dim
    rows = [[i, float(v)] for i, v in enumerate(vals)]
    return _finish("rough_bound_ratio", {"lambda": lam, "grid": len(grid)}, rows, threshold, flags)


def default_pairs(dim: int, center=None, count: int = 8) -> list:
    c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
    pairs = []
    for s in np.linspace(0.0, math.pi, count):
        y = c.copy()
        y[0] = (y[0] + s) % (2 * math.pi)
        pairs.append((c, y))
        if s > 0:
            pairs.append((y, y))
    return pairs


def heat_bound_ratio(S: SpectralData, t_grid, pair_grid, c: float = 0.125,
                     threshold: float | None = None) -> BoundReport:
    """max over (t, x, y) of |e^{-tH}(x,y)| / (t^(-n/2) exp(-c d(x,y)^2 / t))."""
    n = S.dim
    tmin = 4.0 * S.basis.cutoff ** -2
    flags = []
    rows = []
    for t in t_grid:
        if not tmin <= t <= 1.0:
            flags.append(f"t={t:g} outside [{tmin:g}, 1]")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            for p, (x, y) in enumerate(pair_grid):
                d = torus_distance(x, y)
                k = abs(heat_diag(S, t, x, y))
                # log form: the Gaussian factor underflows long before the ratio is meaningless
                ratio = 0.0 if k == 0 else math.exp(min(math.log(k) + 0.5 * n * math.log(t) + c * d * d / t, 709.0))
                if ratio >= math.exp(709.0):
                    ratio = math.inf
                    flags.append(f"ratio overflow at t={t:g}, pair {p}")
                rows.append([float(t), p, float(ratio)])
    return _finish("heat_bound_ratio", {"c": c, "t_grid": [float(t) for t in t_grid], "pairs": len(pair_grid)},
                   rows, threshold, flags)
