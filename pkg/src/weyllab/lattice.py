"""Exact lattice-point counting in balls, shells, annuli and spherical caps.

All counts are over the integer lattice Z^n with the closed-ball convention
|j| <= radius.  Radii are floats; the squared radius is snapped to the
nearest integer when it is within a relative 1e-9 of one, so that radii
produced as ``sqrt(m)`` include the shell |j|^2 = m.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import permutations
from typing import Iterator

import numpy as np

SUPPORTED_DIMS = (2, 3, 4, 5)
DEFAULT_MAX_POINTS = 10**8
_SNAP = 1e-9

# Dyadic window used for "|v| ~ 2^t": [2^(t-1), 2^(t+1)), with everything
# below 1 collapsed into t = 0 (window [0, 2)).
DYADIC_WINDOW = "[2^(t-1), 2^(t+1)); t=0 uses [0, 2); t<0 empty"


class LatticeError(ValueError):
    """Invalid lattice request (dimension, radius, memory cap)."""


def _check_dim(dim: int) -> None:
    if dim not in SUPPORTED_DIMS:
        raise LatticeError(f"dimension {dim} outside supported range {SUPPORTED_DIMS}")


def radius_sq_bound(radius: float) -> int:
    """Largest integer m with m <= radius**2 (after snapping)."""
    if radius < 0 or not math.isfinite(radius):
        raise LatticeError(f"radius must be finite and >= 0, got {radius}")
    r2 = float(radius) * float(radius)
    m = round(r2)
    if abs(r2 - m) <= _SNAP * max(1.0, r2):
        return int(m)
    return int(math.floor(r2))


def unit_ball_volume(n: int) -> float:
    """omega_n = pi^(n/2) / Gamma(n/2 + 1)."""
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


@dataclass(frozen=True)
class LatticePoint:
    coords: tuple[int, ...]
    norm_sq: int = field(init=False)

    def __post_init__(self):
        if len(self.coords) < 2:
            raise LatticeError("lattice points need n >= 2 coordinates")
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))
        object.__setattr__(self, "norm_sq", sum(c * c for c in self.coords))

    @property
    def dim(self) -> int:
        return len(self.coords)


@dataclass(frozen=True, eq=False)
class LatticeBasis:
    """All j in Z^dim with |j| <= cutoff, sorted by (|j|^2, coords).

    ``points`` is an (N, dim) int64 array and ``norm_sq`` the matching |j|^2.
    """

    dim: int
    cutoff: float
    points: np.ndarray
    norm_sq: np.ndarray

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[LatticePoint]:
        for p in self.points:
            yield LatticePoint(tuple(p))

    def __getitem__(self, i: int) -> LatticePoint:
        return LatticePoint(tuple(self.points[i]))

    @property
    def norms(self) -> np.ndarray:
        return np.sqrt(self.norm_sq.astype(float))

    def index_of(self, coords) -> int:
        hits = np.flatnonzero((self.points == np.asarray(coords)).all(axis=1))
        if len(hits) == 0:
            raise KeyError(tuple(coords))
        return int(hits[0])

    def shells(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct |j|^2 values and, per point, the index of its shell."""
        values, inverse = np.unique(self.norm_sq, return_inverse=True)
        return values, inverse


@lru_cache(maxsize=None)
def _count(dim: int, m: int) -> int:
    # closed ball |j|^2 <= m by slicing along the first coordinate
    if m < 0:
        return 0
    s = math.isqrt(m)
    if dim == 1:
        return 2 * s + 1
    return _count(dim - 1, m) + 2 * sum(_count(dim - 1, m - a * a) for a in range(1, s + 1))


def count_ball(dim: int, radius: float) -> int:
    """N(radius) = #{j in Z^dim : |j| <= radius}, without enumerating."""
    _check_dim(dim)
    return _count(dim, radius_sq_bound(radius))


def shell_multiplicity(dim: int, m: int) -> int:
    """#{j in Z^dim : |j|^2 = m}."""
    _check_dim(dim)
    if m < 0:
        raise LatticeError("m must be >= 0")
    return _count(dim, m) - _count(dim, m - 1)


def weyl_remainder(dim: int, radius: float) -> float:
    """count_ball(dim, radius) - omega_dim * radius^dim."""
    return count_ball(dim, radius) - unit_ball_volume(dim) * float(radius) ** dim


def _enumerate(dim: int, m: int) -> np.ndarray:
    s = math.isqrt(m)
    if dim == 1:
        return np.arange(-s, s + 1, dtype=np.int64)[:, None]
    blocks = []
    for a in range(-s, s + 1):
        sub = _enumerate(dim - 1, m - a * a)
        blocks.append(np.hstack([np.full((len(sub), 1), a, dtype=np.int64), sub]))
    return np.vstack(blocks)


def _sorted(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norm_sq = (points * points).sum(axis=1)
    keys = [points[:, i] for i in range(points.shape[1] - 1, -1, -1)] + [norm_sq]
    order = np.lexsort(keys)
    return points[order], norm_sq[order]


def enumerate_ball(dim: int, radius: float, max_points: int = DEFAULT_MAX_POINTS) -> LatticeBasis:
    """All lattice points of the closed ball in canonical order."""
    _check_dim(dim)
    m = radius_sq_bound(radius)
    total = _count(dim, m)
    if total > max_points:
        raise LatticeError(f"ball of radius {radius} in dim {dim} has {total} points (> cap {max_points})")
    points, norm_sq = _sorted(_enumerate(dim, m))
    return LatticeBasis(dim=dim, cutoff=float(radius), points=points, norm_sq=norm_sq)


def enumerate_shell(dim: int, m: int) -> np.ndarray:
    """Lattice points with |j|^2 = m, as an (k, dim) array in canonical order."""
    _check_dim(dim)
    if m < 0:
        return np.zeros((0, dim), dtype=np.int64)
    pts = _enumerate(dim, m)
    pts = pts[(pts * pts).sum(axis=1) == m]
    return _sorted(pts)[0]


# ---------------------------------------------------------------------------
# dyadic annulus census


def dyadic_buckets(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """The two buckets t whose window [2^(t-1), 2^(t+1)) contains v.

    Values below 1 map to bucket 0 only (second entry is -1).
    """
    v = np.asarray(v, dtype=float)
    lo = np.zeros(v.shape, dtype=np.int64)
    big = v >= 1
    lo[big] = np.floor(np.log2(v[big])).astype(np.int64)
    # guard against log2 rounding right at powers of two
    lo[big] -= (2.0 ** lo[big] > v[big]).astype(np.int64)
    lo[big] += (2.0 ** (lo[big] + 1) <= v[big]).astype(np.int64)
    hi = np.where(big, lo + 1, -1)
    return lo, hi


def in_dyadic(v: float, t: int) -> bool:
    if t < 0:
        return False
    if t == 0:
        return 0 <= v < 2
    return 2.0 ** (t - 1) <= v < 2.0 ** (t + 1)


@dataclass
class AnnulusCensus:
    dim: int
    lam: float
    ell: int
    m: int
    J_count: int
    max_K_count: int
    S_count: int
    bound_ratios: dict
    window: str = DYADIC_WINDOW


def _signed_perm_orbit(j: np.ndarray) -> int:
    """Size of the orbit of j under coordinate permutations and sign flips."""
    a = tuple(sorted(abs(int(c)) for c in j))
    distinct = len(set(permutations(a)))
    return distinct * 2 ** sum(1 for c in a if c != 0)


def _census_bounds(dim, lam, ell, m, J, maxK, S) -> dict:
    bj = lam ** (dim - 1) * (2.0**ell + 1)
    bk = 2.0 ** ((dim - 1) * m) * (2.0**ell + 1)
    bs = lam ** (dim - 1) * 2.0 ** ((dim - 1) * m) * (2.0**ell + 1) ** 2
    return {"J": J / bj, "max_K": maxK / bk, "S": S / bs}


def annulus_census_grid(dim: int, lam: float) -> dict[tuple[int, int], AnnulusCensus]:
    """Exact census of S_{lm}, J_{lm}, K_{lm}(j) for every nonempty (l, m).

    Pairs satisfy lam/2 < |j| < lam <= |k| < 2 lam, with |k - j| ~ 2^m and
    |k| - |j| ~ 2^l under the dyadic window convention.  Counting runs over
    j in the fundamental domain 0 <= j_1 <= ... <= j_n of the signed
    permutation group and weights each j by its orbit size.
    """
    _check_dim(dim)
    lam = float(lam)
    outer = enumerate_ball(dim, 2 * lam)
    nrm = outer.norms
    # strict/closed boundaries on exact squared norms
    lam_sq = lam * lam
    k_mask = (outer.norm_sq >= lam_sq) & (outer.norm_sq < 4 * lam_sq)
    j_mask = (4 * outer.norm_sq > lam_sq) & (outer.norm_sq < lam_sq)
    K = outer.points[k_mask].astype(float)
    k_norm = nrm[k_mask]
    J = outer.points[j_mask]
    fund = np.all(np.diff(J, axis=1) >= 0, axis=1) & (J[:, 0] >= 0)
    J = J[fund]

    counts: dict[tuple[int, int], list] = {}
    for j in J:
        jn = math.sqrt(float((j * j).sum()))
        d = np.sqrt(((K - j) ** 2).sum(axis=1))
        dl = k_norm - jn
        l_lo, l_hi = dyadic_buckets(dl)
        m_lo, m_hi = dyadic_buckets(d)
        orbit = _signed_perm_orbit(j)
        per_j: dict[tuple[int, int], int] = {}
        for la in (l_lo, l_hi):
            for ma in (m_lo, m_hi):
                ok = (la >= 0) & (ma >= 0)
                if not ok.any():
                    continue
                key = la[ok] * 4096 + ma[ok]
                vals, cnt = np.unique(key, return_counts=True)
                for v, c in zip(vals, cnt):
                    lm = (int(v // 4096), int(v % 4096))
                    per_j[lm] = per_j.get(lm, 0) + int(c)
        for lm, c in per_j.items():
            rec = counts.setdefault(lm, [0, 0, 0])
            rec[0] += orbit
            rec[1] = max(rec[1], c)
            rec[2] += orbit * c

    out = {}
    for (ell, m), (jc, mk, sc) in sorted(counts.items()):
        out[(ell, m)] = AnnulusCensus(
            dim, lam, ell, m, jc, mk, sc, _census_bounds(dim, lam, ell, m, jc, mk, sc)
        )
    return out


def annulus_census(dim: int, lam: float, ell: int, m: int) -> AnnulusCensus:
    """Census for a single (ell, m); empty sets give zero counts and ratios."""
    grid = annulus_census_grid(dim, lam)
    if (ell, m) in grid:
        return grid[(ell, m)]
    return AnnulusCensus(dim, float(lam), ell, m, 0, 0, 0, {"J": 0.0, "max_K": 0.0, "S": 0.0})


# ---------------------------------------------------------------------------
# spherical caps


@dataclass
class CapCensus:
    lambda_sq: int
    cap_radius: float
    max_count: int
    argmax_center: LatticePoint | None
    empty: bool = False


def cap_count(dim: int, lambda_sq: int, cap_radius: float) -> CapCensus:
    """Max number of sphere lattice points within cap_radius of a sphere point.

    Candidate centers are the lattice points of the sphere |j|^2 = lambda_sq.
    """
    if lambda_sq < 1:
        raise LatticeError("lambda_sq must be >= 1")
    pts = enumerate_shell(dim, lambda_sq)
    if len(pts) == 0:
        return CapCensus(lambda_sq, float(cap_radius), 0, None, empty=True)
    r2 = float(cap_radius) ** 2
    best, arg = 0, 0
    for i in range(0, len(pts), 512):
        block = pts[i : i + 512]
        d2 = ((block[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
        c = (d2 <= r2 * (1 + _SNAP)).sum(axis=1)
        k = int(np.argmax(c))
        if c[k] > best:
            best, arg = int(c[k]), i + k
    return CapCensus(lambda_sq, float(cap_radius), best, LatticePoint(tuple(pts[arg])))
