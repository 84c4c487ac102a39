"""Orchestration shared by the CLI and the acceptance suite: cached eigensolves,
Galerkin convergence tables and the main scaling run."""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .cache import EigenCache, cache_dir as resolve_cache_dir
from .lattice import enumerate_ball
from .mollifier import MollifierSpec
from .potential import FourierTable, QuadratureSettings, RadialSingularPotential
from .spectral import ReliabilityWarning, SpectralData, assemble, eigensolve
from .weyl import fit_exponent, perturbation_difference

log = logging.getLogger(__name__)
FORMAT_TAG = "weyllab-eigs-1"


def eigen_metadata(V: RadialSingularPotential, cutoff: float, settings: QuadratureSettings,
                   floor: float, size: int) -> dict:
    return {
        "format": FORMAT_TAG,
        **V.params(),
        "cutoff": float(cutoff),
        "quadrature": FourierTable(V, settings).fingerprint(),
        "floor": float(floor),
        "size": int(size),
    }


@dataclass
class Solved:
    spectral: SpectralData
    table: FourierTable
    cache_hit: bool


def solve(V: RadialSingularPotential, cutoff: float, settings: QuadratureSettings | None = None,
          floor: float = 0.0, cache_dir=None, reliability: float = 0.5, max_size: int = 12000) -> Solved:
    """Assemble and diagonalize H_V on |j| <= cutoff, reusing the eigendata cache."""
    settings = settings or QuadratureSettings()
    basis = enumerate_ball(V.dim, cutoff)
    table = FourierTable(V, settings)
    directory = resolve_cache_dir(cache_dir)
    cache = EigenCache(directory) if directory else None
    meta = eigen_metadata(V, cutoff, settings, floor, len(basis))
    if cache is not None:
        hit = cache.load(meta)
        if hit is not None:
            w, c, shift = hit
            S = SpectralData(basis, w, c, shift, table.fingerprint(), reliability)
            return Solved(S, table, True)
    S = eigensolve(assemble(basis, table), floor=floor, max_size=max_size, reliability=reliability)
    if cache is not None:
        cache.store(meta, S.raw_eigenvalues, S.coefficients, S.shift)
    return Solved(S, table, False)


def galerkin_convergence(V: RadialSingularPotential, cutoffs, count: int = 20,
                         settings: QuadratureSettings | None = None, cache_dir=None) -> list[dict]:
    """Lowest `count` eigenvalues per cutoff and the max relative change from the previous cutoff."""
    rows = []
    prev = None
    for cut in cutoffs:
        S = solve(V, cut, settings, cache_dir=cache_dir).spectral
        low = S.raw_eigenvalues[:count]
        change = None if prev is None else float(np.max(np.abs(low - prev) / np.abs(prev)))
        rows.append({"cutoff": float(cut), "size": len(S.basis), "eigenvalues": [float(v) for v in low],
                     "max_rel_change": change})
        prev = low
    return rows


def scaling_run(S: SpectralData, eta: float, lambdas, x, mode: str = "mollified",
                epsilon: float | None = None) -> list[tuple[float, float]]:
    """(lambda, D(lambda, x)) over the grid."""
    out = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ReliabilityWarning)
        for lam in lambdas:
            spec = MollifierSpec(float(lam), eta, epsilon)
            out.append((float(lam), perturbation_difference(S, spec, x, mode)))
    return out


def main_report(S: SpectralData, eta: float, lambdas, x, mode: str = "mollified", epsilon=None) -> dict:
    pts = scaling_run(S, eta, lambdas, x, mode, epsilon)
    fit = fit_exponent(pts)
    n = S.dim
    return {
        "points": [[l, v] for l, v in pts],
        "fit": fit.to_record(eta=eta, n=n, expected_exponent=n - eta),
    }
