"""Composite Gauss-Legendre rules, with a graded variant for r^e endpoint singularities."""
from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def _legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_gauss(edges, order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of a Gauss rule on each panel [edges[i], edges[i+1]]."""
    edges = np.asarray(edges, dtype=float)
    x, w = _legendre(order)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (a + b) + 0.5 * (b - a) * x
    weights = 0.5 * (b - a) * w
    return nodes.ravel(), weights.ravel()


def graded_edges(panels: int, levels: int = 10, ratio: float = 0.2) -> np.ndarray:
    """Panel edges on [0, 1]: `panels` uniform panels, the first one split
    geometrically toward 0 into `levels` extra panels."""
    first = 1.0 / panels
    geo = first * ratio ** np.arange(levels, 0, -1)
    return np.concatenate([[0.0], geo, np.linspace(first, 1.0, panels + 1)])


def radial_rule(upper: float, power: float, panels: int, order: int = 16,
                levels: int = 10) -> tuple[np.ndarray, np.ndarray]:
    """Rule for int_0^upper F(r) dr through r = upper * u**power.

    A power p flattens an r^e endpoint singularity into u^(p(e+1)-1), which is
    bounded whenever p >= 1/(e+1).  Returns r-nodes and r-weights.
    """
    u, wu = composite_gauss(graded_edges(panels, levels), order)
    r = upper * u**power
    wr = wu * upper * power * u ** (power - 1.0)
    return r, wr
