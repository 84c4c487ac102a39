import json
import math
import warnings

import numpy as np
import pytest

from weyllab.diagnostics import (
    BoundReport,
    band_ratio,
    critical_exponent,
    default_pairs,
    densities,
    heat_bound_ratio,
    rough_bound_ratio,
    sogge_exponent,
    x_grid,
)
from weyllab.lattice import count_ball, shell_multiplicity
from weyllab.pipeline import solve
from weyllab.potential import RadialSingularPotential
from weyllab.spectral import ReliabilityWarning, SpectralData, projector_diag

TWO_PI = 2 * math.pi


@pytest.fixture(scope="module")
def free():
    return solve(RadialSingularPotential(2, 0.5, 0.0), 24.0).spectral


@pytest.fixture(scope="module")
def singular():
    return solve(RadialSingularPotential(2, 0.5, 1.0), 20.0).spectral


def test_sogge_examples():
    assert sogge_exponent(3, math.inf) == 1.0
    assert sogge_exponent(2, 2) == 0.0
    p0, s0 = critical_exponent(3, 0.5)
    assert p0 == pytest.approx(4.0)
    assert s0 == pytest.approx(0.25)
    with pytest.raises(ValueError):
        sogge_exponent(2, 1.5)


def test_sogge_continuous_and_increasing():
    p = np.linspace(2, 60, 300)
    s = np.array([sogge_exponent(3, v) for v in p])
    assert np.all(np.diff(s) >= 0)
    # branches meet at p = 2(n+1)/(n-1)
    assert sogge_exponent(3, 4.0) == pytest.approx(0.25)


def test_x_grid_contains_center_and_antipode():
    g = x_grid(2)
    assert len(g) == 32 * 32 and len(g.extra) == 0
    g = x_grid(2, center=[0.1, 0.2])
    assert len(g.extra) == 2
    assert np.allclose(g.extra[1], [0.1 + math.pi, 0.2 + math.pi])
    g3 = x_grid(3, max_points=4000)
    assert g3.points_per_axis**3 <= 4000 and g3.points_per_axis % 2 == 0


def test_densities_match_pointwise(singular):
    g = x_grid(2, center=[0.3, 0.4], points_per_axis=8)
    cols = [0, 3, 11]
    d = densities(singular, g, cols)
    for i in (0, 17, len(g) - 1):
        assert np.allclose(d[i], singular.density_at(g.points[i], cols), rtol=1e-10, atol=1e-14)


def test_band_free_is_shell_count(free):
    g = x_grid(2, points_per_axis=16)
    rep = band_ratio(free, 10.0, g)
    count = sum(shell_multiplicity(2, m) for m in range(100, 121))
    assert rep.max_ratio == pytest.approx(count / TWO_PI**2 / 10.0, rel=1e-12)
    vals = np.array([r[-1] for r in rep.grid])
    assert vals.std() <= 1e-12 * vals.mean()
    assert rep.passed is None


def test_band_empty_flag(free):
    # every unit band of the free spectrum is occupied; a shift by 4 leaves [0.5, 1.5) empty
    shifted = SpectralData(free.basis, free.raw_eigenvalues, free.coefficients, 4.0)
    rep = band_ratio(shifted, 0.5, x_grid(2, points_per_axis=4))
    assert rep.max_ratio == 0.0 and "empty_band" in rep.flags


def test_band_singular_positive(singular):
    with warnings.catch_warnings():
        warnings.simplefilter("error", ReliabilityWarning)
        rep = band_ratio(singular, 8.0, x_grid(2, points_per_axis=16))
    assert 0 < rep.max_ratio < math.inf


def test_band_reliability_flag(singular):
    with pytest.warns(ReliabilityWarning):
        rep = band_ratio(singular, 12.0, x_grid(2, points_per_axis=4))
    assert "unreliable" in rep.flags


def test_rough_free_is_count(free):
    for lam in (4.0, 10.0):
        rep = rough_bound_ratio(free, lam, x_grid(2, points_per_axis=8))
        assert rep.max_ratio == pytest.approx(count_ball(2, lam) / TWO_PI**2 / lam**2, rel=1e-12)
    assert count_ball(2, 10.0) / 100 / TWO_PI**2 == pytest.approx(math.pi / TWO_PI**2, rel=0.02)


def test_rough_singular_agrees_with_projector(singular):
    g = x_grid(2, points_per_axis=8)
    rep = rough_bound_ratio(singular, 6.0, g)
    i = rep.argmax[0]
    assert rep.max_ratio == pytest.approx(projector_diag(singular, 6.0, g.points[i]) / 36, rel=1e-10)
    assert rep.max_ratio > 0


def test_heat_free_poisson_fixture(free):
    # t * sum_j exp(-t |j|^2) / (2 pi)^2 = 1 / (4 pi) up to exp(-pi^2 / t)
    rep = heat_bound_ratio(free, [0.05], [(np.zeros(2), np.zeros(2))])
    assert rep.max_ratio == pytest.approx(1 / (4 * math.pi), rel=1e-12)


def test_heat_singular_finite(singular):
    ts = [0.02, 0.1, 0.5, 1.0]
    rep = heat_bound_ratio(singular, ts, default_pairs(2))
    assert np.isfinite(rep.max_ratio) and rep.max_ratio > 0
    assert all(r[-1] >= 0 for r in rep.grid)
    assert not rep.flags
    assert heat_bound_ratio(singular, [1e-3], default_pairs(2, count=2)).flags


def test_report_schema_and_threshold():
    rep = BoundReport("x", {"a": 1}, [[0, 0.5]], 0.5, [0], threshold=1.0)
    rec = json.loads(rep.to_json())
    assert set(rec) == {"name", "params", "max_ratio", "argmax", "threshold", "pass"}
    assert rec["pass"] is True
    assert BoundReport("x", {}, [], math.inf, []).passed is False
    assert BoundReport("x", {}, [], 2.0, [], threshold=1.0).passed is False


def test_reports_deterministic(singular):
    g = x_grid(2, points_per_axis=8)
    a = rough_bound_ratio(singular, 5.0, g).to_json()
    b = rough_bound_ratio(singular, 5.0, g).to_json()
    assert a == b
