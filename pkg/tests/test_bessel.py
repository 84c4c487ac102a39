import math

import numpy as np
import pytest
import scipy.special as sp

from weyllab.bessel import SWITCH, _hankel, _series, j0, j1, radial_kernel, sphere_area


def test_j0_j1_against_scipy():
    x = np.concatenate([np.linspace(0, 30, 3001), np.geomspace(30, 500, 400)])
    assert np.abs(j0(x) - sp.j0(x)).max() < 5e-12
    assert np.abs(j1(x) - sp.j1(x)).max() < 5e-12


def test_branches_agree_at_switch():
    x = np.array([SWITCH])
    for nu in (0, 1):
        assert abs(_series(x, nu)[0] - _hankel(x, nu)[0]) < 5e-12


def test_parity():
    x = np.array([0.3, 7.0, 20.0])
    assert np.allclose(j0(-x), j0(x))
    assert np.allclose(j1(-x), -j1(x))


def test_sphere_area():
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_radial_kernel_matches_bessel_form(n):
    z = np.concatenate([np.geomspace(1e-4, 1, 30), np.linspace(1, 60, 200)])
    ref = (2 * math.pi) ** (n / 2) * z ** (1 - n / 2) * sp.jv(n / 2 - 1, z)
    assert np.allclose(radial_kernel(n, z), ref, rtol=1e-10, atol=1e-12)
    assert radial_kernel(n, np.array([0.0]))[0] == pytest.approx(sphere_area(n))


def test_radial_kernel_bad_dim():
    with pytest.raises(ValueError):
        radial_kernel(6, 1.0)
