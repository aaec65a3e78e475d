import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tfinv import fock as F
from tfinv.hermite import HermiteExpansion

ONE = F.BargmannFunction(1, [[0]], [1.0])


def h(n, d=1):
    return HermiteExpansion.from_dict({(n,) if d == 1 else tuple(n): 1.0})


def test_bargmann_examples():
    assert np.allclose(F.bargmann(h(0))(np.array([0.3 + 2j, -1.0])), 1.0)
    assert F.bargmann(h(2))(1.0)[0] == pytest.approx(1 / math.sqrt(2))
    assert F.bargmann(h(2))(1.0)[0] == pytest.approx(0.7071, abs=1e-4)


def test_weyl_examples():
    z = np.array([0.5 - 0.2j, 1.5j])
    assert np.allclose(F.weyl(ONE, 0)(z), ONE(z))
    assert F.weyl(ONE, 1.0)(1.0)[0] == pytest.approx(math.exp(0.5))
    assert F.weyl(ONE, 1.0)(1.0)[0] == pytest.approx(1.64872, abs=1e-5)


@settings(max_examples=40, deadline=None)
@given(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False))
def test_weyl_composition_law(u, v):
    G = F.bargmann(HermiteExpansion.random(1, 5, seed=7))
    z = F.spiral_samples(16, 2.0)
    tagged = F.weyl(F.weyl(G, v), u)(z)
    # direct nesting of the defining formula
    inner = lambda p: np.exp(-0.5 * abs(v) ** 2 + p[:, 0] * np.conj(v)) * G(p - v)
    direct = np.exp(-0.5 * abs(u) ** 2 + z[:, 0] * np.conj(u)) * inner(z - u)
    assert np.allclose(tagged, direct, rtol=1e-10, atol=1e-12)


def test_weyl_preserves_gaussian_mass():
    G = F.bargmann(HermiteExpansion.random(1, 4, seed=2))
    m0 = F.gaussian_measure_mass(G, radius=9, n=360)
    m1 = F.gaussian_measure_mass(F.weyl(G, 0.7 - 0.4j), radius=9, n=360)
    assert m0 == pytest.approx(G.coefficient_norm() ** 2, rel=1e-6)
    assert m1 == pytest.approx(m0, rel=1e-6)


def test_covariance_zero_shift():
    z = F.spiral_samples()
    for n in range(3):
        assert F.covariance_check(h(n), [0.0], [0.0], z, 24) < 1e-12


@pytest.mark.parametrize("n,x,xi,N", [(0, 1.0, 0.0, 24), (1, 0.5, 0.5, 32)])
def test_covariance_examples(n, x, xi, N):
    assert F.covariance_check(h(n), [x], [xi], F.spiral_samples(64, 2.0), N) < 1e-8


def test_covariance_two_dimensions():
    f = HermiteExpansion.from_dict({(1, 0): 1.0, (0, 2): 0.5j})
    z = np.array([[0.3 + 0.1j, -0.2 + 0.4j], [1.0, 0.5j], [-0.7j, 0.2]])
    assert F.covariance_check(f, [0.5, -0.25], [0.25, 0.5], z, 20) < 1e-8


def test_covariance_truncation_guard():
    with pytest.raises(F.TruncationError):
        F.covariance_check(h(0), [3.0], [3.0], F.spiral_samples(), 6)


def test_seminorm_examples():
    assert F.fock_seminorm(ONE, "Aflat", 1.0) == 1.0
    assert F.fock_seminorm(ONE, "A0inf", 0.0) == 1.0


def test_seminorm_a01_against_radial_scan():
    e2 = F.bargmann(h(2))
    t = np.arange(0.0, 8.0, 1e-4)
    scan = np.max(t ** 2 / math.sqrt(2) * np.exp(-0.5 * t ** 2 - t))
    # the maximiser solves t^2 + t - 2 = 0, i.e. t = 1
    assert scan == pytest.approx(math.exp(-1.5) / math.sqrt(2), rel=1e-8)
    assert F.fock_seminorm(e2, "A01", 1.0) == pytest.approx(scan, rel=1e-6)


def test_seminorm_errors():
    with pytest.raises(ValueError):
        F.fock_seminorm(ONE, "bogus", 1.0)
    with pytest.raises(ValueError):
        F.fock_seminorm(ONE, "A01", -1.0)
    with pytest.raises(ValueError):
        F.fock_seminorm(ONE, "Aflat", 0.5, sample_set=np.array([[2.0 + 0j]]))


def test_weighted_sup_examples():
    z = F.polar_samples(1, 6.0)
    assert F.weighted_sup_estimate(ONE, lambda x, xi: np.ones(len(x)), z) == 1.0
    # displaced constant against an exponential weight: compare with a dense radial-angular scan
    G = F.weyl(ONE, np.exp(0.3j))
    v0 = lambda x, xi: np.exp(np.abs(x).sum(axis=1) + np.abs(xi).sum(axis=1))
    est = F.weighted_sup_estimate(G, v0, z)
    dense = F.polar_samples(1, 6.0, 601, 720)
    ref = F.weighted_sup_estimate(G, v0, dense)
    assert math.isfinite(est) and est <= ref * (1 + 1e-12)
    assert est == pytest.approx(ref, rel=2e-2)


def test_weighted_sup_grows_for_divergent_coefficients():
    N = 60
    c = HermiteExpansion.from_function(1, N, lambda a: np.exp(a[:, 0].astype(float)))
    G = F.bargmann(c)
    one = lambda x, xi: np.ones(len(x))
    values = [F.weighted_sup_estimate(G, one, F.polar_samples(1, r)) for r in range(1, 9)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_bargmann_json_round_trip():
    G = F.weyl(F.bargmann(HermiteExpansion.random(1, 3, seed=1)), 0.5 - 1j)
    back = F.BargmannFunction.from_json(G.to_json())
    z = F.spiral_samples(8)
    assert np.allclose(back(z), G(z))
