import numpy as np
import pytest

from kvnlab import potentials as P


def test_harmonic_force_and_derivative():
    pot = P.harmonic(2.0)
    x = np.linspace(-3, 3, 7)
    np.testing.assert_allclose(pot.phi(x), 2.0 * x**2)
    np.testing.assert_allclose(pot.force(x), -4.0 * x)
    np.testing.assert_allclose(pot.dforce(x), -4.0 * np.ones_like(x))


def test_quartic_force_is_minus_cubic():
    pot = P.quartic(1.0)
    x = np.array([-2.0, 0.5, 1.0])
    np.testing.assert_allclose(pot.force(x), -x**3)
    np.testing.assert_allclose(pot.dforce(x), -3 * x**2)


def test_free_is_identically_zero():
    x = np.linspace(-1, 1, 5)
    assert not np.any(P.free().force(x))
    assert not np.any(P.free().phi(x))


def test_polynomial_matches_harmonic():
    x = np.linspace(-2, 2, 9)
    poly = P.polynomial([0.0, 0.0, 0.5])
    np.testing.assert_allclose(poly.force(x), P.harmonic().force(x), atol=1e-14)
    np.testing.assert_allclose(poly.dforce(x), -1.0, atol=1e-14)


def test_tabulated_interpolates_samples():
    xs = np.linspace(-2, 2, 401)
    pot = P.tabulated(xs, 0.5 * xs**2, -xs)
    assert pot.force(np.array([0.7]))[0] == pytest.approx(-0.7, abs=1e-12)
    assert not pot.has_dforce


def test_unknown_kind_lists_valid_kinds():
    with pytest.raises(ValueError) as err:
        P.PotentialSpec("cubic")
    for k in P.KINDS:
        assert k in str(err.value)
