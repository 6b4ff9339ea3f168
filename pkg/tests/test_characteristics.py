import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kvnlab import potentials as P
from kvnlab.characteristics import (classical_trajectory, extended_trajectory, free_heisenberg_closed_form,
                                    heisenberg_dense_check, interior_test_states, multi_extended_trajectory,
                                    pairing, strip_private, tangent_trajectory)
from kvnlab.phase_space import make_grid


def test_harmonic_quarter_period():
    # h = 1e-4 adjusted by 1e-9 so that the last node lands exactly on pi/2
    n = 15708
    p = classical_trajectory(1.0, 0.0, P.harmonic(), 1.0, np.pi / 2 / n, n)
    assert p.x[-1] == pytest.approx(0.0, abs=1e-6)
    assert p.v[-1] == pytest.approx(-1.0, abs=1e-6)


def test_free_particle_straight_line():
    p = classical_trajectory(0.5, -2.0, P.free(), 1.0, 0.1, 50)
    np.testing.assert_allclose(p.x, 0.5 - 2.0 * p.t, rtol=0, atol=1e-13)
    assert np.all(p.v == -2.0)


def test_quartic_against_fine_step_reference():
    h = 2e-4
    n = int(round(1 / h))
    coarse = classical_trajectory(1.0, 0.0, P.quartic(1.0), 1.0, h, n)
    fine = classical_trajectory(1.0, 0.0, P.quartic(1.0), 1.0, h / 100, n * 100)
    assert abs(coarse.x[-1] - fine.x[-1]) < 1e-8
    assert abs(coarse.v[-1] - fine.v[-1]) < 1e-8


def test_free_multipliers():
    e = extended_trajectory(0.0, 1.0, 1.0, 0.0, P.free(), 1.0, 0.01, 300)
    np.testing.assert_allclose(e.lambda_x, 1.0, atol=1e-10)
    np.testing.assert_allclose(e.lambda_v, -e.t, atol=1e-10)


def test_harmonic_multiplier_half_period():
    h = 1e-3
    e = extended_trajectory(1.0, 0.0, 0.0, 1.0, P.harmonic(), 1.0, h, int(round(np.pi / h)))
    # n h differs from pi by 4e-4, so compare with the closed form cos(n h)
    assert e.lambda_v[-1] == pytest.approx(np.cos(e.t[-1]), abs=1e-8)
    e = extended_trajectory(1.0, 0.0, 0.0, 1.0, P.harmonic(), 1.0, np.pi / 3000, 3000)
    assert e.lambda_v[-1] == pytest.approx(-1.0, abs=1e-8)


def test_multipliers_obey_jacobi_equation():
    h = 1e-3
    e = extended_trajectory(1.0, 0.2, 0.3, 1.0, P.quartic(1.0), 1.0, h, 2000)
    lv = e.lambda_v
    ddlv = (lv[2:] - 2 * lv[1:-1] + lv[:-2]) / h**2
    np.testing.assert_allclose(ddlv, P.quartic(1.0).dforce(e.x[1:-1]) * lv[1:-1], atol=1e-5)


def test_extended_needs_force_derivative():
    xs = np.linspace(-2, 2, 11)
    pot = P.tabulated(xs, 0.5 * xs**2, -xs)
    with pytest.raises(ValueError, match="dforce"):
        extended_trajectory(0, 0, 1, 0, pot, 1.0, 0.1, 10)


@pytest.mark.parametrize("h", [0.0, -1.0])
def test_bad_step_rejected(h):
    with pytest.raises(ValueError):
        classical_trajectory(0, 0, P.free(), 1.0, h, 10)


def test_one_way_coupling():
    a = extended_trajectory(1.0, 0.0, 0.0, 1.0, P.quartic(), 1.0, 1e-2, 200)
    b = extended_trajectory(1.0, 0.0, 5.0, -3.0, P.quartic(), 1.0, 1e-2, 200)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.v, b.v)


def test_tangent_pairing_matches_nearby_trajectories():
    q = P.quartic()
    h, n = 1e-3, 1000
    e = extended_trajectory(1.0, 0.0, 0.2, 1.0, q, 1.0, h, n)
    eps = 1e-5
    up = classical_trajectory(1.0 + eps, 0.5 * eps, q, 1.0, h / 10, n * 10)
    dn = classical_trajectory(1.0 - eps, -0.5 * eps, q, 1.0, h / 10, n * 10)
    dx = (up.x[::10] - dn.x[::10]) / (2 * eps)
    dv = (up.v[::10] - dn.v[::10]) / (2 * eps)
    _, _, _, tdx, tdv = tangent_trajectory(1.0, 0.0, 1.0, 0.5, q, 1.0, h, n)
    assert np.max(np.abs(tdx - dx)) < 1e-5
    assert np.max(np.abs(tdv - dv)) < 1e-5
    pair = pairing(e, tdx, tdv)
    assert np.max(np.abs(pair - pair[0])) < 1e-8


@settings(max_examples=15, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1),
       st.sampled_from([P.harmonic(1.3), P.quartic(0.7), P.polynomial([0, 0.1, 0.5, 0.2, 0.1])]))
def test_pairing_conserved_for_any_tangent(x0, v0, lx0, dx0, dv0, pot):
    h, n = 2e-3, 500
    e = extended_trajectory(x0, v0, lx0, 1.0, pot, 1.0, h, n)
    _, _, _, dx, dv = tangent_trajectory(x0, v0, dx0, dv0, pot, 1.0, h, n)
    pair = pairing(e, dx, dv)
    assert np.max(np.abs(pair - pair[0])) < 1e-8


def test_convergence_orders():
    pot = P.harmonic()
    errs = []
    for h in (0.02, 0.01):
        p = classical_trajectory(1.0, 0.0, pot, 1.0, h, int(round(2 / h)))
        errs.append(abs(p.x[-1] - np.cos(p.t[-1])))
    assert errs[0] / errs[1] == pytest.approx(4, rel=0.15)
    errs = []
    for h in (0.1, 0.05):
        e = extended_trajectory(1.0, 0.0, 0.0, 1.0, pot, 1.0, h, int(round(2 / h)))
        errs.append(abs(e.lambda_v[-1] - np.cos(e.t[-1])))
    assert errs[0] / errs[1] == pytest.approx(16, rel=0.15)


def test_path_csv(tmp_path):
    e = extended_trajectory(1.0, 0.0, 0.0, 1.0, P.harmonic(), 1.0, 0.1, 5)
    e.to_csv(tmp_path / "e.csv")
    e.classical().to_csv(tmp_path / "c.csv")
    assert (tmp_path / "e.csv").read_text().splitlines()[0] == "t,x,v,lambda_x,lambda_v"
    assert (tmp_path / "c.csv").read_text().splitlines()[0] == "t,x,v"
    assert len((tmp_path / "c.csv").read_text().splitlines()) == 7


def _springs(k, masses):
    # equal-rest-length-zero springs between every pair plus nothing external
    def forces(r):
        diff = r[:, None, :] - r[None, :, :]
        return -k * diff.sum(axis=1)

    def jac(r):
        p, d = r.shape
        eye_p = np.eye(p)
        base = -k * (p * eye_p - np.ones((p, p)))
        return np.einsum("ij,ab->iajb", base, np.eye(d))

    return forces, jac


def test_multi_particle_springs():
    masses = np.array([1.0, 2.0, 3.0])
    forces, jac = _springs(0.7, masses)
    rng = np.random.default_rng(1)
    r0, v0, lr0, lv0 = (rng.normal(size=(3, 2)) for _ in range(4))
    h, n = 1e-3, 1000
    path = multi_extended_trajectory(r0, v0, lr0, lv0, masses, forces, jac, h, n)
    # internal forces only: the centre of mass moves uniformly
    com = np.einsum("tpd,p->td", path.r, masses) / masses.sum()
    p_tot = np.einsum("pd,p->d", v0, masses) / masses.sum()
    np.testing.assert_allclose(com, com[0] + path.t[:, None] * p_tot, atol=1e-12)
    # tangent pairing via two nearby runs of the same system
    eps = 1e-6
    dr0, dv0 = rng.normal(size=(3, 2)), rng.normal(size=(3, 2))
    up = multi_extended_trajectory(r0 + eps * dr0, v0 + eps * dv0, lr0, lv0, masses, forces, jac, h, n)
    dn = multi_extended_trajectory(r0 - eps * dr0, v0 - eps * dv0, lr0, lv0, masses, forces, jac, h, n)
    dr = (up.r - dn.r) / (2 * eps)
    dv = (up.v - dn.v) / (2 * eps)
    pair = np.einsum("tpd,tpd->t", path.lambda_r, dr) + np.einsum("tpd,tpd->t", path.lambda_v, dv)
    assert np.max(np.abs(pair - pair[0])) < 1e-8


def test_multi_particle_reduces_to_single():
    pot = P.quartic(0.5)
    forces = lambda r: pot.force(r)  # noqa: E731
    jac = lambda r: np.diag(pot.dforce(r[:, 0])).reshape(2, 1, 2, 1)  # noqa: E731
    path = multi_extended_trajectory([[1.0], [-0.5]], [[0.0], [0.3]], [[0.1], [0.0]], [[1.0], [2.0]],
                                     [1.0, 2.0], forces, jac, 1e-2, 100)
    single = extended_trajectory(-0.5, 0.3, 0.0, 2.0, pot, 2.0, 1e-2, 100)
    np.testing.assert_allclose(path.r[:, 1, 0], single.x, atol=1e-14)
    np.testing.assert_allclose(path.lambda_v[:, 1, 0], single.lambda_v, atol=1e-14)


def test_heisenberg_harmonic(tiny):
    for t in (0.25, 0.5, 1.0):
        r = heisenberg_dense_check(tiny, P.harmonic(), 1.0, t)
        assert r["unitarity_error"] < 1e-10
        assert r["commutator_x_lambda_x_error"] < 1e-5
        assert r["commutator_v_lambda_v_error"] < 1e-5
        assert r["zero_commutator_max"] < 1e-10
        assert r["heisenberg_residual_rel"] < 1e-5


def test_heisenberg_matches_time_zero(tiny):
    r0 = heisenberg_dense_check(tiny, P.harmonic(), 1.0, 0.0)
    r1 = heisenberg_dense_check(tiny, P.harmonic(), 1.0, 0.75, n_steps=3)
    for k in ("commutator_x_lambda_x_error", "commutator_v_lambda_v_error"):
        assert abs(r1[k] - r0[k]) < 1e-5


def test_heisenberg_grid_cap():
    with pytest.raises(ValueError, match="too large"):
        heisenberg_dense_check(make_grid(32, 16, -1, 1, -1, 1), P.free(), 1.0, 0.1)


def test_free_heisenberg_closed_form():
    g = make_grid(16, 16, -4, 4, -0.5, 0.5)
    for t in (0.25, 0.5, 1.0):
        assert free_heisenberg_closed_form(g, t)["max_interior_element"] < 1e-8


def test_interior_states_and_strip_private(tiny):
    states = interior_test_states(tiny, 10)
    assert len(states) == 10
    assert all(abs(s.norm() - 1) < 1e-12 for s in states)
    r = strip_private(heisenberg_dense_check(tiny, P.free(), 1.0, 0.1))
    assert not any(k.startswith("_") for k in r)
