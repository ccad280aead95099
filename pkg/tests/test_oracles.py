import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from causalfermion.action import causal_action, lagrangian, product_spectrum
from causalfermion.errors import DimensionTooSmall, NotCausallyTrivial
from causalfermion.operators import Configuration, validate_point
from causalfermion.oracles import (
    DIRAC_GAMMAS,
    Regime,
    asymptotic_table,
    dirac2d_config,
    dirac4d_config,
    dirac4d_lagrangian,
    dirac4d_operator,
    is_causally_trivial,
    iso_lagrangian,
    local_min_check,
    optimal_weights,
    orthogonal_min_config,
    sic_tetrahedron_config,
    tammes_points,
    welch_floor,
)


def test_iso_examples():
    assert iso_lagrangian(1, 1) == pytest.approx(1 / 6, abs=1e-15)
    assert iso_lagrangian(2, 2) == pytest.approx(11 / 48)
    for tau in (1.3, 4.0, 17.0):
        assert iso_lagrangian(tau, tau) == pytest.approx(0.25 - 1 / (12 * tau * tau))


@given(st.floats(1.0, 20.0), st.floats(1.0, 20.0))
def test_iso_symmetric_and_above_floor(a, b):
    assert iso_lagrangian(a, b) == pytest.approx(iso_lagrangian(b, a))
    if (a, b) != (1.0, 1.0):
        assert iso_lagrangian(a, b) >= 1 / 6


def test_iso_matches_sphere_average():
    # Monte Carlo over the relative angle of two uniform points on S^2
    rng = np.random.default_rng(0)
    from causalfermion.action import lagrangian_f2_angles

    cos = rng.uniform(-1, 1, 40000)
    vals = [lagrangian_f2_angles(1.5, 2.5, np.arccos(c)) for c in cos]
    assert np.mean(vals) == pytest.approx(iso_lagrangian(1.5, 2.5), rel=2e-2)


def test_dirac_gammas_anticommute():
    for a in range(5):
        for b in range(5):
            ac = DIRAC_GAMMAS[a] @ DIRAC_GAMMAS[b] + DIRAC_GAMMAS[b] @ DIRAC_GAMMAS[a]
            assert np.allclose(ac, 2 * np.eye(4) * (a == b))


@pytest.mark.parametrize("m, angle", [(2, np.pi), (4, np.arccos(-1 / 3)), (6, np.pi / 2)])
def test_tammes_known_optima(m, angle):
    pts = tammes_points(m, 2, seed=0)
    assert pts.min_angle == pytest.approx(angle, abs=1e-3)
    assert np.allclose(np.linalg.norm(pts.points, axis=1), 1.0)


def test_tammes_s4_cross_polytope():
    # ten points on S^4: the cross polytope is optimal with right angles
    assert tammes_points(10, 4, seed=0).min_angle == pytest.approx(np.pi / 2, abs=1e-3)


@pytest.mark.parametrize("m, action", [(2, 0.25), (6, 1 / 6)])
def test_dirac2d_small(m, action):
    cfg, pred = dirac2d_config(m)
    assert pred.regime == Regime.EXACT
    assert pred.action == pytest.approx(action, abs=1e-6)
    rep = causal_action(cfg)
    assert rep.action == pytest.approx(pred.action, abs=1e-10)
    assert rep.boundedness == pytest.approx(pred.boundedness, abs=1e-10)
    assert is_causally_trivial(cfg)[0]
    assert pred.asymptotic.action == pytest.approx(np.sqrt(3) / (4 * np.pi))


def test_dirac4d_lagrangian_examples():
    assert dirac4d_lagrangian(2.0, 0.0) == pytest.approx(4 / 16)
    assert dirac4d_lagrangian(2.0, np.pi / 2) == 0.0
    for theta in (0.1, 1.0, 2.5):
        assert dirac4d_lagrangian(1.0, theta) == pytest.approx((1 + np.cos(theta)) ** 2 / 64)


@given(st.floats(1.0, 3.0), st.floats(0.0, np.pi), st.integers(0, 2**32 - 1))
def test_dirac4d_lagrangian_matches_spectrum(tau, theta, seed):
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.normal(size=(5, 5)))
    x = validate_point(dirac4d_operator(tau, q[0]), 2)
    y = validate_point(dirac4d_operator(tau, np.cos(theta) * q[0] + np.sin(theta) * q[1]), 2)
    assert lagrangian(x, y) == pytest.approx(dirac4d_lagrangian(tau, theta), abs=1e-9)


def test_dirac4d_eight_points():
    cfg, pred = dirac4d_config(8)
    assert causal_action(cfg).action == pytest.approx(pred.action, abs=1e-10)
    for p in cfg.points:
        assert np.allclose(np.sort(p.eigenvalues), np.repeat([(1 - pred.tau) / 4, (1 + pred.tau) / 4], 2))


@given(st.floats(1.0, 3.0), st.integers(0, 2**32 - 1))
def test_dirac4d_product_identity(tau, seed):
    # F(x) F(y) satisfies a quadratic equation, so its eigenvalues come in pairs
    rng = np.random.default_rng(seed)
    a, b = rng.normal(size=(2, 5))
    a /= np.linalg.norm(a)
    b /= np.linalg.norm(b)
    c = a @ b
    p = 16 * dirac4d_operator(tau, a) @ dirac4d_operator(tau, b) - (1 + tau * tau * c) * np.eye(4)
    rhs = tau * tau * (1 + c) * (2 - tau * tau * (1 - c))
    assert np.allclose(p @ p, rhs * np.eye(4), atol=1e-10 * max(1, tau**4))


@pytest.mark.parametrize("n, f, m, action", [(1, 2, 2, 0.25), (2, 8, 2, 1 / 32), (1, 4, 4, 0.125)])
def test_orthogonal_floor(n, f, m, action):
    cfg = orthogonal_min_config(n, f, m)
    assert causal_action(cfg).action == pytest.approx(action, abs=1e-14)
    assert is_causally_trivial(cfg) == (True, [])


def test_orthogonal_needs_room():
    with pytest.raises(DimensionTooSmall):
        orthogonal_min_config(2, 6, 4)


def test_welch():
    assert welch_floor(2) == pytest.approx(1 / 6)
    assert welch_floor(3) == pytest.approx(1 / 12)
    assert causal_action(sic_tetrahedron_config()).action == pytest.approx(1 / 6, abs=1e-14)


def test_optimal_weights_examples():
    assert np.allclose(optimal_weights([3, 3, 3]), 1 / 3)
    assert np.allclose(optimal_weights([1, np.sqrt(2)]), [2 / 3, 1 / 3])
    assert np.allclose(optimal_weights([1, 1, np.sqrt(2)]), [0.4, 0.4, 0.2])


def test_identical_points_not_trivial():
    cfg, _ = dirac2d_config(2)
    x = cfg.points[0]
    ok, bad = is_causally_trivial(Configuration.equal_weights([x, x]))
    assert not ok and bad == [(0, 1)]


def test_octahedron_is_local_min():
    cfg, _ = dirac2d_config(6)
    rep = local_min_check(cfg)
    assert rep.weights_optimal
    assert all(v.lightlike_partners == 4 for v in rep.points)
    assert all(v.tau == pytest.approx(np.sqrt(2)) for v in rep.points)
    assert rep.is_local_min


def test_antipodal_projectors_are_restricted_but_too_few():
    cfg, _ = dirac2d_config(2)
    rep = local_min_check(cfg)
    # at tau = 1 the spacelike region is the antipode alone
    assert all(v.angular_restricted for v in rep.points)
    assert all(v.lightlike_partners == 1 and not v.hypotheses_met for v in rep.points)


def test_isolated_points_are_not_restricted():
    from causalfermion.operators import bloch_matrix

    # tau = 2: spacelike for angles in (pi/3, pi); 2 pi/3 is well inside
    dirs = [[0, 0, 1], [np.sin(2 * np.pi / 3), 0, np.cos(2 * np.pi / 3)]]
    cfg = Configuration.from_matrices([bloch_matrix(2.0, d) for d in dirs], [0.5, 0.5], n=1)
    rep = local_min_check(cfg)
    assert all(v.lightlike_partners == 0 for v in rep.points)
    assert not any(v.angular_restricted for v in rep.points)
    assert not rep.is_local_min


def test_local_min_requires_triviality():
    cfg, _ = dirac2d_config(2)
    x = cfg.points[0]
    with pytest.raises(NotCausallyTrivial):
        local_min_check(Configuration.equal_weights([x, x]))


def test_asymptotic_table():
    labels = {p.label: p for p in asymptotic_table(1, 8, 8)}
    assert labels["orthogonal-floor"].action == pytest.approx(1 / 16)
    assert {p.label: p for p in asymptotic_table(2, 8, 4)}["orthogonal-floor"].action == pytest.approx(1 / 64)
    big = {p.label: p for p in asymptotic_table(1, 2, 1000)}
    assert big["dirac2d-asymptote"].action == pytest.approx(np.sqrt(3) / (4 * np.pi))
    assert big["dirac2d-asymptote"].regime == Regime.ASYMPTOTIC
    assert "orthogonal-floor" not in big
