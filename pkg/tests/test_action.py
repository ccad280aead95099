import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from causalfermion.action import (
    boundedness_f2_trivial,
    causal_action,
    classify,
    critical_angles,
    lagrangian,
    lagrangian_f2_angles,
    lagrangian_n1_closed,
    product_spectrum,
)
from causalfermion.operators import BlochCoords, CausalClass, Configuration, f2_from_bloch, validate_point

from .conftest import random_point, random_unitary, random_unit

seeds = st.integers(0, 2**32 - 1)


def bloch_pair(tau, tau2, theta):
    x = f2_from_bloch(BlochCoords(tau, [0, 0, 1]))
    y = f2_from_bloch(BlochCoords(tau2, [np.sin(theta), 0, np.cos(theta)]))
    return x, y


def test_critical_angles_example():
    lo, hi = critical_angles(np.sqrt(2), np.sqrt(2))
    assert lo == pytest.approx(np.pi / 2)
    assert hi == pytest.approx(np.pi)


def test_f2_lagrangian_examples():
    assert lagrangian_f2_angles(2, 2, np.pi) == 0.0
    # same direction: x^2 has eigenvalues 9/4 and 1/4, so L = (9/4 - 1/4)^2 / 2
    assert lagrangian_f2_angles(2, 2, 0.0) == pytest.approx(2.0)
    x, y = bloch_pair(2, 2, 0.0)
    assert lagrangian(x, y) == pytest.approx(2.0)


def test_antipodal_pair_is_boundary():
    x, y = bloch_pair(2, 2, np.pi)
    spec = product_spectrum(x, y)
    assert np.allclose(spec.eigenvalues, [-0.75, -0.75])
    assert lagrangian(x, y) == pytest.approx(0.0, abs=1e-14)


def test_boundedness_trivial_formula():
    assert boundedness_f2_trivial(2, 4) == pytest.approx(3.25)
    for tau in (1.0, 1.7, 3.0):
        assert boundedness_f2_trivial(tau, 1) == pytest.approx((1 + tau * tau) ** 2 / 4)


@given(st.floats(1.0, 10.0), st.floats(1.0, 10.0), st.floats(0.0, np.pi))
def test_angle_form_matches_spectrum(tau, tau2, theta):
    x, y = bloch_pair(tau, tau2, theta)
    scale = (1 + tau * tau2) ** 2
    assert lagrangian(x, y) == pytest.approx(lagrangian_f2_angles(tau, tau2, theta), abs=1e-10 * scale)
    assert lagrangian(x, y) == pytest.approx(lagrangian_n1_closed(x, y), abs=1e-10 * scale)


@given(st.integers(2, 5), seeds)
def test_lagrangian_symmetric_and_nonnegative(f, seed):
    rng = np.random.default_rng(seed)
    x, y = random_point(rng, f), random_point(rng, f)
    a, b = lagrangian(x, y), lagrangian(y, x)
    assert a >= 0
    assert a == pytest.approx(b, rel=1e-9, abs=1e-12)
    assert classify(x, y) == classify(y, x)


@given(st.integers(2, 5), st.sampled_from([1, 2]), seeds)
def test_unitary_invariance(f, n, seed):
    rng = np.random.default_rng(seed)
    if f < 2 * n:
        f = 2 * n
    pts = [random_point(rng, f, n) for _ in range(3)]
    cfg = Configuration.equal_weights(pts)
    u = random_unitary(rng, f)
    moved = Configuration.equal_weights([validate_point(u @ p.matrix @ u.conj().T, n) for p in pts])
    r1, r2 = causal_action(cfg), causal_action(moved)
    assert r2.action == pytest.approx(r1.action, rel=1e-9, abs=1e-12)
    assert r2.boundedness == pytest.approx(r1.boundedness, rel=1e-9)


@given(seeds)
def test_spacelike_iff_lagrangian_vanishes(seed):
    rng = np.random.default_rng(seed)
    x, y = random_point(rng, 2), random_point(rng, 2)
    cls = classify(x, y)
    value = lagrangian(x, y)
    if cls == CausalClass.TIMELIKE:
        assert value > 0
    else:
        assert value == pytest.approx(0.0, abs=1e-12)


def test_classification_at_critical_angles():
    tau = 2.0
    lo, hi = critical_angles(tau, tau)
    assert classify(*bloch_pair(tau, tau, lo)) == CausalClass.LIGHTLIKE
    assert classify(*bloch_pair(tau, tau, 0.5 * (lo + hi))) == CausalClass.SPACELIKE
    assert classify(*bloch_pair(tau, tau, 0.5 * lo)) == CausalClass.TIMELIKE


def test_n2_equal_moduli_is_spacelike():
    rng = np.random.default_rng(3)
    x = random_point(rng, 6, n=2)
    # a point orthogonal in spin space gives the zero product
    v, _ = x.image_basis()
    w = np.linalg.svd(v.conj().T)[2].conj().T[:, 4:]
    assert classify(x, validate_point(w @ np.diag([1.0, 0.0]) @ w.conj().T, 2)) == CausalClass.SPACELIKE


def test_action_of_single_point_is_self_lagrangian():
    x = f2_from_bloch(BlochCoords(2.0, random_unit(np.random.default_rng(1))))
    rep = causal_action(Configuration.equal_weights([x]))
    assert rep.action == pytest.approx(lagrangian(x, x))
    assert rep.class_counts() == {"spacelike": 0, "timelike": 0, "lightlike": 0}
