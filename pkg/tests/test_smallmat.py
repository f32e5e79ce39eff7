import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ddsim import smallmat as sm

from conftest import random_hermitian


def test_pauli_algebra():
    assert np.allclose(sm.matmul(sm.I2, sm.I2), sm.I2)
    assert np.allclose(sm.matmul(sm.SX, sm.SX), sm.I2)
    assert np.allclose(sm.matmul(sm.SX, sm.SY), 1j * sm.SZ)


def test_matmul_dimension_mismatch():
    with pytest.raises(ValueError):
        sm.matmul(np.eye(2), np.eye(4))


def test_constants_are_read_only():
    with pytest.raises(ValueError):
        sm.SX[0, 0] = 5


def test_kron_ordering():
    assert np.allclose(sm.kron(sm.I2, sm.I2), np.eye(4))
    assert np.allclose(sm.kron(sm.SZ, sm.I2), np.diag([1, 1, -1, -1]))
    xx = sm.kron(sm.SX, sm.SX)
    assert np.allclose(xx @ xx, np.eye(4))
    # first factor is the slowest index
    a = np.arange(4).reshape(2, 2)
    b = np.array([[1, 10], [100, 1000]])
    k = sm.kron(a, b)
    assert k[1 * 2 + 0, 0 * 2 + 1] == a[1, 0] * b[0, 1]


def test_expm_zero_generator():
    assert np.allclose(sm.hermitian_expm(np.zeros((3, 3)), 1.7), np.eye(3))


def test_expm_half_pi_sigma_x():
    # exp(-i (pi/2) sx) = cos(pi/2) I - i sin(pi/2) sx = -i sx
    u = sm.hermitian_expm(sm.SX, np.pi / 2)
    assert np.allclose(u, [[0, -1j], [-1j, 0]], atol=1e-15)


def test_expm_rejects_non_hermitian():
    with pytest.raises(ValueError):
        sm.hermitian_expm(np.array([[0, 1], [0, 0]]), 1.0)


def test_expm_matches_series_for_small_generator(rng):
    from scipy.linalg import expm

    h = random_hermitian(rng, 5)
    assert np.allclose(sm.hermitian_expm(h, 0.3), expm(-1j * 0.3 * h), atol=1e-12)


def test_expm_accepts_stacks(rng):
    hs = np.array([random_hermitian(rng, 3) for _ in range(4)])
    us = sm.hermitian_expm(hs, 0.5)
    for h, u in zip(hs, us):
        assert np.allclose(u, sm.hermitian_expm(h, 0.5))


def test_expm_unitarity_random_batch(rng):
    for k in range(1000):
        d = 2 + k % 15
        h = random_hermitian(rng, d, scale=10 ** rng.uniform(-2, 8))
        u = sm.hermitian_expm(h, 10 ** rng.uniform(-9, -5))
        assert sm.unitarity_error(u) < 1e-10


@settings(max_examples=60, deadline=None)
@given(d=st.integers(2, 16), seed=st.integers(0, 2**32 - 1),
       t1=st.floats(-3, 3), t2=st.floats(-3, 3))
def test_group_property(d, seed, t1, t2):
    h = random_hermitian(np.random.default_rng(seed), d)
    lhs = sm.hermitian_expm(h, t1) @ sm.hermitian_expm(h, t2)
    assert np.max(np.abs(lhs - sm.hermitian_expm(h, t1 + t2))) < 1e-9


@settings(max_examples=60, deadline=None)
@given(d=st.integers(2, 16), seed=st.integers(0, 2**32 - 1), t=st.floats(-50, 50))
def test_inverse_property(d, seed, t):
    h = random_hermitian(np.random.default_rng(seed), d)
    prod = sm.hermitian_expm(h, t) @ sm.hermitian_expm(h, -t)
    assert np.max(np.abs(prod - np.eye(d))) < 1e-10


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), da=st.integers(1, 4), db=st.integers(1, 4))
def test_kron_mixed_product(seed, da, db):
    r = np.random.default_rng(seed)
    A, C = (r.normal(size=(2, da, da)) + 1j * r.normal(size=(2, da, da)))
    B, D = (r.normal(size=(2, db, db)) + 1j * r.normal(size=(2, db, db)))
    lhs = sm.kron(A, B) @ sm.kron(C, D)
    assert np.max(np.abs(lhs - sm.kron(A @ C, B @ D))) < 1e-10


def test_survival_probability_examples():
    plus = sm.plus_x()
    assert sm.survival_probability(np.eye(2), plus) == pytest.approx(1.0)
    assert sm.survival_probability(sm.SZ, plus) == pytest.approx(0.0, abs=1e-15)
    for theta in np.linspace(0, np.pi, 7):
        u = sm.hermitian_expm(sm.SZ, theta)
        assert sm.survival_probability(u, plus) == pytest.approx(np.cos(theta) ** 2, abs=1e-14)


def test_survival_probability_errors():
    with pytest.raises(ValueError):
        sm.survival_probability(np.eye(4), sm.plus_x())
    with pytest.raises(ValueError):
        sm.survival_probability(np.eye(2), np.array([1.0, 1.0]))


def test_strip_global_phase():
    u = np.exp(0.7j) * sm.hermitian_expm(sm.SX, 1e-3)
    v = sm.strip_global_phase(u)
    assert np.imag(np.trace(v)) == pytest.approx(0.0, abs=1e-15)
    assert np.real(np.trace(v)) > 0
