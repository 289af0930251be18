"""Tests for the dense symmetric linear algebra helpers."""

import numpy as np
import pytest

from periwave import (
    eig_symmetric,
    matrix_sqrt_spd,
    sinc_unnormalized,
    SpectralDecomposition,
    build_trig_cache,
    factor_spd,
    solve_spd,
)


def random_spd(rng, n, shift=0.5):
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    lam = rng.uniform(shift, shift + 4.0, n)
    return (Q * lam) @ Q.T


def test_eig_symmetric_identity_and_diag():
    lam, Q = eig_symmetric(np.eye(3))
    assert np.allclose(lam, np.ones(3), atol=1e-15)
    lam, Q = eig_symmetric(np.diag([9.0, 1.0, 4.0]))
    assert np.allclose(lam, [1.0, 4.0, 9.0], atol=1e-14)


def test_eig_symmetric_reconstructs(rng):
    A = random_spd(rng, 20)
    lam, Q = eig_symmetric(A)
    assert np.max(np.abs((Q * lam) @ Q.T - A)) < 1e-10
    assert np.max(np.abs(Q.T @ Q - np.eye(20))) < 1e-12


def test_eig_symmetric_rejects_asymmetric():
    with pytest.raises(ValueError):
        eig_symmetric(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        eig_symmetric(np.ones((2, 3)))


def test_matrix_sqrt_diag():
    root = matrix_sqrt_spd(np.diag([4.0, 9.0]))
    assert np.max(np.abs(root - np.diag([2.0, 3.0]))) < 1e-14
    assert np.max(np.abs(matrix_sqrt_spd(np.array([[4.0]])) - [[2.0]])) < 1e-15


def test_matrix_sqrt_squares_back(rng):
    A = random_spd(rng, 12)
    root = matrix_sqrt_spd(A)
    assert np.max(np.abs(root @ root - A)) < 1e-9
    assert np.max(np.abs(root - root.T)) < 1e-10


def test_matrix_sqrt_rejects_singular():
    # one exact zero eigenvalue, as the unshifted operator always has
    A = np.array([[1.0, -1.0], [-1.0, 1.0]])
    with pytest.raises(ValueError, match="regularize"):
        matrix_sqrt_spd(A)


def test_sinc_unnormalized_values():
    assert sinc_unnormalized(0.0) == 1.0
    assert abs(sinc_unnormalized(np.pi)) < 1e-15
    x = np.array([1e-9, 1e-5, 1e-3, 0.5, 2.0])
    exact = np.array([1.0 - 1e-18 / 6.0, np.sin(1e-5) / 1e-5, np.sin(1e-3) / 1e-3,
                      np.sin(0.5) / 0.5, np.sin(2.0) / 2.0])
    assert np.max(np.abs(sinc_unnormalized(x) - exact)) < 1e-15
    assert np.max(np.abs(sinc_unnormalized(-x) - exact)) < 1e-15


def test_spectral_decomposition_clamps_null_mode():
    A = np.array([[1.0, -1.0], [-1.0, 1.0]])
    dec = SpectralDecomposition(A)
    assert dec.lam[0] == 0.0
    assert dec.omega[0] == 0.0
    assert abs(dec.omega_max - np.sqrt(2.0)) < 1e-14


def test_spectral_decomposition_rejects_indefinite():
    with pytest.raises(ValueError):
        SpectralDecomposition(np.diag([-1.0, 2.0]))


def test_spectral_function_application(rng):
    A = random_spd(rng, 8)
    dec = SpectralDecomposition(A)
    cosA = dec.func(np.cos)
    vec = rng.standard_normal(8)
    assert np.max(np.abs(dec.apply_func(np.cos, vec) - cosA @ vec)) < 1e-12
    # f(Omega) commutes with Omega^2
    comm = cosA @ A - A @ cosA
    assert np.max(np.abs(comm)) < 1e-9 * np.max(np.abs(A))


def test_trig_cache_scalar_half_period():
    tau = 0.25
    dec = SpectralDecomposition(np.array([[np.pi ** 2 / tau ** 2]]))
    cache = build_trig_cache(dec, tau, order=2)
    assert abs(cache["cos"][0, 0] + 1.0) < 1e-12
    assert abs(cache["osin"][0, 0]) < 1e-10
    assert cache["tau"] == tau
    assert cache["order"] == 2


def test_trig_cache_matches_scalar_recomputation(rng):
    A = random_spd(rng, 2)
    tau = 0.3
    lam, Q = np.linalg.eigh(A)
    om = np.sqrt(lam)
    dec = SpectralDecomposition(A)
    cache = build_trig_cache(dec, tau, order=2)
    expect = {
        "cos": (Q * np.cos(tau * om)) @ Q.T,
        "tsinc": (Q * (tau * np.sin(tau * om) / (tau * om))) @ Q.T,
        "osin": (Q * (om * np.sin(tau * om))) @ Q.T,
        "bu": (Q * (0.5 * tau ** 2 * np.sin(0.5 * tau * om) / (0.5 * tau * om))) @ Q.T,
        "bv": (Q * (tau * np.cos(0.5 * tau * om))) @ Q.T,
    }
    for name, ref in expect.items():
        assert np.max(np.abs(cache[name] - ref)) < 1e-11, name


def test_trig_cache_order4_blocks(rng):
    A = random_spd(rng, 4)
    cache = build_trig_cache(SpectralDecomposition(A), 0.2, order=4)
    for name in ("bu_a", "bu_b", "bv_a", "bv_b"):
        assert cache[name].shape == (4, 4)
    assert abs(cache["alpha"] - (1.0 + 1.0 / np.sqrt(3.0))) < 1e-15
    assert abs(cache["beta"] - (1.0 - 1.0 / np.sqrt(3.0))) < 1e-15


def test_trig_cache_pythagorean_identity(rng):
    A = random_spd(rng, 6)
    dec = SpectralDecomposition(A)
    tau = 0.4
    c = np.cos(tau * dec.omega)
    s = np.sin(tau * dec.omega)
    assert np.max(np.abs(c ** 2 + s ** 2 - 1.0)) < 1e-12


def test_trig_cache_validation(rng):
    dec = SpectralDecomposition(random_spd(rng, 3))
    with pytest.raises(ValueError):
        build_trig_cache(dec, -0.1)
    with pytest.raises(ValueError):
        build_trig_cache(dec, 0.1, order=3)


def test_solve_spd_hand_values():
    assert np.allclose(solve_spd(np.eye(3), np.array([1.0, 2.0, 3.0])),
                       [1.0, 2.0, 3.0], atol=1e-14)
    assert np.allclose(solve_spd(np.diag([2.0, 4.0]), np.array([2.0, 4.0])),
                       [1.0, 1.0], atol=1e-14)


def test_factor_spd_random_residual(rng):
    A = random_spd(rng, 30)
    solve = factor_spd(A)
    b = rng.standard_normal(30)
    x = solve(b)
    res = np.max(np.abs(A @ x - b))
    bound = 1e-10 * (np.max(np.abs(A)) * np.max(np.abs(x)) + np.max(np.abs(b)))
    assert res <= bound


def test_factor_spd_rejects_indefinite():
    with pytest.raises(ValueError):
        factor_spd(np.diag([1.0, -2.0]))
