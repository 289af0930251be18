"""Tests for materials, micromodulus kernels, bond forces, and linearization."""

import numpy as np
import pytest
from scipy.integrate import quad

from periwave import (
    Material,
    GaussianKernel,
    FiniteHorizonKernel,
    BondStretchForce,
    QuadraticStretchForce,
    CubicKernelForce,
    ProblemSpec,
    eval_micromodulus,
    eval_force,
    linearize_force,
    within_horizon,
)


def test_material_defaults():
    mat = Material()
    assert (mat.rho, mat.E, mat.l, mat.L) == (1.0, 1.0, 1.0, 1.0)


@pytest.mark.parametrize("bad", [dict(rho=0.0), dict(E=-1.0), dict(l=0.0), dict(L=-2.5)])
def test_material_rejects_nonpositive_parameters(bad):
    with pytest.raises(ValueError):
        Material(**bad)


def test_gaussian_kernel_peak_value():
    # C(0) = 4 E / (l^3 sqrt(pi)) = 4/sqrt(pi) for unit material
    kern = GaussianKernel(Material())
    assert abs(kern(0.0) - 4.0 / np.sqrt(np.pi)) < 1e-14
    assert abs(kern(0.0) - 2.2567583341910251) < 1e-13


def test_gaussian_kernel_even_and_nonnegative():
    kern = GaussianKernel(Material(E=2.0, l=0.5))
    for xi0 in (0.3, 1.7):
        assert kern(xi0) == kern(-xi0)
    rng = np.random.default_rng(7)
    xi = 4.0 * rng.standard_normal(1000)
    vals = kern(xi)
    assert np.all(vals >= 0.0)
    assert np.max(np.abs(vals - kern(-xi))) == 0.0


def test_gaussian_kernel_energy_calibration():
    # int C(xi) xi^2 / 2 dxi over the line recovers the Young modulus
    mat = Material(E=3.5, l=0.7)
    kern = GaussianKernel(mat)
    val, err = quad(lambda s: kern(s) * s ** 2, 0.0, 20.0 * mat.l, epsabs=1e-14)
    assert abs(val - mat.E) < 1e-10


def test_gaussian_fourier_symbol_closed_form():
    kern = GaussianKernel(Material())
    # symbol(kappa) = (4E/l^2)(1 - exp(-kappa^2 l^2/4)); kappa=2 gives 4(1-1/e)
    assert abs(kern.fourier_symbol(2.0) - 4.0 * (1.0 - np.exp(-1.0))) < 1e-14
    assert kern.fourier_symbol(0.0) == 0.0


def test_gaussian_fourier_symbol_matches_quadrature():
    kern = GaussianKernel(Material(E=2.0, l=1.3))
    for kappa in (0.5, 2.0, 7.0):
        val, err = quad(lambda s, k=kappa: 2.0 * kern(s) * (1.0 - np.cos(k * s)),
                        0.0, 20.0 * kern.material.l, epsabs=1e-13, limit=200)
        assert abs(kern.fourier_symbol(kappa) - val) < 1e-9


def test_gaussian_effective_range_cuts_at_1e16():
    kern = GaussianKernel(Material(l=0.4))
    r = kern.effective_range()
    assert abs(kern(r) / kern(0.0) - 1e-16) < 1e-22
    assert kern.horizon == np.inf


def test_finite_horizon_kernel_vanishes_outside():
    kern = FiniteHorizonKernel(lambda xi: np.ones_like(xi), 0.5)
    assert kern(0.6) == 0.0
    assert kern(0.3) == 1.0
    assert kern.horizon == 0.5
    assert kern.effective_range() == 0.5
    vals = kern(np.array([-0.7, -0.2, 0.0, 0.49, 0.51]))
    assert np.array_equal(vals, np.array([0.0, 1.0, 1.0, 1.0, 0.0]))


def test_finite_horizon_membership_tolerates_roundoff():
    delta = 0.25
    kern = FiniteHorizonKernel(lambda xi: np.ones_like(xi), delta)
    # a few ulp of slack on the boundary, but not more
    assert kern(delta * (1.0 + 1e-10)) == 1.0
    assert kern(delta * (1.0 + 1e-8)) == 0.0
    assert within_horizon(delta * (1.0 + 1e-10), delta)
    assert not within_horizon(delta * (1.0 + 1e-8), delta)


def test_finite_horizon_rejects_nonpositive_delta():
    with pytest.raises(ValueError):
        FiniteHorizonKernel(lambda xi: xi, 0.0)


def test_bond_stretch_force_hand_values():
    force = BondStretchForce(1.0, 1.0)
    assert force(0.5, 0.0) == 0.0
    # stretch (0.6 - 0.5)/0.5 = 0.2, deformed bond points right
    assert abs(force(0.5, 0.1) - 0.2) < 1e-15
    # outside the horizon the bond carries no force
    assert force(1.5, 0.1) == 0.0


def test_bond_stretch_force_antisymmetry(rng):
    force = BondStretchForce(2.0, 1.0)
    xi = rng.uniform(-1.0, 1.0, 500)
    xi = np.where(xi == 0.0, 0.5, xi)
    eta = 0.3 * rng.standard_normal(500)
    assert np.array_equal(force(-xi, -eta), -force(xi, eta))


def test_bond_stretch_force_rejects_zero_offset():
    force = BondStretchForce(1.0, 1.0)
    with pytest.raises(ValueError):
        force(0.0, 0.1)
    with pytest.raises(ValueError):
        force.d_eta(np.array([0.5, 0.0]), np.zeros(2))


def test_bond_stretch_d_eta_matches_difference_quotient():
    force = BondStretchForce(3.0, 1.0)
    xi = np.array([0.2, -0.7, 0.95])
    eta = np.array([0.01, -0.02, 0.05])
    step = 1e-7
    fd = (force(xi, eta + step) - force(xi, eta - step)) / (2.0 * step)
    assert np.max(np.abs(force.d_eta(xi, eta) - fd)) < 1e-6
    assert abs(force.d_eta(0.5, 0.0) - 6.0) < 1e-14


def test_quadratic_stretch_force_hand_value():
    force = QuadraticStretchForce(1.0, 1.0)
    # (|0.1| - |0.5|)^2 * 0.1 = 0.016
    assert abs(force(0.5, 0.1) - 0.016) < 1e-16
    assert force(0.5, 0.0) == 0.0
    assert force(1.5, 0.2) == 0.0


def test_cubic_kernel_force_hand_value():
    force = CubicKernelForce(lambda r: 2.0 * np.ones_like(r), 1.0)
    # 2 (eta^2 - xi^2) eta at xi=0.5, eta=0.1
    assert abs(force(0.5, 0.1) - 2.0 * (0.01 - 0.25) * 0.1) < 1e-16
    assert force(1.5, 0.1) == 0.0


def test_force_evaluators_are_odd_in_eta(rng):
    delta = 1.0
    forces = [QuadraticStretchForce(1.5, delta),
              CubicKernelForce(lambda r: 1.0 + r, delta)]
    xi = rng.uniform(0.05, delta, 200)
    eta = 0.2 * rng.standard_normal(200)
    for force in forces:
        assert np.max(np.abs(force(xi, -eta) + force(xi, eta))) < 1e-15


def test_linearize_bond_stretch_recovers_micromodulus():
    force = BondStretchForce(2.0, 1.0)
    kern = linearize_force(force)
    assert isinstance(kern, FiniteHorizonKernel)
    # C(xi) = c/|xi| inside the horizon
    assert abs(kern(0.5) - 4.0) < 1e-13
    assert kern(1.2) == 0.0


def test_linearize_quadratic_stretch():
    kern = linearize_force(QuadraticStretchForce(1.0, 1.0))
    # df/deta(xi, 0) = c xi^2
    assert abs(kern(0.5) - 0.25) < 1e-13


def test_linearize_falls_back_to_finite_differences(rng):
    analytic = QuadraticStretchForce(1.0, 1.0)

    class CallOnly:
        delta = 1.0

        def __call__(self, xi, eta):
            return analytic(xi, eta)

    kern_fd = linearize_force(CallOnly())
    kern_an = linearize_force(analytic)
    xi = rng.uniform(0.05, 1.0, 100)
    ref = kern_an(xi)
    err = np.abs(kern_fd(xi) - ref)
    assert np.max(err / np.maximum(np.abs(ref), 1e-12)) < 1e-5


def test_linearized_kernels_even_and_nonnegative(rng):
    for force in (BondStretchForce(1.0, 1.0), QuadraticStretchForce(2.0, 1.0)):
        kern = linearize_force(force)
        xi = rng.uniform(0.02, 1.0, 1000)
        vals = kern(xi)
        assert np.all(vals >= 0.0)
        assert np.max(np.abs(kern(-xi) - vals)) == 0.0


def test_eval_helpers_delegate():
    mat = Material()
    kern = GaussianKernel(mat)
    force = BondStretchForce(1.0, 1.0)
    assert eval_micromodulus(kern, 0.3) == kern(0.3)
    assert eval_force(force, 0.5, 0.1) == force(0.5, 0.1)


def test_problem_spec_defaults_and_validation():
    mat = Material()
    prob = ProblemSpec(mat, GaussianKernel(mat), lambda x: np.exp(-x * x))
    x = np.linspace(-1.0, 1.0, 5)
    assert np.array_equal(prob.v0(x), np.zeros(5))
    assert prob.b is None
    assert prob.T == 1.0
    with pytest.raises(ValueError):
        ProblemSpec(mat, GaussianKernel(mat), lambda x: x, T=0.0)
