"""Tests for nonlinear bond-force assembly, closures, and the implicit stepper."""

import numpy as np
import pytest

from periwave import (
    Material,
    BondStretchForce,
    QuadraticStretchForce,
    CubicKernelForce,
    Grid,
    linearize_force,
    assemble_stiffness,
    make_time_grid,
    integrate,
    IntegratorState,
    FixedPointError,
    FullNonlinear,
    Linearized,
    Trapezoidal,
    Taylor,
    taylor_closure_force,
    bar_grid,
    NonlinearRHS,
    assemble_nonlinear_rhs,
    step_nonlinear_im,
    integrate_nonlinear,
)

HORIZON_RTOL = 1e-9


def test_bar_grid_layout():
    grid = bar_grid(4, 1.0)
    assert np.allclose(grid.nodes, [0.125, 0.375, 0.625, 0.875], atol=1e-15)
    assert grid.h == 0.25
    assert np.array_equal(grid.weights, np.ones(4))
    assert grid.D == 0.5
    with pytest.raises(ValueError):
        bar_grid(0)
    with pytest.raises(ValueError):
        bar_grid(4, -1.0)


def test_constant_displacement_carries_no_force():
    grid = bar_grid(10)
    force = BondStretchForce(3.0, 3.0 * grid.h)
    rhs = NonlinearRHS(grid, force, Material())
    out = rhs(0.7 * np.ones(10))
    assert np.max(np.abs(out)) < 1e-15


def test_three_node_assembly_against_brute_force(rng):
    # independent double loop over pairs, including the partial cell at the
    # horizon boundary (delta = 1.2 h here, so |xi| = h is a 0.7 cell)
    grid = bar_grid(3, 1.0)
    delta = 0.4
    force = BondStretchForce(1.0, delta)
    mat = Material(rho=2.0)
    rhs = NonlinearRHS(grid, force, mat)
    U = 0.05 * rng.standard_normal(3)

    x = grid.nodes
    expect = np.zeros(3)
    for i in range(3):
        for j in range(3):
            if i == j:
                continue
            xi = x[j] - x[i]
            if abs(xi) > delta * (1.0 + HORIZON_RTOL):
                continue
            frac = min(max((delta - abs(xi)) / grid.h + 0.5, 0.0), 1.0)
            expect[i] += frac * force(xi, U[j] - U[i])
    expect *= grid.h / mat.rho
    assert np.max(np.abs(rhs(U) - expect)) < 1e-14
    assert np.max(np.abs(assemble_nonlinear_rhs(rhs, U) - expect)) < 1e-14


@pytest.mark.parametrize("closure", [FullNonlinear(), Linearized(), Taylor(3)])
def test_momentum_is_conserved(closure, rng):
    grid = bar_grid(16)
    force = QuadraticStretchForce(5.0, 3.0 * grid.h)
    rhs = NonlinearRHS(grid, force, Material(), closure=closure)
    for _ in range(5):
        U = 0.1 * rng.standard_normal(16)
        g = rhs(U)
        assert abs(np.sum(g)) < 1e-12 * max(1.0, np.max(np.abs(g)))


def test_linearized_closure_equals_assembled_operator(rng):
    grid = bar_grid(32)
    force = BondStretchForce(2.0, 3.0 * grid.h)
    mat = Material()
    rhs = NonlinearRHS(grid, force, mat, closure=Linearized())
    op = assemble_stiffness(grid, linearize_force(force), mat)
    for _ in range(3):
        U = 0.01 * rng.standard_normal(32)
        gap = rhs(U) + op.omega2 @ U
        assert np.max(np.abs(gap)) < 1e-12 * max(1.0, np.max(np.abs(op.omega2 @ U)))


def test_linearized_closure_reproduces_linear_steppers(rng):
    grid = bar_grid(16)
    force = BondStretchForce(2.0, 3.0 * grid.h)
    mat = Material()
    rhs = NonlinearRHS(grid, force, mat, closure=Linearized())
    op = assemble_stiffness(grid, linearize_force(force), mat)
    U0 = 0.01 * np.sin(np.pi * grid.nodes)
    V0 = np.zeros(16)
    tg = make_time_grid(0.5, 0.05)
    sv_n = integrate_nonlinear(rhs, U0, V0, tg, "sv")
    sv_l = integrate(op.omega2, U0, V0, tg, "sv")
    assert np.max(np.abs(sv_n.U - sv_l.U)) < 1e-12
    im_n = integrate_nonlinear(rhs, U0, V0, tg, "im", fp_tol=1e-14)
    im_l = integrate(op.omega2, U0, V0, tg, "im")
    assert np.max(np.abs(im_n.U - im_l.U)) < 1e-9
    assert im_n.fp_iterations.shape == (10,)
    assert np.all(im_n.fp_iterations >= 1)
    assert sv_n.fp_iterations is None


def test_closure_gap_shrinks_quadratically_with_amplitude(rng):
    grid = bar_grid(16)
    force = QuadraticStretchForce(1.0, 3.0 * grid.h)
    mat = Material()
    full = NonlinearRHS(grid, force, mat, closure=FullNonlinear())
    lin = NonlinearRHS(grid, force, mat, closure=Linearized())
    U = 0.01 * np.sin(2.0 * np.pi * grid.nodes) + 0.005 * rng.standard_normal(16)
    d1 = np.max(np.abs(full(U) - lin(U)))
    d2 = np.max(np.abs(full(U / 2.0) - lin(U / 2.0)))
    assert 3.5 < d1 / d2 < 4.5


def test_taylor_order_one_is_the_linearization(rng):
    grid = bar_grid(12)
    force = BondStretchForce(1.5, 3.0 * grid.h)
    mat = Material()
    t1 = NonlinearRHS(grid, force, mat, closure=Taylor(1))
    lin = NonlinearRHS(grid, force, mat, closure=Linearized())
    U = 0.05 * rng.standard_normal(12)
    assert np.max(np.abs(t1(U) - lin(U))) < 1e-15


def test_taylor_order_three_exact_for_polynomial_branch_forces():
    grid = bar_grid(16)
    mat = Material()
    U = 0.05 * np.sin(2.0 * np.pi * grid.nodes)
    for force in (QuadraticStretchForce(1.0, 3.0 * grid.h),
                  CubicKernelForce(lambda r: 1.0 + r, 3.0 * grid.h)):
        full = NonlinearRHS(grid, force, mat, closure=FullNonlinear())
        t3 = NonlinearRHS(grid, force, mat, closure=Taylor(3))
        assert np.max(np.abs(t3(U) - full(U))) < 1e-12


def test_taylor_validation():
    with pytest.raises(ValueError):
        Taylor(0)


def test_finite_difference_taylor_detects_kinked_second_derivative():
    analytic = QuadraticStretchForce(1.0, 1.0)

    class CallOnly:
        delta = 1.0

        def __call__(self, xi, eta):
            return analytic(xi, eta)

    xi = np.array([0.3, 0.5])
    eta = np.array([0.05, -0.02])
    # order one only needs the first derivative, which exists; the kink in
    # the second derivative still costs the difference quotient one order
    out = taylor_closure_force(CallOnly(), 1, xi, eta)
    ref = taylor_closure_force(analytic, 1, xi, eta)
    assert np.max(np.abs(out - ref)) < 1e-4
    # |eta| eta^2 terms have no second eta-derivative at zero
    with pytest.raises(ValueError, match="second eta-derivative"):
        taylor_closure_force(CallOnly(), 2, xi, eta)


def test_finite_difference_taylor_handles_smooth_forces():
    analytic = CubicKernelForce(lambda r: np.ones_like(r), 1.0)

    class CallOnly:
        delta = 1.0

        def __call__(self, xi, eta):
            return analytic(xi, eta)

    xi = np.array([0.3, 0.5, 0.8])
    eta = np.array([0.1, -0.08, 0.02])
    out = taylor_closure_force(CallOnly(), 3, xi, eta)
    ref = taylor_closure_force(analytic, 3, xi, eta)
    assert np.max(np.abs(out - ref)) < 1e-5


def test_trapezoidal_closure_formulas(rng):
    grid = bar_grid(12)
    mat = Material()
    # linear-in-eta forces collapse to the linearization
    bond = BondStretchForce(2.0, 3.0 * grid.h)
    trap = NonlinearRHS(grid, bond, mat, closure=Trapezoidal())
    lin = NonlinearRHS(grid, bond, mat, closure=Linearized())
    U = 0.03 * rng.standard_normal(12)
    assert np.max(np.abs(trap(U) - lin(U))) < 1e-14
    # hand value for the cubic force: eta/2 (-a xi^2 + a (3 eta^2 - xi^2))
    a = 2.0
    force = CubicKernelForce(lambda r: a * np.ones_like(r), 1.0)
    compiled = Trapezoidal().compile(force, np.array([0.5]))
    eta = np.array([0.1])
    expect = 0.5 * eta * (-a * 0.25 + a * (3.0 * eta ** 2 - 0.25))
    assert abs(compiled(eta)[0] - expect[0]) < 1e-15

    class CallOnly:
        delta = 1.0

        def __call__(self, xi, eta):
            return force(xi, eta)

    fd = Trapezoidal().compile(CallOnly(), np.array([0.5]))
    assert abs(fd(eta)[0] - expect[0]) < 1e-8


def test_ghost_collar_translation_invariance():
    grid = bar_grid(8)
    delta = 3.0 * grid.h
    force = BondStretchForce(2.0, delta)
    gx = -(np.arange(1, 4) - 0.5) * grid.h
    shift = 0.37
    rhs = NonlinearRHS(grid, force, Material(), ghost_nodes=gx,
                       ghost_disp=shift * np.ones(3))
    out = rhs(shift * np.ones(8))
    assert np.max(np.abs(out)) < 1e-15


def test_ghost_collar_pulls_on_the_boundary():
    grid = bar_grid(8)
    delta = 3.0 * grid.h
    force = BondStretchForce(2.0, delta)
    gx = -(np.arange(1, 4) - 0.5) * grid.h
    # collar displaced left: bonds to it stretch and pull the near end left
    rhs = NonlinearRHS(grid, force, Material(), ghost_nodes=gx,
                       ghost_disp=-0.1 * np.ones(3))
    out = rhs(np.zeros(8))
    assert out[0] < 0.0
    assert np.all(out[:3] != 0.0)
    assert np.array_equal(out[3:], np.zeros(5))  # beyond collar reach


def test_ghost_validation():
    grid = bar_grid(8)
    force = BondStretchForce(1.0, 3.0 * grid.h)
    mat = Material()
    with pytest.raises(ValueError):
        NonlinearRHS(grid, force, mat, ghost_nodes=np.array([-0.1]))
    with pytest.raises(ValueError):
        NonlinearRHS(grid, force, mat, ghost_nodes=np.array([-0.1, -0.2]),
                     ghost_disp=np.zeros(3))
    with pytest.raises(ValueError):
        NonlinearRHS(grid, force, mat, ghost_nodes=np.array([grid.nodes[0]]),
                     ghost_disp=np.zeros(1))


def test_rhs_validation():
    grid = bar_grid(6)
    force = BondStretchForce(1.0, 3.0 * grid.h)
    mat = Material()
    varying = Grid("midpoint", grid.nodes, np.arange(1.0, 7.0), grid.h, grid.D)
    with pytest.raises(ValueError):
        NonlinearRHS(varying, force, mat)
    rhs = NonlinearRHS(grid, force, mat)
    with pytest.raises(ValueError):
        rhs(np.zeros(5))


def test_integrate_nonlinear_zero_data_stays_zero():
    grid = bar_grid(8)
    force = BondStretchForce(1.0, 3.0 * grid.h)
    rhs = NonlinearRHS(grid, force, Material())
    tg = make_time_grid(1.0, 0.1)
    for method in ("sv", "im"):
        tr = integrate_nonlinear(rhs, np.zeros(8), np.zeros(8), tg, method)
        assert np.max(np.abs(tr.U)) == 0.0
        assert not tr.diverged
    with pytest.raises(ValueError):
        integrate_nonlinear(rhs, np.zeros(8), np.zeros(8), tg, "rk4")


def test_implicit_step_converges_immediately_for_tiny_steps():
    grid = bar_grid(8)
    force = BondStretchForce(1.0, 3.0 * grid.h)
    rhs = NonlinearRHS(grid, force, Material())
    state = IntegratorState(0, 0.01 * np.sin(np.pi * grid.nodes), np.zeros(8))
    out, k = step_nonlinear_im(state, rhs, 1e-6)
    assert k == 1
    with pytest.raises(ValueError):
        step_nonlinear_im(state, rhs, 1e-6, fp_tol=0.0)


def test_implicit_step_reports_stalled_iteration():
    grid = bar_grid(8)
    force = BondStretchForce(500.0, 3.0 * grid.h)
    rhs = NonlinearRHS(grid, force, Material())
    state = IntegratorState(0, 0.1 * np.sin(np.pi * grid.nodes), np.zeros(8))
    with pytest.raises(FixedPointError) as info:
        step_nonlinear_im(state, rhs, 0.5, fp_max_iters=1)
    assert info.value.residual > 0.0
    assert info.value.iterations == 1


def test_integrate_nonlinear_divergence_freezes():
    grid = bar_grid(8)
    # negative bond constant: anti-restoring, blows up under explicit stepping
    force = BondStretchForce(-100.0, 3.0 * grid.h)
    rhs = NonlinearRHS(grid, force, Material())
    tg = make_time_grid(100.0, 0.5)
    tr = integrate_nonlinear(rhs, np.sin(np.pi * grid.nodes), np.zeros(8), tg, "sv")
    assert tr.diverged
    assert np.array_equal(tr.U[-1], tr.U[-2])
    assert np.all(np.isfinite(tr.U))
