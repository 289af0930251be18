"""Nonlinear bond-force assembly, closure approximations, and steppers.

The semi-discrete nonlinear model evolves nodal displacements U by

    U_i'' = g_i(U) = (h/rho) sum_{j != i, |x_j-x_i| <= delta} w_j f(x_j-x_i, U_j-U_i)

for a pairwise bond force f(xi, eta). Closures replace f by cheaper
approximations in eta: the linearization f(xi,0)+C(xi)eta, a trapezoidal
derivative average, or a Taylor polynomial of chosen order.
"""

import numpy as np

from .integrators import DIVERGENCE_CAP, IntegratorState, Trajectory
from .model import linearize_force, within_horizon
from .quadrature import Grid, horizon_volume_fraction


class FixedPointError(RuntimeError):
    """Implicit solve failed to contract; carries the last residual."""

    def __init__(self, message, residual, iterations):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


def taylor_closure_force(force, s, xi, eta):
    """Taylor approximation f(xi,0) + C_1(xi) eta + ... + C_s(xi) eta^s.

    Uses the model's own branch-aware coefficients (`eta_taylor`) when
    available, selected per element by sign(eta); otherwise the C_i come
    from iterated central finite differences with step 1e-3 max(1,|xi|),
    which supports s <= 3 and rejects forces whose eta-derivatives do not
    exist at eta=0 (one-sided second differences disagreeing).

    Parameters
    ----------
    force : pairwise bond force
    s : polynomial order >= 1
    xi, eta : broadcastable arrays of bond offsets and relative displacements

    Returns
    -------
    array of approximate force values
    """
    if s < 1:
        raise ValueError("Taylor order s must be >= 1, got %r" % (s,))
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    f0 = np.asarray(force(xi, np.zeros_like(xi)), dtype=float)

    if hasattr(force, "eta_taylor"):
        pos = force.eta_taylor(xi, s, eta_sign=1.0)
        neg = force.eta_taylor(xi, s, eta_sign=-1.0)
        out = np.broadcast_to(f0, np.broadcast(xi, eta).shape).copy()
        power = np.ones_like(eta)
        for i in range(s):
            power = power * eta
            ci = np.where(eta >= 0.0, pos[i], neg[i])
            out = out + ci * power
        return out

    if s > 3:
        raise ValueError("finite-difference Taylor closure supports s <= 3; "
                         "got s=%d for a force without eta_taylor" % (s,))
    d = 1e-3 * np.maximum(1.0, np.abs(xi))
    fp1 = np.asarray(force(xi, d), dtype=float)
    fm1 = np.asarray(force(xi, -d), dtype=float)
    coeffs = [(fp1 - fm1) / (2.0 * d)]
    if s >= 2:
        fp2 = np.asarray(force(xi, 2.0 * d), dtype=float)
        fm2 = np.asarray(force(xi, -2.0 * d), dtype=float)
        fph = np.asarray(force(xi, 0.5 * d), dtype=float)
        fmh = np.asarray(force(xi, -0.5 * d), dtype=float)
        # one-sided second differences straddle the true f'' by +-d f''' for
        # smooth forces, so their gap halves with the step; across a kink in
        # f'' the gap is the jump itself and survives halving
        gap = (fp2 - 2.0 * fp1 + 2.0 * fm1 - fm2) / d ** 2
        gap_half = (fp1 - 2.0 * fph + 2.0 * fmh - fm1) / (0.5 * d) ** 2
        scale = np.maximum.reduce([np.abs(fp1), np.abs(fm1), np.abs(fp2),
                                   np.abs(fm2)]) / d ** 2
        kink = (np.abs(gap) > 1e-7 * np.maximum(scale, 1e-300)) \
            & (np.abs(gap_half) > 0.6 * np.abs(gap))
        if np.any(kink):
            raise ValueError(
                "second eta-derivative does not exist at eta=0 for this "
                "force (one-sided differences disagree); provide eta_taylor "
                "or use s=1")
        coeffs.append(0.5 * (fp1 - 2.0 * f0 + fm1) / d ** 2)
    if s >= 3:
        coeffs.append((fp2 - 2.0 * fp1 + 2.0 * fm1 - fm2) / (12.0 * d ** 3))
    out = np.broadcast_to(f0, np.broadcast(xi, eta).shape).copy()
    power = np.ones_like(eta)
    for ci in coeffs:
        power = power * eta
        out = out + ci * power
    return out


class FullNonlinear:
    """Closure that evaluates the bond force exactly."""

    def compile(self, force, xi):
        return lambda eta: np.asarray(force(xi, eta), dtype=float)

    def __repr__(self):
        return "FullNonlinear()"


class Linearized:
    """Closure f(xi,0) + C(xi) eta with C the eta-derivative at zero.

    An explicit micromodulus kernel may be supplied; by default the force's
    own linearization is used.
    """

    def __init__(self, kernel=None):
        self.kernel = kernel

    def compile(self, force, xi):
        kernel = self.kernel if self.kernel is not None else linearize_force(force)
        C = np.asarray(kernel(xi), dtype=float)
        f0 = np.asarray(force(xi, np.zeros_like(xi)), dtype=float)
        return lambda eta: f0 + C * eta

    def __repr__(self):
        return "Linearized(kernel=%r)" % (self.kernel,)


class Trapezoidal:
    """Closure f(xi,0) + (eta/2)[df/deta(xi,0) + df/deta(xi,eta)].

    The derivative at the live eta makes schemes built on it implicit.
    Forces without an analytic `d_eta` get a central difference (step 1e-6).
    """

    def compile(self, force, xi):
        f0 = np.asarray(force(xi, np.zeros_like(xi)), dtype=float)
        if hasattr(force, "d_eta"):
            d_eta = lambda eta: np.asarray(force.d_eta(xi, eta), dtype=float)
        else:
            step = 1e-6
            d_eta = lambda eta: (np.asarray(force(xi, eta + step), dtype=float)
                                 - np.asarray(force(xi, eta - step), dtype=float)) / (2.0 * step)
        C0 = d_eta(np.zeros_like(xi))
        return lambda eta: f0 + 0.5 * eta * (C0 + d_eta(eta))

    def __repr__(self):
        return "Trapezoidal()"


class Taylor:
    """Closure by Taylor polynomial of order s in eta (see taylor_closure_force)."""

    def __init__(self, s):
        if s < 1:
            raise ValueError("Taylor order s must be >= 1, got %r" % (s,))
        self.s = int(s)

    def compile(self, force, xi):
        return lambda eta: taylor_closure_force(force, self.s, xi, eta)

    def __repr__(self):
        return "Taylor(s=%d)" % (self.s,)


def bar_grid(N, length=1.0):
    """Midpoint grid of N cells covering the bar [0, length]."""
    if N < 1:
        raise ValueError("need at least one cell, got N=%r" % (N,))
    if length <= 0:
        raise ValueError("bar length must be positive, got %r" % (length,))
    h = float(length) / N
    nodes = (np.arange(N) + 0.5) * h
    return Grid("midpoint", nodes, np.ones(N), h, 0.5 * float(length))


class NonlinearRHS:
    """Assembled nonlocal acceleration for a pairwise bond force.

    Parameters
    ----------
    grid : Grid carrying the unknown nodes (constant quadrature weights)
    force : bond force with finite horizon `delta`
    material : Material (rho scales the acceleration)
    closure : FullNonlinear (default), Linearized, Trapezoidal, or Taylor
    ghost_nodes, ghost_disp : optional frozen collar outside the grid;
        positions and prescribed displacements of nodes that contribute
        bonds but carry no unknowns (e.g. a clamped extension of a bar)

    Contributions come only from pairs with 0 < |x_j - x_i| <= delta; the
    self term is excluded (xi = 0 is singular for stretch-type forces).
    """

    def __init__(self, grid, force, material, closure=None,
                 ghost_nodes=None, ghost_disp=None):
        if np.ptp(grid.weights) != 0.0:
            raise ValueError("nonlinear assembly expects constant quadrature weights")
        self.grid = grid
        self.force = force
        self.material = material
        self.closure = closure if closure is not None else FullNonlinear()
        delta = force.delta
        x = grid.nodes
        n = x.size

        offsets = x[None, :] - x[:, None]
        mask = within_horizon(offsets, delta) & ~np.eye(n, dtype=bool)
        if np.any(offsets[mask] == 0.0):
            raise ValueError("grid contains coincident nodes inside the horizon")
        self._rows, self._cols = np.nonzero(mask)
        self._xi = offsets[mask]
        self._eval = self.closure.compile(force, self._xi)
        self._w = grid.weights[self._cols] * horizon_volume_fraction(
            self._xi, delta, grid.h)

        if (ghost_nodes is None) != (ghost_disp is None):
            raise ValueError("ghost_nodes and ghost_disp must be given together")
        if ghost_nodes is not None:
            gx = np.asarray(ghost_nodes, dtype=float)
            gu = np.asarray(ghost_disp, dtype=float)
            if gx.shape != gu.shape:
                raise ValueError("ghost positions and displacements differ in shape")
            goff = gx[None, :] - x[:, None]
            gmask = within_horizon(goff, delta)
            if np.any(goff[gmask] == 0.0):
                raise ValueError("ghost node coincides with a grid node")
            self._g_rows, g_cols = np.nonzero(gmask)
            self._g_xi = goff[gmask]
            self._g_eval = self.closure.compile(force, self._g_xi)
            self._g_disp = gu[g_cols]
            self._g_w = grid.weights[0] * horizon_volume_fraction(
                self._g_xi, delta, grid.h)
        else:
            self._g_rows = None

    @property
    def n_nodes(self):
        return self.grid.nodes.size

    def __call__(self, U):
        U = np.asarray(U, dtype=float)
        n = self.n_nodes
        if U.shape != (n,):
            raise ValueError("expected %d displacements, got shape %r" % (n, U.shape))
        eta = U[self._cols] - U[self._rows]
        contrib = self._w * self._eval(eta)
        g = np.bincount(self._rows, weights=contrib, minlength=n)
        if self._g_rows is not None:
            geta = self._g_disp - U[self._g_rows]
            g = g + np.bincount(self._g_rows,
                                weights=self._g_w * self._g_eval(geta),
                                minlength=n)
        return (self.grid.h / self.material.rho) * g


def assemble_nonlinear_rhs(rhs, U):
    """Acceleration vector g(U) for the assembled nonlinear right-hand side."""
    return rhs(U)


def step_nonlinear_sv(state, rhs, tau):
    """One kick-drift-kick step with accelerations g(U_n) and g(U_{n+1})."""
    n, U, V = state
    v_half = V + 0.5 * tau * rhs(U)
    U1 = U + tau * v_half
    V1 = v_half + 0.5 * tau * rhs(U1)
    return IntegratorState(n + 1, U1, V1)


def step_nonlinear_im(state, rhs, tau, fp_tol=1e-12, fp_max_iters=200):
    """One implicit midpoint step solved by fixed-point (Picard) iteration.

    The midpoint relations

        U_{n+1} = U_n + (tau/2)(V_n + V_{n+1})
        V_{n+1} = V_n + tau g((U_n + U_{n+1})/2)

    collapse to a fixed-point problem for U_{n+1}, iterated until the update
    falls below fp_tol in the max norm.

    Returns
    -------
    (state, iterations)

    Raises
    ------
    FixedPointError when fp_max_iters is exhausted; the exception carries
    the last residual.
    """
    if fp_tol <= 0:
        raise ValueError("fp_tol must be positive, got %r" % (fp_tol,))
    n, U, V = state
    base = U + tau * V
    U1 = base + 0.5 * tau ** 2 * rhs(U)
    for k in range(1, fp_max_iters + 1):
        U_next = base + 0.5 * tau ** 2 * rhs(0.5 * (U + U1))
        residual = float(np.max(np.abs(U_next - U1)))
        U1 = U_next
        if residual <= fp_tol:
            break
    else:
        raise FixedPointError(
            "implicit midpoint did not contract to %g within %d iterations "
            "(last residual %.3e)" % (fp_tol, fp_max_iters, residual),
            residual, fp_max_iters)
    V1 = V + tau * rhs(0.5 * (U + U1))
    return IntegratorState(n + 1, U1, V1), k


def integrate_nonlinear(rhs, U0, V0, time_grid, method="sv",
                        fp_tol=1e-12, fp_max_iters=200):
    """Run a nonlinear stepper over a time grid and record every state.

    method is "sv" (explicit) or "im" (implicit midpoint with Picard
    iteration). Divergence past 1e250 stops the run and flags the
    trajectory, freezing the remaining snapshots at the last state. For
    "im" the returned trajectory carries per-step iteration counts in
    `fp_iterations`.
    """
    U0 = np.asarray(U0, dtype=float)
    V0 = np.asarray(V0, dtype=float)
    tau = time_grid.tau
    n_steps = time_grid.N_T

    U = np.empty((n_steps + 1, U0.size))
    V = np.empty_like(U)
    U[0] = U0
    V[0] = V0
    iters = np.zeros(n_steps, dtype=int) if method == "im" else None
    state = IntegratorState(0, U0, V0)
    diverged = False
    for n in range(n_steps):
        if method == "sv":
            state = step_nonlinear_sv(state, rhs, tau)
        elif method == "im":
            state, k = step_nonlinear_im(state, rhs, tau,
                                         fp_tol=fp_tol, fp_max_iters=fp_max_iters)
            iters[n] = k
        else:
            raise ValueError("unknown nonlinear method %r" % (method,))
        U[n + 1] = state.U
        V[n + 1] = state.V
        if not np.all(np.isfinite(state.U)) or np.max(np.abs(state.U)) > DIVERGENCE_CAP:
            U[n + 2:] = state.U
            V[n + 2:] = state.V
            diverged = True
            break
    trajectory = Trajectory(time_grid.times, U, V, diverged=diverged)
    trajectory.fp_iterations = iters
    return trajectory
