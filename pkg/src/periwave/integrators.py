"""Time integration of U'' + Omega^2 U = B(t).

Four steppers: explicit Stormer-Verlet, implicit midpoint, and trigonometric
integrators of order two and four. All consume forcing through a sampler
B(t) -> nodal vector (or a constant vector, or None for free oscillation).
"""

from collections import namedtuple

import numpy as np

from .linalg import SpectralDecomposition, build_trig_cache, factor_spd

TimeGrid = namedtuple("TimeGrid", ["tau", "N_T", "times"])
IntegratorState = namedtuple("IntegratorState", ["n", "U", "V"])
StabilityBound = namedtuple(
    "StabilityBound", ["tau_max_von_neumann", "tau_max_spectral", "k_max"])

# blow-up guard: stop stepping once the state exceeds this
DIVERGENCE_CAP = 1e250


def make_time_grid(T, tau):
    """Uniform time grid on [0, T] with N_T = floor(T/tau) steps.

    Ratios within 1e-9 of an integer round to it, so T=3, tau=0.1 gives 30.
    """
    if tau <= 0:
        raise ValueError("time step tau must be positive, got %r" % (tau,))
    if T <= 0:
        raise ValueError("final time T must be positive, got %r" % (T,))
    ratio = T / tau
    N_T = int(np.floor(ratio + 1e-9))
    if N_T < 1:
        raise ValueError("T=%g is shorter than one step tau=%g" % (T, tau))
    return TimeGrid(float(tau), N_T, np.arange(N_T + 1) * float(tau))


def as_sampler(B, n_nodes):
    """Normalize a forcing spec to a callable t -> vector (or None)."""
    if B is None:
        return None
    if callable(B):
        return B
    vec = np.asarray(B, dtype=float)
    if vec.shape != (n_nodes,):
        raise ValueError("constant forcing has shape %r, expected (%d,)"
                         % (vec.shape, n_nodes))
    return lambda t: vec


def _force(B, t):
    if B is None:
        return 0.0
    return B(t)


def step_stormer_verlet(state, omega2, B, tau):
    """One kick-drift-kick step.

    V_{n+1/2} = V_n + (tau/2) [-Omega^2 U_n + B(t_n)]
    U_{n+1}   = U_n + tau V_{n+1/2}
    V_{n+1}   = V_{n+1/2} + (tau/2) [-Omega^2 U_{n+1} + B(t_{n+1})]
    """
    n, U, V = state
    t = n * tau
    a0 = -(omega2 @ U) + _force(B, t)
    v_half = V + 0.5 * tau * a0
    U1 = U + tau * v_half
    a1 = -(omega2 @ U1) + _force(B, t + tau)
    V1 = v_half + 0.5 * tau * a1
    return IntegratorState(n + 1, U1, V1)


def step_implicit_midpoint(state, omega2, B, tau, solve=None):
    """One implicit midpoint step via the eliminated velocity update.

    (I + (tau^2/4) Omega^2) V_{n+1} =
        (I - (tau^2/4) Omega^2) V_n - tau Omega^2 U_n + (tau/2)(B_n + B_{n+1})
    U_{n+1} = U_n + (tau/2)(V_n + V_{n+1})

    `solve` is an optional prefactored solver for (I + (tau^2/4) Omega^2);
    without it the matrix is factored on every call.
    """
    n, U, V = state
    t = n * tau
    if solve is None:
        solve = factor_spd(np.eye(U.size) + 0.25 * tau ** 2 * omega2)
    w2U = omega2 @ U
    w2V = omega2 @ V
    rhs = V - 0.25 * tau ** 2 * w2V - tau * w2U
    if B is not None:
        rhs = rhs + 0.5 * tau * (B(t) + B(t + tau))
    V1 = solve(rhs)
    U1 = U + 0.5 * tau * (V + V1)
    return IntegratorState(n + 1, U1, V1)


def step_trig2(state, cache, B, tau):
    """One second-order trigonometric step, forcing sampled at t_n + tau/2.

    U_{n+1} = cos(tau W) U_n + tau sinc(tau W) V_n + (tau^2/2) sinc(tau W/2) B
    V_{n+1} = -W sin(tau W) U_n + cos(tau W) V_n + tau cos(tau W/2) B
    """
    if cache["order"] != 2 or cache["tau"] != tau:
        raise ValueError("cache was built for order=%r, tau=%r"
                         % (cache["order"], cache["tau"]))
    n, U, V = state
    U1 = cache["cos"] @ U + cache["tsinc"] @ V
    V1 = -(cache["osin"] @ U) + cache["cos"] @ V
    if B is not None:
        b_mid = B(n * tau + 0.5 * tau)
        U1 = U1 + cache["bu"] @ b_mid
        V1 = V1 + cache["bv"] @ b_mid
    return IntegratorState(n + 1, U1, V1)


def step_trig4(state, cache, B, tau):
    """One fourth-order trigonometric step (two Gauss nodes in time).

    The homogeneous part equals step_trig2; forcing is sampled at the Gauss
    points t_n + tau*beta/2 and t_n + tau*alpha/2 with alpha = 1 + 1/sqrt(3),
    beta = 1 - 1/sqrt(3), each filtered by the conjugate node's sinc/cos
    block (the alpha block multiplies the beta-point sample and vice versa).
    """
    if cache["order"] != 4 or cache["tau"] != tau:
        raise ValueError("cache was built for order=%r, tau=%r"
                         % (cache["order"], cache["tau"]))
    n, U, V = state
    U1 = cache["cos"] @ U + cache["tsinc"] @ V
    V1 = -(cache["osin"] @ U) + cache["cos"] @ V
    if B is not None:
        t = n * tau
        b_at_beta = B(t + 0.5 * tau * cache["beta"])
        b_at_alpha = B(t + 0.5 * tau * cache["alpha"])
        U1 = U1 + cache["bu_a"] @ b_at_beta + cache["bu_b"] @ b_at_alpha
        V1 = V1 + cache["bv_a"] @ b_at_beta + cache["bv_b"] @ b_at_alpha
    return IntegratorState(n + 1, U1, V1)


def stability_bounds(grid, kernel, material, omega2):
    """Largest stable Stormer-Verlet step, two ways.

    The von Neumann estimate majorizes the symbol by 2 sum_q C(q h) over the
    central row, q = 0 .. floor(D/h):

        tau_max_vn = sqrt(rho / (h sum_q C(q h)))

    The spectral bound is exact for the assembled operator:

        tau_max = 2 / omega_max = 2 sqrt(rho / (h k_max)).
    """
    q = np.arange(int(np.floor(grid.D / grid.h)) + 1)
    csum = float(np.sum(kernel(q * grid.h)))
    tau_vn = np.sqrt(material.rho / (grid.h * csum))
    lam = np.linalg.eigvalsh(omega2)
    omega_max = np.sqrt(max(lam[-1], 0.0))
    k_max = lam[-1] * material.rho / grid.h
    if omega_max == 0.0:
        raise ValueError("operator has no positive frequencies")
    return StabilityBound(float(tau_vn), 2.0 / omega_max, float(k_max))


class Trajectory:
    """Dense record of a run: times, stacked states, divergence flag."""

    def __init__(self, times, U, V, diverged=False):
        self.times = np.asarray(times, dtype=float)
        self.U = np.asarray(U, dtype=float)
        self.V = np.asarray(V, dtype=float)
        self.diverged = diverged

    @property
    def n_steps(self):
        return self.times.size - 1

    def state(self, n):
        return IntegratorState(n, self.U[n], self.V[n])

    def to_csv(self, path):
        """Long-format CSV: t, node index j, U, V."""
        with open(path, "w", newline="\n") as fh:
            fh.write("t,j,U,V\n")
            for i, t in enumerate(self.times):
                for j in range(self.U.shape[1]):
                    fh.write("%.16e,%d,%.16e,%.16e\n"
                             % (t, j, self.U[i, j], self.V[i, j]))


def integrate(omega2, U0, V0, time_grid, method, B=None, decomp=None):
    """Run a stepper over a time grid and record every state.

    Parameters
    ----------
    omega2 : dense operator matrix
    U0, V0 : initial displacement and velocity
    time_grid : TimeGrid
    method : "sv", "im", "trig2" or "trig4"
    B : forcing sampler t -> vector, constant vector, or None
    decomp : optional precomputed SpectralDecomposition (trig methods)

    If the state magnitude passes 1e250 the run stops, remaining snapshots
    hold the last state, and the trajectory is flagged diverged.
    """
    U0 = np.asarray(U0, dtype=float)
    V0 = np.asarray(V0, dtype=float)
    n_nodes = U0.size
    B = as_sampler(B, n_nodes)
    tau = time_grid.tau
    if method == "sv":
        step = lambda s: step_stormer_verlet(s, omega2, B, tau)
    elif method == "im":
        solve = factor_spd(np.eye(n_nodes) + 0.25 * tau ** 2 * omega2)
        step = lambda s: step_implicit_midpoint(s, omega2, B, tau, solve=solve)
    elif method in ("trig2", "trig4"):
        order = 2 if method == "trig2" else 4
        if decomp is None:
            decomp = SpectralDecomposition(omega2)
        cache = build_trig_cache(decomp, tau, order=order)
        if method == "trig2":
            step = lambda s: step_trig2(s, cache, B, tau)
        else:
            step = lambda s: step_trig4(s, cache, B, tau)
    else:
        raise ValueError("unknown method %r" % (method,))

    U_hist = np.empty((time_grid.N_T + 1, n_nodes))
    V_hist = np.empty((time_grid.N_T + 1, n_nodes))
    U_hist[0] = U0
    V_hist[0] = V0
    state = IntegratorState(0, U0, V0)
    diverged = False
    for n in range(time_grid.N_T):
        state = step(state)
        U_hist[n + 1] = state.U
        V_hist[n + 1] = state.V
        peak = np.max(np.abs(state.U))
        if not np.isfinite(peak) or peak > DIVERGENCE_CAP:
            diverged = True
            U_hist[n + 2:] = state.U
            V_hist[n + 2:] = state.V
            break
    return Trajectory(time_grid.times, U_hist, V_hist, diverged)


class EnergyReport:
    """Discrete energy per step, its components, and the drift series.

    `total` and `drift` follow the plain nodal sums (no grid weight). When
    the grid step is known, `continuum_drift` scales the series by h, the
    Riemann estimate of the continuum energy; that is the quantity whose
    drift reflects the spatial quadrature error rather than the node count.
    """

    def __init__(self, times, kinetic, elastic, external, grid_step=None):
        self.times = np.asarray(times, dtype=float)
        self.kinetic = np.asarray(kinetic, dtype=float)
        self.elastic = np.asarray(elastic, dtype=float)
        self.external = np.asarray(external, dtype=float)
        self.total = self.kinetic + self.elastic + self.external
        self.drift = self.total - self.total[0]
        self.grid_step = grid_step

    @property
    def max_drift(self):
        return float(np.max(np.abs(self.drift)))

    @property
    def continuum_drift(self):
        if self.grid_step is None:
            raise ValueError("continuum drift needs the grid step; "
                             "pass grid_step to energy_series")
        return self.grid_step * self.drift

    @property
    def max_continuum_drift(self):
        return float(np.max(np.abs(self.continuum_drift)))

    def to_csv(self, path):
        with open(path, "w", newline="\n") as fh:
            fh.write("n,t,E_kin,E_el,E_ext,E_total,drift\n")
            for n, t in enumerate(self.times):
                fh.write("%d,%.16e,%.16e,%.16e,%.16e,%.16e,%.16e\n"
                         % (n, t, self.kinetic[n], self.elastic[n],
                            self.external[n], self.total[n], self.drift[n]))


def energy_series(trajectory, omega2, B=None, grid_step=None):
    """Discrete energy E_n = 1/2 V^T V + 1/2 U^T Omega^2 U - U^T B per step.

    Omega^2 should be the problem's assembled operator; if a stepper ran on
    a regularized copy, the shift is the stepper's business, not the
    energy's. Only autonomous forcing is meaningful here (constant B or
    none); a callable B is rejected because the drift of a driven system
    carries no conservation signal.
    """
    if callable(B):
        raise ValueError("energy series needs autonomous forcing; "
                         "pass a constant vector or None")
    U, V = trajectory.U, trajectory.V
    kinetic = 0.5 * np.einsum("ij,ij->i", V, V)
    elastic = 0.5 * np.einsum("ij,ij->i", U, U @ omega2.T)
    if B is None:
        external = np.zeros(U.shape[0])
    else:
        Bvec = np.asarray(B, dtype=float)
        external = -(U @ Bvec)
    return EnergyReport(trajectory.times, kinetic, elastic, external,
                        grid_step=grid_step)
