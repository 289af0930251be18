"""Reference solutions and error norms.

Three oracles: the exact solution of the linear nonlocal model with Gaussian
kernel (a one-dimensional Fourier integral), the d'Alembert solution of the
classical wave limit, and the separation-of-variables series for the
fixed-free bar. Error reports measure trajectories against any of them.
"""

import numpy as np

_TWO_OVER_SQRT_PI = 2.0 / np.sqrt(np.pi)
_memo = {}


def _gauss_legendre_panels(a, b, n_panels, n_points=12):
    """Nodes and weights of composite Gauss-Legendre on [a, b]."""
    xg, wg = np.polynomial.legendre.leggauss(n_points)
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    s = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    w = (half[:, None] * wg[None, :]).ravel()
    return s, w


def _panel_count(t, x_max, S):
    # resolve the integrand oscillation: phase rate <= 2|x| + 2|t| per unit s
    periods = (2.0 * x_max + 2.0 * abs(t)) * S / (2.0 * np.pi)
    return max(40, int(np.ceil(2.5 * periods)))


def _s_rule(t, x_max, tol):
    S = np.sqrt(np.log(1.0 / tol)) + 2.0
    s, w = _gauss_legendre_panels(0.0, S, _panel_count(t, x_max, S))
    envelope = np.exp(-s * s)
    phase = 2.0 * np.sqrt(-np.expm1(-s * s))
    return s, w * envelope * _TWO_OVER_SQRT_PI, phase


def peridynamic_exact(x, t, tol=1e-10):
    """Exact solution of the Gaussian-kernel model from Gaussian initial data.

    u*(x,t) = (2/sqrt(pi)) int_0^inf exp(-s^2) cos(2sx) cos(2t sqrt(1-exp(-s^2))) ds

    evaluated by composite Gauss-Legendre on [0, S], S = sqrt(ln(1/tol)) + 2,
    with the panel count sized to the oscillation rate (grows with |t| and
    max|x|). Units are those of rho = E = l = 1; rescale time by sqrt(E)
    otherwise.

    Parameters
    ----------
    x : scalar or array of positions
    t : scalar time
    tol : quadrature tolerance, in (0, 1e-6]

    Returns
    -------
    scalar or array matching x
    """
    if not (0.0 < tol <= 1e-6):
        raise ValueError("tol must lie in (0, 1e-6], got %r" % (tol,))
    scalar_in = np.isscalar(x) or np.ndim(x) == 0
    if scalar_in:
        key = (round(float(x) / 1e-14), round(float(t) / 1e-14),
               round(tol / 1e-14))
        hit = _memo.get(key)
        if hit is not None:
            return hit
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    s, w_eff, phase = _s_rule(t, float(np.max(np.abs(xa), initial=0.0)), tol)
    vals = np.cos(2.0 * np.outer(xa, s)) @ (w_eff * np.cos(t * phase))
    if scalar_in:
        out = float(vals[0])
        _memo[key] = out
        return out
    return vals


def peridynamic_exact_table(x, times, tol=1e-10):
    """u*(x_j, t_k) for all nodes and times at once.

    One s-grid sized for the largest |t| serves every row; the result has
    shape (len(times), len(x)).
    """
    x = np.asarray(x, dtype=float)
    times = np.asarray(times, dtype=float)
    t_max = float(np.max(np.abs(times), initial=0.0))
    s, w_eff, phase = _s_rule(t_max, float(np.max(np.abs(x), initial=0.0)), tol)
    A = np.cos(np.outer(times, phase)) * w_eff[None, :]
    X = np.cos(2.0 * np.outer(s, x))
    return A @ X


def wave_dalembert(u0, x, t, c):
    """d'Alembert solution of the classical wave equation, zero initial velocity.

    Returns (u0(x - c t) + u0(x + c t)) / 2.
    """
    x = np.asarray(x, dtype=float)
    return 0.5 * (u0(x - c * t) + u0(x + c * t))


def nonlinear_series(x, t, K_terms, epsilon, L, E=1.0, rho=1.0):
    """Series solution for the fixed-free bar stretched into u0 = epsilon x.

    u(x,t) = (8 epsilon L / pi^2) sum_{k=0}^{K-1} (-1)^k / (2k+1)^2
             sin((2k+1) pi x / 2L) cos(sqrt(E/rho) (2k+1) pi t / 2L)

    Returns the K_terms partial sum. The dropped tail is bounded by
    (8 epsilon L / pi^2) sum_{k>=K} (2k+1)^{-2}; see series_tail_bound.
    """
    if K_terms < 1:
        raise ValueError("K_terms must be at least 1, got %r" % (K_terms,))
    x = np.asarray(x, dtype=float)
    k = np.arange(K_terms)
    m = 2 * k + 1
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    amp = sign / m ** 2
    space = np.sin(np.pi * np.outer(x, m) / (2.0 * L))
    clock = np.cos(np.sqrt(E / rho) * np.pi * m * t / (2.0 * L))
    out = (8.0 * epsilon * L / np.pi ** 2) * (space @ (amp * clock))
    if np.ndim(x) == 0:
        return float(out)
    return out


def series_tail_bound(K_terms, epsilon, L):
    """Bound on the truncation error of nonlinear_series after K_terms."""
    k = np.arange(K_terms, K_terms + 200000)
    return float(8.0 * epsilon * L / np.pi ** 2 * np.sum(1.0 / (2 * k + 1) ** 2))


class ErrorReport:
    """Per-step max-norm errors of a trajectory against a reference."""

    def __init__(self, times, per_step):
        self.times = np.asarray(times, dtype=float)
        self.per_step = np.asarray(per_step, dtype=float)

    @property
    def max_error(self):
        """max over steps k = 1 .. N_T (the initial sample is excluded)."""
        if self.per_step.size < 2:
            return 0.0
        return float(np.max(self.per_step[1:]))


def error_norms(trajectory, reference, grid, time_grid):
    """Max-norm error history e_k = max_j |U_j(t_k) - u_ref(x_j, t_k)|.

    Parameters
    ----------
    trajectory : Trajectory with U of shape (N_T + 1, n_nodes)
    reference : callable (x array, t scalar) -> array, or a precomputed
        array of shape (N_T + 1, n_nodes)
    grid : spatial Grid (nodes supply the x_j)
    time_grid : TimeGrid
    """
    U = trajectory.U
    if callable(reference):
        ref = np.empty_like(U)
        for k, t in enumerate(time_grid.times):
            ref[k] = reference(grid.nodes, t)
    else:
        ref = np.asarray(reference, dtype=float)
        if ref.shape != U.shape:
            raise ValueError("reference table shape %r does not match "
                             "trajectory %r" % (ref.shape, U.shape))
    per_step = np.max(np.abs(U - ref), axis=1)
    return ErrorReport(time_grid.times, per_step)


def convergence_orders(errors):
    """Observed orders log2(e_i / e_{i+1}) down a halving ladder."""
    e = np.asarray(errors, dtype=float)
    if np.any(e <= 0):
        raise ValueError("convergence orders need positive errors")
    return np.log2(e[:-1] / e[1:])


def reference_to_csv(x, times, values, path):
    """Write reference samples as CSV columns x, t, u_star."""
    values = np.asarray(values, dtype=float)
    with open(path, "w", newline="\n") as fh:
        fh.write("x,t,u_star\n")
        for k, t in enumerate(times):
            for j, xj in enumerate(x):
                fh.write("%.16e,%.16e,%.16e\n" % (xj, t, values[k, j]))
