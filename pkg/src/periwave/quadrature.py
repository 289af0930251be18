"""Spatial grids and quadrature assembly of the stiffness operator.

The semidiscrete system is U'' + Omega^2 U = B(t) with Omega^2 = (h/rho) K,
where the stiffness matrix has entries

    k_ij = alpha_i delta_ij - w_j C_ij,   alpha_i = sum_k w_k C_ik,

C_ij = C(x_j - x_i). Rows of K sum to zero, so Omega^2 annihilates constants
(rigid translation) and is symmetric positive semidefinite for the shipped
constant-weight rules.
"""

import numpy as np

MIDPOINT = "midpoint"
GAUSS2 = "gauss2"

_SQRT3 = np.sqrt(3.0)


class Grid:
    """Quadrature grid: nodes, weights, step, scheme tag, half-width."""

    def __init__(self, scheme, nodes, weights, h, D):
        self.scheme = scheme
        self.nodes = np.asarray(nodes, dtype=float)
        self.weights = np.asarray(weights, dtype=float)
        self.h = float(h)
        self.D = float(D)
        if self.nodes.shape != self.weights.shape:
            raise ValueError("nodes and weights length mismatch")
        if np.any(np.diff(self.nodes) <= 0):
            raise ValueError("grid nodes must be strictly increasing")

    @property
    def n_nodes(self):
        return self.nodes.size

    def __repr__(self):
        return "Grid(%s, %d nodes, h=%g, D=%g)" % (
            self.scheme, self.n_nodes, self.h, self.D)


def build_grid(scheme, N=None, M=None, h=None, D=None):
    """Build a quadrature grid.

    Parameters
    ----------
    scheme : "midpoint" or "gauss2"
    N : node-count parameter; midpoint grids have N+1 nodes (N even).
        For gauss2, N = 2M - 1 may be given instead of M.
    M : number of subintervals (gauss2 only)
    h : spatial step (midpoint: cell width; gauss2: subinterval width 2D/M)
    D : domain half-width (gauss2; for midpoint it follows as (N+1)h/2)

    Midpoint: nodes x_j = (j - N/2) h, the midpoints of N+1 cells covering
    [-(N+1)h/2, (N+1)h/2], weights 1. Gauss two-point: node pairs
    m_j -/+ h/(2 sqrt 3) about the midpoints m_j of M subintervals of
    [-D, D], weights 1/2.
    """
    if scheme == MIDPOINT:
        if N is None or N <= 0 or N % 2 != 0:
            raise ValueError("midpoint grids need positive even N, got %r" % (N,))
        if h is None or h <= 0:
            raise ValueError("midpoint grids need a positive step h, got %r" % (h,))
        j = np.arange(N + 1)
        nodes = (j - N / 2.0) * h
        weights = np.ones(N + 1)
        return Grid(MIDPOINT, nodes, weights, h, (N + 1) * h / 2.0)
    if scheme == GAUSS2:
        if M is None:
            if N is None or N % 2 != 1:
                raise ValueError("gauss2 grids need M, or odd N = 2M - 1, got N=%r" % (N,))
            M = (N + 1) // 2
        if M <= 0:
            raise ValueError("gauss2 grids need positive M, got %r" % (M,))
        if D is None:
            if h is None or h <= 0:
                raise ValueError("gauss2 grids need D or a positive h")
            D = M * h / 2.0
        if h is None:
            h = 2.0 * D / M
        if abs(2.0 * D / M - h) > 1e-12 * max(h, 1.0):
            raise ValueError("inconsistent gauss2 sizes: h=%r, 2D/M=%r" % (h, 2.0 * D / M))
        mids = -D + (np.arange(M) + 0.5) * h
        nodes = np.empty(2 * M)
        nodes[0::2] = mids - h / (2.0 * _SQRT3)
        nodes[1::2] = mids + h / (2.0 * _SQRT3)
        weights = np.full(2 * M, 0.5)
        return Grid(GAUSS2, nodes, weights, h, D)
    raise ValueError("unknown grid scheme %r" % (scheme,))


class StiffnessOperator:
    """Assembled semidiscrete operator Omega^2 = (h/rho) K plus bookkeeping."""

    def __init__(self, omega2, grid, material, alpha, band_radius=None):
        self.omega2 = omega2
        self.grid = grid
        self.material = material
        self.alpha = alpha
        self.band_radius = band_radius
        self.s_reg = None
        self.shift = 0.0

    @property
    def regularized(self):
        return self.s_reg is not None

    @property
    def n(self):
        return self.omega2.shape[0]


def horizon_volume_fraction(xi, horizon, h):
    """Fraction of the width-h quadrature cell at offset xi inside the horizon.

    A bond whose cell straddles the horizon boundary contributes only the
    covered fraction; in particular a bond at |xi| = horizon exactly gets
    weight 1/2. This turns the composite rule into a trapezoid-type rule on
    the horizon ball, exact for integrands linear in |xi| (such as
    C(xi) xi^2 for stretch-type kernels C = c/|xi|), so wave speeds
    calibrated from the continuum integral carry over to the lattice.
    """
    if not np.isfinite(horizon):
        return np.ones_like(np.asarray(xi, dtype=float))
    return np.clip((horizon - np.abs(xi)) / h + 0.5, 0.0, 1.0)


def assemble_stiffness(grid, kernel, material):
    """Assemble Omega^2 from a micromodulus kernel by composite quadrature.

    The diagonal alpha_i sums w_k C_ik over k != i (the k = i term cancels
    against w_i C_ii in k_ii, so singular linearized kernels never get
    sampled at xi = 0). Finite-horizon kernels get cell-coverage weights at
    the horizon boundary (see horizon_volume_fraction).
    """
    x = grid.nodes
    w = grid.weights
    if np.ptp(w) != 0.0:
        raise ValueError("non-constant quadrature weights give a nonsymmetric K")
    n = x.size
    offsets = x[None, :] - x[:, None]
    offdiag = ~np.eye(n, dtype=bool)
    C = np.zeros((n, n))
    C[offdiag] = kernel(offsets[offdiag])
    horizon = getattr(kernel, "horizon", np.inf)
    if np.isfinite(horizon):
        C *= horizon_volume_fraction(offsets, horizon, grid.h)
    K = -C * w[None, :]
    alpha = C @ w
    np.fill_diagonal(K, alpha)
    # exact symmetry: constant weights make w_j C_ij symmetric already,
    # but roundoff in exp can differ across the diagonal; enforce it
    K = 0.5 * (K + K.T)
    omega2 = (grid.h / material.rho) * K

    band_radius = None
    horizon = getattr(kernel, "horizon", np.inf)
    if np.isfinite(horizon):
        band_radius = int(np.floor(horizon / grid.h + 1e-9))
    return StiffnessOperator(omega2, grid, material, alpha, band_radius)


def regularize(op, s_reg):
    """Shift the operator to Omega^2 + h^s_reg I, making it positive definite.

    A second regularization of the same operator is rejected.
    """
    if op.regularized:
        raise ValueError("operator already regularized with s_reg=%g" % op.s_reg)
    shift = op.grid.h ** s_reg
    out = StiffnessOperator(op.omega2 + shift * np.eye(op.n), op.grid,
                            op.material, op.alpha, op.band_radius)
    out.s_reg = float(s_reg)
    out.shift = shift
    return out


def default_regularization_order(grid):
    """Quadrature order of the grid scheme: 2 for midpoint, 4 for gauss2."""
    return 2.0 if grid.scheme == MIDPOINT else 4.0


def sample_function(grid, f):
    """Sample a function of x at the grid nodes."""
    return np.asarray(f(grid.nodes), dtype=float)


def export_matrix(matrix, path):
    """Write a dense matrix as plain text, one row per line, full precision."""
    matrix = np.asarray(matrix)
    with open(path, "w", newline="\n") as fh:
        for row in matrix:
            fh.write(" ".join("%.16e" % v for v in row))
            fh.write("\n")
