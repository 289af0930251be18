"""Dense symmetric linear algebra for the semidiscrete operator.

Everything here works from a single eigendecomposition Omega^2 = Q diag(lam) Q^T.
Matrix functions f(Omega) are Q diag(f(omega)) Q^T with omega = sqrt(lam);
eigenvalues in [-tol, 0) from roundoff are clamped to zero, so the exact
rigid-translation null mode of the unregularized operator is handled without
regularizing.
"""

import numpy as np
from scipy.linalg import cho_factor, cho_solve

_SYM_TOL = 1e-12
_CLAMP_TOL = 1e-10


def _check_symmetric(A, name="matrix"):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("%s must be square, got shape %r" % (name, A.shape))
    scale = max(1.0, np.abs(A).max())
    if np.abs(A - A.T).max() > _SYM_TOL * scale:
        raise ValueError("%s is not symmetric to %g" % (name, _SYM_TOL))
    return A


def eig_symmetric(A):
    """Eigendecomposition of a symmetric matrix, eigenvalues ascending.

    Returns
    -------
    lam : (n,) eigenvalues
    Q : (n, n) orthonormal eigenvectors, columns
    """
    A = _check_symmetric(A)
    return np.linalg.eigh(A)


def matrix_sqrt_spd(A):
    """Symmetric square root of a symmetric positive definite matrix.

    Rejects singular input: the unregularized operator has an exact zero
    eigenvalue, regularize first if a definite square root is needed.
    """
    lam, Q = eig_symmetric(A)
    scale = max(1.0, lam[-1])
    if lam[0] <= _CLAMP_TOL * scale:
        raise ValueError(
            "matrix is not positive definite (min eigenvalue %.3e); "
            "regularize the operator first" % lam[0])
    return (Q * np.sqrt(lam)) @ Q.T


def sinc_unnormalized(x):
    """sin(x)/x with the removable singularity filled by its Taylor series.

    Not numpy.sinc, which is sin(pi x)/(pi x).
    """
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    xs = np.where(small, 0.0, x)
    x2 = x * x
    series = 1.0 - x2 / 6.0 + x2 * x2 / 120.0
    with np.errstate(invalid="ignore"):
        ratio = np.where(small, series, np.sin(xs) / np.where(small, 1.0, xs))
    if ratio.ndim == 0:
        return float(ratio)
    return ratio


class SpectralDecomposition:
    """Eigendecomposition of Omega^2 with clamped frequencies omega >= 0."""

    def __init__(self, omega2):
        lam, Q = eig_symmetric(omega2)
        scale = max(1.0, abs(lam[-1]))
        if lam[0] < -_CLAMP_TOL * scale:
            raise ValueError(
                "operator has a negative eigenvalue %.3e; not a stiffness operator"
                % lam[0])
        self.lam = np.maximum(lam, 0.0)
        self.omega = np.sqrt(self.lam)
        self.Q = Q

    @property
    def omega_max(self):
        return float(self.omega[-1])

    def func(self, f):
        """Dense matrix f(Omega) from a vectorized scalar function of omega."""
        return (self.Q * f(self.omega)) @ self.Q.T

    def apply_func(self, f, vec):
        """f(Omega) @ vec without forming the dense matrix."""
        return self.Q @ (f(self.omega) * (self.Q.T @ vec))


def build_trig_cache(decomp, tau, order=2):
    """Precompute the dense matrix blocks of a trigonometric step of size tau.

    Returns a dict of named blocks. Common to both orders:

      cos   : cos(tau Omega)
      tsinc : tau sinc(tau Omega)          (U line, acting on V)
      osin  : Omega sin(tau Omega)         (V line, acting on U)

    order=2 adds the midpoint forcing blocks

      bu : (tau^2/2) sinc(tau Omega / 2)
      bv : tau cos(tau Omega / 2)

    order=4 adds two-node forcing blocks with alpha = 1 + 1/sqrt(3),
    beta = 1 - 1/sqrt(3); bu_a, bv_a act on B(t_n + tau beta / 2) and
    bu_b, bv_b on B(t_n + tau alpha / 2):

      bu_a : (tau^2/4) alpha sinc(tau alpha Omega / 2)
      bu_b : (tau^2/4) beta  sinc(tau beta  Omega / 2)
      bv_a : (tau/2) cos(tau alpha Omega / 2)
      bv_b : (tau/2) cos(tau beta  Omega / 2)
    """
    if tau <= 0:
        raise ValueError("step tau must be positive, got %r" % (tau,))
    blocks = {
        "cos": decomp.func(lambda om: np.cos(tau * om)),
        "tsinc": decomp.func(lambda om: tau * sinc_unnormalized(tau * om)),
        "osin": decomp.func(lambda om: om * np.sin(tau * om)),
    }
    if order == 2:
        blocks["bu"] = decomp.func(
            lambda om: 0.5 * tau ** 2 * sinc_unnormalized(0.5 * tau * om))
        blocks["bv"] = decomp.func(lambda om: tau * np.cos(0.5 * tau * om))
    elif order == 4:
        alpha = 1.0 + 1.0 / np.sqrt(3.0)
        beta = 1.0 - 1.0 / np.sqrt(3.0)
        blocks["bu_a"] = decomp.func(
            lambda om: 0.25 * tau ** 2 * alpha * sinc_unnormalized(0.5 * tau * alpha * om))
        blocks["bu_b"] = decomp.func(
            lambda om: 0.25 * tau ** 2 * beta * sinc_unnormalized(0.5 * tau * beta * om))
        blocks["bv_a"] = decomp.func(lambda om: 0.5 * tau * np.cos(0.5 * tau * alpha * om))
        blocks["bv_b"] = decomp.func(lambda om: 0.5 * tau * np.cos(0.5 * tau * beta * om))
        blocks["alpha"] = alpha
        blocks["beta"] = beta
    else:
        raise ValueError("trig cache order must be 2 or 4, got %r" % (order,))
    blocks["tau"] = tau
    blocks["order"] = order
    return blocks


def factor_spd(A):
    """Cholesky-factor a symmetric positive definite matrix once.

    Returns a solve closure; raises ValueError if A is not SPD.
    """
    A = _check_symmetric(A)
    try:
        c_and_lower = cho_factor(A)
    except np.linalg.LinAlgError as exc:
        raise ValueError("matrix is not positive definite: %s" % exc)
    def solve(b):
        return cho_solve(c_and_lower, b)
    return solve


def solve_spd(A, b):
    """Solve A x = b for symmetric positive definite A via Cholesky."""
    return factor_spd(A)(b)
