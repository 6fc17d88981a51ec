"""Dense kernels for the small projected problems (size <= m+1).

QR and eigen decompositions are delegated to LAPACK through scipy; this module
adds the singularity checks the solvers rely on.
"""

import numpy as np
import scipy.linalg

from .errors import InvalidInputError, NumericalFailure, SingularityError

# diagonal of R below RANK_TOL * ||M|| counts as rank deficient
RANK_TOL = 1e-14


def _as_finite(M, name="M"):
    M = np.asarray(M)
    if not np.all(np.isfinite(M)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return M


def qr_factor(M):
    """Full QR of an (m+1) x m matrix: returns (Q, R) with Q square unitary."""
    M = _as_finite(M)
    if M.ndim != 2 or M.shape[1] < 1:
        raise InvalidInputError(f"expected a 2-d matrix with >= 1 column, got {M.shape}")
    Q, R = scipy.linalg.qr(M, mode="full")
    return Q, R


def _check_rank(R, normM):
    q = R.shape[1]
    diag = np.abs(np.diag(R[:q, :q]))
    bad = np.flatnonzero(diag <= RANK_TOL * normM)
    if normM == 0 or bad.size:
        j = int(bad[0]) if bad.size else 0
        raise SingularityError(f"matrix is numerically rank deficient at column {j}", index=j)


def least_squares(M, rhs):
    """Minimise ||rhs - M d||_2 for a tall full-rank M.

    Returns ``(d, resnorm)``.
    """
    M = _as_finite(M)
    rhs = _as_finite(rhs, "rhs")
    p, q = M.shape
    if p < q:
        raise InvalidInputError(f"least squares needs rows >= cols, got {M.shape}")
    if rhs.shape != (p,):
        raise InvalidInputError(f"rhs has shape {rhs.shape}, expected ({p},)")
    Q, R = scipy.linalg.qr(M, mode="full")
    _check_rank(R, np.linalg.norm(M))
    qtb = Q.conj().T @ rhs
    d = scipy.linalg.solve_triangular(R[:q], qtb[:q])
    return d, float(np.linalg.norm(qtb[q:]))


def solve_square(M, rhs):
    """Solve M x = rhs for square M, raising SingularityError if M is singular
    to working precision."""
    M = _as_finite(M)
    rhs = _as_finite(rhs, "rhs")
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got {M.shape}")
    Q, R = scipy.linalg.qr(M)
    _check_rank(R, np.linalg.norm(M))
    return scipy.linalg.solve_triangular(R, Q.conj().T @ rhs)


def small_eig(M):
    """Eigenvalues and unit-norm eigenvectors (as columns) of a small matrix."""
    M = _as_finite(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got {M.shape}")
    try:
        w, V = scipy.linalg.eig(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigenvalue iteration failed: {exc}") from exc
    V = V / np.linalg.norm(V, axis=0)
    return w.astype(complex), V.astype(complex)
