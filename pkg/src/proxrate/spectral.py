"""Extreme eigenvalues of small symmetric PSD matrices by iteration.

Power iteration for the largest eigenvalue and inverse iteration for the
smallest; both use Rayleigh-quotient estimates, a relative convergence
tolerance, and a fixed internal start vector so results are deterministic.
"""
import numpy as np

from .errors import DomainError

_DEFAULT_TOL = 1e-10
_DEFAULT_MAX_ITERS = 10_000


def _start_vector(dim):
    # fixed seeded start: deterministic and almost surely not orthogonal
    # to the target eigenvector
    gen = np.random.Generator(np.random.PCG64(0x5EED))
    v = gen.random(dim) + 0.5
    return v / np.linalg.norm(v)


def largest_eigenvalue(M, tol=_DEFAULT_TOL, max_iters=_DEFAULT_MAX_ITERS):
    """Largest eigenvalue of a symmetric PSD matrix by power iteration."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError("matrix must be square")
    v = _start_vector(M.shape[0])
    lam = float(v @ M @ v)
    for _ in range(max_iters):
        w = M @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        lam_new = float(v @ M @ v)
        if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
            return lam_new
        lam = lam_new
    return lam


def smallest_eigenvalue(M, tol=_DEFAULT_TOL, max_iters=_DEFAULT_MAX_ITERS):
    """Smallest eigenvalue of a symmetric positive definite matrix.

    Inverse iteration; each step solves M y = v. Singular M is reported as
    a domain error rather than silently regularized.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError("matrix must be square")
    v = _start_vector(M.shape[0])
    lam = float(v @ M @ v)
    try:
        for _ in range(max_iters):
            w = np.linalg.solve(M, v)
            v = w / np.linalg.norm(w)
            lam_new = float(v @ M @ v)
            if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
                return lam_new
            lam = lam_new
    except np.linalg.LinAlgError as exc:
        raise DomainError(f"matrix is singular to working precision: {exc}") from exc
    return lam
