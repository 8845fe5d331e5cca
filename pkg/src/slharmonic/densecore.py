"""Dense real matrix kernels shared by the rest of the package.

Matrices are plain ``numpy.ndarray`` objects of shape ``(n, n)``; nothing here
mutates its arguments.
"""

import math

import numpy as np

from .errors import DomainError, InvalidInputError, SingularityError

# structural zero tolerance (trace-free, triangularity)
STRUCT_TOL = 1e-12


def as_square(X, name="matrix"):
    """Validate and return ``X`` as a float ``(n, n)`` array with ``n >= 2``."""
    try:
        A = np.asarray(X, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"{name}: not a real array ({exc})") from None
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidInputError(f"{name}: expected a square matrix, got shape {A.shape}")
    if A.shape[0] < 2:
        raise InvalidInputError(f"{name}: dimension must be at least 2")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError(f"{name}: non-finite entries")
    return A


def is_strictly_upper(X, tol=0.0):
    return bool(np.all(np.abs(np.tril(X)) <= tol))


def is_strictly_lower(X, tol=0.0):
    return bool(np.all(np.abs(np.triu(X)) <= tol))


def is_diagonal(X, tol=0.0):
    off = X - np.diag(np.diag(X))
    return bool(np.all(np.abs(off) <= tol))


def _nilpotent_series(X):
    n = X.shape[0]
    out = np.eye(n)
    term = np.eye(n)
    for k in range(1, n):
        term = term @ X / k
        out = out + term
    return out


def mat_exp(X):
    """Matrix exponential with exact fast paths.

    Strictly triangular input uses the finite power series, diagonal input
    the entrywise exponential. Everything else goes through scaling and
    squaring of a truncated Taylor series.
    """
    X = as_square(X)
    n = X.shape[0]
    if is_strictly_upper(X) or is_strictly_lower(X):
        return _nilpotent_series(X)
    if is_diagonal(X):
        return np.diag(np.exp(np.diag(X)))

    norm = np.linalg.norm(X, 1)
    s = max(0, int(math.ceil(math.log2(norm / 0.5)))) if norm > 0.5 else 0
    A = X / 2.0**s
    out = np.eye(n)
    term = np.eye(n)
    # ||A||_1 <= 1/2: 20 terms put the truncation far below rounding
    for k in range(1, 21):
        term = term @ A / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


def log_unipotent(U):
    """Logarithm of a unipotent upper triangular matrix (finite series)."""
    U = as_square(U)
    n = U.shape[0]
    Nm = U - np.eye(n)
    if not is_strictly_upper(Nm, STRUCT_TOL):
        raise DomainError("log_unipotent: U - I is not strictly upper triangular")
    Nm = np.triu(Nm, 1)
    out = np.zeros((n, n))
    power = np.eye(n)
    for k in range(1, n):
        power = power @ Nm
        out += (-1) ** (k + 1) * power / k
    return out


def orthonormalize_columns(g):
    """Factor ``g = Q R`` by classical Gram-Schmidt applied twice per column.

    ``R`` has a strictly positive diagonal. Raises ``SingularityError`` when
    ``|det g| <= 1e-12`` or a column collapses during orthogonalization.
    """
    g = as_square(g, "g")
    n = g.shape[0]
    if abs(np.linalg.det(g)) <= 1e-12:
        raise SingularityError("orthonormalize_columns: matrix is numerically singular")
    Q = np.zeros((n, n))
    R = np.zeros((n, n))
    scale = np.linalg.norm(g, np.inf)
    for j in range(n):
        v = g[:, j].copy()
        for _ in range(2):
            c = Q[:, :j].T @ v
            v -= Q[:, :j] @ c
            R[:j, j] += c
        r = np.linalg.norm(v)
        if r <= 1e-14 * scale:
            raise SingularityError(f"orthonormalize_columns: column {j} is dependent")
        Q[:, j] = v / r
        R[j, j] = r
    return Q, R
