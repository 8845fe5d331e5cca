"""Structure of sl(n, R): Cartan and Iwasawa splittings, projections, brackets.

Two complements of h = so(n) are supported:

* ``iwasawa``: m = a + n+ (trace-free diagonal plus strictly upper)
* ``cartan``:  m = s (trace-free symmetric)

Only the Cartan complement is Ad(SO(n))-stable; :func:`check_reductivity`
measures how far the Iwasawa complement is from it.
"""

import enum
import functools
import json
from dataclasses import dataclass

import numpy as np

from .densecore import STRUCT_TOL, as_square, orthonormalize_columns
from .errors import DomainError, InvalidInputError


class ComplementChoice(str, enum.Enum):
    IWASAWA = "iwasawa"
    CARTAN = "cartan"


def as_choice(m):
    try:
        return ComplementChoice(m)
    except ValueError:
        raise InvalidInputError(f"unknown complement choice {m!r}") from None


@dataclass(frozen=True)
class AlgebraElement:
    X: np.ndarray
    h_part: np.ndarray
    a_part: np.ndarray
    n_part: np.ndarray


def _check_trace(X):
    tr = np.trace(X, axis1=-2, axis2=-1)
    scale = np.maximum(1.0, np.linalg.norm(X, axis=(-2, -1)))
    if np.any(np.abs(tr) > STRUCT_TOL * scale):
        raise DomainError(f"matrix is not trace-free (|tr| = {np.max(np.abs(tr)):.3e})")


def split_iwasawa(X):
    """so(n) + a + n+ components of a trace-free matrix."""
    X = as_square(X, "X")
    _check_trace(X)
    L = np.tril(X, -1)
    D = np.diag(np.diag(X))
    U = np.triu(X, 1)
    return AlgebraElement(X=X, h_part=L - L.T, a_part=D, n_part=U + L.T)


def split_cartan(X):
    """Return ``(skew, sym)`` with ``skew + sym == X``."""
    X = as_square(X, "X")
    _check_trace(X)
    return (X - X.T) / 2, (X + X.T) / 2


def _project_batch(X, m):
    # works on stacks (..., n, n); no validation
    if m is ComplementChoice.IWASAWA:
        mask = _lower_mask(X.shape[-1])
        lower = np.where(mask, X, 0.0)
        return np.where(mask, 0.0, X) + np.swapaxes(lower, -1, -2)
    return (X + np.swapaxes(X, -1, -2)) / 2


def project_m(X, m):
    """Projection onto the complement ``m`` along so(n); idempotent."""
    m = as_choice(m)
    X = as_square(X, "X")
    _check_trace(X)
    return _project_batch(X, m)


def bracket(X, Y):
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape != Y.shape:
        raise InvalidInputError(f"bracket: shape mismatch {X.shape} vs {Y.shape}")
    return X @ Y - Y @ X


def m_dim(n, m=None):
    # both complements have dimension n(n+1)/2 - 1
    return (n - 1) + n * (n - 1) // 2


@functools.lru_cache(maxsize=None)
def triu_idx(n):
    """Cached strict-upper indices, row-major."""
    return np.triu_indices(n, 1)


@functools.lru_cache(maxsize=None)
def _lower_mask(n):
    return np.tril(np.ones((n, n), dtype=bool), -1)


def upper_pairs(n):
    """Strict upper index pairs in row-major order (the normative y ordering)."""
    return [(p, q) for p in range(n) for q in range(p + 1, n)]


def m_basis(n, m):
    """Fixed ordered basis of ``m`` as an array of shape ``(r, n, n)``.

    iwasawa: H_k = E_kk - E_nn (k < n) then E_pq row-major.
    cartan:  E_pq + E_qp row-major then H_k.
    """
    m = as_choice(m)
    H = []
    for k in range(n - 1):
        B = np.zeros((n, n))
        B[k, k] = 1.0
        B[n - 1, n - 1] = -1.0
        H.append(B)
    E = []
    for p, q in upper_pairs(n):
        B = np.zeros((n, n))
        B[p, q] = 1.0
        if m is ComplementChoice.CARTAN:
            B[q, p] = 1.0
        E.append(B)
    mats = H + E if m is ComplementChoice.IWASAWA else E + H
    return np.array(mats)


def coefficients(X, m):
    """Coefficients of ``X`` (or a stack of them) in :func:`m_basis`.

    Read-off is exact: H_k is the only basis element touching the k-th
    diagonal slot (k < n) and E_pq the only one touching slot (p, q).
    """
    m = as_choice(m)
    X = np.asarray(X, dtype=float)
    n = X.shape[-1]
    iu = triu_idx(n)
    diag = np.diagonal(X, axis1=-2, axis2=-1)[..., : n - 1]
    upper = X[..., iu[0], iu[1]]
    if m is ComplementChoice.IWASAWA:
        return np.concatenate([diag, upper], axis=-1)
    return np.concatenate([upper, diag], axis=-1)


def assemble(coeffs, n, m):
    """Inverse of :func:`coefficients`: ``sum_k c_k A_k``."""
    m = as_choice(m)
    c = np.asarray(coeffs, dtype=float)
    k = n - 1
    if m is ComplementChoice.IWASAWA:
        d, u = c[..., :k], c[..., k:]
    else:
        u, d = c[..., : c.shape[-1] - k], c[..., c.shape[-1] - k :]
    out = np.zeros(c.shape[:-1] + (n, n))
    idx = np.arange(k)
    out[..., idx, idx] = d
    out[..., n - 1, n - 1] = -d.sum(axis=-1)
    iu = triu_idx(n)
    out[..., iu[0], iu[1]] = u
    if m is ComplementChoice.CARTAN:
        out[..., iu[1], iu[0]] = u
    return out


def random_so(n, rng):
    """Orthonormalized Gaussian matrix with the determinant forced to +1."""
    Q, _ = orthonormalize_columns(rng.standard_normal((n, n)))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


def random_m(n, m, rng):
    return assemble(rng.standard_normal(m_dim(n, m)), n, m)


def adjoint(h, X):
    return h @ X @ h.T


@dataclass(frozen=True)
class ReductivityReport:
    choice: str
    n: int
    samples: int
    seed: int
    max_relative_deviation: float
    worst_case_h: np.ndarray
    worst_case_X: np.ndarray

    def to_dict(self):
        return {
            "choice": self.choice,
            "n": self.n,
            "samples": self.samples,
            "seed": self.seed,
            "max_relative_deviation": self.max_relative_deviation,
            "worst_case_h": self.worst_case_h.tolist(),
            "worst_case_X": self.worst_case_X.tolist(),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def check_reductivity(m, samples, seed, n=2):
    """Sampled measure of how far Ad(SO(n)) moves ``m`` out of itself.

    Reports ``max ||Ad(h)X - P_m(Ad(h)X)|| / ||X||`` over ``samples`` random
    pairs; a reductive complement gives rounding-level values.
    """
    m = as_choice(m)
    if int(samples) < 1:
        raise DomainError("check_reductivity: samples must be >= 1")
    if int(n) < 2:
        raise InvalidInputError("check_reductivity: n must be >= 2")
    rng = np.random.default_rng(seed)
    worst = -1.0
    worst_h = worst_X = None
    for _ in range(int(samples)):
        h = random_so(n, rng)
        X = random_m(n, m, rng)
        Z = adjoint(h, X)
        dev = np.linalg.norm(Z - _project_batch(Z, m)) / np.linalg.norm(X)
        if dev > worst:
            worst, worst_h, worst_X = float(dev), h, X
    return ReductivityReport(
        choice=m.value,
        n=int(n),
        samples=int(samples),
        seed=int(seed),
        max_relative_deviation=worst,
        worst_case_h=worst_h,
        worst_case_X=worst_X,
    )
