"""Group factorization SL(n) = SO(n) A N+ and the chart on A x N+."""

import json
from dataclasses import dataclass

import numpy as np

from .densecore import as_square, orthonormalize_columns
from .errors import DomainError, InvalidInputError
from .lie_algebra import triu_idx, upper_pairs


@dataclass(frozen=True)
class IwasawaFactors:
    K: np.ndarray
    A: np.ndarray
    N: np.ndarray

    def product(self):
        return self.K @ self.A @ self.N

    def to_dict(self):
        return {"K": self.K.tolist(), "A": self.A.tolist(), "N": self.N.tolist()}


@dataclass(frozen=True)
class ChartPoint:
    """Point of A x N+ in the coordinates (a_1..a_{n-1}; y_12, y_13, ..., y_{n-1,n}).

    The last diagonal entry of A is never stored; it is ``1 / prod(a)``.
    """

    a: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float).reshape(-1)
        y = np.asarray(self.y, dtype=float).reshape(-1)
        n = a.size + 1
        if y.size != n * (n - 1) // 2:
            raise InvalidInputError(
                f"ChartPoint: {a.size} diagonal coordinates need {n * (n - 1) // 2} "
                f"upper coordinates, got {y.size}"
            )
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(y))):
            raise InvalidInputError("ChartPoint: non-finite coordinates")
        if np.any(a <= 0):
            raise DomainError("ChartPoint: diagonal coordinates must be positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.a.size + 1

    @classmethod
    def identity(cls, n):
        return cls(np.ones(n - 1), np.zeros(n * (n - 1) // 2))

    def to_dict(self):
        return {"n": self.n, "a": self.a.tolist(), "y": self.y.tolist()}

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        try:
            n = int(d["n"])
            p = cls(d["a"], d["y"])
        except (KeyError, TypeError) as exc:
            raise InvalidInputError(f"ChartPoint: malformed record ({exc})") from None
        if p.n != n:
            raise InvalidInputError(f"ChartPoint: n={n} but {p.a.size} diagonal coordinates")
        return p


def decompose_KAN(g):
    """Iwasawa factors of ``g`` in SL(n).

    K comes straight from Gram-Schmidt on the columns of g, A is the diagonal
    of R and N = A^-1 R. det g = 1 forces det K = +1, so no sign repair is
    needed for admissible input.
    """
    g = as_square(g, "g")
    det = np.linalg.det(g)
    if abs(det - 1.0) > 1e-8:
        raise DomainError(f"decompose_KAN: det g = {det!r}, expected 1")
    Q, R = orthonormalize_columns(g)
    d = np.diag(R)
    A = np.diag(d)
    N = np.triu(R / d[:, None])
    np.fill_diagonal(N, 1.0)
    return IwasawaFactors(K=Q, A=A, N=N)


def to_chart(factors):
    A, N = factors.A, factors.N
    n = A.shape[0]
    iu = triu_idx(n)
    return ChartPoint(np.diag(A)[: n - 1].copy(), N[iu].copy())


def from_chart(p):
    n = p.n
    a_full = np.append(p.a, 1.0 / np.prod(p.a))
    A = np.diag(a_full)
    N = np.eye(n)
    for (i, j), v in zip(upper_pairs(n), p.y):
        N[i, j] = v
    return A, N


def chart_arrays_to_group(a, y):
    """Vectorized ``g = A N`` for stacks of chart coordinates.

    ``a`` has shape (..., n-1), ``y`` shape (..., n(n-1)/2).
    """
    a = np.asarray(a, dtype=float)
    y = np.asarray(y, dtype=float)
    n = a.shape[-1] + 1
    a_full = np.concatenate([a, 1.0 / np.prod(a, axis=-1, keepdims=True)], axis=-1)
    N = np.zeros(a.shape[:-1] + (n, n))
    idx = np.arange(n)
    N[..., idx, idx] = 1.0
    iu = triu_idx(n)
    N[..., iu[0], iu[1]] = y
    return a_full[..., :, None] * N


def random_sl(n, rng):
    """Gaussian matrix rescaled to determinant +1."""
    while True:
        g = rng.standard_normal((n, n))
        det = np.linalg.det(g)
        if abs(det) > 1e-3:
            break
    if det < 0:
        g[0] = -g[0]
        det = -det
    return g / det ** (1.0 / n)
