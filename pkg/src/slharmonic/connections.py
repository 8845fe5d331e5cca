"""Invariant connection functions beta: m x m -> m.

Four kinds are available:

``canonical2``  beta = 0
``canonical1``  beta = 1/2 [X, Y]_m
``riemannian``  beta = 1/2 [X, Y]_m + U(X, Y), U from an inner product on m
``alpha``       beta = (XY + YX)/2 - tr(XY)/n Id
"""

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from .densecore import as_square
from .errors import ConfigurationError, DomainError, InvalidInputError
from .lie_algebra import (
    ComplementChoice,
    _check_trace,
    _project_batch,
    as_choice,
    assemble,
    coefficients,
    m_basis,
    random_m,
    random_so,
)

MEMBERSHIP_TOL = 1e-10


class Kind(str, enum.Enum):
    CANONICAL1 = "canonical1"
    CANONICAL2 = "canonical2"
    RIEMANNIAN = "riemannian"
    ALPHA = "alpha"


@dataclass(frozen=True)
class ConnectionFn:
    """Tagged connection descriptor.

    ``inner`` is only used by ``riemannian``: either ``"trace"`` for
    <X, Y> = tr(X^T Y) or a Gram matrix on the fixed basis of ``m``.
    """

    kind: Kind
    m: ComplementChoice = ComplementChoice.IWASAWA
    inner: object = field(default=None, compare=False)

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", Kind(self.kind))
        except ValueError:
            raise InvalidInputError(f"unknown connection kind {self.kind!r}") from None
        object.__setattr__(self, "m", as_choice(self.m))
        if self.kind is Kind.RIEMANNIAN:
            if self.inner is None:
                raise ConfigurationError("riemannian connection needs an inner product")
            if isinstance(self.inner, str):
                if self.inner != "trace":
                    raise ConfigurationError(f"unknown inner product {self.inner!r}")
            else:
                G = np.asarray(self.inner, dtype=float)
                if G.ndim != 2 or G.shape[0] != G.shape[1]:
                    raise ConfigurationError("inner product Gram matrix must be square")
                object.__setattr__(self, "inner", G)

    @classmethod
    def riemannian(cls, m=ComplementChoice.IWASAWA, inner="trace"):
        return cls(Kind.RIEMANNIAN, m, inner)


def gram_matrix(n, m, inner="trace"):
    basis = m_basis(n, m)
    r = basis.shape[0]
    if isinstance(inner, str):
        G = np.einsum("ipq,jpq->ij", basis, basis)
    else:
        G = np.asarray(inner, dtype=float)
        if G.shape != (r, r):
            raise ConfigurationError(f"Gram matrix must be {r}x{r} for n={n}, got {G.shape}")
    if not np.allclose(G, G.T, atol=1e-12):
        raise ConfigurationError("Gram matrix is not symmetric")
    if np.min(np.linalg.eigvalsh(G)) <= 1e-10:
        raise ConfigurationError("inner product is not positive definite on m")
    return G


_U_CACHE = {}


def build_riemannian_U(m, inner, n):
    """Coefficient tensor ``T[i, j, k]`` with ``U(A_i, A_j) = sum_k T[i,j,k] A_k``.

    Solves 2<U(X,Y), Z> = <[Z,X]_m, Y> + <X, [Z,Y]_m> over the fixed basis.
    """
    m = as_choice(m)
    G = gram_matrix(n, m, inner)
    key = (m, n, G.tobytes())
    if key in _U_CACHE:
        return _U_CACHE[key]
    basis = m_basis(n, m)
    r = basis.shape[0]
    # P[k, i] = coefficients of [A_k, A_i]_m
    br = np.einsum("kab,ibc->kiac", basis, basis) - np.einsum("iab,kbc->kiac", basis, basis)
    P = coefficients(_project_batch(br, m), m)
    # <[A_k, A_i]_m, A_j> = P[k, i, :] @ G[:, j]
    S = np.einsum("kil,lj->kij", P, G)
    rhs = 0.5 * (S + np.swapaxes(S, 1, 2))  # rhs[k, i, j]
    T = np.linalg.solve(G, rhs.reshape(r, r * r)).reshape(r, r, r)
    T = np.moveaxis(T, 0, -1)
    if np.max(np.abs(T - np.swapaxes(T, 0, 1))) > 1e-10:
        raise ConfigurationError("U is not symmetric; inner product inconsistent")
    _U_CACHE[key] = T
    return T


def _beta_batch(c, X, Y):
    """beta on stacks (..., n, n) without membership checks."""
    n = X.shape[-1]
    if c.kind is Kind.CANONICAL2:
        return np.zeros(np.broadcast_shapes(X.shape, Y.shape))
    if c.kind is Kind.ALPHA:
        XY = X @ Y
        YX = Y @ X
        tr = np.trace(XY, axis1=-2, axis2=-1)
        return (XY + YX) / 2 - (tr / n)[..., None, None] * np.eye(n)
    half = 0.5 * _project_batch(X @ Y - Y @ X, c.m)
    if c.kind is Kind.CANONICAL1:
        return half
    T = build_riemannian_U(c.m, c.inner, n)
    x = coefficients(X, c.m)
    y = coefficients(Y, c.m)
    u = np.einsum("...i,...j,ijk->...k", x, y, T)
    return half + assemble(u, n, c.m)


def _membership_defect(X, m):
    return np.linalg.norm(X - _project_batch(X, m), axis=(-2, -1))


def check_in_m(X, m, name="argument"):
    _check_trace(X)
    scale = np.maximum(1.0, np.linalg.norm(X, axis=(-2, -1)))
    defect = _membership_defect(X, m)
    if np.any(defect > MEMBERSHIP_TOL * scale):
        raise DomainError(f"{name} is not in m={m.value} (defect {np.max(defect):.3e})")


def beta_eval(c, X, Y):
    X = as_square(X, "X")
    Y = as_square(Y, "Y")
    if X.shape != Y.shape:
        raise InvalidInputError("beta_eval: X and Y have different shapes")
    check_in_m(X, c.m, "X")
    check_in_m(Y, c.m, "Y")
    B = _beta_batch(c, X, Y)
    P = _project_batch(B, c.m)
    scale = max(1.0, float(np.linalg.norm(B)))
    if np.linalg.norm(B - P) > MEMBERSHIP_TOL * scale:
        raise DomainError(f"beta_eval: {c.kind.value} output left m={c.m.value}")
    return P


@dataclass(frozen=True)
class PropertyReport:
    kind: str
    m: str
    n: int
    samples: int
    seed: int
    max_trace: float
    max_beta_xx: float
    symmetry_defect: float
    antisymmetry_defect: float
    ad_invariance_defect: float

    def to_dict(self):
        return dict(self.__dict__)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def conn_properties(c, n, samples=200, seed=0):
    """Diagnostics of a connection function on basis pairs plus random samples.

    The Ad(H) defect compares P_m(Ad(h) beta(X, Y)) with
    beta(P_m Ad(h) X, P_m Ad(h) Y); for a non-reductive ``m`` the projections
    are what make the comparison well-defined at all.
    """
    rng = np.random.default_rng(seed)
    basis = m_basis(n, c.m)
    r = basis.shape[0]
    Xs = [basis[i] for i in range(r) for _ in range(r)]
    Ys = [basis[j] for _ in range(r) for j in range(r)]
    for _ in range(samples):
        Xs.append(random_m(n, c.m, rng))
        Ys.append(random_m(n, c.m, rng))
    X = np.array(Xs)
    Y = np.array(Ys)
    bxy = _beta_batch(c, X, Y)
    byx = _beta_batch(c, Y, X)
    # diagonal pairs: basis elements and the random samples
    D = np.concatenate([basis, X[r * r :], X[r * r :] + Y[r * r :]])
    bxx = _beta_batch(c, D, D)

    hs = np.array([random_so(n, rng) for _ in range(X.shape[0])])
    AX = _project_batch(adjoint_batch(hs, X), c.m)
    AY = _project_batch(adjoint_batch(hs, Y), c.m)
    lhs = _project_batch(adjoint_batch(hs, bxy), c.m)
    rhs = _beta_batch(c, AX, AY)

    def mx(v):
        return float(np.max(v)) if v.size else 0.0

    return PropertyReport(
        kind=c.kind.value,
        m=c.m.value,
        n=int(n),
        samples=int(samples),
        seed=int(seed),
        max_trace=mx(np.abs(np.trace(bxy, axis1=-2, axis2=-1))),
        max_beta_xx=mx(np.linalg.norm(bxx, axis=(-2, -1))),
        symmetry_defect=mx(np.linalg.norm(bxy - byx, axis=(-2, -1))),
        antisymmetry_defect=mx(np.linalg.norm(bxy + byx, axis=(-2, -1))),
        ad_invariance_defect=mx(np.linalg.norm(lhs - rhs, axis=(-2, -1))),
    )


def adjoint_batch(hs, X):
    return hs @ X @ np.swapaxes(hs, -1, -2)
