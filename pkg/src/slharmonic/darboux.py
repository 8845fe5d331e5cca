"""Homogeneous Darboux derivative of grid-sampled maps and the harmonicity residual.

A map F from a flat grid into A x N+ is stored through its chart coordinates.
Two readings of mu_F are available:

``chart``        coordinate differential expanded in the fixed basis of a + n+
``logarithmic``  g^{-1} dg with g = A N, differenced on the grid

The residual of a map under a connection ``c`` is

    r(x) = s * sum_i d_i mu_F(e_i) - sum_i beta(mu_F(e_i), mu_F(e_i))

with s = -1 for the ``lemma`` sign and s = +1 for the ``example`` sign.
"""

import csv
import enum
import io
import json
from dataclasses import dataclass

import numpy as np

from .connections import _beta_batch, _membership_defect, MEMBERSHIP_TOL
from .errors import DomainError, InvalidInputError
from .iwasawa import chart_arrays_to_group
from .lie_algebra import ComplementChoice, assemble, coefficients, upper_pairs


class Convention(str, enum.Enum):
    CHART = "chart"
    LOGARITHMIC = "logarithmic"


class Sign(str, enum.Enum):
    LEMMA = "lemma"
    EXAMPLE = "example"

    @property
    def factor(self):
        return -1.0 if self is Sign.LEMMA else 1.0


def as_convention(v):
    if v == "log":
        v = "logarithmic"
    try:
        return Convention(v)
    except ValueError:
        raise InvalidInputError(f"unknown convention {v!r}") from None


def as_sign(v):
    try:
        return Sign(v)
    except ValueError:
        raise InvalidInputError(f"unknown sign {v!r}") from None


@dataclass(frozen=True)
class ChartMap:
    """Map from a uniform d-dimensional grid into chart coordinates of A x N+.

    ``a`` has shape ``dims + (n-1,)`` and ``y`` shape ``dims + (n(n-1)/2,)``.
    """

    n: int
    dims: tuple
    spacing: tuple
    a: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        n = int(self.n)
        dims = tuple(int(k) for k in self.dims)
        spacing = tuple(float(h) for h in self.spacing)
        if n < 2:
            raise InvalidInputError("ChartMap: n must be >= 2")
        if len(dims) == 0 or len(dims) != len(spacing):
            raise InvalidInputError("ChartMap: dims and spacing must have equal, nonzero length")
        if any(k < 3 for k in dims):
            raise DomainError("ChartMap: every axis needs at least 3 grid points")
        if any(not np.isfinite(h) or h <= 0 for h in spacing):
            raise InvalidInputError("ChartMap: spacing must be positive")
        ny = n * (n - 1) // 2
        try:
            a = np.asarray(self.a, dtype=float).reshape(dims + (n - 1,))
            y = np.asarray(self.y, dtype=float).reshape(dims + (ny,))
        except ValueError as exc:
            raise InvalidInputError(f"ChartMap: coordinate arrays do not match the grid ({exc})") from None
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(y))):
            raise InvalidInputError("ChartMap: non-finite coordinates")
        if np.any(a <= 0):
            raise DomainError("ChartMap: diagonal coordinates must be positive")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "y", y)

    @property
    def d(self):
        return len(self.dims)

    @classmethod
    def from_functions(cls, n, origin, spacing, dims, a_fn, y_fn):
        """Sample ``a_fn(*coords)`` / ``y_fn(*coords)`` on the grid.

        Each function returns a sequence of coordinate arrays (or scalars)
        broadcastable to the grid shape.
        """
        axes = [o + h * np.arange(k) for o, h, k in zip(origin, spacing, dims)]
        coords = np.meshgrid(*axes, indexing="ij")
        shape = tuple(dims)
        a = np.stack([np.broadcast_to(v, shape) for v in a_fn(*coords)], axis=-1)
        ys = list(y_fn(*coords))
        if ys:
            y = np.stack([np.broadcast_to(v, shape) for v in ys], axis=-1)
        else:
            y = np.zeros(shape + (0,))
        return cls(n, dims, spacing, a, y)

    def group_values(self):
        return chart_arrays_to_group(self.a, self.y)

    def to_dict(self):
        flat = int(np.prod(self.dims))
        return {
            "n": self.n,
            "d": self.d,
            "dims": list(self.dims),
            "spacing": list(self.spacing),
            "a": self.a.reshape(flat, -1).tolist(),
            "y": self.y.reshape(flat, -1).tolist(),
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        try:
            cm = cls(d["n"], d["dims"], d["spacing"], d["a"], d["y"])
            declared = int(d.get("d", cm.d))
        except (KeyError, TypeError) as exc:
            raise InvalidInputError(f"ChartMap: malformed record ({exc})") from None
        if declared != cm.d:
            raise InvalidInputError(f"ChartMap: d={declared} but dims has {cm.d} axes")
        return cm


@dataclass(frozen=True)
class OneFormSample:
    """mu_F(e_i) at every grid point: ``values`` has shape dims + (d, n, n)."""

    values: np.ndarray
    spacing: tuple
    convention: Convention

    @property
    def dims(self):
        return self.values.shape[: len(self.spacing)]

    def coefficients(self):
        return coefficients(self.values, ComplementChoice.IWASAWA)


def mu_of_map(F, convention=Convention.CHART):
    """Darboux derivative of ``F`` sampled on its grid.

    Central differences inside, second-order one-sided differences on the
    boundary.
    """
    convention = as_convention(convention)
    n, d = F.n, F.d
    iw = ComplementChoice.IWASAWA
    parts = []
    if convention is Convention.CHART:
        q = np.concatenate([F.a, F.y], axis=-1)
        for i in range(d):
            dq = np.gradient(q, F.spacing[i], axis=i, edge_order=2)
            parts.append(assemble(dq, n, iw))
    else:
        g = F.group_values()
        ginv = np.linalg.inv(g)
        eye = np.eye(n)
        for i in range(d):
            dg = np.gradient(g, F.spacing[i], axis=i, edge_order=2)
            M = np.triu(ginv @ dg)
            # g^{-1} dg is trace-free exactly; the differenced trace is O(h^2) noise
            tr = np.trace(M, axis1=-2, axis2=-1)
            parts.append(M - (tr / n)[..., None, None] * eye)
    values = np.stack(parts, axis=d)
    scale = np.maximum(1.0, np.linalg.norm(values, axis=(-2, -1)))
    if np.any(_membership_defect(values, iw) > MEMBERSHIP_TOL * scale):
        raise DomainError("mu_of_map: sample left a + n+")
    return OneFormSample(values=values, spacing=F.spacing, convention=convention)


def _interior(arr, d):
    return arr[(slice(1, -1),) * d]


def codifferential(s, sign=Sign.LEMMA):
    """Flat-grid codifferential on interior nodes, shape (dims - 2) + (n, n)."""
    sign = as_sign(sign)
    d = len(s.spacing)
    if any(k < 3 for k in s.dims):
        raise DomainError("codifferential: grid has no interior points")
    total = 0.0
    for i, h in enumerate(s.spacing):
        comp = s.values[(Ellipsis, i, slice(None), slice(None))]
        fwd = [slice(1, -1)] * d
        bwd = [slice(1, -1)] * d
        fwd[i] = slice(2, None)
        bwd[i] = slice(None, -2)
        total = total + (comp[tuple(fwd)] - comp[tuple(bwd)]) / (2 * h)
    return sign.factor * total


@dataclass(frozen=True)
class ResidualField:
    """Residual on interior grid points (global index offset 1 on every axis).

    ``clean`` marks points whose stencil only touches centrally differenced
    values of mu_F; summary norms are taken over those points only.
    """

    values: np.ndarray
    clean: np.ndarray
    n: int

    @property
    def d(self):
        return self.clean.ndim

    @property
    def norms(self):
        return np.linalg.norm(self.values, axis=(-2, -1))

    @property
    def sup_norm(self):
        return float(np.max(self.norms[self.clean]))

    @property
    def mean_norm(self):
        return float(np.mean(self.norms[self.clean]))

    @property
    def a_part(self):
        n = self.n
        out = np.zeros_like(self.values)
        idx = np.arange(n)
        out[..., idx, idx] = np.diagonal(self.values, axis1=-2, axis2=-1)
        return out

    @property
    def n_part(self):
        return np.triu(self.values, 1)

    def summary(self):
        comps = residual_components(self)
        k = self.n - 1
        clean = comps[self.clean]
        return {
            "n": self.n,
            "d": self.d,
            "interior_points": int(self.clean.size),
            "clean_points": int(self.clean.sum()),
            "sup_norm": self.sup_norm,
            "mean_norm": self.mean_norm,
            "a_sup": float(np.max(np.abs(clean[:, :k]))) if k else 0.0,
            "y_sup": float(np.max(np.abs(clean[:, k:]))) if clean.shape[1] > k else 0.0,
        }

    def to_csv(self):
        n, d = self.n, self.d
        comps = residual_components(self)
        norms = self.norms
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = [f"i{k}" for k in range(d)]
        header += [f"a{k + 1}" for k in range(n - 1)]
        header += [f"y{p + 1}{q + 1}" for p, q in upper_pairs(n)]
        header += ["frobenius", "clean"]
        w.writerow(header)
        for idx in np.ndindex(self.clean.shape):
            row = [i + 1 for i in idx]
            row += [repr(float(v)) for v in comps[idx]]
            row += [repr(float(norms[idx])), int(self.clean[idx])]
            w.writerow(row)
        return buf.getvalue()


def residual_components(r):
    """Coefficients of the residual in the fixed basis H_k, E_pq of a + n+."""
    return coefficients(r.values, ComplementChoice.IWASAWA)


def reassemble(components, n):
    return assemble(components, n, ComplementChoice.IWASAWA)


def beta_trace(c, sample):
    """sum_i beta(mu(e_i), mu(e_i)) at every grid point."""
    mu = sample.values
    d = len(sample.spacing)
    terms = _beta_batch(c, mu, mu)
    return terms.sum(axis=d)


def harmonic_residual(F, c, convention=Convention.CHART, sign=Sign.LEMMA):
    """Harmonicity residual of ``F`` under connection ``c`` on interior points."""
    if c.m is not ComplementChoice.IWASAWA:
        raise DomainError("harmonic_residual: maps into A x N+ need the iwasawa complement")
    convention = as_convention(convention)
    sign = as_sign(sign)
    s = mu_of_map(F, convention)
    div = codifferential(s, sign)
    bt = _interior(beta_trace(c, s), F.d)
    clean = np.zeros(tuple(k - 2 for k in F.dims), dtype=bool)
    clean[(slice(1, -1),) * F.d] = True
    if not clean.any():
        raise DomainError("harmonic_residual: need at least 5 points per axis for a clean interior")
    return ResidualField(values=div - bt, clean=clean, n=F.n)
