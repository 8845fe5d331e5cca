"""Geodesics in A x N+ under an invariant connection, plus closed forms.

A geodesic is a harmonic map from an interval, so the curve version of the
residual gives the equations of motion:

* chart convention:        q'' = s * coeffs(beta(v, v)),  v = sum q'_k A_k
* logarithmic convention:  v' = s * beta(v, v),  g' = g v

with s = -1 for the ``lemma`` sign and s = +1 for the ``example`` sign.
Integration is classical fixed-step RK4.
"""

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .connections import ConnectionFn, _beta_batch, check_in_m
from .darboux import Convention, Sign, as_convention, as_sign
from .densecore import as_square, log_unipotent, STRUCT_TOL
from .errors import DomainError, InvalidInputError
from .iwasawa import ChartPoint, from_chart
from .lie_algebra import (
    ComplementChoice,
    _project_batch,
    assemble,
    coefficients,
    m_basis,
    triu_idx,
    upper_pairs,
)

AGREEMENT_TOL = 1e-8


@dataclass(frozen=True)
class GeodesicProblem:
    c: ConnectionFn
    p0: ChartPoint
    v0: np.ndarray
    T: float = 1.0
    steps: int = 1000
    convention: Convention = Convention.CHART
    sign: Sign = Sign.LEMMA

    def __post_init__(self):
        object.__setattr__(self, "convention", as_convention(self.convention))
        object.__setattr__(self, "sign", as_sign(self.sign))
        if self.c.m is not ComplementChoice.IWASAWA:
            raise DomainError("geodesics live in A x N+ and need the iwasawa complement")
        v0 = as_square(self.v0, "v0")
        if v0.shape[0] != self.p0.n:
            raise InvalidInputError(f"v0 is {v0.shape[0]}x{v0.shape[0]} but p0 has n={self.p0.n}")
        check_in_m(v0, self.c.m, "v0")
        object.__setattr__(self, "v0", _project_batch(v0, self.c.m))
        if int(self.steps) < 1:
            raise InvalidInputError("steps must be >= 1")
        if not np.isfinite(self.T) or self.T <= 0:
            raise InvalidInputError("horizon T must be positive and finite")
        object.__setattr__(self, "steps", int(self.steps))
        object.__setattr__(self, "T", float(self.T))


@dataclass(frozen=True)
class Trajectory:
    n: int
    times: np.ndarray
    a: np.ndarray
    y: np.ndarray
    velocities: np.ndarray
    blow_up: bool = False
    meta: dict = field(default_factory=dict)

    def point(self, k):
        return ChartPoint(self.a[k], self.y[k])

    @property
    def points(self):
        return [self.point(k) for k in range(len(self.times))]

    def velocity_coefficients(self):
        return coefficients(self.velocities, ComplementChoice.IWASAWA)

    def labels(self):
        return chart_labels(self.n)

    def to_csv(self):
        n = self.n
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        labels = chart_labels(n)
        w.writerow(["t"] + labels + ["v_" + s for s in labels])
        vc = self.velocity_coefficients()
        for k, t in enumerate(self.times):
            row = [repr(float(t))]
            row += [repr(float(v)) for v in self.a[k]]
            row += [repr(float(v)) for v in self.y[k]]
            row += [repr(float(v)) for v in vc[k]]
            w.writerow(row)
        return buf.getvalue()

    def to_dict(self):
        return {
            "n": self.n,
            "blow_up": self.blow_up,
            "meta": self.meta,
            "t": self.times.tolist(),
            "a": self.a.tolist(),
            "y": self.y.tolist(),
            "v": self.velocity_coefficients().tolist(),
        }


def chart_labels(n):
    return [f"a{k + 1}" for k in range(n - 1)] + [f"y{p + 1}{q + 1}" for p, q in upper_pairs(n)]


def rk4_step(f, z, dt):
    k1 = f(z)
    k2 = f(z + 0.5 * dt * k1)
    k3 = f(z + 0.5 * dt * k2)
    k4 = f(z + dt * k3)
    return z + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def _group_to_chart(g):
    n = g.shape[0]
    d = np.diag(g)
    N = g / d[:, None]
    iu = triu_idx(n)
    return d[: n - 1].copy(), N[iu].copy()


def integrate_geodesic(p):
    """Fixed-step RK4 integration of a :class:`GeodesicProblem`.

    Leaving the chart (a diagonal coordinate reaching zero or a non-finite
    state) truncates the trajectory and sets ``blow_up``.
    """
    n = p.p0.n
    c = p.c
    m = c.m
    s = p.sign.factor
    dt = p.T / p.steps
    times, As, Ys, Vs = [0.0], [p.p0.a.copy()], [p.p0.y.copy()], [p.v0.copy()]
    blow_up = False

    if p.convention is Convention.CHART:
        r = p.p0.a.size + p.p0.y.size
        basis = m_basis(n, m)
        iu = triu_idx(n)
        rows = np.concatenate([np.arange(n - 1), iu[0]])
        cols = np.concatenate([np.arange(n - 1), iu[1]])

        def f(z):
            qd = z[r:]
            v = np.tensordot(qd, basis, 1)
            acc = _beta_batch(c, v, v)[rows, cols]
            return np.concatenate([qd, s * acc])

        z = np.concatenate([p.p0.a, p.p0.y, coefficients(p.v0, m)])
        for k in range(1, p.steps + 1):
            z = rk4_step(f, z, dt)
            a, y = z[: n - 1], z[n - 1 : r]
            if not np.all(np.isfinite(z)) or np.any(a <= 0):
                blow_up = True
                break
            times.append(k * dt)
            As.append(a.copy())
            Ys.append(y.copy())
            Vs.append(assemble(z[r:], n, m))
    else:
        A0, N0 = from_chart(p.p0)
        nn = n * n

        def f(z):
            g = z[:nn].reshape(n, n)
            v = z[nn:].reshape(n, n)
            dv = s * _project_batch(_beta_batch(c, v, v), m)
            return np.concatenate([(g @ v).ravel(), dv.ravel()])

        z = np.concatenate([(A0 @ N0).ravel(), p.v0.ravel()])
        for k in range(1, p.steps + 1):
            z = rk4_step(f, z, dt)
            if not np.all(np.isfinite(z)):
                blow_up = True
                break
            g = np.triu(z[:nn].reshape(n, n))
            det = np.prod(np.diag(g))
            if np.any(np.diag(g) <= 0) or det <= 0:
                blow_up = True
                break
            g = g / det ** (1.0 / n)
            z[:nn] = g.ravel()
            a, y = _group_to_chart(g)
            times.append(k * dt)
            As.append(a)
            Ys.append(y)
            Vs.append(z[nn:].reshape(n, n).copy())

    return Trajectory(
        n=n,
        times=np.array(times),
        a=np.array(As),
        y=np.array(Ys).reshape(len(times), -1),
        velocities=np.array(Vs),
        blow_up=blow_up,
        meta={
            "connection": c.kind.value,
            "convention": p.convention.value,
            "sign": p.sign.value,
            "T": p.T,
            "steps": p.steps,
        },
    )


def _check_an(v0):
    v0 = as_square(v0, "v0")
    if np.any(np.abs(np.tril(v0, -1)) > STRUCT_TOL):
        raise DomainError("v0 must be upper triangular (a + n+)")
    if abs(np.trace(v0)) > STRUCT_TOL * max(1.0, np.linalg.norm(v0)):
        raise DomainError("v0 must be trace-free")
    return v0


def _check_strict_upper(v0):
    v0 = as_square(v0, "v0")
    if np.any(np.abs(np.tril(v0)) > STRUCT_TOL):
        raise DomainError("v0 must be strictly upper triangular")
    return np.triu(v0, 1)


def closed_form_symmetric(v0, t):
    """Affine chart curve a_k = v0_kk t + 1 (k < n), y_pq = v0_pq t."""
    v0 = _check_an(v0)
    n = v0.shape[0]
    a = np.diag(v0)[: n - 1] * t + 1.0
    if np.any(a <= 0):
        raise DomainError(f"closed_form_symmetric: diagonal coordinate non-positive at t={t}")
    iu = triu_idx(n)
    return ChartPoint(a, v0[iu] * t)


def literal_diagonal_drift(v0, t):
    """|det diag(v0_kk t + 1, k = 1..n) - 1|: how far the all-entries affine
    diagonal strays from SL(n)."""
    v0 = _check_an(v0)
    return float(abs(np.prod(np.diag(v0) * t + 1.0) - 1.0))


_INT64_MAX = 2**63 - 1


def catalan_f(j):
    """f(1) = f(2) = 1, f(n) = sum_{i=2}^{n} f(i-1) f(n+1-i)."""
    j = int(j)
    if j < 1:
        raise DomainError("catalan_f: j must be >= 1")
    f = [0, 1, 1]
    for k in range(3, j + 1):
        val = sum(f[i - 1] * f[k + 1 - i] for i in range(2, k + 1))
        if val > _INT64_MAX:
            raise OverflowError(f"catalan_f({k}) exceeds 64-bit range")
        f.append(val)
    return f[j]


def closed_form_nplus_paper(v0, t, reading="proposition"):
    """The published N+ geodesic formula, evaluated as printed.

    ``proposition``: entry (i, i+j) = f(j) b_{i,i+1} ... b_{i+j-1,i+j} t^e with
    e = j for j <= 2 and e = j - 1 for j > 2.
    ``remark``: the pattern of the worked 4x4 example, coefficient 1 and
    e = max(1, j - 1).
    """
    v0 = _check_strict_upper(v0)
    if reading not in ("proposition", "remark"):
        raise InvalidInputError(f"unknown reading {reading!r}")
    n = v0.shape[0]
    sup = np.diag(v0, 1)
    out = np.zeros((n, n))
    for j in range(1, n):
        for i in range(n - j):
            prod = np.prod(sup[i : i + j])
            if reading == "proposition":
                coef = catalan_f(j)
                e = j if j <= 2 else j - 1
            else:
                coef = 1
                e = max(1, j - 1)
            out[i, i + j] = coef * prod * t**e
    return out


def closed_form_nplus_oracle(v0, t, sign=Sign.LEMMA):
    """Exact chart-convention N+ geodesic under the alpha connection.

    lemma:   B(t) = log(I + v0 t), solves B'' + B'^2 = 0
    example: B(t) = -log(I - v0 t), solves B'' - B'^2 = 0
    """
    sign = as_sign(sign)
    v0 = _check_strict_upper(v0)
    eye = np.eye(v0.shape[0])
    if sign is Sign.LEMMA:
        return log_unipotent(eye + v0 * t)
    return -log_unipotent(eye - v0 * t)


def oracle_admission_residual(v0, sign=Sign.LEMMA, h=1e-4, times=None):
    """Max ||B'' - s' B'^2|| by central differences, s' = -1 (lemma) / +1 (example)."""
    sign = as_sign(sign)
    if times is None:
        times = np.linspace(0.0, 1.0, 11)
    worst = 0.0
    for t in times:
        Bm = closed_form_nplus_oracle(v0, t - h, sign)
        B0 = closed_form_nplus_oracle(v0, t, sign)
        Bp = closed_form_nplus_oracle(v0, t + h, sign)
        d1 = (Bp - Bm) / (2 * h)
        d2 = (Bp - 2 * B0 + Bm) / h**2
        worst = max(worst, float(np.max(np.abs(d2 - sign.factor * d1 @ d1))))
    return worst


def symmetric_evaluator(v0):
    return lambda t: closed_form_symmetric(v0, t)


def nplus_evaluator(fn, v0, **kw):
    """Wrap an N+ closed form (strictly upper matrix in t) as a ChartPoint evaluator."""
    n = np.asarray(v0).shape[0]
    iu = triu_idx(n)
    return lambda t: ChartPoint(np.ones(n - 1), fn(v0, t, **kw)[iu])


@dataclass(frozen=True)
class ComparisonReport:
    labels: list
    deviations: np.ndarray
    tolerance: float
    samples: int

    @property
    def agree(self):
        return [bool(d <= self.tolerance) for d in self.deviations]

    @property
    def verdict(self):
        return "agree" if all(self.agree) else "discrepant"

    @property
    def max_deviation(self):
        return float(np.max(self.deviations)) if self.deviations.size else 0.0

    def deviation(self, label):
        return float(self.deviations[self.labels.index(label)])

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "tolerance": self.tolerance,
            "samples": self.samples,
            "max_deviation": self.max_deviation,
            "entries": {
                lab: {"max_abs_deviation": float(d), "agree": ok}
                for lab, d, ok in zip(self.labels, self.deviations, self.agree)
            },
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def compare_trajectories(traj, evaluator, stride=1, horizon=None, tolerance=AGREEMENT_TOL):
    """Per-coordinate max |trajectory - evaluator| over every ``stride``-th sample."""
    if horizon is not None and abs(traj.times[-1] - horizon) > 1e-12 * max(1.0, horizon):
        raise DomainError(
            f"compare_trajectories: trajectory ends at {traj.times[-1]}, expected {horizon}"
        )
    idx = range(0, len(traj.times), max(1, int(stride)))
    dev = np.zeros(traj.a.shape[1] + traj.y.shape[1])
    count = 0
    for k in idx:
        ref = evaluator(traj.times[k])
        got = np.concatenate([traj.a[k], traj.y[k]])
        want = np.concatenate([ref.a, ref.y])
        dev = np.maximum(dev, np.abs(got - want))
        count += 1
    return ComparisonReport(labels=chart_labels(traj.n), deviations=dev, tolerance=tolerance, samples=count)
