"""The space L of oriented geodesics as endpoint pairs (S^n x S^n) - Δ.

A line is stored as its backward endpoint ``p`` and forward endpoint
``q``.  Tangent vectors are pairs ``(x, y)`` with x ⊥ p, y ⊥ q, and the
split metric is

    ||(x, y)||_(p,q) = 4 <T_{p,q} x, y> / |q - p|^2

with T_{p,q} the reflection across the hyperplane orthogonal to p - q.
Normal Jacobi fields along a geodesic map to this model by
differentiating the endpoint formula; the norm they carry there is
|J|^2 - |J'|^2.
"""

from dataclasses import dataclass

import numpy as np

from .exterior_core import GeometryInputError
from .hyperbolic import (FD_STEP, POINT_TOL, Geodesic, endpoints_of, mink,
                         project_to_hyperboloid, tangent_projection)

DIAGONAL_TOL = 1e-8


def reflection(p, q, x):
    """Reflect ``x`` across the hyperplane orthogonal to p - q."""
    p, q, x = (np.asarray(a, dtype=float) for a in (p, q, x))
    d = p - q
    nd = np.linalg.norm(d, axis=-1)
    if np.any(nd <= DIAGONAL_TOL):
        raise GeometryInputError("p and q coincide; reflection undefined")
    u = d / nd[..., None]
    if x.ndim > u.ndim:
        u = np.expand_dims(u, -2)
    return x - 2.0 * np.sum(x * u, axis=-1)[..., None] * u


@dataclass(frozen=True)
class OrientedLine:
    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        q = np.asarray(self.q, dtype=float)
        if p.shape != q.shape:
            raise GeometryInputError("endpoints must have equal shape")
        for b in (p, q):
            if np.any(np.abs(np.linalg.norm(b, axis=-1) - 1.0) > POINT_TOL):
                raise GeometryInputError("endpoints must lie on the unit sphere")
        if np.any(np.linalg.norm(q - p, axis=-1) <= DIAGONAL_TOL):
            raise GeometryInputError("line lies on the diagonal")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    def reversed(self):
        return OrientedLine(self.q, self.p)


@dataclass(frozen=True)
class LineTangent:
    at: OrientedLine
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        scale = max(1.0, np.abs(x).max(), np.abs(y).max())
        if (np.any(np.abs(np.sum(x * self.at.p, axis=-1)) > POINT_TOL * scale)
                or np.any(np.abs(np.sum(y * self.at.q, axis=-1)) > POINT_TOL * scale)):
            raise GeometryInputError("tangent pair must satisfy x ⊥ p, y ⊥ q")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)


@dataclass(frozen=True)
class JacobiData:
    """Initial data (J(0), J'(0)) of a normal Jacobi field along ``geodesic``."""

    geodesic: Geodesic
    J0: np.ndarray
    J0p: np.ndarray

    def __post_init__(self):
        g = self.geodesic
        J0 = np.asarray(self.J0, dtype=float)
        J0p = np.asarray(self.J0p, dtype=float)
        for w in (J0, J0p):
            scale = max(1.0, np.abs(w).max())
            if (np.any(np.abs(mink(w, g.X)) > POINT_TOL * scale)
                    or np.any(np.abs(mink(w, g.v)) > POINT_TOL * scale)):
                raise GeometryInputError(
                    "Jacobi data must be orthogonal to the base point and velocity")
        object.__setattr__(self, "J0", J0)
        object.__setattr__(self, "J0p", J0p)


def line_gram(p, q, xs, ys):
    """Gram matrix of tangents (xs[i], ys[i]) at (p, q) under the split metric.

    ``xs`` and ``ys`` have shape (..., k, n+1); p and q (..., n+1).
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    Tx = reflection(p, q, xs)
    d2 = np.sum((q - p) ** 2, axis=-1)
    m = np.einsum("...ia,...ja->...ij", Tx, ys)
    return 2.0 * (m + np.swapaxes(m, -1, -2)) / d2[..., None, None]


def line_inner(u, w):
    if u.at is not w.at and not (np.array_equal(u.at.p, w.at.p)
                                 and np.array_equal(u.at.q, w.at.q)):
        raise GeometryInputError("tangent vectors are based at different lines")
    p, q = u.at.p, u.at.q
    d2 = np.sum((q - p) ** 2, axis=-1)
    a = np.sum(reflection(p, q, u.x) * w.y, axis=-1)
    b = np.sum(reflection(p, q, w.x) * u.y, axis=-1)
    return 2.0 * (a + b) / d2


def line_of_geodesic(geo):
    return OrientedLine(endpoints_of(geo.X, geo.v, -1), endpoints_of(geo.X, geo.v, 1))


def _endpoint_differential(N, dN):
    b = N[..., 1:] / N[..., :1]
    return (dN[..., 1:] - b * dN[..., :1]) / N[..., :1]


def push_tangent_arrays(X, v, J0, J0p, mode="analytic", h=FD_STEP):
    """Endpoint pair and tangent (x, y) of the geodesic variation.

    Array version of :func:`push_line_tangent`; returns ``(p, q, x, y)``.
    """
    X, v, J0, J0p = (np.asarray(a, dtype=float) for a in (X, v, J0, J0p))
    p = endpoints_of(X, v, -1)
    q = endpoints_of(X, v, 1)
    # ambient derivative of the velocity (Gauss formula)
    dv = J0p + mink(J0, v)[..., None] * X
    if mode == "analytic":
        x = _endpoint_differential(X - v, J0 - dv)
        y = _endpoint_differential(X + v, J0 + dv)
    elif mode == "fd":
        ends = []
        for t in (h, -h):
            Xt = project_to_hyperboloid(X + t * J0)
            vt = tangent_projection(Xt, v + t * dv)
            vt = vt / np.sqrt(mink(vt, vt))[..., None]
            ends.append((endpoints_of(Xt, vt, -1), endpoints_of(Xt, vt, 1)))
        x = (ends[0][0] - ends[1][0]) / (2.0 * h)
        y = (ends[0][1] - ends[1][1]) / (2.0 * h)
    else:
        raise GeometryInputError(f"unknown mode {mode!r}")
    return p, q, x, y


def push_line_tangent(jd, mode="analytic", h=FD_STEP):
    """Tangent vector to L at [γ] induced by a normal Jacobi field."""
    g = jd.geodesic
    p, q, x, y = push_tangent_arrays(g.X, g.v, jd.J0, jd.J0p, mode, h)
    line = OrientedLine(p, q)
    if mode == "fd":
        # finite differences leave O(h^2) normal components; drop them
        x = x - np.sum(x * p, axis=-1)[..., None] * p
        y = y - np.sum(y * q, axis=-1)[..., None] * q
    return LineTangent(line, x, y)


def killing_norm(jd):
    """|J|^2 - |J'|^2, evaluated at s = 0 (it is constant in s)."""
    return mink(jd.J0, jd.J0) - mink(jd.J0p, jd.J0p)
