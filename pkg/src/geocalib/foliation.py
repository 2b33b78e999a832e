"""Geodesic foliations of H given by unit vector fields.

A foliation is a unit field V whose integral curves are geodesics; the
leaf through X is the geodesic with initial velocity V(X), so leaves are
never integrated numerically.  Leaves form an n-dimensional submanifold
M of the line space, charted here through a transversal section.

Built-in families:

* ``orthogeodesic`` -- unit normals to S = {X_0 = 0}, continued along the
  normal geodesics: V(X) = (X_0 X + e_0) / sqrt(1 + X_0^2).
* ``horospherical`` -- all leaves run to one boundary point b:
  V(X) = -X - N / <X, N> with N = (1, b).
* ``tilted`` -- the orthogeodesic field tilted toward e_1 by an angle
  ``amplitude * bump(d(X, center) / support_radius)``.  Not a geodesic
  field in general; used as a compactly supported perturbation and as a
  non-example.
"""

from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np
from scipy.spatial.distance import pdist

from .exterior_core import GeometryInputError
from .geodesic_space import push_tangent_arrays
from .hyperbolic import (FD_STEP, ball_to_hyperboloid, covariant_derivative,
                         distance, endpoints_of, mink, orthogeodesic_value,
                         project_to_hyperboloid, tangent_projection)

TRANSVERSALITY_MIN = 0.1


class AdmissibilityError(GeometryInputError):
    """The field does not fit the graph-map setup over the ball B."""


def bump(t, power=4):
    """(1 - t^2)^power on |t| < 1, zero outside."""
    t = np.asarray(t, dtype=float)
    return np.where(np.abs(t) < 1.0, np.clip(1.0 - t * t, 0.0, None) ** power, 0.0)


def bump_derivative(t, power=4):
    t = np.asarray(t, dtype=float)
    inside = np.abs(t) < 1.0
    base = np.clip(1.0 - t * t, 0.0, None)
    return np.where(inside, -2.0 * power * t * base ** (power - 1), 0.0)


@dataclass(frozen=True)
class UnitFieldSpec:
    """A unit vector field on H.

    ``value(X)`` and, when present, ``derivative(X, w)`` (the ambient
    directional derivative D_w V) must be vectorized over leading axes.
    """

    family: str
    value: Callable
    derivative: Optional[Callable] = None
    params: dict = dc_field(default_factory=dict)


def _orthogeodesic_derivative(X, w):
    X = np.asarray(X, dtype=float)
    w = np.asarray(w, dtype=float)
    x0 = X[..., 1:2]
    w0 = w[..., 1:2]
    r = np.sqrt(1.0 + x0 * x0)
    e = np.zeros(X.shape[-1])
    e[1] = 1.0
    return (w0 * X + x0 * w) / r - (x0 * X + e) * (x0 * w0) / r**3


def _horospherical(b):
    b = np.asarray(b, dtype=float)
    if b.ndim != 1 or abs(np.linalg.norm(b) - 1.0) > 1e-10:
        raise GeometryInputError("horospherical center must be a unit vector")
    N = np.concatenate([[1.0], b])

    def value(X):
        X = np.asarray(X, dtype=float)
        return -X - N / mink(X, N)[..., None]

    def derivative(X, w):
        XN = mink(X, N)[..., None]
        return -np.asarray(w, dtype=float) + N * mink(w, N)[..., None] / XN**2

    return value, derivative


def _tilted(n, center, amplitude, support_radius):
    c = ball_to_hyperboloid(np.asarray(center, dtype=float))
    e1 = np.zeros(n + 2)
    e1[2] = 1.0

    def value(X):
        X = np.asarray(X, dtype=float)
        V = orthogeodesic_value(X)
        U = tangent_projection(X, np.broadcast_to(e1, X.shape))
        U = U - mink(U, V)[..., None] * V
        U = U / np.sqrt(mink(U, U))[..., None]
        ang = amplitude * bump(distance(X, c) / support_radius)
        return np.cos(ang)[..., None] * V + np.sin(ang)[..., None] * U

    return value


def builtin_field(family, n, **params):
    """Construct one of the built-in unit fields on H^{n+1}."""
    if family == "orthogeodesic":
        return UnitFieldSpec("orthogeodesic", orthogeodesic_value,
                             _orthogeodesic_derivative, {})
    if family == "horospherical":
        b = params.get("center")
        if b is None:
            b = np.zeros(n + 1)
            b[0] = 1.0
        b = np.asarray(b, dtype=float)
        if b.shape != (n + 1,):
            raise GeometryInputError("boundary point has the wrong dimension")
        value, deriv = _horospherical(b)
        return UnitFieldSpec("horospherical", value, deriv, {"center": b})
    if family == "tilted":
        if n < 1:
            raise GeometryInputError("tilted field needs n >= 1")
        center = np.asarray(params.get("center", np.zeros(n + 1)), dtype=float)
        if center.shape != (n + 1,) or np.linalg.norm(center) >= 1.0:
            raise GeometryInputError("tilt center must be a ball point of R^(n+1)")
        amplitude = float(params.get("amplitude", 0.1))
        radius = float(params.get("support_radius", 1.0))
        if radius <= 0:
            raise GeometryInputError("support radius must be positive")
        value = _tilted(n, center, amplitude, radius)
        return UnitFieldSpec("tilted", value, None,
                             {"center": center, "amplitude": amplitude,
                              "support_radius": radius})
    raise GeometryInputError(f"unknown field family {family!r}")


# -- sampling ----------------------------------------------------------------

def ball_samples(n, radius, count=256, seed=0):
    """Deterministic points in the hyperbolic ball of given radius about o.

    The center and the 2(n+1) axis points at full radius are always
    included; the rest are scrambled Sobol points mapped to the ball.
    """
    from scipy.stats import qmc

    dim = n + 1
    axis = np.concatenate([np.eye(dim), -np.eye(dim)])
    dirs = [np.zeros((1, dim)), axis]
    rest = max(count - 1 - 2 * dim, 0)
    if rest:
        m = int(np.ceil(np.log2(rest)))
        u = qmc.Sobol(d=dim + 1, scramble=True, seed=seed).random_base2(m)[:rest]
        g = np.random.default_rng(seed).standard_normal((rest, dim))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        r = u[:, 0] ** (1.0 / dim)
        dirs.append(g * r[:, None])
    unit = np.concatenate(dirs)
    # scale hyperbolic radii: point at Euclidean fraction s of the
    # unit ball lands at hyperbolic distance s * radius
    s = np.linalg.norm(unit, axis=1)
    d = s * radius
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(s > 0, np.tanh(d / 2.0) / s, 0.0)
    return ball_to_hyperboloid(unit * scale[:, None])


def tangent_frame(X, V):
    """Orthonormal basis of {X, V}^⊥ inside T_X H (n vectors)."""
    X = np.asarray(X, dtype=float)
    dim = X.shape[-1]
    basis = [V / np.sqrt(mink(V, V))]
    for i in range(1, dim):
        e = np.zeros(dim)
        e[i] = 1.0
        w = tangent_projection(X, e)
        for b in basis:
            w = w - mink(w, b) * b
        nw = np.sqrt(max(mink(w, w), 0.0))
        if nw > 1e-6:
            basis.append(w / nw)
        if len(basis) == dim - 1:
            break
    return np.array(basis[1:])


# -- geodesic and t.e.r. diagnostics ---------------------------------------

def geodesic_field_residual(field, sample_points, mode="fd"):
    """max |∇_V V| over the samples."""
    X = np.atleast_2d(np.asarray(sample_points, dtype=float))
    if len(X) == 0:
        raise GeometryInputError("need at least one sample point")
    V = field.value(X)
    nab = covariant_derivative(field, X, V, mode=mode)
    return float(np.max(np.sqrt(np.abs(mink(nab, nab)))))


@dataclass(frozen=True)
class TerReport:
    margin: float
    is_ter: bool
    worst_point: np.ndarray


def shape_operator(field, X, mode="auto"):
    """Matrix of v -> ∇_v V on V^⊥ in an orthonormal frame, and the frame."""
    V = field.value(X)
    frame = tangent_frame(X, V)
    cols = covariant_derivative(field, np.broadcast_to(X, frame.shape), frame,
                                mode=mode)
    # M[i, j] = <∇_{e_j} V, e_i>
    M = np.einsum("ja,ia->ij", cols * np.r_[-1.0, np.ones(X.shape[-1] - 1)], frame)
    return M, frame


def ter_margin(field, sample_points, mode="auto"):
    X = np.atleast_2d(np.asarray(sample_points, dtype=float))
    best = -1.0
    worst = X[0]
    for x in X:
        M, _ = shape_operator(field, x, mode)
        s = np.linalg.svd(M, compute_uv=False)[0] if M.size else 0.0
        if s > best:
            best, worst = float(s), x
    return TerReport(best, best < 1.0, worst)


# -- sections and charts of M ----------------------------------------------

def s_point(y, dy=None):
    """Point of S = {X_0 = 0} with Poincaré-disk coordinates y in R^n.

    With ``dy`` of shape (..., k, n) the k pushed-forward columns are
    returned as well.
    """
    y = np.asarray(y, dtype=float)
    yb = np.concatenate([np.zeros(y.shape[:-1] + (1,)), y], axis=-1)
    if dy is None:
        return ball_to_hyperboloid(yb)
    dy = np.asarray(dy, dtype=float)
    dyb = np.concatenate([np.zeros(dy.shape[:-1] + (1,)), dy], axis=-1)
    X = ball_to_hyperboloid(yb)
    _, dX = ball_to_hyperboloid(yb[..., None, :], dyb)
    return X, dX


def sphere_direction(angles, n):
    """Unit vector of R^n from n-1 hyperspherical angles, with derivatives.

    omega_i = sin(a_0)...sin(a_{i-1}) cos(a_i) for i < n-1 and the last
    component is the full product of sines.  Returns ``(omega, domega)``
    where domega[..., k, :] = d omega / d a_k.
    """
    a = np.asarray(angles, dtype=float)
    shape = a.shape[:-1]
    if n == 1:
        return np.ones(shape + (1,)), np.zeros(shape + (0, 1))
    s, c = np.sin(a), np.cos(a)

    def component(i, k=None):
        # product for omega_i, with factor k differentiated when given
        val = np.ones(shape)
        for j in range(min(i, n - 1)):
            val = val * (c[..., j] if j == k else s[..., j])
        if i < n - 1:
            val = val * (-s[..., i] if i == k else c[..., i])
        elif k is not None and k >= n - 1:
            val = np.zeros(shape)
        return val

    om = np.stack([component(i) for i in range(n)], axis=-1)
    d = np.zeros(shape + (n - 1, n))
    for k in range(n - 1):
        for i in range(n):
            if i < n - 1 and k > i:
                continue
            d[..., k, i] = component(i, k)
    return om, d


@dataclass(frozen=True)
class Box:
    """Axis-aligned parameter box; ``breaks`` split axes for composite rules."""

    lower: tuple
    upper: tuple
    breaks: tuple = ()

    @property
    def dim(self):
        return len(self.lower)

    def contains(self, U):
        U = np.asarray(U, dtype=float)
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        return np.all((U >= lo - 1e-12) & (U <= hi + 1e-12), axis=-1)

    def axis_pieces(self, i):
        cuts = sorted(set([self.lower[i], self.upper[i]] +
                          [b for b in (self.breaks[i] if self.breaks else ())
                           if self.lower[i] < b < self.upper[i]]))
        return list(zip(cuts[:-1], cuts[1:]))


def polar_to_disk(U, n):
    """Geodesic polar coordinates (r, angles) on S -> disk coords and derivative.

    For n = 1 the single coordinate is a signed distance along S.
    Returns ``(y, dy)`` with dy[..., i, :] = d y / d u_i.
    """
    U = np.asarray(U, dtype=float)
    r = U[..., 0]
    om, dom = sphere_direction(U[..., 1:], n)
    t = np.tanh(r / 2.0)
    dt = 0.5 / np.cosh(r / 2.0) ** 2
    y = t[..., None] * om
    dy = np.concatenate([(dt[..., None] * om)[..., None, :],
                         t[..., None, None] * dom], axis=-2)
    return y, dy


def polar_box(n, radius, breaks=()):
    if n == 1:
        return Box((-radius,), (radius,),
                   (tuple(sorted({-b for b in breaks} | set(breaks))),))
    lower = (0.0,) + (0.0,) * (n - 1)
    upper = (radius,) + (np.pi,) * (n - 2) + (2.0 * np.pi,)
    br = (tuple(breaks),) + ((),) * (n - 1)
    return Box(lower, upper, br)


def disk_box(n, half_width):
    return Box((-half_width,) * n, (half_width,) * n, ((),) * n)


@dataclass(frozen=True)
class FoliationChart:
    """Transversal section sigma: domain -> H together with a unit field.

    ``section(U)`` returns points (..., n+2) and differential columns
    (..., n, n+2).
    """

    domain: Box
    section: Callable
    field: UnitFieldSpec


def polar_s_section(n):
    def section(U):
        y, dy = polar_to_disk(U, n)
        return s_point(y, dy)
    return section


def disk_s_section(n):
    def section(U):
        U = np.asarray(U, dtype=float)
        eye = np.broadcast_to(np.eye(n), U.shape[:-1] + (n, n))
        return s_point(U, eye)
    return section


def s_chart(field, n, radius=1.0, coords="polar"):
    """Chart of the leaves through the hyperbolic ball of ``radius`` in S."""
    if coords == "polar":
        return FoliationChart(polar_box(n, radius), polar_s_section(n), field)
    if coords == "disk":
        return FoliationChart(disk_box(n, np.tanh(radius / 2.0) / np.sqrt(n)),
                              disk_s_section(n), field)
    raise GeometryInputError(f"unknown chart coordinates {coords!r}")


def transversality(field, X, dX):
    """Length of the component of V(X) normal to the section image."""
    V = field.value(X)
    # Minkowski Gram of the section columns (positive definite on T_X H)
    G = np.einsum("...ia,...ja->...ij", dX * np.r_[-1.0, np.ones(X.shape[-1] - 1)], dX)
    b = np.einsum("...ia,...a->...i", dX * np.r_[-1.0, np.ones(X.shape[-1] - 1)], V)
    coef = np.linalg.solve(G, b[..., None])[..., 0]
    along = np.einsum("...i,...i->...", coef, b)
    return np.sqrt(np.clip(1.0 - along, 0.0, None))


def chart_jacobi_data(chart, U, mode="auto"):
    """Points, field values and Jacobi data (J0, J0p) for each chart column."""
    U = np.asarray(U, dtype=float)
    X, dX = chart.section(U)
    V = chart.field.value(X)
    Xb = np.broadcast_to(X[..., None, :], dX.shape)
    Vb = np.broadcast_to(V[..., None, :], dX.shape)
    J0 = dX - mink(dX, Vb)[..., None] * Vb
    J0p = covariant_derivative(chart.field, Xb, dX, mode=mode)
    J0p = J0p - mink(J0p, Vb)[..., None] * Vb
    return X, V, J0, J0p


def chart_lines(chart, U, mode="auto", push_mode="analytic"):
    """Endpoints and differential columns of u -> [γ_{V(σ(u))}].

    Returns ``(p, q, xs, ys)`` with xs, ys of shape (..., n, n+1).
    """
    U = np.asarray(U, dtype=float)
    if not np.all(chart.domain.contains(U)):
        raise GeometryInputError("chart parameter outside the domain")
    X, dX = chart.section(U)
    if np.any(transversality(chart.field, X, dX) <= TRANSVERSALITY_MIN):
        raise GeometryInputError("section is not transversal to the field here")
    X, V, J0, J0p = chart_jacobi_data(chart, U, mode)
    Xb = np.broadcast_to(X[..., None, :], J0.shape)
    Vb = np.broadcast_to(V[..., None, :], J0.shape)
    _, _, xs, ys = push_tangent_arrays(Xb, Vb, J0, J0p, mode=push_mode)
    return endpoints_of(X, V, -1), endpoints_of(X, V, 1), xs, ys


def chart_to_line(chart, u, mode="auto"):
    """OrientedLine at u and the n LineTangents spanning T M there."""
    from .geodesic_space import LineTangent, OrientedLine

    p, q, xs, ys = chart_lines(chart, np.asarray(u, dtype=float), mode)
    line = OrientedLine(p, q)
    return line, [LineTangent(line, x, y) for x, y in zip(xs, ys)]


def direct_chart_lines_fd(chart, u, h=FD_STEP):
    """Central differences of u -> endpoints, an oracle for chart_lines."""
    u = np.asarray(u, dtype=float)
    cols_p, cols_q = [], []
    for i in range(u.shape[-1]):
        du = np.zeros_like(u)
        du[..., i] = h
        ends = []
        for sgn in (1.0, -1.0):
            X, _ = chart.section(u + sgn * du)
            V = chart.field.value(X)
            ends.append((endpoints_of(X, V, -1), endpoints_of(X, V, 1)))
        cols_p.append((ends[0][0] - ends[1][0]) / (2 * h))
        cols_q.append((ends[0][1] - ends[1][1]) / (2 * h))
    return np.stack(cols_p, axis=-2), np.stack(cols_q, axis=-2)


# -- Gauss maps and graph maps ---------------------------------------------

def gauss_jacobians(field, X, h=FD_STEP):
    """Jacobian determinants of the backward and forward Gauss maps at X.

    The maps are restricted to the transversal through X spanned by an
    orthonormal frame of V(X)^⊥, and each determinant is the oriented
    sphere volume det[b, db/du_1, ..., db/du_n].
    """
    X = np.asarray(X, dtype=float)
    frame = tangent_frame(X, field.value(X))
    out = []
    for sign in (-1, 1):
        b = endpoints_of(X, field.value(X), sign)
        cols = []
        for e in frame:
            bp = endpoints_of(Xp := project_to_hyperboloid(X + h * e),
                              field.value(Xp), sign)
            bm = endpoints_of(Xm := project_to_hyperboloid(X - h * e),
                              field.value(Xm), sign)
            cols.append((bp - bm) / (2 * h))
        out.append(float(np.linalg.det(np.column_stack([b] + cols))))
    return tuple(out)


def boundary_to_s(b):
    """Inverse of p_±: the point x of S whose normal geodesic ends at b."""
    b = np.asarray(b, dtype=float)
    a = np.abs(b[..., 0])
    X = np.concatenate([(1.0 / a)[..., None], np.zeros(b.shape[:-1] + (1,)),
                        b[..., 1:] / a[..., None]], axis=-1)
    return X


def s_disk_coords(X):
    """Poincaré-disk coordinates in S of a point of S."""
    X = np.asarray(X, dtype=float)
    return X[..., 2:] / (1.0 + X[..., :1])


@dataclass(frozen=True)
class GraphMapResult:
    grid: np.ndarray
    f_minus: np.ndarray
    f_plus: np.ndarray
    injectivity_ok: bool


def graph_map(field, grid, jacobian_tol=1e-8):
    """Sample the maps f_± = p_±^{-1} ∘ q_± over disk coordinates of S.

    The graph of f = f_+ ∘ f_-^{-1} is the set of pairs
    (f_minus[i], f_plus[i]).  Raises AdmissibilityError when the Gauss
    images leave the open hemispheres or a Gauss map degenerates.
    """
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    X = s_point(grid)
    W = field.value(X)
    V0 = orthogeodesic_value(X)
    if np.any(mink(V0, W) <= 0):
        raise AdmissibilityError("<V, W> must be positive on B")
    qm = endpoints_of(X, W, -1)
    qp = endpoints_of(X, W, 1)
    if np.any(qm[:, 0] >= 0) or np.any(qp[:, 0] <= 0):
        raise AdmissibilityError("Gauss images leave the open hemispheres")
    for x in X:
        dm, dp = gauss_jacobians(field, x)
        if abs(dm) <= jacobian_tol or abs(dp) <= jacobian_tol:
            raise AdmissibilityError("a Gauss map is not a local diffeomorphism")
    fm = s_disk_coords(boundary_to_s(qm))
    fp = s_disk_coords(boundary_to_s(qp))
    ok = True
    if len(grid) > 1:
        ok = bool(pdist(fm).min() > 1e-9 and pdist(fp).min() > 1e-9)
    return GraphMapResult(grid, fm, fp, ok)
