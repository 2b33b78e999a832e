"""Hyperbolic space H^{n+1} in the hyperboloid model.

Coordinates are Minkowski ``(X_t, X_0, ..., X_n)`` with square norm
``-X_t^2 + sum X_i^2``.  Array index 0 is the time axis and array index 1
is the spatial direction e_0, so the reference hypersurface
``S = H ∩ e_0^⊥`` is ``{X[1] == 0}``.

Everything is vectorized over leading axes.  The Poincaré ball is used
for input/output and boundary bookkeeping only.
"""

from dataclasses import dataclass

import numpy as np

from .exterior_core import GeometryInputError

POINT_TOL = 1e-10
FD_STEP = 1e-5


def mink(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return -a[..., 0] * b[..., 0] + np.sum(a[..., 1:] * b[..., 1:], axis=-1)


def mink_norm(a):
    return np.sqrt(np.abs(mink(a, a)))


def project_to_hyperboloid(X):
    """Rescale a timelike vector onto the upper sheet."""
    X = np.asarray(X, dtype=float)
    s = np.sqrt(-mink(X, X))
    return X / s[..., None] * np.sign(X[..., :1])


def tangent_projection(X, a):
    """Minkowski-orthogonal projection of ``a`` onto T_X H."""
    return a + mink(a, X)[..., None] * X


def origin(n):
    """Center of H^{n+1}: the point (1, 0, ..., 0) of R^{n+2}."""
    o = np.zeros(n + 2)
    o[0] = 1.0
    return o


def e0(n):
    """The spatial unit vector e_0 (array index 1)."""
    e = np.zeros(n + 2)
    e[1] = 1.0
    return e


def check_point(X, tol=POINT_TOL):
    X = np.asarray(X, dtype=float)
    if np.any(np.abs(mink(X, X) + 1.0) > tol) or np.any(X[..., 0] <= 0):
        raise GeometryInputError("not a point of the upper hyperboloid")
    return X


def check_tangent(X, v, tol=POINT_TOL):
    if np.any(np.abs(mink(X, v)) > tol * np.maximum(1.0, np.abs(v).max())):
        raise GeometryInputError("vector is not tangent to H at its base")
    return v


@dataclass(frozen=True)
class Geodesic:
    """Unit-speed geodesic s -> cosh(s) X + sinh(s) v."""

    X: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        X = check_point(self.X)
        v = np.asarray(self.v, dtype=float)
        check_tangent(X, v)
        if np.any(np.abs(mink(v, v) - 1.0) > POINT_TOL):
            raise GeometryInputError("geodesic velocity must be unit")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "v", v)

    @property
    def n(self):
        return self.X.shape[-1] - 2

    def reversed(self):
        return Geodesic(self.X, -self.v)

    def shifted(self, s0):
        X, v = geodesic_eval(self, s0)
        return Geodesic(X, v)


# -- Poincaré ball <-> hyperboloid -------------------------------------------

def ball_to_hyperboloid(y, dy=None):
    y = np.asarray(y, dtype=float)
    r2 = np.sum(y * y, axis=-1)
    if np.any(r2 >= 1.0):
        raise GeometryInputError("ball point must satisfy |y| < 1")
    d = 1.0 - r2
    X = np.concatenate([((1.0 + r2) / d)[..., None], 2.0 * y / d[..., None]],
                       axis=-1)
    if dy is None:
        return X
    dy = np.asarray(dy, dtype=float)
    yd = np.sum(y * dy, axis=-1)
    dXt = 4.0 * yd / d**2
    dXs = 2.0 * dy / d[..., None] + 4.0 * y * (yd / d**2)[..., None]
    return X, np.concatenate([dXt[..., None], dXs], axis=-1)


def hyperboloid_to_ball(X, dX=None):
    X = np.asarray(X, dtype=float)
    den = 1.0 + X[..., 0]
    y = X[..., 1:] / den[..., None]
    if dX is None:
        return y
    dX = np.asarray(dX, dtype=float)
    dy = dX[..., 1:] / den[..., None] - X[..., 1:] * (dX[..., 0] / den**2)[..., None]
    return y, dy


def model_convert(point, tangent=None, source="ball"):
    """Convert between the ball and hyperboloid models.

    ``source`` names the model ``point`` is given in.  When ``tangent`` is
    supplied it is pushed forward by the differential and returned too.
    """
    if source == "ball":
        return ball_to_hyperboloid(point, tangent)
    if source == "hyperboloid":
        check_point(point)
        return hyperboloid_to_ball(point, tangent)
    raise GeometryInputError(f"unknown model {source!r}")


def distance(X, Y):
    return np.arccosh(np.maximum(-mink(X, Y), 1.0))


# -- geodesics ---------------------------------------------------------------

def geodesic_eval(geo, s):
    """Point and velocity of the geodesic at parameter ``s``."""
    s = np.asarray(s, dtype=float)[..., None]
    ch, sh = np.cosh(s), np.sinh(s)
    return ch * geo.X + sh * geo.v, sh * geo.X + ch * geo.v


def endpoints_of(X, v, sign):
    """Boundary point of the geodesic (X, v) at s -> sign * infinity."""
    N = np.asarray(X) + sign * np.asarray(v)
    return N[..., 1:] / N[..., :1]


def endpoint(geo, sign):
    if sign not in (1, -1):
        raise GeometryInputError("sign must be +1 or -1")
    return endpoints_of(geo.X, geo.v, sign)


def parallel_transport(geo, w, s):
    """Transport ``w`` in T_{geo.X} H along the geodesic to parameter s."""
    w = np.asarray(w, dtype=float)
    check_tangent(geo.X, w)
    a = mink(w, geo.v)
    w_perp = w - a[..., None] * geo.v
    _, vel = geodesic_eval(geo, s)
    return np.asarray(a)[..., None] * vel + w_perp


def jacobi_eval(geo, J0, J0p, s):
    """Normal Jacobi field with J(0) = J0, J'(0) = J0p at parameter ``s``.

    Curvature is -1, so J'' = J and the solution is hyperbolic sine and
    cosine applied to the parallel-transported initial data.
    """
    J0 = np.asarray(J0, dtype=float)
    J0p = np.asarray(J0p, dtype=float)
    for w in (J0, J0p):
        check_tangent(geo.X, w)
        if np.any(np.abs(mink(w, geo.v)) > POINT_TOL * max(1.0, np.abs(w).max())):
            raise GeometryInputError("Jacobi data must be orthogonal to the geodesic")
    s = np.asarray(s, dtype=float)[..., None]
    ch, sh = np.cosh(s), np.sinh(s)
    # normal vectors are constant ambient vectors under transport
    return ch * J0 + sh * J0p, sh * J0 + ch * J0p


# -- covariant differentiation ---------------------------------------------

def ambient_derivative_fd(field, X, w, h=FD_STEP):
    """Central difference of the field along the projected curve X + t w."""
    X = np.asarray(X, dtype=float)
    w = np.asarray(w, dtype=float)
    Xp = project_to_hyperboloid(X + h * w)
    Xm = project_to_hyperboloid(X - h * w)
    return (field.value(Xp) - field.value(Xm)) / (2.0 * h)


def covariant_derivative(field, X, w, mode="auto", h=FD_STEP):
    """Levi-Civita derivative of a vector field on H in direction ``w``.

    The ambient directional derivative is projected to T_X H; because
    <V, X> = 0 this equals D_w V - <w, V> X.  ``mode`` is "analytic",
    "fd", or "auto" (analytic when the field provides a derivative).
    """
    X = np.asarray(X, dtype=float)
    w = np.asarray(w, dtype=float)
    has_analytic = getattr(field, "derivative", None) is not None
    if mode == "auto":
        mode = "analytic" if has_analytic else "fd"
    if mode == "analytic":
        if not has_analytic:
            raise GeometryInputError("field has no analytic derivative")
        D = field.derivative(X, w)
    elif mode == "fd":
        D = ambient_derivative_fd(field, X, w, h)
    else:
        raise GeometryInputError(f"unknown mode {mode!r}")
    V = field.value(X)
    if not np.all(np.isfinite(V)):
        raise GeometryInputError("field undefined at X")
    return D - mink(w, V)[..., None] * X


# -- reference hypersurface S = {X_0 = 0} ------------------------------------

def orthogeodesic_value(X):
    X = np.asarray(X, dtype=float)
    x0 = X[..., 1]
    e = np.zeros(X.shape[-1])
    e[1] = 1.0
    return (x0[..., None] * X + e) / np.sqrt(1.0 + x0 * x0)[..., None]


def reference_hypersurface(X):
    """Foot point on S, unit normal field value at X, and signed distance.

    Flowing from the foot along the normal geodesic for the returned
    distance lands back on X.
    """
    X = np.asarray(X, dtype=float)
    x0 = X[..., 1]
    s = np.arcsinh(x0)
    e = np.zeros(X.shape[-1])
    e[1] = 1.0
    foot = (X - x0[..., None] * e) / np.cosh(s)[..., None]
    return foot, orthogeodesic_value(X), s
