"""The calibration psi on L' = S^n_- x S^n_+ and volume maximization runs.

    psi_(p,q) = 1/2 (pi_1^* (theta / |p_0|^n) + pi_2^* (theta / |q_0|^n))

theta is the round volume form.  The second sphere factor carries the
orientation opposite to the first (theta_q(y) = -det[q, y]); with that
convention the reflection T_{p,q}, which reverses orientation, carries
positively oriented frames at p to positively oriented frames at q, and
psi pulls back to C phi_c under the frame isometry A.

The reference submanifold M_o is {(p, Tp)} with T(p_0, p_1, ...) =
(-p_0, p_1, ...).  Competitors replace the forward endpoint by
p_+(h(x)) for a compactly supported diffeomorphism h of the disk S.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
import os
from typing import Callable

import numpy as np

from .exterior_core import GeometryInputError, classify_gram
from .foliation import (Box, bump, bump_derivative, polar_box, polar_to_disk,
                        s_point)
from .geodesic_space import LineTangent, OrientedLine, line_gram, reflection
from .split_space import _parts

HEMISPHERE_TOL = 1e-8
GL_POINTS = {1: 17, 2: 17, 3: 9, 4: 7}


class NotSpacelikeError(GeometryInputError):
    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class OutsideDomainError(GeometryInputError):
    """Line not in S^n_- x S^n_+."""


def theta_eval(p, ws, orientation=1):
    """Round volume form at p on the frame ``ws`` (..., n, n+1)."""
    p = np.asarray(p, dtype=float)
    ws = np.asarray(ws, dtype=float)
    scale = np.maximum(1.0, np.abs(ws).max())
    if np.any(np.abs(np.einsum("...ia,...a->...i", ws, p)) > 1e-8 * scale):
        raise GeometryInputError("frame vectors must be tangent to the sphere at p")
    m = np.concatenate([p[..., None, :], ws], axis=-2)
    return orientation * np.linalg.det(m)


def _check_domain(p, q):
    if np.any(p[..., 0] >= -HEMISPHERE_TOL) or np.any(q[..., 0] <= HEMISPHERE_TOL):
        raise OutsideDomainError("line is not in S^n_- x S^n_+")


def psi_arrays(p, q, xs, ys):
    p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    _check_domain(p, q)
    n = p.shape[-1] - 1
    return 0.5 * (theta_eval(p, xs) / np.abs(p[..., 0]) ** n
                  + theta_eval(q, ys, -1) / np.abs(q[..., 0]) ** n)


def psi_eval(line, blade):
    """psi at ``line`` on a blade given as a list of LineTangents."""
    xs = np.stack([t.x for t in blade], axis=-2)
    ys = np.stack([t.y for t in blade], axis=-2)
    return psi_arrays(line.p, line.q, xs, ys)


@dataclass(frozen=True)
class CalibConstants:
    C: float
    c: float


def calib_constants_arrays(p, q):
    p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    _check_domain(p, q)
    n = p.shape[-1] - 1
    ap, aq = np.abs(p[..., 0]), np.abs(q[..., 0])
    dist = np.linalg.norm(q - p, axis=-1)
    C = dist**n / (2.0**n * aq ** (n / 2) * ap ** (n / 2))
    c = aq ** (n / 2) / ap ** (n / 2)
    return C, c


def calib_constants(line):
    C, c = calib_constants_arrays(line.p, line.q)
    return CalibConstants(float(C), float(c))


def T_map(v):
    """T(v_0, v_1, ...) = (-v_0, v_1, ...)."""
    v = np.array(v, dtype=float)
    v[..., 0] *= -1.0
    return v


def frame_basis(line, seed=0):
    """Orthogonal basis of p^⊥ with |v_i| = |q - p| / 2, positively oriented."""
    p, q = line.p, line.q
    _check_domain(p, q)
    n = p.shape[-1] - 1
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((n + 1, n))
    # QR of [p | raw] gives an orthonormal basis whose tail spans p^⊥
    Q, _ = np.linalg.qr(np.column_stack([p, raw]))
    V = Q[:, 1:].T.copy()
    if theta_eval(p, V) < 0:
        V[-1] *= -1.0
    return V * (np.linalg.norm(q - p) / 2.0)


def apply_frame(line, V, split_vectors):
    """A(a, b) = (sum a_i v_i, sum b_j T_{p,q} v_j) for split vectors (..., 2n)."""
    a, b = _parts(split_vectors)
    xs = a @ V
    ys = b @ reflection(line.p, line.q, V)
    return xs, ys


def frame_A(line, seed=0):
    """Images of the null bases e_i and f_j under the frame isometry A."""
    V = frame_basis(line, seed)
    TV = reflection(line.p, line.q, V)
    zero = np.zeros_like(V[0])
    e_imgs = [LineTangent(line, v, zero) for v in V]
    f_imgs = [LineTangent(line, zero, tv) for tv in TV]
    return e_imgs, f_imgs


# -- chartized submanifolds ---------------------------------------------------

@dataclass(frozen=True)
class ChartizedSubmanifold:
    """A chart u -> line with differential columns.

    ``evaluate(U)`` returns ``(p, q, xs, ys)`` with xs, ys of shape
    (..., n, n+1).  ``orientation`` = -1 negates the first column.
    """

    domain: Box
    evaluate: Callable
    orientation: int = 1
    label: str = ""

    def __call__(self, U):
        p, q, xs, ys = self.evaluate(U)
        if self.orientation == -1:
            xs = xs.copy()
            ys = ys.copy()
            xs[..., 0, :] *= -1.0
            ys[..., 0, :] *= -1.0
        return p, q, xs, ys

    def reversed(self):
        return ChartizedSubmanifold(self.domain, self.evaluate,
                                    -self.orientation, self.label)


def _p_minus(X, dX):
    """Backward endpoint of the normal geodesic at x in S, and its differential."""
    b = X[..., 1:].copy()
    b[..., 0] -= 1.0
    b = b / X[..., :1]
    db = (dX[..., 1:] - b[..., None, :] * dX[..., :1]) / X[..., None, :1]
    return b, db


def _p_plus(X, dX):
    b = X[..., 1:].copy()
    b[..., 0] += 1.0
    b = b / X[..., :1]
    db = (dX[..., 1:] - b[..., None, :] * dX[..., :1]) / X[..., None, :1]
    return b, db


def _positive_orientation(box, evaluate):
    """Orientation sign making psi positive at an interior point of the box."""
    lo, hi = np.asarray(box.lower), np.asarray(box.upper)
    u = lo + 0.37 * (hi - lo)
    return 1 if psi_arrays(*evaluate(u[None, :]))[0] > 0 else -1


def mo_chart(n, radius=2.0, breaks=(1.0,)):
    """M_o over the hyperbolic ball of ``radius`` in S, geodesic polar chart."""

    def evaluate(U):
        y, dy = polar_to_disk(U, n)
        X, dX = s_point(y, dy)
        p, dp = _p_minus(X, dX)
        return p, T_map(p), dp, T_map(dp)

    box = polar_box(n, radius, breaks)
    return ChartizedSubmanifold(box, evaluate, _positive_orientation(box, evaluate),
                                label="M_o")


@dataclass(frozen=True)
class PerturbationSpec:
    """h(y) = y + amplitude * bump(d(y, 0) / support_radius) * direction.

    y are disk coordinates of S; the chart covers the ball of
    ``collar_radius`` (> support_radius) about the center of S.
    """

    direction: tuple = (1.0,)
    amplitude: float = 0.0
    support_radius: float = 1.0
    collar_radius: float = 2.0

    def unit_direction(self, n):
        w = np.zeros(n)
        d = np.asarray(self.direction, dtype=float)[:n]
        w[:len(d)] = d
        nw = np.linalg.norm(w)
        if nw == 0:
            raise GeometryInputError("perturbation direction must be nonzero")
        return w / nw


def default_spec(n, amplitude=0.1):
    return PerturbationSpec(direction=(1.0,) + (0.0,) * (n - 1),
                            amplitude=amplitude)


def bump_map(spec, n, y, dy):
    """h and its pushforward of the columns ``dy`` (..., k, n)."""
    w = spec.unit_direction(n)
    r = np.linalg.norm(y, axis=-1)
    d = 2.0 * np.arctanh(r)
    t = d / spec.support_radius
    rho = bump(t)
    # gradient of rho in y: rho'(t) / R * 2/(1-r^2) * y/r
    with np.errstate(invalid="ignore", divide="ignore"):
        d_over_r = np.where(r > 1e-12, d / r, 2.0)
        g = np.where(t > 0, bump_derivative(t) / np.where(t > 0, t, 1.0), -8.0)
    grad = (g * d_over_r / spec.support_radius**2 * 2.0 / (1.0 - r * r))[..., None] * y
    hy = y + spec.amplitude * rho[..., None] * w
    dh = dy + spec.amplitude * np.einsum("...ka,...a->...k", dy, grad)[..., None] * w
    return hy, dh, 1.0 + spec.amplitude * grad @ w


def perturb_mo(spec, n, check=True, grid=None):
    """Competitor chart u -> (p_-(x(u)), p_+(h(x(u)))) over the collar ball."""
    if spec.collar_radius <= spec.support_radius:
        raise GeometryInputError("collar radius must exceed the support radius")

    def evaluate(U):
        y, dy = polar_to_disk(U, n)
        X, dX = s_point(y, dy)
        p, dp = _p_minus(X, dX)
        hy, dhy, _ = bump_map(spec, n, y, dy)
        if np.any(np.sum(hy * hy, axis=-1) >= 1.0):
            raise GeometryInputError("perturbed point left the ball")
        Xh, dXh = s_point(hy, dhy)
        q, dq = _p_plus(Xh, dXh)
        return p, q, dp, dq

    box = polar_box(n, spec.collar_radius, (spec.support_radius,))
    # same orientation as M_o, with which the competitor agrees off the support
    ref = mo_chart(n, spec.collar_radius, (spec.support_radius,))
    m = ChartizedSubmanifold(box, evaluate, ref.orientation,
                             label=f"competitor eps={spec.amplitude:g}")
    if check:
        g = grid or QuadratureGrid("gauss_legendre_tensor", GL_POINTS.get(n, 7))
        U, _ = g.nodes(m.domain)
        y, dy = polar_to_disk(U, n)
        _, _, jac = bump_map(spec, n, y, dy)
        if np.any(jac <= 0):
            raise GeometryInputError(
                "perturbation is not a local diffeomorphism; shrink epsilon")
        _, cls = gram_on_grid(m, U)
        bad = cls != "spacelike"
        if np.any(bad):
            raise NotSpacelikeError(
                "competitor is not space-like; shrink epsilon",
                U[np.argmax(bad)])
    return m


# -- quadrature ---------------------------------------------------------------

def _threads():
    try:
        return max(1, int(os.environ.get("GEOCALIB_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class QuadratureGrid:
    scheme: str = "gauss_legendre_tensor"
    resolution: int = 17
    seed: int = 0

    def __post_init__(self):
        if self.scheme not in ("gauss_legendre_tensor", "monte_carlo"):
            raise GeometryInputError(f"unknown quadrature scheme {self.scheme!r}")
        if self.resolution < 2:
            raise GeometryInputError("resolution must be at least 2")

    def nodes(self, box):
        """Nodes (N, dim) and weights (N,) over ``box``."""
        if self.scheme == "monte_carlo":
            rng = np.random.default_rng(self.seed)
            lo, hi = np.asarray(box.lower), np.asarray(box.upper)
            U = lo + (hi - lo) * rng.random((self.resolution, box.dim))
            w = np.full(self.resolution, np.prod(hi - lo) / self.resolution)
            return U, w
        x, wt = np.polynomial.legendre.leggauss(self.resolution)
        axes, weights = [], []
        for i in range(box.dim):
            pts, ws = [], []
            for a, b in box.axis_pieces(i):
                pts.append(0.5 * (b - a) * x + 0.5 * (a + b))
                ws.append(0.5 * (b - a) * wt)
            axes.append(np.concatenate(pts))
            weights.append(np.concatenate(ws))
        mesh = np.meshgrid(*axes, indexing="ij")
        wmesh = np.meshgrid(*weights, indexing="ij")
        U = np.stack([m.ravel() for m in mesh], axis=-1)
        W = np.prod(np.stack([m.ravel() for m in wmesh], axis=-1), axis=-1)
        return U, W

    def refined(self):
        step = 8 if self.scheme == "gauss_legendre_tensor" else self.resolution
        return QuadratureGrid(self.scheme, self.resolution + step, self.seed + 1)


def _chunked(fn, U, chunk=4096):
    pieces = [U[i:i + chunk] for i in range(0, len(U), chunk)]
    with ThreadPoolExecutor(max_workers=_threads()) as ex:
        # map preserves order, so reductions below are bit-stable
        results = list(ex.map(fn, pieces))
    return [np.concatenate(r) for r in zip(*results)]


def gram_on_grid(m, U):
    """Gram matrices at the nodes and their causal classes.

    Classes are taken on the unit-diagonal rescaling of each Gram matrix,
    since polar charts shrink columns near the coordinate singularity
    without changing the plane they span.
    """
    def work(Uc):
        p, q, xs, ys = m(Uc)
        G = line_gram(p, q, xs, ys)
        d = np.sqrt(np.abs(np.einsum("...ii->...i", G)))
        d = np.where(d > 0, d, 1.0)
        Gn = G / (d[..., :, None] * d[..., None, :])
        return G, np.asarray(classify_gram(Gn))
    G, cls = _chunked(work, U)
    return G, cls


def region_volume(m, grid=None):
    """Integral of sqrt(det Gram) over the chart domain."""
    grid = grid or QuadratureGrid()
    U, W = grid.nodes(m.domain)
    G, cls = gram_on_grid(m, U)
    bad = cls != "spacelike"
    if np.any(bad):
        raise NotSpacelikeError("chart is not space-like at a grid point",
                                U[np.argmax(bad)])
    return float(np.sum(W * np.sqrt(np.linalg.det(G))))


def psi_flux(m, grid=None):
    grid = grid or QuadratureGrid()
    U, W = grid.nodes(m.domain)
    (vals,) = _chunked(lambda Uc: (psi_arrays(*m(Uc)),), U)
    return float(np.sum(W * vals))


def pointwise_ratio(m, grid=None):
    """min over nodes of psi(blade) / vol(blade)."""
    grid = grid or QuadratureGrid()
    U, _ = grid.nodes(m.domain)

    def work(Uc):
        p, q, xs, ys = m(Uc)
        vol = np.sqrt(np.abs(np.linalg.det(line_gram(p, q, xs, ys))))
        return (psi_arrays(p, q, xs, ys) / vol,)

    (r,) = _chunked(work, U)
    return float(np.min(r))


# -- maximization ----------------------------------------------------------

@dataclass(frozen=True)
class VolumeReport:
    vol_reference: float
    vol_competitor: float
    flux_reference: float
    flux_competitor: float
    spacelike_ok: bool
    pointwise_min_ratio: float
    epsilon: float
    refinement_delta: float
    strict_gap: bool

    def as_record(self):
        return asdict(self)


def maximization_report(spec, n, grid=None, ratio_tol=1e-10):
    """Volumes and psi-fluxes of M_o and a competitor over the same domain.

    Nothing is asserted here; callers inspect the report.  The competitor
    must be space-like (perturb_mo raises otherwise).
    """
    grid = grid or QuadratureGrid("gauss_legendre_tensor", GL_POINTS.get(n, 7))
    ref = mo_chart(n, spec.collar_radius, (spec.support_radius,))
    comp = perturb_mo(spec, n, grid=grid)
    vol_ref = region_volume(ref, grid)
    vol_comp = region_volume(comp, grid)
    fine = grid.refined()
    delta = max(abs(region_volume(comp, fine) - vol_comp),
                abs(region_volume(ref, fine) - vol_ref))
    ratio = pointwise_ratio(comp, grid)
    gap = vol_ref - vol_comp
    return VolumeReport(
        vol_reference=vol_ref,
        vol_competitor=vol_comp,
        flux_reference=psi_flux(ref, grid),
        flux_competitor=psi_flux(comp, grid),
        spacelike_ok=True,
        pointwise_min_ratio=ratio,
        epsilon=spec.amplitude,
        refinement_delta=delta,
        strict_gap=bool(gap > 10.0 * delta and ratio >= 1.0 - ratio_tol),
    )


def first_variation(n, eps=1e-3, grid=None):
    """Slope of the competitor volume at epsilon = 0.

    One-sided quotients s(e) = (vol(e) - vol(0)) / e at e = eps and eps/2
    are combined as 2 s(eps/2) - s(eps), cancelling the O(eps) term.  The
    family is even in epsilon, so a central difference would vanish by
    symmetry alone; this estimate does not rely on that.
    """
    grid = grid or QuadratureGrid("gauss_legendre_tensor", GL_POINTS.get(n, 7))
    v0 = region_volume(mo_chart(n, 2.0, (1.0,)), grid)

    def slope(e):
        return (region_volume(perturb_mo(default_spec(n, e), n, grid=grid), grid) - v0) / e

    return 2.0 * slope(eps / 2.0) - slope(eps)
