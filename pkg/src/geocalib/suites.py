"""Verification suites run by the command line tool.

Each suite returns a list of :class:`Check` records; a suite passes when
every record does.  Random inputs are drawn from ``numpy.random`` with
explicit seeds, so a suite is a pure function of its arguments.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma

from .exterior_core import InnerProduct, gram_volume
from .foliation import (ball_samples, builtin_field, chart_lines,
                        geodesic_field_residual, s_chart, ter_margin)
from .geodesic_space import line_gram, push_tangent_arrays
from .hyperbolic import ball_to_hyperboloid, mink, tangent_projection
from .psi_calibration import (GL_POINTS, QuadratureGrid, T_map, apply_frame,
                              calib_constants_arrays, default_spec,
                              first_variation, frame_basis, maximization_report,
                              mo_chart, psi_arrays, region_volume)
from .geodesic_space import OrientedLine
from .split_space import (graph_plane_blade, phi_c_eval,
                          sample_spacelike_graphs, special_lagrangian_defect)

SUITES = ("check-phic", "check-isometry", "check-psi", "ter", "maximize")

DEFAULT_TOLERANCES = {
    "phic_inequality": 1e-10,
    "phic_equality": 1e-9,
    "sl_defect": 1e-6,
    "isometry_analytic": 1e-9,
    "isometry_fd": 1e-6,
    "pullback": 1e-9,
    "c_min": 1e-12,
    "c_graph": 1e-12,
    "c_strict": 1e-10,
    "c_spot": 1e-5,
    "calibration": 1e-9,
    "psi_mo": 1e-10,
    "volume_rel": 1e-5,
    "ter_margin": 1e-4,
    "geodesic_residual": 1e-6,
    "ter_degenerate": 1e-6,
    "ratio": 1e-10,
    "volume_compare": 1e-8,
    "first_variation": 1e-3,
}


@dataclass
class Check:
    suite: str
    name: str
    value: float
    bound: float
    passed: bool

    def record(self):
        return {"suite": self.suite, "name": self.name, "value": self.value,
                "bound": self.bound, "pass": self.passed}


@dataclass
class SuiteResult:
    suite: str
    checks: list
    tables: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)


def _le(suite, name, value, bound):
    return Check(suite, name, float(value), float(bound), bool(value <= bound))


def _ge(suite, name, value, bound):
    return Check(suite, name, float(value), float(bound), bool(value >= bound))


# -- random inputs -------------------------------------------------------------

def random_geodesics(rng, n, count, max_radius=1.5):
    """Base points within ``max_radius`` of the center, random unit velocities."""
    d = rng.standard_normal((count, n + 1))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = rng.uniform(0.0, max_radius, count)
    X = ball_to_hyperboloid(d * np.tanh(r / 2.0)[:, None])
    v = tangent_projection(X, rng.standard_normal((count, n + 2)))
    v /= np.sqrt(mink(v, v))[:, None]
    return X, v


def random_normal_vectors(rng, X, v, max_norm=1.5):
    """Vectors normal to (X, v) with Minkowski length uniform in [0, max_norm]."""
    w = tangent_projection(X, rng.standard_normal(X.shape))
    w = w - mink(w, v)[:, None] * v
    w /= np.sqrt(mink(w, w))[:, None]
    return w * rng.uniform(0.0, max_norm, len(w))[:, None]


def random_lines(rng, n, count, min_height=0.1):
    """Lines in S^n_- x S^n_+ with |p_0|, |q_0| >= min_height."""
    out = []
    for sign in (-1.0, 1.0):
        pts = np.empty((0, n + 1))
        while len(pts) < count:
            g = rng.standard_normal((2 * count, n + 1))
            g /= np.linalg.norm(g, axis=1, keepdims=True)
            g[:, 0] = sign * np.abs(g[:, 0])
            pts = np.concatenate([pts, g[np.abs(g[:, 0]) >= min_height]])
        out.append(pts[:count])
    return out[0], out[1]


def sphere_tangents(rng, p, k):
    """k random vectors in p^⊥ for each row of p; shape (N, k, n+1)."""
    w = rng.standard_normal(p.shape[:1] + (k,) + p.shape[1:])
    return w - np.einsum("nka,na->nk", w, p)[..., None] * p[:, None, :]


def rejection_blades(rng, p, q, max_rounds=200):
    """Space-like tangent blades at each (p, q) from raw random pairs.

    Raw pairs are drawn independently in p^⊥ x q^⊥ and kept only when the
    Gram matrix under the line metric is positive definite.
    """
    N, dim = p.shape
    n = dim - 1
    xs = np.zeros((N, n, dim))
    ys = np.zeros((N, n, dim))
    todo = np.arange(N)
    for _ in range(max_rounds):
        if not len(todo):
            break
        cx = sphere_tangents(rng, p[todo], n)
        cy = sphere_tangents(rng, q[todo], n)
        G = line_gram(p[todo], q[todo], cx, cy)
        ok = np.all(np.linalg.eigvalsh(G) > 1e-6, axis=-1)
        xs[todo[ok]] = cx[ok]
        ys[todo[ok]] = cy[ok]
        todo = todo[~ok]
    keep = np.setdiff1d(np.arange(N), todo)
    return keep, xs[keep], ys[keep]


# -- suites ----------------------------------------------------------------

def check_phic(n, seed, tol, count=10_000):
    s = "check-phic"
    rng = np.random.default_rng(seed)
    inner = InnerProduct.split(n)
    A = sample_spacelike_graphs(seed, n, 0.05, count)
    blades = graph_plane_blade(A)
    c = np.exp(rng.uniform(np.log(0.1), np.log(10.0), count))
    vol, _ = gram_volume(blades, inner)
    phi = np.array([phi_c_eval(ci, b) for ci, b in zip(c, blades)])
    positive = phi > 0
    checks = [_ge(s, f"min(phi_c - vol) over {count} planes, n={n}",
                  np.min((phi - vol)[positive]), -tol["phic_inequality"])]
    S = sample_spacelike_graphs(seed + 1, n, 0.05, count, antisymmetric=False)
    cs = np.sqrt(np.linalg.det(S))
    sb = graph_plane_blade(S)
    svol, _ = gram_volume(sb, inner)
    sphi = np.array([phi_c_eval(ci, b) for ci, b in zip(cs, sb)])
    checks.append(_le(s, "max |phi_c - vol| on symmetric det A = c^2",
                      np.max(np.abs(sphi - svol)), tol["phic_equality"]))
    calibrated = np.abs(sphi - svol) <= tol["phic_equality"]
    defect = np.array([special_lagrangian_defect(ci, b)
                       for ci, b in zip(cs[calibrated], sb[calibrated])])
    checks.append(_le(s, "max |SL defect| where calibrated",
                      np.max(np.abs(defect)) if len(defect) else 0.0,
                      tol["sl_defect"]))
    t = 1.7
    scaled = np.array([phi_c_eval(ci, t * b) for ci, b in zip(c[:100], blades[:100])])
    checks.append(_le(s, "max |phi_c(t xi) - t^n phi_c(xi)|",
                      np.max(np.abs(scaled - t**n * phi[:100])), 1e-12 * t**n * max(1.0, np.abs(phi[:100]).max())))
    return SuiteResult(s, checks)


def check_isometry(n, seed, tol, count=1000):
    s = "check-isometry"
    rng = np.random.default_rng(seed)
    X, v = random_geodesics(rng, n, count)
    J0 = random_normal_vectors(rng, X, v)
    J0p = random_normal_vectors(rng, X, v)
    kn = mink(J0, J0) - mink(J0p, J0p)
    checks = []
    for mode, key in (("analytic", "isometry_analytic"), ("fd", "isometry_fd")):
        p, q, x, y = push_tangent_arrays(X, v, J0, J0p, mode=mode)
        G = line_gram(p, q, x[:, None, :], y[:, None, :])[:, 0, 0]
        checks.append(_le(s, f"max |line_inner(push) - killing_norm| ({mode}), n={n}",
                          np.max(np.abs(G - kn)), tol[key]))
    # polarization
    J1 = random_normal_vectors(rng, X, v)
    J1p = random_normal_vectors(rng, X, v)
    p, q, x0, y0 = push_tangent_arrays(X, v, J0, J0p)
    _, _, x1, y1 = push_tangent_arrays(X, v, J1, J1p)
    G = line_gram(p, q, np.stack([x0, x1], 1), np.stack([y0, y1], 1))[:, 0, 1]
    pol = mink(J0, J1) - mink(J0p, J1p)
    checks.append(_le(s, "max polarized isometry error", np.max(np.abs(G - pol)),
                      tol["isometry_analytic"]))
    # recorded H^2 hand examples
    Xh = np.array([1.0, 0.0, 0.0])
    vh = np.array([0.0, 1.0, 0.0])
    E = np.array([0.0, 0.0, 1.0])
    for label, a, b, want in (("J0=E, J0'=0", E, 0 * E, 1.0),
                              ("J0=0, J0'=E", 0 * E, E, -1.0)):
        p, q, x, y = push_tangent_arrays(Xh, vh, a, b)
        val = line_gram(p, q, x[None], y[None])[0, 0]
        checks.append(_le(s, f"H^2 hand example {label} norm {want:+g}",
                          abs(val - want), tol["isometry_analytic"]))
    return SuiteResult(s, checks)


def orthonormal_psi(p, q, xs, ys):
    G = line_gram(p, q, xs, ys)
    L = np.linalg.cholesky(G)
    Linv = np.linalg.inv(L)
    return psi_arrays(p, q, Linv @ xs, Linv @ ys)


def ball_volume(n, radius):
    """Hyperbolic volume of an n-ball: area(S^{n-1}) * int_0^R sinh^{n-1}."""
    if n == 1:
        return 2.0 * radius
    area = 2.0 * np.pi ** (n / 2) / gamma(n / 2)
    return area * quad(lambda t: np.sinh(t) ** (n - 1), 0.0, radius,
                       epsabs=0.0, epsrel=1e-12)[0]


def check_psi(n, seed, tol, count=1000, line_count=100_000, grid=None):
    s = "check-psi"
    rng = np.random.default_rng(seed)
    checks = []
    # pullback identity A* psi = C phi_c
    p, q = random_lines(rng, n, count)
    errs = np.empty(count)
    for i in range(count):
        line = OrientedLine(p[i], q[i])
        V = frame_basis(line, seed + i)
        B = rng.standard_normal((n, 2 * n))
        xs, ys = apply_frame(line, V, B)
        C, c = calib_constants_arrays(p[i], q[i])
        errs[i] = abs(psi_arrays(p[i], q[i], xs, ys) - C * phi_c_eval(c, B))
    checks.append(_le(s, f"max |A*psi - C phi_c|, n={n}", errs.max(), tol["pullback"]))
    # C >= 1 everywhere, = 1 on the graph of T, > 1 off it
    P, Q = random_lines(rng, n, line_count, min_height=1e-6)
    C, _ = calib_constants_arrays(P, Q)
    checks.append(_ge(s, "C_min ≥ 1 − 1e-12", C.min(), 1.0 - tol["c_min"]))
    Cg, _ = calib_constants_arrays(P[:count], T_map(P[:count]))
    checks.append(_le(s, "max |C(p, Tp) - 1|", np.abs(Cg - 1).max(), tol["c_graph"]))
    delta = sphere_tangents(rng, T_map(P[:count]), 1)[:, 0]
    delta *= (rng.uniform(1e-3, 1e-1, count) * 1.01 /
              np.linalg.norm(delta, axis=1))[:, None]
    Qn = T_map(P[:count]) + delta
    Qn /= np.linalg.norm(Qn, axis=1, keepdims=True)
    far = np.linalg.norm(Qn - T_map(P[:count]), axis=1) > 1e-3
    mask = far & (Qn[:, 0] > 1e-8)
    Cf, _ = calib_constants_arrays(P[:count][mask], Qn[mask])
    checks.append(_ge(s, "min C - 1 where |q - Tp| > 1e-3", (Cf - 1).min(),
                      tol["c_strict"]))
    if n == 1:
        Cs, _ = calib_constants_arrays(np.array([-1.0, 0.0]),
                                       np.array([np.sqrt(0.5), np.sqrt(0.5)]))
        checks.append(_le(s, "|C(spot) - 1.09869|", abs(Cs - 1.09869),
                          tol["c_spot"]))
    # calibration inequality, two independent blade generators
    p, q = random_lines(rng, n, count)
    ratios = []
    A = sample_spacelike_graphs(seed + 7, n, 0.05, count)
    for i in range(count):
        line = OrientedLine(p[i], q[i])
        xs, ys = apply_frame(line, frame_basis(line, seed + i), graph_plane_blade(A[i]))
        ratios.append((xs, ys))
    xs = np.stack([r[0] for r in ratios])
    ys = np.stack([r[1] for r in ratios])
    for label, (pp, qq, bx, by) in (("frame pullback", (p, q, xs, ys)),
                                     ("rejection", (p,) + (None,) * 3)):
        if label == "rejection":
            keep, bx, by = rejection_blades(rng, p, q)
            pp, qq = p[keep], q[keep]
        vol = np.sqrt(np.linalg.det(line_gram(pp, qq, bx, by)))
        psi = psi_arrays(pp, qq, bx, by)
        pos = psi > 0
        # both sides are multilinear; compare on unit-volume blades
        checks.append(_ge(s, f"min psi/vol - 1 ({label}, {int(pos.sum())} blades)",
                          (psi[pos] / vol[pos]).min() - 1.0 if pos.any() else 0.0,
                          -tol["calibration"]))
    # M_o calibrated, and its volume
    grid = grid or QuadratureGrid("gauss_legendre_tensor", GL_POINTS.get(n, 7))
    m = mo_chart(n, 1.0, ())
    U, _ = grid.nodes(m.domain)
    vals = orthonormal_psi(*m(U))
    checks.append(_le(s, "max |psi - 1| on orthonormal M_o frames",
                      np.abs(vals - 1).max(), tol["psi_mo"]))
    vol = region_volume(m, grid)
    exact = ball_volume(n, 1.0)
    checks.append(_le(s, "relative error of vol(M_o over R=1)",
                      abs(vol - exact) / exact, tol["volume_rel"]))
    return SuiteResult(s, checks)


def check_ter(n, seed, tol, field_spec=None, radii=(0.5, 1.0, 2.0), samples=128):
    s = "ter"
    field_spec = field_spec or {"family": "orthogeodesic"}
    family = field_spec["family"]
    params = {k: v for k, v in field_spec.items() if k != "family"}
    f = builtin_field(family, n, **params)
    checks = []
    rows = []
    for R in radii:
        rep = ter_margin(f, ball_samples(n, R, samples, seed))
        rows.append((R, rep.margin, rep.is_ter))
        if family == "orthogeodesic":
            checks.append(_le(s, f"|margin - tanh({R:g})|", abs(rep.margin - np.tanh(R)),
                              tol["ter_margin"]))
            checks.append(Check(s, f"is_ter (R={R:g})", float(rep.is_ter), 1.0,
                                rep.is_ter))
        elif family == "horospherical":
            checks.append(_le(s, f"|margin - 1| (R={R:g})", abs(rep.margin - 1.0),
                              tol["ter_margin"]))
            checks.append(Check(s, f"is_ter = false (R={R:g})", float(rep.is_ter), 0.0,
                                not rep.is_ter))
        else:
            checks.append(Check(s, f"margin (R={R:g})", rep.margin, 1.0, True))
    pts = ball_samples(n, 1.0, samples, seed)
    res = geodesic_field_residual(f, pts)
    if family in ("orthogeodesic", "horospherical"):
        checks.append(_le(s, "geodesic field residual", res, tol["geodesic_residual"]))
        # t.e.r. iff space-like: chart Grams over the unit ball of S
        chart = s_chart(f, n, 1.0)
        g = QuadratureGrid("gauss_legendre_tensor", 5)
        U, _ = g.nodes(chart.domain)
        p, q, xs, ys = chart_lines(chart, U)
        eig = np.linalg.eigvalsh(line_gram(p, q, xs, ys))
        if family == "orthogeodesic":
            checks.append(_ge(s, "min chart Gram eigenvalue (space-like)",
                              eig[:, 0].min(), 1e-12))
        else:
            checks.append(_le(s, "max |chart Gram eigenvalue| (degenerate)",
                              np.abs(eig).max(), tol["ter_degenerate"]))
    else:
        checks.append(Check(s, "geodesic field residual", res, 0.0, True))
    return SuiteResult(s, checks, {"ter_margins": (("radius", "margin", "is_ter"), rows)})


def check_maximize(n, seed, tol, eps_list=(0.0, 0.02, 0.05, 0.1), grid=None):
    s = "maximize"
    grid = grid or QuadratureGrid("gauss_legendre_tensor", GL_POINTS.get(n, 7))
    checks = []
    rows = []
    reports = []
    for eps in eps_list:
        r = maximization_report(default_spec(n, eps), n, grid)
        reports.append(r)
        rows.append((eps, r.vol_competitor, r.vol_reference, r.flux_competitor))
        qtol = max(10.0 * r.refinement_delta, 1e-10 * abs(r.flux_reference))
        checks.append(Check(s, f"space-like competitor (eps={eps:g})", 1.0, 1.0,
                            r.spacelike_ok))
        checks.append(_le(s, f"|flux_comp - flux_ref| (eps={eps:g})",
                          abs(r.flux_competitor - r.flux_reference), qtol))
        checks.append(_ge(s, f"pointwise min psi/vol (eps={eps:g})",
                          r.pointwise_min_ratio, 1.0 - tol["ratio"]))
        checks.append(_le(s, f"vol_comp - vol_ref (eps={eps:g})",
                          r.vol_competitor - r.vol_reference, tol["volume_compare"]))
        if eps >= 0.1:
            checks.append(_ge(s, f"strict gap / (10 x refinement noise) (eps={eps:g})",
                              (r.vol_reference - r.vol_competitor)
                              / max(10.0 * r.refinement_delta, 1e-300), 1.0))
    fv = first_variation(n, 1e-3, grid)
    checks.append(_le(s, "|first variation| at eps=1e-3", abs(fv), tol["first_variation"]))
    return SuiteResult(s, checks,
                       {"maximize_volumes": (("epsilon", "vol_competitor", "vol_reference",
                                              "flux_competitor"), rows)})
