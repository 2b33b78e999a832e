import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from geocalib.exterior_core import GeometryInputError
from geocalib.foliation import builtin_field
from geocalib.hyperbolic import (Geodesic, ball_to_hyperboloid, covariant_derivative,
                                 distance, e0, endpoint, geodesic_eval,
                                 jacobi_eval, mink, model_convert, origin,
                                 parallel_transport, project_to_hyperboloid,
                                 reference_hypersurface, tangent_projection)
from geocalib.suites import random_geodesics, random_normal_vectors


def unit_normal(rng, geo):
    w = random_normal_vectors(rng, geo.X[None], geo.v[None])[0]
    return w / np.sqrt(mink(w, w))


def test_model_convert_center_and_distance_one():
    np.testing.assert_allclose(model_convert(np.zeros(3)), origin(2))
    np.testing.assert_allclose(model_convert(origin(2), source="hyperboloid"), np.zeros(3))
    X = model_convert(np.array([np.tanh(0.5), 0.0, 0.0]))
    assert X[0] == pytest.approx(np.cosh(1.0), rel=1e-14)


def test_model_convert_tangent_roundtrip(rng):
    y = 0.3 * rng.standard_normal(3)
    dy = rng.standard_normal(3)
    X, dX = model_convert(y, dy)
    assert mink(X, dX) == pytest.approx(0.0, abs=1e-12)
    y2, dy2 = model_convert(X, dX, source="hyperboloid")
    np.testing.assert_allclose(y2, y, atol=1e-14)
    np.testing.assert_allclose(dy2, dy, atol=1e-12)


def test_model_convert_rejects_outside_ball():
    with pytest.raises(GeometryInputError):
        model_convert(np.array([1.0, 0.0]))
    with pytest.raises(GeometryInputError):
        model_convert(np.array([0.5, 1.0, 0.0]), source="hyperboloid")


def test_geodesic_eval_closed_form():
    g = Geodesic(np.array([1.0, 0, 0]), np.array([0.0, 1, 0]))
    X, v = geodesic_eval(g, 1.0)
    np.testing.assert_allclose(X, [np.cosh(1), np.sinh(1), 0], atol=1e-15)
    np.testing.assert_allclose(v, [np.sinh(1), np.cosh(1), 0], atol=1e-15)
    X0, v0 = geodesic_eval(g, 0.0)
    np.testing.assert_array_equal(X0, g.X)
    s = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(mink(geodesic_eval(g, s)[0], g.X), -np.cosh(s), rtol=1e-13)


def test_endpoints():
    g = Geodesic(np.array([1.0, 0, 0]), np.array([0.0, 1, 0]))
    np.testing.assert_allclose(endpoint(g, 1), [1, 0])
    np.testing.assert_allclose(endpoint(g, -1), [-1, 0])
    np.testing.assert_allclose(endpoint(g.reversed(), 1), endpoint(g, -1))
    with pytest.raises(GeometryInputError):
        endpoint(g, 0)


def test_diameter_endpoints(rng):
    w = rng.standard_normal(4)
    g = Geodesic(origin(3), np.r_[0.0, w / np.linalg.norm(w)])
    np.testing.assert_allclose(endpoint(g, 1), w / np.linalg.norm(w), atol=1e-15)
    np.testing.assert_allclose(endpoint(g, -1), -w / np.linalg.norm(w), atol=1e-15)


def test_parallel_transport(rng):
    (X, v), = [random_geodesics(rng, 2, 1)]
    g = Geodesic(X[0], v[0])
    np.testing.assert_allclose(parallel_transport(g, g.v, 0.7), geodesic_eval(g, 0.7)[1])
    w = unit_normal(rng, g)
    np.testing.assert_allclose(parallel_transport(g, w, 2.3), w)
    u = tangent_projection(g.X, rng.standard_normal(4))
    Pu = parallel_transport(g, u, -1.4)
    assert mink(Pu, Pu) == pytest.approx(mink(u, u), rel=1e-12)
    assert mink(Pu, geodesic_eval(g, -1.4)[0]) == pytest.approx(0.0, abs=1e-12)


def test_jacobi_constancy_examples(rng):
    X, v = random_geodesics(rng, 3, 1)
    g = Geodesic(X[0], v[0])
    w = unit_normal(rng, g)
    s = np.linspace(-5, 5, 41)
    J, Jp = jacobi_eval(g, w, 0 * w, s)
    np.testing.assert_allclose(mink(J, J) - mink(Jp, Jp), 1.0, atol=1e-12 * np.cosh(5) ** 2)
    J, Jp = jacobi_eval(g, 0 * w, w, s)
    np.testing.assert_allclose(mink(J, J) - mink(Jp, Jp), -1.0, atol=1e-12 * np.cosh(5) ** 2)


def test_jacobi_matches_variation_fd(rng):
    # oracle: differentiate the family of geodesics through proj(X + t J0)
    # with velocity tangent_projection(v + t dv), dv from the Gauss formula
    h = 1e-5
    for _ in range(20):
        X, v = random_geodesics(rng, 2, 1)
        g = Geodesic(X[0], v[0])
        J0 = random_normal_vectors(rng, X, v)[0]
        J0p = random_normal_vectors(rng, X, v)[0]
        dv = J0p + mink(J0, g.v) * g.X
        s = np.linspace(-2, 2, 9)
        pts = []
        for t in (h, -h):
            Xt = project_to_hyperboloid(g.X + t * J0)
            vt = tangent_projection(Xt, g.v + t * dv)
            vt = vt / np.sqrt(mink(vt, vt))
            pts.append(geodesic_eval(Geodesic(Xt, vt), s)[0])
        fd = (pts[0] - pts[1]) / (2 * h)
        J, _ = jacobi_eval(g, J0, J0p, s)
        assert np.abs(fd - J).max() <= 1e-6 * max(1.0, np.abs(J).max())


def test_jacobi_rejects_tangential_data():
    g = Geodesic(np.array([1.0, 0, 0]), np.array([0.0, 1, 0]))
    with pytest.raises(GeometryInputError):
        jacobi_eval(g, g.v, 0 * g.v, 0.0)


def test_covariant_derivative_orthogeodesic(rng):
    Vo = builtin_field("orthogeodesic", 2)
    X = ball_to_hyperboloid(0.4 * rng.uniform(-1, 1, (30, 3)))
    V = Vo.value(X)
    for mode in ("analytic", "fd"):
        np.testing.assert_allclose(covariant_derivative(Vo, X, V, mode=mode), 0, atol=1e-8)
    # on S the field is parallel along S
    Xs = X.copy()
    Xs[:, 1] = 0
    Xs = project_to_hyperboloid(Xs)
    w = tangent_projection(Xs, rng.standard_normal((30, 4)))
    w[:, 1] = 0
    np.testing.assert_allclose(covariant_derivative(Vo, Xs, w), 0, atol=1e-14)
    # at distance s from S, unit w ⊥ V has |∇_w V| = tanh(s)
    for s in (0.3, 1.0, 2.0):
        Xp = np.array([np.cosh(s), np.sinh(s), 0.0, 0.0])
        w = np.array([0.0, 0.0, 1.0, 0.0])
        d = covariant_derivative(Vo, Xp, w, mode="fd")
        assert np.sqrt(mink(d, d)) == pytest.approx(np.tanh(s), abs=1e-8)


def test_covariant_analytic_vs_fd(rng):
    for fam in ("orthogeodesic", "horospherical"):
        f = builtin_field(fam, 3)
        X = ball_to_hyperboloid(0.5 * rng.uniform(-1, 1, (40, 4)) / 2)
        w = tangent_projection(X, rng.standard_normal((40, 5)))
        a = covariant_derivative(f, X, w, mode="analytic")
        b = covariant_derivative(f, X, w, mode="fd")
        assert np.abs(a - b).max() <= 1e-6


def test_reference_hypersurface():
    foot, V, s = reference_hypersurface(origin(2))
    np.testing.assert_array_equal(foot, origin(2))
    np.testing.assert_allclose(V, e0(2))
    assert s == 0.0


@given(arrays(float, 3, elements=st.floats(-0.9, 0.9)).filter(lambda y: y @ y < 0.8))
def test_reference_hypersurface_roundtrip(y):
    X = ball_to_hyperboloid(y)
    foot, V, s = reference_hypersurface(X)
    assert mink(V, V) == pytest.approx(1.0, abs=1e-12)
    assert mink(V, X) == pytest.approx(0.0, abs=1e-12)
    assert foot[1] == pytest.approx(0.0, abs=1e-12)
    g = Geodesic(foot, e0(2))
    np.testing.assert_allclose(geodesic_eval(g, s)[0], X, atol=1e-12)
    assert distance(foot, X) == pytest.approx(abs(s), abs=1e-7)


@given(st.integers(0, 2**31), st.floats(-4, 4))
def test_endpoint_shift_invariance(seed, s0):
    X, v = random_geodesics(np.random.default_rng(seed), 2, 1)
    g = Geodesic(X[0], v[0])
    for sign in (1, -1):
        np.testing.assert_allclose(endpoint(g.shifted(s0), sign), endpoint(g, sign),
                                   atol=1e-10)


@given(st.integers(0, 2**31), st.floats(-5, 5))
def test_jacobi_norm_constant_property(seed, s):
    rng = np.random.default_rng(seed)
    X, v = random_geodesics(rng, 2, 1)
    g = Geodesic(X[0], v[0])
    J0 = random_normal_vectors(rng, X, v)[0]
    J0p = random_normal_vectors(rng, X, v)[0]
    J, Jp = jacobi_eval(g, J0, J0p, s)
    k0 = mink(J0, J0) - mink(J0p, J0p)
    scale = max(1.0, mink(J, J) + mink(Jp, Jp))
    assert abs(mink(J, J) - mink(Jp, Jp) - k0) <= 1e-12 * scale * 10
