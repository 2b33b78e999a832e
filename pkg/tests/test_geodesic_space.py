import numpy as np
import pytest
from hypothesis import given, strategies as st

from geocalib.exterior_core import GeometryInputError
from geocalib.foliation import ball_samples, builtin_field
from geocalib.geodesic_space import (JacobiData, LineTangent, OrientedLine,
                                     killing_norm, line_gram, line_inner,
                                     line_of_geodesic, push_line_tangent,
                                     push_tangent_arrays, reflection)
from geocalib.hyperbolic import Geodesic, geodesic_eval, mink, origin
from geocalib.suites import random_geodesics, random_normal_vectors

H2 = Geodesic(np.array([1.0, 0, 0]), np.array([0.0, 1, 0]))
E = np.array([0.0, 0, 1])


def unit_sphere(rng, n):
    p = rng.standard_normal(n + 1)
    return p / np.linalg.norm(p)


def test_reflection_examples(rng):
    p, q = unit_sphere(rng, 3), unit_sphere(rng, 3)
    np.testing.assert_allclose(reflection(p, q, p), q, atol=1e-15)
    x = rng.standard_normal(4)
    x -= (x @ (p - q)) / ((p - q) @ (p - q)) * (p - q)
    np.testing.assert_allclose(reflection(p, q, x), x, atol=1e-15)
    np.testing.assert_allclose(reflection([-1.0, 0], [1.0, 0], [2.0, 3.0]), [-2.0, 3.0])


def test_line_inner_examples():
    L = OrientedLine(np.array([-1.0, 0]), np.array([1.0, 0]))
    u = LineTangent(L, [0.0, 1], [0.0, 1])
    assert line_inner(u, u) == pytest.approx(1.0)
    w = LineTangent(L, [0.0, -1], [0.0, 1])
    assert line_inner(w, w) == pytest.approx(-1.0)


def test_line_guards():
    with pytest.raises(GeometryInputError):
        OrientedLine(np.array([1.0, 0]), np.array([1.0, 0]))
    with pytest.raises(GeometryInputError):
        OrientedLine(np.array([2.0, 0]), np.array([1.0, 0]))
    L = OrientedLine(np.array([-1.0, 0]), np.array([1.0, 0]))
    with pytest.raises(GeometryInputError):
        LineTangent(L, [1.0, 0], [0.0, 1])


def test_line_of_geodesic(rng):
    w = unit_sphere(rng, 2)
    L = line_of_geodesic(Geodesic(origin(2), np.r_[0.0, w]))
    np.testing.assert_allclose(L.p, -w, atol=1e-15)
    np.testing.assert_allclose(L.q, w, atol=1e-15)
    R = line_of_geodesic(Geodesic(origin(2), -np.r_[0.0, w]))
    np.testing.assert_allclose(R.p, L.q)
    # two points on one leaf of the orthogeodesic foliation
    Vo = builtin_field("orthogeodesic", 2)
    X = ball_samples(2, 1.0, 8, seed=3)[5]
    g = Geodesic(X, Vo.value(X))
    Y, _ = geodesic_eval(g, 0.8)
    M = line_of_geodesic(Geodesic(Y, Vo.value(Y)))
    np.testing.assert_allclose(M.p, line_of_geodesic(g).p, atol=1e-12)
    np.testing.assert_allclose(M.q, line_of_geodesic(g).q, atol=1e-12)


@pytest.mark.parametrize("mode", ["analytic", "fd"])
def test_push_hand_examples(mode):
    t = push_line_tangent(JacobiData(H2, E, 0 * E), mode)
    np.testing.assert_allclose(t.at.p, [-1, 0])
    np.testing.assert_allclose(t.x, [0, 1], atol=1e-9)
    np.testing.assert_allclose(t.y, [0, 1], atol=1e-9)
    assert line_inner(t, t) == pytest.approx(1.0, abs=1e-9)
    t = push_line_tangent(JacobiData(H2, 0 * E, E), mode)
    np.testing.assert_allclose(t.x, [0, -1], atol=1e-9)
    np.testing.assert_allclose(t.y, [0, 1], atol=1e-9)
    assert line_inner(t, t) == pytest.approx(-1.0, abs=1e-9)
    t = push_line_tangent(JacobiData(H2, E, E), mode)
    assert line_inner(t, t) == pytest.approx(0.0, abs=1e-9)


def test_killing_norm_examples():
    assert killing_norm(JacobiData(H2, E, 0 * E)) == 1.0
    assert killing_norm(JacobiData(H2, 0 * E, E)) == -1.0
    assert killing_norm(JacobiData(H2, 2 * E, 3 * E)) == pytest.approx(4 - 9)
    with pytest.raises(GeometryInputError):
        JacobiData(H2, H2.v, 0 * E)


@given(st.integers(0, 2**31), st.integers(1, 3))
def test_isometry(seed, n):
    rng = np.random.default_rng(seed)
    X, v = random_geodesics(rng, n, 20)
    J0 = random_normal_vectors(rng, X, v)
    J0p = random_normal_vectors(rng, X, v)
    k = mink(J0, J0) - mink(J0p, J0p)
    for mode, tol in (("analytic", 1e-9), ("fd", 1e-6)):
        p, q, x, y = push_tangent_arrays(X, v, J0, J0p, mode)
        G = line_gram(p, q, x[:, None], y[:, None])[:, 0, 0]
        assert np.abs(G - k).max() <= tol


@given(st.integers(0, 2**31), st.integers(1, 3))
def test_polarized_isometry(seed, n):
    rng = np.random.default_rng(seed)
    X, v = random_geodesics(rng, n, 1)
    g = Geodesic(X[0], v[0])
    a = [random_normal_vectors(rng, X, v)[0] for _ in range(4)]
    u = push_line_tangent(JacobiData(g, a[0], a[1]))
    w = push_line_tangent(JacobiData(g, a[2], a[3]))
    expected = mink(a[0], a[2]) - mink(a[1], a[3])
    assert line_inner(u, w) == pytest.approx(expected, abs=1e-9)
    assert line_inner(u, w) == pytest.approx(line_inner(w, u), abs=1e-14)


@given(st.integers(0, 2**31), st.integers(1, 4))
def test_reflection_involution_isometry(seed, n):
    rng = np.random.default_rng(seed)
    p, q = unit_sphere(rng, n), unit_sphere(rng, n)
    if np.linalg.norm(p - q) < 1e-3:
        return
    x, z = rng.standard_normal((2, n + 1))
    np.testing.assert_allclose(reflection(p, q, reflection(p, q, x)), x, atol=1e-14)
    assert reflection(p, q, x) @ reflection(p, q, z) == pytest.approx(x @ z, abs=1e-13)
