import numpy as np
import pytest
from hypothesis import given, strategies as st

from geocalib.exterior_core import CausalClass, InnerProduct, gram_volume
from geocalib.split_space import (GraphPlane, SplitVector, graph_plane_blade,
                                  phi_c_eval, sample_spacelike_graph,
                                  sample_spacelike_graphs,
                                  special_lagrangian_defect, split_inner)


def blade_of(A):
    return graph_plane_blade(GraphPlane(np.asarray(A, dtype=float)))


def test_split_inner_examples():
    e1, e2 = np.eye(2)
    assert split_inner(SplitVector(e1, e1), SplitVector(e1, e1)) == 1.0
    assert split_inner(SplitVector(e1, 0 * e1), SplitVector(e1, 0 * e1)) == 0.0
    assert split_inner(SplitVector(e1, 4 * e1), SplitVector(e2, e2)) == 0.0


def test_split_inner_matches_matrix_form(rng):
    u, v = rng.standard_normal((2, 6))
    assert split_inner(u, v) == pytest.approx(InnerProduct.split(3)(u, v))


def test_phi_c_examples():
    assert phi_c_eval(2.0, [[1.0, 4.0]]) == pytest.approx(2.0)
    assert phi_c_eval(2.0, blade_of(np.diag([1.0, 4.0]))) == pytest.approx(2.0)
    assert phi_c_eval(1.0, blade_of(np.eye(2))) == pytest.approx(1.0)


def test_graph_blade_examples():
    ip = InnerProduct.split(2)
    assert gram_volume(blade_of(np.zeros((2, 2))), ip)[1] == CausalClass.DEGENERATE
    vol, cls = gram_volume(blade_of(np.diag([1.0, 4.0])), ip)
    assert cls == CausalClass.SPACELIKE and vol == pytest.approx(2.0)
    vol, cls = gram_volume(blade_of([[1.0, 1.0], [0.0, 1.0]]), ip)
    assert cls == CausalClass.SPACELIKE and vol == pytest.approx(np.sqrt(0.75))


def test_sl_defect_examples():
    assert special_lagrangian_defect(2.0, [[1.0, 4.0]]) == pytest.approx(0.0)
    assert special_lagrangian_defect(2.0, blade_of(np.diag([1.0, 4.0]))) == pytest.approx(0.0)
    assert special_lagrangian_defect(2.0, blade_of(np.eye(2))) == pytest.approx(-3.0)


def test_sampler_postconditions():
    g = sample_spacelike_graph(3, 2, 0.1)
    assert np.linalg.eigvalsh(g.sym()).min() >= 0.1
    g = sample_spacelike_graph(3, 3, 1.0, antisymmetric=False)
    np.testing.assert_array_equal(g.A, g.A.T)
    assert np.linalg.eigvalsh(g.A).min() >= 1.0
    np.testing.assert_array_equal(sample_spacelike_graph(5, 3, 0.2).A,
                                  sample_spacelike_graph(5, 3, 0.2).A)


def test_nonsymmetric_equality_gap():
    # A = [[1, b], [-b, 1]] has det A = 1 + b^2 but is not calibrated at c^2 = det A
    b = 0.5
    blade = blade_of([[1.0, b], [-b, 1.0]])
    c = np.sqrt(1 + b * b)
    assert special_lagrangian_defect(c, blade) == pytest.approx(0.0, abs=1e-12)
    vol, _ = gram_volume(blade, InnerProduct.split(2))
    assert phi_c_eval(c, blade) - vol > 1e-3


@given(st.integers(0, 2**31), st.integers(1, 4), st.floats(1e-3, 2.0),
       st.floats(0.05, 20.0))
def test_calibration_inequality(seed, n, delta, c):
    graphs = sample_spacelike_graphs(seed, n, delta, 50)
    blades = graph_plane_blade(graphs)
    vol, _ = gram_volume(blades, InnerProduct.split(n))
    phi = phi_c_eval(c, blades)
    assert np.all(phi >= vol - 1e-10 * np.maximum(1, vol))


@given(st.integers(0, 2**31), st.integers(1, 4))
def test_symmetric_equality_and_defect(seed, n):
    g = sample_spacelike_graph(seed, n, 0.2, antisymmetric=False)
    blade = graph_plane_blade(g)
    c = np.sqrt(np.linalg.det(g.A))
    vol, _ = gram_volume(blade, InnerProduct.split(n))
    assert abs(phi_c_eval(c, blade) - vol) <= 1e-9 * max(1.0, vol)
    assert abs(special_lagrangian_defect(c, blade)) <= 1e-6 * max(1.0, c * c)


@given(st.integers(0, 2**31), st.integers(1, 4), st.floats(0.1, 3.0))
def test_scaling(seed, n, t):
    blade = graph_plane_blade(sample_spacelike_graph(seed, n, 0.1))
    c = 1.3
    assert phi_c_eval(c, t * blade) == pytest.approx(t ** n * phi_c_eval(c, blade),
                                                     rel=1e-12)
