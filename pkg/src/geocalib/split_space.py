"""The split space R^{n,n} in null coordinates and the calibration phi_c.

A split vector is stored as one array of length 2n, x-part first.  The
square norm is ``||(x, y)|| = <x, y>``, and

    phi_c = 1/2 (c e^1 ^ ... ^ e^n + (1/c) f^1 ^ ... ^ f^n)

where ``e^i`` read the x-part and ``f^j`` the y-part.
"""

from dataclasses import dataclass

import numpy as np

from .exterior_core import GeometryInputError, as_blade


@dataclass(frozen=True)
class SplitVector:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        y = np.atleast_1d(np.asarray(self.y, dtype=float))
        if x.shape != y.shape:
            raise GeometryInputError("x and y parts must have equal length")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.x.shape[-1]

    def stacked(self):
        return np.concatenate([self.x, self.y])


@dataclass(frozen=True)
class GraphPlane:
    """The n-plane {(v, A v)}; space-like iff sym(A) is positive definite."""

    A: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        if A.shape[-1] != A.shape[-2]:
            raise GeometryInputError("A must be square")
        object.__setattr__(self, "A", A)

    @property
    def n(self):
        return self.A.shape[-1]

    def sym(self):
        return 0.5 * (self.A + np.swapaxes(self.A, -1, -2))


def _parts(v):
    if isinstance(v, SplitVector):
        return v.x, v.y
    a = np.asarray(v, dtype=float)
    if a.shape[-1] % 2:
        raise GeometryInputError("split vectors have even length")
    n = a.shape[-1] // 2
    return a[..., :n], a[..., n:]


def split_inner(u, v):
    """Polarized split product (<u.x, v.y> + <v.x, u.y>) / 2."""
    ux, uy = _parts(u)
    vx, vy = _parts(v)
    if ux.shape[-1] != vx.shape[-1]:
        raise GeometryInputError("split vectors of different dimension")
    return 0.5 * (np.sum(ux * vy, axis=-1) + np.sum(vx * uy, axis=-1))


def _split_blade(blade):
    b = blade
    if isinstance(b, (list, tuple)) and b and isinstance(b[0], SplitVector):
        b = [v.stacked() for v in b]
    b = as_blade(b)
    n2 = b.shape[-1]
    if n2 % 2:
        raise GeometryInputError("split vectors have even length")
    n = n2 // 2
    if b.shape[-2] != n:
        raise GeometryInputError(
            f"expected an {n}-blade in R^({n},{n}), got grade {b.shape[-2]}")
    return b[..., :n], b[..., n:]


def phi_c_eval(c, blade):
    if not c > 0:
        raise GeometryInputError("c must be positive")
    xs, ys = _split_blade(blade)
    return 0.5 * (c * np.linalg.det(xs) + np.linalg.det(ys) / c)


def special_lagrangian_defect(c, blade):
    """det[y-parts] - c^2 det[x-parts]; zero on special Lagrangian blades."""
    if not c > 0:
        raise GeometryInputError("c must be positive")
    xs, ys = _split_blade(blade)
    return np.linalg.det(ys) - c * c * np.linalg.det(xs)


def graph_plane_blade(g):
    """Blade {(e_i, A e_i)}; accepts a GraphPlane or a stack of matrices."""
    A = g.A if isinstance(g, GraphPlane) else np.asarray(g, dtype=float)
    n = A.shape[-1]
    eye = np.broadcast_to(np.eye(n), A.shape)
    # row i of the blade is (e_i, A e_i) = (e_i, column i of A)
    return np.concatenate([eye, np.swapaxes(A, -1, -2)], axis=-1)


def sample_spacelike_graphs(seed, n, delta, count, antisymmetric=True):
    """Stack of ``count`` matrices A with lambda_min(sym A) >= delta.

    Entries are uniform in [-1, 1]; the symmetric part is shifted up only
    as far as needed, and an independent antisymmetric part is added.
    """
    if not delta > 0:
        raise GeometryInputError("delta must be positive")
    rng = np.random.default_rng(seed)
    m = rng.uniform(-1.0, 1.0, size=(count, n, n))
    s = 0.5 * (m + np.swapaxes(m, -1, -2))
    lam_min = np.linalg.eigvalsh(s)[:, 0]
    shift = np.maximum(delta - lam_min, 0.0)
    # a hair of headroom so rounding in eigvalsh never dips below delta
    shift = np.where(shift > 0, shift + 1e-12, 0.0)
    s = s + shift[:, None, None] * np.eye(n)
    if antisymmetric:
        k = rng.uniform(-1.0, 1.0, size=(count, n, n))
        s = s + 0.5 * (k - np.swapaxes(k, -1, -2))
    return s


def sample_spacelike_graph(seed, n, delta, antisymmetric=True):
    return GraphPlane(sample_spacelike_graphs(seed, n, delta, 1,
                                              antisymmetric)[0])
