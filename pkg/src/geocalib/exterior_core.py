"""Multilinear algebra on semi-Euclidean vector spaces.

Blades are ordered stacks of vectors, stored as arrays of shape
``(..., k, d)``; the leading axes are batch axes, so every routine here
evaluates many blades at once.  Orientation is carried by vector order.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

MINOR_TOL = 1e-12


class GeometryInputError(ValueError):
    """Raised when inputs violate a shape or domain precondition."""


class CausalClass(str, Enum):
    SPACELIKE = "spacelike"
    DEGENERATE = "degenerate"
    NONSPACELIKE = "nonspacelike"


@dataclass(frozen=True)
class InnerProduct:
    """A nondegenerate symmetric bilinear form given by its matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise GeometryInputError("inner product matrix must be square")
        if not np.allclose(m, m.T, atol=1e-14):
            raise GeometryInputError("inner product matrix must be symmetric")
        if abs(np.linalg.det(m)) <= 0:
            raise GeometryInputError("inner product matrix is degenerate")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self):
        return self.matrix.shape[0]

    @classmethod
    def euclidean(cls, dim):
        return cls(np.eye(dim))

    @classmethod
    def minkowski(cls, dim):
        """Signature (-, +, ..., +) with the time axis first."""
        m = np.eye(dim)
        m[0, 0] = -1.0
        return cls(m)

    @classmethod
    def split(cls, n):
        """Null-coordinate split product on R^n x R^n with ||(x, y)|| = <x, y>."""
        m = np.zeros((2 * n, 2 * n))
        m[:n, n:] = 0.5 * np.eye(n)
        m[n:, :n] = 0.5 * np.eye(n)
        return cls(m)

    def __call__(self, u, v):
        return np.einsum("...i,ij,...j->...", u, self.matrix, v)


def as_blade(vectors):
    b = np.asarray(vectors, dtype=float)
    if b.ndim == 1:
        b = b[None, :]
    if b.ndim < 2 or b.shape[-2] < 1:
        raise GeometryInputError("a blade needs at least one vector")
    return b


def gram_matrix(blade, inner):
    b = as_blade(blade)
    if b.shape[-1] != inner.dim:
        raise GeometryInputError(
            f"vector dimension {b.shape[-1]} does not match inner product "
            f"dimension {inner.dim}")
    return np.einsum("...ia,ab,...jb->...ij", b, inner.matrix, b)


def classify_gram(gram, tol=MINOR_TOL):
    """Causal class of a Gram matrix (or a stack of them).

    Degenerate wins over the other two classes; otherwise the blade is
    space-like when every leading principal minor exceeds ``tol``.
    """
    g = np.asarray(gram, dtype=float)
    k = g.shape[-1]
    det = np.linalg.det(g)
    pos = np.ones(g.shape[:-2], dtype=bool)
    for i in range(1, k + 1):
        pos &= np.linalg.det(g[..., :i, :i]) > tol
    degenerate = np.abs(det) <= tol
    out = np.where(degenerate, CausalClass.DEGENERATE.value,
                   np.where(pos, CausalClass.SPACELIKE.value,
                            CausalClass.NONSPACELIKE.value))
    if out.ndim == 0:
        return CausalClass(str(out))
    return out


def gram_volume(blade, inner, tol=MINOR_TOL):
    """Return ``(sqrt|det G|, causal class)`` for a blade.

    Works on a single ``(k, d)`` blade or a stack ``(..., k, d)``; for
    stacks the class is returned as an array of strings.
    """
    g = gram_matrix(blade, inner)
    det = np.linalg.det(g)
    # degenerate blades carry volume 0, not the rounding residue
    vol = np.where(np.abs(det) <= tol, 0.0, np.sqrt(np.abs(det)))
    vol = vol if vol.ndim else float(vol)
    return vol, classify_gram(g, tol)


def form_on_blade(covectors, blade):
    """Evaluate the decomposable form covectors[0]^...^covectors[k-1].

    The value is ``det[lambda_i(w_j)]``.
    """
    lam = np.asarray(covectors, dtype=float)
    b = as_blade(blade)
    if lam.ndim == 1:
        lam = lam[None, :]
    if lam.shape[-2] != b.shape[-2]:
        raise GeometryInputError(
            f"{lam.shape[-2]} covectors cannot be evaluated on a "
            f"{b.shape[-2]}-blade")
    if lam.shape[-1] != b.shape[-1]:
        raise GeometryInputError("covector and vector dimensions differ")
    lam, b = np.broadcast_arrays(lam, b)
    # Evaluate on the lexicographically sorted blade and restore the sign,
    # so swapping two blade vectors negates the value exactly.
    k = b.shape[-2]
    flat_b = b.reshape(-1, k, b.shape[-1])
    flat_l = lam.reshape(-1, k, lam.shape[-1])
    out = np.empty(len(flat_b))
    for i, (L, B) in enumerate(zip(flat_l, flat_b)):
        order = np.lexsort(B.T[::-1])
        Bs = B[order]
        if np.any(np.all(Bs[1:] == Bs[:-1], axis=-1)):
            out[i] = 0.0
            continue
        out[i] = _perm_sign(order) * np.linalg.det(L @ Bs.T)
    out = out.reshape(b.shape[:-2])
    return out if out.ndim else float(out)


def _perm_sign(order):
    seen = np.zeros(len(order), dtype=bool)
    sign = 1
    for i in range(len(order)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = order[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign
