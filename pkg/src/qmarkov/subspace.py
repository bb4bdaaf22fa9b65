"""Linear-algebra helpers for subspaces of M_n and finite *-subalgebras.

Subspaces of M_n are stored as matrices whose orthonormal columns are
column-stacked vectors, orthonormal in the Hilbert-Schmidt inner product.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .channel import dagger, unvec, vec
from .errors import DimensionMismatch


def orth(a, tol=1e-9):
    """Orthonormal basis of the column span, dropping directions below ``tol * max(1, s_max)``."""
    a = np.asarray(a, dtype=complex)
    if a.size == 0 or a.shape[1] == 0:
        return np.zeros((a.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    cut = tol * max(1.0, s[0] if len(s) else 0.0)
    return u[:, s > cut]


def nullspace(a, tol=1e-9):
    """Orthonormal basis of ker(a)."""
    a = np.asarray(a, dtype=complex)
    ncols = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(ncols, dtype=complex)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    cut = tol * max(1.0, s[0] if len(s) else 0.0)
    rank = int(np.sum(s > cut))
    return dagger(vh[rank:])


def intersect(q1, q2, tol=1e-9):
    """Orthonormal basis of span(q1) intersected with span(q2)."""
    if q1.shape[1] == 0 or q2.shape[1] == 0:
        return np.zeros((q1.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(dagger(q1) @ q2)
    k = int(np.sum(s > 1.0 - tol))
    return orth(q1 @ u[:, :k], tol)


def projector(q):
    return q @ dagger(q)


def distance(q1, q2):
    """Spectral norm of the difference of orthogonal projectors."""
    if q1.shape[0] != q2.shape[0]:
        raise DimensionMismatch("subspaces live in different spaces")
    return float(np.linalg.norm(projector(q1) - projector(q2), 2)) if q1.size or q2.size else 0.0


def containment_defect(big, small):
    """max ||(1 - P_big) v|| over unit vectors v in span(small)."""
    if small.shape[1] == 0:
        return 0.0
    resid = small - big @ (dagger(big) @ small)
    return float(np.linalg.norm(resid, 2))


def span_of(mats, tol=1e-9):
    mats = list(mats)
    if not mats:
        raise ValueError("empty family")
    return orth(np.column_stack([vec(m) for m in mats]), tol)


@dataclass(frozen=True)
class SubalgebraBasis:
    """A subspace of M_n expected to be a unital *-subalgebra.

    ``vectors`` has orthonormal columns (vec of the basis matrices).
    """

    dim: int
    vectors: np.ndarray

    @cached_property
    def matrices(self):
        return [unvec(self.vectors[:, k], self.dim) for k in range(self.vectors.shape[1])]

    @property
    def size(self):
        return self.vectors.shape[1]

    def projector(self):
        return projector(self.vectors)

    def contains(self, x, tol=1e-9):
        v = vec(x)
        nv = np.linalg.norm(v)
        if nv == 0:
            return True
        return np.linalg.norm(v - self.vectors @ (dagger(self.vectors) @ v)) <= tol * nv

    def contains_identity(self, tol=1e-9):
        return self.contains(np.eye(self.dim), tol)

    def closure_defects(self):
        """(adjoint defect, product defect) as worst projection residuals."""
        mats = self.matrices
        if not mats:
            return 0.0, 0.0
        p = self.vectors

        def resid(x):
            v = vec(x)
            return float(np.linalg.norm(v - p @ (dagger(p) @ v)))

        adj = max(resid(dagger(b)) for b in mats)
        prod = max(resid(a @ b) for a in mats for b in mats)
        return adj, prod

    def is_algebra(self, tol=1e-8):
        adj, prod = self.closure_defects()
        return self.contains_identity(tol) and adj <= tol and prod <= tol

    def is_scalars(self, tol=1e-9):
        return self.size == 1 and self.contains_identity(tol)

    def same_as(self, other, tol=1e-8):
        return self.size == other.size and distance(self.vectors, other.vectors) <= tol

    @classmethod
    def from_matrices(cls, mats, tol=1e-9):
        mats = list(mats)
        return cls(mats[0].shape[0], span_of(mats, tol))

    @classmethod
    def scalars(cls, n):
        return cls(n, vec(np.eye(n, dtype=complex))[:, None] / np.sqrt(n))
