"""Unital completely positive maps on M_n given by Kraus operators.

A channel acts in the Heisenberg picture, ``tau(x) = sum_k l_k x l_k^*``, and
is unital, ``sum_k l_k l_k^* = 1``.  Its predual on density matrices is
``tau_*(y) = sum_k l_k^* y l_k``.

Matrices are vectorized by stacking columns, ``vec(a x b) = (b^T kron a) vec(x)``,
so the Heisenberg superoperator is ``sum_k conj(l_k) kron l_k`` and the
predual superoperator is its conjugate transpose.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, InvalidState, NotUnital, SpectralError


def vec(x):
    return np.asarray(x).reshape(-1, order="F")


def unvec(v, n=None):
    v = np.asarray(v)
    if n is None:
        n = int(round(np.sqrt(v.shape[0])))
    return v.reshape(n, n, order="F")


def dagger(x):
    return np.conj(np.swapaxes(x, -1, -2))


def hermitian_part(x):
    return 0.5 * (x + dagger(x))


def matrix_units(n):
    """e_a = |i><j| ordered by the column-stacked index a = j*n + i."""
    eye = np.eye(n * n, dtype=complex)
    return np.array([unvec(eye[:, a], n) for a in range(n * n)])


def psd_sqrt(a):
    w, u = np.linalg.eigh(hermitian_part(a))
    w = np.clip(w, 0.0, None)
    return (u * np.sqrt(w)) @ dagger(u)


@dataclass(frozen=True)
class DensityState:
    """Positive semidefinite unit-trace matrix."""

    rho: np.ndarray
    tol: float = 1e-10

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] == 0:
            raise DimensionMismatch("density matrix must be square", shape=list(rho.shape))
        if not np.all(np.isfinite(rho)):
            raise InvalidState("density matrix has non-finite entries")
        herm_defect = float(np.abs(rho - dagger(rho)).max())
        if herm_defect > self.tol:
            raise InvalidState("density matrix is not Hermitian", defect=herm_defect)
        rho = hermitian_part(rho)
        evals = np.linalg.eigvalsh(rho)
        if evals[0] < -self.tol:
            raise InvalidState("density matrix is not positive", min_eigenvalue=float(evals[0]))
        trace_defect = abs(np.trace(rho).real - 1.0)
        if trace_defect > self.tol:
            raise InvalidState("density matrix does not have unit trace", defect=trace_defect)
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def dim(self):
        return self.rho.shape[0]

    @cached_property
    def eigenvalues(self):
        return np.linalg.eigvalsh(self.rho)

    def faithful(self):
        return bool(self.eigenvalues[0] > self.tol)

    def expect(self, x):
        return complex(np.trace(self.rho @ x))

    @classmethod
    def maximally_mixed(cls, n):
        return cls(np.eye(n) / n)


@dataclass(frozen=True)
class KrausChannel:
    """Unital CP map ``x -> sum_k l_k x l_k^*``."""

    kraus: np.ndarray
    tol: float = 1e-10

    def __post_init__(self):
        ks = np.array(self.kraus, dtype=complex)
        if ks.ndim == 2:
            ks = ks[None]
        if ks.ndim != 3 or ks.shape[0] == 0 or ks.shape[1] != ks.shape[2] or ks.shape[1] == 0:
            raise DimensionMismatch("Kraus operators must be a non-empty list of equal square matrices",
                                    shape=list(ks.shape))
        if not np.all(np.isfinite(ks)):
            raise DimensionMismatch("Kraus operators have non-finite entries")
        n = ks.shape[1]
        defect = float(np.linalg.norm(np.einsum("kij,klj->il", ks, ks.conj()) - np.eye(n), 2))
        if defect > self.tol:
            raise NotUnital("sum_k l_k l_k^* differs from the identity", defect=defect)
        ks.setflags(write=False)
        object.__setattr__(self, "kraus", ks)

    @property
    def dim(self):
        return self.kraus.shape[1]

    @property
    def n_kraus(self):
        return self.kraus.shape[0]

    def __call__(self, x):
        return apply(self, x)

    @cached_property
    def superop(self):
        return to_super(self).matrix

    @cached_property
    def predual_superop(self):
        return np.ascontiguousarray(dagger(self.superop))


@dataclass(frozen=True)
class Superoperator:
    """Linear map on M_n as an n^2 x n^2 matrix acting on column-stacked vectors."""

    dim: int
    matrix: np.ndarray

    def apply(self, x):
        return unvec(self.matrix @ vec(x), self.dim)

    def __call__(self, x):
        return self.apply(x)


@dataclass(frozen=True)
class SpectralData:
    eigenvalues: np.ndarray
    eigenvectors: list
    residuals: np.ndarray
    peripheral_index: np.ndarray
    peripheral_tol: float

    @property
    def peripheral_eigenvalues(self):
        return self.eigenvalues[self.peripheral_index]

    def peripheral_values(self, cluster_tol=1e-6):
        """Distinct peripheral eigenvalues sorted by argument in [0, 2 pi)."""
        return cluster_values(self.peripheral_eigenvalues, cluster_tol)

    def multiplicity_of_one(self):
        return int(np.sum(np.abs(self.eigenvalues - 1.0) <= self.peripheral_tol))

    def second_modulus(self):
        """Largest modulus among eigenvalues not equal to 1."""
        mods = np.abs(self.eigenvalues)
        mask = np.abs(self.eigenvalues - 1.0) > self.peripheral_tol
        return float(mods[mask].max()) if mask.any() else 0.0

    def subperipheral_modulus(self):
        """Largest modulus among non-peripheral eigenvalues."""
        mask = np.ones(len(self.eigenvalues), bool)
        mask[self.peripheral_index] = False
        return float(np.abs(self.eigenvalues[mask]).max()) if mask.any() else 0.0


def cluster_values(values, tol=1e-6):
    out = []
    for v in values:
        if not any(abs(v - w) <= tol for w in out):
            out.append(complex(v))
    out.sort(key=lambda z: np.angle(z) % (2 * np.pi) if abs(np.angle(z)) > tol else 0.0)
    return out


def _as_kraus(channel):
    return channel.kraus if isinstance(channel, KrausChannel) else np.asarray(channel, dtype=complex)


def apply(channel, x):
    x = np.asarray(x, dtype=complex)
    if x.shape != (channel.dim, channel.dim):
        raise DimensionMismatch("argument does not match channel dimension", shape=list(x.shape))
    return _kernels.apply_kraus(channel.kraus, x)


def predual_apply(channel, y):
    y = np.asarray(y, dtype=complex)
    if y.shape != (channel.dim, channel.dim):
        raise DimensionMismatch("argument does not match channel dimension", shape=list(y.shape))
    return _kernels.apply_kraus(dagger(channel.kraus), y)


def to_super(channel):
    ks = channel.kraus
    mat = sum(np.kron(np.conj(l), l) for l in ks)
    return Superoperator(channel.dim, np.ascontiguousarray(mat))


def choi(channel):
    """Choi matrix sum_{ij} e_ij kron tau(e_ij), positive semidefinite."""
    n = channel.dim
    out = np.zeros((n * n, n * n), dtype=complex)
    for i in range(n):
        for j in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = 1.0
            out[i * n:(i + 1) * n, j * n:(j + 1) * n] = apply(channel, e)
    return out


def kraus_from_superop(matrix, n=None, tol=1e-12):
    """Minimal Kraus family for a CP map given by its superoperator matrix."""
    matrix = np.asarray(matrix, dtype=complex)
    if n is None:
        n = int(round(np.sqrt(matrix.shape[0])))
    c = np.zeros((n * n, n * n), dtype=complex)
    for i in range(n):
        for j in range(n):
            img = unvec(matrix[:, j * n + i], n)
            c[i * n:(i + 1) * n, j * n:(j + 1) * n] = img
    w, u = np.linalg.eigh(hermitian_part(c))
    scale = max(1.0, float(np.abs(w).max()))
    keep = w > tol * scale
    if w.min() < -1e-8 * scale:
        raise SpectralError("superoperator is not completely positive", min_eigenvalue=float(w.min()))
    # Choi vector of l is sum_i e_i kron l e_i, i.e. l^T flattened row-major
    return np.array([np.sqrt(w[k]) * u[:, k].reshape(n, n).T for k in np.nonzero(keep)[0]])


def compose(first, second, tol=1e-9):
    """Heisenberg composition ``x -> first(second(x))`` with a minimal Kraus family."""
    if first.dim != second.dim:
        raise DimensionMismatch("channels act on different dimensions")
    mat = first.superop @ second.superop
    return KrausChannel(kraus_from_superop(mat, first.dim), tol=tol)


def power(channel, m, tol=1e-9):
    if m < 1:
        raise ValueError("power must be at least 1")
    mat = np.linalg.matrix_power(channel.superop, m)
    return KrausChannel(kraus_from_superop(mat, channel.dim), tol=tol)


def spectrum(channel, peripheral_tol=1e-8, resid_tol=1e-9):
    """Eigen-decomposition of the superoperator with residual certificates.

    Eigenvectors are reshaped to matrices with unit Hilbert-Schmidt norm.
    Raises SpectralError when a peripheral residual ``||tau(x) - lambda x||``
    exceeds ``resid_tol``, or any other residual exceeds 1e-6.
    """
    mat = channel.superop
    n = channel.dim
    vals, vecs = np.linalg.eig(mat)
    order = np.lexsort((np.angle(vals), -np.round(np.abs(vals), 12)))
    vals = vals[order]
    vecs = vecs[:, order]
    mats = []
    res = np.empty(len(vals))
    for k in range(len(vals)):
        x = unvec(vecs[:, k], n)
        x = x / np.linalg.norm(x)
        mats.append(x)
        res[k] = np.linalg.norm(apply(channel, x) - vals[k] * x)
    periph = np.nonzero(np.abs(np.abs(vals) - 1.0) <= peripheral_tol)[0]
    # defective eigenvalues inside the disk are only accurate to ~sqrt(eps)
    limit = np.full(len(vals), max(resid_tol, 1e-6))
    limit[periph] = resid_tol
    if np.any(res > limit):
        raise SpectralError("eigenvector residual above tolerance", max_residual=float(res.max()))
    if not np.any(np.abs(vals - 1.0) <= peripheral_tol):
        raise SpectralError("eigenvalue 1 not found for a unital map")
    return SpectralData(vals, mats, res, periph, peripheral_tol)


def random_isometry(rows, cols, rng):
    g = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_channel(n, d, rng=None, seed=None):
    """Random unital channel with ``d`` Kraus operators from a Haar-like isometry."""
    if rng is None:
        rng = np.random.default_rng(seed)
    if n < 1 or d < 1:
        raise ValueError("dimensions must be positive")
    v = random_isometry(n * d, n, rng)
    # l_k^* is the k-th n x n block of v, so sum_k l_k l_k^* = v^* v = 1
    kraus = np.array([dagger(v[k * n:(k + 1) * n]) for k in range(d)])
    return KrausChannel(kraus)


def random_channel_with_transient(n, r, d, rng=None, seed=None):
    """Random channel whose invariant states live on the first ``r`` basis vectors.

    The predual maps span(e_0..e_{r-1}) into itself and leaks the complement
    into it, so the support of the invariant state is a proper corner.
    """
    if rng is None:
        rng = np.random.default_rng(seed)
    if not 1 <= r < n:
        raise ValueError("need 1 <= r < n")
    g = rng.standard_normal((n * d, n)) + 1j * rng.standard_normal((n * d, n))
    for k in range(d):
        g[k * n + r:(k + 1) * n, :r] = 0.0
    q, _ = np.linalg.qr(g)
    kraus = np.array([dagger(q[k * n:(k + 1) * n]) for k in range(d)])
    return KrausChannel(kraus)


def unitary_channel(u):
    u = np.asarray(u, dtype=complex)
    return KrausChannel(u[None])
