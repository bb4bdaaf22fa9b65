"""Adjoint of a channel with respect to the symmetric (KMS) inner product of a faithful state.

For a faithful invariant state rho the KMS adjoint is the unique unital CP map
with ``tr(rho^1/2 x rho^1/2 tau(y)) = tr(rho^1/2 adj(x) rho^1/2 y)``.  With
Kraus operators it is given by ``m_k = rho^{-1/2} l_k^* rho^{1/2}``.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .channel import KrausChannel, DensityState, apply, dagger, matrix_units, predual_apply, vec
from .errors import IllConditioned, NumericalError, StateNotFaithful, StateNotInvariant
from .subspace import SubalgebraBasis, distance, span_of


@dataclass(frozen=True)
class ModularPair:
    """A channel together with a faithful state, with cached modular data."""

    channel: KrausChannel
    state: DensityState
    condition_max: float = 1e12

    def __post_init__(self):
        if self.channel.dim != self.state.dim:
            from .errors import DimensionMismatch

            raise DimensionMismatch("channel and state dimensions differ")
        if not self.state.faithful():
            raise StateNotFaithful("state has a kernel", min_eigenvalue=float(self.state.eigenvalues[0]))
        ev = self.state.eigenvalues
        cond = float(ev[-1] / ev[0])
        if cond > self.condition_max:
            raise IllConditioned("state condition number too large", condition=cond)

    @property
    def dim(self):
        return self.channel.dim

    @cached_property
    def _eig(self):
        return np.linalg.eigh(self.state.rho)

    @cached_property
    def rho_half(self):
        w, u = self._eig
        return (u * np.sqrt(w)) @ dagger(u)

    @cached_property
    def rho_minus_half(self):
        w, u = self._eig
        return (u / np.sqrt(w)) @ dagger(u)

    @cached_property
    def rho_inv(self):
        w, u = self._eig
        return (u / w) @ dagger(u)

    def invariance_residual(self):
        rho = self.state.rho
        return float(np.linalg.norm(predual_apply(self.channel, rho) - rho))

    def modular(self, x):
        """Delta(x) = rho x rho^{-1}"""
        return self.state.rho @ x @ self.rho_inv

    def modular_superop(self):
        return np.kron(self.rho_inv.T, self.state.rho)

    def modular_projectors(self, tol=1e-9):
        """Spectral projectors of Delta as superoperators, one per distinct ratio."""
        w, u = self._eig
        n = self.dim
        logs = np.log(w)
        ratios = []
        groups = []
        for j in range(n):
            for i in range(n):
                r = logs[i] - logs[j]
                for g, val in enumerate(ratios):
                    if abs(val - r) <= tol:
                        groups[g].append((i, j))
                        break
                else:
                    ratios.append(r)
                    groups.append([(i, j)])
        # x = u xhat u^*  <=>  vec(x) = (conj(u) kron u) vec(xhat)
        basis = np.kron(np.conj(u), u)
        out = []
        for grp in groups:
            mask = np.zeros(n * n)
            for i, j in grp:
                mask[j * n + i] = 1.0
            out.append((basis * mask) @ dagger(basis))
        return np.exp(ratios), out


def kms_adjoint(pair, inv_tol=1e-9, tol=1e-8):
    """KMS adjoint as a KrausChannel.  Requires rho to be invariant."""
    resid = pair.invariance_residual()
    if resid > inv_tol:
        raise StateNotInvariant("state is not invariant under the predual", residual=resid)
    mh, ph = pair.rho_minus_half, pair.rho_half
    kraus = np.array([mh @ dagger(l) @ ph for l in pair.channel.kraus])
    return KrausChannel(kraus, tol=tol)


def kms_pair(channel, state, **kw):
    return ModularPair(channel, state, **kw)


def adjoint_relation_defect(pair, adjoint, samples=None, seed=0):
    """max |<x, tau(y)>_KMS - <adj(x), y>_KMS| over a test family.

    Uses all pairs of matrix units when ``n <= 4`` or ``samples`` is None,
    otherwise ``samples`` seeded random pairs of unit Frobenius norm.
    """
    n = pair.dim
    ph = pair.rho_half
    if samples is None or n <= 4:
        xs = ys = matrix_units(n)
        pairs = [(x, y) for x in xs for y in ys]
    else:
        rng = np.random.default_rng(seed)
        pairs = []
        for _ in range(samples):
            a = rng.standard_normal((2, n, n)) + 1j * rng.standard_normal((2, n, n))
            pairs.append((a[0] / np.linalg.norm(a[0]), a[1] / np.linalg.norm(a[1])))
    worst = 0.0
    for x, y in pairs:
        lhs = np.trace(ph @ x @ ph @ apply(pair.channel, y))
        rhs = np.trace(ph @ apply(adjoint, x) @ ph @ y)
        worst = max(worst, abs(lhs - rhs))
    return float(worst)


def verify_adjoint_relation(pair, adjoint=None, samples=None, seed=0, tol=1e-10):
    """True when the defining relation holds to ``tol``; returns (ok, defect)."""
    if adjoint is None:
        adjoint = kms_adjoint(pair)
    defect = adjoint_relation_defect(pair, adjoint, samples, seed)
    return defect <= tol, defect


def modular_commutation(pair, x):
    """Size of the commutator of Delta with tau.

    ``x`` may be a matrix (returns ``||Delta tau x - tau Delta x||``), a
    SubalgebraBasis (spectral norm of ``Delta T - T Delta`` restricted to it),
    or None (the full commutator norm).
    """
    t = pair.channel.superop
    d = pair.modular_superop()
    comm = d @ t - t @ d
    if x is None:
        return float(np.linalg.norm(comm, 2))
    if isinstance(x, SubalgebraBasis):
        if x.size == 0:
            return 0.0
        return float(np.linalg.norm(comm @ x.vectors, 2))
    return float(np.linalg.norm(comm @ vec(np.asarray(x, dtype=complex))))


def kraus_span_distance(first, second, tol=1e-10):
    """Distance between the linear spans of two Kraus families inside M_n."""
    a = span_of(first.kraus, tol)
    b = span_of(second.kraus, tol)
    if a.shape[1] != b.shape[1]:
        return float("inf") if a.shape[1] == 0 or b.shape[1] == 0 else max(1.0, distance(a, b))
    return distance(a, b)


def check_double_adjoint(pair, tol=1e-9):
    adj = kms_adjoint(pair)
    back = kms_adjoint(ModularPair(adj, pair.state, pair.condition_max))
    d = kraus_span_distance(back, pair.channel)
    if d > tol:
        raise NumericalError("double adjoint does not reproduce the Kraus span", distance=d)
    return d
