"""Invariant states, fixed-point algebras and the multiplicative cores of a channel."""

from dataclasses import dataclass

import numpy as np

from .channel import (DensityState, KrausChannel, apply, dagger, hermitian_part, kraus_from_superop,
                      predual_apply, unvec, vec)
from .errors import (NotModularInvariant, NotSubharmonic, NumericalError, StateNotFaithful,
                     StateNotInvariant)
from .kms import ModularPair, kms_adjoint
from .subspace import SubalgebraBasis, distance, intersect, nullspace, orth


@dataclass(frozen=True)
class InvariantStates:
    states: list
    canonical: DensityState
    faithful_exists: bool

    @property
    def dimension(self):
        return len(self.states)


@dataclass(frozen=True)
class ProjectionMatrix:
    p: np.ndarray
    basis: np.ndarray

    @property
    def rank(self):
        return self.basis.shape[1]


@dataclass(frozen=True)
class Corner:
    """Compression of a channel to the support of an invariant state."""

    channel: KrausChannel
    state: DensityState
    embedding: np.ndarray
    reduced: bool

    def lift(self, x):
        u = self.embedding
        return u @ x @ dagger(u)

    def compress(self, x):
        u = self.embedding
        return dagger(u) @ x @ u


def _fixed_kernel(mat, tol):
    return nullspace(mat - np.eye(mat.shape[0]), tol)


def invariant_states(channel, tol=1e-9, state_tol=1e-10):
    """Basis of the invariant states of the predual, made of genuine density matrices.

    The canonical state is the ergodic average of the maximally mixed state;
    its support contains the support of every invariant state.
    """
    n = channel.dim
    tstar = channel.predual_superop
    right = _fixed_kernel(tstar, tol)
    left = _fixed_kernel(channel.superop, tol)
    k = right.shape[1]
    if k == 0 or left.shape[1] != k:
        raise NumericalError("fixed spaces of the channel and its predual have different dimensions",
                             predual=k, heisenberg=left.shape[1])

    # Hermitian real basis of the fixed space
    herm = []
    for c in range(k):
        b = unvec(right[:, c], n)
        herm.append(hermitian_part(b))
        herm.append(hermitian_part(-1j * b))
    real_rows = np.array([np.concatenate([h.real.ravel(), h.imag.ravel()]) for h in herm])
    u, s, vh = np.linalg.svd(real_rows, full_matrices=False)
    rank = int(np.sum(s > tol * max(1.0, s[0])))
    hbasis = []
    for r in range(rank):
        flat = vh[r]
        h = flat[: n * n].reshape(n, n) + 1j * flat[n * n:].reshape(n, n)
        hbasis.append(hermitian_part(h))

    candidates = []
    for h in hbasis:
        w, v = np.linalg.eigh(h)
        cut = 1e-9 * max(1e-300, float(np.abs(w).max()))
        for sign in (1.0, -1.0):
            sel = sign * w > cut
            if sel.any():
                part = (v[:, sel] * (sign * w[sel])) @ dagger(v[:, sel])
                candidates.append(part / np.trace(part).real)

    chosen = []
    q = np.zeros((n * n, 0), dtype=complex)
    for c in candidates:
        x = vec(c)
        r = x - q @ (dagger(q) @ x)
        if np.linalg.norm(r) > 1e-7 * np.linalg.norm(x):
            chosen.append(c)
            q = np.column_stack([q, r / np.linalg.norm(r)])
        if len(chosen) == k:
            break
    if len(chosen) != k:
        raise NumericalError("could not find a basis of invariant density matrices", found=len(chosen), needed=k)

    proj = right @ np.linalg.solve(dagger(left) @ right, dagger(left))
    canon = hermitian_part(unvec(proj @ vec(np.eye(n) / n), n))
    canon = canon / np.trace(canon).real
    canon_state = DensityState(canon, tol=max(state_tol, 1e-9))
    states = [DensityState(hermitian_part(c), tol=max(state_tol, 1e-9)) for c in chosen]
    return InvariantStates(states, canon_state, canon_state.faithful())


def default_state(channel):
    return invariant_states(channel).canonical


def support_projection(state, rank_tol=None):
    w, u = np.linalg.eigh(state.rho)
    cut = rank_tol if rank_tol is not None else 1e-9 * w[-1]
    cols = u[:, w > cut]
    return ProjectionMatrix(cols @ dagger(cols), cols)


def reduce_channel(channel, proj, tol=1e-9):
    """Channel compressed to the range of a subharmonic projection ``p``."""
    p = proj.p
    gap = hermitian_part(apply(channel, p) - p)
    low = float(np.linalg.eigvalsh(gap)[0])
    if low < -tol:
        raise NotSubharmonic("tau(p) - p is not positive", min_eigenvalue=low)
    q = np.eye(channel.dim) - p
    leak = max(float(np.linalg.norm(q @ dagger(l) @ p)) for l in channel.kraus)
    if leak > np.sqrt(tol):
        raise NotSubharmonic("Kraus operators do not leave the corner invariant", leak=leak)
    u = proj.basis
    kraus = np.array([dagger(u) @ l @ u for l in channel.kraus])
    return KrausChannel(kraus, tol=max(channel.tol, 1e-9))


def corner(channel, state=None, tol=1e-9):
    """Faithful corner of (channel, state); the identity corner when state is faithful."""
    if state is None:
        state = default_state(channel)
    resid = float(np.linalg.norm(predual_apply(channel, state.rho) - state.rho))
    if resid > tol:
        raise StateNotInvariant("state is not invariant under the predual", residual=resid)
    if state.faithful():
        return Corner(channel, state, np.eye(channel.dim, dtype=complex), False)
    proj = support_projection(state)
    sub = reduce_channel(channel, proj, tol)
    u = proj.basis
    rho = hermitian_part(dagger(u) @ state.rho @ u)
    return Corner(sub, DensityState(rho / np.trace(rho).real, tol=max(state.tol, 1e-9)), u, True)


def _check_faithful_invariant(channel, state, tol):
    if not state.faithful():
        raise StateNotFaithful("state has a kernel", min_eigenvalue=float(state.eigenvalues[0]))
    resid = float(np.linalg.norm(predual_apply(channel, state.rho) - state.rho))
    if resid > tol:
        raise StateNotInvariant("state is not invariant under the predual", residual=resid)


def _algebra(n, vectors, check=True, tol=1e-8, what="subspace"):
    sub = SubalgebraBasis(n, vectors)
    if check and sub.size:
        adj, prod = sub.closure_defects()
        if adj > tol or prod > tol or not sub.contains_identity(tol):
            raise NumericalError(f"{what} is not a unital *-algebra", adjoint_defect=adj, product_defect=prod)
    return sub


def fixed_point_algebra(channel, state, tol=1e-9):
    """{x : tau(x) = x}, a *-algebra when a faithful invariant state exists."""
    _check_faithful_invariant(channel, state, tol)
    ker = _fixed_kernel(channel.superop, tol)
    return _algebra(channel.dim, ker, what="fixed-point space")


def g_tower(channel, state, tol=1e-9, max_steps=None):
    """Dimensions of ker(adj^m tau^m - 1) for m = 1, 2, ... until they stabilize.

    Returns (basis of the limit, list of dimensions).
    """
    _check_faithful_invariant(channel, state, tol)
    pair = ModularPair(channel, state)
    adj = kms_adjoint(pair, inv_tol=tol)
    t = channel.superop
    ta = adj.superop
    nn = t.shape[0]
    max_steps = max_steps or nn + 1
    tm = np.eye(nn, dtype=complex)
    tam = np.eye(nn, dtype=complex)
    dims = []
    basis = None
    for _ in range(max_steps):
        tm = t @ tm
        tam = ta @ tam
        basis = nullspace(tam @ tm - np.eye(nn), tol)
        dims.append(basis.shape[1])
        if len(dims) >= 2 and dims[-1] == dims[-2]:
            break
    return basis, dims


def multiplicative_modular_core(channel, state, steps, tol=1e-9):
    """Intersection over m <= steps of MD(tau^m) and the modular commutant of tau^m.

    MD is the two-sided multiplicative domain, written linearly through Kraus
    operators of tau^m; the modular condition asks that tau^m maps every
    spectral subspace of Delta into itself.
    """
    pair = ModularPair(channel, state)
    _, projs = pair.modular_projectors()
    n = channel.dim
    nn = n * n
    eye_n = np.eye(n)
    t = channel.superop
    tm = np.eye(nn, dtype=complex)
    q = np.eye(nn, dtype=complex)
    for _ in range(steps):
        tm = t @ tm
        ks = kraus_from_superop(tm, n)
        rows = []
        for l in ks:
            ls = dagger(l)
            # x l^* = l^* tau(x)  and  l x = tau(x) l
            rows.append(np.kron(np.conj(l), eye_n) - np.kron(eye_n, ls) @ tm)
            rows.append(np.kron(eye_n, l) - np.kron(l.T, eye_n) @ tm)
        eye_nn = np.eye(nn)
        for p in projs:
            rows.append((eye_nn - p) @ tm @ p)
        ker = nullspace(np.vstack(rows), tol)
        q = intersect(q, ker, tol)
    return q


def compute_G(channel, state, tol=1e-9, max_steps=None, cross_check=True):
    """Largest subalgebra on which tau acts isometrically for the KMS norm at every power.

    Computed as the stable member of the decreasing tower ker(adj^m tau^m - 1)
    and, when ``cross_check`` is set, compared with the intersection of the
    multiplicative domains and modular commutants of the powers tau^m.
    """
    basis, dims = g_tower(channel, state, tol, max_steps)
    if cross_check:
        other = multiplicative_modular_core(channel, state, len(dims), tol)
        d = distance(basis, other) if basis.shape[1] == other.shape[1] else float("inf")
        if d > 1e-7:
            raise NumericalError("two characterizations of the isometric core disagree",
                                 tower_dim=basis.shape[1], core_dim=other.shape[1], distance=d)
    return _algebra(channel.dim, basis, what="isometric core")


def compute_G0(channel, state, tol=1e-9, G=None):
    """Largest subalgebra of G that tau maps onto itself; tau restricts to an automorphism there."""
    if G is None:
        G = compute_G(channel, state, tol)
    t = channel.superop
    cur = G.vectors
    while True:
        img = orth(t @ cur, tol)
        nxt = intersect(img, G.vectors, tol)
        if nxt.shape[1] == cur.shape[1]:
            cur = nxt
            break
        cur = nxt
    sub = _algebra(channel.dim, cur, what="automorphic core")
    img = orth(t @ sub.vectors, tol)
    if img.shape[1] != sub.size or distance(img, sub.vectors) > 1e-7:
        raise NumericalError("channel does not map the automorphic core onto itself")
    mats = sub.matrices
    worst = 0.0
    for a in mats:
        ta = apply(channel, a)
        for b in mats:
            worst = max(worst, float(np.linalg.norm(apply(channel, a @ b) - ta @ apply(channel, b))))
    if worst > 1e-7:
        raise NumericalError("channel is not multiplicative on the automorphic core", defect=worst)
    return sub


def conditional_expectation(sub, state, tol=1e-9, check=True):
    """State-preserving conditional expectation onto a modular-invariant subalgebra.

    Orthogonal projection for the inner product <x, y> = tr(rho x^* y).
    """
    n = sub.dim
    rho = state.rho
    if not state.faithful():
        raise StateNotFaithful("conditional expectation needs a faithful state")
    w, u = np.linalg.eigh(rho)
    rho_inv = (u / w) @ dagger(u)
    b = sub.vectors
    delta = np.kron(rho_inv.T, rho)
    for op in (delta, np.kron(rho.T, rho_inv)):
        img = op @ b
        resid = img - b @ (dagger(b) @ img)
        scale = max(1.0, float(np.linalg.norm(img, 2)))
        if np.linalg.norm(resid, 2) > tol * scale * 10:
            raise NotModularInvariant("subalgebra is not invariant under the modular group",
                                      defect=float(np.linalg.norm(resid, 2)))
    wmat = np.kron(rho.T, np.eye(n))
    gram = dagger(b) @ wmat @ b
    e = b @ np.linalg.solve(gram, dagger(b) @ wmat)
    if check:
        _check_expectation(e, rho, n)
    from .channel import Superoperator

    return Superoperator(n, e)


def _check_expectation(e, rho, n, tol=1e-8):
    one = vec(np.eye(n, dtype=complex))
    if np.linalg.norm(e @ e - e, 2) > tol * max(1.0, np.linalg.norm(e, 2)):
        raise NumericalError("conditional expectation is not idempotent")
    if np.linalg.norm(e @ one - one) > tol:
        raise NumericalError("conditional expectation is not unital")
    phi = vec(rho.T)
    if np.linalg.norm(phi @ e - phi) > tol:
        raise NumericalError("conditional expectation does not preserve the state")
    # positivity on rank-one projectors of a fixed family
    vecs = list(np.eye(n))
    for i in range(n):
        for j in range(i + 1, n):
            for ph in (1, -1, 1j, -1j):
                v = np.zeros(n, complex)
                v[i], v[j] = 1, ph
                vecs.append(v / np.sqrt(2))
    for v in vecs:
        y = unvec(e @ vec(np.outer(v, np.conj(v))), n)
        if np.linalg.eigvalsh(hermitian_part(y))[0] < -tol:
            raise NumericalError("conditional expectation is not positive")
