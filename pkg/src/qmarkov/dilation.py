"""Truncated weak Markov dilation of a channel.

The space is ``H_N = C^n kron (C^d)^{kron N}`` with the base factor first.
The isometry ``V h = sum_k (l_k^* h) kron e_k`` inserts one noise factor
directly after the base; ``V_k`` applies it k times, so that
``V_{a+b} = (V_a kron 1) V_b``.  Level m of the filtration is embedded by
``V_{N-m} kron 1_{d^m}`` and carries

* the projection ``F_m = V_{N-m} V_{N-m}^* kron 1``,
* the embedding ``j_m(x) = V_{N-m} x V_{N-m}^* kron 1``,
* the shift ``alpha(X) = (iota^* X iota) kron 1_d`` with ``iota = V kron 1``.

The vacuum is the density matrix ``omega = V_N rho V_N^*``.
"""

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .channel import KrausChannel, DensityState, apply, dagger, matrix_units
from .classify import two_point_series
from .errors import BudgetExceeded, NumericalError, StateNotInvariant


@dataclass(frozen=True)
class DilationSpace:
    channel: KrausChannel
    state: DensityState
    horizon: int

    @property
    def n(self):
        return self.channel.dim

    @property
    def d(self):
        return self.channel.n_kraus

    @property
    def total_dim(self):
        return self.n * self.d ** self.horizon

    @cached_property
    def base_isometry(self):
        n, d = self.n, self.d
        v = np.zeros((n * d, n), dtype=complex)
        for k, l in enumerate(self.channel.kraus):
            # row index of e_b kron e_k is b*d + k
            v[k::d, :] = dagger(l)
        return v

    @cached_property
    def isometries(self):
        """[V_0, V_1, ..., V_N] with V_k : C^n -> C^n kron (C^d)^k."""
        out = [np.eye(self.n, dtype=complex)]
        v = self.base_isometry
        for k in range(1, self.horizon + 1):
            out.append(np.kron(out[-1], np.eye(self.d)) @ v)
        return out

    def fiber(self, m):
        return np.kron(self.isometries[self.horizon - m], np.eye(self.d ** m))

    def F(self, m):
        """Filtration projection of level m (0 <= m <= N)."""
        f = self.fiber(m)
        return f @ dagger(f)

    @property
    def P(self):
        return self.F(0)

    def j(self, m, x):
        v = self.isometries[self.horizon - m]
        return np.kron(v @ x @ dagger(v), np.eye(self.d ** m))

    @cached_property
    def vacuum(self):
        v = self.isometries[self.horizon]
        return v @ self.state.rho @ dagger(v)

    def omega(self, x):
        return complex(np.trace(self.vacuum @ x))

    @cached_property
    def _iota(self):
        return np.kron(self.base_isometry, np.eye(self.d ** (self.horizon - 1)))

    def shift(self, x, steps=1, tol=1e-9):
        """alpha^steps(X) for X localized in the range of iota^steps."""
        for _ in range(steps):
            iota = self._iota
            inner = dagger(iota) @ x @ iota
            if np.linalg.norm(iota @ inner @ dagger(iota) - x) > tol * max(1.0, np.linalg.norm(x)):
                raise ValueError("operator is not localized at a level the shift can act on")
            x = np.kron(inner, np.eye(self.d))
        return x


def build_dilation(channel, state, horizon, budget=4096, tol=1e-9):
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    total = channel.dim * channel.n_kraus ** horizon
    if total > budget:
        raise BudgetExceeded("dilation space exceeds the dimension budget", dimension=total, budget=budget)
    resid = float(np.linalg.norm(
        sum(dagger(l) @ state.rho @ l for l in channel.kraus) - state.rho))
    if resid > tol:
        raise StateNotInvariant("state is not invariant under the predual", residual=resid)
    return DilationSpace(channel, state, horizon)


def _power(channel, x, m):
    for _ in range(m):
        x = apply(channel, x)
    return x


def verify_markov_property(space):
    """max ||F_s j_t(x) F_s - j_s(tau^{t-s}(x))|| over s <= t <= N and matrix units x."""
    worst = 0.0
    units = matrix_units(space.n)
    N = space.horizon
    for s in range(N + 1):
        fs = space.F(s)
        for t in range(s, N + 1):
            for x in units:
                lhs = fs @ space.j(t, x) @ fs
                rhs = space.j(s, _power(space.channel, x, t - s))
                worst = max(worst, float(np.abs(lhs - rhs).max()))
    return worst


def _words(letters, max_len, ordered=False):
    """Words of length 1..max_len over (time, unit index) letters, lexicographic.

    Ordered words have non-increasing times from left to right, i.e. the
    latest time acts last.
    """
    for r in range(1, max_len + 1):
        for w in itertools.product(letters, repeat=r):
            if ordered and any(w[i][0] < w[i + 1][0] for i in range(r - 1)):
                continue
            yield w


def _word_count(letters, max_len):
    return sum(letters ** r for r in range(1, max_len + 1))


def check_word_budget(space, max_len=3, word_budget=200000):
    """Raise BudgetExceeded when the word-based checks would enumerate too many words."""
    n2 = space.n ** 2
    N = space.horizon
    count = sum(_word_count((N - m + 1) * n2, max_len) for m in range(1, N + 1))
    count += 2 * _word_count((N + 1) * n2, max_len)
    count += _word_count(N * n2, 2) ** 2
    if count > word_budget:
        raise BudgetExceeded("word enumeration exceeds budget", words=count, budget=word_budget)
    return count


def verify_compression(space, max_len=3):
    """max ||P alpha_m(X) P - j_0(tau^m(V_N^* X V_N))|| over words X = j_{s1}(x1)...j_{sr}(xr).

    Times run over 0..N-m, x over matrix units, for every m in 1..N.
    """
    units = matrix_units(space.n)
    N = space.horizon
    P = space.P
    vn = space.isometries[N]
    worst = 0.0
    for m in range(1, N + 1):
        letters = [(s, a) for s in range(N - m + 1) for a in range(len(units))]
        cache = {(s, a): space.j(s, units[a]) for s, a in letters}
        for word in _words(letters, max_len):
            x = cache[word[0]]
            for letter in word[1:]:
                x = x @ cache[letter]
            lhs = P @ space.shift(x, m) @ P
            rhs = space.j(0, _power(space.channel, dagger(vn) @ x @ vn, m))
            worst = max(worst, float(np.abs(lhs - rhs).max()))
    return worst


def verify_shift_covariance(space):
    """max over s < N and units of ||alpha(j_s(x)) - j_{s+1}(x)|| and ||alpha^m(P) - F_m||."""
    worst = 0.0
    for s in range(space.horizon):
        for x in matrix_units(space.n):
            worst = max(worst, float(np.abs(space.shift(space.j(s, x)) - space.j(s + 1, x)).max()))
    for m in range(1, space.horizon + 1):
        worst = max(worst, float(np.abs(space.shift(space.P, m) - space.F(m)).max()))
    return worst


def verify_multiplicativity(space, max_len=2):
    """max ||alpha(XY) - alpha(X) alpha(Y)|| over words at times below N."""
    units = matrix_units(space.n)
    N = space.horizon
    letters = [(s, a) for s in range(N) for a in range(len(units))]
    cache = {(s, a): space.j(s, units[a]) for s, a in letters}
    words = []
    for w in _words(letters, max_len):
        x = cache[w[0]]
        for letter in w[1:]:
            x = x @ cache[letter]
        words.append(x)
    shifted = [space.shift(x) for x in words]
    worst = 0.0
    for i, x in enumerate(words):
        for k, y in enumerate(words):
            worst = max(worst, float(np.abs(space.shift(x @ y) - shifted[i] @ shifted[k]).max()))
    return worst


def verify_filtration(space, tol=1e-10):
    """F_0 <= F_1 <= ... <= F_N = 1 and each F_m is a projection."""
    worst = 0.0
    prev = None
    for m in range(space.horizon + 1):
        f = space.F(m)
        worst = max(worst, float(np.abs(f @ f - f).max()))
        if prev is not None:
            worst = max(worst, float(np.abs(f @ prev - prev).max()))
        prev = f
    worst = max(worst, float(np.abs(prev - np.eye(space.total_dim)).max()))
    return worst


@dataclass(frozen=True)
class CyclicReport:
    ordered_dim: int
    all_dim: int
    total_dim: int

    @property
    def minimal(self):
        return self.ordered_dim == self.all_dim


def cyclic_dimensions(space, max_len=3, tol=1e-9):
    """Ranks of the spaces generated from the vacuum support by time-ordered and by arbitrary words."""
    units = matrix_units(space.n)
    N = space.horizon
    w, u = np.linalg.eigh(space.state.rho)
    base = space.isometries[N] @ u[:, w > 1e-9 * w[-1]]
    letters = [(s, a) for s in range(N + 1) for a in range(len(units))]
    cache = {(s, a): space.j(s, units[a]) for s, a in letters}

    def rank(ordered):
        cols = [base]
        for word in _words(letters, max_len, ordered):
            x = cache[word[0]]
            for letter in word[1:]:
                x = x @ cache[letter]
            cols.append(x @ base)
        m = np.hstack(cols)
        s = np.linalg.svd(m, compute_uv=False)
        return int(np.sum(s > tol * max(1.0, s[0])))

    return CyclicReport(rank(True), rank(False), space.total_dim)


def dilation_two_point_series(space):
    """K(m) for m = 0..N through the dilation:

    max over unit pairs of |omega(j_m(x) F_0 j_m(y)) - omega(j_m x) omega(j_m y)|.
    """
    units = matrix_units(space.n)
    P = space.P
    out = []
    for m in range(space.horizon + 1):
        js = [space.j(m, x) for x in units]
        w = [space.omega(x) for x in js]
        left = [space.vacuum @ x @ P for x in js]
        best = 0.0
        for a, la in enumerate(left):
            for b, jb in enumerate(js):
                best = max(best, abs(np.trace(la @ jb) - w[a] * w[b]))
        out.append(best)
    return np.array(out)


@dataclass(frozen=True)
class DilationSeries:
    dilation: np.ndarray
    direct: np.ndarray
    max_difference: float


def kolmogorov_series_via_dilation(channel, state, horizon, budget=4096, tol=1e-9):
    """Two-point series computed inside the dilation and directly, asserted equal."""
    space = build_dilation(channel, state, horizon, budget)
    dil = dilation_two_point_series(space)
    direct = np.concatenate([[_k0(state)], two_point_series(channel, state, horizon)])
    diff = float(np.abs(dil - direct).max())
    if diff > tol:
        raise NumericalError("dilation and direct two-point series differ", difference=diff)
    return DilationSeries(dil, direct, diff)


def _k0(state):
    rho = state.rho
    n = rho.shape[0]
    f = rho.reshape(n * n)
    best = 0.0
    for a, e in enumerate(matrix_units(n)):
        le = rho @ e
        for b, e2 in enumerate(matrix_units(n)):
            best = max(best, abs(np.trace(le @ e2) - f[a] * f[b]))
    return best


@dataclass(frozen=True)
class DilationReport:
    total_dim: int
    markov_defect: float
    compression_defect: float
    shift_defect: float
    multiplicativity_defect: float
    filtration_defect: float
    cyclic: CyclicReport
    series: DilationSeries

    def passed(self, tol=1e-9):
        return max(self.markov_defect, self.compression_defect, self.shift_defect,
                   self.multiplicativity_defect, self.filtration_defect,
                   self.series.max_difference) <= tol and self.cyclic.minimal


def dilate(channel, state, horizon, budget=4096, max_len=3, word_budget=200000):
    """Build the dilation and run every structural check."""
    space = build_dilation(channel, state, horizon, budget)
    check_word_budget(space, max_len, word_budget)
    return DilationReport(
        space.total_dim,
        verify_markov_property(space),
        verify_compression(space, max_len),
        verify_shift_covariance(space),
        verify_multiplicativity(space),
        verify_filtration(space),
        cyclic_dimensions(space, max_len),
        kolmogorov_series_via_dilation(channel, state, horizon, budget),
    )
