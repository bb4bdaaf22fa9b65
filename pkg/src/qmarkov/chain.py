"""Translation-invariant finitely correlated states on a half chain of d-level sites.

A tuple ``(l_1, ..., l_d)`` in M_n with ``sum_k l_k l_k^* = 1`` and an
invariant state rho defines the state

    omega(|i_1 ... i_m><j_1 ... j_m|) = tr(rho l_I l_J^*),   l_I = l_{i_1} ... l_{i_m}.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels
from .channel import DensityState, KrausChannel, dagger, hermitian_part, spectrum, vec
from .classify import kolmogorov_two_point, strong_ergodicity
from .errors import BudgetExceeded, DimensionMismatch, NumericalError, StateNotFaithful, StateNotInvariant
from .invariant import corner


@dataclass(frozen=True)
class PopescuTuple:
    """Unital tuple with a faithful invariant state."""

    channel: KrausChannel
    state: DensityState
    inv_tol: float = 1e-9

    def __post_init__(self):
        if self.channel.dim != self.state.dim:
            raise DimensionMismatch("tuple and state dimensions differ")
        if not self.state.faithful():
            raise StateNotFaithful("state has a kernel; use support_reduce")
        rho = self.state.rho
        resid = float(np.linalg.norm(sum(dagger(l) @ rho @ l for l in self.kraus) - rho))
        if resid > self.inv_tol:
            raise StateNotInvariant("state is not invariant under the tuple", residual=resid)

    @classmethod
    def from_arrays(cls, kraus, rho, tol=1e-10):
        return cls(KrausChannel(kraus, tol=tol), DensityState(rho, tol=tol))

    @property
    def kraus(self):
        return self.channel.kraus

    @property
    def site_dim(self):
        return self.channel.n_kraus

    @property
    def corner_dim(self):
        return self.channel.dim


def support_reduce(kraus, rho, tol=1e-9):
    """Compress a unital tuple to the support of an invariant, possibly singular, state."""
    ch = kraus if isinstance(kraus, KrausChannel) else KrausChannel(kraus)
    st = rho if isinstance(rho, DensityState) else DensityState(rho)
    c = corner(ch, st, tol)
    return PopescuTuple(c.channel, c.state)


def _words(tup, m):
    return _kernels.word_products(tup.kraus, m)


def marginal_gram(tup, m):
    """M[I, J] = tr(rho l_I l_J^*) as a Gram matrix of rho^{1/2} l_I."""
    w, u = np.linalg.eigh(tup.state.rho)
    half = (u * np.sqrt(np.clip(w, 0, None))) @ dagger(u)
    words = _words(tup, m)
    rows = np.matmul(half, words).reshape(len(words), -1)
    return rows @ dagger(rows)


def _partial_traces(dm, d, m):
    k = d ** (m - 1)
    last = np.einsum("aibi->ab", dm.reshape(k, d, k, d))
    first = np.einsum("iaib->ab", dm.reshape(d, k, d, k))
    return first, last


@dataclass(frozen=True)
class MarginalChecks:
    min_eigenvalue: float
    trace_defect: float
    left_defect: float
    right_defect: float


def marginal_checks(tup, m, dm=None):
    if dm is None:
        dm = marginal_gram(tup, m).T
    ev = np.linalg.eigvalsh(hermitian_part(dm))
    tr = abs(np.trace(dm) - 1.0)
    if m == 1:
        return MarginalChecks(float(ev[0]), float(tr), 0.0, 0.0)
    prev = marginal_gram(tup, m - 1).T
    first, last = _partial_traces(dm, tup.site_dim, m)
    return MarginalChecks(float(ev[0]), float(tr), float(np.abs(first - prev).max()),
                          float(np.abs(last - prev).max()))


def chain_marginal(tup, m, budget=1024, tol=1e-10):
    """Density matrix of the restriction of omega to m consecutive sites.

    Checks positivity, unit trace, and that tracing out the first or the last
    site reproduces the (m-1)-site marginal.
    """
    if m < 1:
        raise ValueError("need at least one site")
    size = tup.site_dim ** m
    if size > budget:
        raise BudgetExceeded("marginal dimension exceeds budget", dimension=size, budget=budget)
    dm = marginal_gram(tup, m).T
    chk = marginal_checks(tup, m, dm)
    if chk.min_eigenvalue < -tol or chk.trace_defect > tol or max(chk.left_defect, chk.right_defect) > tol:
        raise NumericalError("marginal failed its consistency checks", **chk.__dict__)
    return DensityState(hermitian_part(dm), tol=max(tol, 1e-10))


def _window_superop(tup, x):
    """Matrix of z -> sum_{IJ} x_IJ l_I z l_J^* for x on a window of a sites."""
    x = np.asarray(x, dtype=complex)
    d = tup.site_dim
    a = int(round(np.log(x.shape[0]) / np.log(d))) if d > 1 else 1
    if x.ndim != 2 or x.shape[0] != x.shape[1] or d ** a != x.shape[0]:
        raise DimensionMismatch("observable size is not a power of the site dimension")
    words = _words(tup, a)
    nn = tup.corner_dim ** 2
    out = np.zeros((nn, nn), dtype=complex)
    for i, li in enumerate(words):
        for j, lj in enumerate(words):
            if x[i, j] != 0:
                out += x[i, j] * np.kron(np.conj(lj), li)
    return out, a


def expectation(tup, x):
    sup, _ = _window_superop(tup, x)
    n = tup.corner_dim
    return complex(vec(tup.state.rho.T) @ sup @ vec(np.eye(n)))


@dataclass(frozen=True)
class DecaySeries:
    separation: np.ndarray
    values: np.ndarray
    rate: float
    fit_residual: float
    second_modulus: float


def correlation_decay(tup, x, y, n_max):
    """|omega(x lambda_k(y)) - omega(x) omega(y)| for ``n_max`` separations.

    Separation k places the window of y k sites after the start of the window
    of x; k runs from the width a of x to a + n_max - 1, so one-site
    observables give k = 1..n_max.  The rate is fitted log-linearly on the last half
    of the series above the round-off floor.
    """
    xs, a = _window_superop(tup, x)
    ys, _ = _window_superop(tup, y)
    n = tup.corner_dim
    t = tup.channel.superop
    row = vec(tup.state.rho.T) @ xs
    v = ys @ vec(np.eye(n))
    ex = complex(row @ vec(np.eye(n)))
    ey = complex(vec(tup.state.rho.T) @ v)
    seps = np.arange(a, a + n_max)
    vals = np.empty(n_max)
    for k in range(n_max):
        vals[k] = abs(row @ v - ex * ey)
        v = t @ v
    rate, resid = _fit_rate(seps, vals)
    sp = spectrum(tup.channel)
    return DecaySeries(seps, vals, rate, resid, sp.second_modulus())


def _fit_rate(ks, vals):
    floor = 1e-13 * max(1e-300, float(vals.max()))
    half = len(vals) // 2
    sel = np.arange(half, len(vals))
    sel = sel[vals[sel] > floor]
    if len(sel) < 2:
        return 0.0, 0.0
    coef, res, *_ = np.polyfit(ks[sel], np.log(vals[sel]), 1, full=True)
    resid = float(np.sqrt(res[0] / len(sel))) if len(res) else 0.0
    return float(np.exp(coef[0])), resid


def one_site_cluster_series(tup, nmax):
    """sup over one-site matrix units x, y of |omega(x lambda_k y) - omega(x) omega(y)|, k = 1..nmax."""
    ks = tup.kraus
    rho = tup.state.rho
    d = len(ks)
    rmats = np.array([dagger(ks[j]) @ rho @ ks[i] for i in range(d) for j in range(d)])
    ymats = np.array([ks[k] @ dagger(ks[l]) for k in range(d) for l in range(d)])
    f = np.array([np.trace(rho @ ks[i] @ dagger(ks[j])) for i in range(d) for j in range(d)])
    return _kernels.cluster_series(rmats, ymats, tup.channel.superop, f, f, nmax)


@dataclass(frozen=True)
class FactorReport:
    verdict: bool
    strong_ergodic: bool
    cluster_decays: bool
    cluster_series: np.ndarray
    agree: bool


def factor_test(tup, horizon=200, tol=1e-7):
    """Factor property of omega, decided by strong ergodicity of the tuple.

    Cross-checked against decay of one-site correlations.
    """
    se = strong_ergodicity(tup.channel, tup.state, horizon, tol, strict=True)
    cl = one_site_cluster_series(tup, horizon)
    decays = bool(np.any(cl < tol))
    return FactorReport(se.verdict, se.verdict, decays, cl, decays == se.verdict)


@dataclass(frozen=True)
class PurityReport:
    criterion_met: bool
    adjoint_strong_ergodic: bool
    agree: bool
    series: np.ndarray

    @property
    def label(self):
        if self.criterion_met:
            return "criterion met (sufficient for purity)"
        return "criterion not met (no conclusion)"


def purity_test(tup, horizon=200, tol=1e-7):
    """Two-point Kolmogorov criterion, which implies that omega is pure.

    A negative answer carries no conclusion about purity.
    """
    res = kolmogorov_two_point(tup.channel, tup.state, horizon, tol, strict=True)
    return PurityReport(res.verdict, res.adjoint_strong_ergodic, res.duality_agrees, res.series)


@dataclass(frozen=True)
class PeripheralGroup:
    values: list
    order: int
    closure_defect: float

    @property
    def is_cyclic(self):
        return self.closure_defect <= 1e-6


def gauge_peripheral_group(tup, peripheral_tol=1e-8):
    """Peripheral eigenvalues of the tuple's channel; a finite cyclic group of roots of unity."""
    sp = spectrum(tup.channel, peripheral_tol)
    vals = sp.peripheral_values()
    k = len(vals)
    worst = 0.0
    for a in vals:
        worst = max(worst, min(abs(a.conjugate() - b) for b in vals))
        for b in vals:
            worst = max(worst, min(abs(a * b - c) for c in vals))
    roots = np.exp(2j * np.pi * np.arange(k) / k)
    worst = max(worst, max(min(abs(v - r) for r in roots) for v in vals))
    return PeripheralGroup(vals, k, float(worst))
