"""Ergodic, mixing, strong-ergodic and Kolmogorov classification of channels."""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .channel import DensityState, KrausChannel, apply, dagger, matrix_units, spectrum, vec
from .errors import HorizonTooShort, NumericalError, StateNotFaithful
from .invariant import compute_G0, corner, default_state, fixed_point_algebra, _fixed_kernel
from .kms import ModularPair, kms_adjoint


@dataclass(frozen=True)
class ErgodicityResult:
    verdict: bool
    fixed_dim: int
    reduced: bool
    corner_dim: int
    support_limit_defect: float


@dataclass(frozen=True)
class MixingResult:
    verdict: bool
    peripheral: list
    multiplicity_of_one: int
    direct_steps: int
    direct_residual: float
    direct_agrees: bool
    reduced: bool


@dataclass(frozen=True)
class MixingCriterionReport:
    mixing: bool
    ergodic: bool
    peripheral_trivial: bool
    automorphic_core_dim: int
    agree: bool

    @property
    def rhs(self):
        return self.ergodic and self.peripheral_trivial


@dataclass(frozen=True)
class DecayResult:
    verdict: bool
    iterative: bool
    spectral: bool
    series: np.ndarray
    hit_step: int
    horizon: int
    tol: float
    warning: str = ""

    @property
    def consistent(self):
        return self.iterative == self.spectral


@dataclass(frozen=True)
class KolmogorovResult(DecayResult):
    adjoint_strong_ergodic: bool = False
    duality_agrees: bool = True
    corner_dim: int = 0


@dataclass(frozen=True)
class EndomorphismResult:
    verdict: bool
    defect: float


def _state(channel, state):
    return default_state(channel) if state is None else state


def _limit_superop(channel, tol=1e-9):
    """Spectral projector onto the fixed points of tau (the Cesaro limit of tau^m)."""
    right = _fixed_kernel(channel.superop, tol)
    left = _fixed_kernel(channel.predual_superop, tol)
    return right @ np.linalg.solve(dagger(left) @ right, dagger(left))


def is_ergodic(channel, state=None, tol=1e-9):
    """Trivial fixed-point algebra of the faithful corner.

    When the state is not faithful, also reports how far lim tau^m(p) is from
    the identity for the support projection p.
    """
    state = _state(channel, state)
    c = corner(channel, state, tol)
    alg = fixed_point_algebra(c.channel, c.state, tol)
    defect = 0.0
    if c.reduced:
        p = c.embedding @ dagger(c.embedding)
        lim = _limit_superop(channel, tol) @ vec(p)
        defect = float(np.linalg.norm(lim - vec(np.eye(channel.dim))))
    return ErgodicityResult(alg.size == 1, alg.size, c.reduced, c.channel.dim, defect)


def is_mixing(channel, state=None, peripheral_tol=1e-8, resid_tol=1e-9, tol=1e-9):
    """tau^m(x) -> phi(x) 1 on the faithful corner, decided from the peripheral spectrum.

    Confirmed by computing tau^N directly with N chosen from the second
    eigenvalue modulus so that the predicted residual is below 1e-12.
    """
    state = _state(channel, state)
    c = corner(channel, state, tol)
    ch, rho = c.channel, c.state.rho
    sp = spectrum(ch, peripheral_tol, resid_tol)
    periph = sp.peripheral_values()
    verdict = (len(periph) == 1 and abs(periph[0] - 1) <= 1e-6 and sp.multiplicity_of_one() == 1)
    r2 = sp.second_modulus() if verdict else sp.subperipheral_modulus()
    if r2 <= 1e-12:
        steps = 1
    else:
        steps = int(min(100000, max(1, math.ceil(math.log(1e-12) / math.log(r2)) + 5)))
    n = ch.dim
    tn = np.linalg.matrix_power(ch.superop, steps)
    limit = np.outer(vec(np.eye(n)), vec(rho.T))
    resid = float(np.abs(tn - limit).max())
    direct = resid < 1e-6
    return MixingResult(verdict, periph, sp.multiplicity_of_one(), steps, resid, direct == verdict, c.reduced)


def check_mixing_criterion(channel, state, tol=1e-9):
    """Mixing holds iff the channel is ergodic with trivial peripheral point spectrum.

    Also confirms that the automorphic core is trivial exactly when mixing.
    Any disagreement raises NumericalError.
    """
    if not state.faithful():
        raise StateNotFaithful("the mixing criterion is stated for faithful states")
    mix = is_mixing(channel, state)
    erg = is_ergodic(channel, state, tol)
    periph = mix.peripheral
    trivial = len(periph) == 1 and abs(periph[0] - 1) <= 1e-6
    g0 = compute_G0(channel, state, tol)
    agree = (mix.verdict == (erg.verdict and trivial) == (g0.size == 1)) and mix.direct_agrees
    report = MixingCriterionReport(mix.verdict, erg.verdict, trivial, g0.size, agree)
    if not agree:
        raise NumericalError("mixing criterion disagreement", **{
            "mixing": mix.verdict, "ergodic": erg.verdict, "peripheral_trivial": trivial,
            "automorphic_core_dim": g0.size, "direct_agrees": mix.direct_agrees})
    return report


def pure_state_grid(n):
    """Basis states, their real and imaginary superpositions, and the maximally mixed state.

    The pure states span all Hermitian matrices.
    """
    vecs = []
    eye = np.eye(n, dtype=complex)
    for i in range(n):
        vecs.append(eye[i])
    for i in range(n):
        for j in range(i + 1, n):
            for ph in (1, -1, 1j, -1j):
                vecs.append((eye[i] + ph * eye[j]) / np.sqrt(2))
    states = [np.outer(v, np.conj(v)) for v in vecs]
    states.append(np.eye(n, dtype=complex) / n)
    return np.array(states)


def _unique_fixed_state(channel, peripheral_tol, resid_tol):
    sp = spectrum(channel, peripheral_tol, resid_tol)
    periph = sp.peripheral_eigenvalues
    return len(periph) == 1 and abs(periph[0] - 1) <= peripheral_tol


def _decide(series, tol, spectral, horizon, strict, what, extra=None):
    hits = np.nonzero(series < tol)[0]
    iterative = hits.size > 0
    hit = int(hits[0]) + 1 if iterative else -1
    msg = ""
    if spectral and not iterative:
        msg = f"{what}: spectrum predicts convergence but the series is above {tol:g} at step {horizon}"
    elif iterative and not spectral:
        raise NumericalError(f"{what}: series converged but the spectrum has extra peripheral eigenvalues",
                             hit_step=hit)
    return iterative, hit, msg


def strong_ergodicity(channel, state=None, horizon=200, tol=1e-7, strict=True,
                      peripheral_tol=1e-8, resid_tol=1e-9):
    """sup over states of ||tau_*^m psi - rho||_1 reaches ``tol`` within ``horizon`` steps.

    The supremum is taken over a fixed grid of pure states spanning the
    Hermitian matrices.  The spectral certificate asks for a simple eigenvalue
    1 and no other eigenvalue on the unit circle.
    """
    state = _state(channel, state)
    series = _kernels.trace_norm_series(channel.predual_superop, pure_state_grid(channel.dim),
                                        state.rho, horizon)
    spectral = _unique_fixed_state(channel, peripheral_tol, resid_tol)
    iterative, hit, msg = _decide(series, tol, spectral, horizon, strict, "strong ergodicity")
    res = DecayResult(iterative and spectral, iterative, spectral, series, hit, horizon, tol, msg)
    if msg:
        if strict:
            raise HorizonTooShort(msg, result=res, horizon=horizon)
        warnings.warn(msg, RuntimeWarning)
    return res


def two_point_series(channel, state, horizon=200):
    """K(m) over all pairs of matrix units, m = 1..horizon."""
    return _kernels.two_point_series(channel.superop, state.rho, horizon)


def two_point_value(channel, state, x, y, m):
    """phi(tau^m(x) tau^m(y)) - phi(x) phi(y) for a single pair."""
    tx, ty = np.asarray(x, complex), np.asarray(y, complex)
    for _ in range(m):
        tx, ty = apply(channel, tx), apply(channel, ty)
    rho = state.rho
    return complex(np.trace(rho @ tx @ ty) - np.trace(rho @ x) * np.trace(rho @ y))


def _dual_strong_ergodicity(adj, st, horizon, tol, peripheral_tol, resid_tol, max_horizon=100000):
    """Strong ergodicity of the adjoint, with the horizon stretched from its spectral gap.

    The trace-norm series decays roughly like r^m while K(m) decays like r^{2m},
    so the same horizon can be conclusive for one and not the other.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        dual = strong_ergodicity(adj, st, horizon, tol, strict=False, peripheral_tol=peripheral_tol,
                                 resid_tol=resid_tol)
        if not dual.warning:
            return dual
        r2 = spectrum(adj, peripheral_tol, resid_tol).second_modulus()
        if not 0 < r2 < 1:
            return dual
        longer = int(min(max_horizon, 2 * horizon + 4 * np.ceil(np.log(tol) / np.log(r2))))
        if longer <= horizon:
            return dual
        return strong_ergodicity(adj, st, longer, tol, strict=False, peripheral_tol=peripheral_tol,
                                 resid_tol=resid_tol)


def kolmogorov_two_point(channel, state=None, horizon=200, tol=1e-7, strict=True,
                         peripheral_tol=1e-8, resid_tol=1e-9):
    """Two-point Kolmogorov property on the faithful corner.

    K(m) = max over matrix units of |phi(tau^m(a) tau^m(b)) - phi(a) phi(b)|
    is non-increasing.  The verdict needs K to fall below ``tol`` within the
    horizon and the spectral certificate (mixing corner).  It is cross-checked
    against strong ergodicity of the KMS adjoint of the corner.
    """
    state = _state(channel, state)
    c = corner(channel, state)
    ch, st = c.channel, c.state
    series = two_point_series(ch, st, horizon)
    spectral = _unique_fixed_state(ch, peripheral_tol, resid_tol)
    iterative, hit, msg = _decide(series, tol, spectral, horizon, strict, "two-point Kolmogorov")
    verdict = iterative and spectral
    adj = kms_adjoint(ModularPair(ch, st))
    dual = _dual_strong_ergodicity(adj, st, horizon, tol, peripheral_tol, resid_tol)
    res = KolmogorovResult(verdict, iterative, spectral, series, hit, horizon, tol, msg,
                           dual.verdict, dual.verdict == verdict, ch.dim)
    if msg:
        if strict:
            raise HorizonTooShort(msg, result=res, horizon=horizon)
        warnings.warn(msg, RuntimeWarning)
    if not res.duality_agrees and not msg and not dual.warning:
        raise NumericalError("Kolmogorov verdict disagrees with strong ergodicity of the adjoint")
    return res


def endomorphism_check(channel, tol=1e-9):
    """tau(e_a e_b) = tau(e_a) tau(e_b) on all pairs of matrix units."""
    units = matrix_units(channel.dim)
    imgs = [apply(channel, e) for e in units]
    worst = 0.0
    for a, ea in enumerate(units):
        for b, eb in enumerate(units):
            worst = max(worst, float(np.abs(apply(channel, ea @ eb) - imgs[a] @ imgs[b]).max()))
    return EndomorphismResult(worst <= tol, worst)
