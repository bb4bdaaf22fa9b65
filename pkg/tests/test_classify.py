import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qmarkov.channel import DensityState, KrausChannel, random_channel, random_channel_with_transient, spectrum
from qmarkov.classify import (check_mixing_criterion, endomorphism_check, is_ergodic, is_mixing,
                              kolmogorov_two_point, pure_state_grid, strong_ergodicity, two_point_series,
                              two_point_value)
from qmarkov.corpus import (flip_hadamard_channel, flip_mixture_channel, hadamard_phase_channel, identity_channel,
                            reset_channel, two_cycle_channel, unitary_channel)
from qmarkov.errors import HorizonTooShort, StateNotFaithful
from qmarkov.invariant import corner, invariant_states
from qmarkov.kms import ModularPair, kms_adjoint

from conftest import Z

HALF = DensityState(np.eye(2) / 2)


def test_ergodic_examples():
    assert not is_ergodic(identity_channel(2), HALF).verdict
    assert is_ergodic(two_cycle_channel(), HALF).verdict
    assert not is_ergodic(flip_mixture_channel(), HALF).verdict


def test_mixing_examples():
    m = is_mixing(two_cycle_channel(), HALF)
    assert not m.verdict and m.direct_agrees
    assert np.allclose(m.peripheral, [1, -1])
    assert is_mixing(hadamard_phase_channel(), HALF).verdict
    assert not is_mixing(identity_channel(2), HALF).verdict


def test_flip_hadamard_is_ergodic_not_mixing():
    # X Y X = H Y H = -Y, so Y is an eigenvector with eigenvalue -1
    ch = flip_hadamard_channel()
    y = np.array([[0, -1j], [1j, 0]])
    assert np.allclose(ch(y), -y)
    assert is_ergodic(ch, HALF).verdict
    assert not is_mixing(ch, HALF).verdict


def test_two_cycle_direct_iteration_oscillates():
    ch = two_cycle_channel()
    x = Z.copy()
    for _ in range(5):
        x = ch(x)
    assert np.allclose(x, -Z)


@pytest.mark.parametrize("factory,mixing,ergodic", [
    (two_cycle_channel, False, True),
    (hadamard_phase_channel, True, True),
    (identity_channel, False, False),
    (flip_hadamard_channel, False, True),
])
def test_mixing_criterion_examples(factory, mixing, ergodic):
    r = check_mixing_criterion(factory(), HALF)
    assert r.agree
    assert r.mixing == mixing
    assert r.ergodic == ergodic
    assert r.rhs == mixing


def test_mixing_criterion_needs_faithful():
    with pytest.raises(StateNotFaithful):
        check_mixing_criterion(reset_channel(), DensityState(np.diag([1.0, 0.0])))


@given(st.integers(0, 10 ** 6), st.integers(2, 4))
def test_mixing_criterion_random(seed, n):
    ch = random_channel(n, 2, seed=seed)
    assert check_mixing_criterion(ch, invariant_states(ch).canonical).agree


def test_pure_state_grid_spans_hermitian():
    grid = pure_state_grid(3)
    real = np.array([np.concatenate([g.real.ravel(), g.imag.ravel()]) for g in grid])
    assert np.linalg.matrix_rank(real) == 9


def test_strong_ergodicity_examples():
    r = strong_ergodicity(reset_channel(), DensityState(np.diag([1.0, 0.0])))
    assert r.verdict and r.hit_step == 1 and r.series[0] == pytest.approx(0, abs=1e-15)
    assert not strong_ergodicity(two_cycle_channel(), HALF).verdict
    assert not strong_ergodicity(identity_channel(2), HALF).verdict


def test_horizon_too_short():
    ch = hadamard_phase_channel()
    with pytest.raises(HorizonTooShort) as exc:
        strong_ergodicity(ch, HALF, horizon=2)
    assert exc.value.result is not None and exc.value.result.spectral
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        r = strong_ergodicity(ch, HALF, horizon=2, strict=False)
    assert not r.verdict and r.warning and w


@given(st.integers(0, 10 ** 6))
def test_two_point_series_is_monotone(seed):
    ch = random_channel(3, 2, seed=seed)
    k = two_point_series(ch, invariant_states(ch).canonical, 60)
    assert np.all(np.diff(k) <= 1e-12 * max(1.0, k[0]))


def test_kolmogorov_examples():
    r = kolmogorov_two_point(reset_channel())
    assert r.verdict and r.corner_dim == 1 and np.all(r.series == 0)
    r = kolmogorov_two_point(two_cycle_channel(), HALF)
    assert not r.verdict and r.duality_agrees
    w = np.diag([1, -1]) / np.sqrt(2)
    for m in range(6):
        assert two_point_value(two_cycle_channel(), HALF, w, w, m) == pytest.approx(0.5)
    r = kolmogorov_two_point(hadamard_phase_channel(), HALF)
    assert r.verdict and r.adjoint_strong_ergodic


def test_kolmogorov_spectral_bound():
    ch = hadamard_phase_channel()
    r2 = spectrum(ch).second_modulus()
    k = kolmogorov_two_point(ch, HALF).series
    ms = np.arange(1, 31)
    assert np.all(k[:30] <= 4.0 * r2 ** ms + 1e-14)


@given(st.integers(0, 10 ** 6))
def test_kolmogorov_duality_random(seed):
    ch = random_channel(3, 2, seed=seed)
    rho = invariant_states(ch).canonical
    k = kolmogorov_two_point(ch, rho, horizon=2000)
    adj = kms_adjoint(ModularPair(ch, rho))
    assert k.duality_agrees
    assert k.verdict == strong_ergodicity(adj, rho, horizon=2000).verdict


def test_endomorphism_examples():
    u = np.array([[0, 1j], [1, 0]])
    assert endomorphism_check(unitary_channel(u)).verdict
    assert not endomorphism_check(flip_mixture_channel()).verdict
    assert endomorphism_check(KrausChannel(np.array([[[1.0]]]))).verdict


@given(st.integers(0, 10 ** 6))
def test_support_reduction_keeps_strong_ergodicity(seed):
    ch = random_channel_with_transient(3, 2, 2, seed=seed)
    rho = invariant_states(ch).canonical
    erg = is_ergodic(ch, rho)
    assert erg.reduced and erg.support_limit_defect < 1e-8
    c = corner(ch, rho)
    full = strong_ergodicity(ch, rho, horizon=5000, strict=False)
    red = strong_ergodicity(c.channel, c.state, horizon=5000, strict=False)
    assert full.spectral == red.spectral
    assert full.verdict == red.verdict
