import numpy as np
import pytest
from hypothesis import given, strategies as st

from qmarkov.channel import DensityState, KrausChannel, apply, predual_apply, random_channel, \
    random_channel_with_transient, vec
from qmarkov.corpus import (flip_mixture_channel, hadamard_phase_channel, identity_channel, reset_channel,
                            two_cycle_channel, unitary_channel)
from qmarkov.errors import NotModularInvariant, NotSubharmonic, StateNotFaithful, StateNotInvariant
from qmarkov.invariant import (compute_G, compute_G0, conditional_expectation, corner, fixed_point_algebra, g_tower,
                               invariant_states, multiplicative_modular_core, reduce_channel, support_projection)
from qmarkov.subspace import SubalgebraBasis, distance, span_of

from conftest import X, Z


def classical_channel(p):
    p = np.asarray(p, float)
    n = len(p)
    ks = []
    for i in range(n):
        for j in range(n):
            if p[i, j] > 0:
                l = np.zeros((n, n), complex)
                l[i, j] = np.sqrt(p[i, j])
                ks.append(l)
    return KrausChannel(np.array(ks))


HALF = DensityState(np.eye(2) / 2)


def test_identity_invariant_states():
    inv = invariant_states(identity_channel(2))
    assert inv.dimension == 4
    assert inv.faithful_exists
    assert np.allclose(inv.canonical.rho, np.eye(2) / 2)


def test_reset_unique_nonfaithful_state():
    inv = invariant_states(reset_channel())
    assert inv.dimension == 1
    assert np.allclose(inv.states[0].rho, np.diag([1, 0]))
    assert not inv.faithful_exists


def test_flip_mixture_states_span_i_and_x():
    inv = invariant_states(flip_mixture_channel())
    assert inv.dimension == 2
    got = span_of([s.rho for s in inv.states])
    assert distance(got, span_of([np.eye(2) / 2, X / 2])) < 1e-10
    for s in inv.states:
        assert np.linalg.eigvalsh(s.rho)[0] >= -1e-12


@given(st.integers(0, 10 ** 6))
def test_canonical_state_is_invariant(seed):
    ch = random_channel(3, 2, seed=seed)
    rho = invariant_states(ch).canonical.rho
    assert np.abs(predual_apply(ch, rho) - rho).max() < 1e-10


def test_canonical_state_support_contains_all():
    ch = random_channel_with_transient(4, 2, 2, seed=3)
    inv = invariant_states(ch)
    p = support_projection(inv.canonical)
    assert p.rank == 2
    for s in inv.states:
        assert np.abs(p.p @ s.rho @ p.p - s.rho).max() < 1e-10


@pytest.mark.parametrize("rho,expected", [
    (np.eye(2) / 2, np.eye(2)),
    (np.diag([1.0, 0.0]), np.diag([1.0, 0.0])),
    (np.diag([0.7, 0.3, 0.0]), np.diag([1.0, 1.0, 0.0])),
])
def test_support_projection(rho, expected):
    assert np.allclose(support_projection(DensityState(rho)).p, expected)


def test_reduce_with_identity_projection_is_unchanged():
    ch = random_channel(2, 2, seed=1)
    red = reduce_channel(ch, support_projection(HALF))
    assert np.allclose(red.superop, ch.superop)


def test_reset_corner_is_trivial():
    ch = reset_channel()
    red = reduce_channel(ch, support_projection(DensityState(np.diag([1.0, 0.0]))))
    assert red.dim == 1
    assert np.allclose(apply(red, np.array([[2.5]])), [[2.5]])


def test_reduce_rejects_non_subharmonic():
    with pytest.raises(NotSubharmonic):
        reduce_channel(reset_channel(), support_projection(DensityState(np.diag([0.0, 1.0]))))


def test_fixed_point_algebra_examples():
    assert fixed_point_algebra(identity_channel(2), HALF).size == 4
    fx = fixed_point_algebra(flip_mixture_channel(), HALF)
    assert fx.same_as(SubalgebraBasis.from_matrices([np.eye(2), X]))
    assert fixed_point_algebra(two_cycle_channel(), HALF).is_scalars()


def test_fixed_point_algebra_needs_faithful_invariant_state():
    with pytest.raises(StateNotFaithful):
        fixed_point_algebra(reset_channel(), DensityState(np.diag([1.0, 0.0])))
    with pytest.raises(StateNotInvariant):
        fixed_point_algebra(random_channel(2, 2, seed=0), DensityState(np.diag([0.9, 0.1])))


def test_G_examples():
    u = np.array([[np.cos(0.3), -np.sin(0.3)], [np.sin(0.3), np.cos(0.3)]])
    assert compute_G(unitary_channel(u), HALF).size == 4
    g = compute_G(flip_mixture_channel(), HALF)
    assert g.same_as(SubalgebraBasis.from_matrices([np.eye(2), X]))
    ch = random_channel(3, 2, seed=2)
    assert compute_G(ch, invariant_states(ch).canonical).is_scalars()


def test_G_tower_needs_more_than_one_step():
    # the single kernel of adj*tau - 1 is two-dimensional, the stable core is the scalars
    ch = classical_channel([[0, 1, 0], [0.5, 0, 0.5], [1, 0, 0]])
    st_ = invariant_states(ch).canonical
    basis, dims = g_tower(ch, st_)
    assert dims == [2, 1, 1]
    assert compute_G(ch, st_).is_scalars()


@given(st.integers(0, 10 ** 6), st.integers(2, 3))
def test_G_characterizations_agree(seed, n):
    ch = random_channel(n, 2, seed=seed)
    rho = invariant_states(ch).canonical
    basis, dims = g_tower(ch, rho)
    core = multiplicative_modular_core(ch, rho, len(dims))
    assert basis.shape[1] == core.shape[1]
    assert distance(basis, core) < 1e-7


def test_G0_examples():
    u = np.array([[0, 1], [1j, 0]])
    assert compute_G0(unitary_channel(u), HALF).size == 4
    g0 = compute_G0(two_cycle_channel(), HALF)
    assert g0.same_as(SubalgebraBasis.from_matrices([np.eye(2), Z]))
    assert compute_G0(hadamard_phase_channel(), HALF).is_scalars()


def test_G0_is_invariant_automorphic_algebra():
    ch = two_cycle_channel()
    g0 = compute_G0(ch, HALF)
    assert g0.is_algebra()
    for b in g0.matrices:
        assert g0.contains(apply(ch, b))


def test_conditional_expectation_onto_scalars(rng):
    rho = DensityState(np.diag([0.6, 0.4]))
    e = conditional_expectation(SubalgebraBasis.scalars(2), rho)
    x = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    assert np.allclose(e.apply(x), np.trace(rho.rho @ x) * np.eye(2))


def test_conditional_expectation_pinching(rng):
    rho = DensityState(np.diag([0.5, 0.3, 0.2]))
    diag = SubalgebraBasis.from_matrices([np.diag(v) for v in np.eye(3)])
    e = conditional_expectation(diag, rho)
    x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    assert np.allclose(e.apply(x), np.diag(np.diag(x)))


def test_conditional_expectation_requires_modular_invariance():
    rho = DensityState(np.diag([0.7, 0.3]))
    with pytest.raises(NotModularInvariant):
        conditional_expectation(SubalgebraBasis.from_matrices([np.eye(2), X]), rho)


@given(st.integers(0, 10 ** 6))
def test_expectations_onto_cores_commute_with_channel(seed):
    rng = np.random.default_rng(seed)
    for ch in (two_cycle_channel(), flip_mixture_channel(), random_channel(3, 2, rng)):
        rho = invariant_states(ch).canonical
        t = ch.superop
        G = compute_G(ch, rho)
        for sub in (G, compute_G0(ch, rho, G=G)):
            e = conditional_expectation(sub, rho).matrix
            assert np.linalg.norm(e @ t - t @ e, 2) < 1e-9


def test_corner_of_transient_channel():
    ch = random_channel_with_transient(3, 2, 2, seed=11)
    c = corner(ch)
    assert c.reduced and c.channel.dim == 2 and c.state.faithful()
