"""Named channels and tuples with known behaviour, used by tests and the self-test."""

import numpy as np

from .channel import DensityState, KrausChannel, random_channel
from .chain import PopescuTuple

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PHASE = np.diag([1, 1j]).astype(complex)


def identity_channel(n=2):
    return KrausChannel(np.eye(n, dtype=complex)[None])


def reset_channel():
    """x -> x_00 1, Kraus {|0><0|, |1><0|}; predual sends every state to |0><0|."""
    return KrausChannel(np.array([[[1, 0], [0, 0]], [[0, 0], [1, 0]]], dtype=complex))


def two_cycle_channel():
    """Classical 2-cycle, Kraus {|0><1|, |1><0|}; peripheral spectrum {1, -1}."""
    return KrausChannel(np.array([[[0, 1], [0, 0]], [[0, 0], [1, 0]]], dtype=complex))


def flip_mixture_channel():
    """(x + X x X)/2: two-dimensional fixed space span{1, X}."""
    return KrausChannel(np.array([np.eye(2), SX]) / np.sqrt(2))


def flip_hadamard_channel():
    """(X x X + H x H)/2: ergodic with Y -> -Y, hence not mixing."""
    return KrausChannel(np.array([SX, HADAMARD]) / np.sqrt(2))


def hadamard_phase_channel():
    """(H x H + S x S^*)/2 with S = diag(1, i): a mixing random-unitary channel."""
    return KrausChannel(np.array([HADAMARD, PHASE]) / np.sqrt(2))


def unitary_channel(u):
    return KrausChannel(np.asarray(u, dtype=complex)[None])


def seeded_random_channel(n, d, seed):
    return random_channel(n, d, seed=seed)


NAMED_CHANNELS = {
    "identity": identity_channel,
    "reset": reset_channel,
    "two_cycle": two_cycle_channel,
    "flip_mixture": flip_mixture_channel,
    "flip_hadamard": flip_hadamard_channel,
    "hadamard_phase": hadamard_phase_channel,
}


# ------------------------------------------------------------------ tuples


def product_tuple(amplitudes):
    """n = 1 tuple of scalars; omega is the product of the one-site state diag(|a_k|^2)."""
    a = np.asarray(amplitudes, dtype=complex)
    a = a / np.linalg.norm(a)
    return PopescuTuple.from_arrays(a.reshape(-1, 1, 1), np.eye(1))


def aklt_tuple():
    """Spin-1 valence-bond tuple in M_2 with transfer spectrum {1, -1/3, -1/3, -1/3}."""
    sp = np.array([[0, 1], [0, 0]], dtype=complex)
    sm = sp.T.copy()
    kraus = np.array([np.sqrt(2 / 3) * sp, -np.sqrt(1 / 3) * SZ, -np.sqrt(2 / 3) * sm])
    return PopescuTuple.from_arrays(kraus, np.eye(2) / 2)


def spin_z():
    return np.diag([1.0, 0.0, -1.0]).astype(complex)


def markov_chain_tuple(p):
    """Classical Markov chain with transition matrix ``p`` (rows sum to one).

    l_k = |k><v_k| with v_k = sum_a sqrt(p[k, a]) |a>.  The diagonal of the
    m-site marginal is pi(i_1) p(i_1, i_2) ... p(i_{m-1}, i_m) for the
    stationary distribution pi.
    """
    p = np.asarray(p, dtype=float)
    d = p.shape[0]
    vs = np.sqrt(p)
    kraus = np.zeros((d, d, d), dtype=complex)
    for k in range(d):
        kraus[k, k, :] = vs[k]
    w, v = np.linalg.eig(p.T)
    pi = np.real(v[:, np.argmin(np.abs(w - 1))])
    pi = pi / pi.sum()
    rho = sum(pi[k] * np.outer(vs[k], vs[k]) for k in range(d))
    return PopescuTuple.from_arrays(kraus, rho), pi


def two_periodic_tuple():
    """Tuple {|0><1|, |1><0|} with rho = 1/2; peripheral group {1, -1}."""
    kraus = np.array([[[0, 1], [0, 0]], [[0, 0], [1, 0]]], dtype=complex)
    return PopescuTuple.from_arrays(kraus, np.eye(2) / 2)


def block_sum_tuple(a, b):
    """diag(a_k, b_k): a convex mixture of two product states, never a factor."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
    kraus = np.array([np.diag([x, y]) for x, y in zip(a, b)])
    return PopescuTuple.from_arrays(kraus, np.eye(2) / 2)


def endomorphism_tuple(u, amplitudes):
    """l_k = c_k u: the channel is Ad(u), multiplicative, and the Kolmogorov series is constant."""
    c = np.asarray(amplitudes, dtype=complex)
    c = c / np.linalg.norm(c)
    u = np.asarray(u, dtype=complex)
    kraus = np.array([ck * u for ck in c])
    n = u.shape[0]
    return PopescuTuple.from_arrays(kraus, np.eye(n) / n)


def random_tuple(n, d, seed):
    from .invariant import invariant_states

    ch = random_channel(n, d, seed=seed)
    st = invariant_states(ch).canonical
    return PopescuTuple(ch, st)


NAMED_TUPLES = {
    "product": lambda: product_tuple([1.0, 1.0]),
    "aklt": aklt_tuple,
    "markov": lambda: markov_chain_tuple([[0.9, 0.1], [0.3, 0.7]])[0],
    "two_periodic": two_periodic_tuple,
    "block_sum": lambda: block_sum_tuple([1.0, 1.0], [1.0, 2.0]),
    "endomorphism": lambda: endomorphism_tuple(HADAMARD, [1.0, 1.0]),
}

# Tuples whose Kraus family is not minimal for its state: omega is a product
# state although the channel has a non-trivial fixed space.
NON_MINIMAL_TUPLES = {"endomorphism"}
