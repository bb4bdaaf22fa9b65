"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line."""

import time
import warnings

import numpy as np
import pytest

from qmarkov import corpus
from qmarkov.chain import (PopescuTuple, chain_marginal, correlation_decay, factor_test, marginal_checks,
                           purity_test)
from qmarkov.channel import DensityState, random_channel, random_isometry, spectrum
from qmarkov.classify import is_ergodic, is_mixing, kolmogorov_two_point, strong_ergodicity
from qmarkov.dilation import (build_dilation, check_word_budget, verify_compression, verify_markov_property)
from qmarkov.invariant import compute_G0, conditional_expectation, corner, invariant_states
from qmarkov.kms import ModularPair, check_double_adjoint, kms_adjoint, verify_adjoint_relation

PERIPHERAL_TOL = 1e-8


def emit(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\nACCEPTANCE {number} {'PASS' if ok else 'FAIL'}: {detail}")


def random_instances(count, dims=(2, 3, 4)):
    out = []
    for seed in range(count):
        n = dims[seed % len(dims)]
        d = 2 + (seed // len(dims)) % 2
        out.append((f"random_{seed}_n{n}_d{d}", random_channel(n, d, seed=seed)))
    return out


def corpus_channels():
    return [(name, factory()) for name, factory in corpus.NAMED_CHANNELS.items()]


def faithful_state(ch):
    inv = invariant_states(ch)
    return inv.canonical if inv.faithful_exists else None


def peripheral_trivial(eigenvalues):
    on_circle = eigenvalues[np.abs(np.abs(eigenvalues) - 1) <= PERIPHERAL_TOL]
    return len(on_circle) == 1 and abs(on_circle[0] - 1) <= PERIPHERAL_TOL


def test_criterion_1_mixing_equivalence(capsys):
    start = time.perf_counter()
    instances = random_instances(100) + corpus_channels()
    disagreements, used = [], 0
    for name, ch in instances:
        st = faithful_state(ch)
        if st is None:
            continue
        used += 1
        mixing = is_mixing(ch, st, peripheral_tol=PERIPHERAL_TOL).verdict
        ergodic = is_ergodic(ch, st).verdict
        rhs = ergodic and peripheral_trivial(spectrum(ch, PERIPHERAL_TOL).eigenvalues)
        if mixing != rhs:
            disagreements.append(name)
    elapsed = time.perf_counter() - start
    ok = not disagreements and used >= 104 and elapsed < 30
    emit(capsys, 1, ok, f"{used} faithful instances, {len(disagreements)} disagreements, {elapsed:.1f}s")
    assert not disagreements
    assert used >= 104
    assert elapsed < 30


def nearest_gap(a, b):
    return max(np.min(np.abs(b - z)) for z in a)


def test_criterion_2_kms_adjoint(capsys):
    worst_rel = worst_double = worst_spec = 0.0
    for name, ch in random_instances(50):
        st = invariant_states(ch).canonical
        pair = ModularPair(ch, st)
        adj = kms_adjoint(pair)
        _, rel = verify_adjoint_relation(pair, adj)
        worst_rel = max(worst_rel, rel)
        worst_double = max(worst_double, check_double_adjoint(pair))
        ev = spectrum(ch).eigenvalues
        ev_adj = spectrum(adj).eigenvalues
        worst_spec = max(worst_spec, nearest_gap(np.conj(ev), ev_adj), nearest_gap(ev_adj, np.conj(ev)))
    ok = worst_rel <= 1e-10 and worst_double <= 1e-9 and worst_spec <= 1e-8
    emit(capsys, 2, ok, f"relation {worst_rel:.2e}, double adjoint {worst_double:.2e}, "
                        f"conjugate spectrum {worst_spec:.2e}")
    assert worst_rel <= 1e-10
    assert worst_double <= 1e-9
    assert worst_spec <= 1e-8


def test_criterion_3_kolmogorov_duality(capsys):
    disagreements, used = [], 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for name, ch in corpus_channels() + random_instances(100):
            st = invariant_states(ch).canonical
            c = corner(ch, st)
            kol = kolmogorov_two_point(c.channel, c.state, horizon=200, tol=1e-7, strict=False)
            adj = kms_adjoint(ModularPair(c.channel, c.state))
            dual = strong_ergodicity(adj, c.state, horizon=200, tol=1e-7, strict=False)
            used += 1
            if kol.verdict != dual.verdict:
                disagreements.append(name)
    ok = not disagreements
    emit(capsys, 3, ok, f"{used} instances, {len(disagreements)} disagreements {disagreements}")
    assert not disagreements


def dilation_instances():
    out = []
    for n in (1, 2):
        for d in (1, 2):
            for seed in range(2):
                out.append((f"random_n{n}_d{d}_{seed}", random_channel(n, d, seed=seed)))
    out += [(name, ch) for name, ch in corpus_channels() if ch.dim <= 2 and ch.n_kraus <= 2]
    return out


def test_criterion_4_dilation_identities(capsys):
    start = time.perf_counter()
    worst_markov = worst_comp = 0.0
    count = 0
    for name, ch in dilation_instances():
        st = invariant_states(ch).canonical
        for horizon in (1, 2, 3):
            space = build_dilation(ch, st, horizon)
            check_word_budget(space)
            worst_markov = max(worst_markov, verify_markov_property(space))
            worst_comp = max(worst_comp, verify_compression(space))
            count += 1
    elapsed = time.perf_counter() - start
    ok = worst_markov <= 1e-10 and worst_comp <= 1e-9 and elapsed < 60
    emit(capsys, 4, ok, f"{count} dilations, Markov {worst_markov:.2e}, compression {worst_comp:.2e}, "
                        f"{elapsed:.1f}s")
    assert worst_markov <= 1e-10
    assert worst_comp <= 1e-9
    assert elapsed < 60


def compressed_mixing(ch, st, G0):
    """Mixing verdict of tau restricted to the range of the conditional expectation onto G0."""
    b = G0.vectors
    e = conditional_expectation(G0, st).matrix
    restricted = b.conj().T @ e @ ch.superop @ b
    return peripheral_trivial(np.linalg.eigvals(restricted))


def test_criterion_5_core_reduction(capsys):
    changed, worst, used = [], 0.0, 0
    for name, ch in corpus_channels():
        st = faithful_state(ch)
        if st is None:
            continue
        used += 1
        G0 = compute_G0(ch, st)
        e = conditional_expectation(G0, st).matrix
        t = ch.superop
        worst = max(worst, float(np.linalg.norm(e @ t - t @ e, 2)))
        if compressed_mixing(ch, st, G0) != is_mixing(ch, st).verdict:
            changed.append(name)
    ok = not changed and worst <= 1e-9
    emit(capsys, 5, ok, f"{used} faithful corpus channels, {len(changed)} verdict changes, "
                        f"commutator {worst:.2e}")
    assert not changed
    assert worst <= 1e-9


def test_criterion_6_spin_chains(capsys):
    tup = corpus.aklt_tuple()
    ev = np.sort(spectrum(tup.channel).eigenvalues.real)
    spec_err = float(np.abs(ev - [-1 / 3, -1 / 3, -1 / 3, 1]).max())
    sz = corpus.spin_z()
    c = correlation_decay(tup, sz, sz, 20)
    ns = np.arange(5, 16)
    vals = dict(zip(c.separation.tolist(), c.values))
    ratios = np.array([vals[n] / vals[n + 1] for n in ns])
    ratio_err = float(np.abs(ratios / 3 - 1).max())
    factor = factor_test(tup).verdict
    p = np.array([[0.9, 0.1], [0.3, 0.7]])
    mtup, pi = corpus.markov_chain_tuple(p)
    dm = chain_marginal(mtup, 2).rho
    pair_err = float(np.abs(np.diag(dm).real - (pi[:, None] * p).ravel()).max())
    ok = spec_err <= 1e-9 and ratio_err <= 0.01 and factor and pair_err <= 1e-12
    emit(capsys, 6, ok, f"AKLT spectrum {spec_err:.2e}, ratio deviation {ratio_err:.2e}, factor {factor}, "
                        f"Markov pairs {pair_err:.2e}")
    assert spec_err <= 1e-9
    assert ratio_err <= 0.01
    assert factor
    assert pair_err <= 1e-12


def endomorphism_instances():
    out = [("corpus", corpus.NAMED_TUPLES["endomorphism"]())]
    rng = np.random.default_rng(7)
    for n in (2, 3, 4):
        u = random_isometry(n, n, rng)
        w, v = np.linalg.eig(u)
        p = rng.uniform(0.2, 1.0, n)
        rho = v @ np.diag(p / p.sum()) @ np.linalg.inv(v)
        amps = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        kraus = np.array([a * u for a in amps / np.linalg.norm(amps)])
        out.append((f"random_u{n}", PopescuTuple.from_arrays(kraus, (rho + rho.conj().T) / 2)))
    return out


def test_criterion_7_purity(capsys):
    met = {"product": purity_test(corpus.product_tuple([1.0, 2.0, 0.5])).criterion_met,
           "product_scalar": purity_test(corpus.product_tuple([1.0])).criterion_met,
           "aklt": purity_test(corpus.aklt_tuple()).criterion_met}
    not_met = {"two_periodic": purity_test(corpus.two_periodic_tuple()).criterion_met}
    for name, tup in endomorphism_instances():
        assert tup.corner_dim > 1
        not_met[f"endomorphism_{name}"] = purity_test(tup).criterion_met
    wrong = [k for k, v in met.items() if not v] + [k for k, v in not_met.items() if v]
    emit(capsys, 7, not wrong, f"{len(met)} met, {len(not_met)} not met, wrong labels {wrong}")
    assert not wrong


def test_criterion_8_marginal_consistency(capsys):
    worst = 0.0
    windows = 0
    for name, factory in corpus.NAMED_TUPLES.items():
        tup = factory()
        assert tup.site_dim <= 3
        for m in range(1, 7):
            dm = chain_marginal(tup, m)
            chk = marginal_checks(tup, m, dm.rho)
            worst = max(worst, -chk.min_eigenvalue, chk.trace_defect, chk.left_defect, chk.right_defect)
            windows += 1
    ok = worst <= 1e-10
    emit(capsys, 8, ok, f"{windows} windows, worst residual {max(worst, 0.0):.2e}")
    assert worst <= 1e-10
