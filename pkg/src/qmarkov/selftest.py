"""Internal consistency checks over the named corpus and seeded random instances."""

from dataclasses import dataclass

import numpy as np

from . import corpus
from .chain import (chain_marginal, correlation_decay, factor_test, gauge_peripheral_group, marginal_checks,
                    purity_test)
from .channel import random_channel, random_channel_with_transient
from .classify import check_mixing_criterion, kolmogorov_two_point, strong_ergodicity
from .dilation import dilate
from .errors import QMarkovError
from .invariant import compute_G, compute_G0, conditional_expectation, corner, invariant_states
from .kms import ModularPair, adjoint_relation_defect, check_double_adjoint, kms_adjoint


@dataclass
class Check:
    name: str
    instance: str
    passed: bool
    residual: float = 0.0
    message: str = ""

    def to_dict(self):
        return {"name": self.name, "instance": self.instance, "passed": bool(self.passed),
                "residual": float(self.residual), "message": self.message}


def channel_instances(seed=0):
    out = [(name, factory()) for name, factory in corpus.NAMED_CHANNELS.items()]
    rng = np.random.default_rng(seed)
    for k in range(4):
        n = 2 + k % 2
        out.append((f"random_n{n}_d2_{k}", random_channel(n, 2, rng)))
    out.append(("random_transient_n3", random_channel_with_transient(3, 2, 2, rng)))
    return out


def _run(checks, name, instance, fn):
    try:
        passed, residual = fn()
        checks.append(Check(name, instance, bool(passed), float(residual)))
    except QMarkovError as exc:
        checks.append(Check(name, instance, False, float("nan"), f"{exc.code}: {exc.message}"))


def _channel_checks(checks, label, ch):
    st = invariant_states(ch).canonical
    c = corner(ch, st)
    cch, cst = c.channel, c.state

    def mixing():
        r = check_mixing_criterion(cch, cst)
        return r.agree, 0.0

    def adjoint():
        pair = ModularPair(cch, cst)
        adj = kms_adjoint(pair)
        return True, max(adjoint_relation_defect(pair, adj), check_double_adjoint(pair))

    def duality():
        k = kolmogorov_two_point(cch, cst, strict=False)
        return k.duality_agrees, 0.0

    def cores():
        G = compute_G(cch, cst)
        G0 = compute_G0(cch, cst, G=G)
        adj = kms_adjoint(ModularPair(cch, cst))
        G0a = compute_G0(adj, cst)
        t = cch.superop
        worst = 0.0
        for sub in (G, G0):
            e = conditional_expectation(sub, cst).matrix
            worst = max(worst, float(np.linalg.norm(e @ t - t @ e, 2)))
        return G0.same_as(G0a) and worst <= 1e-8, worst

    def peripheral():
        from .chain import PopescuTuple

        g = gauge_peripheral_group(PopescuTuple(cch, cst))
        return g.is_cyclic, g.closure_defect

    def support():
        if not c.reduced:
            return True, 0.0
        full = strong_ergodicity(ch, st, strict=False)
        red = strong_ergodicity(cch, cst, strict=False)
        return full.verdict == red.verdict, 0.0

    for name, fn in [("mixing_criterion", mixing), ("adjoint_relation", adjoint),
                     ("kolmogorov_duality", duality), ("core_reduction", cores),
                     ("peripheral_group", peripheral), ("support_reduction", support)]:
        _run(checks, name, label, fn)

    if ch.dim <= 2 and ch.n_kraus <= 2:
        def dil():
            rep = dilate(ch, st, 3)
            worst = max(rep.markov_defect, rep.compression_defect, rep.shift_defect,
                        rep.multiplicativity_defect, rep.filtration_defect, rep.series.max_difference)
            return rep.passed(), worst

        _run(checks, "dilation", label, dil)


def _tuple_checks(checks, label, tup):
    def marginals():
        worst = 0.0
        for m in range(1, 5):
            if tup.site_dim ** m > 256:
                break
            chain_marginal(tup, m)
            chk = marginal_checks(tup, m)
            worst = max(worst, -chk.min_eigenvalue, chk.trace_defect, chk.left_defect, chk.right_defect)
        return True, max(worst, 0.0)

    def factor():
        r = factor_test(tup)
        return r.agree, 0.0

    def purity():
        r = purity_test(tup)
        return r.agree, 0.0

    tests = [("chain_marginal", marginals), ("purity_duality", purity)]
    if label not in corpus.NON_MINIMAL_TUPLES:
        tests.append(("factor_cluster", factor))
    for name, fn in tests:
        _run(checks, name, label, fn)


def run_selftest(seed=0):
    checks = []
    for label, ch in channel_instances(seed):
        _channel_checks(checks, label, ch)
    for label, factory in corpus.NAMED_TUPLES.items():
        _tuple_checks(checks, label, factory())

    def aklt_ratio():
        tup = corpus.aklt_tuple()
        sz = corpus.spin_z()
        s = correlation_decay(tup, sz, sz, 20)
        ratios = s.values[4:15] / s.values[5:16]
        return bool(np.all(np.abs(ratios - 3) <= 0.03)), float(np.abs(ratios - 3).max())

    _run(checks, "aklt_decay_ratio", "aklt", aklt_ratio)

    rng = np.random.default_rng(seed + 1)

    def random_sweep():
        agree = 0
        for _ in range(50):
            ch = random_channel(3, 2, rng)
            st = invariant_states(ch).canonical
            agree += check_mixing_criterion(ch, st).agree
        return agree == 50, 0.0

    _run(checks, "mixing_criterion_sweep", "random_n3_x50", random_sweep)
    return checks


def report(checks):
    residuals = [c.residual for c in checks if np.isfinite(c.residual)]
    return {
        "passed": all(c.passed for c in checks),
        "max_residual": max(residuals) if residuals else 0.0,
        "count": len(checks),
        "failures": sum(not c.passed for c in checks),
        "checks": [c.to_dict() for c in checks],
    }
