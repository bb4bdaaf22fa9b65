"""Command line front-end: ``qmarkov <command> --in FILE``.

Exit status: 0 success, 1 internal or numerical failure (including a failed
self-test), 2 invalid input, 3 budget exceeded.
"""

import argparse
import sys

import numpy as np

from . import corpus
from .chain import (PopescuTuple, chain_marginal, correlation_decay, factor_test, gauge_peripheral_group,
                    marginal_checks, purity_test, support_reduce)
from .channel import spectrum
from .classify import (check_mixing_criterion, endomorphism_check, is_ergodic, is_mixing,
                       kolmogorov_two_point, strong_ergodicity)
from .config import load_tolerances
from .dilation import dilate
from .errors import QMarkovError, SchemaError
from .invariant import compute_G, compute_G0, corner, fixed_point_algebra, g_tower, invariant_states
from .io import (channel_from_json, complex_to_json, dumps, error_document, load_document, matrix_from_json,
                 matrix_to_json, state_from_json)
from .kms import ModularPair, adjoint_relation_defect, check_double_adjoint, kms_adjoint, modular_commutation
from .selftest import report, run_selftest


def _load_channel(args, tol):
    if args.named:
        if args.named not in corpus.NAMED_CHANNELS:
            raise SchemaError(f"unknown channel {args.named!r}", known=sorted(corpus.NAMED_CHANNELS))
        return corpus.NAMED_CHANNELS[args.named](), None
    if not args.input:
        raise SchemaError("either --in or --named is required")
    doc = load_document(args.input)
    return channel_from_json(doc, tol.unitality), state_from_json(doc, tol.state)


def _load_tuple(args, tol):
    if args.named:
        if args.named not in corpus.NAMED_TUPLES:
            raise SchemaError(f"unknown tuple {args.named!r}", known=sorted(corpus.NAMED_TUPLES))
        return corpus.NAMED_TUPLES[args.named](), {}
    if not args.input:
        raise SchemaError("either --in or --named is required")
    doc = load_document(args.input)
    ch = channel_from_json(doc, tol.unitality)
    st = state_from_json(doc, tol.state)
    for key, expected in (("corner_dim", ch.dim), ("site_dim", ch.n_kraus)):
        if key in doc and doc[key] != expected:
            raise SchemaError(f"{key} does not match the Kraus operators", declared=doc[key], actual=expected)
    if st is None:
        st = invariant_states(ch).canonical
    return support_reduce(ch, st, tol.invariance), doc


def _state_or_default(ch, st):
    return st if st is not None else invariant_states(ch).canonical


def _spectrum_doc(sp):
    return {
        "eigenvalues": [complex_to_json(z) for z in sp.eigenvalues],
        "peripheral": [complex_to_json(z) for z in sp.peripheral_values()],
        "max_residual": float(sp.residuals.max()),
    }


def cmd_analyze(args, tol):
    ch, st = _load_channel(args, tol)
    inv = invariant_states(ch, tol.subspace, tol.state)
    st = st if st is not None else inv.canonical
    sp = spectrum(ch, tol.peripheral, tol.residual)
    out = {
        "dimension": ch.dim,
        "n_kraus": ch.n_kraus,
        "spectrum": _spectrum_doc(sp),
        "invariant_states": {
            "dimension": inv.dimension,
            "faithful_exists": inv.faithful_exists,
            "canonical": matrix_to_json(inv.canonical.rho),
        },
    }
    c = corner(ch, st, tol.invariance)
    out["corner_dim"] = c.channel.dim
    alg = fixed_point_algebra(c.channel, c.state, tol.subspace)
    _, dims = g_tower(c.channel, c.state, tol.subspace)
    G = compute_G(c.channel, c.state, tol.subspace)
    out["fixed_point_algebra_dim"] = alg.size
    out["isometric_core"] = {"dim": G.size, "tower_dims": dims}
    out["automorphic_core_dim"] = compute_G0(c.channel, c.state, tol.subspace, G=G).size
    return out


def _decay_doc(res):
    return {
        "verdict": res.verdict,
        "iterative": res.iterative,
        "spectral": res.spectral,
        "hit_step": res.hit_step,
        "horizon": res.horizon,
        "final_value": float(res.series[-1]),
        "warning": res.warning,
    }


def cmd_classify(args, tol):
    ch, st = _load_channel(args, tol)
    st = _state_or_default(ch, st)
    horizon = args.horizon or tol.horizon
    erg = is_ergodic(ch, st, tol.subspace)
    mix = is_mixing(ch, st, tol.peripheral, tol.residual, tol.subspace)
    out = {
        "ergodic": {"verdict": erg.verdict, "fixed_dim": erg.fixed_dim, "reduced": erg.reduced,
                    "corner_dim": erg.corner_dim, "support_limit_defect": erg.support_limit_defect},
        "mixing": {"verdict": mix.verdict, "peripheral": [complex_to_json(z) for z in mix.peripheral],
                   "direct_steps": mix.direct_steps, "direct_residual": mix.direct_residual,
                   "direct_agrees": mix.direct_agrees},
    }
    c = corner(ch, st, tol.invariance)
    crit = check_mixing_criterion(c.channel, c.state, tol.subspace)
    out["mixing_criterion"] = {"mixing": crit.mixing, "ergodic": crit.ergodic,
                               "peripheral_trivial": crit.peripheral_trivial,
                               "automorphic_core_dim": crit.automorphic_core_dim, "agree": crit.agree}
    se = strong_ergodicity(ch, st, horizon, tol.decay, strict=False,
                           peripheral_tol=tol.peripheral, resid_tol=tol.residual)
    out["strong_ergodicity"] = _decay_doc(se)
    kol = kolmogorov_two_point(ch, st, horizon, tol.decay, strict=False,
                               peripheral_tol=tol.peripheral, resid_tol=tol.residual)
    out["kolmogorov"] = dict(_decay_doc(kol), adjoint_strong_ergodic=kol.adjoint_strong_ergodic,
                             duality_agrees=kol.duality_agrees)
    endo = endomorphism_check(ch, tol.residual)
    out["endomorphism"] = {"verdict": endo.verdict, "defect": endo.defect}
    return out


def cmd_adjoint(args, tol):
    ch, st = _load_channel(args, tol)
    st = _state_or_default(ch, st)
    pair = ModularPair(ch, st, tol.condition_max)
    adj = kms_adjoint(pair, tol.invariance)
    return {
        "kraus": [matrix_to_json(k) for k in adj.kraus],
        "state": matrix_to_json(st.rho),
        "relation_defect": adjoint_relation_defect(pair, adj),
        "double_adjoint_distance": check_double_adjoint(pair),
        "modular_commutator": modular_commutation(pair, None),
    }


def cmd_dilate(args, tol):
    ch, st = _load_channel(args, tol)
    st = _state_or_default(ch, st)
    rep = dilate(ch, st, args.horizon or 3, tol.dilation_budget)
    return {
        "total_dim": rep.total_dim,
        "markov_defect": rep.markov_defect,
        "compression_defect": rep.compression_defect,
        "shift_defect": rep.shift_defect,
        "multiplicativity_defect": rep.multiplicativity_defect,
        "filtration_defect": rep.filtration_defect,
        "cyclic": {"ordered_dim": rep.cyclic.ordered_dim, "all_dim": rep.cyclic.all_dim,
                   "minimal": rep.cyclic.minimal},
        "kolmogorov_series": rep.series.dilation.tolist(),
        "direct_series": rep.series.direct.tolist(),
        "series_difference": rep.series.max_difference,
        "passed": rep.passed(),
    }


def cmd_chain(args, tol):
    tup, doc = _load_tuple(args, tol)
    horizon = args.horizon or tol.horizon
    verb = args.verb
    if verb == "marginal":
        m = args.window or 2
        dm = chain_marginal(tup, m, tol.marginal_budget)
        chk = marginal_checks(tup, m)
        return {"sites": m, "density": matrix_to_json(dm.rho), "checks": chk.__dict__}
    if verb == "decay":
        if args.named:
            x = y = corpus.spin_z() if args.named == "aklt" else np.diag(
                np.arange(tup.site_dim, dtype=float)).astype(complex)
        else:
            if "x" not in doc or "y" not in doc:
                raise SchemaError("decay needs observables 'x' and 'y' in the input")
            x, y = matrix_from_json(doc["x"], "x"), matrix_from_json(doc["y"], "y")
        s = correlation_decay(tup, x, y, args.n_max)
        return {"separation": s.separation.tolist(), "values": s.values.tolist(), "rate": s.rate,
                "fit_residual": s.fit_residual, "second_modulus": s.second_modulus}
    if verb == "factor":
        r = factor_test(tup, horizon, tol.decay)
        return {"verdict": r.verdict, "strong_ergodic": r.strong_ergodic, "cluster_decays": r.cluster_decays,
                "cluster_final": float(r.cluster_series[-1]), "agree": r.agree}
    if verb == "purity":
        r = purity_test(tup, horizon, tol.decay)
        return {"criterion_met": r.criterion_met, "label": r.label,
                "adjoint_strong_ergodic": r.adjoint_strong_ergodic, "agree": r.agree,
                "final_value": float(r.series[-1])}
    if verb == "gauge":
        g = gauge_peripheral_group(tup, tol.peripheral)
        return {"values": [complex_to_json(z) for z in g.values], "order": g.order,
                "closure_defect": g.closure_defect, "cyclic": g.is_cyclic}
    raise SchemaError(f"unknown chain verb {verb!r}")


def cmd_selftest(args, tol):
    return report(run_selftest(args.seed))


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}{k}.")
    else:
        yield prefix[:-1], obj


def _render(out, fmt, command):
    if fmt == "json":
        return dumps(out) + "\n"
    if fmt == "csv":
        if "separation" not in out:
            raise SchemaError("csv output is only available for chain decay")
        lines = ["n,c_n"] + [f"{k},{format(v, '.17g')}" for k, v in zip(out["separation"], out["values"])]
        return "\n".join(lines) + "\n"
    lines = []
    for key, val in _flatten(out):
        if key == "checks" and isinstance(val, list):
            for c in val:
                status = "PASS" if c["passed"] else "FAIL"
                lines.append(f"{status} {c['name']} [{c['instance']}] residual={c['residual']:.3g} {c['message']}")
            continue
        text = dumps(val, indent=0).replace("\n", "") if isinstance(val, (list, dict)) else dumps(val)
        lines.append(f"{key}: {text}")
    return "\n".join(lines) + "\n"


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--in", dest="input", help="input JSON file")
    common.add_argument("--named", help="use a named corpus channel or tuple instead of --in")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--horizon", type=int, default=None)
    common.add_argument("--window", type=int, default=None, help="number of sites for chain marginal")
    common.add_argument("--n-max", type=int, default=20, help="number of separations for chain decay")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol-config", help="JSON file overriding tolerances")
    common.add_argument("--format", choices=("json", "text", "csv"), default="json")

    parser = argparse.ArgumentParser(prog="qmarkov", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="spectrum, invariant states and algebras")
    sub.add_parser("classify", parents=[common], help="ergodic, mixing, strong ergodic and Kolmogorov verdicts")
    sub.add_parser("adjoint", parents=[common], help="KMS adjoint with relation certificates")
    sub.add_parser("dilate", parents=[common], help="truncated Markov dilation and its identities")
    chain = sub.add_parser("chain", parents=[common], help="finitely correlated chain states")
    chain.add_argument("verb", choices=("marginal", "decay", "factor", "purity", "gauge"))
    sub.add_parser("selftest", parents=[common], help="run the internal consistency suite")
    return parser


COMMANDS = {
    "analyze": cmd_analyze,
    "classify": cmd_classify,
    "adjoint": cmd_adjoint,
    "dilate": cmd_dilate,
    "chain": cmd_chain,
    "selftest": cmd_selftest,
}


def _emit(text, path):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        tol = load_tolerances(args.tol_config)
        out = COMMANDS[args.command](args, tol)
        _emit(_render(out, args.format, args.command), args.out)
    except QMarkovError as exc:
        sys.stderr.write(dumps(error_document(exc)) + "\n")
        return exc.exit_status
    except (OSError, ValueError) as exc:
        sys.stderr.write(dumps(error_document(exc)) + "\n")
        return 2
    if args.command == "selftest" and not out["passed"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
