"""Command-line front end.

Subcommands: gen (instance generators), test (identity tester), estimate
(plug-in tolerant tester), bench (Monte Carlo grids to CSV), verify (exact
construction checks).  Output is line-oriented key=value pairs.

Exit codes: 0 ok, 2 usage error, 3 construction error, 4 malformed input
file, 5 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from .dist import Pmf, load_samples, pmf_from_dict, pmf_to_dict, tv_distance
from .errors import (
    ConstructionError,
    DimensionError,
    FileFormatError,
    ParameterError,
    SearchBudgetError,
    VerificationError,
)
from .harness import ExperimentConfig, run_experiment, summarize, write_csv
from .instances import (
    build_cfr,
    cfr_distances,
    family_member,
    mult_rational_checks,
    multiplicative_instance,
    random_sorted_pair,
    save_instance,
    testing_lb_perturbation,
    testing_lb_reference,
    testing_lb_predicted_tv,
)
from .moments import find_moment_pair
from .rng import derive_seed
from .tester import (
    estimate_tv_from_draws,
    identity_test_from_draws,
    permutation_identity_test,
    plugin_tolerant_test,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONSTRUCTION = 3
EXIT_MALFORMED = 4
EXIT_VERIFY = 5


def _emit(**pairs) -> None:
    for key, value in pairs.items():
        print(f"{key}={value}")


def _frac_str(fr: Fraction) -> str:
    return f"{fr.numerator}/{fr.denominator}"


def _load_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FileFormatError(f"cannot read {path}: {exc}") from exc


def _load_reference(path) -> Pmf:
    """Accept a bare pmf file or any instance file (takes its reference)."""
    obj = _load_json(path)
    if isinstance(obj, dict) and "reference" in obj:
        return pmf_from_dict(obj["reference"])
    return pmf_from_dict(obj)


def _load_member(path, which: str | None) -> Pmf:
    """Member pmf from a bare pmf file, a hard-instance, or a pair file."""
    obj = _load_json(path)
    if not isinstance(obj, dict):
        raise FileFormatError(f"{path} is not a JSON object")
    fmt = obj.get("format")
    if fmt == "hard-instance":
        return pmf_from_dict(obj["member"])
    if fmt == "instance-pair":
        if which is None:
            raise ParameterError(
                "file holds close and far members; pick one with --which"
            )
        try:
            return pmf_from_dict(obj["members"][which]["member"])
        except KeyError as exc:
            raise FileFormatError(f"pair file lacks member {which!r}") from exc
    return pmf_from_dict(obj)


# --- gen --------------------------------------------------------------------


def _gen_mult(args) -> int:
    blocks = args.blocks or 1
    kinds = ("close", "far") if args.which in (None, "both") else (args.which,)
    insts = {
        kind: multiplicative_instance(args.C, blocks, kind, derive_seed(args.seed, i))
        for i, kind in enumerate(kinds)
    }
    first = next(iter(insts.values()))
    _emit(
        family="mult",
        C=args.C,
        blocks=blocks,
        n=first.n,
        w=first.params["w"],
        s=first.params["s"],
    )
    for kind, inst in insts.items():
        _emit(**{
            f"true_tv_{kind}": inst.true_tv,
            f"true_tv_{kind}_exact": inst.params["true_tv_exact"],
        })
    if args.out:
        if len(insts) == 1:
            save_instance(first, args.out)
        else:
            close, far = insts["close"], insts["far"]
            obj = {
                "format": "instance-pair",
                "family": "mult",
                "n": close.n,
                "params": {"C": args.C, "blocks": blocks, "seed": args.seed,
                           "w": close.params["w"], "s": close.params["s"]},
                "reference": pmf_to_dict(close.reference),
                "members": {
                    kind: {
                        "member": pmf_to_dict(inst.member),
                        "witness": [int(x) for x in inst.witness.mapping],
                        "true_tv": inst.true_tv,
                        "params": inst.params,
                    }
                    for kind, inst in insts.items()
                },
            }
            with open(args.out, "w", encoding="utf-8") as fh:
                json.dump(obj, fh)
                fh.write("\n")
        _emit(out=args.out)
    return EXIT_OK


def _gen_testing_lb(args) -> int:
    if args.n is None or args.epsilon is None:
        raise ParameterError("testing-lb needs --n and --epsilon")
    reference, cfg = testing_lb_reference(args.n, args.epsilon)
    inst = testing_lb_perturbation(cfg, args.seed)
    _emit(
        family="testing-lb",
        n=cfg.n,
        L=cfg.num_levels,
        dev_delta=_frac_str(Fraction(1, 9 * (cfg.num_levels - 2))),
        used=cfg.used,
        swap_base=cfg.swap_base,
        predicted_tv=testing_lb_predicted_tv(cfg),
        true_tv=inst.true_tv,
    )
    if args.out:
        save_instance(inst, args.out)
        _emit(out=args.out)
    return EXIT_OK


def _gen_cfr(args) -> int:
    if args.order is not None:
        pair = find_moment_pair(k_max=args.k or 8, order=args.order)
        p, q = pair.p, pair.q
    elif args.k is not None:
        p, q = random_sorted_pair(args.k, derive_seed(args.seed, 0xBA5E))
    else:
        raise ParameterError("cfr needs --k or --order")
    triple = build_cfr(p, q)
    tv_cr, tv_fr, tv_pq = cfr_distances(triple)
    which = (args.which or "c").upper()
    inst = family_member(triple, which, args.blocks or 1, args.seed)
    _emit(
        family=f"cfr-{which.lower()}",
        k=triple.k,
        blocks=args.blocks or 1,
        n=inst.n,
        tv_c_r=tv_cr,
        tv_f_r=tv_fr,
        tv_base_pair=tv_pq,
        true_tv=inst.true_tv,
    )
    if args.out:
        save_instance(inst, args.out)
        _emit(out=args.out)
    return EXIT_OK


def _gen_moment_pair(args) -> int:
    if args.order is None:
        raise ParameterError("moment-pair needs --order")
    pair = find_moment_pair(k_max=args.k or 8, order=args.order)
    _emit(
        family="moment-pair",
        order=pair.order,
        k=pair.k,
        values_p=",".join(str(v) for v in pair.values_p),
        values_q=",".join(str(v) for v in pair.values_q),
        total=pair.total,
        power_sums=";".join(_frac_str(fr) for fr in pair.power_sums),
        tv=tv_distance(pair.p, pair.q),
    )
    if args.out:
        obj = {
            "format": "moment-pair",
            "order": pair.order,
            "k": pair.k,
            "total": pair.total,
            "values_p": list(pair.values_p),
            "values_q": list(pair.values_q),
            "p": pmf_to_dict(pair.p),
            "q": pmf_to_dict(pair.q),
        }
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(obj, fh)
            fh.write("\n")
        _emit(out=args.out)
    return EXIT_OK


def cmd_gen(args) -> int:
    handlers = {
        "mult": _gen_mult,
        "testing-lb": _gen_testing_lb,
        "cfr": _gen_cfr,
        "moment-pair": _gen_moment_pair,
    }
    return handlers[args.family](args)


# --- test / estimate --------------------------------------------------------


def cmd_test(args) -> int:
    reference = _load_reference(args.q)
    if args.samples:
        draws = load_samples(args.samples).draws
        verdict = identity_test_from_draws(reference, args.epsilon, draws)
    else:
        member = _load_member(args.simulate, args.which)
        verdict = permutation_identity_test(
            reference,
            args.epsilon,
            member,
            args.seed,
            num_samples=args.num_samples,
        )
    _emit(
        decision=verdict.decision,
        tail_mass_hat=verdict.tail_mass_hat,
        max_suffix_dev=verdict.max_suffix_dev,
        argmax_suffix=verdict.argmax_suffix,
        samples_used=verdict.samples_used,
    )
    return EXIT_OK


def cmd_estimate(args) -> int:
    reference = _load_reference(args.q)
    if args.samples:
        draws = load_samples(args.samples).draws
        est = estimate_tv_from_draws(reference, draws)
        mid = (args.eps_close + args.eps_far) / 2.0
        _emit(
            tv_estimate=est,
            samples_used=draws.size,
            decision="YES" if est <= mid else "NO",
        )
    else:
        member = _load_member(args.simulate, args.which)
        verdict = plugin_tolerant_test(
            reference,
            args.eps_close,
            args.eps_far,
            member,
            args.seed,
            num_samples=args.num_samples,
        )
        _emit(
            tv_estimate=verdict.tv_estimate,
            samples_used=verdict.samples_used,
            decision=verdict.decision,
        )
    return EXIT_OK


# --- bench ------------------------------------------------------------------


def cmd_bench(args) -> int:
    obj = _load_json(args.config)
    cfg = ExperimentConfig.from_dict(obj)
    cfg.validate()
    summaries = summarize(run_experiment(cfg))
    write_csv(args.out, cfg, summaries)
    _emit(out=args.out, rows=len(summaries))
    return EXIT_OK


# --- verify -----------------------------------------------------------------


def _verify_mult(args) -> int:
    for C in args.C:
        for name, ok, detail in mult_rational_checks(C):
            if not ok:
                raise VerificationError(f"C={C} {name}: {detail}")
            _emit(**{f"ok_C{C}_{name}": detail})
        inst = multiplicative_instance(C, 2, "far", seed=derive_seed(args.seed, C))
        inst.check()
        _emit(**{f"ok_C{C}_instance_integrity": f"n={inst.n}"})
    return EXIT_OK


def _verify_cfr(args) -> int:
    # Worked k=2 example: the gap inequality holds with equality at 1/8.
    p = Pmf(np.array([0.5, 0.5]))
    q = Pmf(np.array([0.25, 0.75]))
    tv_cr, tv_fr, tv_pq = cfr_distances(build_cfr(p, q))
    if abs((tv_fr - tv_cr) - 0.125) > 1e-15 or abs(tv_pq - 0.25) > 1e-15:
        raise VerificationError(
            f"k=2 worked example: gap {tv_fr - tv_cr!r}, tv(p,q) {tv_pq!r}"
        )
    _emit(ok_worked_example=f"gap={tv_fr - tv_cr}")
    for i in range(args.pairs):
        k = 2 + (i % 7)
        p, q = random_sorted_pair(k, derive_seed(args.seed, i))
        tv_cr, tv_fr, tv_pq = cfr_distances(build_cfr(p, q))
        if tv_fr + 1e-12 < tv_cr + tv_pq / k:
            raise VerificationError(
                f"gap inequality fails at pair {i} (k={k}): "
                f"tv(f,r)={tv_fr!r} < tv(c,r)+tv(p,q)/k={tv_cr + tv_pq / k!r}"
            )
    _emit(ok_gap_inequality=f"pairs={args.pairs}")
    return EXIT_OK


def _verify_instances(args) -> int:
    count = 0
    for i in range(args.count):
        seed = derive_seed(args.seed, i)
        kind = i % 4
        try:
            if kind == 0:
                _, cfg = testing_lb_reference(4096, 0.05)
                testing_lb_perturbation(cfg, seed)
            elif kind == 1:
                p, q = random_sorted_pair(2 + i % 5, seed)
                family_member(build_cfr(p, q), "CF"[i % 2], 1 + i % 7, seed)
            else:
                multiplicative_instance(2 + i % 3, 1 + i % 5,
                                        "close" if kind == 2 else "far", seed)
        except ConstructionError as exc:
            raise VerificationError(f"instance {i}: {exc}") from exc
        count += 1
    _emit(ok_instances=count)
    return EXIT_OK


def cmd_verify(args) -> int:
    handlers = {
        "mult": _verify_mult,
        "cfr": _verify_cfr,
        "instances": _verify_instances,
    }
    return handlers[args.family](args)


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="permtest",
        description="Identity testing under a permutation promise: "
        "testers, exact hard instances, Monte Carlo harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a hard instance")
    gen.add_argument("--family", required=True,
                     choices=["mult", "testing-lb", "cfr", "moment-pair"])
    gen.add_argument("--n", type=int)
    gen.add_argument("--epsilon", type=float)
    gen.add_argument("--C", type=int, default=2)
    gen.add_argument("--k", type=int)
    gen.add_argument("--order", type=int)
    gen.add_argument("--blocks", type=int)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--which", choices=["close", "far", "both", "c", "f"])
    gen.add_argument("--out")
    gen.set_defaults(func=cmd_gen)

    test = sub.add_parser("test", help="run the identity tester")
    test.add_argument("--q", required=True, help="reference pmf or instance JSON")
    test.add_argument("--epsilon", type=float, required=True)
    src = test.add_mutually_exclusive_group(required=True)
    src.add_argument("--samples", help="file of newline-separated draws")
    src.add_argument("--simulate", help="pmf or instance JSON to sample from")
    test.add_argument("--seed", type=int, default=0)
    test.add_argument("--which", choices=["close", "far"])
    test.add_argument("--num-samples", type=int)
    test.set_defaults(func=cmd_test)

    est = sub.add_parser("estimate", help="plug-in tolerant distance test")
    est.add_argument("--q", required=True)
    est.add_argument("--eps-close", type=float, required=True)
    est.add_argument("--eps-far", type=float, required=True)
    src = est.add_mutually_exclusive_group(required=True)
    src.add_argument("--samples")
    src.add_argument("--simulate")
    est.add_argument("--seed", type=int, default=0)
    est.add_argument("--which", choices=["close", "far"])
    est.add_argument("--num-samples", type=int)
    est.set_defaults(func=cmd_estimate)

    bench = sub.add_parser("bench", help="run an experiment grid, write CSV")
    bench.add_argument("--config", required=True)
    bench.add_argument("--out", required=True)
    bench.set_defaults(func=cmd_bench)

    verify = sub.add_parser("verify", help="exact construction checks")
    verify.add_argument("--family", required=True,
                        choices=["mult", "cfr", "instances"])
    verify.add_argument("--C", type=int, nargs="+", default=[2, 3, 4, 5])
    verify.add_argument("--pairs", type=int, default=100)
    verify.add_argument("--count", type=int, default=40)
    verify.add_argument("--seed", type=int, default=0)
    verify.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConstructionError as exc:
        print(f"construction error: {exc}", file=sys.stderr)
        return EXIT_CONSTRUCTION
    except (FileFormatError, DimensionError) as exc:
        print(f"bad input: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except SearchBudgetError as exc:
        print(f"search exhausted: {exc}", file=sys.stderr)
        return EXIT_CONSTRUCTION
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
