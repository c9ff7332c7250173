"""Command-line front end: ``amalgamkit <command> ...``.

Exit status is 0 on success, 1 when a verification fails and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import portraits as P
from .acceptance import CRITERIA, DEFAULT_SEED, run_all
from .bass_serre import build_ball, export_ball
from .finite_groups import BUILTIN_FINITE, AmalgamSpec, ClosureLimitError, FiniteAmalgam, builtin_spec
from .gamma import (
    GAMMA,
    WordSyntaxError,
    format_theta,
    generating_set_check,
    in_gamma_prime,
    relation_instances,
    conjugation_identity_suite,
    theta,
    verify_presentation,
)
from .kernels import (
    ConjugationWitness,
    chain_sweep,
    classify_finite_H,
    conjugate_out,
    k0k1_fixed_point,
    k_truncated,
    kernel_truncated,
    verify_conjugated_out,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# -- group selection -----------------------------------------------------
def resolve_group(args):
    """The amalgam named by ``--group`` or ``--spec``; specs resolve to FiniteAmalgam."""
    if args.spec is not None:
        path = args.spec
        if not os.path.exists(path):
            stem = os.path.splitext(os.path.basename(path))[0]
            if stem in BUILTIN_FINITE:
                return builtin_spec(stem).amalgam()
            raise UsageError(f"spec file not found: {path}")
        try:
            return AmalgamSpec.load(path).amalgam()
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            raise UsageError(f"invalid spec {path}: {exc}") from None
    name = args.group or "gamma"
    if name == "gamma":
        return GAMMA
    if name in BUILTIN_FINITE:
        return builtin_spec(name).amalgam()
    raise UsageError(f"unknown group {name!r}; choose gamma, {', '.join(BUILTIN_FINITE)} or --spec")


def parse_element(am, text: str):
    try:
        return am.word(text)
    except WordSyntaxError as exc:
        raise UsageError(f"{exc} (position {exc.position})") from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def need_gamma(am, command: str):
    if am is not GAMMA:
        raise UsageError(f"{command} is only defined for --group gamma")


def need_finite(am, command: str):
    if not isinstance(am, FiniteAmalgam):
        raise UsageError(f"{command} needs a finite amalgam (--spec or a finite builtin)")


def describe_subgroup(group, elements) -> str:
    """Short isomorphism label for small subgroups: {e}, Zn, or order n."""
    elements = sorted(elements)
    n = len(elements)
    if n == 1:
        return "{e}"
    for x in elements:
        k, y = 1, x
        while y != 0:
            y = group.mul(y, x)
            k += 1
        if k == n:
            return f"Z{n}"
    return f"order {n}"


# -- output --------------------------------------------------------------
def emit(report: dict, as_json: bool, text_lines) -> None:
    if as_json:
        print(json.dumps(report, sort_keys=True, indent=2))
    else:
        for line in text_lines:
            print(line)


def _kv(d: dict):
    for k in sorted(d):
        v = d[k]
        if isinstance(v, bool):
            v = "yes" if v else "no"
        elif isinstance(v, (list, tuple)):
            v = ", ".join(map(str, v)) if v else "-"
        elif v is None:
            v = "-"
        yield f"{k}: {v}"


# -- commands ------------------------------------------------------------
def cmd_reduce(args) -> int:
    am = resolve_group(args)
    x = parse_element(am, args.word)
    emit(
        {"group": am.name, "input": args.word, "normal_form": am.format(x), "length": len(x)},
        args.json,
        [am.format(x)],
    )
    return EXIT_OK


def cmd_mul(args) -> int:
    am = resolve_group(args)
    x = am.prod(*(parse_element(am, w) for w in args.words))
    emit({"group": am.name, "factors": args.words, "product": am.format(x)}, args.json, [am.format(x)])
    return EXIT_OK


def cmd_verify_presentation(args) -> int:
    need_gamma(resolve_group(args), "verify-presentation")
    failures = verify_presentation(args.max_len)
    n = sum(1 for _ in relation_instances(args.max_len))
    identities = conjugation_identity_suite(args.identity_depth)
    gens = generating_set_check(min(args.identity_depth, 2))
    ok = not failures and all(r.passed for r in identities) and gens
    report = {
        "max_len": args.max_len,
        "instances": n,
        "failures": failures,
        "identity_depth": args.identity_depth,
        "identities": [r.to_dict() for r in identities],
        "generating_set": gens,
        "passed": ok,
    }
    lines = [f"{n} relation instances checked (index words up to length {args.max_len})"]
    lines += [f"FAILED: {f}" for f in failures]
    for r in identities:
        tail = "" if r.passed else f" counterexample {r.counterexample}"
        lines.append(f"[{'ok' if r.passed else 'FAIL'}] {r.name} ({r.checked} checked){tail}")
    lines.append(f"[{'ok' if gens else 'FAIL'}] h(0..0), h(1,0..0) generate B_{min(args.identity_depth, 2)}")
    lines.append("PASS" if ok else "FAIL")
    emit(report, args.json, lines)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_kernel(args) -> int:
    am = resolve_group(args)
    if isinstance(am, FiniteAmalgam):
        rep = k0k1_fixed_point(am)
        H = am.spec.H
        d = rep.to_dict()
        d["ker_type"] = describe_subgroup(H, rep.ker)
        d["ker_equals_H"] = len(rep.ker) == H.order
        d["group"] = am.name
        lines = [
            f"group: {am.name}",
            f"K0 = {describe_subgroup(H, rep.K0)}: {', '.join(d['K0'])}",
            f"K1 = {describe_subgroup(H, rep.K1)}: {', '.join(d['K1'])}",
            f"ker = {d['ker_type']}: {', '.join(d['ker'])}" + (" (= H)" if d["ker_equals_H"] else ""),
            f"chain stabilized at k = {rep.stabilized_at}",
        ]
        emit(d, args.json, lines)
        return EXIT_OK
    rep = k_truncated(args.depth, args.side, args.max_len, args.jobs)
    expected = {p for p in P.enumerate_truncation(args.depth) if P.in_prefix_subgroup(p, (args.side,), 1)}
    ok = rep.member_set() == expected and not rep.undecided
    d = rep.to_dict()
    d["matches_prefix_subgroup"] = ok
    lines = [
        f"K{args.side} n B{args.depth} (conjugators up to length {args.max_len}): {len(rep.members)} members",
        f"excluded: {len(rep.excluded)}; undecided: {len(rep.undecided)}",
        "exclusion lengths: " + ", ".join(f"{k}:{v}" for k, v in d["exclusion_lengths"].items()),
        f"equals H({args.side}) n B{args.depth}: {'yes' if ok else 'no'}",
    ]
    lines += [f"UNDECIDED: {p}" for p in rep.undecided]
    if args.with_ker:
        ker = kernel_truncated(args.depth, args.max_len, args.jobs)
        d["ker"] = sorted(str(p) for p in ker)
        lines.append(f"ker n B{args.depth}: {', '.join(d['ker'])}")
        ok = ok and ker == {P.Portrait.identity()}
    emit(d, args.json, lines)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_classify(args) -> int:
    am = resolve_group(args)
    need_finite(am, "classify")
    rep = classify_finite_H(am.spec, args.search_len, args.conj_len)
    d = rep.to_dict()
    d["group"] = am.name
    d["ker_type"] = describe_subgroup(am.spec.H, rep.kernel.ker)
    flat = {k: v for k, v in d.items() if k != "kernel"}
    flat["ker"] = d["kernel"]["ker"]
    emit(d, args.json, list(_kv(flat)))
    return EXIT_OK if rep.all_equivalent else EXIT_FAIL


def cmd_c_chain(args) -> int:
    am = resolve_group(args)
    if isinstance(am, FiniteAmalgam):
        rep = k0k1_fixed_point(am)
        rows = [
            {"k": k, "A": len(a), "B": len(b), "C": len(a & b)} for k, (a, b) in enumerate(rep.chain)
        ]
        lines = [f"k={r['k']}: |A|={r['A']} |B|={r['B']} |C|={r['C']}" for r in rows]
        emit({"group": am.name, "chain": rows, "stabilized_at": rep.stabilized_at}, args.json, lines)
        return EXIT_OK
    rows = []
    for k in range(1, args.k + 1):
        rows.append({"k": k, "count": len(chain_sweep(args.depth, args.side, k, args.jobs))})
    total = P.truncation_size(args.depth)
    lines = [f"B{args.depth}: {total} elements"]
    lines += [f"n_(i<={r['k']}) C_{args.side},i: {r['count']}" for r in rows]
    emit({"depth": args.depth, "j": args.side, "total": total, "chain": rows}, args.json, lines)
    return EXIT_OK


def cmd_conjugate_out(args) -> int:
    am = resolve_group(args)
    if args.element:
        F = [parse_element(am, w) for w in args.element]
    elif isinstance(am, FiniteAmalgam):
        F = [am.from_H(h) for h in am.h_elements() if h != 0]
    else:
        raise UsageError("give the elements of F with --element")
    if any(not f.in_H() for f in F):
        raise UsageError("every element of F must lie in H")
    if any(am.is_identity(f) for f in F):
        raise UsageError("F must not contain the identity")
    out = conjugate_out(am, F, args.max_len)
    d = out.to_dict(am)
    d["F"] = [am.format(f) for f in F]
    if isinstance(out, ConjugationWitness):
        ok = verify_conjugated_out(am, F, out.r)
        d["verified"] = ok
        lines = [f"r = {am.format(out.r)}", f"verified: {'yes' if ok else 'no'}"]
        lines += [f"step: element {am.format(F[i])} out via {am.format(p)}" for i, p in out.trace]
        emit(d, args.json, lines)
        return EXIT_OK if ok else EXIT_FAIL
    lines = [
        f"FAILED: could not move {am.format(out.stuck)} out of H",
        f"searched {out.words_tried} even words up to length {out.bound}",
        f"partial r = {am.format(out.partial)}",
    ]
    emit(d, args.json, lines)
    return EXIT_FAIL


def cmd_theta(args) -> int:
    need_gamma(resolve_group(args), "theta")
    x = parse_element(GAMMA, args.word)
    t = theta(x)
    d = {"word": args.word, "theta": list(t), "in_gamma_prime": in_gamma_prime(x)}
    emit(d, args.json, [format_theta(t)])
    return EXIT_OK


def cmd_tree(args) -> int:
    am = resolve_group(args)
    try:
        ball = build_ball(am, args.radius)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.format == "summary" or args.json:
        degs = sorted({ball.degree(v) for v in ball.interior()})
        d = {
            "radius": ball.radius,
            "vertices": len(ball.vertices),
            "edges": len(ball.edges),
            "interior_degrees": degs,
            "is_tree": len(ball.edges) == len(ball.vertices) - 1,
        }
        emit(d, args.json, list(_kv(d)))
    else:
        sys.stdout.write(export_ball(ball, args.format))
        if args.format == "json":
            sys.stdout.write("\n")
    return EXIT_OK


def cmd_selftest(args) -> int:
    only = set(args.only or [])
    bad = only - {c.number for c in CRITERIA}
    if bad:
        raise UsageError(f"unknown criteria {sorted(bad)}")
    ok = run_all(seed=args.seed, jobs=args.jobs, only=only or None)
    print("ALL PASS" if ok else "SOME CRITERIA FAILED")
    return EXIT_OK if ok else EXIT_FAIL


# -- parser --------------------------------------------------------------
def _common(p, group=True):
    if group:
        g = p.add_mutually_exclusive_group()
        g.add_argument("--group", help=f"gamma (default) or a finite builtin: {', '.join(BUILTIN_FINITE)}")
        g.add_argument("--spec", help="JSON amalgam spec file")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for randomized checks")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="amalgamkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("reduce", help="normal form of a word")
    _common(p)
    p.add_argument("word", help='e.g. "g0 h:10 g1" (gamma) or "0:(0,1) h:(0,1)" (finite)')
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("mul", help="product of words, in normal form")
    _common(p)
    p.add_argument("words", nargs="+")
    p.set_defaults(func=cmd_mul)

    p = sub.add_parser("verify-presentation", help="check the defining relations of gamma")
    _common(p)
    p.add_argument("--max-len", type=int, default=5)
    p.add_argument("--identity-depth", type=int, choices=range(4), default=2, help="truncation for the identity suite")
    p.set_defaults(func=cmd_verify_presentation)

    p = sub.add_parser("kernel", help="one-sided kernels and ker of the amalgam")
    _common(p)
    p.add_argument("--depth", type=int, default=3, help="truncation depth (gamma)")
    p.add_argument("--side", type=int, choices=(0, 1), default=0)
    p.add_argument("--max-len", type=int, default=6, help="conjugator length bound (gamma)")
    p.add_argument("--with-ker", action="store_true", help="also compute ker at the truncation (gamma)")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("classify", help="finite-H criteria for trivial kernel")
    _common(p)
    p.add_argument("--search-len", type=int, default=6)
    p.add_argument("--conj-len", type=int, default=8)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("c-chain", help="sizes of the intersections C_k")
    _common(p)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--side", type=int, choices=(0, 1), default=0)
    p.add_argument("-k", type=int, default=2, help="largest word length (gamma)")
    p.set_defaults(func=cmd_c_chain)

    p = sub.add_parser("conjugate-out", help="find r moving every element of F out of H")
    _common(p)
    p.add_argument("--element", action="append", help="element of F (repeatable); default H minus e")
    p.add_argument("--max-len", type=int, default=8)
    p.set_defaults(func=cmd_conjugate_out)

    p = sub.add_parser("theta", help="the sign homomorphism onto Z2 x Z2")
    _common(p)
    p.add_argument("--word", required=True)
    p.set_defaults(func=cmd_theta)

    p = sub.add_parser("tree", help="ball in the Bass-Serre tree")
    _common(p)
    p.add_argument("--radius", type=int, default=3)
    p.add_argument("--format", choices=("dot", "json", "summary"), default="dot")
    p.set_defaults(func=cmd_tree)

    p = sub.add_parser("selftest", help="run the acceptance suite")
    _common(p, group=False)
    p.add_argument("--only", type=int, action="append", help="criterion number (repeatable)")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        sub = parser._subparsers._group_actions[0].choices[args.command]
        print(f"error: {exc}", file=sys.stderr)
        sub.print_help(sys.stderr)
        return EXIT_USAGE
    except ClosureLimitError as exc:
        print(f"error: {exc} (raise AMALGAM_MAX_CLOSURE to allow larger groups)", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
