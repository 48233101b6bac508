"""Command line front end.

Exit codes: 0 when the check holds, 1 when the verdict is negative or
undecided, 2 on usage, parse or input errors.
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from .analysis import (
    DEFAULT_CAP, EnumerationCapExceeded, FreshnessError, check_deterministic, check_distributivity,
    enumerate_syntactic_schedulers, p_omega, pomega_values,
    require_fresh, test_lint, test_system, testing_preorder,
)
from .anonymity import (
    DcpConfig, anonymity_csv, anonymity_json, build_dcp, build_dcp_nondet, check_anonymity_nondet,
    check_strong_anonymity, sample_anonymity,
)
from .automata import DEFAULT_MAX_STATES, StateLimitExceeded, unfold_complete, unfold_process
from .export import (
    automaton_to_dot, automaton_to_json, distributivity_to_dict, dumps, frac, pomega_to_dict,
    validate_automaton_json, verdict_to_dict,
)
from .parser import ParseError, SourceUnit, format_action, format_process, format_scheduler, parse_source
from .semantics import STUCK_SCHEDULER, AmbiguousStep, CompleteState, Step, format_rule, step
from .terms import TermError, check_fresh, check_linear, label_multiset

DEFAULT_DEPTH = 30
EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _load(path: str) -> SourceUnit:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    return parse_source(text)


def _depth(args, unit: SourceUnit | None = None) -> int:
    if args.depth is not None:
        d = args.depth
    elif unit is not None and "depth" in unit.options:
        try:
            d = int(unit.options["depth"])
        except ValueError:
            raise UsageError(f"option depth must be an integer, got {unit.options['depth']!r}") from None
    else:
        d = DEFAULT_DEPTH
    if d < 0:
        raise UsageError("depth must be non-negative")
    return d


def _get(unit: SourceUnit, name: str, *kinds: str):
    try:
        return unit.get(name, *kinds)
    except KeyError as e:
        raise UsageError(e.args[0]) from None


def _emit(args, doc: dict, text: str):
    if getattr(args, "json", False):
        sys.stdout.write(dumps(doc))
    else:
        print(text)


def _dump_ambiguity(process, move, derivations) -> str:
    lines = [f"ambiguous: {move} in state", f"  {format_process(process)}",
             f"  {len(derivations)} derivations:"]
    for d in derivations:
        lines.append(f"    {format_rule(d.rule)}  action {format_action(d.action)}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# commands


def cmd_check(args) -> int:
    unit = _load(args.file)
    depth = _depth(args, unit)
    names = args.names or unit.names("process", "context", "test")
    status = EXIT_OK
    terms = {}
    for name in names:
        if name not in unit.declarations:
            raise UsageError(f"no declaration named {name!r}")
        kind, term = unit.declarations[name]
        if kind not in ("process", "context", "test"):
            raise UsageError(f"{name!r} is a {kind}; only processes, contexts and tests are checked")
        terms[name] = term
        if check_linear(term):
            print(f"{name}: linear")
        else:
            dup = sorted(str(lab) for lab, n in label_multiset(term).items() if n > 1)
            print(f"{name}: not linear, repeated labels {', '.join(dup)}")
        if kind == "test":
            for w in test_lint(term):
                print(f"{name}: warning: {w}")
        if kind == "context":
            continue
        try:
            v = check_deterministic(term, depth, args.max_states)
        except StateLimitExceeded as e:
            print(f"{name}: determinism undecided: {e}")
            status = EXIT_NEGATIVE
            continue
        if v.ok:
            print(f"{name}: {v}")
        else:
            print(f"{name}: " + _dump_ambiguity(v.process, v.move, v.derivations))
            status = EXIT_NEGATIVE
    # freshness of tests and contexts with respect to the processes
    for a, ta in terms.items():
        if unit.declarations[a][0] not in ("test", "context"):
            continue
        for b, tb in terms.items():
            if unit.declarations[b][0] != "process":
                continue
            if check_fresh(ta, [tb]):
                print(f"{a}: fresh for {b}")
            else:
                shared = sorted(str(x) for x in ta.labels & tb.labels)
                why = f"shares labels {', '.join(shared)}" if shared else "not linear"
                print(f"{a}: not fresh for {b} ({why})")
    return status


def cmd_run(args) -> int:
    unit = _load(args.file)
    depth = _depth(args, unit)
    p = _get(unit, args.process, "process")
    s = _get(unit, args.scheduler, "scheduler")
    t = _get(unit, args.indep, "scheduler") if args.indep else None

    def go(cs: CompleteState, pr: Fraction, indent: int, d: int):
        pad = "  " * indent
        r = step(cs)
        if not isinstance(r, Step):
            kind = "scheduler stops" if r is STUCK_SCHEDULER else "terminated"
            print(f"{pad}[{pr}] {kind}: {format_process(cs.process)}")
            return
        if d <= 0:
            print(f"{pad}[{pr}] cut at depth bound: {format_process(cs.process)}")
            return
        items = r.dist.items()
        for x, w in items:
            tag = f" ({w})" if len(items) > 1 else ""
            print(f"{pad}{r.move} -> {format_action(r.action)}{tag}")
            go(x, pr * w, indent + 1, d - 1)

    go(CompleteState(p, s, t), Fraction(1), 0, depth)
    return EXIT_OK


def cmd_schedulers(args) -> int:
    unit = _load(args.file)
    depth = _depth(args, unit)
    p = _get(unit, args.process, "process")
    if args.test:
        o = _get(unit, args.test, "test", "process")
        require_fresh(o, [p])
        p = test_system(p, o)
    t = _get(unit, args.indep, "scheduler") if args.indep else None
    classes = enumerate_syntactic_schedulers(p, depth, nonblocking=not args.blocking, indep=t, cap=args.cap)
    shown = classes if args.limit is None else classes[: args.limit]
    for i, c in enumerate(shown):
        print(f"{i}: {format_scheduler(c.scheduler)}")
    print(f"{len(classes)} scheduler classes")
    return EXIT_OK


def cmd_pomega(args) -> int:
    unit = _load(args.file)
    depth = _depth(args, unit)
    p = _get(unit, args.process, "process")
    o = _get(unit, args.test, "test", "process")
    require_fresh(o, [p])
    if args.scheduler:
        s = _get(unit, args.scheduler, "scheduler")
        r = p_omega(p, s, o, depth)
        _emit(args, pomega_to_dict(r), f"success {r.success}\nfailure {r.failure}\ntruncated {r.truncated}")
        return EXIT_OK
    values = pomega_values(p, o, depth, nonblocking=not args.blocking, cap=args.cap)
    ordered = sorted(values.items(), key=lambda kv: (kv[0].success, kv[0].failure))
    best = ordered[-1][0]
    worst = ordered[0][0]
    doc = {"max": frac(best.success), "min": frac(worst.success),
           "values": [dict(pomega_to_dict(r), scheduler=format_scheduler(s)) for r, s in ordered]}
    lines = [f"{r.success} (failure {r.failure}, truncated {r.truncated}) by {format_scheduler(s)}" for r, s in ordered]
    lines.append(f"max success {best.success}")
    lines.append(f"min success {worst.success}")
    _emit(args, doc, "\n".join(lines))
    return EXIT_OK


def _tests(unit: SourceUnit, names) -> list:
    if not names:
        names = unit.names("test")
    if not names:
        raise UsageError("no tests given and none declared")
    return [(n, _get(unit, n, "test", "process")) for n in names]


def cmd_preorder(args) -> int:
    unit = _load(args.file)
    depth = _depth(args, unit)
    p = _get(unit, args.left, "process")
    q = _get(unit, args.right, "process")
    v = testing_preorder(p, q, _tests(unit, args.tests), args.mode, depth, cap=args.cap)
    lines = []
    for c in v.details:
        vp = ", ".join(str(x) for x in c.values_p)
        vq = ", ".join(str(x) for x in c.values_q)
        lines.append(f"{c.test}: {args.left} {{{vp}}}  {args.right} {{{vq}}}  {_word(c.holds)}")
    lines.append(f"{args.mode} preorder {args.left} <= {args.right}: {_word(v.holds)} (depth {depth}, "
                 f"relative to tests {', '.join(v.tests)})")
    if v.witness is not None:
        w = v.witness
        lines.append(f"witness on {w.test}: {args.left} reaches {w.result_p.success} by "
                     f"{format_scheduler(w.scheduler_p)}; {args.right} best {w.result_q.success} by "
                     f"{format_scheduler(w.scheduler_q)}")
    _emit(args, verdict_to_dict(v), "\n".join(lines))
    return EXIT_OK if v.holds else EXIT_NEGATIVE


def _word(b) -> str:
    return {True: "holds", False: "fails", None: "undecided (truncated)"}[b]


def cmd_distributivity(args) -> int:
    unit = _load(args.file)
    depth = _depth(args, unit)
    c = _get(unit, args.context, "context")
    p = _get(unit, args.left, "process")
    q = _get(unit, args.right, "process")
    try:
        prob = Fraction(args.prob)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad probability {args.prob!r}") from None
    if not 0 < prob < 1:
        raise UsageError("probability must lie strictly between 0 and 1")
    r = check_distributivity(c, p, q, prob, _tests(unit, args.tests), depth, cap=args.cap)
    lines = [f"R1 = {format_process(r.r1)}", f"R2 = {format_process(r.r2)}"]
    for name, v1, v2, matched, trunc in r.per_test:
        a = ", ".join(str(x) for x in v1)
        b = ", ".join(str(x) for x in v2)
        lines.append(f"{name}: R1 {{{a}}}  R2 {{{b}}}  {'matched' if matched else 'differ'}"
                     + ("  (truncated)" if trunc else ""))
    for i in r.identities:
        lines.append(f"identity {i.name} on {i.test}: {'holds' if i.holds else 'fails'}"
                     + (f" ({i.detail})" if i.detail else ""))
    lines.append(f"may {_word(r.may)}, must {_word(r.must)}, overall {_word(r.holds)}")
    _emit(args, distributivity_to_dict(r), "\n".join(lines))
    return EXIT_OK if r.holds else EXIT_NEGATIVE


def _weights(text: str) -> tuple:
    try:
        return tuple(Fraction(x) for x in text.split(","))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad weights {text!r}") from None


def cmd_dcp(args) -> int:
    try:
        bias = Fraction(args.coin_bias)
        if args.nondet:
            cfg = DcpConfig(None, bias, args.n, args.sabotage)
        elif args.weights:
            cfg = DcpConfig(_weights(args.weights), bias, args.n, args.sabotage)
        else:
            cfg = DcpConfig.uniform(args.n, coin_bias=bias, sabotage=args.sabotage)
    except (ValueError, ZeroDivisionError) as e:
        raise UsageError(str(e)) from None
    depth = args.depth if args.depth is not None else 10 * cfg.n
    nondet = cfg.master_weights is None
    prot = build_dcp_nondet(cfg.n, cfg.sabotage) if nondet else build_dcp(cfg)
    if args.sample:
        v = sample_anonymity(prot, args.sample, args.seed, depth, nondet=nondet)
    elif nondet:
        v = check_anonymity_nondet(prot, depth, cap=args.cap)
    else:
        v = check_strong_anonymity(prot, depth, cap=args.cap, n=cfg.n)
    if args.csv:
        Path(args.csv).write_text(anonymity_csv(v), encoding="utf-8")
    if args.report:
        Path(args.report).write_text(dumps(anonymity_json(v)), encoding="utf-8")
    what = f"sampled outcomes ({args.sample} draws, seed {args.seed})" if args.sample else "scheduler classes"
    verdict = "no violation found" if args.sample and v.holds is None else _word(v.holds)
    lines = [f"{what}: {v.classes}", f"anonymity: {verdict}"]
    if v.witness is not None:
        w = v.witness
        obs = " ".join(f"{i}:{b}" for i, b in w.observable)
        probs = ", ".join(f"culprit {t}: {p}" for t, p in w.probabilities)
        lines.append(f"witness observable {obs}: {probs}")
        lines.append(f"witness scheduler {format_scheduler(w.scheduler)}")
    _emit(args, anonymity_json(v), "\n".join(lines))
    return EXIT_OK if v.holds else EXIT_NEGATIVE


def cmd_export(args) -> int:
    unit = _load(args.file)
    depth = _depth(args, unit)
    p = _get(unit, args.process, "process")
    if args.scheduler:
        s = _get(unit, args.scheduler, "scheduler")
        t = _get(unit, args.indep, "scheduler") if args.indep else None
        m = unfold_complete(CompleteState(p, s, t), depth, args.max_states)
    else:
        m = unfold_process(p, depth, args.max_states)
    if args.format == "dot":
        text = automaton_to_dot(m, name=args.process, terms=not args.numbers)
    else:
        doc = automaton_to_json(m)
        validate_automaton_json(doc)
        text = dumps(doc)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# wiring


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ccs-sigma", description="Labeled probabilistic CCS with syntactic schedulers.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--depth", type=int, default=None,
                        help=f"step bound (default: file option 'depth', else {DEFAULT_DEPTH})")
    common.add_argument("--max-states", type=int, default=DEFAULT_MAX_STATES, help="state cap for explorations")
    common.add_argument("--cap", type=int, default=DEFAULT_CAP, help="cap on outcomes per scheduler group")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="linearity, freshness and determinism of declarations")
    p.add_argument("file")
    p.add_argument("names", nargs="*", help="declarations to check (default: all terms)")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("run", parents=[common], help="run a process under a scheduler and print the execution tree")
    p.add_argument("file")
    p.add_argument("process")
    p.add_argument("scheduler")
    p.add_argument("--indep", help="independent scheduler for protected blocks")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("schedulers", parents=[common], help="enumerate scheduler classes")
    p.add_argument("file")
    p.add_argument("process")
    p.add_argument("--test", help="enumerate for the process tested by this declaration")
    p.add_argument("--indep")
    p.add_argument("--blocking", action="store_true", help="also list blocking schedulers")
    p.add_argument("--limit", type=int)
    p.set_defaults(func=cmd_schedulers)

    p = sub.add_parser("pomega", parents=[common], help="probability of passing a test")
    p.add_argument("file")
    p.add_argument("process")
    p.add_argument("test")
    p.add_argument("scheduler", nargs="?", help="scheduler declaration; omit to range over all schedulers")
    p.add_argument("--blocking", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_pomega)

    p = sub.add_parser("preorder", parents=[common], help="may or must testing preorder")
    p.add_argument("file")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--mode", choices=["may", "must"], default="may")
    p.add_argument("--tests", nargs="+", help="test declarations (default: all tests)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_preorder)

    p = sub.add_parser("distributivity", parents=[common], help="check an instance of distributivity over a context")
    p.add_argument("file")
    p.add_argument("context")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--prob", default="1/2")
    p.add_argument("--tests", nargs="+")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_distributivity)

    p = sub.add_parser("dcp", parents=[common], help="dining cryptographers anonymity check")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--weights", help="master weights, comma separated (default uniform)")
    p.add_argument("--nondet", action="store_true", help="protected nondeterministic master")
    p.add_argument("--coin-bias", default="1/2")
    p.add_argument("--sabotage", action="store_true", help="give the master branches distinct labels")
    p.add_argument("--sample", type=int, default=0, metavar="N",
                   help="check N random schedulers instead of all (for larger rings)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", help="write per-scheduler conditional distributions as CSV")
    p.add_argument("--report", help="write the JSON report to this file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_dcp)

    p = sub.add_parser("export", parents=[common], help="export an automaton as DOT or JSON")
    p.add_argument("file")
    p.add_argument("process")
    p.add_argument("scheduler", nargs="?")
    p.add_argument("--indep")
    p.add_argument("--format", choices=["dot", "json"], default="dot")
    p.add_argument("--numbers", action="store_true", help="label DOT nodes by number only")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_export)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as e:
        print(f"{args.file}:{e}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, FreshnessError, TermError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except AmbiguousStep as e:
        print(_dump_ambiguity(e.process, e.move, e.derivations), file=sys.stderr)
        return EXIT_NEGATIVE
    except (EnumerationCapExceeded, StateLimitExceeded) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NEGATIVE


if __name__ == "__main__":
    sys.exit(main())
