"""Command-line interface: ``disorderly <command> ...``.

Exit codes: 0 success, 1 verification mismatch, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from . import analysis
from .compiler import CompileError, compile_program, compile_universal_mA
from .experiments import SCENARIOS, run_experiment, solve_via_netsim
from .games import (
    GameGraph,
    retrograde_solve,
    solve_via_disorderly,
    solve_via_wf,
)
from .netsim import (
    FaultSpec,
    NetworkError,
    distribute_input,
    parse_policy,
    parse_topology,
    run_fair,
    run_heartbeat_only,
)
from .parser import ProgramError, parse_facts, parse_program
from .syntax import Fact, Program, format_program
from .transducer import TransducerError, format_transducer, parse_transducer
from .updates import (
    BudgetExceeded,
    Fixpoint,
    NonTermination,
    det_eval,
    disorderly_result_set,
    disorderly_run,
    iter_trace_lines,
    nondet_result_set,
    nondet_run,
)
from .wellfounded import doubled_program_eval, well_founded_model

OK, MISMATCH, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from e


def _program(path: str) -> Program:
    return parse_program(_read(path))


def _facts(path: str | None, p: Program | None = None) -> frozenset[Fact]:
    if path is None:
        return frozenset()
    return parse_facts(_read(path), p.schema.arities if p is not None else None)


def _fmt_set(facts) -> str:
    return "{" + ", ".join(sorted(str(f) for f in facts)) + "}"


def _fmt_tuple(t: tuple[str, ...]) -> str:
    return t[0] if len(t) == 1 else "(" + ",".join(t) + ")"


def _write_trace(path: str | None, lines) -> None:
    if path is not None:
        Path(path).write_text("".join(line + "\n" for line in lines))


# commands -------------------------------------------------------------------

def cmd_parse(args) -> int:
    p = parse_program(_read(args.program), args.dialect)
    sys.stdout.write(format_program(p))
    return OK


def cmd_check(args) -> int:
    p = _program(args.program)
    s = p.schema
    rows = [
        ("dialect", p.dialect.value),
        ("rules", str(len(p.rules))),
        ("edb", " ".join(sorted(s.edb)) or "-"),
        ("eidb", " ".join(sorted(s.eidb)) or "-"),
        ("idb", " ".join(sorted(s.idb)) or "-"),
        ("stratifiable", str(analysis.is_stratifiable(p)).lower()),
        ("semi-positive", str(analysis.is_semi_positive(p)).lower()),
        ("semi-monotone", str(analysis.is_semi_monotone(p)).lower()),
        ("friendly", str(analysis.is_friendly(p)).lower()),
        ("projection", str(analysis.is_projection_program(p)).lower()),
        ("max-negated-eidb", str(analysis.max_negated_eidb_per_rule(p))),
    ]
    if analysis.is_stratifiable(p):
        strata = analysis.stratify(p)
        rows.append(("strata", " | ".join(" ".join(sorted(x)) for x in strata)))
    for k, v in rows:
        print(f"{k:<23}{v}")
    if args.facts:
        from .updates import check_properties

        rep = check_properties(p, [_facts(args.facts, p)], args.bound)[0]
        for k in ("functional", "terminating", "eventually_consistent"):
            v = getattr(rep, k)
            print(f"{k.replace('_', '-'):<23}{'unknown' if v is None else str(v).lower()}")
    return OK


def cmd_wf(args) -> int:
    p = _program(args.program)
    edb = _facts(args.facts, p)
    m = well_founded_model(p, edb)
    idb = p.schema.idb
    for label, facts in (("true", m.true_facts), ("false", m.false_facts), ("undef", m.undef_facts)):
        print(f"{label}: {_fmt_set(f for f in facts if f.pred in idb)}")
    if args.trace:
        trace = doubled_program_eval(p, edb)
        for pred in sorted(idb):
            if len(idb) > 1:
                print(f"{pred}:")
            for label, tuples in trace.table(pred):
                print(f"{label:<4} {{{','.join(sorted(_fmt_tuple(t) for t in tuples))}}}")
    return OK


def cmd_eval(args) -> int:
    p = _program(args.program)
    i = _facts(args.facts, p)
    lines: list[str] = []
    if args.semantics == "det":
        r = det_eval(p, i, args.max_steps)
        if isinstance(r, Fixpoint):
            print(f"fixpoint after {r.steps} steps: {_fmt_set(r.instance)}")
        else:
            print(f"no fixpoint: cycle of length {len(r.cycle)}")
            for inst in r.cycle:
                print(f"  {_fmt_set(inst)}")
        return OK
    if args.enumerate:
        fn = nondet_result_set if args.semantics == "nondet" else disorderly_result_set
        results = fn(p, i, args.bound)
        print(f"{len(results)} result(s)")
        for inst in sorted(results, key=lambda x: (len(x), sorted(map(str, x)))):
            print(f"  {_fmt_set(inst)}")
        return OK
    if args.semantics == "nondet":
        final, trace = nondet_run(p, i, args.seed, args.max_steps)
        print(f"result after {len(trace)} steps: {_fmt_set(final)}")
        lines = list(iter_trace_lines(trace))
    else:
        try:
            state, trace = disorderly_run(p, i, args.seed, args.max_steps)
        except NonTermination as e:
            _write_trace(args.trace, iter_trace_lines(e.trace))
            print(f"no terminal state within {args.max_steps} steps")
            return MISMATCH
        print(f"result after {len(trace)} steps: {_fmt_set(state.instance)}")
        lines = list(iter_trace_lines(trace))
    _write_trace(args.trace, lines)
    return OK


def cmd_winmove(args) -> int:
    g = GameGraph.from_facts(parse_facts(_read(args.graph), {"move": 2}))
    method = args.method
    if method == "wf":
        sol = solve_via_wf(g)
    elif method == "disorderly":
        sol = solve_via_disorderly(g, args.seed, args.max_steps)
    elif method == "retrograde":
        sol = retrograde_solve(g)
    else:
        sol = solve_via_netsim(g, args.seed, args.nodes, args.max_steps)
    print(sol)
    ref = retrograde_solve(g)
    if method == "netsim":
        agree = sol.won == ref.won
    else:
        agree = sol == ref
    print(f"oracle: {'agree' if agree else 'DISAGREE ' + str(ref)}")
    return OK if agree else MISMATCH


def _compile(args):
    p = _program(args.program)
    if args.model == "mA":
        u = compile_universal_mA(p, args.engine)
        return u.transducer, u.report
    proj = _program(args.projection) if args.projection else None
    u = compile_program(p, args.model, proj, designated=args.designated)
    return u.transducer, u.report


def cmd_compile(args) -> int:
    t, report = _compile(args)
    text = format_transducer(t)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    for line in report:
        print(f"% {line}", file=sys.stderr if not args.out else sys.stdout)
    return OK


def cmd_net(args) -> int:
    if args.transducer:
        t = parse_transducer(_read(args.transducer))
    elif args.program and args.model:
        t, _ = _compile(args)
    else:
        raise UsageError("give --transducer or --program with --model")
    net = parse_topology(_read(args.topology))
    pol = parse_policy(_read(args.policy), net.nodes)
    i = parse_facts(_read(args.facts), dict(t.schema.s_in)) if args.facts else frozenset()
    faults = FaultSpec()
    for n in args.isolate or ():
        faults = FaultSpec(faults.blocked | FaultSpec.isolate(net, n).blocked)
    g = distribute_input(i, net, pol, t, faults)
    keep = args.trace is not None
    if args.heartbeat_only:
        r = run_heartbeat_only(g, args.max_steps, args.nodes, keep_trace=keep)
    else:
        r = run_fair(g, args.seed, args.max_steps, keep_trace=keep)
    _write_trace(args.trace, r.trace_lines())
    out = sorted(r.output)
    name = t.output_name
    print(f"quiescent={str(r.quiescent).lower()} steps={r.state.steps} deliveries={r.state.deliveries}")
    print("output: " + _fmt_set(Fact(name, x) for x in out))
    if args.expect:
        want = {f.args for f in parse_facts(_read(args.expect)) if f.pred == name}
        agree = r.quiescent and set(r.output) == want
        print(f"expected: {'agree' if agree else 'DISAGREE'}")
        return OK if agree else MISMATCH
    return OK if r.quiescent else MISMATCH


def cmd_experiment(args) -> int:
    names = sorted(SCENARIOS) if args.name == "all" else [args.name]
    ok = True
    for n in names:
        res = run_experiment(n, args.seed)
        sys.stdout.write(res.text())
        ok &= res.ok
    return OK if ok else MISMATCH


# parser ---------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="disorderly", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def shared(sp, *, seed=False, trace=False, steps=False, bound=False):
        if seed:
            sp.add_argument("--seed", type=int, default=0)
        if trace:
            sp.add_argument("--trace", metavar="FILE")
        if steps:
            sp.add_argument("--max-steps", type=int, default=200_000)
        if bound:
            sp.add_argument("--bound", type=int, default=200_000, help="state budget for enumeration")

    sp = sub.add_parser("parse", help="parse and pretty-print a program")
    sp.add_argument("--program", required=True)
    sp.add_argument("--dialect", choices=["datalog-neg", "dlpm"])
    sp.set_defaults(fn=cmd_parse)

    sp = sub.add_parser("check", help="syntactic classes and semantic properties")
    sp.add_argument("--program", required=True)
    sp.add_argument("--facts")
    shared(sp, bound=True)
    sp.set_defaults(fn=cmd_check)

    sp = sub.add_parser("wf", help="well-founded model")
    sp.add_argument("--program", required=True)
    sp.add_argument("--facts")
    sp.add_argument("--trace", action="store_true", help="print the U_i/V_i table")
    sp.set_defaults(fn=cmd_wf)

    sp = sub.add_parser("eval", help="update semantics")
    sp.add_argument("--semantics", choices=["det", "nondet", "disorderly"], required=True)
    sp.add_argument("--program", required=True)
    sp.add_argument("--facts")
    sp.add_argument("--enumerate", action="store_true")
    shared(sp, seed=True, trace=True, steps=True, bound=True)
    sp.set_defaults(fn=cmd_eval)

    sp = sub.add_parser("winmove", help="solve a win-move game")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--method", choices=["wf", "disorderly", "retrograde", "netsim"], default="wf")
    sp.add_argument("--nodes", type=int, default=3)
    shared(sp, seed=True, steps=True)
    sp.set_defaults(fn=cmd_winmove)

    def compile_args(sp, required: bool):
        sp.add_argument("--program", required=required)
        sp.add_argument("--model", choices=["mP", "mR", "mA"], required=required)
        sp.add_argument("--projection")
        sp.add_argument("--designated", help="edb relation T of the projection")
        sp.add_argument("--engine", choices=["wf", "stratified"], default="wf")

    sp = sub.add_parser("compile", help="compile a program into a transducer")
    compile_args(sp, True)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_compile)

    sp = sub.add_parser("net", help="run a transducer network")
    sp.add_argument("--transducer")
    compile_args(sp, False)
    sp.add_argument("--facts")
    sp.add_argument("--topology", required=True)
    sp.add_argument("--policy", required=True)
    sp.add_argument("--heartbeat-only", action="store_true")
    sp.add_argument("--nodes", nargs="+", help="nodes stepped in heartbeat-only runs")
    sp.add_argument("--isolate", action="append", metavar="NODE", help="block every link of NODE")
    sp.add_argument("--expect", help="facts file with the expected output")
    shared(sp, seed=True, trace=True, steps=True)
    sp.set_defaults(fn=cmd_net)

    sp = sub.add_parser("experiment", help="run a named scenario")
    sp.add_argument("name", choices=sorted(SCENARIOS) + ["all"])
    shared(sp, seed=True)
    sp.set_defaults(fn=cmd_experiment)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.fn(args)
    except (UsageError, ProgramError, CompileError, TransducerError, NetworkError) as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE
    except BudgetExceeded as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    raise SystemExit(main())
