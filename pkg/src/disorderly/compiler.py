"""Compile semi-monotone update programs into transducers.

Pipeline for models ``mP`` and ``mR``:

1. negatively used edb relations become eidb relations initialised from
   the input (they are never updated, so their negation needs a guard
   like any other eidb atom);
2. ``mP`` only: rules isolate their single negated atom;
3. ``transform_prime``: every positively used edb relation ``R`` gets an
   idb copy ``R'`` and positive body occurrences read the copy;
4. ``transform_local_guard``: each negated eidb atom gains ``Local_R``
   with forall positions replaced by a shared variable.

The resulting rules run on every node over memory copies of the
relations; every derived update is applied locally and broadcast once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .analysis import (
    is_friendly,
    is_projection_program,
    is_semi_monotone,
    max_negated_eidb_per_rule,
)
from .parser import ProgramError, build_program
from .syntax import Atom, Const, Dialect, Literal, Program, Rule, Schema, Term, Var
from .transducer import (
    SlotRule,
    Transducer,
    TransducerSchema,
    ViewStage,
    is_local,
    local_name,
)

MODELS = ("mP", "mR", "mA")
STARTED = "m_started"


class CompileError(ProgramError):
    pass


def mem(rel: str) -> str:
    return "m_" + rel


def msg(rel: str) -> str:
    return "u_" + rel


def seen(rel: str) -> str:
    return "d_" + rel


def _fresh(name: str, taken: set[str]) -> str:
    cand = name + "'"
    while cand in taken:
        cand += "'"
    taken.add(cand)
    return cand


def _rebuild(p: Program, rules: Iterable[Rule], **schema) -> Program:
    s = p.schema
    args = dict(
        arities=dict(s.arities),
        edb=set(s.edb),
        eidb=set(s.eidb),
        idb=set(s.idb),
        output=s.output,
        dialect=Dialect.DLPM,
    )
    args.update(schema)
    return build_program(list(rules), **args)


# source-level transforms ---------------------------------------------------

def promote_negated_edb(p: Program) -> tuple[Program, dict[str, str]]:
    """Negated edb atoms read an eidb relation initialised from the input.

    Returns the program and a map from each new eidb relation to the input
    relation it is copied from.  A relation used only negatively keeps its
    name; one also used positively gets a ``_neg`` twin for the negative
    occurrences.
    """
    s = p.schema
    neg = {a.pred for r in p.rules for a in r.negative_body() if a.pred in s.edb}
    pos = {a.pred for r in p.rules for a in r.positive_body() if a.pred in s.edb}
    if not neg:
        return p, {}
    taken = set(s.arities)
    rename: dict[str, str] = {}
    for rel in sorted(neg):
        if rel in pos:
            new = rel + "_neg"
            while new in taken:
                new += "_"
            taken.add(new)
            rename[rel] = new
        else:
            rename[rel] = rel
    rules = []
    for r in p.rules:
        body = tuple(
            Literal(Atom(rename[l.atom.pred], l.atom.args), False)
            if not l.positive and l.atom.pred in rename
            else l
            for l in r.body
        )
        rules.append(Rule(r.head, body, r.forall))
    arities = dict(s.arities)
    for rel, new in rename.items():
        arities[new] = s.arities[rel]
    edb = set(s.edb) - {r for r in rename if r not in pos}
    eidb = set(s.eidb) | set(rename.values())
    out = _rebuild(p, rules, arities=arities, edb=edb, eidb=eidb)
    return out, {new: rel for rel, new in rename.items()}


def split_single_negation(p: Program) -> Program:
    """Rules with one negated atom and several positive atoms are split
    into a join into a fresh relation and a rule adding the negation."""
    taken = set(p.schema.arities)
    rules: list[Rule] = []
    new_idb: dict[str, int] = {}
    for r in p.rules:
        neg = r.negative_body()
        pos = r.positive_body()
        if len(neg) != 1 or len(pos) < 2 or r.forall:
            rules.append(r)
            continue
        needed = set(r.head.atom.variables()) | set(neg[0].variables())
        keep: list[str] = []
        for a in pos:
            for v in a.variables():
                if v in needed and v not in keep:
                    keep.append(v)
        name = _fresh(r.head.atom.pred, taken)
        new_idb[name] = len(keep)
        aux = Atom(name, tuple(Var(v) for v in keep))
        rules.append(Rule(Literal(aux, True), tuple(Literal(a, True) for a in pos)))
        rules.append(Rule(r.head, (Literal(aux, True), Literal(neg[0], False))))
    if not new_idb:
        return p
    arities = dict(p.schema.arities) | new_idb
    return _rebuild(p, rules, arities=arities, idb=set(p.schema.idb) | set(new_idb))


def prime_name(rel: str) -> str:
    return rel + "'"


def transform_prime(p: Program) -> Program:
    """Copy rules ``R'(X1..Xn) :- R(X1..Xn)`` and positive reads of ``R'``."""
    s = p.schema
    used = sorted({a.pred for r in p.rules for a in r.positive_body() if a.pred in s.edb})
    if not used:
        return p
    taken = set(s.arities)
    copy = {}
    for rel in used:
        name = prime_name(rel)
        if name in taken:
            raise CompileError(f"cannot introduce {name}: name already used")
        copy[rel] = name
    rules = []
    for rel in used:
        xs = tuple(Var(f"X{i + 1}") for i in range(s.arities[rel]))
        rules.append(Rule(Literal(Atom(copy[rel], xs), True), (Literal(Atom(rel, xs), True),)))
    for r in p.rules:
        body = tuple(
            Literal(Atom(copy[l.atom.pred], l.atom.args), True)
            if l.positive and l.atom.pred in copy
            else l
            for l in r.body
        )
        rules.append(Rule(r.head, body, r.forall))
    arities = dict(s.arities) | {copy[r]: s.arities[r] for r in used}
    return _rebuild(p, rules, arities=arities, idb=set(s.idb) | set(copy.values()))


def guard_term(rule: Rule, atom: Atom) -> Term | None:
    """The shared non-forall term replacing forall positions in a guard."""
    neg = rule.negative_body()
    if len(neg) > 1:
        common = [v for v in neg[0].variables() if all(v in a.variables() for a in neg[1:])]
        common = [v for v in common if v not in rule.forall]
        if common:
            return Var(common[0])
    for v in atom.variables():
        if v not in rule.forall:
            return Var(v)
    consts = sorted(atom.constants())
    if consts:
        return Const(consts[0])
    return None


def guard_atom(rule: Rule, atom: Atom, base: str) -> Atom:
    if not any(isinstance(t, Var) and t.name in rule.forall for t in atom.args):
        return Atom(local_name(base), atom.args)
    z = guard_term(rule, atom)
    if z is None:
        raise CompileError(f"no shared variable to guard {atom} in {rule}")
    args = tuple(z if isinstance(t, Var) and t.name in rule.forall else t for t in atom.args)
    return Atom(local_name(base), args)


def transform_local_guard(p: Program, model: str, sources: dict[str, str] | None = None, *, check: bool = True) -> Program:
    """Add ``Local_R`` after every negated eidb atom ``!R(..)``.

    ``sources`` maps eidb relations to the input relation whose
    responsibility they inherit (promoted edb twins).
    """
    if model not in ("mP", "mR"):
        raise CompileError(f"local guards are defined for mP and mR, not {model}")
    sources = sources or {}
    eidb = p.schema.eidb
    _gate(p, model, check)
    rules = []
    arities = dict(p.schema.arities)
    for r in p.rules:
        extra = []
        for a in r.negative_body():
            if a.pred in eidb:
                g = guard_atom(r, a, sources.get(a.pred, a.pred))
                extra.append(Literal(g, True))
                arities[g.pred] = g.arity
        rules.append(Rule(r.head, r.body + tuple(extra), r.forall))
    new = {a.pred for r in rules for a in r.positive_body() if is_local(a.pred)}
    return _rebuild(p, rules, arities=arities, edb=set(p.schema.edb) | new)


def _gate(p: Program, model: str, check: bool) -> None:
    if not check:
        return
    if not is_semi_monotone(p):
        raise CompileError("program is not semi-monotone")
    if model == "mP":
        for n, r in enumerate(p.rules):
            if r.forall:
                raise CompileError(f"mP does not allow forall (rule {n}: {r})")
        if max_negated_eidb_per_rule(p) > 1:
            bad = [r for r in p.rules if sum(a.pred in p.schema.eidb for a in r.negative_body()) > 1]
            raise CompileError(f"mP allows one negated eidb atom per rule: {bad[0]}")
    elif model == "mR":
        if not is_friendly(p):
            from .analysis import rule_is_friendly

            bad = [r for r in p.rules if not rule_is_friendly(r)]
            raise CompileError(f"rule is not friendly: {bad[0]}")


# transducer generation -----------------------------------------------------

@dataclass
class CompilationUnit:
    source: Program
    model: str
    projection: Program | None
    promoted: Program
    split: Program
    prime: Program
    guarded: Program
    transducer: Transducer
    report: list[str] = field(default_factory=list)
    designated: str | None = None
    eidb_sources: dict[str, str] = field(default_factory=dict)


def _mem_atom(a: Atom, p: Program) -> Atom:
    if a.pred in p.schema.idb or a.pred in p.schema.eidb:
        return Atom(mem(a.pred), a.args)
    return a


def _borrowed_scope(r: Rule, p: Program, originals: dict[str, str]) -> Atom:
    for a in r.positive_body():
        if a.pred in originals:
            return Atom(local_name(originals[a.pred]), a.args)
    raise CompileError(f"no positive edb atom to borrow a scope from in {r}")


def _emulate(g: Atom, designated: str, arity: int) -> list[Atom]:
    """Element-determined responsibility for a derived relation."""
    out: list[Atom] = []
    for t in g.args:
        cand = Atom(local_name(designated), (t,) * arity)
        if cand not in out:
            out.append(cand)
    return out


def _expand_guards(
    r: Rule,
    p: Program,
    derived: set[str],
    designated: str | None,
    t_arity: int,
    naive: bool,
    originals: dict[str, str],
) -> list[tuple[Literal, ...]]:
    """Memory-level body variants of a P'' rule (one per emulated disjunct)."""
    variants: list[list[Literal]] = [[]]
    for lit in r.body:
        a = lit.atom
        if is_local(a.pred) and a.pred[len("Local_"):] in derived:
            if naive:
                options = [_borrowed_scope(r, p, originals)]
            else:
                options = _emulate(a, designated, t_arity)
            variants = [v + [Literal(o, True)] for v in variants for o in options]
        else:
            variants = [v + [Literal(_mem_atom(a, p), lit.positive)] for v in variants]
    out = []
    for v in variants:
        body = tuple(v)
        if body not in out:
            out.append(body)
    return out


def compile_program(
    p: Program,
    model: str,
    projection: Program | None = None,
    *,
    designated: str | None = None,
    check_gates: bool = True,
    always_forward: bool = False,
) -> CompilationUnit:
    """Compile ``p`` (after the optional projection pre-processor) for ``model``.

    With ``check_gates=False`` the syntactic preconditions are skipped;
    derived relations whose responsibility cannot be emulated then borrow
    the ``Local`` of the rule's positive edb atom.  That variant is unsound
    and only exists to replay the counterexample scenarios.

    Received updates are forwarded only when they change local memory;
    ``always_forward`` forwards every received update again (messages then
    circulate forever, so only bounded runs make sense).
    """
    if model == "mA":
        raise CompileError("use compile_universal_mA for model mA")
    if model not in MODELS:
        raise CompileError(f"unknown model {model}")
    if p.dialect is not Dialect.DLPM:
        p = build_program(
            list(p.rules),
            arities=dict(p.schema.arities),
            edb=p.schema.edb,
            idb=p.schema.idb,
            output=p.schema.output,
            dialect=Dialect.DLPM,
        )
    if p.schema.output is None:
        raise CompileError("the program needs an @output relation")
    report = []
    promoted, sources = promote_negated_edb(p)
    _gate(promoted, model, check_gates)
    derived: set[str] = set()
    naive = False
    if projection is not None:
        if model != "mR" and check_gates:
            raise CompileError("projection pre-processing is only supported for mR")
        if not is_projection_program(projection):
            raise CompileError("the pre-processor is not a projection program")
        derived = set(projection.schema.idb)
        if not derived <= set(p.schema.eidb):
            raise CompileError(f"projection heads {sorted(derived - set(p.schema.eidb))} are not eidb relations")
        for rel in derived:
            if p.schema.arities[rel] != projection.schema.arities[rel]:
                raise CompileError(f"arity mismatch for {rel}")
        if designated is None:
            designated = sorted(projection.schema.edb)[0]
            report.append(f"designated relation T = {designated} (first edb relation of the projection)")
        elif designated not in projection.schema.edb:
            raise CompileError(f"{designated} is not an edb relation of the projection")
        else:
            report.append(f"designated relation T = {designated}")
        naive = model != "mR"
        if naive:
            report.append("WARNING: derived relation scopes borrowed from edb atoms (unsound)")

    if sources:
        report.append("promoted to eidb: " + ", ".join(f"{n} (from {s})" for n, s in sorted(sources.items())))
    split = split_single_negation(promoted) if model == "mP" else promoted
    if split is not promoted:
        report.append("split rules to isolate negated atoms")
    prime = transform_prime(split)
    guarded = transform_local_guard(prime, model, sources, check=check_gates)
    originals = {prime_name(r): r for r in split.schema.edb}
    tr = _build_transducer(
        guarded, prime, projection, derived, designated, sources, originals, naive, model, always_forward
    )
    report.append(f"transducer: {len(tr.rules)} slot rules, language {tr.language}")
    return CompilationUnit(p, model, projection, promoted, split, prime, guarded, tr, report, designated, sources)


def _build_transducer(
    guarded: Program,
    prime: Program,
    projection: Program | None,
    derived: set[str],
    designated: str | None,
    sources: dict[str, str],
    originals: dict[str, str],
    naive: bool,
    model: str,
    always_forward: bool = False,
) -> Transducer:
    s = prime.schema
    out_rel = s.output
    s_in: dict[str, int] = {}
    for rel in s.edb:
        s_in[rel] = s.arities[rel]
    for rel in s.eidb:
        if rel in derived:
            continue
        src = sources.get(rel, rel)
        s_in[src] = s.arities[rel]
    if projection is not None:
        for rel in projection.schema.edb:
            s_in[rel] = projection.schema.arities[rel]
    s_sys = {local_name(r): n for r, n in s_in.items()}
    s_mem: dict[str, int] = {STARTED: 0}
    s_msg: dict[str, int] = {}
    for rel in sorted(s.idb):
        s_mem[mem(rel)] = s.arities[rel]
        s_msg[msg(rel)] = s.arities[rel]
    for rel in sorted(s.eidb):
        s_mem[mem(rel)] = s.arities[rel]
        s_mem[seen(rel)] = s.arities[rel]
        s_msg[msg(rel)] = s.arities[rel]
    taken = set(s_in) | set(s_sys)
    clash = taken & (set(s_mem) | set(s_msg))
    if clash:
        raise CompileError(f"relation names clash with generated ones: {sorted(clash)}")
    t_arity = s_in.get(designated, 0) if designated else 0

    rules: list[SlotRule] = []
    started = Literal(Atom(STARTED), True)
    not_started = Literal(Atom(STARTED), False)

    def add(slot: str, head: Atom, body: Iterable[Literal]) -> None:
        rules.append(SlotRule(slot, Rule(Literal(head, True), tuple(body))))

    def xs(n: int) -> tuple[Var, ...]:
        return tuple(Var(f"X{i + 1}") for i in range(n))

    add("ins", Atom(STARTED), ())
    # copy-in of eidb relations on the first transition
    for rel in sorted(s.eidb):
        n = s.arities[rel]
        head = Atom(mem(rel), xs(n))
        block = Literal(Atom(msg(rel), xs(n)), False)
        if rel in derived:
            for pr in projection.rules:
                if pr.head.atom.pred != rel:
                    continue
                src = pr.body[0].atom
                head_p = Atom(mem(rel), pr.head.atom.args)
                block_p = Literal(Atom(msg(rel), pr.head.atom.args), False)
                if naive:
                    scopes = [Atom(local_name(src.pred), src.args)]
                else:
                    t_arity_p = projection.schema.arities[designated]
                    scopes = _emulate(pr.head.atom, designated, t_arity_p)
                for g in scopes:
                    add("ins", head_p, (Literal(src, True), Literal(g, True), not_started, block_p))
        else:
            src = sources.get(rel, rel)
            add("ins", head, (Literal(Atom(src, xs(n)), True), not_started, block))
    # derivation rules
    for r in guarded.rules:
        h = r.head.atom
        for body in _expand_guards(r, guarded, derived, designated, t_arity, naive, originals):
            full = (started,) + body
            if h.pred in s.idb:
                have = Literal(Atom(mem(h.pred), h.args), False)
                rules.append(SlotRule("ins", Rule(Literal(Atom(mem(h.pred), h.args), True), full, r.forall)))
                rules.append(SlotRule("snd", Rule(Literal(Atom(msg(h.pred), h.args), True), full + (have,), r.forall)))
                if h.pred == out_rel:
                    rules.append(SlotRule("out", Rule(Literal(Atom(out_rel, h.args), True), full + (have,), r.forall)))
            else:
                if r.head.positive:
                    raise CompileError(f"eidb relations can only be deleted: {r}")
                fresh = Literal(Atom(seen(h.pred), h.args), False)
                rules.append(SlotRule("del", Rule(Literal(Atom(mem(h.pred), h.args), True), full, r.forall)))
                rules.append(SlotRule("ins", Rule(Literal(Atom(seen(h.pred), h.args), True), full, r.forall)))
                rules.append(SlotRule("snd", Rule(Literal(Atom(msg(h.pred), h.args), True), full + (fresh,), r.forall)))
    # received updates: apply and forward on first effect
    for rel in sorted(s.idb):
        v = xs(s.arities[rel])
        got = Literal(Atom(msg(rel), v), True)
        add("ins", Atom(mem(rel), v), (got,))
        add("snd", Atom(msg(rel), v), (got,) if always_forward else (got, Literal(Atom(mem(rel), v), False)))
    for rel in sorted(s.eidb):
        v = xs(s.arities[rel])
        got = Literal(Atom(msg(rel), v), True)
        add("del", Atom(mem(rel), v), (got,))
        add("ins", Atom(seen(rel), v), (got,))
        add("snd", Atom(msg(rel), v), (got,) if always_forward else (got, Literal(Atom(seen(rel), v), False)))
    language = "fo" if model == "mR" or any(r.rule.forall for r in rules) else "ucq"
    schema = TransducerSchema(s_in, s_sys, s_msg, s_mem, s.arities[out_rel])
    return Transducer(schema, tuple(rules), (), language, out_rel)


def compile(p: Program, model: str, projection: Program | None = None, **kw) -> Transducer:
    if model == "mA":
        return compile_universal_mA(p).transducer
    return compile_program(p, model, projection, **kw).transducer


# universal construction for mA -------------------------------------------

@dataclass
class UniversalUnit:
    query: Program
    engine: str
    transducer: Transducer
    report: list[str] = field(default_factory=list)


def compile_universal_mA(q: Program, engine: str = "wf") -> UniversalUnit:
    """Broadcast every input fact and every certified absence; once a node
    knows the full instance over ``adom`` it evaluates ``q`` in one step."""
    if engine not in ("wf", "stratified"):
        raise CompileError(f"unknown engine {engine}")
    if q.dialect is not Dialect.DATALOG_NEG:
        raise CompileError("the universal construction evaluates Datalog-neg queries")
    if q.schema.output is None:
        raise CompileError("the query needs an @output relation")
    s = q.schema
    inputs = sorted(s.edb)
    s_in = {r: s.arities[r] for r in inputs}
    s_sys = {"adom": 1} | {local_name(r): s.arities[r] for r in inputs}
    s_msg: dict[str, int] = {}
    s_mem: dict[str, int] = {"m_ready": 0}
    for r in inputs:
        n = s.arities[r]
        s_msg[f"pos_{r}"] = n
        s_msg[f"neg_{r}"] = n
        s_mem[f"m_pos_{r}"] = n
        s_mem[f"m_neg_{r}"] = n
    rules: list[SlotRule] = []

    def vars_(n: int) -> tuple[Var, ...]:
        return tuple(Var(f"X{i + 1}") for i in range(n))

    def lit(pred: str, args=(), positive: bool = True) -> Literal:
        return Literal(Atom(pred, tuple(args)), positive)

    def add(slot: str, head: Atom, body) -> None:
        rules.append(SlotRule(slot, Rule(Literal(head, True), tuple(body))))

    for r in inputs:
        v = vars_(s.arities[r])
        adom = [lit("adom", (x,)) for x in v]
        for kind, source in (("pos", [lit(r, v)]), ("neg", adom + [lit(local_name(r), v), lit(r, v, False)])):
            m = f"m_{kind}_{r}"
            add("ins", Atom(m, v), source)
            add("snd", Atom(f"{kind}_{r}", v), source + [lit(m, v, False)])
            got = lit(f"{kind}_{r}", v)
            add("ins", Atom(m, v), [got])
            add("snd", Atom(f"{kind}_{r}", v), [got, lit(m, v, False)])
    ready_rules: list[Rule] = []
    for r in inputs:
        v = vars_(s.arities[r])
        known = Atom(f"known_{r}", v)
        ready_rules.append(Rule(Literal(known, True), (lit(f"m_pos_{r}", v),)))
        ready_rules.append(Rule(Literal(known, True), (lit(f"m_neg_{r}", v),)))
        ready_rules.append(
            Rule(Literal(Atom(f"not_ready_{r}"), True), tuple(lit("adom", (x,)) for x in v) + (Literal(known, False),))
        )
        ready_rules.append(Rule(Literal(Atom(f"ready_{r}"), True), (lit(f"not_ready_{r}", (), False),)))
    ready_rules.append(Rule(Literal(Atom("ready"), True), tuple(lit(f"ready_{r}") for r in inputs)))
    stage1_edb = {"adom"} | {f"m_pos_{r}" for r in inputs} | {f"m_neg_{r}" for r in inputs}
    arities1 = {"adom": 1} | {f"m_pos_{r}": s.arities[r] for r in inputs} | {f"m_neg_{r}": s.arities[r] for r in inputs}
    stage1 = build_program(ready_rules, arities=arities1, edb=stage1_edb, dialect=Dialect.DATALOG_NEG)

    rename = {r: f"m_pos_{r}" for r in inputs} | {r: f"q_{r}" for r in s.idb}

    def ren(a: Atom) -> Atom:
        return Atom(rename.get(a.pred, a.pred), a.args)

    q_rules = [
        Rule(Literal(ren(r.head.atom), True), tuple(Literal(ren(l.atom), l.positive) for l in r.body))
        for r in q.rules
    ]
    arities2 = {rename[k]: n for k, n in s.arities.items()}
    stage2 = build_program(
        q_rules,
        arities=arities2,
        edb={rename[r] for r in inputs},
        idb={rename[r] for r in s.idb},
        dialect=Dialect.DATALOG_NEG,
    )
    stages = (
        ViewStage("ready", stage1, "stratified", None),
        ViewStage("query", stage2, engine, "ready"),
    )
    add("ins", Atom("m_ready"), [lit("ready")])
    ov = vars_(s.arities[s.output])
    add("out", Atom(s.output, ov), [lit("ready"), lit(f"q_{s.output}", ov)])
    schema = TransducerSchema(s_in, s_sys, s_msg, s_mem, s.arities[s.output])
    t = Transducer(schema, tuple(rules), stages, "fo", s.output)
    return UniversalUnit(q, engine, t, [f"universal mA transducer, engine {engine}"])


def naive_emptiness_transducer() -> Transducer:
    """Outputs ``empty`` whenever the local part of ``r`` is empty; correct
    on a single node, wrong as soon as ``r`` lives elsewhere."""
    from .parser import parse_rules

    schema = TransducerSchema({"r": 1}, {local_name("r"): 1}, {}, {"m_done": 0}, 0)
    rules = [SlotRule("ins", parse_rules("m_done.")[0])]
    stage = build_program(
        parse_rules("nonempty :- r(X).\nempty_local :- !nonempty."),
        arities={"r": 1},
        edb={"r"},
        dialect=Dialect.DATALOG_NEG,
    )
    rules.append(SlotRule("out", parse_rules("empty :- empty_local.")[0]))
    return Transducer(schema, tuple(rules), (ViewStage("local", stage),), "fo", "empty")


def emptiness_query() -> Program:
    from .parser import parse_program

    return parse_program("@edb r/1\n@output empty\nnonempty :- r(X).\nempty :- !nonempty.\n")


__all__ = [
    "CompileError",
    "CompilationUnit",
    "UniversalUnit",
    "compile",
    "compile_program",
    "compile_universal_mA",
    "emptiness_query",
    "naive_emptiness_transducer",
    "promote_negated_edb",
    "split_single_negation",
    "transform_local_guard",
    "transform_prime",
]

_ = Schema  # re-exported type used in annotations elsewhere
