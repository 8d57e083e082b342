"""Relational transducers and their local transition.

Every query slot is a union of rule bodies evaluated by the shared
valuation engine: ``snd`` rules produce messages, ``ins``/``del`` rules
memory updates and ``out`` rules output tuples.  View stages are whole
programs (stratified or well-founded) whose derived relations become
readable by later stages and by the slots; a stage with a guard only runs
while its nullary guard relation holds.

System relations named ``Local_R`` are membership oracles supplied by
the network; every other system relation (``adom``) is stored.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .analysis import is_stratifiable
from .ground import FactIndex, Oracle, valuations
from .parser import ProgramError, check_rule_safety, parse_program, parse_rules
from .syntax import Fact, Program, Rule, format_program, format_rule
from .wellfounded import alternating_fixpoint, stratified_eval

SLOTS = ("snd", "ins", "del", "out")
LOCAL_PREFIX = "Local_"


class TransducerError(ProgramError):
    pass


def local_name(rel: str) -> str:
    return LOCAL_PREFIX + rel


def is_local(rel: str) -> bool:
    return rel.startswith(LOCAL_PREFIX)


@dataclass(frozen=True)
class TransducerSchema:
    s_in: Mapping[str, int]
    s_sys: Mapping[str, int]
    s_msg: Mapping[str, int]
    s_mem: Mapping[str, int]
    output_arity: int

    def __post_init__(self):
        parts = [("in", self.s_in), ("sys", self.s_sys), ("msg", self.s_msg), ("mem", self.s_mem)]
        for n, (a, x) in enumerate(parts):
            for b, y in parts[n + 1:]:
                common = set(x) & set(y)
                if common:
                    raise TransducerError(f"schemas {a} and {b} share {sorted(common)}")

    def arity(self, rel: str) -> int | None:
        for part in (self.s_in, self.s_sys, self.s_msg, self.s_mem):
            if rel in part:
                return part[rel]
        return None

    @property
    def oracles(self) -> frozenset[str]:
        return frozenset(r for r in self.s_sys if is_local(r))


@dataclass(frozen=True)
class SlotRule:
    slot: str
    rule: Rule

    def __str__(self) -> str:
        return f"{self.slot} {format_rule(self.rule)}"


@dataclass(frozen=True)
class ViewStage:
    name: str
    program: Program
    engine: str = "stratified"  # or "wf"
    guard: str | None = None


@dataclass(frozen=True)
class Transducer:
    schema: TransducerSchema
    rules: tuple[SlotRule, ...]
    stages: tuple[ViewStage, ...] = ()
    language: str = "fo"  # "ucq" or "fo"
    output_name: str = "out"

    def __post_init__(self):
        validate(self)

    def slot(self, name: str) -> tuple[Rule, ...]:
        return tuple(sr.rule for sr in self.rules if sr.slot == name)

    def view_relations(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for st in self.stages:
            for r in st.program.schema.idb:
                out[r] = st.program.schema.arities[r]
        return out


def _check_local_safety(rule: Rule, oracles: frozenset[str]) -> None:
    covered: set[str] = set()
    for lit in rule.body:
        if lit.positive and lit.atom.pred not in oracles:
            covered.update(lit.atom.variables())
    for lit in rule.body:
        if lit.atom.pred in oracles:
            for v in lit.atom.variables():
                if v in rule.forall:
                    raise TransducerError(f"forall variable {v} inside {lit.atom} in {rule}")
                if v not in covered:
                    raise TransducerError(f"unsafe oracle atom {lit.atom} in {rule}")


def validate(t: Transducer) -> None:
    s = t.schema
    if t.language not in ("ucq", "fo"):
        raise TransducerError(f"unknown language {t.language}")
    if t.language == "ucq" and t.stages:
        raise TransducerError("ucq transducers cannot have view stages")
    readable: dict[str, int] = {}
    for part in (s.s_in, s.s_sys, s.s_msg, s.s_mem):
        readable.update(part)
    for st in t.stages:
        if st.engine not in ("wf", "stratified"):
            raise TransducerError(f"unknown engine {st.engine}")
        if st.engine == "stratified" and not is_stratifiable(st.program):
            raise TransducerError(f"stage {st.name} is not stratifiable")
        if st.guard is not None and readable.get(st.guard) != 0:
            raise TransducerError(f"guard {st.guard} must be a readable nullary relation")
        for r in st.program.schema.edb:
            if r not in readable or readable[r] != st.program.schema.arities[r]:
                raise TransducerError(f"stage {st.name} reads unknown relation {r}")
            if is_local(r):
                raise TransducerError(f"stage {st.name} cannot read oracle {r}")
        for r in st.program.schema.idb:
            if r in readable:
                raise TransducerError(f"stage {st.name} redefines {r}")
            readable[r] = st.program.schema.arities[r]
    targets = {"snd": s.s_msg, "ins": s.s_mem, "del": s.s_mem}
    for sr in t.rules:
        if sr.slot not in SLOTS:
            raise TransducerError(f"unknown slot {sr.slot}")
        r = sr.rule
        head = r.head.atom
        if not r.head.positive:
            raise TransducerError(f"slot rules have positive heads: {r}")
        if sr.slot == "out":
            if head.pred != t.output_name or head.arity != s.output_arity:
                raise TransducerError(f"out rule must derive {t.output_name}/{s.output_arity}: {r}")
        else:
            if targets[sr.slot].get(head.pred) != head.arity:
                raise TransducerError(f"{sr.slot} rule targets unknown relation {head}")
        if t.language == "ucq" and r.forall:
            raise TransducerError(f"forall is not allowed in ucq transducers: {r}")
        for lit in r.body:
            a = lit.atom
            if readable.get(a.pred) != a.arity:
                raise TransducerError(f"{a} is not a readable relation")
        check_rule_safety(r)
        _check_local_safety(r, s.oracles)


@dataclass(frozen=True)
class LocalState:
    instance: frozenset[Fact]
    oracles: Mapping[str, Oracle] = field(default_factory=dict, compare=False, hash=False)

    def memory(self, t: Transducer) -> frozenset[Fact]:
        return frozenset(f for f in self.instance if f.pred in t.schema.s_mem)


@dataclass(frozen=True)
class Transition:
    before: LocalState
    received: frozenset[Fact]
    new: LocalState
    sent: frozenset[Fact]
    out: frozenset[tuple[str, ...]]


def evaluate_views(t: Transducer, facts: frozenset[Fact]) -> frozenset[Fact]:
    cur = facts
    for st in t.stages:
        if st.guard is not None and Fact(st.guard, ()) not in cur:
            continue
        edb = frozenset(f for f in cur if f.pred in st.program.schema.edb)
        if st.engine == "wf":
            derived = alternating_fixpoint(st.program, edb).under
        else:
            derived = stratified_eval(st.program, edb)
        cur = cur | frozenset(f for f in derived if f.pred in st.program.schema.idb)
    return cur


def local_transition(t: Transducer, s: LocalState, received: Iterable[Fact] = ()) -> Transition:
    received = frozenset(received)
    for f in received:
        if t.schema.s_msg.get(f.pred) != len(f.args):
            raise TransducerError(f"received {f} is not a message fact")
    view = evaluate_views(t, s.instance | received)
    index = FactIndex(view)
    results: dict[str, set[Fact]] = {k: set() for k in SLOTS}
    for sr in t.rules:
        for _, u in valuations(sr.rule, view, oracles=s.oracles, index=index):
            results[sr.slot].add(u.fact)
    plus, minus = results["ins"], results["del"]
    new = (s.instance | (plus - minus)) - (minus - plus)
    return Transition(
        before=s,
        received=received,
        new=LocalState(frozenset(new), s.oracles),
        sent=frozenset(results["snd"]),
        out=frozenset(f.args for f in results["out"]),
    )


# text format -------------------------------------------------------------------

def _decl(items: Mapping[str, int]) -> str:
    return " ".join(f"{r}/{n}" for r, n in sorted(items.items()))


def format_transducer(t: Transducer) -> str:
    s = t.schema
    lines = [f"@lang {t.language}"]
    for kw, part in (("in", s.s_in), ("sys", s.s_sys), ("msg", s.s_msg), ("mem", s.s_mem)):
        lines.append(f"@{kw} {_decl(part)}".rstrip())
    lines.append(f"@out {t.output_name}/{s.output_arity}")
    for st in t.stages:
        lines.append(f"@stage {st.name} engine={st.engine} guard={st.guard or '-'}")
        lines.extend(format_program(st.program).rstrip("\n").split("\n"))
        lines.append("@endstage")
    lines.append("@slots")
    lines.extend(str(sr) for sr in t.rules)
    return "\n".join(lines) + "\n"


def _parse_decl(rest: str, where: int) -> dict[str, int]:
    out: dict[str, int] = {}
    for item in rest.split():
        name, _, n = item.partition("/")
        if not n.isdigit():
            raise TransducerError(f"line {where}: bad declaration {item!r}")
        out[name] = int(n)
    return out


def parse_transducer(text: str) -> Transducer:
    decls: dict[str, dict[str, int]] = {k: {} for k in ("in", "sys", "msg", "mem")}
    language = "fo"
    out_name, out_arity = "out", 0
    stages: list[ViewStage] = []
    rules: list[SlotRule] = []
    lines = text.split("\n")
    n = 0
    in_slots = False
    while n < len(lines):
        raw = lines[n]
        line = raw.split("%", 1)[0].strip()
        n += 1
        if not line:
            continue
        if in_slots:
            slot, _, rest = line.partition(" ")
            if slot not in SLOTS:
                raise TransducerError(f"line {n}: expected a slot keyword, found {slot!r}")
            parsed = parse_rules(rest)
            if len(parsed) != 1:
                raise TransducerError(f"line {n}: expected one rule")
            rules.append(SlotRule(slot, parsed[0]))
            continue
        kw, _, rest = line.partition(" ")
        if kw == "@lang":
            language = rest.strip()
        elif kw[1:] in decls and kw.startswith("@"):
            decls[kw[1:]] = _parse_decl(rest, n)
        elif kw == "@out":
            name, _, k = rest.strip().partition("/")
            out_name, out_arity = name, int(k)
        elif kw == "@stage":
            parts = rest.split()
            opts = dict(p.split("=", 1) for p in parts[1:])
            body = []
            while n < len(lines) and lines[n].strip() != "@endstage":
                body.append(lines[n])
                n += 1
            if n == len(lines):
                raise TransducerError(f"stage {parts[0]} is not closed")
            n += 1
            guard = opts.get("guard", "-")
            stages.append(
                ViewStage(
                    parts[0],
                    parse_program("\n".join(body)),
                    opts.get("engine", "stratified"),
                    None if guard == "-" else guard,
                )
            )
        elif kw == "@slots":
            in_slots = True
        else:
            raise TransducerError(f"line {n}: unexpected {kw!r}")
    schema = TransducerSchema(decls["in"], decls["sys"], decls["msg"], decls["mem"], out_arity)
    return Transducer(schema, tuple(rules), tuple(stages), language, out_name)
