"""Abstract syntax for Datalog-with-negation and its update dialect.

Rules are built from :class:`Atom` patterns over :class:`Var` and
:class:`Const` terms.  Ground data never carries term objects: a ground
atom is a :class:`Fact`, a plain named tuple of strings, so instances
(``frozenset[Fact]``) hash and compare at C speed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple


class Dialect(str, enum.Enum):
    DATALOG_NEG = "datalog-neg"
    DLPM = "dlpm"


@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Const:
    value: str

    def __str__(self) -> str:
        return self.value


Term = Var | Const


class Fact(NamedTuple):
    pred: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return self.pred
        return f"{self.pred}({','.join(self.args)})"


class Update(NamedTuple):
    """A signed ground atom: insertion when ``positive`` else deletion."""

    positive: bool
    fact: Fact

    def __str__(self) -> str:
        return ("+" if self.positive else "-") + str(self.fact)


Instance = frozenset  # of Fact


@dataclass(frozen=True, slots=True)
class Atom:
    pred: str
    args: tuple[Term, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    def variables(self) -> list[str]:
        seen: list[str] = []
        for t in self.args:
            if isinstance(t, Var) and t.name not in seen:
                seen.append(t.name)
        return seen

    def constants(self) -> set[str]:
        return {t.value for t in self.args if isinstance(t, Const)}

    def is_ground(self) -> bool:
        return all(isinstance(t, Const) for t in self.args)

    def ground(self, binding: Mapping[str, str]) -> Fact:
        return Fact(
            self.pred,
            tuple(binding[t.name] if isinstance(t, Var) else t.value for t in self.args),
        )

    def __str__(self) -> str:
        if not self.args:
            return self.pred
        return f"{self.pred}({','.join(str(t) for t in self.args)})"


@dataclass(frozen=True, slots=True)
class Literal:
    atom: Atom
    positive: bool = True

    def __str__(self) -> str:
        return str(self.atom) if self.positive else f"!{self.atom}"


@dataclass(frozen=True, slots=True)
class Rule:
    head: Literal
    body: tuple[Literal, ...] = ()
    forall: frozenset[str] = frozenset()

    def positive_body(self) -> list[Atom]:
        return [lit.atom for lit in self.body if lit.positive]

    def negative_body(self) -> list[Atom]:
        return [lit.atom for lit in self.body if not lit.positive]

    def variables(self) -> set[str]:
        out = set(self.head.atom.variables())
        for lit in self.body:
            out.update(lit.atom.variables())
        return out

    def constants(self) -> set[str]:
        out = self.head.atom.constants()
        for lit in self.body:
            out |= lit.atom.constants()
        return out

    def __str__(self) -> str:
        return format_rule(self)


def format_rule(rule: Rule) -> str:
    if not rule.body:
        return f"{rule.head}."
    prefix = ""
    if rule.forall:
        prefix = "forall " + " ".join(sorted(rule.forall)) + " "
    return f"{rule.head} :- {prefix}{', '.join(str(l) for l in rule.body)}."


@dataclass(frozen=True)
class Schema:
    arities: Mapping[str, int]
    edb: frozenset[str] = frozenset()
    eidb: frozenset[str] = frozenset()
    idb: frozenset[str] = frozenset()
    output: str | None = None

    @property
    def predicates(self) -> frozenset[str]:
        return self.edb | self.eidb | self.idb

    @property
    def inputs(self) -> frozenset[str]:
        """Relations the source instance may populate."""
        return self.edb | self.eidb

    def kind(self, pred: str) -> str:
        if pred in self.edb:
            return "edb"
        if pred in self.eidb:
            return "eidb"
        if pred in self.idb:
            return "idb"
        raise KeyError(pred)


@dataclass(frozen=True)
class Program:
    rules: tuple[Rule, ...]
    schema: Schema
    dialect: Dialect = Dialect.DATALOG_NEG

    @property
    def constants(self) -> frozenset[str]:
        out: set[str] = set()
        for r in self.rules:
            out |= r.constants()
        return frozenset(out)

    def __str__(self) -> str:
        return format_program(self)


def format_program(program: Program, sort_rules: bool = False) -> str:
    """Canonical text; ``parse_program(format_program(p))`` rebuilds ``p``."""
    s = program.schema
    lines = []
    if program.dialect is Dialect.DLPM:
        lines.append("@dialect dlpm")
    for kind, preds in (("edb", s.edb), ("eidb", s.eidb), ("idb", s.idb)):
        if preds:
            items = " ".join(f"{p}/{s.arities[p]}" for p in sorted(preds))
            lines.append(f"@{kind} {items}")
    if s.output is not None:
        lines.append(f"@output {s.output}")
    rules = [format_rule(r) for r in program.rules]
    if sort_rules:
        rules.sort()
    lines.extend(rules)
    return "\n".join(lines) + "\n"


def format_facts(facts: Iterable[Fact]) -> str:
    return "".join(f"{f}.\n" for f in sorted(facts))


def format_fact_set(facts: Iterable[Fact]) -> str:
    return "{" + ", ".join(str(f) for f in sorted(facts)) + "}"


def active_domain(facts: Iterable[Fact]) -> frozenset[str]:
    out: set[str] = set()
    for f in facts:
        out.update(f.args)
    return frozenset(out)


def project(facts: Iterable[Fact], pred: str) -> frozenset[tuple[str, ...]]:
    return frozenset(f.args for f in facts if f.pred == pred)


def unary(facts: Iterable[Fact], pred: str) -> frozenset[str]:
    """Constants ``x`` with ``pred(x)`` among ``facts``."""
    return frozenset(f.args[0] for f in facts if f.pred == pred)


@dataclass(frozen=True)
class Declarations:
    """Raw ``@``-directives collected by the parser before inference."""

    arities: dict[str, int] = field(default_factory=dict)
    edb: set[str] = field(default_factory=set)
    eidb: set[str] = field(default_factory=set)
    idb: set[str] = field(default_factory=set)
    output: str | None = None
