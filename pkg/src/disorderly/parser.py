"""Text format for programs and fact files.

Program text is a sequence of rules ``head :- body.`` and declaration
lines.  ``!`` negates a literal (also in the head, for the update
dialect), ``forall Y Z`` may prefix a body, ``%`` starts a comment and
``@edb p/2 q/1``, ``@eidb``, ``@idb``, ``@output p`` declare the schema.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator

from .syntax import (
    Atom,
    Const,
    Dialect,
    Fact,
    Literal,
    Program,
    Rule,
    Schema,
    Var,
)


class ProgramError(ValueError):
    """Base class for rejected program or fact text."""


class ParseError(ProgramError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


class SafetyError(ProgramError):
    pass


class ArityError(ProgramError):
    pass


class DialectError(ProgramError):
    pass


class SchemaError(ProgramError):
    pass


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>%[^\n]*)
  | (?P<implies>:-)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*'*)
  | (?P<number>[0-9]+)
  | (?P<punct>[(),.!/@*])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True, slots=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            out.append(Token("nl", "\n", line, pos - line_start + 1))
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            out.append(Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


def is_variable_name(name: str) -> bool:
    return name[0].isupper() or name[0] == "_"


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.anon = 0

    # token helpers ------------------------------------------------------
    def peek(self, skip_nl: bool = True) -> Token:
        if skip_nl:
            while self.toks[self.i].kind == "nl":
                self.i += 1
        return self.toks[self.i]

    def next(self, skip_nl: bool = True) -> Token:
        t = self.peek(skip_nl)
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.next()
        if t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text or 'end of input'!r}", t.line, t.column)
        return t

    def error(self, msg: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(msg, tok.line, tok.column)

    # grammar ------------------------------------------------------------
    def term(self) -> Var | Const:
        t = self.next()
        if t.kind == "number":
            return Const(t.text)
        if t.kind != "ident":
            raise self.error(f"expected a term, found {t.text!r}", t)
        if t.text == "_":
            self.anon += 1
            return Var(f"_{self.anon}")
        if is_variable_name(t.text):
            return Var(t.text)
        return Const(t.text)

    def atom(self) -> Atom:
        t = self.next()
        # oracle relations (Local_R) are the only capitalised predicates
        if t.kind != "ident" or (is_variable_name(t.text) and not t.text.startswith("Local_")):
            raise self.error(f"expected a predicate name, found {t.text!r}", t)
        args: list = []
        if self.peek().text == "(":
            self.next()
            args.append(self.term())
            while self.peek().text == ",":
                self.next()
                args.append(self.term())
            self.expect(")")
        return Atom(t.text, tuple(args))

    def literal(self) -> Literal:
        positive = True
        if self.peek().text == "!":
            self.next()
            positive = False
        return Literal(self.atom(), positive)

    def rule(self) -> tuple[Rule, Token]:
        start = self.peek()
        self.anon = 0
        head = self.literal()
        body: list[Literal] = []
        forall: set[str] = set()
        if self.peek().text == ":-":
            self.next()
            if self.peek().text == "forall":
                self.next()
                while True:
                    t = self.peek()
                    if t.kind == "ident" and is_variable_name(t.text) and t.text != "_":
                        self.next()
                        forall.add(t.text)
                    else:
                        break
                if not forall:
                    raise self.error("forall needs at least one variable")
            if self.peek().text != ".":
                body.append(self.literal())
                while self.peek().text == ",":
                    self.next()
                    body.append(self.literal())
        self.expect(".")
        return Rule(head, tuple(body), frozenset(forall)), start

    def declaration(self, decl: dict) -> None:
        at = self.next()
        kw = self.next(skip_nl=False)
        if kw.text == "dialect":
            d = self.next(skip_nl=False)
            if d.kind != "ident":
                raise self.error("expected a dialect name", d)
            decl["dialect"] = d.text
            return
        if kw.kind != "ident" or kw.text not in ("edb", "eidb", "idb", "output"):
            raise self.error(f"unknown declaration @{kw.text}", kw)
        items: list[tuple[str, int | None, Token]] = []
        while self.peek(skip_nl=False).kind == "ident":
            name = self.next(skip_nl=False)
            arity = None
            if self.peek(skip_nl=False).text == "/":
                self.next(skip_nl=False)
                n = self.next(skip_nl=False)
                if n.kind != "number":
                    raise self.error("expected an arity", n)
                arity = int(n.text)
            items.append((name.text, arity, name))
        end = self.peek(skip_nl=False)
        if end.kind not in ("nl", "eof"):
            raise self.error(f"unexpected {end.text!r} in declaration", end)
        if kw.text == "output":
            if len(items) != 1:
                raise self.error("@output takes exactly one predicate", at)
            if decl["output"] is not None:
                raise self.error("duplicate @output", at)
            decl["output"] = items[0][0]
        for name, arity, tok in items:
            if kw.text != "output":
                decl[kw.text].add(name)
            if arity is None:
                if kw.text != "output":
                    raise self.error(f"declaration of {name} needs an arity", tok)
                continue
            prev = decl["arities"].get(name)
            if prev is not None and prev != arity:
                raise ArityError(f"{name} declared with arities {prev} and {arity}")
            decl["arities"][name] = arity


def _parse(text: str) -> tuple[list[Rule], dict, list[Token]]:
    p = _Parser(text)
    decl = {"arities": {}, "edb": set(), "eidb": set(), "idb": set(), "output": None, "dialect": None}
    rules: list[Rule] = []
    starts: list[Token] = []
    while p.peek().kind != "eof":
        if p.peek().text == "@":
            p.declaration(decl)
        else:
            r, tok = p.rule()
            if r not in rules:
                rules.append(r)
                starts.append(tok)
    return rules, decl, starts


def check_rule_safety(rule: Rule) -> None:
    """Raise :class:`SafetyError` unless ``rule`` is safe."""
    positive_vars: set[str] = set()
    for lit in rule.body:
        if lit.positive:
            positive_vars.update(lit.atom.variables())
    for v in rule.forall:
        if v in rule.head.atom.variables():
            raise SafetyError(f"forall variable {v} occurs in the head of {rule}")
        for lit in rule.body:
            if lit.positive and v in lit.atom.variables():
                raise SafetyError(f"forall variable {v} occurs in a positive atom of {rule}")
        if not any(v in lit.atom.variables() for lit in rule.body):
            raise SafetyError(f"forall variable {v} does not occur in the body of {rule}")
    for v in sorted(rule.variables() - rule.forall):
        if v not in positive_vars:
            raise SafetyError(f"variable {v} has no positive occurrence in {rule}")


def build_program(
    rules: list[Rule] | tuple[Rule, ...],
    *,
    arities: dict[str, int] | None = None,
    edb: set[str] | frozenset[str] = frozenset(),
    eidb: set[str] | frozenset[str] = frozenset(),
    idb: set[str] | frozenset[str] = frozenset(),
    output: str | None = None,
    dialect: Dialect | str | None = None,
) -> Program:
    """Validate ``rules`` and infer the missing parts of the schema."""
    ar: dict[str, int] = dict(arities or {})
    for r in rules:
        for a in [r.head.atom] + [l.atom for l in r.body]:
            prev = ar.setdefault(a.pred, a.arity)
            if prev != a.arity:
                raise ArityError(f"{a.pred} used with arities {prev} and {a.arity} (in {r})")
    uses_dlpm = any(not r.head.positive or r.forall for r in rules) or bool(eidb)
    if dialect is None:
        dialect = Dialect.DLPM if uses_dlpm else Dialect.DATALOG_NEG
    dialect = Dialect(dialect)
    if dialect is Dialect.DATALOG_NEG:
        for r in rules:
            if not r.head.positive:
                raise DialectError(f"negative head not allowed in datalog-neg: {r}")
            if r.forall:
                raise DialectError(f"forall not allowed in datalog-neg: {r}")
        if eidb:
            raise DialectError("eidb relations not allowed in datalog-neg")
    edb, eidb, idb = set(edb), set(eidb), set(idb)
    for name, a, b in (("edb/eidb", edb, eidb), ("edb/idb", edb, idb), ("eidb/idb", eidb, idb)):
        if a & b:
            raise SchemaError(f"{name} overlap: {sorted(a & b)}")
    heads = {r.head.atom.pred for r in rules}
    bad = heads & edb
    if bad:
        raise SchemaError(f"edb relations in rule heads: {sorted(bad)}")
    idb |= heads - eidb
    used = set(ar)
    edb |= used - idb - eidb
    for p in edb | eidb | idb:
        if p not in ar:
            raise ArityError(f"no arity known for {p}")
    if output is not None and output not in idb:
        raise SchemaError(f"output {output} is not an idb relation")
    for r in rules:
        check_rule_safety(r)
    schema = Schema(
        arities=dict(sorted(ar.items())),
        edb=frozenset(edb),
        eidb=frozenset(eidb),
        idb=frozenset(idb),
        output=output,
    )
    return Program(tuple(rules), schema, dialect)


def parse_program(text: str, dialect: Dialect | str | None = None) -> Program:
    """Parse program text.

    With ``dialect=None`` the update dialect is chosen iff the text uses
    negative heads, ``forall`` or ``@eidb``.
    """
    rules, decl, _ = _parse(text)
    return build_program(
        rules,
        arities=decl["arities"],
        edb=decl["edb"],
        eidb=decl["eidb"],
        idb=decl["idb"],
        output=decl["output"],
        dialect=dialect if dialect is not None else _dialect_name(decl["dialect"]),
    )


def _dialect_name(name: str | None) -> Dialect | None:
    if name is None:
        return None
    if name in ("dlpm", "DLpm"):
        return Dialect.DLPM
    if name in ("datalog_neg", "datalog"):
        return Dialect.DATALOG_NEG
    raise ParseError(f"unknown dialect {name}")


def parse_rules(text: str) -> list[Rule]:
    """Parse rules without schema validation (used by the transducer format)."""
    rules, decl, _ = _parse(text)
    if any(decl[k] for k in ("edb", "eidb", "idb", "arities", "output", "dialect")):
        raise ParseError("declarations are not allowed here")
    return rules


def iter_facts(text: str) -> Iterator[Fact]:
    p = _Parser(text)
    while p.peek().kind != "eof":
        start = p.peek()
        lit = p.literal()
        p.expect(".")
        if not lit.positive:
            raise ParseError("facts cannot be negated", start.line, start.column)
        for t in lit.atom.args:
            if isinstance(t, Var):
                raise ParseError(f"variable {t.name} in fact {lit.atom}", start.line, start.column)
        yield lit.atom.ground({})


def parse_facts(text: str, schema: Schema | dict[str, int] | None = None) -> frozenset[Fact]:
    """Parse a facts file, checking predicates and arities against ``schema``."""
    arities = None
    if isinstance(schema, Schema):
        arities = schema.arities
    elif schema is not None:
        arities = schema
    seen: dict[str, int] = {}
    out: set[Fact] = set()
    for f in iter_facts(text):
        if arities is not None:
            if f.pred not in arities:
                raise SchemaError(f"unknown predicate {f.pred}")
            if arities[f.pred] != len(f.args):
                raise ArityError(f"{f} does not match arity {arities[f.pred]}")
        else:
            prev = seen.setdefault(f.pred, len(f.args))
            if prev != len(f.args):
                raise ArityError(f"{f.pred} used with arities {prev} and {len(f.args)}")
        out.add(f)
    return frozenset(out)


def parse_fact(text: str) -> Fact:
    facts = list(iter_facts(text if text.rstrip().endswith(".") else text + "."))
    if len(facts) != 1:
        raise ParseError(f"expected one fact, got {len(facts)}")
    return facts[0]
