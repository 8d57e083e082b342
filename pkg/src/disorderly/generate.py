"""Seeded random programs and instances for property tests and experiments."""

from __future__ import annotations

import itertools
import random
from typing import Mapping

from .analysis import is_friendly, is_semi_monotone
from .parser import build_program
from .syntax import Atom, Dialect, Fact, Literal, Program, Rule, Var

EDB = {"e": 2, "b": 1}
EIDB = {"k": 1, "g": 2}
IDB = {"p": 1, "q": 2}
VARS = ("X", "Y", "Z")


def _atom(rng: random.Random, pred: str, arity: int, pool: tuple[str, ...]) -> Atom:
    return Atom(pred, tuple(Var(rng.choice(pool)) for _ in range(arity)))


def _rule(
    rng: random.Random,
    positive: Mapping[str, int],
    negative: Mapping[str, int],
    heads: list[tuple[str, int, bool]],
    allow_forall: bool,
    max_neg: int = 2,
) -> Rule:
    pos = [_atom(rng, r, n, VARS) for r, n in rng.sample(sorted(positive.items()), k=rng.randint(1, 2))]
    bound = sorted({v for a in pos for v in a.variables()})
    neg = []
    forall: set[str] = set()
    for _ in range(rng.randint(0, max_neg)):
        rel, n = rng.choice(sorted(negative.items()))
        pool = tuple(bound)
        if allow_forall and n > 1 and rng.random() < 0.3:
            pool = pool + ("W",)
        a = _atom(rng, rel, n, pool)
        if a in neg:
            continue
        if "W" in a.variables():
            forall.add("W")
        neg.append(a)
    rel, n, sign = rng.choice(heads)
    head = _atom(rng, rel, n, tuple(bound))
    body = tuple(Literal(a, True) for a in pos) + tuple(Literal(a, False) for a in neg)
    return Rule(Literal(head, sign), body, frozenset(forall))


def random_semi_monotone_program(
    seed: int,
    *,
    rules: int = 3,
    friendly: bool = False,
    allow_forall: bool = True,
    max_neg: int = 2,
) -> Program:
    """Idb heads are insertions, eidb heads deletions; eidb relations are
    only read negatively, idb relations only positively."""
    rng = random.Random(seed)
    heads = [(r, n, True) for r, n in sorted(IDB.items())] + [(r, n, False) for r, n in sorted(EIDB.items())]
    while True:
        # the first rule seeds the idb from edb facts alone
        rs = [_rule(rng, EDB, EIDB | EDB, heads[:len(IDB)], allow_forall, max_neg)]
        rs += [_rule(rng, EDB | IDB, EIDB | EDB, heads, allow_forall, max_neg) for _ in range(rules - 1)]
        if not any(r.head.positive for r in rs):
            continue
        p = build_program(
            rs,
            arities=EDB | EIDB | IDB,
            edb=set(EDB),
            eidb=set(EIDB),
            idb=set(IDB),
            output=next(r.head.atom.pred for r in rs if r.head.positive),
            dialect=Dialect.DLPM,
        )
        if not is_semi_monotone(p):
            continue
        if friendly and not is_friendly(p):
            continue
        return p


def random_datalog_neg_program(seed: int, *, rules: int = 3) -> Program:
    """Positive heads over idb p/1, q/2; negation anywhere in bodies."""
    rng = random.Random(seed)
    heads = [(r, n, True) for r, n in sorted(IDB.items())]
    rs = [_rule(rng, EDB, EDB | IDB, heads, False)]
    rs += [_rule(rng, EDB | IDB, EDB | IDB, heads, False) for _ in range(rules - 1)]
    return build_program(
        rs,
        arities=EDB | IDB,
        edb=set(EDB),
        idb=set(IDB),
        output=rs[0].head.atom.pred,
        dialect=Dialect.DATALOG_NEG,
    )


def random_instance(
    arities: Mapping[str, int],
    constants: int | list[str],
    density: float,
    seed: int,
) -> frozenset[Fact]:
    rng = random.Random(seed)
    consts = [f"c{i}" for i in range(constants)] if isinstance(constants, int) else list(constants)
    out = set()
    for rel in sorted(arities):
        for args in itertools.product(consts, repeat=arities[rel]):
            if rng.random() < density:
                out.add(Fact(rel, args))
    return frozenset(out)


def program_inputs(p: Program, constants: int, density: float, seed: int) -> frozenset[Fact]:
    rels = {r: p.schema.arities[r] for r in p.schema.inputs}
    return random_instance(rels, constants, density, seed)
