"""Well-founded semantics by alternating fixpoint and by the doubled program."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable

from .analysis import stratify
from .ground import FactIndex, derived_updates
from .syntax import Atom, Fact, Literal, Program, Rule, active_domain

_ASSUMED = "\x00J:"  # prefix for relations read from the assumption set J
_DELTA = "\x00D:"    # prefix for relations read from the last delta (semi-naive)


def _require_positive_heads(p: Program) -> None:
    for r in p.rules:
        if not r.head.positive or r.forall:
            raise ValueError(f"well-founded evaluation needs plain Datalog rules: {r}")


@lru_cache(maxsize=1024)
def _assumption_rules(rules: tuple[Rule, ...]) -> tuple[Rule, ...]:
    """Rewrite negated atoms to read from the renamed copy of J."""
    out = []
    for r in rules:
        body = tuple(
            lit if lit.positive else Literal(Atom(_ASSUMED + lit.atom.pred, lit.atom.args), False)
            for lit in r.body
        )
        out.append(Rule(r.head, body, r.forall))
    return tuple(out)


@lru_cache(maxsize=1024)
def _delta_rules(rules: tuple[Rule, ...]) -> tuple[tuple[Rule, ...], tuple[Rule, ...]]:
    """Split into (rules without positive atoms, one delta variant per positive atom)."""
    static, variants = [], []
    for r in _assumption_rules(rules):
        pos = [k for k, lit in enumerate(r.body) if lit.positive]
        if not pos:
            static.append(r)
        for k in pos:
            body = list(r.body)
            a = body[k].atom
            body[k] = Literal(Atom(_DELTA + a.pred, a.args), True)
            variants.append(Rule(r.head, tuple(body), r.forall))
    return tuple(static), tuple(variants)


def _renamed(prefix: str, facts: Iterable[Fact]) -> list[Fact]:
    return [Fact(prefix + f.pred, f.args) for f in facts]


def immediate_consequences(p: Program, j: Iterable[Fact], i: Iterable[Fact]) -> frozenset[Fact]:
    """Heads of ground rules whose positive body holds in ``i`` and whose
    negated atoms are all absent from ``j``."""
    _require_positive_heads(p)
    i = frozenset(i)
    combined = set(i)
    combined.update(_renamed(_ASSUMED, j))
    ups = derived_updates(_assumption_rules(p.rules), combined, index=FactIndex(combined))
    return frozenset(u.fact for u in ups)


def _closure(p: Program, seed: frozenset[Fact], j: Iterable[Fact], semi_naive: bool) -> frozenset[Fact]:
    """Least set containing ``seed`` and closed under consequences assuming ``j``."""
    assumed = _renamed(_ASSUMED, j)
    if not semi_naive:
        rules = _assumption_rules(p.rules)
        cur = seed
        while True:
            combined = set(cur)
            combined.update(assumed)
            new = {u.fact for u in derived_updates(rules, combined, index=FactIndex(combined))}
            nxt = cur | new
            if nxt == cur:
                return cur
            cur = frozenset(nxt)
    static, variants = _delta_rules(p.rules)
    combined = set(seed)
    combined.update(assumed)
    cur = set(seed)
    first = {u.fact for u in derived_updates(static, combined, index=FactIndex(combined))}
    delta = set(seed) | first
    cur |= first
    while delta:
        combined = set(cur)
        combined.update(assumed)
        combined.update(_renamed(_DELTA, delta))
        new = {u.fact for u in derived_updates(variants, combined, index=FactIndex(combined))}
        delta = new - cur
        cur |= delta
    return frozenset(cur)


def gamma(p: Program, edb: Iterable[Fact], j: Iterable[Fact], *, semi_naive: bool = False) -> frozenset[Fact]:
    """Least fixpoint of ``I -> edb ∪ T^J(I)``."""
    _require_positive_heads(p)
    return _closure(p, frozenset(edb), frozenset(j), semi_naive)


@dataclass
class AlternatingTrace:
    """Alternating sequence ``gammas`` or doubled-program pairs ``us``/``vs``."""

    gammas: list[frozenset[Fact]] = field(default_factory=list)
    us: list[frozenset[Fact]] = field(default_factory=list)
    vs: list[frozenset[Fact]] = field(default_factory=list)

    @property
    def under(self) -> frozenset[Fact]:
        """Limit of the underestimates (lfp of the squared operator)."""
        if self.us:
            return self.us[-1]
        g = self.gammas
        if len(g) >= 2 and g[-1] == g[-2]:
            return g[-1]
        return g[-1] if (len(g) - 1) % 2 == 0 else g[-2]

    @property
    def over(self) -> frozenset[Fact]:
        """Limit of the overestimates (gfp of the squared operator)."""
        if self.vs:
            return self.vs[-1]
        g = self.gammas
        if len(g) >= 2 and g[-1] == g[-2]:
            return g[-1]
        return g[-1] if (len(g) - 1) % 2 == 1 else g[-2]

    def table(self, pred: str) -> list[tuple[str, frozenset[tuple[str, ...]]]]:
        """Rows ``(label, tuples of pred)`` in evaluation order."""
        rows = []
        if self.us:
            for n, (u, v) in enumerate(itertools.zip_longest(self.us, self.vs)):
                rows.append((f"U_{n}", _proj(u, pred)))
                if v is not None:
                    rows.append((f"V_{n}", _proj(v, pred)))
        else:
            for n, g in enumerate(self.gammas):
                rows.append((f"G_{n}", _proj(g, pred)))
        return rows


def _proj(facts: Iterable[Fact] | None, pred: str) -> frozenset[tuple[str, ...]]:
    return frozenset(f.args for f in (facts or ()) if f.pred == pred)


def alternating_fixpoint(
    p: Program, edb: Iterable[Fact], *, semi_naive: bool = False, max_iter: int = 10_000
) -> AlternatingTrace:
    edb = frozenset(edb)
    trace = AlternatingTrace(gammas=[frozenset()])
    for n in range(1, max_iter + 1):
        trace.gammas.append(gamma(p, edb, trace.gammas[-1], semi_naive=semi_naive))
        g = trace.gammas
        if g[n] == g[n - 1] or (n >= 2 and g[n] == g[n - 2]):
            return trace
    raise RuntimeError("alternating fixpoint did not stabilise")


def doubled_program_eval(
    p: Program, edb: Iterable[Fact], *, semi_naive: bool = False, max_iter: int = 10_000
) -> AlternatingTrace:
    """Underestimates ``U_i`` and overestimates ``V_i`` with seeded fixpoints.

    ``U_0`` is the closure of the negation-free rules; afterwards
    ``V_i`` is the closure of ``U_i`` assuming ``U_i`` and ``U_{i+1}``
    the closure of ``U_i`` assuming ``V_i``.
    """
    _require_positive_heads(p)
    edb = frozenset(edb)
    positive = Program(
        tuple(r for r in p.rules if all(l.positive for l in r.body)), p.schema, p.dialect
    )
    u = _closure(positive, edb, (), semi_naive)
    v = _closure(p, u, u, semi_naive)
    trace = AlternatingTrace(us=[u], vs=[v])
    for i in range(1, max_iter + 1):
        if u == v:
            return trace
        u = _closure(p, u, v, semi_naive)
        v_next = _closure(p, u, u, semi_naive)
        trace.us.append(u)
        trace.vs.append(v_next)
        if v_next == v:
            return trace
        v = v_next
    raise RuntimeError("doubled program did not stabilise")


@dataclass(frozen=True)
class ThreeValuedModel:
    true_facts: frozenset[Fact]
    false_facts: frozenset[Fact]
    undef_facts: frozenset[Fact]

    def value(self, f: Fact) -> str:
        if f in self.true_facts:
            return "true"
        if f in self.undef_facts:
            return "undef"
        if f in self.false_facts:
            return "false"
        raise KeyError(f)

    def restrict(self, pred: str) -> "ThreeValuedModel":
        return ThreeValuedModel(
            frozenset(f for f in self.true_facts if f.pred == pred),
            frozenset(f for f in self.false_facts if f.pred == pred),
            frozenset(f for f in self.undef_facts if f.pred == pred),
        )


def herbrand_base(p: Program, edb: Iterable[Fact]) -> frozenset[Fact]:
    """All atoms over the program's relations and the active domain."""
    dom = sorted(active_domain(edb) | p.constants)
    out = set()
    for pred, n in p.schema.arities.items():
        for args in itertools.product(dom, repeat=n):
            out.add(Fact(pred, args))
    return frozenset(out)


def well_founded_model(p: Program, edb: Iterable[Fact], *, semi_naive: bool = False) -> ThreeValuedModel:
    edb = frozenset(edb)
    trace = alternating_fixpoint(p, edb, semi_naive=semi_naive)
    base = herbrand_base(p, edb) | trace.over
    under, over = trace.under, trace.over
    return ThreeValuedModel(under, base - over, over - under)


def stratified_eval(p: Program, edb: Iterable[Fact]) -> frozenset[Fact]:
    """Perfect model of a stratifiable program, stratum by stratum."""
    _require_positive_heads(p)
    cur = frozenset(edb)
    for stratum in stratify(p):
        rules = tuple(r for r in p.rules if r.head.atom.pred in stratum)
        while True:
            new = {u.fact for u in derived_updates(rules, cur, index=FactIndex(cur))}
            if new <= cur:
                break
            cur = cur | new
    return cur
