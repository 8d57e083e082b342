"""Static analysis: dependency graph and the syntactic program classes."""

from __future__ import annotations

from dataclasses import dataclass

from .syntax import Program, Rule, Var


@dataclass(frozen=True)
class DependencyGraph:
    vertices: frozenset[str]
    edges: frozenset[tuple[str, str, str]]  # (from, to, "+" | "-")

    def successors(self, v: str) -> set[str]:
        return {b for a, b, _ in self.edges if a == v}


def dependency_graph(p: Program) -> DependencyGraph:
    vertices: set[str] = set()
    edges: set[tuple[str, str, str]] = set()
    for r in p.rules:
        h = r.head.atom.pred
        vertices.add(h)
        for lit in r.body:
            vertices.add(lit.atom.pred)
            edges.add((lit.atom.pred, h, "+" if lit.positive else "-"))
    return DependencyGraph(frozenset(vertices), frozenset(edges))


def _reachable(g: DependencyGraph, start: str) -> set[str]:
    adj: dict[str, set[str]] = {}
    for a, b, _ in g.edges:
        adj.setdefault(a, set()).add(b)
    seen: set[str] = set()
    stack = [start]
    while stack:
        v = stack.pop()
        for w in adj.get(v, ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def is_stratifiable(p: Program) -> bool:
    """No cycle of the dependency graph passes through a negative edge."""
    g = dependency_graph(p)
    for a, b, sign in g.edges:
        if sign == "-" and (a == b or a in _reachable(g, b)):
            return False
    return True


def stratify(p: Program) -> list[set[str]]:
    """Idb predicates grouped into evaluation strata (lowest first)."""
    if not is_stratifiable(p):
        raise ValueError("program is not stratifiable")
    idb = set(p.schema.idb) | set(p.schema.eidb)
    level = {q: 0 for q in idb}
    changed = True
    while changed:
        changed = False
        for r in p.rules:
            h = r.head.atom.pred
            for lit in r.body:
                q = lit.atom.pred
                if q not in level:
                    continue
                need = level[q] + (0 if lit.positive else 1)
                if level[h] < need:
                    level[h] = need
                    changed = True
    strata: list[set[str]] = [set() for _ in range(max(level.values(), default=-1) + 1)]
    for q, n in level.items():
        strata[n].add(q)
    return strata


def is_semi_positive(p: Program) -> bool:
    return all(
        lit.positive or lit.atom.pred in p.schema.edb for r in p.rules for lit in r.body
    )


def is_semi_monotone(p: Program) -> bool:
    """Idb relations occur only positively, eidb relations only negatively."""
    s = p.schema
    for r in p.rules:
        for lit in (r.head, *r.body):
            if lit.atom.pred in s.idb and not lit.positive:
                return False
            if lit.atom.pred in s.eidb and lit.positive:
                return False
    return True


def rule_is_friendly(r: Rule) -> bool:
    neg = r.negative_body()
    if not neg:
        return True
    if len(neg) == 1 and not set(neg[0].variables()) & r.forall:
        return True
    # a forall atom needs a free variable to scope its guard
    common = set(neg[0].variables())
    for a in neg[1:]:
        common &= set(a.variables())
    return bool(common - r.forall)


def is_friendly(p: Program) -> bool:
    return all(rule_is_friendly(r) for r in p.rules)


def is_projection_rule(r: Rule) -> bool:
    if len(r.body) != 1 or not r.body[0].positive or not r.head.positive or r.forall:
        return False
    head, body = r.head.atom, r.body[0].atom
    if not all(isinstance(t, Var) for t in head.args + body.args):
        return False
    z = head.variables()
    return bool(z) and set(z) <= set(body.variables())


def is_projection_program(p: Program) -> bool:
    return all(is_projection_rule(r) for r in p.rules)


def negated_eidb_count(r: Rule, eidb: frozenset[str]) -> int:
    return sum(1 for a in r.negative_body() if a.pred in eidb)


def max_negated_eidb_per_rule(p: Program) -> int:
    return max((negated_eidb_count(r, p.schema.eidb) for r in p.rules), default=0)
