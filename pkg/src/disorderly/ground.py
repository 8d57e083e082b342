"""Valuation engine: enumerate the satisfying assignments of a rule body.

Non-quantified variables are bound by joining the positive atoms.  A
negated atom carrying ``forall`` variables holds for every value of those
variables iff no fact of the instance matches it with the quantified
positions as wildcards.  Facts only mention active-domain constants, so
this is exact for the domain-closure range (active domain plus the
program's constants).

Relations named in ``oracles`` are never looked up in the instance;
they are membership tests applied once all their arguments are bound.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Mapping

from .syntax import Atom, Const, Fact, Program, Rule, Update, Var

Oracle = Callable[[tuple[str, ...]], bool]


class FactIndex:
    """Hash index over an instance, built lazily per (relation, bound positions)."""

    def __init__(self, facts: Iterable[Fact]):
        self.facts = facts if isinstance(facts, (set, frozenset)) else frozenset(facts)
        self.by_pred: dict[str, list[tuple[str, ...]]] = defaultdict(list)
        for f in self.facts:
            self.by_pred[f.pred].append(f.args)
        self._idx: dict[tuple[str, tuple[int, ...]], dict[tuple[str, ...], list[tuple[str, ...]]]] = {}

    def lookup(self, pred: str, positions: tuple[int, ...], key: tuple[str, ...]) -> list[tuple[str, ...]]:
        if not positions:
            return self.by_pred.get(pred, [])
        k = (pred, positions)
        idx = self._idx.get(k)
        if idx is None:
            idx = defaultdict(list)
            for args in self.by_pred.get(pred, ()):
                idx[tuple(args[i] for i in positions)].append(args)
            self._idx[k] = idx
        return idx.get(key, [])

    def __contains__(self, f: Fact) -> bool:
        return f in self.facts


# A compiled step: (kind, pred, bound, free, checks)
#   bound: ((position, var-or-None, const-or-None), ...) positions known on entry
#   free: ((position, var), ...) first occurrences bound by this step
#   checks: ((position, earlier position), ...) repeated fresh variables
@dataclass(frozen=True, slots=True)
class _Step:
    kind: str  # "pos" | "neg" | "oracle+" | "oracle-"
    pred: str
    bound: tuple[tuple[int, str | None, str | None], ...]
    free: tuple[tuple[int, str], ...]
    checks: tuple[tuple[int, int], ...]
    arity: int
    positions: tuple[int, ...] = ()


def _mk(kind: str, atom: Atom, bound_vars: set[str]) -> _Step:
    b, f, c = _classify(atom, bound_vars)
    return _Step(kind, atom.pred, b, f, c, atom.arity, tuple(i for i, _, _ in b))


def _classify(atom: Atom, bound_vars: set[str]):
    bound, free, checks = [], [], []
    first: dict[str, int] = {}
    for i, t in enumerate(atom.args):
        if isinstance(t, Const):
            bound.append((i, None, t.value))
        elif t.name in bound_vars:
            bound.append((i, t.name, None))
        elif t.name in first:
            checks.append((i, first[t.name]))
        else:
            first[t.name] = i
            free.append((i, t.name))
    return tuple(bound), tuple(free), tuple(checks)


@lru_cache(maxsize=4096)
def _plan(rule: Rule, oracle_preds: frozenset[str]) -> tuple[_Step, ...]:
    positives = [a for a in rule.positive_body() if a.pred not in oracle_preds]
    pending_pos_oracles = [a for a in rule.positive_body() if a.pred in oracle_preds]
    pending_neg = list(rule.negative_body())
    bound: set[str] = set()
    steps: list[_Step] = []

    def flush() -> None:
        for a in list(pending_pos_oracles):
            if set(a.variables()) <= bound:
                steps.append(_mk("oracle+", a, bound))
                pending_pos_oracles.remove(a)
        for a in list(pending_neg):
            if set(a.variables()) - rule.forall <= bound:
                kind = "oracle-" if a.pred in oracle_preds else "neg"
                if kind == "oracle-" and set(a.variables()) & rule.forall:
                    raise ValueError(f"forall variable inside an oracle atom: {rule}")
                steps.append(_mk(kind, a, bound))
                pending_neg.remove(a)

    flush()
    remaining = list(positives)
    while remaining:
        # most bound positions first; ties keep source order
        def score(a: Atom) -> int:
            return sum(1 for t in a.args if isinstance(t, Const) or t.name in bound)

        best = max(remaining, key=lambda a: (score(a), -remaining.index(a)))
        remaining.remove(best)
        steps.append(_mk("pos", best, bound))
        bound.update(best.variables())
        flush()
    if pending_pos_oracles or pending_neg:
        raise ValueError(f"rule is not safe for evaluation: {rule}")
    return tuple(steps)


def _key(step: _Step, env: dict[str, str]) -> tuple[str, ...]:
    return tuple(env[v] if v is not None else c for _, v, c in step.bound)


def _search(
    steps: tuple[_Step, ...],
    k: int,
    env: dict[str, str],
    index: FactIndex,
    oracles: Mapping[str, Oracle],
) -> Iterator[dict[str, str]]:
    if k == len(steps):
        yield env
        return
    st = steps[k]
    if st.kind == "pos":
        for args in index.lookup(st.pred, st.positions, _key(st, env)):
            if any(args[i] != args[j] for i, j in st.checks):
                continue
            if st.free:
                env2 = dict(env)
                for i, v in st.free:
                    env2[v] = args[i]
                yield from _search(steps, k + 1, env2, index, oracles)
            else:
                yield from _search(steps, k + 1, env, index, oracles)
        return
    if st.kind == "neg":
        if not st.free:
            args = [""] * st.arity
            for i, v, c in st.bound:
                args[i] = env[v] if v is not None else c
            hit = Fact(st.pred, tuple(args)) in index
        else:
            hit = any(
                all(args[i] == args[j] for i, j in st.checks)
                for args in index.lookup(st.pred, st.positions, _key(st, env))
            )
        if not hit:
            yield from _search(steps, k + 1, env, index, oracles)
        return
    args = [""] * st.arity
    for i, v, c in st.bound:
        args[i] = env[v] if v is not None else c
    ok = oracles[st.pred](tuple(args))
    if ok == (st.kind == "oracle+"):
        yield from _search(steps, k + 1, env, index, oracles)


def valuations(
    rule: Rule,
    instance: Iterable[Fact],
    *,
    oracles: Mapping[str, Oracle] | None = None,
    index: FactIndex | None = None,
) -> Iterator[tuple[dict[str, str], Update]]:
    """Yield every satisfying assignment of ``rule``'s body with its head update."""
    oracles = oracles or {}
    if index is None:
        index = FactIndex(instance)
    steps = _plan(rule, frozenset(oracles))
    head = rule.head
    for env in _search(steps, 0, {}, index, oracles):
        yield env, Update(head.positive, head.atom.ground(env))


def binding_key(env: Mapping[str, str]) -> tuple[tuple[str, str], ...]:
    return tuple(sorted(env.items()))


def firings(
    program: Program | Iterable[Rule],
    instance: Iterable[Fact],
    *,
    oracles: Mapping[str, Oracle] | None = None,
    index: FactIndex | None = None,
) -> list[tuple[int, tuple[tuple[str, str], ...], Update]]:
    """All (rule index, valuation, head update) triples on ``instance``."""
    rules = program.rules if isinstance(program, Program) else tuple(program)
    if index is None:
        index = FactIndex(instance)
    out = []
    for n, r in enumerate(rules):
        for env, upd in valuations(r, instance, oracles=oracles, index=index):
            out.append((n, binding_key(env), upd))
    return out


def derived_updates(
    rules: Iterable[Rule],
    instance: Iterable[Fact],
    *,
    oracles: Mapping[str, Oracle] | None = None,
    index: FactIndex | None = None,
) -> set[Update]:
    rules = tuple(rules)
    if index is None:
        index = FactIndex(instance)
    out: set[Update] = set()
    for r in rules:
        for _, upd in valuations(r, instance, oracles=oracles, index=index):
            out.add(upd)
    return out
