"""Trace checkers relating network runs to the centralized semantics.

``abstract_state`` maps a network state of a compiled transducer to an
instance of the transformed program: unions of the idb memories, and for
an eidb fact presence unless some node responsible for it has recorded
its deletion.  The auditors below are run as ``observer`` callbacks of
the netsim schedulers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .compiler import CompilationUnit, UniversalUnit, mem
from .ground import derived_updates
from .netsim import GlobalNetworkState, PartitioningPolicy, StepRecord
from .syntax import Fact, Update
from .transducer import LocalState
from .wellfounded import stratified_eval


class _Scope:
    def __init__(self, unit: CompilationUnit, policy: PartitioningPolicy, i: frozenset[Fact]):
        self.unit = unit
        self.policy = policy
        s = unit.prime.schema
        derived = set(unit.projection.schema.idb) if unit.projection is not None else set()
        self.derived = derived
        init: set[Fact] = set()
        for rel in s.eidb:
            if rel in derived:
                continue
            src = unit.eidb_sources.get(rel, rel)
            init |= {Fact(rel, f.args) for f in i if f.pred == src}
        if unit.projection is not None:
            edb = frozenset(f for f in i if f.pred in unit.projection.schema.edb)
            init |= {f for f in stratified_eval(unit.projection, edb) if f.pred in derived}
        self.init_eidb = frozenset(init)
        self.edb = frozenset(f for f in i if f.pred in s.edb)

    def nodes(self, f: Fact) -> frozenset[str]:
        if f.pred in self.derived:
            t = self.unit.designated
            n = self.unit.projection.schema.arities[t]
            out: set[str] = set()
            for c in f.args:
                out |= self.policy.nodes_for(Fact(t, (c,) * n))
            return frozenset(out)
        src = self.unit.eidb_sources.get(f.pred, f.pred)
        return self.policy.nodes_for(Fact(src, f.args))


def abstract_state(scope: _Scope, locals_: Mapping[str, LocalState]) -> frozenset[Fact]:
    s = scope.unit.prime.schema
    out = set(scope.edb)
    by_pred: dict[str, set[tuple]] = {}
    for st in locals_.values():
        for f in st.instance:
            by_pred.setdefault(f.pred, set()).add(f.args)
    for rel in s.idb:
        out |= {Fact(rel, a) for a in by_pred.get(mem(rel), ())}
    deleted: dict[Fact, set[str]] = {}
    for node, st in locals_.items():
        for f in st.instance:
            if f.pred.startswith("d_") and f.pred[2:] in s.eidb:
                deleted.setdefault(Fact(f.pred[2:], f.args), set()).add(node)
    for f in scope.init_eidb:
        if not (deleted.get(f, set()) & scope.nodes(f)):
            out.add(f)
    return frozenset(out)


def message_update(unit: CompilationUnit, m: Fact) -> Update:
    rel = m.pred[len("u_"):]
    return Update(rel in unit.prime.schema.idb, Fact(rel, m.args))


@dataclass
class AbstractionAuditor:
    """Checks that every update a node sends is derivable in the abstract
    state before the transition, and that consecutive abstract states are
    linked by derivable or already sent updates."""

    unit: CompilationUnit
    input: frozenset[Fact]
    policy: PartitioningPolicy
    unsound: list[tuple[int, Fact]] = field(default_factory=list)
    emulation: list[int] = field(default_factory=list)
    transitions: int = 0

    def __post_init__(self):
        self.input = frozenset(self.input)
        self._scope = _Scope(self.unit, self.policy, self.input)
        self._sent: set[Update] = set()

    def __call__(self, g: GlobalNetworkState, rec: StepRecord) -> None:
        self.transitions += 1
        prog = self.unit.prime
        before = dict(g.locals)
        before[rec.node] = rec.before
        pre = abstract_state(self._scope, before)
        post = abstract_state(self._scope, g.locals)
        derivable = None
        for m in rec.sent:
            u = message_update(self.unit, m)
            if rec.msg == m:
                continue
            if derivable is None:
                derivable = derived_updates(prog.rules, pre)
            if u not in derivable:
                self.unsound.append((rec.step, m))
            self._sent.add(u)
        if rec.msg is not None:
            self._sent.add(message_update(self.unit, rec.msg))
        if pre != post and not self._linked(pre, post):
            self.emulation.append(rec.step)

    def _linked(self, pre: frozenset[Fact], post: frozenset[Fact]) -> bool:
        s = self.unit.prime.schema
        for f in pre - post:
            if f.pred not in s.eidb:
                return False
        for f in post - pre:
            if f.pred not in s.idb:
                return False
        todo = {Update(True, f) for f in post - pre} | {Update(False, f) for f in pre - post}
        cur = set(pre)
        while todo:
            derivable = derived_updates(self.unit.prime.rules, frozenset(cur))
            step = [u for u in todo if u in derivable or u in self._sent]
            if not step:
                return False
            for u in step:
                (cur.add if u.positive else cur.discard)(u.fact)
                todo.discard(u)
        return True

    @property
    def ok(self) -> bool:
        return not self.unsound and not self.emulation


@dataclass
class ReadyAuditor:
    """No node may be ready before it holds the entire global input."""

    unit: UniversalUnit
    input: frozenset[Fact]
    violations: list[int] = field(default_factory=list)
    ready_seen: int = 0

    def __post_init__(self):
        self.input = frozenset(self.input)
        self._inputs = sorted(self.unit.query.schema.edb)

    def __call__(self, g: GlobalNetworkState, rec: StepRecord) -> None:
        inst = rec.after.instance
        ready = Fact("m_ready", ()) in inst
        if rec.out and not ready:
            self.violations.append(rec.step)
            return
        if not ready:
            return
        self.ready_seen += 1
        for r in self._inputs:
            have = {f.args for f in inst if f.pred == f"m_pos_{r}"}
            want = {f.args for f in self.input if f.pred == r}
            if have != want:
                self.violations.append(rec.step)
                return

    @property
    def ok(self) -> bool:
        return not self.violations


__all__ = ["AbstractionAuditor", "ReadyAuditor", "abstract_state", "message_update"]
