"""Deterministic, non-deterministic and disorderly semantics of update programs."""

from __future__ import annotations

import random
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .analysis import is_semi_monotone
from .ground import FactIndex, firings
from .syntax import Fact, Program, Update


class BudgetExceeded(RuntimeError):
    """Raised when an exhaustive search explores more states than allowed."""

    def __init__(self, explored: int):
        super().__init__(f"state budget exceeded after {explored} states")
        self.explored = explored


def apply_update(instance: frozenset[Fact], u: Update) -> frozenset[Fact]:
    if u.positive:
        return instance if u.fact in instance else instance | {u.fact}
    return instance - {u.fact} if u.fact in instance else instance


def is_noop(instance: frozenset[Fact] | set[Fact], u: Update) -> bool:
    return (u.fact in instance) == u.positive


# deterministic semantics ---------------------------------------------------

def det_step(p: Program, i: Iterable[Fact]) -> frozenset[Fact]:
    """Fire every rule at once; an atom both inserted and deleted is left alone."""
    i = frozenset(i)
    plus, minus = set(), set()
    for _, _, u in firings(p, i):
        (plus if u.positive else minus).add(u.fact)
    return (i | (plus - minus)) - (minus - plus)


@dataclass(frozen=True)
class Fixpoint:
    instance: frozenset[Fact]
    steps: int


@dataclass(frozen=True)
class NoFixpoint:
    cycle: tuple[frozenset[Fact], ...]


def det_eval(p: Program, i: Iterable[Fact], max_steps: int | None = None) -> Fixpoint | NoFixpoint:
    cur = frozenset(i)
    seen: dict[frozenset[Fact], int] = {cur: 0}
    order = [cur]
    n = 0
    while True:
        nxt = det_step(p, cur)
        n += 1
        if nxt == cur:
            return Fixpoint(cur, n - 1)
        if nxt in seen:
            return NoFixpoint(tuple(order[seen[nxt]:]))
        if max_steps is not None and n >= max_steps:
            raise BudgetExceeded(n)
        seen[nxt] = n
        order.append(nxt)
        cur = nxt


# non-deterministic semantics --------------------------------------------

def nondet_successors(p: Program, i: Iterable[Fact], include_noops: bool = False) -> set[frozenset[Fact]]:
    """Immediate successors: apply one firing's head update."""
    i = frozenset(i)
    out = set()
    for _, _, u in firings(p, i):
        j = apply_update(i, u)
        if include_noops or j != i:
            out.add(j)
    return out


def nondet_result_set(p: Program, i: Iterable[Fact], bound: int = 100_000) -> set[frozenset[Fact]]:
    """Reachable instances without a changing immediate successor."""
    start = frozenset(i)
    seen = {start}
    queue = deque([start])
    results = set()
    while queue:
        cur = queue.popleft()
        succ = nondet_successors(p, cur)
        if not succ:
            results.add(cur)
        for j in succ:
            if j not in seen:
                if len(seen) >= bound:
                    raise BudgetExceeded(len(seen))
                seen.add(j)
                queue.append(j)
    return results


def nondet_run(
    p: Program, i: Iterable[Fact], seed: int = 0, max_steps: int = 100_000
) -> tuple[frozenset[Fact], list[TraceStep]]:
    """A seeded walk of changing immediate successors until none is left."""
    rng = random.Random(seed)
    cur = frozenset(i)
    trace: list[TraceStep] = []
    for _ in range(max_steps):
        options = sorted(
            {(u, n) for n, _, u in firings(p, cur) if not is_noop(cur, u)},
            key=lambda x: (str(x[0]), x[1]),
        )
        if not options:
            return cur, trace
        # keep the first rule index per update
        first: dict[Update, int] = {}
        for u, n in options:
            first.setdefault(u, n)
        u = rng.choice(sorted(first, key=str))
        cur = apply_update(cur, u)
        trace.append(TraceStep("insert" if u.positive else "delete", u, first[u]))
    raise BudgetExceeded(max_steps)


# disorderly semantics ------------------------------------------------------

@dataclass(frozen=True)
class UpdateBag:
    """Immutable multiset of updates."""

    counts: frozenset[tuple[Update, int]] = frozenset()

    @classmethod
    def of(cls, updates: Iterable[Update] | Counter) -> "UpdateBag":
        c = updates if isinstance(updates, Counter) else Counter(updates)
        return cls(frozenset((u, n) for u, n in c.items() if n > 0))

    def counter(self) -> Counter:
        return Counter(dict(self.counts))

    def add(self, u: Update) -> "UpdateBag":
        c = self.counter()
        c[u] += 1
        return UpdateBag.of(c)

    def remove(self, u: Update) -> "UpdateBag":
        c = self.counter()
        if c[u] <= 0:
            raise KeyError(u)
        c[u] -= 1
        return UpdateBag.of(c)

    def count(self, u: Update) -> int:
        return dict(self.counts).get(u, 0)

    def distinct(self) -> list[Update]:
        return sorted(u for u, _ in self.counts)

    def __contains__(self, u: Update) -> bool:
        return self.count(u) > 0

    def __len__(self) -> int:
        return sum(n for _, n in self.counts)

    def __str__(self) -> str:
        parts = []
        for u in self.distinct():
            n = self.count(u)
            parts.append(str(u) if n == 1 else f"{u}*{n}")
        return "{" + ", ".join(parts) + "}"


@dataclass(frozen=True)
class DisorderlyState:
    instance: frozenset[Fact]
    pending: UpdateBag = field(default_factory=UpdateBag)


@dataclass(frozen=True)
class TraceStep:
    kind: str  # request | insert | delete
    update: Update
    rule: int | None
    state: DisorderlyState | None = None

    def line(self, n: int) -> str:
        rule = "-" if self.rule is None else str(self.rule)
        return f"step={n} kind={self.kind} update={self.update} rule={rule}"


def disorderly_successors(s: DisorderlyState, p: Program) -> list[tuple[TraceStep, DisorderlyState]]:
    """Every request, insert and delete successor of ``s`` (distinct states)."""
    out: dict[DisorderlyState, TraceStep] = {}
    for n, _, u in sorted(firings(p, s.instance)):
        t = DisorderlyState(s.instance, s.pending.add(u))
        out.setdefault(t, TraceStep("request", u, n, t))
    for u in s.pending.distinct():
        t = DisorderlyState(apply_update(s.instance, u), s.pending.remove(u))
        out.setdefault(t, TraceStep("insert" if u.positive else "delete", u, None, t))
    return [(step, t) for t, step in out.items()]


class _FiringCache:
    """Distinct derivable updates per instance, with the first rule deriving each."""

    def __init__(self, p: Program, size: int = 4096):
        self.p = p
        self.size = size
        self.memo: dict[frozenset[Fact], dict[Update, int]] = {}

    def __call__(self, instance: frozenset[Fact]) -> dict[Update, int]:
        hit = self.memo.get(instance)
        if hit is None:
            hit = {}
            for n, _, u in firings(self.p, instance, index=FactIndex(instance)):
                if u not in hit or n < hit[u]:
                    hit[u] = n
            if len(self.memo) >= self.size:
                self.memo.clear()
            self.memo[instance] = hit
        return hit


def is_terminal(p: Program, s: DisorderlyState, _cache: _FiringCache | None = None) -> bool:
    """No eventual successor can change the instance.

    Requests leave the instance alone, so the instance can only change by
    applying a pending or derivable update that is not a no-op.  If none
    exists, applying and requesting keep the instance (and therefore the
    derivable updates) fixed forever.
    """
    derive = _cache or _FiringCache(p)
    if any(not is_noop(s.instance, u) for u in s.pending.distinct()):
        return False
    return all(is_noop(s.instance, u) for u in derive(s.instance))


def disorderly_result_set(
    p: Program,
    i: Iterable[Fact],
    bound: int = 200_000,
    *,
    useful_only: bool | None = None,
) -> set[frozenset[Fact]]:
    """Instances of the reachable terminal states.

    Pending multiplicities are capped at one.  With ``useful_only`` (the
    default for semi-monotone programs) only updates that would change the
    instance are requested and no-op pending updates are discarded; both
    are exact there because inserted idb facts and deleted eidb facts stay
    that way.
    """
    if useful_only is None:
        useful_only = is_semi_monotone(p)
    derive = _FiringCache(p)
    start = (frozenset(i), frozenset())
    seen = {start}
    queue = deque([start])
    results: set[frozenset[Fact]] = set()
    while queue:
        inst, pend = queue.popleft()
        ups = derive(inst)
        if all(is_noop(inst, u) for u in pend) and all(is_noop(inst, u) for u in ups):
            results.add(inst)
        succ = []
        for u in ups:
            if u in pend or (useful_only and is_noop(inst, u)):
                continue
            succ.append((inst, pend | {u}))
        for u in pend:
            j = apply_update(inst, u)
            rest = pend - {u}
            if useful_only:
                rest = frozenset(v for v in rest if not is_noop(j, v))
            succ.append((j, rest))
        for t in succ:
            if t not in seen:
                if len(seen) >= bound:
                    raise BudgetExceeded(len(seen))
                seen.add(t)
                queue.append(t)
    return results


def reachable_states(
    p: Program, i: Iterable[Fact], bound: int = 200_000
) -> dict[tuple[frozenset[Fact], frozenset[Update]], list[tuple[frozenset[Fact], frozenset[Update]]]]:
    """Capped (multiplicity one) disorderly state graph from ``(i, ∅)``."""
    derive = _FiringCache(p)
    start = (frozenset(i), frozenset())
    graph: dict = {}
    queue = deque([start])
    graph[start] = None
    while queue:
        st = queue.popleft()
        inst, pend = st
        succ = [(inst, pend | {u}) for u in derive(inst) if u not in pend]
        succ += [(apply_update(inst, u), pend - {u}) for u in pend]
        graph[st] = succ
        for t in succ:
            if t not in graph:
                if len(graph) >= bound:
                    raise BudgetExceeded(len(graph))
                graph[t] = None
                queue.append(t)
    return graph


# fair runs -------------------------------------------------------------------

@dataclass(frozen=True)
class FairnessConfig:
    """Obligations older than ``slack * max(1, open obligations)`` steps are forced."""

    slack: int = 2
    record_states: bool = True


class NonTermination(RuntimeError):
    def __init__(self, trace: list[TraceStep], state: DisorderlyState):
        super().__init__(f"no terminal state within {len(trace)} steps")
        self.trace = trace
        self.state = state


@dataclass
class RunStats:
    steps: int = 0
    forced: int = 0
    max_obligation_age: int = 0
    max_open_obligations: int = 0


def disorderly_run(
    p: Program,
    i: Iterable[Fact],
    seed: int = 0,
    max_steps: int = 100_000,
    fairness: FairnessConfig = FairnessConfig(),
    stats: RunStats | None = None,
) -> tuple[DisorderlyState, list[TraceStep]]:
    """One fair trace from ``(i, ∅)`` until a terminal state.

    Free choices are uniform over the useful requests (derivable updates that
    would change the instance and are not pending) and the pending updates.
    Every choice is also an obligation; one whose age reaches the fairness
    bound is discharged before any free choice.  When the instance admits
    no useful request and every pending update is a no-op the remaining
    no-ops are applied and the run stops.
    """
    rng = random.Random(seed)
    derive = _FiringCache(p)
    inst = frozenset(i)
    pending: Counter = Counter()
    trace: list[TraceStep] = []
    obligations: dict[tuple[str, Update], int] = {}
    stats = stats if stats is not None else RunStats()
    step = 0

    def snapshot() -> DisorderlyState | None:
        if not fairness.record_states:
            return None
        return DisorderlyState(inst, UpdateBag.of(pending))

    while True:
        ups = derive(inst)
        requests = sorted(u for u in ups if not is_noop(inst, u) and pending[u] == 0)
        applies = sorted(u for u, n in pending.items() if n > 0)
        if not requests and all(is_noop(inst, u) for u in applies):
            for u in applies:
                for _ in range(pending[u]):
                    trace.append(TraceStep("insert" if u.positive else "delete", u, None, None))
                del pending[u]
            if fairness.record_states and applies:
                final = DisorderlyState(inst, UpdateBag())
                trace[-len(applies):] = [
                    TraceStep(t.kind, t.update, t.rule, final) for t in trace[-len(applies):]
                ]
            stats.steps = len(trace)
            return DisorderlyState(inst, UpdateBag()), trace
        if step >= max_steps:
            raise NonTermination(trace, DisorderlyState(inst, UpdateBag.of(pending)))
        choices = [("request", u) for u in requests] + [("apply", u) for u in applies]
        live = set(choices)
        for k in [k for k in obligations if k not in live]:
            del obligations[k]
        for k in choices:
            obligations.setdefault(k, step)
        stats.max_open_obligations = max(stats.max_open_obligations, len(obligations))
        oldest, born = next(iter(obligations.items()))
        if step - born >= fairness.slack * max(1, len(obligations)):
            pick = oldest
            stats.forced += 1
        else:
            pick = choices[rng.randrange(len(choices))]
        stats.max_obligation_age = max(stats.max_obligation_age, step - obligations[pick])
        del obligations[pick]
        kind, u = pick
        if kind == "request":
            pending[u] += 1
            trace.append(TraceStep("request", u, ups[u], snapshot()))
        else:
            pending[u] -= 1
            if pending[u] == 0:
                del pending[u]
            inst = apply_update(inst, u)
            trace.append(TraceStep("insert" if u.positive else "delete", u, None, snapshot()))
        step += 1


def replay(p: Program, i: Iterable[Fact], steps: Iterable[tuple[str, Update]]) -> DisorderlyState:
    """Check and apply a hand-written schedule; raises ``ValueError`` on an illegal step."""
    inst = frozenset(i)
    pending: Counter = Counter()
    derive = _FiringCache(p)
    for n, (kind, u) in enumerate(steps, 1):
        if kind == "request":
            if u not in derive(inst):
                raise ValueError(f"step {n}: {u} is not derivable")
            pending[u] += 1
        elif kind in ("insert", "delete", "apply"):
            if pending[u] <= 0:
                raise ValueError(f"step {n}: {u} is not pending")
            pending[u] -= 1
            inst = apply_update(inst, u)
        elif kind == "derive":
            # request immediately followed by application
            if u not in derive(inst):
                raise ValueError(f"step {n}: {u} is not derivable")
            inst = apply_update(inst, u)
        else:
            raise ValueError(f"unknown step kind {kind}")
    return DisorderlyState(inst, UpdateBag.of(pending))


# bounded property checkers ----------------------------------------------------

@dataclass(frozen=True)
class PropertyReport:
    instance: frozenset[Fact]
    results: frozenset[frozenset[Fact]] | None
    functional: bool | None
    terminating: bool | None
    note: str = ""

    @property
    def eventually_consistent(self) -> bool | None:
        if self.functional is None or self.terminating is None:
            return None
        return self.functional and self.terminating


def _terminating(p: Program, i: frozenset[Fact], bound: int) -> bool:
    """Every reachable state can still reach a terminal one."""
    graph = reachable_states(p, i, bound)
    derive = _FiringCache(p)
    good = {
        st
        for st in graph
        if all(is_noop(st[0], u) for u in st[1]) and all(is_noop(st[0], u) for u in derive(st[0]))
    }
    rev: dict = {}
    for st, succ in graph.items():
        for t in succ:
            rev.setdefault(t, []).append(st)
    stack = list(good)
    while stack:
        t = stack.pop()
        for s in rev.get(t, ()):
            if s not in good:
                good.add(s)
                stack.append(s)
    return len(good) == len(graph)


def check_properties(p: Program, inputs: Iterable[Iterable[Fact]], bound: int = 200_000) -> list[PropertyReport]:
    """Bounded, per-input verdicts; ``None`` marks an inconclusive input."""
    out = []
    for i in inputs:
        i = frozenset(i)
        try:
            res = disorderly_result_set(p, i, bound, useful_only=False)
            term = _terminating(p, i, bound)
            out.append(PropertyReport(i, frozenset(res), len(res) <= 1, term))
        except BudgetExceeded as e:
            out.append(PropertyReport(i, None, None, None, str(e)))
    return out


def check_functional(p: Program, inputs, bound: int = 200_000) -> list[bool | None]:
    return [r.functional for r in check_properties(p, inputs, bound)]


def check_terminating(p: Program, inputs, bound: int = 200_000) -> list[bool | None]:
    return [r.terminating for r in check_properties(p, inputs, bound)]


def check_eventually_consistent(p: Program, inputs, bound: int = 200_000) -> list[bool | None]:
    return [r.eventually_consistent for r in check_properties(p, inputs, bound)]


def diamond_failures(p: Program, s: DisorderlyState) -> list[tuple[DisorderlyState, DisorderlyState]]:
    """Pairs of distinct immediate successors of ``s`` with no common
    immediate successor (either may also be the other's successor)."""
    succ = [t for _, t in disorderly_successors(s, p)]
    nexts = {t: {x for _, x in disorderly_successors(t, p)} | {t} for t in succ}
    bad = []
    for a in range(len(succ)):
        for b in range(a + 1, len(succ)):
            if not nexts[succ[a]] & nexts[succ[b]]:
                bad.append((succ[a], succ[b]))
    return bad


def monotonicity_violations(p: Program, start: Iterable[Fact], trace: Iterable[TraceStep]) -> list[int]:
    """Steps at which an idb fact disappears or an eidb fact appears."""
    idb, eidb = p.schema.idb, p.schema.eidb
    prev = frozenset(start)
    bad = []
    for n, st in enumerate(trace):
        if st.state is None:
            continue
        cur = st.state.instance
        lost = {f for f in prev - cur if f.pred in idb}
        gained = {f for f in cur - prev if f.pred in eidb}
        if lost or gained:
            bad.append(n)
        prev = cur
    return bad


def iter_trace_lines(trace: Iterable[TraceStep]) -> Iterator[str]:
    for n, st in enumerate(trace, 1):
        yield st.line(n)
