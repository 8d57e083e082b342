"""Transducer networks: topology, partitioning policies and fair runs."""

from __future__ import annotations

import random
import zlib
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .parser import ParseError, parse_fact
from .syntax import Fact, active_domain
from .transducer import LOCAL_PREFIX, LocalState, Transducer, local_transition


class NetworkError(ValueError):
    pass


@dataclass(frozen=True)
class Network:
    nodes: tuple[str, ...]
    edges: frozenset[tuple[str, str]]

    def __post_init__(self):
        if not self.nodes:
            raise NetworkError("a network needs at least one node")
        if len(set(self.nodes)) != len(self.nodes):
            raise NetworkError("duplicate node names")
        ns = set(self.nodes)
        for a, b in self.edges:
            if a not in ns or b not in ns:
                raise NetworkError(f"edge {a} -> {b} mentions an unknown node")
        if not self.strongly_connected():
            raise NetworkError("the network must be strongly connected")

    def out_neighbors(self, n: str) -> list[str]:
        return sorted(b for a, b in self.edges if a == n and b != n)

    def strongly_connected(self) -> bool:
        def reach(adj: dict[str, set[str]]) -> set[str]:
            seen = {self.nodes[0]}
            stack = [self.nodes[0]]
            while stack:
                v = stack.pop()
                for w in adj.get(v, ()):
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            return seen

        fwd: dict[str, set[str]] = {}
        bwd: dict[str, set[str]] = {}
        for a, b in self.edges:
            fwd.setdefault(a, set()).add(b)
            bwd.setdefault(b, set()).add(a)
        return len(reach(fwd)) == len(self.nodes) == len(reach(bwd))

    @classmethod
    def complete(cls, n: int, prefix: str = "n") -> "Network":
        nodes = tuple(f"{prefix}{i}" for i in range(n))
        return cls(nodes, frozenset((a, b) for a in nodes for b in nodes if a != b))

    @classmethod
    def ring(cls, n: int, prefix: str = "n") -> "Network":
        nodes = tuple(f"{prefix}{i}" for i in range(n))
        return cls(nodes, frozenset((nodes[i], nodes[(i + 1) % n]) for i in range(n) if n > 1))

    @classmethod
    def random(cls, n: int, seed: int, extra: float = 0.3, prefix: str = "n") -> "Network":
        """A directed ring over a shuffled node order plus random chords."""
        rng = random.Random(seed)
        nodes = [f"{prefix}{i}" for i in range(n)]
        order = nodes[:]
        rng.shuffle(order)
        edges = {(order[i], order[(i + 1) % n]) for i in range(n) if n > 1}
        for a in nodes:
            for b in nodes:
                if a != b and rng.random() < extra:
                    edges.add((a, b))
        return cls(tuple(nodes), frozenset(edges))

    def to_text(self) -> str:
        lines = ["nodes: " + " ".join(self.nodes)]
        lines += [f"edge: {a} -> {b}" for a, b in sorted(self.edges)]
        return "\n".join(lines) + "\n"


def parse_topology(text: str) -> Network:
    nodes: list[str] = []
    edges: set[tuple[str, str]] = set()
    for n, raw in enumerate(text.split("\n"), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(":")
        if key == "nodes":
            nodes.extend(rest.split())
        elif key == "edge":
            a, arrow, b = rest.partition("->")
            if not arrow or not a.strip() or not b.strip():
                raise ParseError("expected 'edge: a -> b'", n, 1)
            edges.add((a.strip(), b.strip()))
        else:
            raise ParseError(f"unknown topology line {key!r}", n, 1)
    return Network(tuple(nodes), frozenset(edges))


def stable_hash(text: str) -> int:
    return zlib.crc32(text.encode("utf-8"))


POLICY_KINDS = ("single", "hash-element", "explicit-element", "explicit-fact", "hash-fact")


@dataclass(frozen=True)
class PartitioningPolicy:
    """Map from ground atoms to non-empty node sets.

    Element kinds derive the nodes of ``p(x1..xn)`` as the union of
    ``F(xi)``; explicit element maps fall back to hashing for constants
    they do not mention.  Nullary atoms use ``nullary`` (all nodes by
    default) under every kind except ``single``.
    """

    kind: str
    nodes: tuple[str, ...]
    element_map: Mapping[str, frozenset[str]] = field(default_factory=dict)
    fact_map: Mapping[Fact, frozenset[str]] = field(default_factory=dict)
    default: frozenset[str] | None = None
    nullary: Mapping[str, frozenset[str]] = field(default_factory=dict)
    node: str | None = None
    salt: str = ""
    adom: bool = False

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise NetworkError(f"unknown policy kind {self.kind}")
        known = set(self.nodes)
        sets = list(self.element_map.values()) + list(self.fact_map.values()) + list(self.nullary.values())
        if self.default is not None:
            sets.append(self.default)
        for s in sets:
            if not s or not s <= known:
                raise NetworkError(f"policy assigns {sorted(s)} which is empty or unknown")
        if self.kind == "single" and self.node not in known:
            raise NetworkError("single policy needs one of the network's nodes")

    @property
    def element_determined(self) -> bool:
        return self.kind in ("single", "hash-element", "explicit-element")

    def hash_node(self, text: str) -> str:
        return self.nodes[stable_hash(f"{self.salt}:{text}") % len(self.nodes)]

    def element(self, c: str) -> frozenset[str]:
        if self.kind == "single":
            return frozenset({self.node})
        if c in self.element_map:
            return frozenset(self.element_map[c])
        return frozenset({self.hash_node(c)})

    def nodes_for(self, f: Fact) -> frozenset[str]:
        if self.kind == "single":
            return frozenset({self.node})
        if self.kind == "explicit-fact":
            if f in self.fact_map:
                return frozenset(self.fact_map[f])
            if not f.args and f.pred in self.nullary:
                return frozenset(self.nullary[f.pred])
            if self.default is not None:
                return self.default
        if not f.args:
            return frozenset(self.nullary.get(f.pred, self.nodes))
        if self.kind in ("hash-element", "explicit-element"):
            out: set[str] = set()
            for c in f.args:
                out |= self.element(c)
            return frozenset(out)
        return frozenset({self.hash_node(str(f))})

    def responsible(self, node: str, f: Fact) -> bool:
        return node in self.nodes_for(f)

    def to_text(self) -> str:
        lines = [f"kind: {'adom+' if self.adom else ''}{self.kind}"]
        if self.node is not None:
            lines.append(f"node: {self.node}")
        if self.salt:
            lines.append(f"salt: {self.salt}")
        for c, ns in sorted(self.element_map.items()):
            lines.append(f"map: {c} -> {' '.join(sorted(ns))}")
        for f, ns in sorted(self.fact_map.items()):
            lines.append(f"fact: {f} -> {' '.join(sorted(ns))}")
        if self.default is not None:
            lines.append(f"default: {' '.join(sorted(self.default))}")
        for r, ns in sorted(self.nullary.items()):
            lines.append(f"nullary: {r} -> {' '.join(sorted(ns))}")
        return "\n".join(lines) + "\n"


def single_node_policy(nodes: Iterable[str], node: str | None = None, adom: bool = False) -> PartitioningPolicy:
    nodes = tuple(nodes)
    return PartitioningPolicy("single", nodes, node=node or nodes[0], adom=adom)


def element_policy(nodes: Iterable[str], mapping: Mapping[str, Iterable[str]], adom: bool = False) -> PartitioningPolicy:
    return PartitioningPolicy(
        "explicit-element", tuple(nodes), {c: frozenset(v) for c, v in mapping.items()}, adom=adom
    )


def hash_element_policy(nodes: Iterable[str], salt: str = "", adom: bool = False) -> PartitioningPolicy:
    return PartitioningPolicy("hash-element", tuple(nodes), salt=salt, adom=adom)


def fact_policy(
    nodes: Iterable[str],
    mapping: Mapping[Fact, Iterable[str]],
    default: Iterable[str] | None = None,
    adom: bool = False,
) -> PartitioningPolicy:
    return PartitioningPolicy(
        "explicit-fact",
        tuple(nodes),
        fact_map={f: frozenset(v) for f, v in mapping.items()},
        default=None if default is None else frozenset(default),
        adom=adom,
    )


def random_element_policy(nodes: Iterable[str], constants: Iterable[str], seed: int, replicate: float = 0.2) -> PartitioningPolicy:
    """Each constant lands on one random node, sometimes replicated to a second."""
    nodes = tuple(nodes)
    rng = random.Random(seed)
    mapping: dict[str, set[str]] = {}
    for c in sorted(constants):
        chosen = {rng.choice(nodes)}
        if len(nodes) > 1 and rng.random() < replicate:
            chosen.add(rng.choice(nodes))
        mapping[c] = chosen
    return element_policy(nodes, mapping)


def parse_policy(text: str, nodes: Iterable[str]) -> PartitioningPolicy:
    nodes = tuple(nodes)
    kind = None
    adom = False
    emap: dict[str, frozenset[str]] = {}
    fmap: dict[Fact, frozenset[str]] = {}
    nullary: dict[str, frozenset[str]] = {}
    default = None
    node = None
    salt = ""

    def node_set(spec: str, n: int) -> frozenset[str]:
        items = spec.split()
        if items == ["*"]:
            return frozenset(nodes)
        if not items:
            raise ParseError("empty node list", n, 1)
        return frozenset(items)

    for n, raw in enumerate(text.split("\n"), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(":")
        rest = rest.strip()
        if key == "kind":
            if rest.startswith("adom+"):
                adom, rest = True, rest[len("adom+"):]
            kind = rest
        elif key == "node":
            node = rest
        elif key == "salt":
            salt = rest
        elif key == "default":
            default = node_set(rest, n)
        elif key in ("map", "fact", "nullary"):
            lhs, arrow, rhs = rest.rpartition("->")
            if not arrow:
                raise ParseError(f"expected '{key}: x -> nodes'", n, 1)
            targets = node_set(rhs, n)
            lhs = lhs.strip()
            if key == "map":
                emap[lhs] = targets
            elif key == "fact":
                fmap[parse_fact(lhs)] = targets
            else:
                nullary[lhs] = targets
        else:
            raise ParseError(f"unknown policy line {key!r}", n, 1)
    if kind is None:
        raise ParseError("policy needs a kind line")
    if kind == "single" and node is None:
        node = nodes[0]
    return PartitioningPolicy(kind, nodes, emap, fmap, default, nullary, node, salt, adom)


@dataclass(frozen=True)
class FaultSpec:
    blocked: frozenset[tuple[str, str]] = frozenset()

    @classmethod
    def isolate(cls, net: Network, node: str) -> "FaultSpec":
        return cls(frozenset(e for e in net.edges if node in e))


@dataclass
class GlobalNetworkState:
    transducer: Transducer
    network: Network
    policy: PartitioningPolicy
    locals: dict[str, LocalState]
    buffers: dict[str, list[tuple[Fact, int]]]  # (message, sweep it was enqueued in)
    output: set[tuple[str, ...]] = field(default_factory=set)
    faults: FaultSpec = field(default_factory=FaultSpec)
    steps: int = 0
    deliveries: int = 0
    sweep: int = 0

    def copy(self) -> "GlobalNetworkState":
        return GlobalNetworkState(
            self.transducer,
            self.network,
            self.policy,
            dict(self.locals),
            {n: list(b) for n, b in self.buffers.items()},
            set(self.output),
            self.faults,
            self.steps,
            self.deliveries,
            self.sweep,
        )

    def buffer_bag(self, node: str) -> Counter:
        return Counter(f for f, _ in self.buffers[node])

    def output_facts(self) -> frozenset[Fact]:
        return frozenset(Fact(self.transducer.output_name, t) for t in self.output)

    def buffers_empty(self) -> bool:
        return all(not b for b in self.buffers.values())


def _oracles(t: Transducer, policy: PartitioningPolicy, node: str) -> dict[str, Callable]:
    out = {}
    for rel in t.schema.oracles:
        base = rel[len(LOCAL_PREFIX):]

        def check(args: tuple[str, ...], _base=base) -> bool:
            return node in policy.nodes_for(Fact(_base, args))

        out[rel] = check
    return out


def distribute_input(
    i: Iterable[Fact],
    net: Network,
    pol: PartitioningPolicy,
    t: Transducer,
    faults: FaultSpec = FaultSpec(),
) -> GlobalNetworkState:
    i = frozenset(i)
    if tuple(pol.nodes) != tuple(net.nodes):
        raise NetworkError("policy and network disagree on the node set")
    for f in i:
        if t.schema.s_in.get(f.pred) != len(f.args):
            raise NetworkError(f"{f} is not over the transducer's input schema")
    sys_facts: frozenset[Fact] = frozenset()
    if pol.adom:
        if t.schema.s_sys.get("adom") != 1:
            raise NetworkError("adom policies need a transducer with adom/1")
        sys_facts = frozenset(Fact("adom", (c,)) for c in active_domain(i))
    locals_ = {}
    for n in net.nodes:
        part = frozenset(f for f in i if n in pol.nodes_for(f))
        locals_[n] = LocalState(part | sys_facts, _oracles(t, pol, n))
    for f in i:
        if not pol.nodes_for(f):
            raise NetworkError(f"policy assigns no node to {f}")
    return GlobalNetworkState(t, net, pol, locals_, {n: [] for n in net.nodes}, faults=faults)


@dataclass(frozen=True)
class StepRecord:
    step: int
    node: str
    kind: str  # heartbeat | delivery
    msg: Fact | None
    sent: tuple[Fact, ...]
    out: tuple[tuple[str, ...], ...]
    memory_changed: bool
    before: LocalState
    after: LocalState

    def line(self, output_name: str = "out") -> str:
        sent = ",".join(str(f) for f in self.sent)
        out = ",".join(str(Fact(output_name, t)) for t in self.out)
        msg = "-" if self.msg is None else str(self.msg)
        return f"step={self.step} node={self.node} kind={self.kind} msg={msg} sent=[{sent}] out=[{out}]"

    @property
    def active(self) -> bool:
        return self.memory_changed or bool(self.sent) or bool(self.out)


def _transition(g: GlobalNetworkState, node: str, msg: Fact | None) -> StepRecord:
    before = g.locals[node]
    tr = local_transition(g.transducer, before, () if msg is None else (msg,))
    g.locals[node] = tr.new
    sent = tuple(sorted(tr.sent))
    for m in sent:
        for nb in g.network.out_neighbors(node):
            if (node, nb) not in g.faults.blocked:
                g.buffers[nb].append((m, g.sweep))
    new_out = tuple(sorted(tr.out - g.output))
    g.output |= tr.out
    g.steps += 1
    changed = tr.new.instance != before.instance
    return StepRecord(g.steps, node, "heartbeat" if msg is None else "delivery", msg, sent, new_out, changed, before, tr.new)


def _deliver_index(g: GlobalNetworkState, node: str, k: int) -> StepRecord:
    msg, _ = g.buffers[node].pop(k)
    g.deliveries += 1
    return _transition(g, node, msg)


def step_delivery(g: GlobalNetworkState, node: str, msg: Fact) -> tuple[GlobalNetworkState, StepRecord]:
    g = g.copy()
    for k, (f, _) in enumerate(g.buffers[node]):
        if f == msg:
            return g, _deliver_index(g, node, k)
    raise NetworkError(f"{msg} is not in the buffer of {node}")


def step_heartbeat(g: GlobalNetworkState, node: str) -> tuple[GlobalNetworkState, StepRecord]:
    g = g.copy()
    return g, _transition(g, node, None)


@dataclass
class RunResult:
    output: frozenset[tuple[str, ...]]
    quiescent: bool
    state: GlobalNetworkState
    trace: list[StepRecord]
    max_age: int = 0
    sweeps: int = 0

    def output_facts(self) -> frozenset[Fact]:
        return self.state.output_facts()

    def trace_lines(self) -> list[str]:
        return [r.line(self.state.transducer.output_name) for r in self.trace]


Observer = Callable[[GlobalNetworkState, StepRecord], None]


def run_fair(
    g: GlobalNetworkState,
    seed: int = 0,
    max_steps: int = 200_000,
    *,
    max_age: int = 3,
    delivery_bias: float = 0.6,
    observer: Observer | None = None,
    keep_trace: bool = False,
) -> RunResult:
    """Seeded fair run until quiescence or ``max_steps`` transitions.

    Each sweep visits the nodes in a shuffled order.  At its turn a node
    first receives every buffered fact enqueued ``max_age`` or more sweeps
    ago, then a random number of randomly picked buffered facts, then does
    one heartbeat.  The run is quiescent after a sweep without any effect
    (no memory change, send or new output) that ends with empty buffers.
    """
    g = g.copy()
    rng = random.Random(seed)
    trace: list[StepRecord] = []
    oldest = 0
    nodes = sorted(g.network.nodes)

    def record(rec: StepRecord) -> None:
        if keep_trace:
            trace.append(rec)
        if observer is not None:
            observer(g, rec)

    while g.steps < max_steps:
        g.sweep += 1
        activity = False
        order = nodes[:]
        rng.shuffle(order)
        for node in order:
            buf = g.buffers[node]
            while True:
                stale = [k for k, (_, born) in enumerate(buf) if g.sweep - born >= max_age]
                if not stale:
                    break
                k = stale[0]
                oldest = max(oldest, g.sweep - buf[k][1])
                rec = _deliver_index(g, node, k)
                activity |= rec.active
                record(rec)
            while buf and rng.random() < delivery_bias:
                k = rng.randrange(len(buf))
                oldest = max(oldest, g.sweep - buf[k][1])
                rec = _deliver_index(g, node, k)
                activity |= rec.active
                record(rec)
            rec = _transition(g, node, None)
            activity |= rec.active
            record(rec)
        if not activity and g.buffers_empty():
            return RunResult(frozenset(g.output), True, g, trace, oldest, g.sweep)
    return RunResult(frozenset(g.output), False, g, trace, oldest, g.sweep)


def run_heartbeat_only(
    g: GlobalNetworkState,
    max_steps: int = 100_000,
    nodes: Iterable[str] | None = None,
    *,
    observer: Observer | None = None,
    keep_trace: bool = False,
) -> RunResult:
    """Round-robin heartbeats with no deliveries, until a round changes
    neither memory nor output at any of ``nodes``."""
    g = g.copy()
    chosen = sorted(nodes) if nodes is not None else sorted(g.network.nodes)
    trace: list[StepRecord] = []
    while g.steps < max_steps:
        g.sweep += 1
        busy = False
        for n in chosen:
            rec = _transition(g, n, None)
            busy |= rec.memory_changed or bool(rec.out)
            if keep_trace:
                trace.append(rec)
            if observer is not None:
                observer(g, rec)
        if not busy:
            return RunResult(frozenset(g.output), True, g, trace, 0, g.sweep)
    return RunResult(frozenset(g.output), False, g, trace, 0, g.sweep)


@dataclass(frozen=True)
class Cell:
    input: frozenset[Fact]
    network: Network
    policy: PartitioningPolicy
    seed: int
    faults: FaultSpec = FaultSpec()
    label: str = ""


@dataclass(frozen=True)
class CellResult:
    cell: Cell
    output: frozenset[tuple[str, ...]]
    expected: frozenset[tuple[str, ...]]
    quiescent: bool
    max_age: int

    @property
    def ok(self) -> bool:
        return self.quiescent and self.output == self.expected


def consistency_sweep(
    t: Transducer,
    cells: Iterable[Cell],
    reference: Callable[[frozenset[Fact]], Iterable[tuple[str, ...]]],
    *,
    max_steps: int = 200_000,
    observer_factory: Callable[[Cell], Observer | None] | None = None,
) -> list[CellResult]:
    out = []
    for cell in cells:
        g = distribute_input(cell.input, cell.network, cell.policy, t, cell.faults)
        obs = observer_factory(cell) if observer_factory else None
        r = run_fair(g, cell.seed, max_steps, observer=obs)
        out.append(CellResult(cell, r.output, frozenset(reference(cell.input)), r.quiescent, r.max_age))
    return out


def candidate_policies(net: Network, adom: bool = False, salts: int = 3) -> list[PartitioningPolicy]:
    out = [single_node_policy(net.nodes, n, adom=adom) for n in net.nodes]
    out += [hash_element_policy(net.nodes, salt=str(s), adom=adom) for s in range(salts)]
    return out


def coordination_free_witness(
    t: Transducer,
    i: Iterable[Fact],
    net: Network,
    expected: Iterable[tuple[str, ...]],
    *,
    candidates: Iterable[PartitioningPolicy] | None = None,
    max_steps: int = 100_000,
) -> PartitioningPolicy | None:
    """First candidate policy whose heartbeat-only run yields ``expected``."""
    i = frozenset(i)
    expected = frozenset(expected)
    adom = "adom" in t.schema.s_sys
    for pol in candidates if candidates is not None else candidate_policies(net, adom=adom):
        g = distribute_input(i, net, pol, t)
        r = run_heartbeat_only(g, max_steps)
        if r.quiescent and r.output == expected and r.state.deliveries == 0:
            return pol
    return None
