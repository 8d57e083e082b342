"""Deliberately naive reference implementations used only by the tests."""

import itertools

from disorderly.syntax import Const, Fact, Update, Var, active_domain


def _value(t, env):
    return t.value if isinstance(t, Const) else env[t.name]


def _holds(atom, env, instance, positive):
    f = Fact(atom.pred, tuple(_value(t, env) for t in atom.args))
    return (f in instance) == positive


def brute_valuations(rule, instance, constants=()):
    """Every assignment of the rule's free variables over adom ∪ constants
    that satisfies the body, forall variables checked exhaustively."""
    dom = sorted(active_domain(instance) | set(constants) | rule.constants())
    free = sorted(v for v in rule.variables() if v not in rule.forall)
    bound = sorted(rule.forall)
    out = set()
    for vals in itertools.product(dom, repeat=len(free)):
        env = dict(zip(free, vals))
        ok = all(_holds(l.atom, env, instance, True) for l in rule.body if l.positive)
        if not ok:
            continue
        for ws in itertools.product(dom, repeat=len(bound)):
            env2 = env | dict(zip(bound, ws))
            if not all(_holds(l.atom, env2, instance, False) for l in rule.body if not l.positive):
                ok = False
                break
        if ok:
            head = Fact(rule.head.atom.pred, tuple(_value(t, env) for t in rule.head.atom.args))
            out.add((tuple(sorted(env.items())), Update(rule.head.positive, head)))
    return out


def brute_gamma(p, edb, j):
    """Naive lfp of I -> edb ∪ T^J(I) with brute-force grounding."""
    cur = set(edb)
    consts = active_domain(edb) | p.constants
    while True:
        new = set(cur)
        for r in p.rules:
            dom = sorted(active_domain(cur) | consts)
            vs = sorted(r.variables())
            for vals in itertools.product(dom, repeat=len(vs)):
                env = dict(zip(vs, vals))
                if all(_holds(l.atom, env, cur, True) for l in r.body if l.positive) and all(
                    _holds(l.atom, env, j, False) for l in r.body if not l.positive
                ):
                    new.add(Fact(r.head.atom.pred, tuple(_value(t, env) for t in r.head.atom.args)))
        if new == cur:
            return frozenset(cur)
        cur = new


def brute_wf(p, edb):
    """(true, possibly-true) via the plain alternating sequence of brute_gamma."""
    seq = [frozenset()]
    while True:
        seq.append(brute_gamma(p, edb, seq[-1]))
        if len(seq) >= 3 and seq[-1] == seq[-3]:
            a, b = seq[-1], seq[-2]
            return (a, b) if a <= b else (b, a)
        if seq[-1] == seq[-2] and len(seq) > 2:
            return seq[-1], seq[-1]


def minimax_game(positions, moves, horizon=None):
    """Game values by bounded-horizon backward evaluation.

    A position is won if some move reaches a position lost within the
    remaining horizon; positions undetermined at every horizon are drawn.
    """
    succ = {p: sorted(b for a, b in moves if a == p) for p in positions}
    horizon = horizon if horizon is not None else 2 * len(positions) + 2
    status = {p: None for p in positions}
    for _ in range(horizon):
        nxt = {}
        for p in positions:
            if any(status[q] == "lost" for q in succ[p]):
                nxt[p] = "won"
            elif all(status[q] == "won" for q in succ[p]):
                nxt[p] = "lost"
            else:
                nxt[p] = None
        status = nxt
    won = frozenset(p for p, s in status.items() if s == "won")
    lost = frozenset(p for p, s in status.items() if s == "lost")
    return won, lost, frozenset(positions) - won - lost
